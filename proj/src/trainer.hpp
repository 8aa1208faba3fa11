#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "dataset.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "perturb.hpp"

namespace vqalab {

// The position permutation a variant applies to an n-token question;
// rendering and surface morphing share it so both stay in lockstep.
std::vector<size_t> variant_permutation(const Question& q, VariantKind kind,
                                        const PerturbSeed& s);

struct RenderedInput {
  std::vector<int> ids;               // length L
  std::vector<std::string> surfaces;  // by position; "" on pads
  std::vector<bool> is_prefix;        // position holds a prefix token
};

// Renders a question under one input regime. Prefix/postfix modes keep the
// surviving tokens at their original positions and put padding where the
// removed part was.
RenderedInput render_input(const Question& q, InputMode mode, size_t length,
                           const Vocabulary& vocab, uint64_t perturb_seed);

// One fully-resolved training cell.
struct RunSpec {
  InputMode train_input = InputMode::Question;
  ModelMode model_mode = ModelMode::Full;
  DebiasConfig debias;
  ModelConfig model;
  TrainConfig hyper;  // epochs/seed already resolved per cell
};

struct TrainedModel {
  ModelParams params;
  Vocabulary vocab;
  std::vector<std::string> answer_vocab;
  QTypeLexicon lexicon;
  nlohmann::json info;
};

struct TrainResult {
  TrainedModel model;
  std::vector<double> epoch_losses;
};

struct TrainHooks {
  ForwardHooks forward;  // token-access audit
};

// Deterministic single-threaded training under the given input regime.
// Throws TrainerError when the loss stops being finite.
TrainResult train(const Dataset& data, const RunSpec& spec,
                  const TrainHooks* hooks = nullptr);

void save_model(const std::string& path, const TrainedModel& model);
TrainedModel load_model(const std::string& path);

struct AttentionRow {
  int64_t question_id = 0;
  std::vector<std::string> words;
  std::vector<double> weights;
  double prefix_mass = 0.0;
  std::string qtype;
};

struct EncodingRow {
  int64_t question_id = 0;
  std::vector<double> q_enc;
};

struct EvalOutputs {
  std::vector<PredictionRecord> records;
  std::vector<AttentionRow> attention;  // filled when requested
  std::vector<EncodingRow> encodings;   // filled when requested
};

struct EvalRequest {
  InputMode input = InputMode::Question;
  uint64_t perturb_seed = 0;  // stream for variant-2 rendering
  bool want_attention = false;
  bool want_encodings = false;
};

EvalOutputs evaluate(const TrainedModel& model, const std::vector<Sample>& split,
                     const EvalRequest& req, const ForwardHooks* hooks = nullptr);

void save_attention(const std::string& path, const std::vector<AttentionRow>& rows);
std::vector<AttentionRow> load_attention(const std::string& path);
void save_encodings(const std::string& path, const std::vector<EncodingRow>& rows);
std::vector<EncodingRow> load_encodings(const std::string& path);

void save_loss_log(const std::string& path, const std::vector<double>& losses);

// Hard failure on NaN/Inf in the loss stream.
void ensure_finite_loss(double loss, int epoch);

}  // namespace vqalab
