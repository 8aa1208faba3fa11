#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "perturb.hpp"

namespace vqalab {

enum class ModelMode { Full, QOnly };
enum class InputMode { Question, Prefix, Postfix, Variant1, Variant2, Variant3, Identity };

std::string model_mode_name(ModelMode m);
ModelMode model_mode_from_name(const std::string& name);
std::string input_mode_name(InputMode m);
InputMode input_mode_from_name(const std::string& name);

// Per-question-type answer marginal: `major` gets `mass`, the remaining
// mass is spread uniformly over the rest of that type's answer support.
struct SkewSpec {
  std::string major;
  double mass = 0.0;
};

struct CooccurConfig {
  double train_mass = 0.75;  // P(preferred attribute | object class) in train/test_id
  double ood_mass = 0.75;    // same, test_ood
  int ood_shift = 3;         // preferred attribute rotates by this much in test_ood
};

struct GeneratorConfig {
  uint64_t seed = 42;
  int64_t n_train = 20000;
  int64_t n_test = 4000;       // per test split
  int scene_objects = 6;       // K
  double noise = 0.05;         // additive feature noise amplitude
  std::map<std::string, SkewSpec> prefix_skew;  // train & test_id marginals
  std::map<std::string, SkewSpec> ood_skew;     // test_ood marginals
  CooccurConfig cooccur;
};

struct ModelConfig {
  int embed_dim = 64;    // d
  int hidden_dim = 128;  // d_h
  int pad_length = 14;   // L
  double init_scale = 0.08;
  // The position table starts smaller than the other weights so the
  // attention scores are content-led early in training; word order still
  // becomes visible as the table grows.
  double position_init_scale = 0.02;
};

struct TrainConfig {
  int epochs = 15;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 42;
};

enum class DebiasMethod { None, Contrastive, Mixing };

std::string debias_method_name(DebiasMethod m);
DebiasMethod debias_method_from_name(const std::string& name);

struct DebiasConfig {
  DebiasMethod method = DebiasMethod::None;
  double lambda = 1.0;  // weight of the contrastive term
  double alpha = 0.5;   // original-encoding weight in feature mixing
  VariantKind variant_kind = VariantKind::Variant1;
  std::string mix_level = "question";  // "question" | "fused"
  bool reshuffle_per_epoch = false;    // variant-2 only
};

struct EvalSpec {
  std::string split = "test_ood";  // train | test_id | test_ood
  InputMode input = InputMode::Question;
  bool attention = false;
  bool encodings = false;
};

struct CellConfig {
  std::string name;
  InputMode train_input = InputMode::Question;
  ModelMode model_mode = ModelMode::Full;
  DebiasConfig debias;
  std::optional<int> epochs;      // overrides train.epochs
  std::optional<uint64_t> seed;   // overrides train.seed
  std::vector<EvalSpec> evals;
};

struct MatrixConfig {
  std::vector<CellConfig> cells;
  int jobs = 1;
};

struct ReportConfig {
  int top_k = 10;             // question types per flip histogram
  int attention_examples = 8; // per-word dumps kept per cell
};

struct Config {
  GeneratorConfig generator;
  ModelConfig model;
  TrainConfig train;
  DebiasConfig debias;  // defaults inherited by cells
  MatrixConfig matrix;
  ReportConfig report;
  std::string output_dir = "out";
};

Config default_config();

// Defaults overlaid with `patch`; unknown keys raise ConfigError.
Config config_from_json(const nlohmann::json& patch);
nlohmann::json config_to_json(const Config& cfg);

// Sets a dotted key ("train.seed") in a raw config patch.
void json_set_path(nlohmann::json& root, const std::string& dotted_key,
                   const nlohmann::json& value);

uint64_t fnv1a64(const void* data, size_t len);
std::string config_hash_hex(const Config& cfg);

}  // namespace vqalab
