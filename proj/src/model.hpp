#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "question.hpp"
#include "rng.hpp"

namespace vqalab {

struct ModelDims {
  int vocab_size = 0;    // |V|
  int answer_count = 0;  // |A|
  int embed_dim = 64;    // d
  int hidden_dim = 128;  // d_h
  int pad_length = 14;   // L
  int feature_dim = 0;   // D_v
  int scene_objects = 0; // K
  ModelMode mode = ModelMode::Full;

  bool operator==(const ModelDims&) const = default;
};

ModelDims dims_from_config(const ModelConfig& mc, int vocab_size, int answer_count,
                           int feature_dim, int scene_objects, ModelMode mode);

// A named view over one parameter buffer; used by the optimizer, the
// checkpoint codec and the finite-difference harness.
struct TensorRef {
  std::string name;
  std::vector<double>* data;
  std::vector<size_t> shape;
};

struct ModelParams {
  ModelDims dims;
  std::vector<double> E;     // V x d, word embeddings
  std::vector<double> P;     // L x d, position embeddings
  std::vector<double> u;     // d, token attention vector
  std::vector<double> u_b;   // 1, token attention bias
  std::vector<double> M;     // d x D_v, question->object attention map
  std::vector<double> F;     // d_h x d, fusion weights
  std::vector<double> F_b;   // d_h
  std::vector<double> W;     // |A| x d_h, classifier
  std::vector<double> W_b;   // |A|

  static ModelParams zeros(const ModelDims& dims);
  static ModelParams init(const ModelDims& dims, double init_scale,
                          double position_init_scale, Rng& rng);

  std::vector<TensorRef> tensors();
  std::vector<TensorRef> tensors() const;

  void add_scaled(const ModelParams& other, double scale);
  void fill(double value);
};

// Forward intermediates. token_attn and obj_attn are simplex vectors over
// the valid positions / object slots; p is the answer distribution.
struct Encodings {
  std::vector<int> ids;            // L padded input
  std::vector<int> valid;          // non-pad position indices
  std::vector<double> e;           // L x d, word embedding rows
  std::vector<double> z;           // L x d, tanh(E + P) rows (score input)
  std::vector<double> token_attn;  // L (zero on pads)
  std::vector<double> q_enc;       // d, attention-weighted sum of E rows

  std::vector<double> mo;          // K x d, M . obj_k
  std::vector<double> obj_attn;    // K
  std::vector<double> scene_vec;   // D_v
  std::vector<double> proj_scene;  // d
  std::vector<double> g;           // d, fusion input
  std::vector<double> h;           // d_h
  std::vector<double> logits;      // |A|
  std::vector<double> p;           // |A|
  const double* scene = nullptr;   // borrowed K x D_v block
};

struct ForwardHooks {
  // Called once per embedding-table access with the looked-up id.
  std::vector<int>* token_access_log = nullptr;
};

// Stage 1: padded ids -> q_enc (and the token caches backward needs).
void encode_question(const ModelParams& params, std::span<const int> ids, Encodings& enc,
                     const ForwardHooks* hooks = nullptr);
// Stage 2: q_enc (+ scene unless q_only) -> h.
void fuse(const ModelParams& params, const std::vector<double>& q_enc, const double* scene,
          Encodings& enc);
// Stage 3: h -> logits, p.
void classify(const ModelParams& params, Encodings& enc);

// All three stages. `scene` may be null in q_only mode.
Encodings forward(const ModelParams& params, std::span<const int> ids, const double* scene,
                  const ForwardHooks* hooks = nullptr);

// Backward counterparts; each accumulates into `grads`.
void classify_backward(const ModelParams& params, const Encodings& enc,
                       const std::vector<double>& d_logits, ModelParams& grads,
                       std::vector<double>& d_h);
void fuse_backward(const ModelParams& params, const Encodings& enc,
                   const std::vector<double>& d_h, ModelParams& grads,
                   std::vector<double>& d_q_enc);
void encode_backward(const ModelParams& params, const Encodings& enc,
                     const std::vector<double>& d_q_enc, ModelParams& grads);

// Full backward pass from d_logits.
void backward(const ModelParams& params, const Encodings& enc,
              const std::vector<double>& d_logits, ModelParams& grads);

// argmax with ties broken toward the lowest index.
int predict(const std::vector<double>& p);

// Mean cross-entropy over a batch of answer distributions against targets
// given as gold indices (one-hot a_i). Returns the loss; writes the
// per-sample d_logits = (p - a) / N into `d_logits_out` when non-null.
double ce_loss(const std::vector<const std::vector<double>*>& p_batch,
               const std::vector<int>& gold,
               std::vector<std::vector<double>>* d_logits_out = nullptr);

// (surface word, weight) pairs over non-pad positions, renormalized.
std::vector<std::pair<std::string, double>> dump_attention(const Encodings& enc,
                                                           const Question& q);

// Checkpoint: small JSON header (dims + embedded metadata) followed by raw
// little-endian float64 tensor payloads; round-trips bit-exactly.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const nlohmann::json& metadata);
struct Checkpoint {
  ModelParams params;
  nlohmann::json metadata;
};
Checkpoint load_checkpoint(const std::string& path);

double tensor_l2(const std::vector<double>& v);

}  // namespace vqalab
