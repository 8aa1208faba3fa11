#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "errors.hpp"

namespace vqalab {
namespace {

void softmax_inplace(std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : v) x /= sum;
}


}  // namespace

ModelDims dims_from_config(const ModelConfig& mc, int vocab_size, int answer_count,
                           int feature_dim, int scene_objects, ModelMode mode) {
  ModelDims d;
  d.vocab_size = vocab_size;
  d.answer_count = answer_count;
  d.embed_dim = mc.embed_dim;
  d.hidden_dim = mc.hidden_dim;
  d.pad_length = mc.pad_length;
  d.feature_dim = feature_dim;
  d.scene_objects = scene_objects;
  d.mode = mode;
  return d;
}

ModelParams ModelParams::zeros(const ModelDims& dims) {
  ModelParams p;
  p.dims = dims;
  const size_t V = dims.vocab_size, d = dims.embed_dim, L = dims.pad_length,
               Dv = dims.feature_dim, dh = dims.hidden_dim, A = dims.answer_count;
  p.E.assign(V * d, 0.0);
  p.P.assign(L * d, 0.0);
  p.u.assign(d, 0.0);
  p.u_b.assign(1, 0.0);
  p.M.assign(d * Dv, 0.0);
  p.F.assign(dh * d, 0.0);
  p.F_b.assign(dh, 0.0);
  p.W.assign(A * dh, 0.0);
  p.W_b.assign(A, 0.0);
  return p;
}

ModelParams ModelParams::init(const ModelDims& dims, double init_scale,
                              double position_init_scale, Rng& rng) {
  ModelParams p = zeros(dims);
  // Weights uniform(-s, s); biases stay zero. The draw order is part of
  // the determinism contract.
  for (auto* w : {&p.E, &p.u, &p.M, &p.F, &p.W})
    for (double& x : *w) x = rng.uniform(-init_scale, init_scale);
  for (double& x : p.P) x = rng.uniform(-position_init_scale, position_init_scale);
  // The pad row never enters the forward pass; zero it for tidy dumps.
  for (int j = 0; j < dims.embed_dim; ++j) p.E[static_cast<size_t>(kPadId) * dims.embed_dim + j] = 0.0;
  return p;
}

std::vector<TensorRef> ModelParams::tensors() {
  const size_t V = dims.vocab_size, d = dims.embed_dim, L = dims.pad_length,
               Dv = dims.feature_dim, dh = dims.hidden_dim, A = dims.answer_count;
  return {
      {"E", &E, {V, d}},     {"P", &P, {L, d}},    {"u", &u, {d}},
      {"u_b", &u_b, {1}},    {"M", &M, {d, Dv}},   {"F", &F, {dh, d}},
      {"F_b", &F_b, {dh}},   {"W", &W, {A, dh}},   {"W_b", &W_b, {A}},
  };
}

std::vector<TensorRef> ModelParams::tensors() const {
  return const_cast<ModelParams*>(this)->tensors();
}

void ModelParams::add_scaled(const ModelParams& other, double scale) {
  auto mine = tensors();
  auto theirs = other.tensors();
  for (size_t i = 0; i < mine.size(); ++i) {
    auto& a = *mine[i].data;
    const auto& b = *theirs[i].data;
    for (size_t j = 0; j < a.size(); ++j) a[j] += scale * b[j];
  }
}

void ModelParams::fill(double value) {
  for (auto& t : tensors()) std::fill(t.data->begin(), t.data->end(), value);
}

void encode_question(const ModelParams& params, std::span<const int> ids, Encodings& enc,
                     const ForwardHooks* hooks) {
  const ModelDims& dims = params.dims;
  const int L = dims.pad_length, d = dims.embed_dim;
  if (static_cast<int>(ids.size()) != L)
    throw ModelError("input id sequence has length " + std::to_string(ids.size()) +
                     ", expected " + std::to_string(L));
  enc.ids.assign(ids.begin(), ids.end());
  enc.valid.clear();
  for (int t = 0; t < L; ++t) {
    int id = ids[t];
    if (id == kPadId) continue;
    if (id < 0 || id >= dims.vocab_size)
      throw ModelError("token id " + std::to_string(id) + " outside vocabulary");
    enc.valid.push_back(t);
  }
  if (enc.valid.empty())
    throw ModelError("question input contains no non-pad tokens");

  enc.e.assign(static_cast<size_t>(L) * d, 0.0);
  enc.z.assign(static_cast<size_t>(L) * d, 0.0);
  std::vector<double> scores(enc.valid.size(), 0.0);
  for (size_t vi = 0; vi < enc.valid.size(); ++vi) {
    int t = enc.valid[vi];
    int id = ids[t];
    if (hooks && hooks->token_access_log) hooks->token_access_log->push_back(id);
    const double* e_in = &params.E[static_cast<size_t>(id) * d];
    const double* p_row = &params.P[static_cast<size_t>(t) * d];
    double* e_row = &enc.e[static_cast<size_t>(t) * d];
    double* z_row = &enc.z[static_cast<size_t>(t) * d];
    double s = params.u_b[0];
    for (int j = 0; j < d; ++j) {
      e_row[j] = e_in[j];
      // Position enters through the attention score only; the pooled
      // encoding itself stays in content space.
      double z = std::tanh(e_in[j] + p_row[j]);
      z_row[j] = z;
      s += params.u[j] * z;
    }
    scores[vi] = s;
  }
  softmax_inplace(scores);
  enc.token_attn.assign(L, 0.0);
  enc.q_enc.assign(d, 0.0);
  for (size_t vi = 0; vi < enc.valid.size(); ++vi) {
    int t = enc.valid[vi];
    enc.token_attn[t] = scores[vi];
    const double* e_row = &enc.e[static_cast<size_t>(t) * d];
    for (int j = 0; j < d; ++j) enc.q_enc[j] += scores[vi] * e_row[j];
  }
}

void fuse(const ModelParams& params, const std::vector<double>& q_enc_in, const double* scene,
          Encodings& enc) {
  const ModelDims& dims = params.dims;
  const int d = dims.embed_dim, dh = dims.hidden_dim, Dv = dims.feature_dim,
            K = dims.scene_objects;
  if (static_cast<int>(q_enc_in.size()) != d)
    throw ModelError("question encoding has wrong dimension");
  // The cache must hold the vector actually fused (it may be a mixed
  // encoding rather than this sample's own token path).
  if (&enc.q_enc != &q_enc_in) enc.q_enc = q_enc_in;
  const std::vector<double>& q_enc = enc.q_enc;

  if (dims.mode == ModelMode::Full) {
    if (scene == nullptr) throw ModelError("full mode requires scene features");
    enc.scene = scene;
    enc.mo.assign(static_cast<size_t>(K) * d, 0.0);
    std::vector<double> scores(K, 0.0);
    for (int k = 0; k < K; ++k) {
      const double* obj = scene + static_cast<size_t>(k) * Dv;
      double* mo_row = &enc.mo[static_cast<size_t>(k) * d];
      double s = 0.0;
      for (int j = 0; j < d; ++j) {
        const double* m_row = &params.M[static_cast<size_t>(j) * Dv];
        double acc = 0.0;
        for (int i = 0; i < Dv; ++i) acc += m_row[i] * obj[i];
        mo_row[j] = acc;
        s += q_enc[j] * acc;
      }
      scores[k] = s;
    }
    softmax_inplace(scores);
    enc.obj_attn = scores;
    enc.scene_vec.assign(Dv, 0.0);
    for (int k = 0; k < K; ++k) {
      const double* obj = scene + static_cast<size_t>(k) * Dv;
      for (int i = 0; i < Dv; ++i) enc.scene_vec[i] += scores[k] * obj[i];
    }
    enc.proj_scene.assign(d, 0.0);
    for (int j = 0; j < d; ++j) {
      const double* m_row = &params.M[static_cast<size_t>(j) * Dv];
      double acc = 0.0;
      for (int i = 0; i < Dv; ++i) acc += m_row[i] * enc.scene_vec[i];
      enc.proj_scene[j] = acc;
    }
    enc.g.assign(d, 0.0);
    for (int j = 0; j < d; ++j) enc.g[j] = q_enc[j] * enc.proj_scene[j];
  } else {
    enc.g = q_enc;
  }

  enc.h.assign(dh, 0.0);
  for (int r = 0; r < dh; ++r) {
    const double* f_row = &params.F[static_cast<size_t>(r) * d];
    double acc = params.F_b[r];
    for (int j = 0; j < d; ++j) acc += f_row[j] * enc.g[j];
    enc.h[r] = std::tanh(acc);
  }
}

void classify(const ModelParams& params, Encodings& enc) {
  const int dh = params.dims.hidden_dim, A = params.dims.answer_count;
  enc.logits.assign(A, 0.0);
  for (int a = 0; a < A; ++a) {
    const double* w_row = &params.W[static_cast<size_t>(a) * dh];
    double acc = params.W_b[a];
    for (int r = 0; r < dh; ++r) acc += w_row[r] * enc.h[r];
    enc.logits[a] = acc;
  }
  enc.p = enc.logits;
  softmax_inplace(enc.p);
}

Encodings forward(const ModelParams& params, std::span<const int> ids, const double* scene,
                  const ForwardHooks* hooks) {
  Encodings enc;
  encode_question(params, ids, enc, hooks);
  fuse(params, enc.q_enc, scene, enc);
  classify(params, enc);
  return enc;
}

void classify_backward(const ModelParams& params, const Encodings& enc,
                       const std::vector<double>& d_logits, ModelParams& grads,
                       std::vector<double>& d_h) {
  const int dh = params.dims.hidden_dim, A = params.dims.answer_count;
  d_h.assign(dh, 0.0);
  for (int a = 0; a < A; ++a) {
    double dl = d_logits[a];
    if (dl == 0.0) continue;
    double* gw_row = &grads.W[static_cast<size_t>(a) * dh];
    const double* w_row = &params.W[static_cast<size_t>(a) * dh];
    for (int r = 0; r < dh; ++r) {
      gw_row[r] += dl * enc.h[r];
      d_h[r] += dl * w_row[r];
    }
    grads.W_b[a] += dl;
  }
}

void fuse_backward(const ModelParams& params, const Encodings& enc,
                   const std::vector<double>& d_h, ModelParams& grads,
                   std::vector<double>& d_q_enc) {
  const ModelDims& dims = params.dims;
  const int d = dims.embed_dim, dh = dims.hidden_dim, Dv = dims.feature_dim,
            K = dims.scene_objects;

  std::vector<double> d_g(d, 0.0);
  for (int r = 0; r < dh; ++r) {
    double dpre = d_h[r] * (1.0 - enc.h[r] * enc.h[r]);
    grads.F_b[r] += dpre;
    double* gf_row = &grads.F[static_cast<size_t>(r) * d];
    const double* f_row = &params.F[static_cast<size_t>(r) * d];
    for (int j = 0; j < d; ++j) {
      gf_row[j] += dpre * enc.g[j];
      d_g[j] += dpre * f_row[j];
    }
  }

  if (dims.mode == ModelMode::Full) {
    d_q_enc.assign(d, 0.0);
    std::vector<double> d_proj(d, 0.0);
    for (int j = 0; j < d; ++j) {
      d_q_enc[j] = d_g[j] * enc.proj_scene[j];
      d_proj[j] = d_g[j] * enc.q_enc[j];
    }
    // proj_scene = M . scene_vec
    std::vector<double> d_scene_vec(Dv, 0.0);
    for (int j = 0; j < d; ++j) {
      double dp = d_proj[j];
      if (dp == 0.0) continue;
      double* gm_row = &grads.M[static_cast<size_t>(j) * Dv];
      const double* m_row = &params.M[static_cast<size_t>(j) * Dv];
      for (int i = 0; i < Dv; ++i) {
        gm_row[i] += dp * enc.scene_vec[i];
        d_scene_vec[i] += dp * m_row[i];
      }
    }
    // scene_vec = sum_k beta_k obj_k
    std::vector<double> d_beta(K, 0.0);
    for (int k = 0; k < K; ++k) {
      const double* obj = enc.scene + static_cast<size_t>(k) * Dv;
      double acc = 0.0;
      for (int i = 0; i < Dv; ++i) acc += d_scene_vec[i] * obj[i];
      d_beta[k] = acc;
    }
    double common = 0.0;
    for (int k = 0; k < K; ++k) common += enc.obj_attn[k] * d_beta[k];
    for (int k = 0; k < K; ++k) {
      double d_s = enc.obj_attn[k] * (d_beta[k] - common);
      if (d_s == 0.0) continue;
      const double* mo_row = &enc.mo[static_cast<size_t>(k) * d];
      const double* obj = enc.scene + static_cast<size_t>(k) * Dv;
      // s_k = q_enc . (M obj_k)
      for (int j = 0; j < d; ++j) {
        d_q_enc[j] += d_s * mo_row[j];
        double dm = d_s * enc.q_enc[j];
        double* gm_row = &grads.M[static_cast<size_t>(j) * Dv];
        for (int i = 0; i < Dv; ++i) gm_row[i] += dm * obj[i];
      }
    }
  } else {
    d_q_enc = d_g;
  }
}

void encode_backward(const ModelParams& params, const Encodings& enc,
                     const std::vector<double>& d_q_enc, ModelParams& grads) {
  const int d = params.dims.embed_dim;
  // q_enc = sum_t alpha_t e_t with alpha = softmax(u . tanh(e + P) + b)
  std::vector<double> d_alpha(enc.valid.size(), 0.0);
  double common = 0.0;
  for (size_t vi = 0; vi < enc.valid.size(); ++vi) {
    int t = enc.valid[vi];
    const double* e_row = &enc.e[static_cast<size_t>(t) * d];
    double acc = 0.0;
    for (int j = 0; j < d; ++j) acc += d_q_enc[j] * e_row[j];
    d_alpha[vi] = acc;
    common += enc.token_attn[t] * acc;
  }
  for (size_t vi = 0; vi < enc.valid.size(); ++vi) {
    int t = enc.valid[vi];
    double alpha = enc.token_attn[t];
    double d_s = alpha * (d_alpha[vi] - common);
    const double* z_row = &enc.z[static_cast<size_t>(t) * d];
    int id = enc.ids[t];
    double* ge_row = &grads.E[static_cast<size_t>(id) * d];
    double* gp_row = &grads.P[static_cast<size_t>(t) * d];
    grads.u_b[0] += d_s;
    for (int j = 0; j < d; ++j) {
      grads.u[j] += d_s * z_row[j];
      double d_x = d_s * params.u[j] * (1.0 - z_row[j] * z_row[j]);
      ge_row[j] += alpha * d_q_enc[j] + d_x;
      gp_row[j] += d_x;
    }
  }
}

void backward(const ModelParams& params, const Encodings& enc,
              const std::vector<double>& d_logits, ModelParams& grads) {
  std::vector<double> d_h, d_q_enc;
  classify_backward(params, enc, d_logits, grads, d_h);
  fuse_backward(params, enc, d_h, grads, d_q_enc);
  encode_backward(params, enc, d_q_enc, grads);
}

int predict(const std::vector<double>& p) {
  if (p.empty()) throw ModelError("cannot predict from an empty distribution");
  int best = 0;
  for (int i = 1; i < static_cast<int>(p.size()); ++i)
    if (p[i] > p[best]) best = i;
  return best;
}

double ce_loss(const std::vector<const std::vector<double>*>& p_batch,
               const std::vector<int>& gold,
               std::vector<std::vector<double>>* d_logits_out) {
  if (p_batch.empty() || p_batch.size() != gold.size())
    throw InvalidArgumentError("ce_loss batch and targets must be non-empty and aligned");
  const double n = static_cast<double>(p_batch.size());
  double loss = 0.0;
  if (d_logits_out) d_logits_out->assign(p_batch.size(), {});
  for (size_t i = 0; i < p_batch.size(); ++i) {
    const std::vector<double>& p = *p_batch[i];
    int a = gold[i];
    if (a < 0 || a >= static_cast<int>(p.size()))
      throw InvalidArgumentError("gold index outside the answer distribution");
    loss += -std::log(std::max(p[a], 1e-12));
    if (d_logits_out) {
      auto& dl = (*d_logits_out)[i];
      dl.assign(p.size(), 0.0);
      for (size_t k = 0; k < p.size(); ++k) dl[k] = p[k] / n;
      dl[a] -= 1.0 / n;
    }
  }
  return loss / n;
}

std::vector<std::pair<std::string, double>> dump_attention(const Encodings& enc,
                                                           const Question& q) {
  std::vector<std::pair<std::string, double>> out;
  double total = 0.0;
  for (int t : enc.valid) total += enc.token_attn[t];
  for (int t : enc.valid) {
    std::string word = static_cast<size_t>(t) < q.tokens.size()
                           ? q.tokens[t]
                           : std::string(kUnkSurface);
    out.emplace_back(word, enc.token_attn[t] / total);
  }
  return out;
}

namespace {

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated checkpoint file");
  return v;
}

constexpr char kMagic[4] = {'V', 'Q', 'L', 'B'};
constexpr uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const nlohmann::json& metadata) {
  nlohmann::json meta = {
      {"dims",
       {{"vocab_size", params.dims.vocab_size},
        {"answer_count", params.dims.answer_count},
        {"embed_dim", params.dims.embed_dim},
        {"hidden_dim", params.dims.hidden_dim},
        {"pad_length", params.dims.pad_length},
        {"feature_dim", params.dims.feature_dim},
        {"scene_objects", params.dims.scene_objects},
        {"mode", model_mode_name(params.dims.mode)}}},
      {"info", metadata}};
  std::string meta_str = meta.dump();

  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    write_pod(out, kVersion);
    write_pod(out, static_cast<uint64_t>(meta_str.size()));
    out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
    auto tensors = params.tensors();
    write_pod(out, static_cast<uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
      write_pod(out, static_cast<uint16_t>(t.name.size()));
      out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
      write_pod(out, static_cast<uint8_t>(t.shape.size()));
      for (size_t s : t.shape) write_pod(out, static_cast<uint64_t>(s));
      out.write(reinterpret_cast<const char*>(t.data->data()),
                static_cast<std::streamsize>(t.data->size() * sizeof(double)));
    }
    if (!out) throw IoError("failed writing checkpoint: " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot move checkpoint into place: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError("not a checkpoint file: " + path);
  uint32_t version = read_pod<uint32_t>(in);
  if (version != kVersion)
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  uint64_t meta_len = read_pod<uint64_t>(in);
  std::string meta_str(meta_len, '\0');
  in.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
  if (!in) throw IoError("truncated checkpoint metadata");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_str);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("checkpoint metadata: ") + e.what());
  }

  ModelDims dims;
  const auto& dj = meta.at("dims");
  dims.vocab_size = dj.at("vocab_size").get<int>();
  dims.answer_count = dj.at("answer_count").get<int>();
  dims.embed_dim = dj.at("embed_dim").get<int>();
  dims.hidden_dim = dj.at("hidden_dim").get<int>();
  dims.pad_length = dj.at("pad_length").get<int>();
  dims.feature_dim = dj.at("feature_dim").get<int>();
  dims.scene_objects = dj.at("scene_objects").get<int>();
  dims.mode = model_mode_from_name(dj.at("mode").get<std::string>());

  Checkpoint ck;
  ck.params = ModelParams::zeros(dims);
  ck.metadata = meta.at("info");

  uint32_t count = read_pod<uint32_t>(in);
  auto tensors = ck.params.tensors();
  if (count != tensors.size()) throw ParseError("checkpoint tensor count mismatch");
  for (auto& t : tensors) {
    uint16_t name_len = read_pod<uint16_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (name != t.name) throw ParseError("checkpoint tensor order mismatch at " + name);
    uint8_t ndim = read_pod<uint8_t>(in);
    if (ndim != t.shape.size()) throw ParseError("checkpoint tensor rank mismatch at " + name);
    std::vector<size_t> shape(ndim);
    for (auto& s : shape) s = read_pod<uint64_t>(in);
    if (shape != t.shape) throw ParseError("checkpoint tensor shape mismatch at " + name);
    in.read(reinterpret_cast<char*>(t.data->data()),
            static_cast<std::streamsize>(t.data->size() * sizeof(double)));
    if (!in) throw IoError("truncated checkpoint payload at " + name);
  }
  return ck;
}

double tensor_l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace vqalab
