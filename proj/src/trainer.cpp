#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "debias.hpp"
#include "errors.hpp"
#include "jsonl.hpp"
#include "text.hpp"

namespace vqalab {
namespace {

InputMode variant_kind_to_mode(VariantKind kind) {
  switch (kind) {
    case VariantKind::Identity: return InputMode::Identity;
    case VariantKind::Variant1: return InputMode::Variant1;
    case VariantKind::Variant2: return InputMode::Variant2;
    case VariantKind::Variant3: return InputMode::Variant3;
  }
  return InputMode::Identity;
}

// Dense Adam over every parameter tensor.
class Adam {
 public:
  Adam(ModelParams& params, const TrainConfig& hyper) : params_(params), hyper_(hyper) {
    for (auto& t : params_.tensors()) {
      m_.emplace_back(t.data->size(), 0.0);
      v_.emplace_back(t.data->size(), 0.0);
    }
  }

  void step(ModelParams& grads) {
    ++t_;
    const double b1 = hyper_.adam_beta1, b2 = hyper_.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, t_);
    const double bc2 = 1.0 - std::pow(b2, t_);
    auto ps = params_.tensors();
    auto gs = grads.tensors();
    for (size_t i = 0; i < ps.size(); ++i) {
      auto& w = *ps[i].data;
      const auto& g = *gs[i].data;
      auto& m = m_[i];
      auto& v = v_[i];
      for (size_t j = 0; j < w.size(); ++j) {
        m[j] = b1 * m[j] + (1.0 - b1) * g[j];
        v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
        double mhat = m[j] / bc1;
        double vhat = v[j] / bc2;
        w[j] -= hyper_.learning_rate * mhat / (std::sqrt(vhat) + hyper_.adam_eps);
      }
    }
  }

 private:
  ModelParams& params_;
  TrainConfig hyper_;
  std::vector<std::vector<double>> m_, v_;
  int t_ = 0;
};

}  // namespace

std::vector<size_t> variant_permutation(const Question& q, VariantKind kind,
                                        const PerturbSeed& s) {
  const size_t n = q.tokens.size();
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  switch (kind) {
    case VariantKind::Identity:
      break;
    case VariantKind::Variant1: {
      if (!q.qtype) break;
      size_t p = q.prefix_len;
      for (size_t i = 0; i < n; ++i) perm[i] = (i + p) % n;
      break;
    }
    case VariantKind::Variant2: {
      Rng rng(s.stream(q.id));
      rng.shuffle(perm);
      break;
    }
    case VariantKind::Variant3:
      std::reverse(perm.begin(), perm.end());
      break;
  }
  return perm;
}

RenderedInput render_input(const Question& q, InputMode mode, size_t length,
                           const Vocabulary& vocab, uint64_t perturb_seed) {
  RenderedInput out;
  out.ids.assign(length, kPadId);
  out.surfaces.assign(length, "");
  out.is_prefix.assign(length, false);

  auto put = [&](size_t pos, size_t token_index) {
    if (pos >= length) return;
    out.ids[pos] = vocab.lookup(q.tokens[token_index]);
    out.surfaces[pos] = q.tokens[token_index];
    out.is_prefix[pos] = token_index < q.prefix_len;
  };

  switch (mode) {
    case InputMode::Question:
    case InputMode::Identity:
      for (size_t i = 0; i < q.tokens.size(); ++i) put(i, i);
      break;
    case InputMode::Prefix:
      for (size_t i = 0; i < q.prefix_len; ++i) put(i, i);
      break;
    case InputMode::Postfix:
      for (size_t i = q.prefix_len; i < q.tokens.size(); ++i) put(i, i);
      break;
    case InputMode::Variant1:
    case InputMode::Variant2:
    case InputMode::Variant3: {
      VariantKind kind = mode == InputMode::Variant1   ? VariantKind::Variant1
                         : mode == InputMode::Variant2 ? VariantKind::Variant2
                                                       : VariantKind::Variant3;
      auto perm = variant_permutation(q, kind, PerturbSeed{perturb_seed});
      for (size_t i = 0; i < perm.size(); ++i) put(i, perm[i]);
      break;
    }
  }
  return out;
}

TrainResult train(const Dataset& data, const RunSpec& spec, const TrainHooks* hooks) {
  if (data.train.empty()) throw TrainerError("training split is empty");

  TrainResult result;
  TrainedModel& model = result.model;
  model.vocab = build_vocabulary(data.train);
  model.answer_vocab = build_answer_vocab(data.train);
  model.lexicon = data.lexicon;

  ModelConfig mc = spec.model;
  ModelDims dims = dims_from_config(mc, static_cast<int>(model.vocab.size()),
                                    static_cast<int>(model.answer_vocab.size()),
                                    data.feature_dim, data.scene_objects, spec.model_mode);
  Rng rng(spec.hyper.seed);
  model.params = ModelParams::init(dims, mc.init_scale, mc.position_init_scale, rng);

  std::map<std::string, int> answer_index;
  for (size_t i = 0; i < model.answer_vocab.size(); ++i)
    answer_index[model.answer_vocab[i]] = static_cast<int>(i);

  const size_t n = data.train.size();
  const size_t L = static_cast<size_t>(dims.pad_length);
  const bool mixing = spec.debias.method == DebiasMethod::Mixing;
  const bool contrastive = spec.debias.method == DebiasMethod::Contrastive;
  const bool needs_variant = mixing || contrastive;
  const InputMode variant_mode = variant_kind_to_mode(spec.debias.variant_kind);

  std::vector<std::vector<int>> inputs(n), variant_inputs;
  std::vector<int> gold(n);
  auto render_all = [&](uint64_t perturb_seed) {
    for (size_t i = 0; i < n; ++i)
      inputs[i] = render_input(data.train[i].question, spec.train_input, L, model.vocab,
                               perturb_seed)
                      .ids;
    if (needs_variant) {
      variant_inputs.resize(n);
      for (size_t i = 0; i < n; ++i)
        variant_inputs[i] = render_input(data.train[i].question, variant_mode, L,
                                         model.vocab, perturb_seed)
                                .ids;
    }
  };
  render_all(spec.hyper.seed);
  for (size_t i = 0; i < n; ++i) {
    auto it = answer_index.find(data.train[i].answer);
    if (it == answer_index.end())
      throw TrainerError("training answer \"" + data.train[i].answer +
                         "\" missing from the answer vocabulary");
    gold[i] = it->second;
  }

  const bool reshuffle = spec.debias.reshuffle_per_epoch &&
                         (spec.train_input == InputMode::Variant2 ||
                          (needs_variant && variant_mode == InputMode::Variant2));

  Adam adam(model.params, spec.hyper);
  ModelParams grads = ModelParams::zeros(dims);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  const ForwardHooks* fwd_hooks = hooks ? &hooks->forward : nullptr;
  const size_t batch_size = static_cast<size_t>(spec.hyper.batch_size);
  const double alpha = spec.debias.alpha;
  const bool mix_fused = mixing && spec.debias.mix_level == "fused";

  for (int epoch = 0; epoch < spec.hyper.epochs; ++epoch) {
    if (reshuffle && epoch > 0)
      render_all(mix_seed(spec.hyper.seed, static_cast<uint64_t>(epoch)));
    rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t seen = 0;

    for (size_t start = 0; start < n; start += batch_size) {
      size_t count = std::min(batch_size, n - start);
      grads.fill(0.0);

      std::vector<Encodings> encs(count), var_encs;
      if (needs_variant) var_encs.resize(count);
      std::vector<std::vector<double>> fused_h_orig;  // pre-blend h, fused-level mixing
      if (mix_fused) fused_h_orig.resize(count);
      std::vector<const std::vector<double>*> p_batch(count);
      std::vector<int> batch_gold(count);

      for (size_t b = 0; b < count; ++b) {
        size_t i = order[start + b];
        const double* scene =
            spec.model_mode == ModelMode::Full ? data.train[i].scene.data() : nullptr;
        Encodings& enc = encs[b];
        if (mixing && !mix_fused) {
          encode_question(model.params, inputs[i], enc, fwd_hooks);
          Encodings& venc = var_encs[b];
          encode_question(model.params, variant_inputs[i], venc, fwd_hooks);
          std::vector<double> mixed = mix_features(enc.q_enc, venc.q_enc, alpha);
          fuse(model.params, mixed, scene, enc);
          classify(model.params, enc);
        } else if (mix_fused) {
          encode_question(model.params, inputs[i], enc, fwd_hooks);
          fuse(model.params, enc.q_enc, scene, enc);
          Encodings& venc = var_encs[b];
          encode_question(model.params, variant_inputs[i], venc, fwd_hooks);
          fuse(model.params, venc.q_enc, scene, venc);
          fused_h_orig[b] = enc.h;
          enc.h = mix_features(enc.h, venc.h, alpha);  // classifier consumes the blend
          classify(model.params, enc);
        } else {
          enc = forward(model.params, inputs[i], scene, fwd_hooks);
          if (contrastive) {
            Encodings& venc = var_encs[b];
            encode_question(model.params, variant_inputs[i], venc, fwd_hooks);
            fuse(model.params, venc.q_enc, scene, venc);
          }
        }
        p_batch[b] = &enc.p;
        batch_gold[b] = gold[i];
      }

      std::vector<std::vector<double>> d_logits;
      double batch_loss = ce_loss(p_batch, batch_gold, &d_logits);

      ContrastiveResult con;
      if (contrastive && count >= 2) {
        std::vector<std::vector<double>> anchors(count), positives(count);
        for (size_t b = 0; b < count; ++b) {
          anchors[b] = encs[b].h;
          positives[b] = var_encs[b].h;
        }
        con = contrastive_loss(anchors, positives);
        batch_loss = joint_loss(batch_loss, con.loss, spec.debias.lambda);
      }

      for (size_t b = 0; b < count; ++b) {
        size_t i = order[start + b];
        Encodings& enc = encs[b];
        std::vector<double> d_h, d_q;
        classify_backward(model.params, enc, d_logits[b], grads, d_h);
        if (contrastive && count >= 2) {
          for (size_t r = 0; r < d_h.size(); ++r)
            d_h[r] += spec.debias.lambda * con.d_anchors[b][r];
        }
        if (mix_fused) {
          // h was the blend: alpha toward the original path, 1-alpha
          // toward the variant path. Each path's own tanh output has to
          // be back in place before its fuse backward runs.
          Encodings& venc = var_encs[b];
          std::vector<double> d_h_orig(d_h.size()), d_h_var(d_h.size());
          for (size_t r = 0; r < d_h.size(); ++r) {
            d_h_orig[r] = alpha * d_h[r];
            d_h_var[r] = (1.0 - alpha) * d_h[r];
          }
          enc.h = fused_h_orig[b];
          std::vector<double> d_q_var;
          fuse_backward(model.params, enc, d_h_orig, grads, d_q);
          encode_backward(model.params, enc, d_q, grads);
          fuse_backward(model.params, venc, d_h_var, grads, d_q_var);
          encode_backward(model.params, venc, d_q_var, grads);
          (void)i;
          continue;
        }
        fuse_backward(model.params, enc, d_h, grads, d_q);
        if (mixing) {
          Encodings& venc = var_encs[b];
          std::vector<double> d_q_orig(d_q.size()), d_q_var(d_q.size());
          for (size_t j = 0; j < d_q.size(); ++j) {
            d_q_orig[j] = alpha * d_q[j];
            d_q_var[j] = (1.0 - alpha) * d_q[j];
          }
          encode_backward(model.params, enc, d_q_orig, grads);
          encode_backward(model.params, venc, d_q_var, grads);
        } else {
          encode_backward(model.params, enc, d_q, grads);
          if (contrastive && count >= 2) {
            Encodings& venc = var_encs[b];
            std::vector<double> d_h_pos(venc.h.size());
            for (size_t r = 0; r < venc.h.size(); ++r)
              d_h_pos[r] = spec.debias.lambda * con.d_positives[b][r];
            std::vector<double> d_q_pos;
            fuse_backward(model.params, venc, d_h_pos, grads, d_q_pos);
            encode_backward(model.params, venc, d_q_pos, grads);
          }
        }
      }

      adam.step(grads);
      epoch_loss += batch_loss * static_cast<double>(count);
      seen += count;
    }

    double mean_loss = epoch_loss / static_cast<double>(seen);
    ensure_finite_loss(mean_loss, epoch);
    result.epoch_losses.push_back(mean_loss);
  }

  model.info = {
      {"train_input", input_mode_name(spec.train_input)},
      {"model_mode", model_mode_name(spec.model_mode)},
      {"seed", spec.hyper.seed},
      {"epochs", spec.hyper.epochs},
      {"debias",
       {{"method", debias_method_name(spec.debias.method)},
        {"lambda", spec.debias.lambda},
        {"alpha", spec.debias.alpha},
        {"variant_kind", variant_name(spec.debias.variant_kind)},
        {"mix_level", spec.debias.mix_level}}},
  };
  return result;
}

void save_model(const std::string& path, const TrainedModel& model) {
  nlohmann::json lex = nlohmann::json::array();
  for (const auto& e : model.lexicon.entries())
    lex.push_back({e.phrase(), answer_type_name(e.answer_type)});
  nlohmann::json meta = {{"vocab", model.vocab.surfaces()},
                         {"answers", model.answer_vocab},
                         {"lexicon", lex},
                         {"info", model.info}};
  save_checkpoint(path, model.params, meta);
}

TrainedModel load_model(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  TrainedModel model;
  model.params = std::move(ck.params);
  model.vocab = Vocabulary::from_surfaces(ck.metadata.at("vocab").get<std::vector<std::string>>());
  model.answer_vocab = ck.metadata.at("answers").get<std::vector<std::string>>();
  std::vector<LexiconEntry> entries;
  for (const auto& row : ck.metadata.at("lexicon")) {
    LexiconEntry e;
    e.tokens = tokenize(row.at(0).get<std::string>()).tokens;
    e.answer_type = answer_type_from_name(row.at(1).get<std::string>());
    entries.push_back(std::move(e));
  }
  model.lexicon = QTypeLexicon(std::move(entries));
  model.info = ck.metadata.value("info", nlohmann::json::object());

  if (static_cast<size_t>(model.params.dims.vocab_size) != model.vocab.size())
    throw ModelError("checkpoint vocabulary does not match tensor shapes");
  if (static_cast<size_t>(model.params.dims.answer_count) != model.answer_vocab.size())
    throw ModelError("checkpoint answer vocabulary does not match tensor shapes");
  return model;
}

EvalOutputs evaluate(const TrainedModel& model, const std::vector<Sample>& split,
                     const EvalRequest& req, const ForwardHooks* hooks) {
  EvalOutputs out;
  out.records.reserve(split.size());
  const ModelDims& dims = model.params.dims;
  const size_t L = static_cast<size_t>(dims.pad_length);

  for (const auto& sample : split) {
    if (static_cast<int>(sample.scene.size()) != dims.scene_objects * dims.feature_dim &&
        dims.mode == ModelMode::Full)
      throw ModelError("scene shape of question " + std::to_string(sample.question.id) +
                       " does not match the checkpoint");
    RenderedInput rendered =
        render_input(sample.question, req.input, L, model.vocab, req.perturb_seed);
    const double* scene =
        dims.mode == ModelMode::Full ? sample.scene.data() : nullptr;
    Encodings enc = forward(model.params, rendered.ids, scene, hooks);

    PredictionRecord rec;
    rec.question_id = sample.question.id;
    rec.pred = model.answer_vocab[static_cast<size_t>(predict(enc.p))];
    rec.gold = sample.answer;
    rec.correct = rec.pred == rec.gold;
    rec.qtype = sample.question.qtype_phrase(model.lexicon);
    rec.answer_type = answer_type_name(sample.question.answer_type);
    out.records.push_back(std::move(rec));

    if (req.want_attention) {
      AttentionRow row;
      row.question_id = sample.question.id;
      double total = 0.0;
      for (int t : enc.valid) total += enc.token_attn[t];
      for (int t : enc.valid) {
        row.words.push_back(rendered.surfaces[static_cast<size_t>(t)]);
        row.weights.push_back(enc.token_attn[t] / total);
        if (rendered.is_prefix[static_cast<size_t>(t)])
          row.prefix_mass += enc.token_attn[t] / total;
      }
      row.qtype = sample.question.qtype_phrase(model.lexicon);
      out.attention.push_back(std::move(row));
    }
    if (req.want_encodings) {
      EncodingRow row;
      row.question_id = sample.question.id;
      row.q_enc = enc.q_enc;
      out.encodings.push_back(std::move(row));
    }
  }
  return out;
}

void save_attention(const std::string& path, const std::vector<AttentionRow>& rows) {
  std::string buf;
  for (const auto& r : rows) {
    nlohmann::json j = {{"question_id", r.question_id},
                        {"words", r.words},
                        {"weights", r.weights},
                        {"prefix_mass", r.prefix_mass},
                        {"qtype", r.qtype}};
    buf += j.dump();
    buf.push_back('\n');
  }
  atomic_write_file(path, buf);
}

std::vector<AttentionRow> load_attention(const std::string& path) {
  std::vector<AttentionRow> rows;
  for_each_jsonl(path, [&](const nlohmann::json& j, size_t) {
    AttentionRow r;
    r.question_id = j.at("question_id").get<int64_t>();
    r.words = j.at("words").get<std::vector<std::string>>();
    r.weights = j.at("weights").get<std::vector<double>>();
    r.prefix_mass = j.at("prefix_mass").get<double>();
    r.qtype = j.value("qtype", "");
    rows.push_back(std::move(r));
  });
  return rows;
}

void save_encodings(const std::string& path, const std::vector<EncodingRow>& rows) {
  std::string buf;
  for (const auto& r : rows) {
    nlohmann::json j = {{"question_id", r.question_id}, {"q_enc", r.q_enc}};
    buf += j.dump();
    buf.push_back('\n');
  }
  atomic_write_file(path, buf);
}

std::vector<EncodingRow> load_encodings(const std::string& path) {
  std::vector<EncodingRow> rows;
  for_each_jsonl(path, [&](const nlohmann::json& j, size_t) {
    EncodingRow r;
    r.question_id = j.at("question_id").get<int64_t>();
    r.q_enc = j.at("q_enc").get<std::vector<double>>();
    rows.push_back(std::move(r));
  });
  return rows;
}

void ensure_finite_loss(double loss, int epoch) {
  if (!std::isfinite(loss))
    throw TrainerError("non-finite training loss at epoch " + std::to_string(epoch));
}

void save_loss_log(const std::string& path, const std::vector<double>& losses) {
  std::string buf;
  for (size_t i = 0; i < losses.size(); ++i) {
    nlohmann::json j = {{"epoch", i}, {"loss", losses[i]}};
    buf += j.dump();
    buf.push_back('\n');
  }
  atomic_write_file(path, buf);
}

}  // namespace vqalab
