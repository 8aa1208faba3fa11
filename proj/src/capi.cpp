#include "vqalab.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include "config.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "jsonl.hpp"
#include "pipeline.hpp"
#include "report.hpp"
#include "synthgen.hpp"
#include "text.hpp"
#include "toml.hpp"
#include "trainer.hpp"

using namespace vqalab;

struct vqalab_config {
  Config cfg;
  nlohmann::json patch;  // raw overlay, re-resolved on every mutation
};

struct vqalab_model {
  TrainedModel model;
};

namespace {

thread_local std::string g_last_error;

vqalab_status status_from(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return VQALAB_ERR_INVALID_ARG;
    case ErrorCode::Io: return VQALAB_ERR_IO;
    case ErrorCode::Parse: return VQALAB_ERR_PARSE;
    case ErrorCode::Config: return VQALAB_ERR_CONFIG;
    case ErrorCode::InvalidQuestion: return VQALAB_ERR_INVALID_QUESTION;
    case ErrorCode::Generation: return VQALAB_ERR_GENERATION;
    case ErrorCode::Oracle: return VQALAB_ERR_ORACLE;
    case ErrorCode::Model: return VQALAB_ERR_MODEL;
    case ErrorCode::Sim: return VQALAB_ERR_SIM;
    case ErrorCode::Batch: return VQALAB_ERR_BATCH;
    case ErrorCode::Trainer: return VQALAB_ERR_TRAINER;
    case ErrorCode::Metrics: return VQALAB_ERR_METRICS;
    case ErrorCode::Internal: return VQALAB_ERR_INTERNAL;
  }
  return VQALAB_ERR_INTERNAL;
}

template <typename Fn>
vqalab_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return VQALAB_ERR_INTERNAL;
  }
}

vqalab_status require(bool cond, const char* message) {
  if (cond) return VQALAB_OK;
  g_last_error = message;
  return VQALAB_ERR_INVALID_ARG;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* vqalab_version(void) { return "1.0.0"; }

const char* vqalab_status_name(vqalab_status status) {
  switch (status) {
    case VQALAB_OK: return "ok";
    case VQALAB_ERR_INVALID_ARG: return "invalid_argument";
    case VQALAB_ERR_IO: return "io";
    case VQALAB_ERR_PARSE: return "parse";
    case VQALAB_ERR_CONFIG: return "config";
    case VQALAB_ERR_INVALID_QUESTION: return "invalid_question";
    case VQALAB_ERR_GENERATION: return "generation";
    case VQALAB_ERR_ORACLE: return "oracle";
    case VQALAB_ERR_MODEL: return "model";
    case VQALAB_ERR_SIM: return "sim";
    case VQALAB_ERR_BATCH: return "batch";
    case VQALAB_ERR_TRAINER: return "trainer";
    case VQALAB_ERR_METRICS: return "metrics";
    case VQALAB_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* vqalab_last_error(void) { return g_last_error.c_str(); }

void vqalab_string_free(char* s) { std::free(s); }

vqalab_status vqalab_config_load(const char* path, vqalab_config** out) {
  if (auto s = require(path && out, "path and out must be non-null")) return s;
  return guarded([&] {
    nlohmann::json patch = parse_config_file(path);
    auto* handle = new vqalab_config{config_from_json(patch), std::move(patch)};
    *out = handle;
    return VQALAB_OK;
  });
}

vqalab_status vqalab_config_parse(const char* text, const char* format,
                                  vqalab_config** out) {
  if (auto s = require(text && out, "text and out must be non-null")) return s;
  return guarded([&] {
    nlohmann::json patch = parse_config_text(text, format ? format : "toml");
    auto* handle = new vqalab_config{config_from_json(patch), std::move(patch)};
    *out = handle;
    return VQALAB_OK;
  });
}

vqalab_status vqalab_config_dump(const vqalab_config* cfg, char** out_json) {
  if (auto s = require(cfg && out_json, "cfg and out_json must be non-null")) return s;
  return guarded([&] {
    *out_json = dup_string(config_to_json(cfg->cfg).dump(2));
    return VQALAB_OK;
  });
}

vqalab_status vqalab_config_set(vqalab_config* cfg, const char* dotted_key,
                                const char* value_json) {
  if (auto s = require(cfg && dotted_key && value_json, "arguments must be non-null"))
    return s;
  return guarded([&] {
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(value_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("value: ") + e.what());
    }
    nlohmann::json patch = cfg->patch;
    json_set_path(patch, dotted_key, value);
    cfg->cfg = config_from_json(patch);  // validate before committing
    cfg->patch = std::move(patch);
    return VQALAB_OK;
  });
}

void vqalab_config_free(vqalab_config* cfg) { delete cfg; }

vqalab_status vqalab_generate(const vqalab_config* cfg, const char* out_dir) {
  if (auto s = require(cfg && out_dir, "cfg and out_dir must be non-null")) return s;
  return guarded([&] {
    std::filesystem::create_directories(out_dir);
    GeneratedData data = generate(cfg->cfg.generator);
    save_generated(data, cfg->cfg.generator, out_dir);
    return VQALAB_OK;
  });
}

vqalab_status vqalab_morph(const char* questions_in, const char* questions_out,
                           int variant, uint64_t seed, const char* lexicon_path) {
  if (auto s = require(questions_in && questions_out, "paths must be non-null")) return s;
  return guarded([&] {
    VariantKind kind = variant_from_int(variant);
    QTypeLexicon lex =
        lexicon_path ? QTypeLexicon::load(lexicon_path) : generator_lexicon();
    auto rows = load_questions(questions_in);
    PerturbSeed ps{seed};
    for (auto& row : rows) {
      Question q = make_question(row.question_id, row.question, lex, row.question_type,
                                 row.answer_type);
      auto tokens = apply_variant(q, kind, ps);
      row.question = render_surface(tokens, q.had_question_mark);
      if (q.qtype) row.question_type = lex.entry(*q.qtype).phrase();
      row.answer_type = answer_type_name(q.answer_type);
    }
    save_questions(questions_out, rows);
    return VQALAB_OK;
  });
}

vqalab_status vqalab_train(const vqalab_config* cfg, const char* data_dir,
                           const char* cell_json, const char* checkpoint_out,
                           const char* loss_log_out) {
  if (auto s = require(cfg && data_dir && checkpoint_out,
                       "cfg, data_dir and checkpoint_out must be non-null"))
    return s;
  return guarded([&] {
    nlohmann::json cell = nlohmann::json::object();
    if (cell_json) {
      try {
        cell = nlohmann::json::parse(cell_json);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("cell_json: ") + e.what());
      }
    }
    if (!cell.contains("name")) cell["name"] = "cell";
    // Re-resolve so cell-level keys inherit/validate against the config.
    nlohmann::json merged = cfg->patch;
    merged["matrix"]["cells"] = nlohmann::json::array({cell});
    Config full = config_from_json(merged);

    Dataset data = load_dataset(data_dir);
    const CellConfig& cc = full.matrix.cells.at(0);
    RunSpec spec;
    spec.train_input = cc.train_input;
    spec.model_mode = cc.model_mode;
    spec.debias = cc.debias;
    spec.model = full.model;
    spec.hyper = full.train;
    if (cc.epochs) spec.hyper.epochs = *cc.epochs;
    if (cc.seed) spec.hyper.seed = *cc.seed;

    TrainResult result = train(data, spec);
    save_model(checkpoint_out, result.model);
    if (loss_log_out) save_loss_log(loss_log_out, result.epoch_losses);
    return VQALAB_OK;
  });
}

vqalab_status vqalab_model_load(const char* checkpoint_path, vqalab_model** out) {
  if (auto s = require(checkpoint_path && out, "path and out must be non-null")) return s;
  return guarded([&] {
    auto* handle = new vqalab_model{load_model(checkpoint_path)};
    *out = handle;
    return VQALAB_OK;
  });
}

void vqalab_model_free(vqalab_model* model) { delete model; }

vqalab_status vqalab_eval(const vqalab_model* model, const char* data_dir,
                          const char* split, const char* eval_input,
                          uint64_t perturb_seed, const char* predictions_out,
                          const char* attention_out, const char* encodings_out) {
  if (auto s = require(model && data_dir && split && eval_input && predictions_out,
                       "model, data_dir, split, eval_input, predictions_out required"))
    return s;
  return guarded([&] {
    Dataset data = load_dataset(data_dir);
    EvalRequest req;
    req.input = input_mode_from_name(eval_input);
    req.perturb_seed = perturb_seed;
    req.want_attention = attention_out != nullptr;
    req.want_encodings = encodings_out != nullptr;
    EvalOutputs out = evaluate(model->model, data.split(split), req);
    save_predictions(predictions_out, out.records);
    if (attention_out) save_attention(attention_out, out.attention);
    if (encodings_out) save_encodings(encodings_out, out.encodings);
    return VQALAB_OK;
  });
}

vqalab_status vqalab_report_run(const vqalab_config* cfg, const char* run_dir) {
  if (auto s = require(cfg && run_dir, "cfg and run_dir must be non-null")) return s;
  return guarded([&] {
    Dataset data = load_dataset(std::string(run_dir) + "/data");
    write_run_reports(cfg->cfg, data, run_dir);
    return VQALAB_OK;
  });
}

vqalab_status vqalab_report_pair(const char* baseline_predictions,
                                 const char* target_predictions, const char* out_dir,
                                 int top_k) {
  if (auto s = require(baseline_predictions && target_predictions && out_dir,
                       "paths must be non-null"))
    return s;
  if (auto s = require(top_k >= 1, "top_k must be >= 1")) return s;
  return guarded([&] {
    write_pair_report(baseline_predictions, target_predictions, out_dir,
                      static_cast<size_t>(top_k));
    return VQALAB_OK;
  });
}

vqalab_status vqalab_reproduce(const vqalab_config* cfg, const char* run_dir) {
  if (auto s = require(cfg && run_dir, "cfg and run_dir must be non-null")) return s;
  return guarded([&] {
    RunOutcome outcome = reproduce(cfg->cfg, run_dir);
    if (!outcome.all_ok()) {
      std::string failed;
      for (const auto& c : outcome.cells)
        if (!c.ok) failed += (failed.empty() ? "" : ", ") + c.name + ": " + c.error;
      throw TrainerError("matrix cells failed: " + failed);
    }
    return VQALAB_OK;
  });
}

}  // extern "C"
