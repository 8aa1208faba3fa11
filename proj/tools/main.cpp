// vqalab command-line front end. Everything goes through the C API in
// vqalab.h; exit code 2 flags usage/config errors, 1 runtime failures.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vqalab.h"

namespace {

struct ConfigDeleter {
  void operator()(vqalab_config* c) const { vqalab_config_free(c); }
};
using ConfigPtr = std::unique_ptr<vqalab_config, ConfigDeleter>;

struct ModelDeleter {
  void operator()(vqalab_model* m) const { vqalab_model_free(m); }
};
using ModelPtr = std::unique_ptr<vqalab_model, ModelDeleter>;

int exit_code_for(vqalab_status status) {
  switch (status) {
    case VQALAB_OK:
      return 0;
    case VQALAB_ERR_INVALID_ARG:
    case VQALAB_ERR_PARSE:
    case VQALAB_ERR_CONFIG:
      return 2;
    default:
      return 1;
  }
}

int fail(vqalab_status status) {
  std::cerr << "error (" << vqalab_status_name(status) << "): " << vqalab_last_error()
            << "\n";
  return exit_code_for(status);
}

// Loads a config file, then applies environment overrides: VQALAB_SEED
// feeds both the generator and the trainer, VQALAB_OUT_DIR the output
// directory.
int load_config(const std::string& path, ConfigPtr& out) {
  vqalab_config* raw = nullptr;
  if (vqalab_status s = vqalab_config_load(path.c_str(), &raw)) return fail(s);
  out.reset(raw);
  if (const char* seed = std::getenv("VQALAB_SEED")) {
    for (const char* key : {"generator.seed", "train.seed"}) {
      if (vqalab_status s = vqalab_config_set(out.get(), key, seed)) return fail(s);
    }
  }
  if (const char* dir = std::getenv("VQALAB_OUT_DIR")) {
    std::string quoted = "\"" + std::string(dir) + "\"";
    if (vqalab_status s = vqalab_config_set(out.get(), "output_dir", quoted.c_str()))
      return fail(s);
  }
  return 0;
}

std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vqalab: synthetic changing-priors VQA benchmark, miniature classifier, "
               "question perturbations, and bias/robustness reports"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "synthesize the benchmark files");
  std::string gen_config, gen_out = "out/data";
  gen->add_option("--config", gen_config, "run config (TOML or JSON)")->required();
  gen->add_option("--out-dir", gen_out, "target directory");

  // morph
  auto* morph = app.add_subcommand("morph", "rewrite questions with a variant operator");
  int morph_variant = 1;
  uint64_t morph_seed = 0;
  std::string morph_in, morph_out, morph_lexicon;
  morph->add_option("--variant", morph_variant, "1|2|3")->required();
  morph->add_option("--seed", morph_seed, "stream seed for variant-2");
  morph->add_option("--in", morph_in, "questions JSONL in")->required();
  morph->add_option("--out", morph_out, "questions JSONL out")->required();
  morph->add_option("--lexicon", morph_lexicon, "question-type lexicon TSV");

  // train
  auto* train = app.add_subcommand("train", "train one model cell");
  std::string train_config, train_data, train_input = "question", train_mode = "full";
  std::string train_debias, train_out = "checkpoint.bin", train_loss_log;
  int train_epochs = -1;
  int64_t train_seed = -1;
  train->add_option("--config", train_config, "run config")->required();
  train->add_option("--data", train_data, "benchmark directory")->required();
  train->add_option("--train-input", train_input,
                    "question|prefix|postfix|variant1|variant2|variant3");
  train->add_option("--model-mode", train_mode, "full|q_only");
  train->add_option("--debias", train_debias, "none|contrastive|mixing");
  train->add_option("--epochs", train_epochs, "override train.epochs");
  train->add_option("--seed", train_seed, "override train.seed");
  train->add_option("--out", train_out, "checkpoint path");
  train->add_option("--loss-log", train_loss_log, "per-epoch loss JSONL");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on one split");
  std::string eval_ckpt, eval_data, eval_split = "test_ood", eval_input = "question";
  std::string eval_out = "preds.jsonl", eval_attention, eval_encodings;
  uint64_t eval_seed = 42;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint path")->required();
  eval->add_option("--data", eval_data, "benchmark directory")->required();
  eval->add_option("--split", eval_split, "train|test_id|test_ood");
  eval->add_option("--eval-input", eval_input, "input regime");
  eval->add_option("--seed", eval_seed, "perturb stream seed for variant-2");
  eval->add_option("--out", eval_out, "prediction dump path");
  eval->add_option("--attention", eval_attention, "per-word attention JSONL");
  eval->add_option("--encodings", eval_encodings, "question-encoding JSONL");

  // report
  auto* report = app.add_subcommand("report", "emit CSV + text tables from dumps");
  std::string rep_config, rep_run_dir, rep_baseline, rep_target, rep_out = "reports";
  int rep_top_k = 10;
  report->add_option("--config", rep_config, "run config (for --run-dir mode)");
  report->add_option("--run-dir", rep_run_dir, "finished run directory");
  report->add_option("--baseline", rep_baseline, "baseline prediction dump");
  report->add_option("--target", rep_target, "second prediction dump");
  report->add_option("--out-dir", rep_out, "output directory (pair mode)");
  report->add_option("--top-k", rep_top_k, "question types per histogram");

  // reproduce
  auto* repro = app.add_subcommand("reproduce", "run a full recipe end to end");
  std::string repro_recipe, repro_out;
  int repro_jobs = 0;
  repro->add_option("--recipe", repro_recipe, "recipe file (TOML or JSON)")->required();
  repro->add_option("--out-dir", repro_out, "run directory (default: recipe output_dir)");
  repro->add_option("--jobs", repro_jobs, "parallel matrix cells");

  // config
  auto* config_cmd = app.add_subcommand("config", "inspect configuration");
  auto* config_show = config_cmd->add_subcommand("show", "print the effective config");
  std::string show_config;
  config_show->add_option("--config", show_config, "run config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (gen->parsed()) {
    ConfigPtr cfg;
    if (int rc = load_config(gen_config, cfg)) return rc;
    if (vqalab_status s = vqalab_generate(cfg.get(), gen_out.c_str())) return fail(s);
    std::cout << "step=generate status=ok out_dir=" << gen_out << "\n";
    return 0;
  }

  if (morph->parsed()) {
    const char* lex = morph_lexicon.empty() ? nullptr : morph_lexicon.c_str();
    if (vqalab_status s = vqalab_morph(morph_in.c_str(), morph_out.c_str(), morph_variant,
                                       morph_seed, lex))
      return fail(s);
    std::cout << "step=morph status=ok variant=" << morph_variant << " out=" << morph_out
              << "\n";
    return 0;
  }

  if (train->parsed()) {
    ConfigPtr cfg;
    if (int rc = load_config(train_config, cfg)) return rc;
    std::string cell = "{\"name\":\"cell\",\"train_input\":" + json_quote(train_input) +
                       ",\"model_mode\":" + json_quote(train_mode);
    if (!train_debias.empty())
      cell += ",\"debias\":{\"method\":" + json_quote(train_debias) + "}";
    if (train_epochs >= 0) cell += ",\"epochs\":" + std::to_string(train_epochs);
    if (train_seed >= 0) cell += ",\"seed\":" + std::to_string(train_seed);
    cell += ",\"eval\":[]}";
    const char* loss_log = train_loss_log.empty() ? nullptr : train_loss_log.c_str();
    if (vqalab_status s = vqalab_train(cfg.get(), train_data.c_str(), cell.c_str(),
                                       train_out.c_str(), loss_log))
      return fail(s);
    std::cout << "step=train status=ok checkpoint=" << train_out << "\n";
    return 0;
  }

  if (eval->parsed()) {
    vqalab_model* raw = nullptr;
    if (vqalab_status s = vqalab_model_load(eval_ckpt.c_str(), &raw)) return fail(s);
    ModelPtr model(raw);
    const char* attention = eval_attention.empty() ? nullptr : eval_attention.c_str();
    const char* encodings = eval_encodings.empty() ? nullptr : eval_encodings.c_str();
    if (vqalab_status s =
            vqalab_eval(model.get(), eval_data.c_str(), eval_split.c_str(),
                        eval_input.c_str(), eval_seed, eval_out.c_str(), attention,
                        encodings))
      return fail(s);
    std::cout << "step=eval status=ok split=" << eval_split << " input=" << eval_input
              << " out=" << eval_out << "\n";
    return 0;
  }

  if (report->parsed()) {
    if (!rep_run_dir.empty()) {
      if (rep_config.empty()) {
        std::cerr << "error: --run-dir mode needs --config\n";
        return 2;
      }
      ConfigPtr cfg;
      if (int rc = load_config(rep_config, cfg)) return rc;
      if (vqalab_status s = vqalab_report_run(cfg.get(), rep_run_dir.c_str()))
        return fail(s);
      std::cout << "step=report status=ok run_dir=" << rep_run_dir << "\n";
      return 0;
    }
    if (rep_baseline.empty() || rep_target.empty()) {
      std::cerr << "error: report needs --run-dir or both --baseline and --target\n";
      return 2;
    }
    if (vqalab_status s = vqalab_report_pair(rep_baseline.c_str(), rep_target.c_str(),
                                             rep_out.c_str(), rep_top_k))
      return fail(s);
    std::cout << "step=report status=ok out_dir=" << rep_out << "\n";
    return 0;
  }

  if (repro->parsed()) {
    ConfigPtr cfg;
    if (int rc = load_config(repro_recipe, cfg)) return rc;
    if (repro_jobs > 0) {
      std::string jobs = std::to_string(repro_jobs);
      if (vqalab_status s = vqalab_config_set(cfg.get(), "matrix.jobs", jobs.c_str()))
        return fail(s);
    }
    std::string out_dir = repro_out;
    if (out_dir.empty()) {
      char* dump = nullptr;
      if (vqalab_status s = vqalab_config_dump(cfg.get(), &dump)) return fail(s);
      // output_dir sits at the top level of the canonical dump.
      std::string text(dump);
      vqalab_string_free(dump);
      auto pos = text.find("\"output_dir\": \"");
      if (pos != std::string::npos) {
        pos += 15;
        out_dir = text.substr(pos, text.find('"', pos) - pos);
      } else {
        out_dir = "out";
      }
    }
    if (vqalab_status s = vqalab_reproduce(cfg.get(), out_dir.c_str())) return fail(s);
    std::cout << "step=reproduce status=ok run_dir=" << out_dir << "\n";
    return 0;
  }

  if (config_show->parsed()) {
    ConfigPtr cfg;
    if (int rc = load_config(show_config, cfg)) return rc;
    char* dump = nullptr;
    if (vqalab_status s = vqalab_config_dump(cfg.get(), &dump)) return fail(s);
    std::cout << dump << "\n";
    vqalab_string_free(dump);
    return 0;
  }

  std::cerr << app.help();
  return 2;
}
