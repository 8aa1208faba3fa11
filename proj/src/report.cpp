#include "report.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>

#include "errors.hpp"
#include "jsonl.hpp"
#include "metrics.hpp"
#include "trainer.hpp"

namespace fs = std::filesystem;

namespace vqalab {
namespace {

const std::vector<std::string> kSplits = {"test_id", "test_ood"};

std::string preds_path(const std::string& run_dir, const std::string& cell,
                       const std::string& split, const std::string& input) {
  return run_dir + "/cells/" + cell + "/preds_" + split + "_" + input + ".jsonl";
}

std::optional<std::vector<PredictionRecord>> try_load_preds(const std::string& path) {
  if (!fs::exists(path)) return std::nullopt;
  return load_predictions(path);
}

std::string acc_or_na(const std::string& run_dir, const std::string& cell,
                      const std::string& split, const std::string& input) {
  auto recs = try_load_preds(preds_path(run_dir, cell, split, input));
  if (!recs) return "NA";
  return format_percent(accuracy(*recs).all.percent());
}

struct Csv {
  std::ostringstream out;
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  }
  void save(const std::string& path) { atomic_write_file(path, out.str()); }
};

std::string fixed6(double v) {
  char buf[32];
  snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Plain-text table with aligned columns.
std::string render_table(const std::string& title,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> widths;
  for (const auto& r : rows)
    for (size_t i = 0; i < r.size(); ++i) {
      if (widths.size() <= i) widths.resize(i + 1, 0);
      widths[i] = std::max(widths[i], r[i].size());
    }
  std::ostringstream out;
  out << "== " << title << " ==\n";
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) {
      if (i) out << "  ";
      out << r[i];
      if (i + 1 < r.size()) out << std::string(widths[i] - r[i].size(), ' ');
    }
    out << '\n';
  }
  out << '\n';
  return out.str();
}

}  // namespace

void write_run_reports(const Config& cfg, const Dataset& data, const std::string& run_dir) {
  const std::string rep = run_dir + "/reports";
  fs::create_directories(rep);
  std::string text;

  // Question-only frequency baseline; the changing-priors precondition.
  {
    std::vector<std::pair<std::string, std::string>> train_pairs;
    for (const auto& s : data.train)
      train_pairs.emplace_back(s.question.qtype_phrase(data.lexicon), s.answer);
    auto majority = majority_answers(train_pairs);
    Csv csv;
    csv.row({"split", "majority_accuracy"});
    std::vector<std::vector<std::string>> rows{{"split", "majority_acc"}};
    for (const std::string split : {"train", "test_id", "test_ood"}) {
      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto& s : data.split(split))
        pairs.emplace_back(s.question.qtype_phrase(data.lexicon), s.answer);
      std::string v = format_percent(majority_accuracy(majority, pairs));
      csv.row({split, v});
      rows.push_back({split, v});
    }
    csv.save(rep + "/bias_check.csv");
    text += render_table("per-qtype majority baseline", rows);
  }

  // Accuracy of every (cell, split, input) dump that exists.
  {
    Csv csv;
    csv.row({"cell", "split", "input", "n", "all", "yes_no", "num", "other"});
    for (const auto& cell : cfg.matrix.cells) {
      for (const auto& ev : cell.evals) {
        auto recs = try_load_preds(
            preds_path(run_dir, cell.name, ev.split, input_mode_name(ev.input)));
        if (!recs) continue;
        auto rep_acc = accuracy(*recs);
        csv.row({cell.name, ev.split, input_mode_name(ev.input),
                 std::to_string(rep_acc.all.total), format_percent(rep_acc.all.percent()),
                 format_percent(rep_acc.yes_no.percent()),
                 format_percent(rep_acc.num.percent()),
                 format_percent(rep_acc.other.percent())});
      }
    }
    csv.save(rep + "/accuracy_cells.csv");
  }

  // Prefix/postfix accuracy grid (train-side and test-side incomplete
  // inputs vs the intact question).
  {
    Csv csv;
    csv.row({"model", "split", "ques", "pre_train", "post_train", "pre_test", "post_test"});
    std::vector<std::vector<std::string>> rows{
        {"model", "split", "ques", "pre-train", "post-train", "pre-test", "post-test"}};
    struct RowSpec {
      const char* label;
      const char* ques_cell;
      const char* pre_cell;
      const char* post_cell;
    };
    for (const RowSpec& r : {RowSpec{"full", "question", "prefix", "postfix"},
                             RowSpec{"q_only", "qonly", "qonly_prefix", "qonly_postfix"}}) {
      for (const auto& split : kSplits) {
        std::vector<std::string> cells = {
            r.label,
            split,
            acc_or_na(run_dir, r.ques_cell, split, "question"),
            acc_or_na(run_dir, r.pre_cell, split, "question"),
            acc_or_na(run_dir, r.post_cell, split, "question"),
            acc_or_na(run_dir, r.ques_cell, split, "prefix"),
            acc_or_na(run_dir, r.ques_cell, split, "postfix"),
        };
        csv.row(cells);
        rows.push_back(cells);
      }
    }
    csv.save(rep + "/table_prefix_postfix.csv");
    text += render_table("prefix/postfix accuracy grid", rows);
  }

  // Robustness grid: each model evaluated on the variant questions.
  {
    Csv csv;
    csv.row({"cell", "split", "tested_with", "acc", "rob"});
    std::vector<std::vector<std::string>> rows{{"cell", "split", "tested with", "acc", "rob"}};
    for (const auto& cell : cfg.matrix.cells) {
      for (const auto& split : kSplits) {
        auto base = try_load_preds(preds_path(run_dir, cell.name, split, "question"));
        if (!base) continue;
        for (const std::string tested : {"question", "variant1", "variant2", "variant3"}) {
          auto recs = try_load_preds(preds_path(run_dir, cell.name, split, tested));
          if (!recs) continue;
          std::string rob_str = "--";
          if (tested != "question") {
            RobResult r = rob(*base, *recs);
            rob_str = r.defined() ? format_percent(r.percent()) : "NA";
          }
          std::vector<std::string> out = {cell.name, split, tested,
                                          format_percent(accuracy(*recs).all.percent()),
                                          rob_str};
          csv.row(out);
          rows.push_back(out);
        }
      }
    }
    csv.save(rep + "/table_robustness.csv");
    text += render_table("variant-question robustness (Acc / Rob)", rows);
  }

  // Variant-trained models evaluated on the original questions.
  {
    Csv csv;
    csv.row({"trained_with", "split", "all", "yes_no", "num", "other", "delta_all"});
    std::vector<std::vector<std::string>> rows{
        {"trained with", "split", "all", "yes/no", "num", "other", "delta"}};
    for (const auto& split : kSplits) {
      auto base = try_load_preds(preds_path(run_dir, "question", split, "question"));
      double base_all = base ? accuracy(*base).all.percent() : 0.0;
      for (const std::string cell : {"question", "variant1", "variant2", "variant3"}) {
        auto recs = try_load_preds(preds_path(run_dir, cell, split, "question"));
        if (!recs) continue;
        auto a = accuracy(*recs);
        std::string delta = "--";
        if (base && cell != std::string("question")) {
          double d = a.all.percent() - base_all;
          delta = (d >= 0 ? "+" : "") + format_percent(d);
        }
        std::vector<std::string> out = {cell, split, format_percent(a.all.percent()),
                                        format_percent(a.yes_no.percent()),
                                        format_percent(a.num.percent()),
                                        format_percent(a.other.percent()), delta};
        csv.row(out);
        rows.push_back(out);
      }
    }
    csv.save(rep + "/table_variant_trained.csv");
    text += render_table("variant-trained models on original questions", rows);
  }

  // Prediction flips between the question-trained model and each
  // variant-trained model.
  {
    Csv csv;
    csv.row({"variant_cell", "split", "correct_to_wrong", "wrong_to_correct"});
    std::vector<std::vector<std::string>> rows{{"variant cell", "split", "ok->x", "x->ok"}};
    for (const auto& split : kSplits) {
      auto base = try_load_preds(preds_path(run_dir, "question", split, "question"));
      if (!base) continue;
      for (const std::string cell : {"variant1", "variant2", "variant3", "mixing",
                                     "contrastive"}) {
        auto recs = try_load_preds(preds_path(run_dir, cell, split, "question"));
        if (!recs) continue;
        FlipResult f = flip_ratios(*base, *recs);
        std::vector<std::string> out = {cell, split, format_percent(f.c2w()),
                                        format_percent(f.w2c())};
        csv.row(out);
        rows.push_back(out);
      }
    }
    csv.save(rep + "/table_flips.csv");
    text += render_table("prediction flips vs question-trained model", rows);
  }

  // Debias grid.
  {
    Csv csv;
    csv.row({"model", "split", "all", "yes_no", "num", "other"});
    std::vector<std::vector<std::string>> rows{
        {"model", "split", "all", "yes/no", "num", "other"}};
    for (const auto& split : kSplits) {
      for (const std::string cell : {"question", "mixing", "contrastive"}) {
        auto recs = try_load_preds(preds_path(run_dir, cell, split, "question"));
        if (!recs) continue;
        auto a = accuracy(*recs);
        std::vector<std::string> out = {cell, split, format_percent(a.all.percent()),
                                        format_percent(a.yes_no.percent()),
                                        format_percent(a.num.percent()),
                                        format_percent(a.other.percent())};
        csv.row(out);
        rows.push_back(out);
      }
    }
    csv.save(rep + "/table_debias.csv");
    text += render_table("debias methods on original questions", rows);
  }

  // Flip breakdown histograms against the strongest variant cell.
  {
    std::string best_cell;
    double best_acc = -1.0;
    for (const std::string cell : {"variant1", "variant2", "variant3"}) {
      auto recs = try_load_preds(preds_path(run_dir, cell, "test_ood", "question"));
      if (!recs) continue;
      double a = accuracy(*recs).all.percent();
      if (a > best_acc) {
        best_acc = a;
        best_cell = cell;
      }
    }
    auto base = try_load_preds(preds_path(run_dir, "question", "test_ood", "question"));
    if (!best_cell.empty() && base) {
      auto variant = try_load_preds(preds_path(run_dir, best_cell, "test_ood", "question"));
      auto bd = flip_breakdown(*base, *variant, static_cast<size_t>(cfg.report.top_k));
      Csv csv;
      csv.row({"direction", "answer_type", "qtype", "count"});
      for (const auto& [atype, entries] : bd.won)
        for (const auto& [qtype, count] : entries)
          csv.row({"wrong_to_correct", atype, qtype, std::to_string(count)});
      for (const auto& [atype, entries] : bd.lost)
        for (const auto& [qtype, count] : entries)
          csv.row({"correct_to_wrong", atype, qtype, std::to_string(count)});
      csv.out << "# variant_cell=" << best_cell << '\n';
      csv.save(rep + "/fig_flip_breakdown.csv");
    }
  }

  // Per-word attention: summary plus a handful of examples per cell.
  {
    Csv csv;
    csv.row({"cell", "split", "input", "n_with_qtype", "mean_prefix_mass"});
    std::string examples;
    for (const auto& cell : cfg.matrix.cells) {
      for (const auto& ev : cell.evals) {
        if (!ev.attention) continue;
        std::string path = run_dir + "/cells/" + cell.name + "/attention_" + ev.split +
                           "_" + input_mode_name(ev.input) + ".jsonl";
        if (!fs::exists(path)) continue;
        auto rows = load_attention(path);
        double mass = 0.0;
        size_t n = 0;
        for (const auto& r : rows) {
          if (r.qtype.empty()) continue;
          mass += r.prefix_mass;
          ++n;
        }
        csv.row({cell.name, ev.split, input_mode_name(ev.input), std::to_string(n),
                 n ? fixed6(mass / static_cast<double>(n)) : "NA"});
        for (size_t i = 0; i < rows.size() &&
                           i < static_cast<size_t>(cfg.report.attention_examples);
             ++i) {
          nlohmann::json j = {{"cell", cell.name},
                              {"split", ev.split},
                              {"input", input_mode_name(ev.input)},
                              {"question_id", rows[i].question_id},
                              {"words", rows[i].words},
                              {"weights", rows[i].weights}};
          examples += j.dump();
          examples.push_back('\n');
        }
      }
    }
    csv.save(rep + "/fig_attention.csv");
    atomic_write_file(rep + "/fig_attention_examples.jsonl", examples);
  }

  // Encoding distance between original- and variant-question encodings.
  {
    Csv csv;
    csv.row({"cell", "split", "variant", "simi"});
    std::vector<std::vector<std::string>> rows{{"cell", "split", "variant", "simi"}};
    for (const auto& cell : cfg.matrix.cells) {
      for (const auto& split : kSplits) {
        std::string base_path =
            run_dir + "/cells/" + cell.name + "/encodings_" + split + "_question.jsonl";
        if (!fs::exists(base_path)) continue;
        auto base = load_encodings(base_path);
        std::vector<std::vector<double>> q_encs;
        for (const auto& r : base) q_encs.push_back(r.q_enc);
        for (const std::string variant : {"variant1", "variant2", "variant3"}) {
          std::string vpath =
              run_dir + "/cells/" + cell.name + "/encodings_" + split + "_" + variant +
              ".jsonl";
          if (!fs::exists(vpath)) continue;
          auto var = load_encodings(vpath);
          if (var.size() != base.size())
            throw MetricsError("encoding dumps misaligned for cell " + cell.name);
          std::vector<std::vector<double>> var_encs;
          for (const auto& r : var) var_encs.push_back(r.q_enc);
          std::vector<std::string> out = {cell.name, split, variant,
                                          fixed6(simi(q_encs, var_encs))};
          csv.row(out);
          rows.push_back(out);
        }
      }
    }
    csv.save(rep + "/fig_simi.csv");
    text += render_table("encoding distance simi (0 = identical)", rows);
  }

  atomic_write_file(rep + "/tables.txt", text);
}

void write_pair_report(const std::string& baseline_path, const std::string& target_path,
                       const std::string& out_dir, size_t top_k) {
  fs::create_directories(out_dir);
  auto base = load_predictions(baseline_path);
  auto target = load_predictions(target_path);

  Csv acc_csv;
  acc_csv.row({"dump", "n", "all", "yes_no", "num", "other"});
  for (const auto& [name, recs] :
       {std::pair<std::string, const std::vector<PredictionRecord>*>{"baseline", &base},
        {"target", &target}}) {
    auto a = accuracy(*recs);
    acc_csv.row({name, std::to_string(a.all.total), format_percent(a.all.percent()),
                 format_percent(a.yes_no.percent()), format_percent(a.num.percent()),
                 format_percent(a.other.percent())});
  }
  acc_csv.save(out_dir + "/pair_accuracy.csv");

  RobResult r = rob(base, target);
  FlipResult f = flip_ratios(base, target);
  Csv pair_csv;
  pair_csv.row({"metric", "value"});
  pair_csv.row({"rob", r.defined() ? format_percent(r.percent()) : "NA"});
  pair_csv.row({"correct_to_wrong", format_percent(f.c2w())});
  pair_csv.row({"wrong_to_correct", format_percent(f.w2c())});
  pair_csv.save(out_dir + "/pair_rob_flips.csv");

  auto bd = flip_breakdown(base, target, top_k);
  Csv bd_csv;
  bd_csv.row({"direction", "answer_type", "qtype", "count"});
  for (const auto& [atype, entries] : bd.won)
    for (const auto& [qtype, count] : entries)
      bd_csv.row({"wrong_to_correct", atype, qtype, std::to_string(count)});
  for (const auto& [atype, entries] : bd.lost)
    for (const auto& [qtype, count] : entries)
      bd_csv.row({"correct_to_wrong", atype, qtype, std::to_string(count)});
  bd_csv.save(out_dir + "/pair_breakdown.csv");
}

}  // namespace vqalab
