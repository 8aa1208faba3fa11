#include "pipeline.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <thread>

#include "errors.hpp"
#include "jsonl.hpp"
#include "metrics.hpp"
#include "report.hpp"
#include "synthgen.hpp"
#include "trainer.hpp"

namespace fs = std::filesystem;

namespace vqalab {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunSpec resolve_cell(const Config& cfg, const CellConfig& cell) {
  RunSpec spec;
  spec.train_input = cell.train_input;
  spec.model_mode = cell.model_mode;
  spec.debias = cell.debias;
  spec.model = cfg.model;
  spec.hyper = cfg.train;
  if (cell.epochs) spec.hyper.epochs = *cell.epochs;
  if (cell.seed) spec.hyper.seed = *cell.seed;
  return spec;
}

}  // namespace

bool RunOutcome::all_ok() const {
  for (const auto& c : cells)
    if (!c.ok) return false;
  return true;
}

uint64_t file_fnv1a(const std::string& path) {
  std::string bytes = read_file(path);
  return fnv1a64(bytes.data(), bytes.size());
}

void run_single_cell(const Config& cfg, const CellConfig& cell, const Dataset& data,
                     const std::string& cell_dir) {
  fs::create_directories(cell_dir);
  RunSpec spec = resolve_cell(cfg, cell);
  TrainResult result = train(data, spec);
  save_model(cell_dir + "/checkpoint.bin", result.model);
  save_loss_log(cell_dir + "/loss_log.jsonl", result.epoch_losses);

  for (const auto& ev : cell.evals) {
    EvalRequest req;
    req.input = ev.input;
    req.perturb_seed = spec.hyper.seed;
    req.want_attention = ev.attention;
    req.want_encodings = ev.encodings;
    EvalOutputs out = evaluate(result.model, data.split(ev.split), req);
    std::string stem = ev.split + "_" + input_mode_name(ev.input);
    save_predictions(cell_dir + "/preds_" + stem + ".jsonl", out.records);
    if (ev.attention)
      save_attention(cell_dir + "/attention_" + stem + ".jsonl", out.attention);
    if (ev.encodings)
      save_encodings(cell_dir + "/encodings_" + stem + ".jsonl", out.encodings);
  }
}

RunOutcome run_matrix(const Config& cfg, const Dataset& data, const std::string& run_dir) {
  RunOutcome outcome;
  outcome.cells.resize(cfg.matrix.cells.size());

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= cfg.matrix.cells.size()) return;
      const CellConfig& cell = cfg.matrix.cells[i];
      CellOutcome& res = outcome.cells[i];
      res.name = cell.name;
      auto t0 = std::chrono::steady_clock::now();
      try {
        std::string cell_dir = run_dir + "/cells/" + cell.name;
        run_single_cell(cfg, cell, data, cell_dir);
        res.train_seconds = seconds_since(t0);
        char buf[17];
        snprintf(buf, sizeof(buf), "%016llx",
                 static_cast<unsigned long long>(file_fnv1a(cell_dir + "/checkpoint.bin")));
        res.checkpoint_hash = buf;
        res.ok = true;
      } catch (const std::exception& e) {
        res.train_seconds = seconds_since(t0);
        res.error = e.what();
        res.ok = false;
      }
    }
  };

  int jobs = std::max(1, std::min<int>(cfg.matrix.jobs,
                                       static_cast<int>(cfg.matrix.cells.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return outcome;
}

RunOutcome reproduce(const Config& cfg, const std::string& run_dir) {
  fs::create_directories(run_dir);
  fs::create_directories(run_dir + "/data");
  fs::create_directories(run_dir + "/cells");
  fs::create_directories(run_dir + "/reports");

  atomic_write_file(run_dir + "/config.json", config_to_json(cfg).dump(2) + "\n");

  auto t0 = std::chrono::steady_clock::now();
  GeneratedData generated = generate(cfg.generator);
  save_generated(generated, cfg.generator, run_dir + "/data");
  Dataset data = dataset_from_generated(generated);
  RunOutcome outcome;
  outcome.generate_seconds = seconds_since(t0);

  RunOutcome matrix = run_matrix(cfg, data, run_dir);
  outcome.cells = std::move(matrix.cells);

  auto t1 = std::chrono::steady_clock::now();
  write_run_reports(cfg, data, run_dir);
  outcome.report_seconds = seconds_since(t1);

  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : outcome.cells) {
    nlohmann::json j = {{"name", c.name},
                        {"status", c.ok ? "ok" : "failed"},
                        {"train_seconds", c.train_seconds}};
    if (!c.ok) j["error"] = c.error;
    if (c.ok) j["checkpoint_hash"] = c.checkpoint_hash;
    cells.push_back(j);
  }
  nlohmann::json manifest = {
      {"config_hash", config_hash_hex(cfg)},
      {"generate_seconds", outcome.generate_seconds},
      {"report_seconds", outcome.report_seconds},
      {"cells", cells},
  };
  atomic_write_file(run_dir + "/manifest.json", manifest.dump(2) + "\n");
  return outcome;
}

}  // namespace vqalab
