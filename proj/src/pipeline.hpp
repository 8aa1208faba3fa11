#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"

namespace vqalab {

struct CellOutcome {
  std::string name;
  bool ok = false;
  std::string error;
  double train_seconds = 0.0;
  std::string checkpoint_hash;
};

struct RunOutcome {
  std::vector<CellOutcome> cells;
  double generate_seconds = 0.0;
  double report_seconds = 0.0;
  bool all_ok() const;
};

// Trains and evaluates every matrix cell into <run_dir>/cells/<name>/.
// Cell failures are recorded, not propagated; remaining cells still run.
// Honors cfg.matrix.jobs for cell-level parallelism.
RunOutcome run_matrix(const Config& cfg, const Dataset& data, const std::string& run_dir);

// generate -> matrix -> reports -> manifest. Returns the outcome; the
// manifest lands in <run_dir>/manifest.json.
RunOutcome reproduce(const Config& cfg, const std::string& run_dir);

// Trains one cell and writes its checkpoint, loss log and eval dumps.
void run_single_cell(const Config& cfg, const CellConfig& cell, const Dataset& data,
                     const std::string& cell_dir);

uint64_t file_fnv1a(const std::string& path);

}  // namespace vqalab
