#pragma once

#include <string>

#include "config.hpp"
#include "dataset.hpp"

namespace vqalab {

// Consumes the prediction/attention/encoding dumps under
// <run_dir>/cells/<name>/ and emits the CSV tables plus a human-readable
// rendering into <run_dir>/reports/. Tables mirror the accuracy grid, the
// robustness grid, the variant-training grid, the prediction-flip grid,
// the debias grid, and the flip-breakdown / attention / encoding-distance
// figure payloads. Missing dumps simply drop their rows.
void write_run_reports(const Config& cfg, const Dataset& data, const std::string& run_dir);

// Pairwise analysis of two prediction dumps (baseline model vs a second
// model on the same questions).
void write_pair_report(const std::string& baseline_path, const std::string& target_path,
                       const std::string& out_dir, size_t top_k);

}  // namespace vqalab
