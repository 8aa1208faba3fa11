#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vqalab {

struct PredictionRecord {
  int64_t question_id = 0;
  std::string pred;
  std::string gold;
  bool correct = false;
  std::string qtype;        // matched question-type phrase, "" when none
  std::string answer_type;  // "yes/no" | "number" | "other"
};

std::vector<PredictionRecord> load_predictions(const std::string& path);
void save_predictions(const std::string& path, const std::vector<PredictionRecord>& records);

struct GroupStat {
  size_t total = 0;
  size_t correct = 0;
  double percent() const;  // 100 * correct / total; 0 when empty
};

struct AccuracyReport {
  GroupStat all, yes_no, num, other;
  std::map<std::string, GroupStat> per_qtype;
};

// Throws MetricsError on an empty record list.
AccuracyReport accuracy(const std::vector<PredictionRecord>& records);

// %Rob = N_{rv,rq} / N_rq * 100. Undefined (NA) when nothing was correct
// on the originals.
struct RobResult {
  size_t n_rq = 0;     // originals answered correctly
  size_t n_rv_rq = 0;  // of those, variants also correct
  bool defined() const { return n_rq > 0; }
  double percent() const;
};

RobResult rob(const std::vector<PredictionRecord>& orig,
              const std::vector<PredictionRecord>& variant);

// Prediction-flip ratios between an original-model dump and a
// variant-model dump, both on the same questions.
struct FlipResult {
  size_t base_correct = 0;  // originally right
  size_t base_wrong = 0;    // originally wrong
  size_t lost = 0;          // right -> wrong
  size_t gained = 0;        // wrong -> right
  std::optional<double> c2w() const;  // 100 * lost / base_correct
  std::optional<double> w2c() const;  // 100 * gained / base_wrong
};

FlipResult flip_ratios(const std::vector<PredictionRecord>& orig,
                       const std::vector<PredictionRecord>& variant_model);

// Top-k question types per answer type for each flip direction.
struct FlipBreakdown {
  // answer_type -> [(qtype, count)] sorted by count desc, qtype asc.
  std::map<std::string, std::vector<std::pair<std::string, size_t>>> won;   // x -> ok
  std::map<std::string, std::vector<std::pair<std::string, size_t>>> lost;  // ok -> x
};

FlipBreakdown flip_breakdown(const std::vector<PredictionRecord>& orig,
                             const std::vector<PredictionRecord>& variant_model,
                             size_t top_k);

// simi = 1 - mean cos<q_i, var_i>; lies in [0, 2]. Throws SimError on a
// zero encoding, MetricsError on misalignment.
double simi(const std::vector<std::vector<double>>& q_encs,
            const std::vector<std::vector<double>>& var_encs);

// Per-question-type majority-answer classifier; the question-only
// frequency baseline of the changing-priors setup.
std::map<std::string, std::string> majority_answers(
    const std::vector<std::pair<std::string, std::string>>& qtype_answer);
double majority_accuracy(const std::map<std::string, std::string>& majority,
                         const std::vector<std::pair<std::string, std::string>>& eval);

// Percentage rendered to two decimals, ties rounded half-to-even.
std::string format_percent(double value);
std::string format_percent(const std::optional<double>& value);  // "NA" when absent

}  // namespace vqalab
