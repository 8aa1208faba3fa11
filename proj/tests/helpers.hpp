#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lexicon.hpp"
#include "metrics.hpp"
#include "rng.hpp"

namespace vqalab::testing {

// Scratch directory under the test working directory, wiped on entry.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path("tmp_" + name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline QTypeLexicon tiny_lexicon() {
  std::vector<LexiconEntry> entries;
  auto add = [&](std::vector<std::string> tokens, AnswerType t) {
    LexiconEntry e;
    e.tokens = std::move(tokens);
    e.answer_type = t;
    entries.push_back(std::move(e));
  };
  add({"what", "color", "is"}, AnswerType::Other);
  add({"is", "there"}, AnswerType::YesNo);
  add({"is"}, AnswerType::YesNo);
  add({"how", "many"}, AnswerType::Num);
  return QTypeLexicon(std::move(entries));
}

// Upper-tail probability of the chi-square distribution via the
// closed-form recurrence Q(x; k+2) = Q(x; k) + pdf term, anchored at
// Q(x;1) = erfc(sqrt(x/2)) and Q(x;2) = exp(-x/2).
inline double chi2_sf(double x, int dof) {
  if (x <= 0.0) return 1.0;
  const double pi = std::atan2(0.0, -1.0);
  double q, term;
  int k;
  if (dof % 2 == 1) {
    q = std::erfc(std::sqrt(x / 2.0));
    term = std::sqrt(2.0 * x / pi) * std::exp(-x / 2.0);
    k = 1;
  } else {
    q = std::exp(-x / 2.0);
    term = (x / 2.0) * std::exp(-x / 2.0);
    k = 2;
  }
  while (k + 2 <= dof) {
    q += term;
    k += 2;
    term *= x / static_cast<double>(k);
  }
  return std::min(1.0, q);
}

// Randomized prediction tables for metric cross-checks.
inline std::vector<PredictionRecord> random_records(Rng& rng, size_t n,
                                                    bool shuffle_ids = false) {
  static const std::vector<std::string> qtypes = {"is there a", "how many",
                                                  "what color is the", ""};
  static const std::vector<std::string> atypes = {"yes/no", "number", "other"};
  static const std::vector<std::string> answers = {"yes", "no", "2", "red", "blue"};
  std::vector<PredictionRecord> out;
  std::vector<int64_t> ids(n);
  for (size_t i = 0; i < n; ++i) ids[i] = static_cast<int64_t>(i) + 100;
  if (shuffle_ids) rng.shuffle(ids);
  for (size_t i = 0; i < n; ++i) {
    PredictionRecord r;
    r.question_id = ids[i];
    r.gold = answers[rng.next_below(answers.size())];
    r.pred = rng.next_double() < 0.5 ? r.gold : answers[rng.next_below(answers.size())];
    r.correct = r.pred == r.gold;
    r.qtype = qtypes[rng.next_below(qtypes.size())];
    r.answer_type = atypes[rng.next_below(atypes.size())];
    out.push_back(std::move(r));
  }
  return out;
}

// Brute-force references, kept deliberately independent of src/metrics.
namespace reference {

inline double accuracy_all(const std::vector<PredictionRecord>& records) {
  size_t c = 0;
  for (const auto& r : records)
    if (r.pred == r.gold) ++c;
  return 100.0 * static_cast<double>(c) / static_cast<double>(records.size());
}

inline double accuracy_of_type(const std::vector<PredictionRecord>& records,
                               const std::string& atype, bool& any) {
  size_t c = 0, t = 0;
  for (const auto& r : records) {
    if (r.answer_type != atype) continue;
    ++t;
    if (r.pred == r.gold) ++c;
  }
  any = t > 0;
  return t == 0 ? 0.0 : 100.0 * static_cast<double>(c) / static_cast<double>(t);
}

inline const PredictionRecord* find_by_id(const std::vector<PredictionRecord>& records,
                                          int64_t id) {
  for (const auto& r : records)
    if (r.question_id == id) return &r;
  return nullptr;
}

inline double rob(const std::vector<PredictionRecord>& orig,
                  const std::vector<PredictionRecord>& variant, bool& defined) {
  size_t n_rq = 0, n_both = 0;
  for (const auto& o : orig) {
    if (o.pred != o.gold) continue;
    ++n_rq;
    const PredictionRecord* v = find_by_id(variant, o.question_id);
    if (v && v->pred == v->gold) ++n_both;
  }
  defined = n_rq > 0;
  return defined ? 100.0 * static_cast<double>(n_both) / static_cast<double>(n_rq) : 0.0;
}

inline std::pair<double, double> flips(const std::vector<PredictionRecord>& orig,
                                       const std::vector<PredictionRecord>& variant) {
  size_t bc = 0, bw = 0, lost = 0, gained = 0;
  for (const auto& o : orig) {
    const PredictionRecord* v = find_by_id(variant, o.question_id);
    bool oc = o.pred == o.gold, vc = v->pred == v->gold;
    if (oc) {
      ++bc;
      if (!vc) ++lost;
    } else {
      ++bw;
      if (vc) ++gained;
    }
  }
  double c2w = bc ? 100.0 * static_cast<double>(lost) / static_cast<double>(bc) : -1.0;
  double w2c = bw ? 100.0 * static_cast<double>(gained) / static_cast<double>(bw) : -1.0;
  return {c2w, w2c};
}

// Independent histogram construction for the flip breakdown.
inline std::map<std::string, std::vector<std::pair<std::string, size_t>>>
breakdown_side(const std::vector<PredictionRecord>& orig,
               const std::vector<PredictionRecord>& variant, bool from_wrong,
               size_t top_k) {
  std::map<std::string, std::map<std::string, size_t>> counts;
  for (const auto& o : orig) {
    const PredictionRecord* v = find_by_id(variant, o.question_id);
    bool oc = o.pred == o.gold, vc = v->pred == v->gold;
    bool hit = from_wrong ? (!oc && vc) : (oc && !vc);
    if (hit) ++counts[o.answer_type][o.qtype];
  }
  std::map<std::string, std::vector<std::pair<std::string, size_t>>> out;
  for (auto& [atype, per_q] : counts) {
    std::vector<std::pair<std::string, size_t>> v(per_q.begin(), per_q.end());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (v.size() > top_k) v.resize(top_k);
    out[atype] = v;
  }
  return out;
}

inline double simi(const std::vector<std::vector<double>>& a,
                   const std::vector<std::vector<double>>& b) {
  double total = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double na = 0, nb = 0, d = 0;
    for (size_t j = 0; j < a[i].size(); ++j) {
      na += a[i][j] * a[i][j];
      nb += b[i][j] * b[i][j];
      d += a[i][j] * b[i][j];
    }
    total += d / (std::sqrt(na) * std::sqrt(nb));
  }
  return 1.0 - total / static_cast<double>(a.size());
}

}  // namespace reference
}  // namespace vqalab::testing
