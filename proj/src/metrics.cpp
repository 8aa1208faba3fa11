#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "errors.hpp"
#include "jsonl.hpp"

namespace vqalab {
namespace {

// Pairs orig[i] with the variant record carrying the same question_id;
// missing or duplicate ids are alignment errors, not wrong answers.
std::vector<std::pair<const PredictionRecord*, const PredictionRecord*>> align(
    const std::vector<PredictionRecord>& orig,
    const std::vector<PredictionRecord>& variant) {
  if (orig.size() != variant.size())
    throw MetricsError("prediction dumps differ in size: " + std::to_string(orig.size()) +
                       " vs " + std::to_string(variant.size()));
  std::unordered_map<int64_t, const PredictionRecord*> by_id;
  by_id.reserve(variant.size());
  for (const auto& r : variant)
    if (!by_id.emplace(r.question_id, &r).second)
      throw MetricsError("duplicate question_id " + std::to_string(r.question_id) +
                         " in variant dump");
  std::vector<std::pair<const PredictionRecord*, const PredictionRecord*>> out;
  out.reserve(orig.size());
  for (const auto& r : orig) {
    auto it = by_id.find(r.question_id);
    if (it == by_id.end())
      throw MetricsError("question_id " + std::to_string(r.question_id) +
                         " missing from variant dump");
    out.emplace_back(&r, it->second);
  }
  return out;
}

void bump(GroupStat& g, bool correct) {
  ++g.total;
  if (correct) ++g.correct;
}

std::vector<std::pair<std::string, size_t>> top_counts(
    const std::map<std::string, size_t>& counts, size_t top_k) {
  std::vector<std::pair<std::string, size_t>> v(counts.begin(), counts.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (v.size() > top_k) v.resize(top_k);
  return v;
}

}  // namespace

std::vector<PredictionRecord> load_predictions(const std::string& path) {
  std::vector<PredictionRecord> records;
  for_each_jsonl(path, [&](const nlohmann::json& j, size_t lineno) {
    try {
      PredictionRecord r;
      r.question_id = j.at("question_id").get<int64_t>();
      r.pred = j.at("pred").get<std::string>();
      r.gold = j.at("gold").get<std::string>();
      r.correct = j.at("correct").get<bool>();
      r.qtype = j.value("qtype", "");
      r.answer_type = j.value("answer_type", "other");
      if (r.correct != (r.pred == r.gold))
        throw MetricsError(path + ":" + std::to_string(lineno) +
                           ": correct flag contradicts pred/gold");
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  });
  return records;
}

void save_predictions(const std::string& path, const std::vector<PredictionRecord>& records) {
  std::string buf;
  for (const auto& r : records) {
    nlohmann::json j = {{"question_id", r.question_id}, {"pred", r.pred},
                        {"gold", r.gold},               {"correct", r.correct},
                        {"qtype", r.qtype},             {"answer_type", r.answer_type}};
    buf += j.dump();
    buf.push_back('\n');
  }
  atomic_write_file(path, buf);
}

double GroupStat::percent() const {
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

AccuracyReport accuracy(const std::vector<PredictionRecord>& records) {
  if (records.empty()) throw MetricsError("accuracy over an empty record list");
  AccuracyReport rep;
  for (const auto& r : records) {
    bump(rep.all, r.correct);
    if (r.answer_type == "yes/no") bump(rep.yes_no, r.correct);
    else if (r.answer_type == "number") bump(rep.num, r.correct);
    else bump(rep.other, r.correct);
    bump(rep.per_qtype[r.qtype], r.correct);
  }
  return rep;
}

double RobResult::percent() const {
  if (!defined()) throw MetricsError("Rob is undefined when N_rq = 0");
  return 100.0 * static_cast<double>(n_rv_rq) / static_cast<double>(n_rq);
}

RobResult rob(const std::vector<PredictionRecord>& orig,
              const std::vector<PredictionRecord>& variant) {
  RobResult res;
  for (const auto& [o, v] : align(orig, variant)) {
    if (!o->correct) continue;
    ++res.n_rq;
    if (v->correct) ++res.n_rv_rq;
  }
  return res;
}

std::optional<double> FlipResult::c2w() const {
  if (base_correct == 0) return std::nullopt;
  return 100.0 * static_cast<double>(lost) / static_cast<double>(base_correct);
}

std::optional<double> FlipResult::w2c() const {
  if (base_wrong == 0) return std::nullopt;
  return 100.0 * static_cast<double>(gained) / static_cast<double>(base_wrong);
}

FlipResult flip_ratios(const std::vector<PredictionRecord>& orig,
                       const std::vector<PredictionRecord>& variant_model) {
  FlipResult res;
  for (const auto& [o, v] : align(orig, variant_model)) {
    if (o->correct) {
      ++res.base_correct;
      if (!v->correct) ++res.lost;
    } else {
      ++res.base_wrong;
      if (v->correct) ++res.gained;
    }
  }
  return res;
}

FlipBreakdown flip_breakdown(const std::vector<PredictionRecord>& orig,
                             const std::vector<PredictionRecord>& variant_model,
                             size_t top_k) {
  std::map<std::string, std::map<std::string, size_t>> won, lost;
  for (const auto& [o, v] : align(orig, variant_model)) {
    if (o->correct && !v->correct) ++lost[o->answer_type][o->qtype];
    else if (!o->correct && v->correct) ++won[o->answer_type][o->qtype];
  }
  FlipBreakdown out;
  for (const auto& [atype, counts] : won) out.won[atype] = top_counts(counts, top_k);
  for (const auto& [atype, counts] : lost) out.lost[atype] = top_counts(counts, top_k);
  return out;
}

double simi(const std::vector<std::vector<double>>& q_encs,
            const std::vector<std::vector<double>>& var_encs) {
  if (q_encs.empty()) throw MetricsError("simi over an empty encoding list");
  if (q_encs.size() != var_encs.size())
    throw MetricsError("simi encodings are misaligned");
  double acc = 0.0;
  for (size_t i = 0; i < q_encs.size(); ++i) {
    double nq = 0.0, nv = 0.0, d = 0.0;
    if (q_encs[i].size() != var_encs[i].size())
      throw MetricsError("simi encodings differ in dimension at index " + std::to_string(i));
    for (size_t j = 0; j < q_encs[i].size(); ++j) {
      nq += q_encs[i][j] * q_encs[i][j];
      nv += var_encs[i][j] * var_encs[i][j];
      d += q_encs[i][j] * var_encs[i][j];
    }
    if (nq == 0.0 || nv == 0.0) throw SimError("simi over a zero encoding");
    acc += d / (std::sqrt(nq) * std::sqrt(nv));
  }
  return 1.0 - acc / static_cast<double>(q_encs.size());
}

std::map<std::string, std::string> majority_answers(
    const std::vector<std::pair<std::string, std::string>>& qtype_answer) {
  std::map<std::string, std::map<std::string, size_t>> counts;
  for (const auto& [qtype, answer] : qtype_answer) ++counts[qtype][answer];
  std::map<std::string, std::string> out;
  for (const auto& [qtype, per_answer] : counts) {
    const std::string* best = nullptr;
    size_t best_count = 0;
    for (const auto& [answer, c] : per_answer) {
      // Ties break toward the lexicographically smallest answer; the map
      // iterates in that order already.
      if (c > best_count) {
        best = &answer;
        best_count = c;
      }
    }
    out[qtype] = *best;
  }
  return out;
}

double majority_accuracy(const std::map<std::string, std::string>& majority,
                         const std::vector<std::pair<std::string, std::string>>& eval) {
  if (eval.empty()) throw MetricsError("majority accuracy over an empty split");
  size_t correct = 0;
  for (const auto& [qtype, answer] : eval) {
    auto it = majority.find(qtype);
    if (it != majority.end() && it->second == answer) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(eval.size());
}

std::string format_percent(double value) {
  // Round half to even at the second decimal. The tie test runs on the
  // decimal fraction with a small guard band, so values that print as
  // x.xx5 land on the even neighbor.
  double scaled = value * 100.0;
  double base = std::floor(scaled);
  double frac = scaled - base;
  double rounded;
  if (std::abs(frac - 0.5) < 1e-9) {
    rounded = (std::fmod(base, 2.0) == 0.0) ? base : base + 1.0;
  } else {
    rounded = std::floor(scaled + 0.5);
  }
  char buf[32];
  snprintf(buf, sizeof(buf), "%.2f", rounded / 100.0);
  return buf;
}

std::string format_percent(const std::optional<double>& value) {
  return value ? format_percent(*value) : std::string("NA");
}

}  // namespace vqalab
