#include "lexicon.hpp"

#include <fstream>
#include <set>

#include "errors.hpp"
#include "text.hpp"

namespace vqalab {

std::string answer_type_name(AnswerType t) {
  switch (t) {
    case AnswerType::YesNo: return "yes/no";
    case AnswerType::Num: return "number";
    case AnswerType::Other: return "other";
  }
  return "other";
}

AnswerType answer_type_from_name(const std::string& name) {
  if (name == "yes/no" || name == "yesno" || name == "YesNo") return AnswerType::YesNo;
  if (name == "number" || name == "num" || name == "Num") return AnswerType::Num;
  if (name == "other" || name == "Other") return AnswerType::Other;
  throw InvalidArgumentError("unknown answer type: \"" + name + "\"");
}

std::string LexiconEntry::phrase() const {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

QTypeLexicon::QTypeLexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (e.tokens.empty()) throw InvalidArgumentError("empty lexicon entry");
    if (!seen.insert(e.phrase()).second)
      throw InvalidArgumentError("duplicate lexicon entry: \"" + e.phrase() + "\"");
  }
}

QTypeLexicon QTypeLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon file: " + path);
  std::vector<LexiconEntry> entries;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("lexicon line " + std::to_string(lineno) + " lacks a tab separator");
    LexiconEntry e;
    e.tokens = tokenize(line.substr(0, tab)).tokens;
    e.answer_type = answer_type_from_name(line.substr(tab + 1));
    entries.push_back(std::move(e));
  }
  return QTypeLexicon(std::move(entries));
}

void QTypeLexicon::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write lexicon file: " + path);
  for (const auto& e : entries_)
    out << e.phrase() << '\t' << answer_type_name(e.answer_type) << '\n';
}

std::optional<size_t> QTypeLexicon::match(const std::vector<std::string>& tokens) const {
  std::optional<size_t> best;
  size_t best_len = 0;
  for (size_t i = 0; i < entries_.size(); ++i) {
    const auto& et = entries_[i].tokens;
    if (et.size() > tokens.size() || et.size() <= best_len) continue;
    bool ok = true;
    for (size_t j = 0; j < et.size(); ++j) {
      if (et[j] != tokens[j]) { ok = false; break; }
    }
    if (ok) { best = i; best_len = et.size(); }
  }
  return best;
}

std::optional<size_t> QTypeLexicon::find_phrase(const std::string& phrase) const {
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].phrase() == phrase) return i;
  return std::nullopt;
}

}  // namespace vqalab
