#include "question.hpp"

#include "errors.hpp"
#include "text.hpp"

namespace vqalab {

Vocabulary::Vocabulary() {
  surfaces_ = {kPadSurface, kUnkSurface};
  index_[kPadSurface] = kPadId;
  index_[kUnkSurface] = kUnkId;
}

int Vocabulary::add(const std::string& surface) {
  auto it = index_.find(surface);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(surfaces_.size());
  surfaces_.push_back(surface);
  index_[surface] = id;
  return id;
}

int Vocabulary::lookup(const std::string& surface) const {
  auto it = index_.find(surface);
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::surface(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= surfaces_.size())
    throw InvalidArgumentError("vocabulary id out of range: " + std::to_string(id));
  return surfaces_[static_cast<size_t>(id)];
}

Vocabulary Vocabulary::from_surfaces(const std::vector<std::string>& surfaces) {
  if (surfaces.size() < 2 || surfaces[0] != kPadSurface || surfaces[1] != kUnkSurface)
    throw InvalidArgumentError("vocabulary dump must start with pad and unk symbols");
  Vocabulary v;
  for (size_t i = 2; i < surfaces.size(); ++i) v.add(surfaces[i]);
  if (v.size() != surfaces.size())
    throw InvalidArgumentError("vocabulary dump contains duplicate surfaces");
  return v;
}

void decompose(Question& q, const QTypeLexicon& lex) {
  if (q.tokens.empty()) throw InvalidQuestionError("cannot decompose an empty token sequence");
  q.qtype = lex.match(q.tokens);
  if (q.qtype) {
    const auto& entry = lex.entry(*q.qtype);
    q.prefix_len = entry.tokens.size();
    q.answer_type = entry.answer_type;
  } else {
    q.prefix_len = 0;
  }
}

Question make_question(int64_t id, const std::string& text, const QTypeLexicon& lex,
                       const std::optional<std::string>& declared_qtype,
                       const std::optional<std::string>& declared_answer_type) {
  Question q;
  q.id = id;
  auto tokenized = tokenize(text);
  q.tokens = std::move(tokenized.tokens);
  q.had_question_mark = tokenized.had_question_mark;

  std::optional<size_t> declared;
  if (declared_qtype && !declared_qtype->empty()) {
    declared = lex.find_phrase(*declared_qtype);
    // A declared type only stands when it actually prefix-matches the tokens.
    if (declared) {
      const auto& et = lex.entry(*declared).tokens;
      if (et.size() > q.tokens.size() ||
          !std::equal(et.begin(), et.end(), q.tokens.begin()))
        declared = std::nullopt;
    }
  }
  if (declared) {
    q.qtype = declared;
    q.prefix_len = lex.entry(*declared).tokens.size();
    q.answer_type = lex.entry(*declared).answer_type;
  } else {
    decompose(q, lex);
  }
  if (declared_answer_type && !declared_answer_type->empty())
    q.answer_type = answer_type_from_name(*declared_answer_type);
  return q;
}

std::vector<int> pad(const std::vector<std::string>& tokens, size_t length,
                     const Vocabulary& vocab) {
  if (length < 1) throw InvalidArgumentError("pad length must be >= 1");
  std::vector<int> ids(length, kPadId);
  size_t n = std::min(length, tokens.size());
  for (size_t i = 0; i < n; ++i) ids[i] = vocab.lookup(tokens[i]);
  return ids;
}

}  // namespace vqalab
