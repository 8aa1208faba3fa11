#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lexicon.hpp"

namespace vqalab {

constexpr int kPadId = 0;
constexpr int kUnkId = 1;
constexpr const char* kPadSurface = "<pad>";
constexpr const char* kUnkSurface = "<unk>";

// Word <-> id table. Id 0 is the padding symbol, id 1 the unknown word.
// Built from the training split only; immutable afterwards.
class Vocabulary {
 public:
  Vocabulary();

  int add(const std::string& surface);           // returns existing id if known
  int lookup(const std::string& surface) const;  // kUnkId when out of vocabulary
  const std::string& surface(int id) const;
  size_t size() const { return surfaces_.size(); }

  const std::vector<std::string>& surfaces() const { return surfaces_; }
  static Vocabulary from_surfaces(const std::vector<std::string>& surfaces);

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, int> index_;
};

struct Question {
  int64_t id = 0;
  std::vector<std::string> tokens;  // unpadded, "?" stripped
  bool had_question_mark = false;
  std::optional<size_t> qtype;  // index into the lexicon
  size_t prefix_len = 0;        // qtype ? entry length : 0
  AnswerType answer_type = AnswerType::Other;

  std::vector<std::string> prefix() const {
    return {tokens.begin(), tokens.begin() + static_cast<long>(prefix_len)};
  }
  std::vector<std::string> postfix() const {
    return {tokens.begin() + static_cast<long>(prefix_len), tokens.end()};
  }
  std::string qtype_phrase(const QTypeLexicon& lex) const {
    return qtype ? lex.entry(*qtype).phrase() : std::string();
  }
};

// Longest-match decomposition against the lexicon. Total: no match yields
// an empty prefix and postfix == tokens.
void decompose(Question& q, const QTypeLexicon& lex);

// Builds a Question from raw text. When `declared_qtype` is present and
// found in the lexicon it takes precedence over the longest match.
Question make_question(int64_t id, const std::string& text, const QTypeLexicon& lex,
                       const std::optional<std::string>& declared_qtype = std::nullopt,
                       const std::optional<std::string>& declared_answer_type = std::nullopt);

// Fixed-length id rendering: right-padded with kPadId or right-truncated.
// Out-of-vocabulary surfaces map to kUnkId.
std::vector<int> pad(const std::vector<std::string>& tokens, size_t length,
                     const Vocabulary& vocab);

}  // namespace vqalab
