#pragma once

#include <optional>
#include <string>
#include <vector>

namespace vqalab {

enum class AnswerType { YesNo, Num, Other };

std::string answer_type_name(AnswerType t);            // "yes/no" | "number" | "other"
AnswerType answer_type_from_name(const std::string&);  // accepts a few aliases

struct LexiconEntry {
  std::vector<std::string> tokens;  // the question-type phrase, tokenized
  AnswerType answer_type = AnswerType::Other;

  std::string phrase() const;
};

// Question-type phrase list with longest token-prefix lookup. Immutable
// after construction; safe for concurrent reads.
class QTypeLexicon {
 public:
  QTypeLexicon() = default;
  explicit QTypeLexicon(std::vector<LexiconEntry> entries);

  // File format: one phrase per line, tab, answer-type tag.
  static QTypeLexicon load(const std::string& path);
  void save(const std::string& path) const;

  // Index of the longest entry whose tokens prefix-match `tokens`, or
  // nullopt when nothing matches.
  std::optional<size_t> match(const std::vector<std::string>& tokens) const;

  // Exact phrase lookup (used when an annotation carries its own
  // question_type field).
  std::optional<size_t> find_phrase(const std::string& phrase) const;

  const LexiconEntry& entry(size_t i) const { return entries_[i]; }
  const std::vector<LexiconEntry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

 private:
  std::vector<LexiconEntry> entries_;
};

}  // namespace vqalab
