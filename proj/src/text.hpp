#pragma once

#include <string>
#include <vector>

namespace vqalab {

struct TokenizedText {
  std::vector<std::string> tokens;  // lowercase surfaces, no punctuation
  bool had_question_mark = false;   // trailing "?" stripped and remembered
};

// Lowercases and splits on any non-alphanumeric character. A terminal "?"
// is recorded rather than emitted as a token. Throws InvalidQuestionError
// if no token survives.
TokenizedText tokenize(const std::string& text);

// Inverse of tokenize up to normalization: space-joined tokens with the
// question mark re-appended.
std::string render_surface(const std::vector<std::string>& tokens, bool question_mark);

}  // namespace vqalab
