#include "text.hpp"

#include <cctype>

#include "errors.hpp"

namespace vqalab {

TokenizedText tokenize(const std::string& text) {
  TokenizedText out;
  std::string trimmed = text;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
    trimmed.pop_back();
  if (!trimmed.empty() && trimmed.back() == '?') {
    out.had_question_mark = true;
    trimmed.pop_back();
  }
  std::string current;
  for (char c : trimmed) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      out.tokens.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) out.tokens.push_back(current);
  if (out.tokens.empty())
    throw InvalidQuestionError("question has no tokens: \"" + text + "\"");
  return out;
}

std::string render_surface(const std::vector<std::string>& tokens, bool question_mark) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  if (question_mark) out.push_back('?');
  return out;
}

}  // namespace vqalab
