#include "toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace vqalab {
namespace {

class TomlParser {
 public:
  explicit TomlParser(const std::string& text) : text_(text) {}

  nlohmann::json parse() {
    root_ = nlohmann::json::object();
    current_ = &root_;
    skip_ws_and_comments();
    while (!eof()) {
      if (peek() == '[') {
        parse_table_header();
      } else {
        parse_key_value(*current_);
      }
      skip_ws_and_comments();
    }
    return std::move(root_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("toml: line " + std::to_string(line_) + ": " + msg);
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char get() {
    char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_ws_and_comments() {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        get();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  void expect_line_end() {
    skip_spaces();
    if (eof()) return;
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
    if (eof()) return;
    if (peek() == '\r') get();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    get();
  }

  std::string parse_key_part() {
    skip_spaces();
    if (eof()) fail("expected a key");
    if (peek() == '"' || peek() == '\'') return parse_string();
    std::string key;
    while (!eof()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
        key.push_back(get());
      } else {
        break;
      }
    }
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> parse_dotted_key() {
    std::vector<std::string> parts{parse_key_part()};
    skip_spaces();
    while (!eof() && peek() == '.') {
      get();
      parts.push_back(parse_key_part());
      skip_spaces();
    }
    return parts;
  }

  void parse_table_header() {
    get();  // '['
    bool array_of_tables = false;
    if (!eof() && peek() == '[') {
      array_of_tables = true;
      get();
    }
    auto parts = parse_dotted_key();
    skip_spaces();
    if (eof() || get() != ']') fail("unterminated table header");
    if (array_of_tables) {
      if (eof() || get() != ']') fail("unterminated array-of-tables header");
    }
    expect_line_end();

    nlohmann::json* node = &root_;
    for (size_t i = 0; i < parts.size(); ++i) {
      const bool last = i + 1 == parts.size();
      nlohmann::json& slot = (*node)[parts[i]];
      if (last && array_of_tables) {
        if (slot.is_null()) slot = nlohmann::json::array();
        if (!slot.is_array()) fail("redefinition of key \"" + parts[i] + "\"");
        slot.push_back(nlohmann::json::object());
        node = &slot.back();
      } else {
        if (slot.is_null()) slot = nlohmann::json::object();
        if (slot.is_array()) {
          if (slot.empty()) fail("cannot extend empty array of tables");
          node = &slot.back();
        } else if (slot.is_object()) {
          node = &slot;
        } else {
          fail("key \"" + parts[i] + "\" is not a table");
        }
      }
    }
    current_ = node;
  }

  void parse_key_value(nlohmann::json& table) {
    auto parts = parse_dotted_key();
    skip_spaces();
    if (eof() || get() != '=') fail("expected '=' after key");
    skip_spaces();
    nlohmann::json value = parse_value();
    expect_line_end();

    nlohmann::json* node = &table;
    for (size_t i = 0; i + 1 < parts.size(); ++i) {
      nlohmann::json& slot = (*node)[parts[i]];
      if (slot.is_null()) slot = nlohmann::json::object();
      if (!slot.is_object()) fail("key \"" + parts[i] + "\" is not a table");
      node = &slot;
    }
    if (node->contains(parts.back())) fail("duplicate key \"" + parts.back() + "\"");
    (*node)[parts.back()] = std::move(value);
  }

  nlohmann::json parse_value() {
    if (eof()) fail("expected a value");
    char c = peek();
    if (c == '"' || c == '\'') return parse_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    return parse_scalar();
  }

  std::string parse_string() {
    char quote = get();
    std::string out;
    while (true) {
      if (eof()) fail("unterminated string");
      char c = get();
      if (c == quote) break;
      if (c == '\n') fail("newline in string");
      if (quote == '"' && c == '\\') {
        if (eof()) fail("dangling escape");
        char e = get();
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  nlohmann::json parse_array() {
    get();  // '['
    nlohmann::json arr = nlohmann::json::array();
    while (true) {
      skip_ws_and_comments();
      if (eof()) fail("unterminated array");
      if (peek() == ']') { get(); break; }
      arr.push_back(parse_value());
      skip_ws_and_comments();
      if (eof()) fail("unterminated array");
      if (peek() == ',') { get(); continue; }
      if (peek() == ']') { get(); break; }
      fail("expected ',' or ']' in array");
    }
    return arr;
  }

  nlohmann::json parse_inline_table() {
    get();  // '{'
    nlohmann::json obj = nlohmann::json::object();
    skip_spaces();
    if (!eof() && peek() == '}') { get(); return obj; }
    while (true) {
      auto parts = parse_dotted_key();
      skip_spaces();
      if (eof() || get() != '=') fail("expected '=' in inline table");
      skip_spaces();
      nlohmann::json value = parse_value();
      nlohmann::json* node = &obj;
      for (size_t i = 0; i + 1 < parts.size(); ++i) {
        nlohmann::json& slot = (*node)[parts[i]];
        if (slot.is_null()) slot = nlohmann::json::object();
        node = &slot;
      }
      (*node)[parts.back()] = std::move(value);
      skip_spaces();
      if (eof()) fail("unterminated inline table");
      if (peek() == ',') { get(); skip_spaces(); continue; }
      if (peek() == '}') { get(); break; }
      fail("expected ',' or '}' in inline table");
    }
    return obj;
  }

  nlohmann::json parse_scalar() {
    std::string tok;
    while (!eof()) {
      char c = peek();
      if (c == '\n' || c == '\r' || c == '#' || c == ',' || c == ']' || c == '}' ||
          c == ' ' || c == '\t')
        break;
      tok.push_back(get());
    }
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail("expected a value");

    std::string digits;
    for (char c : tok)
      if (c != '_') digits.push_back(c);
    bool is_float = false;
    for (char c : digits)
      if (c == '.' || c == 'e' || c == 'E') is_float = true;
    if (digits == "inf" || digits == "+inf" || digits == "-inf" || digits == "nan")
      is_float = true;
    try {
      if (is_float) {
        size_t used = 0;
        double v = std::stod(digits, &used);
        if (used != digits.size()) fail("malformed number \"" + tok + "\"");
        return v;
      }
      size_t used = 0;
      long long v = std::stoll(digits, &used);
      if (used != digits.size()) fail("malformed number \"" + tok + "\"");
      return v;
    } catch (const std::exception&) {
      fail("malformed value \"" + tok + "\"");
    }
  }

  const std::string& text_;
  size_t pos_ = 0;
  size_t line_ = 1;
  nlohmann::json root_;
  nlohmann::json* current_ = nullptr;
};

}  // namespace

nlohmann::json parse_toml(const std::string& text) { return TomlParser(text).parse(); }

nlohmann::json parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

nlohmann::json parse_config_file(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "json") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("json: ") + e.what());
    }
  }
  return parse_toml_file(path);
}

nlohmann::json parse_config_text(const std::string& text, const std::string& format) {
  if (format == "json") {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("json: ") + e.what());
    }
  }
  if (format == "toml" || format.empty()) return parse_toml(text);
  throw InvalidArgumentError("unknown config format: \"" + format + "\"");
}

}  // namespace vqalab
