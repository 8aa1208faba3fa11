#include "jsonl.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace vqalab {

void atomic_write_file(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing file: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot move file into place: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void for_each_jsonl(const std::string& path,
                    const std::function<void(const nlohmann::json&, size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    fn(row, lineno);
  }
}

std::vector<QuestionRow> load_questions(const std::string& path) {
  std::vector<QuestionRow> rows;
  for_each_jsonl(path, [&](const nlohmann::json& j, size_t lineno) {
    try {
      QuestionRow r;
      r.question_id = j.at("question_id").get<int64_t>();
      r.question = j.at("question").get<std::string>();
      if (j.contains("question_type") && !j["question_type"].is_null())
        r.question_type = j["question_type"].get<std::string>();
      if (j.contains("answer_type") && !j["answer_type"].is_null())
        r.answer_type = j["answer_type"].get<std::string>();
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  });
  return rows;
}

void save_questions(const std::string& path, const std::vector<QuestionRow>& rows) {
  std::string buf;
  for (const auto& r : rows) {
    nlohmann::json j = {{"question_id", r.question_id}, {"question", r.question}};
    if (r.question_type) j["question_type"] = *r.question_type;
    if (r.answer_type) j["answer_type"] = *r.answer_type;
    buf += j.dump();
    buf.push_back('\n');
  }
  atomic_write_file(path, buf);
}

std::vector<SceneRow> load_scenes(const std::string& path) {
  std::vector<SceneRow> rows;
  for_each_jsonl(path, [&](const nlohmann::json& j, size_t lineno) {
    try {
      SceneRow r;
      r.question_id = j.at("question_id").get<int64_t>();
      r.features = j.at("features").get<std::vector<std::vector<double>>>();
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  });
  return rows;
}

void save_scenes(const std::string& path, const std::vector<SceneRow>& rows) {
  std::string buf;
  for (const auto& r : rows) {
    nlohmann::json j = {{"question_id", r.question_id}, {"features", r.features}};
    buf += j.dump();
    buf.push_back('\n');
  }
  atomic_write_file(path, buf);
}

std::vector<AnswerRow> load_answers(const std::string& path) {
  std::vector<AnswerRow> rows;
  for_each_jsonl(path, [&](const nlohmann::json& j, size_t lineno) {
    try {
      AnswerRow r;
      r.question_id = j.at("question_id").get<int64_t>();
      r.answer = j.at("answer").get<std::string>();
      r.answer_type = j.at("answer_type").get<std::string>();
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  });
  return rows;
}

void save_answers(const std::string& path, const std::vector<AnswerRow>& rows) {
  std::string buf;
  for (const auto& r : rows) {
    nlohmann::json j = {{"question_id", r.question_id},
                        {"answer", r.answer},
                        {"answer_type", r.answer_type}};
    buf += j.dump();
    buf.push_back('\n');
  }
  atomic_write_file(path, buf);
}

}  // namespace vqalab
