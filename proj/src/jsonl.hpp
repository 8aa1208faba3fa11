#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace vqalab {

// All writes are atomic: content lands in "<path>.tmp" and is renamed over
// the target.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Streams one parsed JSON object per non-empty line.
void for_each_jsonl(const std::string& path,
                    const std::function<void(const nlohmann::json&, size_t)>& fn);

struct QuestionRow {
  int64_t question_id = 0;
  std::string question;
  std::optional<std::string> question_type;
  std::optional<std::string> answer_type;
};

struct SceneRow {
  int64_t question_id = 0;
  std::vector<std::vector<double>> features;  // K x D_v
};

struct AnswerRow {
  int64_t question_id = 0;
  std::string answer;
  std::string answer_type;
};

std::vector<QuestionRow> load_questions(const std::string& path);
void save_questions(const std::string& path, const std::vector<QuestionRow>& rows);

std::vector<SceneRow> load_scenes(const std::string& path);
void save_scenes(const std::string& path, const std::vector<SceneRow>& rows);

std::vector<AnswerRow> load_answers(const std::string& path);
void save_answers(const std::string& path, const std::vector<AnswerRow>& rows);

}  // namespace vqalab
