#include "dataset.hpp"

#include <unordered_map>

#include "errors.hpp"

namespace vqalab {
namespace {

std::vector<Sample> load_split(const std::string& dir, const std::string& split,
                               const QTypeLexicon& lex, int& scene_objects,
                               int& feature_dim) {
  auto questions = load_questions(dir + "/questions_" + split + ".jsonl");
  auto scenes = load_scenes(dir + "/scenes_" + split + ".jsonl");
  auto answers = load_answers(dir + "/answers_" + split + ".jsonl");

  std::unordered_map<int64_t, const SceneRow*> scene_by_id;
  for (const auto& s : scenes) scene_by_id[s.question_id] = &s;
  std::unordered_map<int64_t, const AnswerRow*> answer_by_id;
  for (const auto& a : answers) answer_by_id[a.question_id] = &a;

  std::vector<Sample> out;
  out.reserve(questions.size());
  for (const auto& q : questions) {
    Sample s;
    s.question = make_question(q.question_id, q.question, lex, q.question_type,
                               q.answer_type);
    auto ans = answer_by_id.find(q.question_id);
    if (ans == answer_by_id.end())
      throw IoError("split " + split + ": no answer for question_id " +
                    std::to_string(q.question_id));
    s.answer = ans->second->answer;

    auto sc = scene_by_id.find(q.question_id);
    if (sc == scene_by_id.end())
      throw IoError("split " + split + ": no scene for question_id " +
                    std::to_string(q.question_id));
    const auto& features = sc->second->features;
    if (features.empty()) throw IoError("empty scene for question_id " +
                                        std::to_string(q.question_id));
    int k = static_cast<int>(features.size());
    int dv = static_cast<int>(features[0].size());
    if (scene_objects == 0) {
      scene_objects = k;
      feature_dim = dv;
    } else if (k != scene_objects || dv != feature_dim) {
      throw IoError("inconsistent scene shape for question_id " +
                    std::to_string(q.question_id));
    }
    s.scene.reserve(static_cast<size_t>(k) * dv);
    for (const auto& row : features) {
      if (static_cast<int>(row.size()) != dv)
        throw IoError("ragged scene features for question_id " +
                      std::to_string(q.question_id));
      s.scene.insert(s.scene.end(), row.begin(), row.end());
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

const std::vector<Sample>& Dataset::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "test_id") return test_id;
  if (name == "test_ood") return test_ood;
  throw InvalidArgumentError("unknown split \"" + name + "\"");
}

Dataset load_dataset(const std::string& dir) {
  Dataset d;
  d.lexicon = QTypeLexicon::load(dir + "/lexicon.tsv");
  d.train = load_split(dir, "train", d.lexicon, d.scene_objects, d.feature_dim);
  d.test_id = load_split(dir, "test_id", d.lexicon, d.scene_objects, d.feature_dim);
  d.test_ood = load_split(dir, "test_ood", d.lexicon, d.scene_objects, d.feature_dim);
  return d;
}

Vocabulary build_vocabulary(const std::vector<Sample>& train) {
  Vocabulary v;
  for (const auto& s : train)
    for (const auto& tok : s.question.tokens) v.add(tok);
  return v;
}

std::vector<std::string> build_answer_vocab(const std::vector<Sample>& train) {
  std::vector<std::string> answers;
  std::unordered_map<std::string, int> seen;
  for (const auto& s : train) {
    if (seen.emplace(s.answer, 1).second) answers.push_back(s.answer);
  }
  return answers;
}

}  // namespace vqalab
