#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"
#include "jsonl.hpp"

namespace vqalab {

// Scene vocabulary of the generator: object classes, attribute colors and
// the question templates built over them.
struct SceneWorld {
  std::vector<std::string> objects;     // 30 classes
  std::vector<std::string> colors;      // 8 attributes
  std::vector<std::string> misc_names;  // answer support of "what is the"
  int feature_dim() const { return static_cast<int>(objects.size() + colors.size()); }
};

const SceneWorld& scene_world();

enum class TemplateKind { ExistObj, ExistObjColor, CountObj, ColorOfObj, ClassOfColor };

struct QuestionTemplate {
  std::string prefix;  // question-type phrase
  AnswerType answer_type;
  TemplateKind kind;
  // One or more postfix patterns of "{obj}" / "{color}" / filler words;
  // each sample draws one. Multiple options give a question type a
  // variable surface length.
  std::vector<std::vector<std::string>> postfix_options;
};

const std::vector<QuestionTemplate>& question_templates();

// Answer support of one template under a scene of K objects.
std::vector<std::string> answer_support(const QuestionTemplate& tmpl, int scene_objects);

// The generator's own question-type lexicon.
QTypeLexicon generator_lexicon();

struct GeneratedSplit {
  std::vector<QuestionRow> questions;
  std::vector<SceneRow> scenes;
  std::vector<AnswerRow> answers;
};

struct GeneratedData {
  GeneratedSplit train, test_id, test_ood;
  nlohmann::json stats;  // measured per-qtype answer marginals
};

// Produces the three splits with the configured priors. Ground truth is
// scene-consistent by construction and re-checked through answer_oracle.
// Throws GenerationError on degenerate sizes, unreachable marginals or
// when the measured train marginals drift more than 3 points from the
// request.
GeneratedData generate(const GeneratorConfig& cfg);

// Writes questions/scenes/answers per split plus lexicon.tsv and
// gen_manifest.json into `dir`.
void save_generated(const GeneratedData& data, const GeneratorConfig& cfg,
                    const std::string& dir);

// In-memory view over generated data, bypassing the JSONL round trip.
Dataset dataset_from_generated(const GeneratedData& data);

// Ground truth from the scene contents (existence / count / attribute
// lookup). Throws OracleError when the question does not match a template
// or references unknown scene vocabulary.
std::string answer_oracle(const Question& q, const std::vector<double>& scene,
                          int scene_objects, int feature_dim);

}  // namespace vqalab
