#pragma once

#include <string>
#include <vector>

#include "jsonl.hpp"
#include "lexicon.hpp"
#include "question.hpp"

namespace vqalab {

struct Sample {
  Question question;
  std::vector<double> scene;  // K x D_v flattened, row-major; empty if absent
  std::string answer;
};

// A benchmark: the three splits plus the lexicon they were built with.
// Immutable after loading; safe for concurrent reads.
struct Dataset {
  QTypeLexicon lexicon;
  int scene_objects = 0;  // K
  int feature_dim = 0;    // D_v
  std::vector<Sample> train, test_id, test_ood;

  const std::vector<Sample>& split(const std::string& name) const;
};

// Expects questions_<split>.jsonl, scenes_<split>.jsonl,
// answers_<split>.jsonl and lexicon.tsv under `dir`.
Dataset load_dataset(const std::string& dir);

// Word table from the training split only (first-appearance order).
Vocabulary build_vocabulary(const std::vector<Sample>& train);

// Answer strings in first-appearance order over the training split.
std::vector<std::string> build_answer_vocab(const std::vector<Sample>& train);

}  // namespace vqalab
