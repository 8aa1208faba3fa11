#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "question.hpp"

namespace vqalab {

enum class VariantKind { Identity = 0, Variant1 = 1, Variant2 = 2, Variant3 = 3 };

VariantKind variant_from_int(int k);
std::string variant_name(VariantKind k);

// Per-question deterministic stream: shuffles are independent across
// questions and reproducible for a fixed (seed, question_id).
struct PerturbSeed {
  uint64_t seed = 0;
  uint64_t stream(int64_t question_id) const {
    return mix_seed_pair(seed, static_cast<uint64_t>(question_id));
  }
  static uint64_t mix_seed_pair(uint64_t seed, uint64_t key);
};

// Swap prefix and postfix: postfix ++ prefix. Questions without a matched
// qtype pass through unchanged.
std::vector<std::string> variant1(const Question& q);

// Uniform Fisher-Yates permutation of all tokens from the per-question
// stream.
std::vector<std::string> variant2(const Question& q, const PerturbSeed& s);

// Reverse the token sequence.
std::vector<std::string> variant3(const Question& q);

std::vector<std::string> apply_variant(const Question& q, VariantKind kind,
                                       const PerturbSeed& s);

}  // namespace vqalab
