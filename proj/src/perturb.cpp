#include "perturb.hpp"

#include <algorithm>

#include "errors.hpp"
#include "rng.hpp"

namespace vqalab {

VariantKind variant_from_int(int k) {
  switch (k) {
    case 0: return VariantKind::Identity;
    case 1: return VariantKind::Variant1;
    case 2: return VariantKind::Variant2;
    case 3: return VariantKind::Variant3;
  }
  throw InvalidArgumentError("variant must be 1, 2 or 3 (0 = identity), got " +
                             std::to_string(k));
}

std::string variant_name(VariantKind k) {
  switch (k) {
    case VariantKind::Identity: return "identity";
    case VariantKind::Variant1: return "variant1";
    case VariantKind::Variant2: return "variant2";
    case VariantKind::Variant3: return "variant3";
  }
  return "identity";
}

uint64_t PerturbSeed::mix_seed_pair(uint64_t seed, uint64_t key) {
  return mix_seed(seed, key);
}

std::vector<std::string> variant1(const Question& q) {
  if (!q.qtype) return q.tokens;
  auto out = q.postfix();
  auto pre = q.prefix();
  out.insert(out.end(), pre.begin(), pre.end());
  return out;
}

std::vector<std::string> variant2(const Question& q, const PerturbSeed& s) {
  auto out = q.tokens;
  Rng rng(s.stream(q.id));
  rng.shuffle(out);
  return out;
}

std::vector<std::string> variant3(const Question& q) {
  auto out = q.tokens;
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::string> apply_variant(const Question& q, VariantKind kind,
                                       const PerturbSeed& s) {
  switch (kind) {
    case VariantKind::Identity: return q.tokens;
    case VariantKind::Variant1: return variant1(q);
    case VariantKind::Variant2: return variant2(q, s);
    case VariantKind::Variant3: return variant3(q);
  }
  return q.tokens;
}

}  // namespace vqalab
