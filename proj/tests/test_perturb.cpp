#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "errors.hpp"
#include "helpers.hpp"
#include "perturb.hpp"
#include "text.hpp"

using namespace vqalab;
using vqalab::testing::tiny_lexicon;

namespace {

Question make_q(int64_t id, const std::string& text) {
  auto lex = tiny_lexicon();
  return make_question(id, text, lex);
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("variant1 swaps prefix and postfix") {
  Question q = make_q(1, "what color is the flower?");
  CHECK(render_surface(variant1(q), true) == "the flower what color is?");

  // Empty postfix leaves the prefix in place.
  Question p = make_q(2, "is there?");
  CHECK(variant1(p) == std::vector<std::string>{"is", "there"});

  // No matched qtype passes through unchanged.
  Question none = make_q(3, "hello world?");
  CHECK(variant1(none) == none.tokens);
}

TEST_CASE("variant1 applied twice restores the original order") {
  Question q = make_q(4, "what color is the flower?");
  auto once = variant1(q);
  // Re-swapping without re-running decomposition: the prefix of the
  // variant is its last prefix_len tokens.
  Question v;
  v.id = q.id;
  v.tokens = once;
  v.prefix_len = once.size() - q.prefix_len;
  v.qtype = q.qtype;
  CHECK(variant1(v) == q.tokens);
}

TEST_CASE("variant2 is a seeded uniform permutation") {
  Question q = make_q(10, "what color is the flower?");
  PerturbSeed s{99};
  auto a = variant2(q, s);
  auto b = variant2(q, s);
  CHECK(a == b);  // same (seed, question_id) => same permutation
  CHECK(sorted(a) == sorted(q.tokens));  // token multiset preserved

  Question single = make_q(11, "hat?");
  CHECK(variant2(single, s) == single.tokens);
}

TEST_CASE("variant2 streams are independent per question") {
  PerturbSeed s{123};
  Question a = make_q(20, "what color is the flower?");
  Question b = make_q(21, "what color is the flower?");
  // Streams keyed by question_id may and here do differ.
  CHECK(variant2(a, s) != variant2(b, s));
}

TEST_CASE("variant2 produces at least two distinct permutations across seeds") {
  Question q = make_q(30, "what color is the flower?");
  std::set<std::vector<std::string>> seen;
  for (uint64_t seed = 0; seed < 12; ++seed) seen.insert(variant2(q, PerturbSeed{seed}));
  CHECK(seen.size() >= 2);
}

TEST_CASE("variant3 reverses the tokens") {
  Question q = make_q(40, "what color is the flower?");
  CHECK(render_surface(variant3(q), true) == "flower the is color what?");

  Question pal = make_q(41, "is a is?");
  CHECK(variant3(pal) == pal.tokens);

  Question any = make_q(42, "is there a dog?");
  Question rev;
  rev.tokens = variant3(any);
  rev.id = any.id;
  CHECK(variant3(rev) == any.tokens);
}

TEST_CASE("all variants preserve the token multiset") {
  Rng rng(5);
  const std::vector<std::string> words = {"is", "there", "a", "dog", "red", "what",
                                          "color"};
  PerturbSeed s{7};
  auto lex = tiny_lexicon();
  for (int it = 0; it < 100; ++it) {
    Question q;
    q.id = it;
    size_t n = 1 + rng.next_below(7);
    for (size_t i = 0; i < n; ++i) q.tokens.push_back(words[rng.next_below(words.size())]);
    decompose(q, lex);
    for (VariantKind kind : {VariantKind::Variant1, VariantKind::Variant2,
                             VariantKind::Variant3}) {
      auto out = apply_variant(q, kind, s);
      CHECK(sorted(out) == sorted(q.tokens));
    }
  }
}

TEST_CASE("a dataset transformed twice with the same seed is identical") {
  auto lex = tiny_lexicon();
  Rng rng(17);
  std::vector<Question> questions;
  for (int i = 0; i < 50; ++i)
    questions.push_back(make_q(1000 + i, "what color is the flower?"));

  for (VariantKind kind : {VariantKind::Variant1, VariantKind::Variant2,
                           VariantKind::Variant3}) {
    std::vector<std::vector<std::string>> first, second;
    for (const auto& q : questions) first.push_back(apply_variant(q, kind, PerturbSeed{5}));
    for (const auto& q : questions) second.push_back(apply_variant(q, kind, PerturbSeed{5}));
    CHECK(first == second);
  }
}

TEST_CASE("variant_from_int validates its range") {
  CHECK(variant_from_int(1) == VariantKind::Variant1);
  CHECK(variant_from_int(0) == VariantKind::Identity);
  CHECK_THROWS_AS(variant_from_int(4), InvalidArgumentError);
}
