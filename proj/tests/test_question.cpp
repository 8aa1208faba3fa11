#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "errors.hpp"
#include "helpers.hpp"
#include "question.hpp"
#include "text.hpp"

using namespace vqalab;
using vqalab::testing::tiny_lexicon;

TEST_CASE("tokenize lowercases, splits on punctuation and strips the question mark") {
  auto t = tokenize("Is this a cowboy hat?");
  CHECK(t.tokens == std::vector<std::string>{"is", "this", "a", "cowboy", "hat"});
  CHECK(t.had_question_mark);

  CHECK(tokenize("a").tokens == std::vector<std::string>{"a"});
  CHECK_FALSE(tokenize("a").had_question_mark);

  auto t2 = tokenize("What color is the shirt?");
  CHECK(t2.tokens == std::vector<std::string>{"what", "color", "is", "the", "shirt"});

  CHECK(tokenize("red, blue; green!").tokens ==
        std::vector<std::string>{"red", "blue", "green"});
}

TEST_CASE("tokenize rejects empty and whitespace-only text") {
  CHECK_THROWS_AS(tokenize(""), InvalidQuestionError);
  CHECK_THROWS_AS(tokenize("   \t "), InvalidQuestionError);
  CHECK_THROWS_AS(tokenize("?"), InvalidQuestionError);
}

TEST_CASE("decompose picks the longest matching lexicon entry") {
  auto lex = tiny_lexicon();

  Question q;
  q.tokens = {"what", "color", "is", "the", "flower"};
  decompose(q, lex);
  REQUIRE(q.qtype.has_value());
  CHECK(q.prefix() == std::vector<std::string>{"what", "color", "is"});
  CHECK(q.postfix() == std::vector<std::string>{"the", "flower"});
  CHECK(q.answer_type == AnswerType::Other);

  Question none;
  none.tokens = {"hello", "world"};
  decompose(none, lex);
  CHECK_FALSE(none.qtype.has_value());
  CHECK(none.prefix().empty());
  CHECK(none.postfix() == none.tokens);
}

TEST_CASE("longest match wins over every shorter matching entry") {
  auto lex = tiny_lexicon();  // contains both "is" and "is there"
  Question q;
  q.tokens = {"is", "there", "a", "dog"};
  decompose(q, lex);
  REQUIRE(q.qtype.has_value());
  CHECK(q.prefix() == std::vector<std::string>{"is", "there"});

  // Brute force: no entry longer than the returned one prefix-matches.
  size_t matched_len = lex.entry(*q.qtype).tokens.size();
  for (size_t i = 0; i < lex.size(); ++i) {
    const auto& et = lex.entry(i).tokens;
    if (et.size() <= matched_len || et.size() > q.tokens.size()) continue;
    CHECK_FALSE(std::equal(et.begin(), et.end(), q.tokens.begin()));
  }
}

TEST_CASE("decompose reconstructs the token stream for randomized questions") {
  auto lex = tiny_lexicon();
  Rng rng(7);
  const std::vector<std::string> words = {"is",  "there", "what", "color", "a",
                                          "dog", "many",  "how",  "red"};
  for (int it = 0; it < 200; ++it) {
    Question q;
    size_t n = 1 + rng.next_below(6);
    for (size_t i = 0; i < n; ++i)
      q.tokens.push_back(words[rng.next_below(words.size())]);
    decompose(q, lex);
    auto joined = q.prefix();
    auto post = q.postfix();
    joined.insert(joined.end(), post.begin(), post.end());
    CHECK(joined == q.tokens);
  }
}

TEST_CASE("declared question_type takes precedence when it matches") {
  auto lex = tiny_lexicon();
  // Longest match would say "is there"; the annotation says "is".
  Question q = make_question(1, "is there a dog?", lex, std::string("is"), std::nullopt);
  REQUIRE(q.qtype.has_value());
  CHECK(q.prefix() == std::vector<std::string>{"is"});
  // A declared type that does not prefix-match falls back to longest match.
  Question q2 = make_question(2, "is there a dog?", lex, std::string("how many"),
                              std::nullopt);
  CHECK(q2.prefix() == std::vector<std::string>{"is", "there"});
}

TEST_CASE("pad renders fixed-length ids with pad and unk handling") {
  Vocabulary vocab;
  int is_id = vocab.add("is");
  int this_id = vocab.add("this");

  auto ids = pad({"is", "this"}, 4, vocab);
  CHECK(ids == std::vector<int>{is_id, this_id, kPadId, kPadId});

  std::vector<std::string> twenty(20, "is");
  CHECK(pad(twenty, 14, vocab).size() == 14);
  CHECK(pad(twenty, 14, vocab) == std::vector<int>(14, is_id));

  CHECK(pad({}, 3, vocab) == std::vector<int>{kPadId, kPadId, kPadId});
  CHECK(pad({"never-seen"}, 2, vocab) == std::vector<int>{kUnkId, kPadId});
}

TEST_CASE("pad always returns length L and is stable on length-L input") {
  Vocabulary vocab;
  for (const char* w : {"a", "b", "c", "d"}) vocab.add(w);
  Rng rng(3);
  const std::vector<std::string> words = {"a", "b", "c", "d", "zzz"};
  for (int it = 0; it < 100; ++it) {
    size_t L = 1 + rng.next_below(10);
    std::vector<std::string> tokens;
    size_t n = rng.next_below(12);
    for (size_t i = 0; i < n; ++i) tokens.push_back(words[rng.next_below(words.size())]);
    auto ids = pad(tokens, L, vocab);
    CHECK(ids.size() == L);
    if (tokens.size() == L) {
      // Re-padding the surfaces of a full-length sequence changes nothing.
      std::vector<std::string> surfaces;
      for (int id : ids) surfaces.push_back(vocab.surface(id));
      CHECK(pad(surfaces, L, vocab) == ids);
    }
  }
  CHECK_THROWS_AS(pad({"a"}, 0, vocab), InvalidArgumentError);
}

TEST_CASE("vocabulary reserves pad and unk ids") {
  Vocabulary vocab;
  CHECK(vocab.size() == 2);
  CHECK(vocab.surface(kPadId) == kPadSurface);
  CHECK(vocab.lookup("nope") == kUnkId);
  int id = vocab.add("word");
  CHECK(id == 2);
  CHECK(vocab.add("word") == id);
}

TEST_CASE("lexicon rejects duplicates and empty entries") {
  std::vector<LexiconEntry> entries(2);
  entries[0].tokens = {"is"};
  entries[1].tokens = {"is"};
  CHECK_THROWS_AS(QTypeLexicon(std::move(entries)), InvalidArgumentError);

  std::vector<LexiconEntry> empty_entry(1);
  CHECK_THROWS_AS(QTypeLexicon(std::move(empty_entry)), InvalidArgumentError);
}

TEST_CASE("lexicon round-trips through its file format") {
  vqalab::testing::TempDir dir("lexicon");
  auto lex = tiny_lexicon();
  lex.save(dir.file("lex.tsv"));
  auto loaded = QTypeLexicon::load(dir.file("lex.tsv"));
  REQUIRE(loaded.size() == lex.size());
  for (size_t i = 0; i < lex.size(); ++i) {
    CHECK(loaded.entry(i).phrase() == lex.entry(i).phrase());
    CHECK(loaded.entry(i).answer_type == lex.entry(i).answer_type);
  }
}
