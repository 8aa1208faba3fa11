#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "config.hpp"
#include "errors.hpp"
#include "helpers.hpp"
#include "jsonl.hpp"
#include "toml.hpp"

using namespace vqalab;

TEST_CASE("toml parser covers the config subset") {
  const char* text = R"(
# comment
title = "run"   # trailing comment
count = 3
rate = 1e-3
neg = -4
flag = true
arr = [1, 2, 3]
nested = [[1, 2], [3]]
inline = { a = 1, b = "two" }

[table]
key = "value"
sub.dotted = 5

[table.child]
x = 1.5

[[cells]]
name = "a"

[[cells]]
name = "b"
eval = [ { split = "test_id", input = "question" } ]
)";
  auto j = parse_toml(text);
  CHECK(j["title"] == "run");
  CHECK(j["count"] == 3);
  CHECK(j["rate"].get<double>() == doctest::Approx(1e-3));
  CHECK(j["neg"] == -4);
  CHECK(j["flag"] == true);
  CHECK(j["arr"] == nlohmann::json({1, 2, 3}));
  CHECK(j["nested"][1][0] == 3);
  CHECK(j["inline"]["b"] == "two");
  CHECK(j["table"]["key"] == "value");
  CHECK(j["table"]["sub"]["dotted"] == 5);
  CHECK(j["table"]["child"]["x"].get<double>() == doctest::Approx(1.5));
  REQUIRE(j["cells"].size() == 2);
  CHECK(j["cells"][1]["eval"][0]["split"] == "test_id");
}

TEST_CASE("toml parser reports malformed input") {
  CHECK_THROWS_AS(parse_toml("key"), ParseError);
  CHECK_THROWS_AS(parse_toml("key = "), ParseError);
  CHECK_THROWS_AS(parse_toml("key = \"unterminated"), ParseError);
  CHECK_THROWS_AS(parse_toml("a = 1\na = 2"), ParseError);
  CHECK_THROWS_AS(parse_toml("[t\nk = 1"), ParseError);
  CHECK_THROWS_AS(parse_toml("x = 1 2"), ParseError);
  CHECK_THROWS_AS(parse_toml("x = [1, "), ParseError);
}

TEST_CASE("json fallback dispatches on extension") {
  vqalab::testing::TempDir dir("config_json");
  atomic_write_file(dir.file("cfg.json"), R"({"train": {"epochs": 3}})");
  auto j = parse_config_file(dir.file("cfg.json"));
  CHECK(j["train"]["epochs"] == 3);

  atomic_write_file(dir.file("cfg.toml"), "[train]\nepochs = 4\n");
  CHECK(parse_config_file(dir.file("cfg.toml"))["train"]["epochs"] == 4);
}

TEST_CASE("defaults hold when the patch is empty") {
  Config cfg = config_from_json(nlohmann::json::object());
  CHECK(cfg.model.embed_dim == 64);
  CHECK(cfg.model.hidden_dim == 128);
  CHECK(cfg.model.pad_length == 14);
  CHECK(cfg.train.epochs == 15);
  CHECK(cfg.train.batch_size == 128);
  CHECK(cfg.train.learning_rate == doctest::Approx(1e-3));
  CHECK(cfg.generator.n_train == 20000);
  CHECK(cfg.generator.prefix_skew.at("is there a").major == "yes");
  CHECK(cfg.debias.method == DebiasMethod::None);
  CHECK(cfg.debias.alpha == doctest::Approx(0.5));
  CHECK(cfg.debias.variant_kind == VariantKind::Variant1);
}

TEST_CASE("unknown keys and invalid values are config errors") {
  CHECK_THROWS_AS(config_from_json({{"trian", {}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"train", {{"epochs", -1}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"debias", {{"method", "nope"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"debias", {{"alpha", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(
      config_from_json({{"generator",
                         {{"prefix_skew", {{"is the", {{"major", "yes"}, {"mass", 2.0}}}}}}}}),
      ConfigError);
  CHECK_THROWS_AS(
      config_from_json({{"matrix", {{"cells", {{{"name", "a"}}, {{"name", "a"}}}}}}}),
      ConfigError);
}

TEST_CASE("cells inherit top-level debias settings") {
  nlohmann::json patch = {
      {"debias", {{"alpha", 0.25}}},
      {"matrix",
       {{"cells",
         {{{"name", "plain"}},
          {{"name", "mix"}, {"debias", {{"method", "mixing"}}}}}}}}};
  Config cfg = config_from_json(patch);
  REQUIRE(cfg.matrix.cells.size() == 2);
  CHECK(cfg.matrix.cells[0].debias.method == DebiasMethod::None);
  CHECK(cfg.matrix.cells[1].debias.method == DebiasMethod::Mixing);
  CHECK(cfg.matrix.cells[1].debias.alpha == doctest::Approx(0.25));
  // Default eval grid when none is declared.
  CHECK(cfg.matrix.cells[0].evals.size() == 2);
}

TEST_CASE("canonical dump round-trips through config_from_json") {
  nlohmann::json patch = {{"train", {{"epochs", 2}, {"seed", 7}}},
                          {"output_dir", "elsewhere"}};
  Config cfg = config_from_json(patch);
  nlohmann::json dumped = config_to_json(cfg);
  Config again = config_from_json(dumped);
  CHECK(config_to_json(again) == dumped);
  CHECK(config_hash_hex(cfg) == config_hash_hex(again));
}

TEST_CASE("json_set_path writes dotted keys") {
  nlohmann::json j = nlohmann::json::object();
  json_set_path(j, "train.seed", 43);
  json_set_path(j, "output_dir", "there");
  CHECK(j["train"]["seed"] == 43);
  CHECK(j["output_dir"] == "there");
  CHECK_THROWS_AS(json_set_path(j, "", 1), InvalidArgumentError);
}

TEST_CASE("the shipped recipe parses and resolves") {
  auto j = parse_config_file(std::string(VQALAB_SOURCE_DIR) + "/recipes/paperlike.toml");
  Config cfg = config_from_json(j);
  CHECK(cfg.matrix.cells.size() >= 8);
  bool has_mixing = false;
  for (const auto& c : cfg.matrix.cells)
    if (c.debias.method == DebiasMethod::Mixing) has_mixing = true;
  CHECK(has_mixing);
}
