#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "errors.hpp"
#include "helpers.hpp"
#include "jsonl.hpp"
#include "synthgen.hpp"
#include "trainer.hpp"

using namespace vqalab;
using namespace vqalab::testing;

namespace {

Dataset small_dataset(uint64_t seed, int64_t n_train = 600, int64_t n_test = 200) {
  Config cfg = default_config();
  cfg.generator.seed = seed;
  cfg.generator.n_train = n_train;
  cfg.generator.n_test = n_test;
  return dataset_from_generated(generate(cfg.generator));
}

RunSpec quick_spec(int epochs, uint64_t seed = 42) {
  RunSpec spec;
  spec.model.embed_dim = 24;
  spec.model.hidden_dim = 32;
  spec.hyper.epochs = epochs;
  spec.hyper.batch_size = 32;
  spec.hyper.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("render_input keeps surviving tokens at their original positions") {
  auto lex = generator_lexicon();
  Vocabulary vocab;
  Question q = make_question(5, "what color is the flower?", lex);
  for (const auto& t : q.tokens) vocab.add(t);

  auto full = render_input(q, InputMode::Question, 8, vocab, 0);
  CHECK(full.ids[0] == vocab.lookup("what"));
  CHECK(full.ids[4] == vocab.lookup("flower"));
  CHECK(full.ids[5] == kPadId);
  CHECK(full.is_prefix[0]);
  CHECK(full.is_prefix[3]);       // "the" is part of "what color is the"
  CHECK_FALSE(full.is_prefix[4]); // "flower" is postfix

  auto pre = render_input(q, InputMode::Prefix, 8, vocab, 0);
  CHECK(pre.ids[0] == vocab.lookup("what"));
  CHECK(pre.ids[3] == vocab.lookup("the"));
  CHECK(pre.ids[4] == kPadId);  // postfix replaced by padding

  auto post = render_input(q, InputMode::Postfix, 8, vocab, 0);
  CHECK(post.ids[0] == kPadId);  // prefix replaced by padding
  CHECK(post.ids[3] == kPadId);
  CHECK(post.ids[4] == vocab.lookup("flower"));

  auto v1 = render_input(q, InputMode::Variant1, 8, vocab, 0);
  CHECK(v1.ids[0] == vocab.lookup("flower"));
  CHECK(v1.ids[1] == vocab.lookup("what"));
  CHECK_FALSE(v1.is_prefix[0]);
  CHECK(v1.is_prefix[1]);

  auto v3 = render_input(q, InputMode::Variant3, 8, vocab, 0);
  CHECK(v3.ids[0] == vocab.lookup("flower"));
  CHECK(v3.ids[4] == vocab.lookup("what"));

  auto v2a = render_input(q, InputMode::Variant2, 8, vocab, 7);
  auto v2b = render_input(q, InputMode::Variant2, 8, vocab, 7);
  CHECK(v2a.ids == v2b.ids);
  std::multiset<int> orig(full.ids.begin(), full.ids.end());
  std::multiset<int> shuf(v2a.ids.begin(), v2a.ids.end());
  CHECK(orig == shuf);
}

TEST_CASE("epochs=0 leaves the checkpoint at its initialization") {
  Dataset data = small_dataset(3, 200, 50);
  RunSpec spec = quick_spec(0);
  TrainResult result = train(data, spec);
  CHECK(result.epoch_losses.empty());

  ModelDims dims = result.model.params.dims;
  Rng rng(spec.hyper.seed);
  ModelParams fresh = ModelParams::init(dims, spec.model.init_scale,
                                        spec.model.position_init_scale, rng);
  CHECK(fresh.E == result.model.params.E);
  CHECK(fresh.W == result.model.params.W);
  CHECK(fresh.P == result.model.params.P);
}

TEST_CASE("training is deterministic: same run spec, same checkpoint bytes") {
  TempDir dir("det");
  Dataset data = small_dataset(5, 300, 60);
  RunSpec spec = quick_spec(2);
  TrainResult a = train(data, spec);
  TrainResult b = train(data, spec);
  CHECK(a.epoch_losses == b.epoch_losses);
  save_model(dir.file("a.bin"), a.model);
  save_model(dir.file("b.bin"), b.model);
  CHECK(read_file(dir.file("a.bin")) == read_file(dir.file("b.bin")));
}

TEST_CASE("loss log is finite and training reduces the loss") {
  Dataset data = small_dataset(7, 400, 80);
  RunSpec spec = quick_spec(6);
  TrainResult result = train(data, spec);
  REQUIRE(result.epoch_losses.size() == 6);
  for (double l : result.epoch_losses) CHECK(std::isfinite(l));
  CHECK(result.epoch_losses.back() < result.epoch_losses.front());
}

TEST_CASE("ensure_finite_loss rejects NaN and infinity") {
  CHECK_NOTHROW(ensure_finite_loss(1.25, 0));
  CHECK_THROWS_AS(ensure_finite_loss(std::nan(""), 3), TrainerError);
  CHECK_THROWS_AS(ensure_finite_loss(INFINITY, 1), TrainerError);
}

TEST_CASE("evaluation yields one record per sample and beats the majority baseline "
          "on its own training split") {
  Dataset data = small_dataset(11, 600, 100);
  RunSpec spec = quick_spec(10);
  TrainResult result = train(data, spec);

  EvalRequest req;
  req.perturb_seed = spec.hyper.seed;
  EvalOutputs out = evaluate(result.model, data.train, req);
  CHECK(out.records.size() == data.train.size());

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& s : data.train)
    pairs.emplace_back(s.question.qtype_phrase(data.lexicon), s.answer);
  double baseline = majority_accuracy(majority_answers(pairs), pairs);
  double model_acc = accuracy(out.records).all.percent();
  CHECK(model_acc > baseline);
}

TEST_CASE("identity eval input reproduces the question records exactly") {
  Dataset data = small_dataset(13, 200, 60);
  RunSpec spec = quick_spec(2);
  TrainResult result = train(data, spec);

  EvalRequest question{InputMode::Question, 42, false, false};
  EvalRequest identity{InputMode::Identity, 42, false, false};
  auto a = evaluate(result.model, data.test_id, question).records;
  auto b = evaluate(result.model, data.test_id, identity).records;
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].question_id == b[i].question_id);
    CHECK(a[i].pred == b[i].pred);
    CHECK(a[i].correct == b[i].correct);
  }
}

TEST_CASE("a prefix-trained run never touches postfix tokens") {
  Dataset data = small_dataset(17, 250, 50);

  // Token ids that only ever appear in a postfix.
  Vocabulary vocab = build_vocabulary(data.train);
  std::set<int> prefix_ids;
  for (const auto& s : data.train)
    for (size_t i = 0; i < s.question.prefix_len; ++i)
      prefix_ids.insert(vocab.lookup(s.question.tokens[i]));

  RunSpec spec = quick_spec(1);
  spec.train_input = InputMode::Prefix;
  std::vector<int> accessed;
  TrainHooks hooks;
  hooks.forward.token_access_log = &accessed;
  train(data, spec, &hooks);

  REQUIRE_FALSE(accessed.empty());
  for (int id : accessed) CHECK(prefix_ids.count(id) == 1);

  // Control: a postfix-trained run does reach tokens outside that set.
  spec.train_input = InputMode::Postfix;
  accessed.clear();
  train(data, spec, &hooks);
  bool outside = false;
  for (int id : accessed)
    if (!prefix_ids.count(id)) outside = true;
  CHECK(outside);
}

TEST_CASE("debias paths train and stay finite") {
  Dataset data = small_dataset(19, 300, 60);
  for (DebiasMethod method : {DebiasMethod::Mixing, DebiasMethod::Contrastive}) {
    RunSpec spec = quick_spec(2);
    spec.debias.method = method;
    TrainResult result = train(data, spec);
    for (double l : result.epoch_losses) CHECK(std::isfinite(l));
    EvalRequest req;
    req.perturb_seed = spec.hyper.seed;
    auto out = evaluate(result.model, data.test_id, req);
    CHECK(out.records.size() == data.test_id.size());
  }
  // Fused-level mixing is config-gated but must train too.
  RunSpec fused = quick_spec(2);
  fused.debias.method = DebiasMethod::Mixing;
  fused.debias.mix_level = "fused";
  TrainResult result = train(data, fused);
  CHECK(result.epoch_losses.size() == 2);
}

TEST_CASE("trained models round-trip through the checkpoint file") {
  TempDir dir("roundtrip");
  Dataset data = small_dataset(23, 200, 40);
  RunSpec spec = quick_spec(2);
  TrainResult result = train(data, spec);
  save_model(dir.file("m.bin"), result.model);
  TrainedModel loaded = load_model(dir.file("m.bin"));

  EvalRequest req;
  req.perturb_seed = spec.hyper.seed;
  auto a = evaluate(result.model, data.test_ood, req).records;
  auto b = evaluate(loaded, data.test_ood, req).records;
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].pred == b[i].pred);
}

TEST_CASE("attention and encoding dumps carry well-formed payloads") {
  Dataset data = small_dataset(29, 200, 50);
  RunSpec spec = quick_spec(2);
  TrainResult result = train(data, spec);

  EvalRequest req;
  req.perturb_seed = spec.hyper.seed;
  req.want_attention = true;
  req.want_encodings = true;
  EvalOutputs out = evaluate(result.model, data.test_id, req);
  REQUIRE(out.attention.size() == data.test_id.size());
  REQUIRE(out.encodings.size() == data.test_id.size());
  for (const auto& row : out.attention) {
    double sum = 0.0;
    for (double w : row.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(row.prefix_mass >= 0.0);
    CHECK(row.prefix_mass <= 1.0 + 1e-9);
    CHECK_FALSE(row.qtype.empty());
  }

  TempDir dir("dumps");
  save_attention(dir.file("att.jsonl"), out.attention);
  auto att = load_attention(dir.file("att.jsonl"));
  CHECK(att.size() == out.attention.size());
  CHECK(att[0].words == out.attention[0].words);
  save_encodings(dir.file("enc.jsonl"), out.encodings);
  auto enc = load_encodings(dir.file("enc.jsonl"));
  CHECK(enc.size() == out.encodings.size());
  CHECK(enc[0].q_enc == out.encodings[0].q_enc);
}
