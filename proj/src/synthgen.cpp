#include "synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "errors.hpp"
#include "rng.hpp"
#include "text.hpp"

namespace vqalab {
namespace {

struct Slot {
  int object = 0;
  int color = 0;
};

constexpr int kMaxCount = 5;
constexpr int kResampleCap = 1000;

int object_index(const std::string& name) {
  const auto& w = scene_world();
  auto it = std::find(w.objects.begin(), w.objects.end(), name);
  if (it == w.objects.end() && name.size() > 1 && name.back() == 's')
    it = std::find(w.objects.begin(), w.objects.end(), name.substr(0, name.size() - 1));
  if (it == w.objects.end())
    throw OracleError("unknown object \"" + name + "\"");
  return static_cast<int>(it - w.objects.begin());
}

int color_index(const std::string& name) {
  const auto& w = scene_world();
  auto it = std::find(w.colors.begin(), w.colors.end(), name);
  if (it == w.colors.end())
    throw OracleError("unknown color \"" + name + "\"");
  return static_cast<int>(it - w.colors.begin());
}

// Preferred attribute per class; rotated for the OOD split.
int preferred_color(int object, bool ood, int ood_shift, int n_colors) {
  int base = object % n_colors;
  if (!ood) return base;
  return ((base + ood_shift) % n_colors + n_colors) % n_colors;
}

int sample_color_for(int object, bool ood, const CooccurConfig& cc, int n_colors, Rng& rng) {
  double mass = ood ? cc.ood_mass : cc.train_mass;
  int pref = preferred_color(object, ood, cc.ood_shift, n_colors);
  if (rng.next_double() < mass) return pref;
  // Remaining mass spread over the other colors.
  int c = static_cast<int>(rng.next_below(static_cast<uint64_t>(n_colors - 1)));
  return c >= pref ? c + 1 : c;
}

std::vector<double> expand_marginal(const QuestionTemplate& tmpl,
                                    const std::vector<std::string>& support,
                                    const std::map<std::string, SkewSpec>& skews) {
  auto it = skews.find(tmpl.prefix);
  if (it == skews.end())
    return std::vector<double>(support.size(), 1.0 / static_cast<double>(support.size()));
  const SkewSpec& s = it->second;
  auto pos = std::find(support.begin(), support.end(), s.major);
  if (pos == support.end())
    throw GenerationError("skew for \"" + tmpl.prefix + "\": answer \"" + s.major +
                          "\" is not reachable for this question type");
  std::vector<double> dist(support.size(),
                           support.size() > 1
                               ? (1.0 - s.mass) / static_cast<double>(support.size() - 1)
                               : 0.0);
  dist[static_cast<size_t>(pos - support.begin())] = s.mass;
  return dist;
}

void check_skew_keys(const std::map<std::string, SkewSpec>& skews, const char* which) {
  for (const auto& [phrase, spec] : skews) {
    (void)spec;
    bool known = false;
    for (const auto& t : question_templates())
      if (t.prefix == phrase) { known = true; break; }
    if (!known)
      throw GenerationError(std::string(which) + " references unknown question type \"" +
                            phrase + "\"");
  }
}

int resample_until(Rng& rng, int n, int avoid) {
  for (int tries = 0; tries < kResampleCap; ++tries) {
    int v = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
    if (v != avoid) return v;
  }
  throw GenerationError("scene sampler cannot satisfy the requested constraint");
}

struct SampleDraw {
  Question question;
  std::vector<Slot> slots;
  std::string answer;
  AnswerType answer_type;
  std::string qtype;
};

SampleDraw draw_sample(int64_t qid, bool ood, const GeneratorConfig& cfg, Rng& rng) {
  const auto& world = scene_world();
  const auto& templates = question_templates();
  const int n_obj = static_cast<int>(world.objects.size());
  const int n_col = static_cast<int>(world.colors.size());
  const int K = cfg.scene_objects;

  const QuestionTemplate& tmpl = templates[rng.next_below(templates.size())];
  auto support = answer_support(tmpl, K);
  auto dist = expand_marginal(tmpl, support, ood ? cfg.ood_skew : cfg.prefix_skew);
  const std::string answer = support[rng.categorical(dist)];

  // Template slot values. For color questions the queried color IS the
  // answer; for the class-of-color template the queried color is free.
  int obj = static_cast<int>(rng.next_below(static_cast<uint64_t>(n_obj)));
  int col = static_cast<int>(rng.next_below(static_cast<uint64_t>(n_col)));
  if (tmpl.kind == TemplateKind::ColorOfObj) col = color_index(answer);

  // Background scene, attributes biased by the split's co-occurrence.
  std::vector<Slot> slots(K);
  for (auto& s : slots) {
    s.object = static_cast<int>(rng.next_below(static_cast<uint64_t>(n_obj)));
    s.color = sample_color_for(s.object, ood, cfg.cooccur, n_col, rng);
  }

  auto place = [&](int slot, int object, int color) {
    slots[slot].object = object;
    slots[slot].color = color;
  };

  switch (tmpl.kind) {
    case TemplateKind::ExistObj: {
      if (answer == "yes") {
        int j = static_cast<int>(rng.next_below(static_cast<uint64_t>(K)));
        place(j, obj, sample_color_for(obj, ood, cfg.cooccur, n_col, rng));
      } else {
        for (auto& s : slots)
          if (s.object == obj) {
            s.object = resample_until(rng, n_obj, obj);
            s.color = sample_color_for(s.object, ood, cfg.cooccur, n_col, rng);
          }
      }
      break;
    }
    case TemplateKind::ExistObjColor: {
      if (answer == "yes") {
        int j = static_cast<int>(rng.next_below(static_cast<uint64_t>(K)));
        place(j, obj, col);
      } else {
        for (auto& s : slots)
          if (s.object == obj && s.color == col) s.color = resample_until(rng, n_col, col);
      }
      break;
    }
    case TemplateKind::CountObj: {
      int want = std::stoi(answer);
      std::vector<int> order(K);
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (int k = 0; k < K; ++k) {
        Slot& s = slots[order[static_cast<size_t>(k)]];
        if (k < want) {
          s.object = obj;
          s.color = sample_color_for(obj, ood, cfg.cooccur, n_col, rng);
        } else if (s.object == obj) {
          s.object = resample_until(rng, n_obj, obj);
          s.color = sample_color_for(s.object, ood, cfg.cooccur, n_col, rng);
        }
      }
      break;
    }
    case TemplateKind::ColorOfObj: {
      // Exactly one slot of the queried class, carrying the answer color.
      int j = static_cast<int>(rng.next_below(static_cast<uint64_t>(K)));
      for (auto& s : slots)
        if (s.object == obj) {
          s.object = resample_until(rng, n_obj, obj);
          s.color = sample_color_for(s.object, ood, cfg.cooccur, n_col, rng);
        }
      place(j, obj, col);
      break;
    }
    case TemplateKind::ClassOfColor: {
      // Exactly one slot of the queried color; its class is the answer.
      int j = static_cast<int>(rng.next_below(static_cast<uint64_t>(K)));
      for (auto& s : slots)
        if (s.color == col) s.color = resample_until(rng, n_col, col);
      place(j, object_index(answer), col);
      break;
    }
  }

  SampleDraw out;
  out.slots = std::move(slots);
  out.answer = answer;
  out.answer_type = tmpl.answer_type;
  out.qtype = tmpl.prefix;

  out.question.id = qid;
  out.question.had_question_mark = true;
  out.question.tokens = tokenize(tmpl.prefix).tokens;
  out.question.prefix_len = out.question.tokens.size();
  out.question.answer_type = tmpl.answer_type;
  const auto& pattern =
      tmpl.postfix_options[rng.next_below(tmpl.postfix_options.size())];
  for (const auto& part : pattern) {
    if (part == "{obj}") out.question.tokens.push_back(world.objects[static_cast<size_t>(obj)]);
    else if (part == "{color}") out.question.tokens.push_back(world.colors[static_cast<size_t>(col)]);
    else out.question.tokens.push_back(part);
  }
  return out;
}

std::vector<double> slot_features(const std::vector<Slot>& slots, double noise, Rng& rng) {
  const auto& world = scene_world();
  const int n_obj = static_cast<int>(world.objects.size());
  const int dv = world.feature_dim();
  std::vector<double> out(slots.size() * static_cast<size_t>(dv), 0.0);
  for (size_t k = 0; k < slots.size(); ++k) {
    double* row = &out[k * static_cast<size_t>(dv)];
    row[slots[k].object] = 1.0;
    row[n_obj + slots[k].color] = 1.0;
    if (noise > 0.0) {
      // Quantized so the JSONL rendering stays compact.
      for (int i = 0; i < dv; ++i) {
        int steps = static_cast<int>(rng.next_below(2001)) - 1000;
        row[i] += noise * static_cast<double>(steps) / 1000.0;
      }
    }
  }
  return out;
}

GeneratedSplit build_split(int64_t base_id, int64_t count, bool ood,
                           const GeneratorConfig& cfg, const QTypeLexicon& lex) {
  GeneratedSplit split;
  const auto& world = scene_world();
  const int dv = world.feature_dim();
  split.questions.reserve(static_cast<size_t>(count));
  split.scenes.reserve(static_cast<size_t>(count));
  split.answers.reserve(static_cast<size_t>(count));
  for (int64_t i = 0; i < count; ++i) {
    int64_t qid = base_id + i;
    Rng rng = Rng::for_key(cfg.seed, static_cast<uint64_t>(qid));
    SampleDraw draw = draw_sample(qid, ood, cfg, rng);
    auto features = slot_features(draw.slots, cfg.noise, rng);

    // Every emitted sample must agree with the oracle.
    Question parsed = draw.question;
    decompose(parsed, lex);
    std::string oracle = answer_oracle(parsed, features, cfg.scene_objects, dv);
    if (oracle != draw.answer)
      throw InternalError("generator produced a scene inconsistent with its answer (qid " +
                          std::to_string(qid) + ": \"" + oracle + "\" vs \"" +
                          draw.answer + "\")");

    QuestionRow q;
    q.question_id = qid;
    q.question = render_surface(draw.question.tokens, true);
    q.question_type = draw.qtype;
    q.answer_type = answer_type_name(draw.answer_type);
    split.questions.push_back(std::move(q));

    SceneRow s;
    s.question_id = qid;
    s.features.resize(static_cast<size_t>(cfg.scene_objects));
    for (int k = 0; k < cfg.scene_objects; ++k)
      s.features[static_cast<size_t>(k)] = {features.begin() + static_cast<long>(k) * dv,
                                            features.begin() + static_cast<long>(k + 1) * dv};
    split.scenes.push_back(std::move(s));

    AnswerRow a;
    a.question_id = qid;
    a.answer = draw.answer;
    a.answer_type = answer_type_name(draw.answer_type);
    split.answers.push_back(std::move(a));
  }
  return split;
}

// Measured P(answer | qtype) for one split.
std::map<std::string, std::map<std::string, double>> measure_marginals(
    const GeneratedSplit& split) {
  std::map<std::string, std::map<std::string, int64_t>> counts;
  std::map<std::string, int64_t> totals;
  for (size_t i = 0; i < split.questions.size(); ++i) {
    const std::string& qtype = *split.questions[i].question_type;
    counts[qtype][split.answers[i].answer] += 1;
    totals[qtype] += 1;
  }
  std::map<std::string, std::map<std::string, double>> out;
  for (const auto& [qtype, per_answer] : counts)
    for (const auto& [answer, c] : per_answer)
      out[qtype][answer] = static_cast<double>(c) / static_cast<double>(totals[qtype]);
  return out;
}

void check_marginals(const GeneratedSplit& split, const GeneratorConfig& cfg, bool ood,
                     const char* which) {
  auto measured = measure_marginals(split);
  std::map<std::string, int64_t> totals;
  for (const auto& q : split.questions) totals[*q.question_type] += 1;

  const auto& skews = ood ? cfg.ood_skew : cfg.prefix_skew;
  for (const auto& tmpl : question_templates()) {
    auto support = answer_support(tmpl, cfg.scene_objects);
    auto target = expand_marginal(tmpl, support, skews);
    const auto& got = measured[tmpl.prefix];
    int64_t n = totals[tmpl.prefix];
    if (n == 0) continue;
    for (size_t i = 0; i < support.size(); ++i) {
      double emp = 0.0;
      auto it = got.find(support[i]);
      if (it != got.end()) emp = it->second;
      // 3 points at benchmark scale; for small runs the multinomial
      // deviation (4 sigma) governs instead.
      double sigma = std::sqrt(target[i] * (1.0 - target[i]) / static_cast<double>(n));
      double tolerance = std::max(0.03, 4.0 * sigma);
      if (std::abs(emp - target[i]) > tolerance)
        throw GenerationError(std::string(which) + " marginal for (\"" + tmpl.prefix +
                              "\", \"" + support[i] + "\") is " + std::to_string(emp) +
                              ", requested " + std::to_string(target[i]) +
                              " (drift exceeds tolerance)");
    }
  }
}

}  // namespace

const SceneWorld& scene_world() {
  static const SceneWorld world = [] {
    SceneWorld w;
    w.objects = {"flower", "dog",   "cat",   "shirt", "hat",   "car",
                 "tree",   "bird",  "horse", "chair", "table", "cup",
                 "bottle", "ball",  "book",  "shoe",  "clock", "lamp",
                 "phone",  "plate", "boat",  "plane", "truck", "bench",
                 "fence",  "sign",  "kite",  "bear",  "sheep", "cow"};
    w.colors = {"red", "blue", "green", "yellow", "black", "white", "brown", "orange"};
    w.misc_names = {"hat", "ball", "book", "cup", "shoe", "kite"};
    return w;
  }();
  return world;
}

const std::vector<QuestionTemplate>& question_templates() {
  // "is there a" and "there is a" share one bag of words and carry opposed
  // answer priors, so exploiting their priors takes word-order
  // information; the variable postfix length keeps the order cue from
  // collapsing into a fixed word-position pairing under variant-1.
  // Every type draws among postfix patterns of different lengths, so under
  // the variant renderings no content word sits at one fixed position;
  // in the intact question the prefix positions stay put.
  static const std::vector<QuestionTemplate> templates = {
      {"is there a", AnswerType::YesNo, TemplateKind::ExistObj,
       {{"{obj}", "here"}, {"over", "{obj}", "here"}, {"over", "out", "{obj}"}}},
      {"there is a", AnswerType::YesNo, TemplateKind::ExistObj,
       {{"{obj}", "here"}, {"over", "{obj}", "here"}, {"over", "out", "{obj}"}}},
      {"are there any", AnswerType::YesNo, TemplateKind::ExistObj,
       {{"{obj}", "around"}, {"over", "{obj}", "around"}, {"out", "over", "{obj}"}}},
      {"is the", AnswerType::YesNo, TemplateKind::ExistObjColor,
       {{"{obj}", "{color}"},
        {"little", "{obj}", "{color}"},
        {"little", "old", "{obj}", "{color}"}}},
      {"how many", AnswerType::Num, TemplateKind::CountObj,
       {{"{obj}"}, {"visible", "{obj}"}, {"out", "visible", "{obj}"}}},
      {"what number of", AnswerType::Num, TemplateKind::CountObj,
       {{"shown", "{obj}"}, {"{obj}", "shown"}, {"out", "shown", "{obj}"}}},
      {"what color is the", AnswerType::Other, TemplateKind::ColorOfObj,
       {{"{obj}"}, {"little", "{obj}"}, {"little", "old", "{obj}"}}},
      {"what is the", AnswerType::Other, TemplateKind::ClassOfColor,
       {{"{color}", "one"},
        {"little", "{color}", "one"},
        {"little", "old", "{color}", "one"}}},
  };
  return templates;
}

std::vector<std::string> answer_support(const QuestionTemplate& tmpl, int scene_objects) {
  const auto& world = scene_world();
  switch (tmpl.kind) {
    case TemplateKind::ExistObj:
    case TemplateKind::ExistObjColor:
      return {"yes", "no"};
    case TemplateKind::CountObj: {
      std::vector<std::string> out;
      for (int i = 0; i <= std::min(kMaxCount, scene_objects); ++i)
        out.push_back(std::to_string(i));
      return out;
    }
    case TemplateKind::ColorOfObj:
      return world.colors;
    case TemplateKind::ClassOfColor:
      return world.misc_names;
  }
  return {};
}

QTypeLexicon generator_lexicon() {
  std::vector<LexiconEntry> entries;
  for (const auto& t : question_templates()) {
    LexiconEntry e;
    e.tokens = tokenize(t.prefix).tokens;
    e.answer_type = t.answer_type;
    entries.push_back(std::move(e));
  }
  return QTypeLexicon(std::move(entries));
}

GeneratedData generate(const GeneratorConfig& cfg) {
  if (cfg.n_train <= 0)
    throw GenerationError("n_train must be positive, got " + std::to_string(cfg.n_train));
  if (cfg.n_test <= 0)
    throw GenerationError("n_test must be positive, got " + std::to_string(cfg.n_test));
  check_skew_keys(cfg.prefix_skew, "prefix_skew");
  check_skew_keys(cfg.ood_skew, "ood_skew");
  // Surface unreachable marginals before sampling anything.
  for (const auto& tmpl : question_templates()) {
    expand_marginal(tmpl, answer_support(tmpl, cfg.scene_objects), cfg.prefix_skew);
    expand_marginal(tmpl, answer_support(tmpl, cfg.scene_objects), cfg.ood_skew);
  }

  QTypeLexicon lex = generator_lexicon();
  GeneratedData data;
  data.train = build_split(0, cfg.n_train, false, cfg, lex);
  data.test_id = build_split(1000000, cfg.n_test, false, cfg, lex);
  data.test_ood = build_split(2000000, cfg.n_test, true, cfg, lex);

  check_marginals(data.train, cfg, false, "train");
  check_marginals(data.test_ood, cfg, true, "test_ood");

  data.stats = {{"train", measure_marginals(data.train)},
                {"test_id", measure_marginals(data.test_id)},
                {"test_ood", measure_marginals(data.test_ood)}};
  return data;
}

void save_generated(const GeneratedData& data, const GeneratorConfig& cfg,
                    const std::string& dir) {
  auto save_split = [&](const GeneratedSplit& s, const std::string& name) {
    save_questions(dir + "/questions_" + name + ".jsonl", s.questions);
    save_scenes(dir + "/scenes_" + name + ".jsonl", s.scenes);
    save_answers(dir + "/answers_" + name + ".jsonl", s.answers);
  };
  save_split(data.train, "train");
  save_split(data.test_id, "test_id");
  save_split(data.test_ood, "test_ood");
  generator_lexicon().save(dir + "/lexicon.tsv");
  nlohmann::json manifest = {
      {"seed", cfg.seed},
      {"n_train", cfg.n_train},
      {"n_test", cfg.n_test},
      {"scene_objects", cfg.scene_objects},
      {"feature_dim", scene_world().feature_dim()},
      {"marginals", data.stats},
  };
  atomic_write_file(dir + "/gen_manifest.json", manifest.dump(2) + "\n");
}

Dataset dataset_from_generated(const GeneratedData& data) {
  Dataset d;
  d.lexicon = generator_lexicon();
  d.scene_objects = static_cast<int>(data.train.scenes.front().features.size());
  d.feature_dim = static_cast<int>(data.train.scenes.front().features.front().size());

  auto convert = [&](const GeneratedSplit& s) {
    std::vector<Sample> out;
    out.reserve(s.questions.size());
    for (size_t i = 0; i < s.questions.size(); ++i) {
      Sample sample;
      sample.question = make_question(s.questions[i].question_id, s.questions[i].question,
                                      d.lexicon, s.questions[i].question_type,
                                      s.questions[i].answer_type);
      sample.answer = s.answers[i].answer;
      for (const auto& row : s.scenes[i].features)
        sample.scene.insert(sample.scene.end(), row.begin(), row.end());
      out.push_back(std::move(sample));
    }
    return out;
  };
  d.train = convert(data.train);
  d.test_id = convert(data.test_id);
  d.test_ood = convert(data.test_ood);
  return d;
}

std::string answer_oracle(const Question& q, const std::vector<double>& scene,
                          int scene_objects, int feature_dim) {
  const auto& world = scene_world();
  const int n_obj = static_cast<int>(world.objects.size());
  const int n_col = static_cast<int>(world.colors.size());
  if (feature_dim != world.feature_dim())
    throw OracleError("scene feature dimension does not match the generator world");
  if (static_cast<int>(scene.size()) != scene_objects * feature_dim)
    throw OracleError("scene block size does not match K x D_v");

  const QuestionTemplate* tmpl = nullptr;
  for (const auto& t : question_templates()) {
    auto prefix_tokens = tokenize(t.prefix).tokens;
    if (q.tokens.size() >= prefix_tokens.size() &&
        std::equal(prefix_tokens.begin(), prefix_tokens.end(), q.tokens.begin())) {
      if (!tmpl || prefix_tokens.size() > tokenize(tmpl->prefix).tokens.size()) tmpl = &t;
    }
  }
  if (!tmpl) throw OracleError("question matches no generator template: \"" +
                               render_surface(q.tokens, false) + "\"");
  auto prefix_len = tokenize(tmpl->prefix).tokens.size();
  std::vector<std::string> post(q.tokens.begin() + static_cast<long>(prefix_len),
                                q.tokens.end());
  if (post.empty()) throw OracleError("question lacks a postfix to ground");

  // Postfix patterns carry filler words, so the grounded words are found
  // by scanning rather than by a fixed offset.
  auto find_object = [&]() {
    for (const auto& tok : post) {
      auto it = std::find(world.objects.begin(), world.objects.end(), tok);
      if (it == world.objects.end() && tok.size() > 1 && tok.back() == 's')
        it = std::find(world.objects.begin(), world.objects.end(),
                       tok.substr(0, tok.size() - 1));
      if (it != world.objects.end()) return static_cast<int>(it - world.objects.begin());
    }
    throw OracleError("no object word in \"" + render_surface(q.tokens, false) + "\"");
  };
  auto find_color = [&]() {
    for (const auto& tok : post) {
      auto it = std::find(world.colors.begin(), world.colors.end(), tok);
      if (it != world.colors.end()) return static_cast<int>(it - world.colors.begin());
    }
    throw OracleError("no color word in \"" + render_surface(q.tokens, false) + "\"");
  };

  // Decode slots: argmax over the class block and the attribute block.
  std::vector<Slot> slots(static_cast<size_t>(scene_objects));
  for (int k = 0; k < scene_objects; ++k) {
    const double* row = &scene[static_cast<size_t>(k) * feature_dim];
    slots[static_cast<size_t>(k)].object =
        static_cast<int>(std::max_element(row, row + n_obj) - row);
    slots[static_cast<size_t>(k)].color =
        static_cast<int>(std::max_element(row + n_obj, row + n_obj + n_col) - (row + n_obj));
  }

  switch (tmpl->kind) {
    case TemplateKind::ExistObj: {
      int obj = find_object();
      for (const auto& s : slots)
        if (s.object == obj) return "yes";
      return "no";
    }
    case TemplateKind::ExistObjColor: {
      int obj = find_object();
      int col = find_color();
      for (const auto& s : slots)
        if (s.object == obj && s.color == col) return "yes";
      return "no";
    }
    case TemplateKind::CountObj: {
      int obj = find_object();
      int count = 0;
      for (const auto& s : slots)
        if (s.object == obj) ++count;
      return std::to_string(count);
    }
    case TemplateKind::ColorOfObj: {
      int obj = find_object();
      for (const auto& s : slots)
        if (s.object == obj) return world.colors[static_cast<size_t>(s.color)];
      throw OracleError("queried object is not in the scene: \"" +
                        render_surface(q.tokens, false) + "\"");
    }
    case TemplateKind::ClassOfColor: {
      int col = find_color();
      for (const auto& s : slots)
        if (s.color == col) return world.objects[static_cast<size_t>(s.object)];
      throw OracleError("queried color is not in the scene: \"" +
                        render_surface(q.tokens, false) + "\"");
    }
  }
  throw OracleError("unreachable template kind");
}

}  // namespace vqalab
