#include "config.hpp"

#include <set>

#include "errors.hpp"

namespace vqalab {
namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
  }
}

double get_num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
  return obj[key].get<double>();
}

int64_t get_int(const json& obj, const char* key, int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
  return obj[key].get<int64_t>();
}

std::string get_str(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError(std::string(key) + " must be a string");
  return obj[key].get<std::string>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(std::string(key) + " must be a boolean");
  return obj[key].get<bool>();
}

std::map<std::string, SkewSpec> parse_skews(const json& obj, const std::string& where) {
  std::map<std::string, SkewSpec> out;
  if (!obj.is_object()) throw ConfigError(where + " must be a table");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const json& v = it.value();
    require_keys(v, {"major", "mass"}, where + "." + it.key());
    SkewSpec s;
    s.major = get_str(v, "major", "");
    s.mass = get_num(v, "mass", -1.0);
    if (s.major.empty()) throw ConfigError(where + "." + it.key() + " lacks a major answer");
    if (s.mass < 0.0 || s.mass > 1.0)
      throw ConfigError(where + "." + it.key() + " mass must lie in [0,1]");
    out[it.key()] = s;
  }
  return out;
}

json skews_to_json(const std::map<std::string, SkewSpec>& skews) {
  json out = json::object();
  for (const auto& [k, v] : skews) out[k] = {{"major", v.major}, {"mass", v.mass}};
  return out;
}

DebiasConfig parse_debias(const json& obj, const DebiasConfig& base, const std::string& where) {
  require_keys(obj, {"method", "lambda", "alpha", "variant_kind", "mix_level",
                     "reshuffle_per_epoch"},
               where);
  DebiasConfig d = base;
  if (obj.contains("method")) d.method = debias_method_from_name(obj["method"].get<std::string>());
  d.lambda = get_num(obj, "lambda", d.lambda);
  d.alpha = get_num(obj, "alpha", d.alpha);
  if (obj.contains("variant_kind")) {
    const std::string v = obj["variant_kind"].get<std::string>();
    if (v == "variant1") d.variant_kind = VariantKind::Variant1;
    else if (v == "variant2") d.variant_kind = VariantKind::Variant2;
    else if (v == "variant3") d.variant_kind = VariantKind::Variant3;
    else throw ConfigError(where + ".variant_kind must be variant1|variant2|variant3");
  }
  d.mix_level = get_str(obj, "mix_level", d.mix_level);
  if (d.mix_level != "question" && d.mix_level != "fused")
    throw ConfigError(where + ".mix_level must be \"question\" or \"fused\"");
  d.reshuffle_per_epoch = get_bool(obj, "reshuffle_per_epoch", d.reshuffle_per_epoch);
  if (d.lambda < 0.0) throw ConfigError(where + ".lambda must be >= 0");
  if (d.alpha < 0.0 || d.alpha > 1.0) throw ConfigError(where + ".alpha must lie in [0,1]");
  return d;
}

json debias_to_json(const DebiasConfig& d) {
  return {{"method", debias_method_name(d.method)},
          {"lambda", d.lambda},
          {"alpha", d.alpha},
          {"variant_kind", variant_name(d.variant_kind)},
          {"mix_level", d.mix_level},
          {"reshuffle_per_epoch", d.reshuffle_per_epoch}};
}

}  // namespace

std::string model_mode_name(ModelMode m) {
  return m == ModelMode::Full ? "full" : "q_only";
}

ModelMode model_mode_from_name(const std::string& name) {
  if (name == "full") return ModelMode::Full;
  if (name == "q_only" || name == "qonly") return ModelMode::QOnly;
  throw ConfigError("model_mode must be \"full\" or \"q_only\", got \"" + name + "\"");
}

std::string input_mode_name(InputMode m) {
  switch (m) {
    case InputMode::Question: return "question";
    case InputMode::Prefix: return "prefix";
    case InputMode::Postfix: return "postfix";
    case InputMode::Variant1: return "variant1";
    case InputMode::Variant2: return "variant2";
    case InputMode::Variant3: return "variant3";
    case InputMode::Identity: return "identity";
  }
  return "question";
}

InputMode input_mode_from_name(const std::string& name) {
  if (name == "question") return InputMode::Question;
  if (name == "prefix") return InputMode::Prefix;
  if (name == "postfix") return InputMode::Postfix;
  if (name == "variant1") return InputMode::Variant1;
  if (name == "variant2") return InputMode::Variant2;
  if (name == "variant3") return InputMode::Variant3;
  if (name == "identity") return InputMode::Identity;
  throw ConfigError("unknown input mode \"" + name + "\"");
}

std::string debias_method_name(DebiasMethod m) {
  switch (m) {
    case DebiasMethod::None: return "none";
    case DebiasMethod::Contrastive: return "contrastive";
    case DebiasMethod::Mixing: return "mixing";
  }
  return "none";
}

DebiasMethod debias_method_from_name(const std::string& name) {
  if (name == "none") return DebiasMethod::None;
  if (name == "contrastive") return DebiasMethod::Contrastive;
  if (name == "mixing") return DebiasMethod::Mixing;
  throw ConfigError("debias.method must be none|contrastive|mixing, got \"" + name + "\"");
}

Config default_config() {
  Config cfg;
  // "is there a" and "there is a" share a word bag but carry opposed
  // priors, so their train-split regularities are only reachable through
  // word order. All priors shift in the OOD split.
  cfg.generator.prefix_skew = {
      {"is there a", {"yes", 0.85}},
      {"there is a", {"no", 0.85}},
      {"are there any", {"yes", 0.80}},
      {"is the", {"yes", 0.75}},
      {"how many", {"2", 0.75}},
      {"what number of", {"1", 0.75}},
      {"what color is the", {"red", 0.75}},
      {"what is the", {"ball", 0.75}},
  };
  cfg.generator.ood_skew = {
      {"is there a", {"no", 0.80}},
      {"there is a", {"yes", 0.80}},
      {"are there any", {"no", 0.75}},
      {"is the", {"no", 0.80}},
      {"how many", {"4", 0.60}},
      {"what number of", {"3", 0.60}},
      {"what color is the", {"blue", 0.60}},
      {"what is the", {"book", 0.60}},
  };
  return cfg;
}

Config config_from_json(const nlohmann::json& patch) {
  if (!patch.is_object()) throw ConfigError("config root must be a table");
  require_keys(patch, {"generator", "model", "train", "debias", "matrix", "report",
                       "output_dir"},
               "config");
  Config cfg = default_config();

  if (patch.contains("generator")) {
    const json& g = patch["generator"];
    require_keys(g, {"seed", "n_train", "n_test", "scene_objects", "noise",
                     "prefix_skew", "ood_skew", "cooccur"},
                 "generator");
    cfg.generator.seed = static_cast<uint64_t>(get_int(g, "seed", static_cast<int64_t>(cfg.generator.seed)));
    cfg.generator.n_train = get_int(g, "n_train", cfg.generator.n_train);
    cfg.generator.n_test = get_int(g, "n_test", cfg.generator.n_test);
    cfg.generator.scene_objects = static_cast<int>(get_int(g, "scene_objects", cfg.generator.scene_objects));
    cfg.generator.noise = get_num(g, "noise", cfg.generator.noise);
    if (cfg.generator.noise < 0.0 || cfg.generator.noise >= 0.1)
      throw ConfigError("generator.noise must lie in [0, 0.1)");
    if (cfg.generator.scene_objects < 1)
      throw ConfigError("generator.scene_objects must be >= 1");
    if (g.contains("prefix_skew"))
      cfg.generator.prefix_skew = parse_skews(g["prefix_skew"], "generator.prefix_skew");
    if (g.contains("ood_skew"))
      cfg.generator.ood_skew = parse_skews(g["ood_skew"], "generator.ood_skew");
    if (g.contains("cooccur")) {
      const json& c = g["cooccur"];
      require_keys(c, {"train_mass", "ood_mass", "ood_shift"}, "generator.cooccur");
      cfg.generator.cooccur.train_mass = get_num(c, "train_mass", cfg.generator.cooccur.train_mass);
      cfg.generator.cooccur.ood_mass = get_num(c, "ood_mass", cfg.generator.cooccur.ood_mass);
      cfg.generator.cooccur.ood_shift = static_cast<int>(get_int(c, "ood_shift", cfg.generator.cooccur.ood_shift));
      for (double m : {cfg.generator.cooccur.train_mass, cfg.generator.cooccur.ood_mass})
        if (m < 0.0 || m > 1.0) throw ConfigError("cooccur masses must lie in [0,1]");
    }
  }

  if (patch.contains("model")) {
    const json& m = patch["model"];
    require_keys(m, {"embed_dim", "hidden_dim", "pad_length", "init_scale",
                     "position_init_scale"},
                 "model");
    cfg.model.embed_dim = static_cast<int>(get_int(m, "embed_dim", cfg.model.embed_dim));
    cfg.model.hidden_dim = static_cast<int>(get_int(m, "hidden_dim", cfg.model.hidden_dim));
    cfg.model.pad_length = static_cast<int>(get_int(m, "pad_length", cfg.model.pad_length));
    cfg.model.init_scale = get_num(m, "init_scale", cfg.model.init_scale);
    cfg.model.position_init_scale =
        get_num(m, "position_init_scale", cfg.model.position_init_scale);
    if (cfg.model.embed_dim < 1 || cfg.model.hidden_dim < 1 || cfg.model.pad_length < 1)
      throw ConfigError("model dimensions must be >= 1");
    if (cfg.model.init_scale <= 0.0) throw ConfigError("model.init_scale must be > 0");
    if (cfg.model.position_init_scale <= 0.0)
      throw ConfigError("model.position_init_scale must be > 0");
  }

  if (patch.contains("train")) {
    const json& t = patch["train"];
    require_keys(t, {"epochs", "batch_size", "learning_rate", "adam_beta1", "adam_beta2",
                     "adam_eps", "seed"},
                 "train");
    cfg.train.epochs = static_cast<int>(get_int(t, "epochs", cfg.train.epochs));
    cfg.train.batch_size = static_cast<int>(get_int(t, "batch_size", cfg.train.batch_size));
    cfg.train.learning_rate = get_num(t, "learning_rate", cfg.train.learning_rate);
    cfg.train.adam_beta1 = get_num(t, "adam_beta1", cfg.train.adam_beta1);
    cfg.train.adam_beta2 = get_num(t, "adam_beta2", cfg.train.adam_beta2);
    cfg.train.adam_eps = get_num(t, "adam_eps", cfg.train.adam_eps);
    cfg.train.seed = static_cast<uint64_t>(get_int(t, "seed", static_cast<int64_t>(cfg.train.seed)));
    if (cfg.train.epochs < 0) throw ConfigError("train.epochs must be >= 0");
    if (cfg.train.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (cfg.train.learning_rate <= 0.0) throw ConfigError("train.learning_rate must be > 0");
  }

  if (patch.contains("debias"))
    cfg.debias = parse_debias(patch["debias"], cfg.debias, "debias");

  if (patch.contains("matrix")) {
    const json& m = patch["matrix"];
    require_keys(m, {"cells", "jobs"}, "matrix");
    cfg.matrix.jobs = static_cast<int>(get_int(m, "jobs", cfg.matrix.jobs));
    if (cfg.matrix.jobs < 1) throw ConfigError("matrix.jobs must be >= 1");
    if (m.contains("cells")) {
      if (!m["cells"].is_array()) throw ConfigError("matrix.cells must be an array");
      std::set<std::string> names;
      for (const json& c : m["cells"]) {
        require_keys(c, {"name", "train_input", "model_mode", "debias", "epochs", "seed",
                         "eval"},
                     "matrix.cells[]");
        CellConfig cell;
        cell.name = get_str(c, "name", "");
        if (cell.name.empty()) throw ConfigError("every matrix cell needs a name");
        if (!names.insert(cell.name).second)
          throw ConfigError("duplicate cell name \"" + cell.name + "\"");
        cell.train_input = input_mode_from_name(get_str(c, "train_input", "question"));
        cell.model_mode = model_mode_from_name(get_str(c, "model_mode", "full"));
        cell.debias = c.contains("debias")
                          ? parse_debias(c["debias"], cfg.debias, "cell " + cell.name)
                          : cfg.debias;
        if (c.contains("epochs")) cell.epochs = static_cast<int>(c["epochs"].get<int64_t>());
        if (c.contains("seed")) cell.seed = c["seed"].get<uint64_t>();
        if (c.contains("eval")) {
          if (!c["eval"].is_array()) throw ConfigError("cell eval must be an array");
          for (const json& e : c["eval"]) {
            require_keys(e, {"split", "input", "attention", "encodings"}, "cell eval");
            EvalSpec spec;
            spec.split = get_str(e, "split", spec.split);
            if (spec.split != "train" && spec.split != "test_id" && spec.split != "test_ood")
              throw ConfigError("eval split must be train|test_id|test_ood");
            spec.input = input_mode_from_name(get_str(e, "input", "question"));
            spec.attention = get_bool(e, "attention", false);
            spec.encodings = get_bool(e, "encodings", false);
            cell.evals.push_back(spec);
          }
        } else {
          cell.evals = {{"test_id", InputMode::Question, false, false},
                        {"test_ood", InputMode::Question, false, false}};
        }
        cfg.matrix.cells.push_back(std::move(cell));
      }
    }
  }

  if (patch.contains("report")) {
    const json& r = patch["report"];
    require_keys(r, {"top_k", "attention_examples"}, "report");
    cfg.report.top_k = static_cast<int>(get_int(r, "top_k", cfg.report.top_k));
    cfg.report.attention_examples =
        static_cast<int>(get_int(r, "attention_examples", cfg.report.attention_examples));
    if (cfg.report.top_k < 1) throw ConfigError("report.top_k must be >= 1");
  }

  cfg.output_dir = get_str(patch, "output_dir", cfg.output_dir);
  return cfg;
}

nlohmann::json config_to_json(const Config& cfg) {
  json cells = json::array();
  for (const auto& c : cfg.matrix.cells) {
    json evals = json::array();
    for (const auto& e : c.evals)
      evals.push_back({{"split", e.split},
                       {"input", input_mode_name(e.input)},
                       {"attention", e.attention},
                       {"encodings", e.encodings}});
    json cell = {{"name", c.name},
                 {"train_input", input_mode_name(c.train_input)},
                 {"model_mode", model_mode_name(c.model_mode)},
                 {"debias", debias_to_json(c.debias)},
                 {"eval", evals}};
    if (c.epochs) cell["epochs"] = *c.epochs;
    if (c.seed) cell["seed"] = *c.seed;
    cells.push_back(cell);
  }
  return {
      {"generator",
       {{"seed", cfg.generator.seed},
        {"n_train", cfg.generator.n_train},
        {"n_test", cfg.generator.n_test},
        {"scene_objects", cfg.generator.scene_objects},
        {"noise", cfg.generator.noise},
        {"prefix_skew", skews_to_json(cfg.generator.prefix_skew)},
        {"ood_skew", skews_to_json(cfg.generator.ood_skew)},
        {"cooccur",
         {{"train_mass", cfg.generator.cooccur.train_mass},
          {"ood_mass", cfg.generator.cooccur.ood_mass},
          {"ood_shift", cfg.generator.cooccur.ood_shift}}}}},
      {"model",
       {{"embed_dim", cfg.model.embed_dim},
        {"hidden_dim", cfg.model.hidden_dim},
        {"pad_length", cfg.model.pad_length},
        {"init_scale", cfg.model.init_scale},
        {"position_init_scale", cfg.model.position_init_scale}}},
      {"train",
       {{"epochs", cfg.train.epochs},
        {"batch_size", cfg.train.batch_size},
        {"learning_rate", cfg.train.learning_rate},
        {"adam_beta1", cfg.train.adam_beta1},
        {"adam_beta2", cfg.train.adam_beta2},
        {"adam_eps", cfg.train.adam_eps},
        {"seed", cfg.train.seed}}},
      {"debias", debias_to_json(cfg.debias)},
      {"matrix", {{"cells", cells}, {"jobs", cfg.matrix.jobs}}},
      {"report",
       {{"top_k", cfg.report.top_k},
        {"attention_examples", cfg.report.attention_examples}}},
      {"output_dir", cfg.output_dir},
  };
}

void json_set_path(nlohmann::json& root, const std::string& dotted_key,
                   const nlohmann::json& value) {
  if (dotted_key.empty()) throw InvalidArgumentError("empty config key");
  nlohmann::json* node = &root;
  size_t start = 0;
  while (true) {
    size_t dot = dotted_key.find('.', start);
    std::string part = dotted_key.substr(start, dot - start);
    if (part.empty()) throw InvalidArgumentError("malformed config key: " + dotted_key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (!node->is_object() && !node->is_null())
      throw InvalidArgumentError("config key \"" + part + "\" is not a table");
    start = dot + 1;
  }
}

uint64_t fnv1a64(const void* data, size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xCBF29CE484222325ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string config_hash_hex(const Config& cfg) {
  std::string dump = config_to_json(cfg).dump();
  uint64_t h = fnv1a64(dump.data(), dump.size());
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vqalab
