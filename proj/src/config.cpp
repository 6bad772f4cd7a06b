#include "gridground/config.hpp"

#include <fstream>

#include "gridground/errors.hpp"

namespace gridground {

namespace {

std::map<std::string, VerbClass> default_verbs() {
  std::map<std::string, VerbClass> v;
  for (const char* f : {"pick up", "grab", "fetch", "take"}) v[f] = VerbClass::PickLike;
  for (const char* f : {"put", "place", "drop"}) v[f] = VerbClass::PutLike;
  return v;
}

std::vector<Preposition> default_prepositions() {
  std::vector<Preposition> preps{
      {"left-of", "to the left of", {-1, 0, 0}}, {"right-of", "to the right of", {1, 0, 0}},
      {"in-front-of", "in front of", {0, -1, 0}}, {"behind", "behind", {0, 1, 0}},
      {"on", "on", {0, 0, 1}},                    {"under", "under", {0, 0, -1}},
  };
  // the remaining neighbour directions get compound one-word names
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        if (std::abs(dx) + std::abs(dy) + std::abs(dz) < 2) continue;
        std::string name;
        auto part = [&name](const char* p) { name += name.empty() ? p : std::string("-") + p; };
        if (dx) part(dx < 0 ? "left" : "right");
        if (dy) part(dy < 0 ? "front" : "back");
        if (dz) part(dz < 0 ? "below" : "above");
        name += "-of";
        preps.push_back({name, name, {dx, dy, dz}});
      }
    }
  }
  preps.push_back({"far-right-of", "far-right-of", {2, 0, 0}});
  return preps;
}

VerbClass verb_class_named(const std::string& s) {
  if (s == "pick") return VerbClass::PickLike;
  if (s == "put") return VerbClass::PutLike;
  throw Error(ErrorCode::FormatError, "verb class must be 'pick' or 'put'");
}

LabelBelief belief_from_json(const Json& j) {
  LabelBelief b;
  for (const auto& e : j) b.push_back({e.at(0).get<std::string>(), e.at(1).get<double>()});
  return b;
}

}  // namespace

Config default_config() {
  Config c;
  std::vector<std::string> nouns{"apple", "pear",  "ball",  "can",    "mug",   "pot",    "book",  "cup",
                                 "box",   "bowl",  "banana", "knife", "fork",  "spoon",  "plate", "bottle",
                                 "glass", "jar",   "lemon", "bread",  "pan",   "kettle", "towel", "sponge"};
  for (int i = static_cast<int>(nouns.size()) + 1; i <= 102; ++i) nouns.push_back("item" + std::to_string(i));
  std::vector<std::string> adjectives{"red",   "black", "green", "blue",   "yellow", "white", "orange",
                                      "purple", "pink", "brown", "gray",   "small",  "large", "tall",
                                      "short", "round", "square", "flat",  "long",   "wide",  "narrow",
                                      "striped", "shiny", "dark", "light", "empty"};
  c.vocab = Vocabulary(std::move(nouns), std::move(adjectives), default_prepositions(), default_verbs());
  c.grid = GridSpec{10, 10, 3, 0.1, {}};
  c.curriculum.stop_threshold = 1e-5;
  return c;
}

Config config_from_json(const Json& j) {
  if (j.value("format", "gridground-config") != "gridground-config" || j.value("version", 1) != 1) {
    throw Error(ErrorCode::FormatError, "unsupported config format");
  }
  Config c = default_config();
  try {
    if (j.contains("grid")) c.grid = j.at("grid").get<GridSpec>();
    if (j.contains("nouns") || j.contains("adjectives") || j.contains("prepositions") || j.contains("verbs")) {
      std::vector<Preposition> preps;
      for (const auto& p : j.at("prepositions")) {
        preps.push_back({p.at("symbol").get<std::string>(), p.at("surface").get<std::string>(), p.at("direction").get<Cell>()});
      }
      std::map<std::string, VerbClass> verbs;
      for (const auto& [cls, forms] : j.at("verbs").items()) {
        for (const auto& f : forms) verbs[f.get<std::string>()] = verb_class_named(cls);
      }
      c.vocab = Vocabulary(j.at("nouns").get<std::vector<std::string>>(), j.at("adjectives").get<std::vector<std::string>>(),
                           std::move(preps), std::move(verbs));
    }
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      c.generator.object_cap = g.value("object_cap", c.generator.object_cap);
      c.generator.distractors = g.value("distractors", c.generator.distractors);
      c.generator.max_attributes = g.value("max_attributes", c.generator.max_attributes);
      c.generator.max_attempts = g.value("max_attempts", c.generator.max_attempts);
    }
    c.constraint_fraction = j.value("constraint_fraction", c.constraint_fraction);
    c.constraint_seed = j.value("constraint_seed", c.constraint_seed);
    if (j.contains("curriculum")) {
      const auto& t = j.at("curriculum");
      auto& cc = c.curriculum;
      cc.scenario_order = t.value("scenario_order", cc.scenario_order);
      cc.eval_period = t.value("eval_period", cc.eval_period);
      cc.eval_batch = t.value("eval_batch", cc.eval_batch);
      cc.stop_threshold = t.value("stop_threshold", cc.stop_threshold);
      cc.ema_decay = t.value("ema_decay", cc.ema_decay);
      cc.max_samples = t.value("max_samples", cc.max_samples);
      cc.seed = t.value("seed", cc.seed);
      cc.adam.lr = t.value("lr", cc.adam.lr);
      cc.adam.beta1 = t.value("beta1", cc.adam.beta1);
      cc.adam.beta2 = t.value("beta2", cc.adam.beta2);
      cc.adam.epsilon = t.value("epsilon", cc.adam.epsilon);
      cc.validate();
    }
    if (j.contains("anchoring")) {
      const auto& a = j.at("anchoring");
      c.matching.radius_cells = a.value("match_radius_cells", c.matching.radius_cells);
      c.matching.attribute_overlap = a.value("attribute_overlap", c.matching.attribute_overlap);
      if (a.contains("belief_band")) {
        c.noise.band_low = a.at("belief_band").at(0).get<double>();
        c.noise.band_high = a.at("belief_band").at(1).get<double>();
      }
      c.noise.position_jitter = a.value("position_jitter", c.noise.position_jitter);
      c.noise.seed = a.value("seed", c.noise.seed);
      if (a.contains("confusion")) {
        for (const auto& [noun, row] : a.at("confusion").items()) c.noise.confusion[noun] = belief_from_json(row);
      }
      c.noise.validate();
    }
    if (j.contains("belief")) {
      const auto& b = j.at("belief");
      c.belief.top_k = b.value("top_k", c.belief.top_k);
      c.belief.max_anchors = b.value("max_anchors", c.belief.max_anchors);
      const std::string mode = b.value("revision", std::string("always"));
      if (mode == "always") c.revision = RevisionMode::Always;
      else if (mode == "on_failure") c.revision = RevisionMode::OnFailure;
      else throw Error(ErrorCode::FormatError, "revision must be 'always' or 'on_failure'");
    }
    c.init_seed = j.value("init_seed", c.init_seed);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("config: ") + e.what());
  }
  for (const auto& [noun, row] : c.noise.confusion) {
    if (!c.vocab.is_noun(noun)) throw Error(ErrorCode::UnknownSymbol, "confusion row for unknown noun '" + noun + "'");
    for (const auto& lp : row) {
      if (!c.vocab.is_noun(lp.label)) throw Error(ErrorCode::UnknownSymbol, "confusion entry '" + lp.label + "'");
    }
  }
  return c;
}

Json config_to_json(const Config& c) {
  Json preps = Json::array();
  for (const auto& p : c.vocab.prepositions()) {
    preps.push_back({{"symbol", p.symbol}, {"surface", p.surface}, {"direction", p.direction}});
  }
  Json verbs{{"pick", c.vocab.verb_forms(VerbClass::PickLike)}, {"put", c.vocab.verb_forms(VerbClass::PutLike)}};
  Json confusion = Json::object();
  for (const auto& [noun, row] : c.noise.confusion) {
    Json r = Json::array();
    for (const auto& lp : row) r.push_back({lp.label, lp.p});
    confusion[noun] = r;
  }
  const auto& cc = c.curriculum;
  return Json{
      {"format", "gridground-config"},
      {"version", 1},
      {"grid", c.grid},
      {"nouns", c.vocab.nouns()},
      {"adjectives", c.vocab.adjectives()},
      {"prepositions", preps},
      {"verbs", verbs},
      {"generator",
       {{"object_cap", c.generator.object_cap},
        {"distractors", c.generator.distractors},
        {"max_attributes", c.generator.max_attributes},
        {"max_attempts", c.generator.max_attempts}}},
      {"constraint_fraction", c.constraint_fraction},
      {"constraint_seed", c.constraint_seed},
      {"curriculum",
       {{"scenario_order", cc.scenario_order},
        {"eval_period", cc.eval_period},
        {"eval_batch", cc.eval_batch},
        {"stop_threshold", cc.stop_threshold},
        {"ema_decay", cc.ema_decay},
        {"max_samples", cc.max_samples},
        {"seed", cc.seed},
        {"lr", cc.adam.lr},
        {"beta1", cc.adam.beta1},
        {"beta2", cc.adam.beta2},
        {"epsilon", cc.adam.epsilon}}},
      {"anchoring",
       {{"match_radius_cells", c.matching.radius_cells},
        {"attribute_overlap", c.matching.attribute_overlap},
        {"belief_band", {c.noise.band_low, c.noise.band_high}},
        {"position_jitter", c.noise.position_jitter},
        {"seed", c.noise.seed},
        {"confusion", confusion}}},
      {"belief",
       {{"top_k", c.belief.top_k},
        {"max_anchors", c.belief.max_anchors},
        {"revision", c.revision == RevisionMode::Always ? "always" : "on_failure"}}},
      {"init_seed", c.init_seed},
  };
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FormatError, "cannot read config " + path.string());
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

GenerationConstraints training_constraints(const Config& c) {
  return make_constraints(c.vocab, c.grid, c.constraint_fraction, c.constraint_seed);
}

}  // namespace gridground
