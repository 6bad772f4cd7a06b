#include "gridground/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>

#include "gridground/errors.hpp"
#include "gridground/parser.hpp"
#include "gridground/serialization.hpp"

namespace gridground {

bool GenerationConstraints::attribute_allowed(int noun, const std::string& adjective) const {
  const auto& a = allowed_attributes.at(static_cast<std::size_t>(noun));
  return std::find(a.begin(), a.end(), adjective) != a.end();
}

bool GenerationConstraints::cell_allowed(int noun, const Cell& cell) const {
  const auto& c = allowed_cells.at(static_cast<std::size_t>(noun));
  return std::binary_search(c.begin(), c.end(), cell);
}

namespace {

std::size_t subset_size(double fraction, std::size_t full) {
  // the small epsilon keeps exact products such as 0.75 * 4 from rounding up
  return std::min(full, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(full) - 1e-9)));
}

}  // namespace

GenerationConstraints make_constraints(const Vocabulary& vocab, const GridSpec& grid, double fraction,
                                       std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::FormatError, "constraint fraction must be in (0, 1]");
  GenerationConstraints c;
  c.fraction = fraction;
  Rng rng(seed);
  std::vector<Cell> all_cells;
  for (int i = 0; i < grid.cell_count(); ++i) all_cells.push_back(grid.unflat(i));
  const std::size_t n_attr = subset_size(fraction, vocab.adjectives().size());
  const std::size_t n_cell = subset_size(fraction, all_cells.size());
  for (std::size_t n = 0; n < vocab.nouns().size(); ++n) {
    std::vector<int> order(vocab.adjectives().size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);
    order.resize(n_attr);
    std::sort(order.begin(), order.end());
    std::vector<std::string> attrs;
    for (int i : order) attrs.push_back(vocab.adjectives()[static_cast<std::size_t>(i)]);
    c.allowed_attributes.push_back(std::move(attrs));

    std::vector<Cell> cells = all_cells;
    rng.shuffle(cells);
    cells.resize(n_cell);
    std::sort(cells.begin(), cells.end());
    c.allowed_cells.push_back(std::move(cells));
  }
  return c;
}

bool on_ray(const Cell& located, const Cell& referent, const Cell& dir) {
  const Cell d = located - referent;
  int k = 0;
  for (auto [dv, sv] : {std::pair{d.x, dir.x}, std::pair{d.y, dir.y}, std::pair{d.z, dir.z}}) {
    if (sv == 0) {
      if (dv != 0) return false;
      continue;
    }
    if (dv % sv != 0) return false;
    const int m = dv / sv;
    if (m < 1 || (k != 0 && m != k)) return false;
    k = m;
  }
  return k >= 1;
}

std::set<std::string> denotation(const ProgramGraph& graph, int node, const SceneState& scene, const Vocabulary& vocab) {
  const Node& n = graph.node(node);
  std::set<std::string> out;
  switch (n.kind) {
    case NodeKind::Detect:
      for (const auto* o : scene.placed()) {
        if (o->noun == n.symbol || o->has_attribute(n.symbol)) out.insert(o->id);
      }
      return out;
    case NodeKind::And: {
      const auto a = denotation(graph, n.inputs[0], scene, vocab);
      const auto b = denotation(graph, n.inputs[1], scene, vocab);
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
      return out;
    }
    case NodeKind::Shift: {
      const auto refs = denotation(graph, n.inputs[0], scene, vocab);
      const Cell dir = vocab.preposition(n.symbol).direction;
      for (const auto* o : scene.placed()) {
        for (const auto& rid : refs) {
          const auto* r = scene.find(rid);
          if (r->id != o->id && on_ray(o->cell, r->cell, dir)) {
            out.insert(o->id);
            break;
          }
        }
      }
      return out;
    }
    case NodeKind::Locate: return denotation(graph, n.inputs[0], scene, vocab);
    default: throw Error(ErrorCode::MalformedPhrase, "no denotation for position programs");
  }
}

namespace {

struct NounPhrase {
  std::vector<std::string> adjectives;
  std::string noun;
};

int build_core(GraphBuilder& b, const NounPhrase& np) {
  int core = -1;
  for (const auto& a : np.adjectives) {
    const int d = b.detect(a);
    core = core < 0 ? d : b.conj(core, d);
  }
  const int noun = b.detect(np.noun);
  return core < 0 ? noun : b.conj(core, noun);
}

class SceneBuilder {
 public:
  SceneBuilder(const GenerationConstraints* c, const Vocabulary& vocab, const GridSpec& grid,
               const GeneratorSettings& settings, Rng& rng)
      : c_(c), vocab_(vocab), grid_(grid), settings_(settings), rng_(rng) {
    scene_.grid = grid;
  }

  std::vector<std::string> allowed_attributes(int noun) const {
    return c_ ? c_->allowed_attributes[static_cast<std::size_t>(noun)] : vocab_.adjectives();
  }

  std::vector<std::string> draw_attributes(int noun) {
    auto pool = allowed_attributes(noun);
    rng_.shuffle(pool);
    const int k = std::min<int>(static_cast<int>(pool.size()), rng_.between(1, settings_.max_attributes));
    pool.resize(static_cast<std::size_t>(k));
    return sorted(pool);
  }

  std::vector<std::string> sorted(std::vector<std::string> attrs) const {
    std::sort(attrs.begin(), attrs.end(), [this](const std::string& a, const std::string& b) {
      return *vocab_.adjective_index(a) < *vocab_.adjective_index(b);
    });
    return attrs;
  }

  bool free_for(int noun, const Cell& cell) const {
    if (!grid_.contains(cell) || scene_.occupied(cell)) return false;
    return !c_ || c_->cell_allowed(noun, cell);
  }

  std::vector<Cell> free_cells(int noun, const std::function<bool(const Cell&)>& extra = {}) const {
    std::vector<Cell> out;
    for (int i = 0; i < grid_.cell_count(); ++i) {
      const Cell cell = grid_.unflat(i);
      if (free_for(noun, cell) && (!extra || extra(cell))) out.push_back(cell);
    }
    return out;
  }

  const ObjectInstance& place(int noun, std::vector<std::string> attrs, const Cell& cell) {
    scene_.objects.push_back(make_object("obj-" + std::to_string(scene_.objects.size() + 1),
                                         vocab_.nouns()[static_cast<std::size_t>(noun)], std::move(attrs), cell, grid_));
    return scene_.objects.back();
  }

  bool place_random(int noun, std::vector<std::string> attrs, const std::function<bool(const Cell&)>& extra = {}) {
    const auto cells = free_cells(noun, extra);
    if (cells.empty()) return false;
    place(noun, std::move(attrs), rng_.pick(cells));
    return true;
  }

  int room() const { return settings_.object_cap - static_cast<int>(scene_.objects.size()); }
  SceneState& scene() { return scene_; }

 private:
  const GenerationConstraints* c_;
  const Vocabulary& vocab_;
  const GridSpec& grid_;
  const GeneratorSettings& settings_;
  Rng& rng_;
  SceneState scene_;
};

bool subset_of(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return std::all_of(a.begin(), a.end(), [&](const std::string& x) { return std::find(b.begin(), b.end(), x) != b.end(); });
}

std::optional<Sample> attempt(int family, const GenerationConstraints* c, const Vocabulary& vocab,
                              const GridSpec& grid, const GeneratorSettings& settings, Rng& rng) {
  SceneBuilder sb(c, vocab, grid, settings, rng);
  const int n_nouns = static_cast<int>(vocab.nouns().size());
  const bool needs_referent = family >= 3;
  if (n_nouns < (needs_referent ? 2 : 1)) return std::nullopt;

  const int target_noun = static_cast<int>(rng.index(static_cast<std::size_t>(n_nouns)));
  auto target_attrs = sb.draw_attributes(target_noun);
  if (!sb.place_random(target_noun, target_attrs)) return std::nullopt;
  const ObjectInstance target = sb.scene().objects.back();

  int referent_noun = -1;
  Cell ray_origin{};
  Cell ray_dir{};
  std::string prep;
  NounPhrase referent_np;
  if (needs_referent) {
    if (vocab.prepositions().empty()) return std::nullopt;
    do {
      referent_noun = static_cast<int>(rng.index(static_cast<std::size_t>(n_nouns)));
    } while (referent_noun == target_noun);
    const Preposition& p = rng.pick(vocab.prepositions());
    prep = p.symbol;
    ray_dir = p.direction;
    std::vector<Cell> candidates;
    for (int k = 1;; ++k) {
      const Cell cell = target.cell - ray_dir * k;
      if (!grid.contains(cell)) break;
      if (sb.free_for(referent_noun, cell)) candidates.push_back(cell);
    }
    if (candidates.empty()) return std::nullopt;
    ray_origin = rng.pick(candidates);
    auto referent_attrs = sb.draw_attributes(referent_noun);
    sb.place(referent_noun, referent_attrs, ray_origin);
    referent_np.noun = vocab.nouns()[static_cast<std::size_t>(referent_noun)];

    if (family == 5 && rng.coin()) {
      // a second object of the referent's class that the referent adjectives exclude
      std::vector<std::string> other;
      bool ok = false;
      for (int tries = 0; tries < 20 && !ok; ++tries) {
        other = sb.draw_attributes(referent_noun);
        ok = !subset_of(referent_attrs, other);
      }
      if (!ok) return std::nullopt;
      if (!sb.place_random(referent_noun, other)) return std::nullopt;
      referent_np.adjectives = referent_attrs;
    }
  }

  if (family >= 2) {
    auto off_ray = [&](const Cell& cell) { return !needs_referent || !on_ray(cell, ray_origin, ray_dir); };
    for (int d = 0; d < settings.distractors; ++d) {
      std::vector<std::string> attrs;
      if (family == 5) {
        attrs = target_attrs;
      } else {
        bool ok = false;
        for (int tries = 0; tries < 20 && !ok; ++tries) {
          attrs = sb.draw_attributes(target_noun);
          ok = !subset_of(target_attrs, attrs);
        }
        if (!ok) return std::nullopt;
      }
      if (!sb.place_random(target_noun, attrs, off_ray)) return std::nullopt;
    }
  }

  if (sb.room() < 0) return std::nullopt;
  const int noise = rng.between(0, sb.room());
  for (int i = 0; i < noise; ++i) {
    int noun;
    int guard = 0;
    do {
      noun = static_cast<int>(rng.index(static_cast<std::size_t>(n_nouns)));
    } while ((noun == target_noun || noun == referent_noun) && ++guard < 1000);
    if (noun == target_noun || noun == referent_noun) break;
    sb.place_random(noun, sb.draw_attributes(noun));
  }

  NounPhrase target_np{{}, vocab.nouns()[static_cast<std::size_t>(target_noun)]};
  if (family == 2 || family == 4) target_np.adjectives = target_attrs;

  GraphBuilder b;
  int root = build_core(b, target_np);
  if (needs_referent) {
    const int ref = build_core(b, referent_np);
    root = b.conj(root, b.shift(prep, ref));
  }
  b.locate(root);
  ProgramGraph graph = std::move(b).build();

  const auto matches = denotation(graph, graph.root(), sb.scene(), vocab);
  if (matches.size() != 1 || *matches.begin() != target.id) return std::nullopt;

  Sample s;
  s.scene = std::move(sb.scene());
  s.instruction = render_instruction(graph, vocab, rng);
  s.gold_graph = std::move(graph);
  s.gold_target = target.cell;
  s.target_id = target.id;
  s.family = family;
  return s;
}

}  // namespace

Sample generate_sample(int scenario, const GenerationConstraints* constraints, const Vocabulary& vocab,
                       const GridSpec& grid, const GeneratorSettings& settings, std::uint64_t seed) {
  if (scenario < 1 || scenario > 6) throw Error(ErrorCode::FormatError, "scenario must be in 1..6");
  Rng rng(seed);
  const int family = scenario == 6 ? rng.between(1, 5) : scenario;
  for (int i = 0; i < settings.max_attempts; ++i) {
    if (auto s = attempt(family, constraints, vocab, grid, settings, rng)) {
      s->scenario = scenario;
      s->seed = seed;
      return std::move(*s);
    }
  }
  throw Error(ErrorCode::GenerationFailure,
              "scenario " + std::to_string(family) + " failed after " + std::to_string(settings.max_attempts) + " attempts");
}

std::vector<Sample> generate_batch(int scenario, const GenerationConstraints* constraints, const Vocabulary& vocab,
                                   const GridSpec& grid, const GeneratorSettings& settings, std::uint64_t base_seed,
                                   std::uint64_t stream, std::size_t count) {
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(generate_sample(scenario, constraints, vocab, grid, settings, derive_seed(base_seed, stream, i)));
  }
  return out;
}

namespace {

std::string render_core(const ProgramGraph& g, int node) {
  const Node& n = g.node(node);
  if (n.kind == NodeKind::Detect) return n.symbol;
  if (n.kind == NodeKind::And) return render_core(g, n.inputs[0]) + " " + render_core(g, n.inputs[1]);
  throw Error(ErrorCode::MalformedPhrase, "unexpected node in noun phrase");
}

std::string render_np(const ProgramGraph& g, int node, const Vocabulary& vocab) {
  const Node& n = g.node(node);
  if (n.kind == NodeKind::And && g.node(n.inputs[1]).kind == NodeKind::Shift) {
    const Node& shift = g.node(n.inputs[1]);
    return render_np(g, n.inputs[0], vocab) + " " + vocab.preposition(shift.symbol).surface + " " +
           render_np(g, shift.inputs[0], vocab);
  }
  return "the " + render_core(g, node);
}

}  // namespace

namespace {

NounPhrase random_np(const Vocabulary& vocab, Rng& rng, int max_adjectives) {
  NounPhrase np;
  std::vector<std::string> adjs = vocab.adjectives();
  rng.shuffle(adjs);
  adjs.resize(static_cast<std::size_t>(rng.between(0, std::min<int>(max_adjectives, static_cast<int>(adjs.size())))));
  np.adjectives = std::move(adjs);
  np.noun = rng.pick(vocab.nouns());
  return np;
}

// NP := core (PREP NP)?, right-branching
int build_chain(GraphBuilder& b, const Vocabulary& vocab, Rng& rng, int max_adjectives, int links) {
  const int core = build_core(b, random_np(vocab, rng, max_adjectives));
  if (links == 0) return core;
  const std::string prep = rng.pick(vocab.prepositions()).symbol;
  const int referent = build_chain(b, vocab, rng, max_adjectives, links - 1);
  return b.conj(core, b.shift(prep, referent));
}

}  // namespace

ProgramGraph random_gold_graph(const Vocabulary& vocab, Rng& rng, int max_adjectives, int max_chain) {
  GraphBuilder b;
  if (rng.coin(0.5)) {
    const int np = build_chain(b, vocab, rng, max_adjectives, rng.between(0, max_chain));
    b.locate(np);
  } else {
    const int source = rng.coin(0.5) ? b.held() : b.locate(build_core(b, random_np(vocab, rng, max_adjectives)));
    const std::string prep = rng.pick(vocab.prepositions()).symbol;
    const int referent = build_chain(b, vocab, rng, max_adjectives, rng.between(0, max_chain));
    b.position(prep, source, referent);
  }
  return std::move(b).build().canonical();
}

std::string render_instruction(const ProgramGraph& graph, const Vocabulary& vocab, Rng& rng) {
  graph.validate();
  const Node& root = graph.root_node();
  if (root.kind == NodeKind::Locate) {
    return rng.pick(vocab.verb_forms(VerbClass::PickLike)) + " " + render_np(graph, root.inputs[0], vocab);
  }
  const Node& src = graph.node(root.inputs[0]);
  const std::string verb = rng.pick(vocab.verb_forms(VerbClass::PutLike));
  const std::string object = src.kind == NodeKind::Held ? std::string("it") : render_np(graph, src.inputs[0], vocab);
  return verb + " " + object + " " + vocab.preposition(root.symbol).surface + " " + render_np(graph, root.inputs[1], vocab);
}

void write_dataset(const std::filesystem::path& path, const std::vector<Sample>& samples, const std::string& split) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::FormatError, "cannot write " + path.string());
  out << Json{{"format", "gridground-dataset"}, {"version", kDatasetVersion}, {"split", split}, {"count", samples.size()}}.dump()
      << '\n';
  for (const auto& s : samples) {
    Json j{{"seed", s.seed},
           {"scenario", s.scenario},
           {"family", s.family},
           {"instruction", s.instruction},
           {"graph", s.gold_graph.serialize()},
           {"target", s.gold_target},
           {"target_id", s.target_id},
           {"scene", s.scene}};
    out << j.dump() << '\n';
  }
}

std::vector<Sample> read_dataset(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FormatError, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, "empty dataset file");
  const Json header = Json::parse(line);
  if (header.value("format", "") != "gridground-dataset" || header.value("version", 0) != kDatasetVersion) {
    throw Error(ErrorCode::FormatError, "unsupported dataset header");
  }
  std::vector<Sample> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    Sample s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.scenario = j.at("scenario").get<int>();
    s.family = j.value("family", s.scenario);
    s.instruction = j.at("instruction").get<std::string>();
    s.gold_graph = ProgramGraph::deserialize(j.at("graph").get<std::string>());
    s.gold_target = j.at("target").get<Cell>();
    s.target_id = j.value("target_id", "");
    s.scene = j.at("scene").get<SceneState>();
    for (const auto& o : s.scene.objects) {
      if (!vocab.is_noun(o.noun)) throw Error(ErrorCode::UnknownSymbol, "dataset noun '" + o.noun + "' not in vocabulary");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace gridground
