#include "gridground/world.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gridground/errors.hpp"

namespace gridground {

void GridSpec::validate() const {
  if (width < 1 || height < 1 || layers < 1) {
    throw Error(ErrorCode::InvalidScene, "grid dimensions must be >= 1");
  }
  if (!(cell_size > 0.0)) {
    throw Error(ErrorCode::InvalidScene, "cell_size must be positive");
  }
}

Cell cell_of(const Vec3& p, const GridSpec& spec) {
  const double fx = std::floor((p.x - spec.origin.x) / spec.cell_size);
  const double fy = std::floor((p.y - spec.origin.y) / spec.cell_size);
  const double fz = std::floor((p.z - spec.origin.z) / spec.cell_size);
  if (!(fx >= 0 && fx < spec.width && fy >= 0 && fy < spec.height && fz >= 0 && fz < spec.layers)) {
    throw Error(ErrorCode::OutOfBounds, "position outside grid extent");
  }
  return {static_cast<int>(fx), static_cast<int>(fy), static_cast<int>(fz)};
}

Vec3 cell_center(const Cell& c, const GridSpec& spec) {
  return {spec.origin.x + (c.x + 0.5) * spec.cell_size, spec.origin.y + (c.y + 0.5) * spec.cell_size,
          spec.origin.z + (c.z + 0.5) * spec.cell_size};
}

namespace {

template <typename Range, typename Key>
std::unordered_map<std::string, int> index_of(const Range& items, Key key, std::string_view what) {
  std::unordered_map<std::string, int> ix;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!ix.emplace(key(items[i]), static_cast<int>(i)).second) {
      throw Error(ErrorCode::FormatError, "duplicate " + std::string(what) + " '" + key(items[i]) + "'");
    }
  }
  return ix;
}

std::optional<int> lookup(const std::unordered_map<std::string, int>& ix, std::string_view w) {
  auto it = ix.find(std::string(w));
  if (it == ix.end()) return std::nullopt;
  return it->second;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> nouns, std::vector<std::string> adjectives,
                       std::vector<Preposition> prepositions, std::map<std::string, VerbClass> verbs)
    : nouns_(std::move(nouns)),
      adjectives_(std::move(adjectives)),
      prepositions_(std::move(prepositions)),
      verbs_(std::move(verbs)) {
  auto self = [](const std::string& s) { return s; };
  noun_ix_ = index_of(nouns_, self, "noun");
  adj_ix_ = index_of(adjectives_, self, "adjective");
  prep_ix_ = index_of(prepositions_, [](const Preposition& p) { return p.symbol; }, "preposition");
  for (const auto& a : adjectives_) {
    if (noun_ix_.contains(a)) throw Error(ErrorCode::FormatError, "'" + a + "' is both noun and adjective");
  }
  for (const auto& p : prepositions_) {
    if (p.direction == Cell{}) throw Error(ErrorCode::FormatError, "preposition '" + p.symbol + "' has zero direction");
  }
}

std::optional<int> Vocabulary::noun_index(std::string_view w) const { return lookup(noun_ix_, w); }
std::optional<int> Vocabulary::adjective_index(std::string_view w) const { return lookup(adj_ix_, w); }
std::optional<int> Vocabulary::preposition_index(std::string_view s) const { return lookup(prep_ix_, s); }

std::optional<int> Vocabulary::find_feature(std::string_view w) const {
  if (auto n = noun_index(w)) return n;
  if (auto a = adjective_index(w)) return static_cast<int>(nouns_.size()) + *a;
  return std::nullopt;
}

int Vocabulary::feature_index(std::string_view w) const {
  if (auto f = find_feature(w)) return *f;
  throw Error(ErrorCode::UnknownSymbol, "'" + std::string(w) + "' is not a noun or adjective");
}

const std::string& Vocabulary::feature_word(int index) const {
  const int n = static_cast<int>(nouns_.size());
  return index < n ? nouns_.at(index) : adjectives_.at(index - n);
}

const Preposition& Vocabulary::preposition(std::string_view symbol) const {
  if (auto i = preposition_index(symbol)) return prepositions_[*i];
  throw Error(ErrorCode::UnknownSymbol, "unknown preposition '" + std::string(symbol) + "'");
}

std::vector<std::string> Vocabulary::verb_forms(VerbClass cls) const {
  std::vector<std::string> out;
  for (const auto& [form, c] : verbs_) {
    if (c == cls) out.push_back(form);
  }
  return out;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  feed("nouns");
  for (const auto& n : nouns_) feed(n);
  feed("adjectives");
  for (const auto& a : adjectives_) feed(a);
  feed("prepositions");
  for (const auto& p : prepositions_) feed(p.symbol);
  return h;
}

bool ObjectInstance::has_attribute(std::string_view a) const {
  return std::find(attributes.begin(), attributes.end(), a) != attributes.end();
}

ObjectInstance make_object(std::string id, std::string noun, std::vector<std::string> attributes,
                           const Cell& cell, const GridSpec& grid) {
  return ObjectInstance{std::move(id), std::move(noun), std::move(attributes), cell_center(cell, grid), cell};
}

void SceneState::validate(const Vocabulary& vocab, int object_cap) const {
  grid.validate();
  if (static_cast<int>(objects.size()) > object_cap) {
    throw Error(ErrorCode::InvalidScene, "object cap exceeded");
  }
  std::set<std::string> ids;
  std::set<Cell> cells;
  bool held_found = !held.has_value();
  for (const auto& o : objects) {
    if (!ids.insert(o.id).second) throw Error(ErrorCode::InvalidScene, "duplicate object id " + o.id);
    if (!vocab.is_noun(o.noun)) throw Error(ErrorCode::UnknownSymbol, "unknown noun '" + o.noun + "'");
    for (const auto& a : o.attributes) {
      if (!vocab.is_adjective(a)) throw Error(ErrorCode::UnknownSymbol, "unknown adjective '" + a + "'");
    }
    if (held && o.id == *held) {
      held_found = true;
      continue;
    }
    if (cell_of(o.position, grid) != o.cell) throw Error(ErrorCode::InvalidScene, "cell mismatch for " + o.id);
    if (!cells.insert(o.cell).second) throw Error(ErrorCode::InvalidScene, "two objects share a cell");
  }
  if (!held_found) throw Error(ErrorCode::InvalidScene, "held object not in scene");
}

const ObjectInstance* SceneState::find(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

std::vector<const ObjectInstance*> SceneState::placed() const {
  std::vector<const ObjectInstance*> out;
  for (const auto& o : objects) {
    if (!held || o.id != *held) out.push_back(&o);
  }
  return out;
}

bool SceneState::occupied(const Cell& c) const {
  for (const auto* o : placed()) {
    if (o->cell == c) return true;
  }
  return false;
}

GridTensor encode_scene(const SceneState& scene, const Vocabulary& vocab, const LabelOverride* label_override) {
  GridTensor t(scene.grid, vocab.feature_width());
  for (const auto* o : scene.placed()) {
    std::string_view noun = o->noun;
    if (label_override) {
      if (auto it = label_override->find(o->id); it != label_override->end()) noun = it->second;
    }
    const auto n = vocab.noun_index(noun);
    if (!n) throw Error(ErrorCode::UnknownSymbol, "unknown noun '" + std::string(noun) + "'");
    if (!scene.grid.contains(o->cell)) throw Error(ErrorCode::OutOfBounds, "object " + o->id + " outside grid");
    const int cell = scene.grid.flat(o->cell);
    t.at(cell, *n) = 1.0;
    for (const auto& a : o->attributes) {
      const auto ai = vocab.adjective_index(a);
      if (!ai) throw Error(ErrorCode::UnknownSymbol, "unknown adjective '" + a + "'");
      t.at(cell, static_cast<int>(vocab.nouns().size()) + *ai) = 1.0;
    }
  }
  return t;
}

}  // namespace gridground
