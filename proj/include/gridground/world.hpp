#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gridground {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  bool operator==(const Vec3&) const = default;
};

/// Integer grid coordinates. Also used for preposition displacement vectors.
struct Cell {
  int x = 0;
  int y = 0;
  int z = 0;
  auto operator<=>(const Cell&) const = default;
  Cell operator+(const Cell& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Cell operator-(const Cell& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Cell operator*(int k) const { return {x * k, y * k, z * k}; }
};

struct GridSpec {
  int width = 10;
  int height = 10;
  int layers = 3;
  double cell_size = 0.1;
  Vec3 origin{};

  void validate() const;
  int cell_count() const { return width * height * layers; }
  bool contains(const Cell& c) const {
    return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height && c.z >= 0 && c.z < layers;
  }
  /// Row-major flat index, z fastest.
  int flat(const Cell& c) const { return (c.x * height + c.y) * layers + c.z; }
  Cell unflat(int i) const { return {i / (height * layers), (i / layers) % height, i % layers}; }
  bool operator==(const GridSpec&) const = default;
};

/// floor((position - origin) / cell_size) per axis. Throws OutOfBounds.
Cell cell_of(const Vec3& position, const GridSpec& spec);
Vec3 cell_center(const Cell& cell, const GridSpec& spec);

enum class VerbClass { PickLike, PutLike };

struct Preposition {
  std::string symbol;   // e.g. "right-of"
  std::string surface;  // e.g. "to the right of"
  Cell direction;       // displacement of the located object relative to its referent
};

/// Ordered symbol lists. Index in a list is the symbol's index everywhere
/// else (feature columns, parameter blocks, weight files).
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> nouns, std::vector<std::string> adjectives,
             std::vector<Preposition> prepositions, std::map<std::string, VerbClass> verbs);

  const std::vector<std::string>& nouns() const { return nouns_; }
  const std::vector<std::string>& adjectives() const { return adjectives_; }
  const std::vector<Preposition>& prepositions() const { return prepositions_; }
  const std::map<std::string, VerbClass>& verbs() const { return verbs_; }

  /// C = |nouns| + |adjectives|. Nouns occupy the first columns.
  int feature_width() const { return static_cast<int>(nouns_.size() + adjectives_.size()); }

  std::optional<int> noun_index(std::string_view word) const;
  std::optional<int> adjective_index(std::string_view word) const;
  std::optional<int> preposition_index(std::string_view symbol) const;
  std::optional<int> find_feature(std::string_view word) const;
  /// Feature column of a noun or adjective. Throws UnknownSymbol.
  int feature_index(std::string_view word) const;
  const std::string& feature_word(int index) const;
  const Preposition& preposition(std::string_view symbol) const;

  bool is_noun(std::string_view w) const { return noun_index(w).has_value(); }
  bool is_adjective(std::string_view w) const { return adjective_index(w).has_value(); }

  /// Verb surface forms grouped by class, in lexicon order.
  std::vector<std::string> verb_forms(VerbClass cls) const;

  /// FNV-1a over the ordered symbol lists; weight files are bound to it.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> nouns_;
  std::vector<std::string> adjectives_;
  std::vector<Preposition> prepositions_;
  std::map<std::string, VerbClass> verbs_;
  std::unordered_map<std::string, int> noun_ix_;
  std::unordered_map<std::string, int> adj_ix_;
  std::unordered_map<std::string, int> prep_ix_;
};

struct ObjectInstance {
  std::string id;
  std::string noun;
  std::vector<std::string> attributes;
  Vec3 position;
  Cell cell;

  bool has_attribute(std::string_view a) const;
};

ObjectInstance make_object(std::string id, std::string noun, std::vector<std::string> attributes,
                           const Cell& cell, const GridSpec& grid);

struct SceneState {
  GridSpec grid;
  std::vector<ObjectInstance> objects;
  std::optional<std::string> held;

  /// Checks cell consistency, exclusivity, the object cap and vocabulary
  /// membership. Throws InvalidScene / UnknownSymbol.
  void validate(const Vocabulary& vocab, int object_cap) const;
  const ObjectInstance* find(std::string_view id) const;
  /// Objects that take part in the grid encoding (everything but the held one).
  std::vector<const ObjectInstance*> placed() const;
  bool occupied(const Cell& c) const;
};

/// Dense (W, H, L, C) tensor, feature index fastest.
class GridTensor {
 public:
  GridTensor() = default;
  GridTensor(const GridSpec& spec, int channels)
      : width_(spec.width), height_(spec.height), layers_(spec.layers), channels_(channels),
        values_(static_cast<std::size_t>(spec.cell_count()) * channels, 0.0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int layers() const { return layers_; }
  int channels() const { return channels_; }
  int cells() const { return width_ * height_ * layers_; }

  double& at(int cell, int c) { return values_[static_cast<std::size_t>(cell) * channels_ + c]; }
  double at(int cell, int c) const { return values_[static_cast<std::size_t>(cell) * channels_ + c]; }
  const double* column(int cell) const { return values_.data() + static_cast<std::size_t>(cell) * channels_; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  bool operator==(const GridTensor&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int layers_ = 0;
  int channels_ = 0;
  std::vector<double> values_;
};

using LabelOverride = std::map<std::string, std::string>;

/// Multi-hot encoding of every placed object into its cell. An override
/// replaces the class noun of the named objects.
GridTensor encode_scene(const SceneState& scene, const Vocabulary& vocab,
                        const LabelOverride* label_override = nullptr);

}  // namespace gridground
