#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "gridground/program.hpp"
#include "gridground/rng.hpp"
#include "gridground/world.hpp"

namespace gridground {

struct GeneratorSettings {
  int object_cap = 10;
  int distractors = 2;
  int max_attributes = 2;
  int max_attempts = 1000;
};

/// Per-noun attribute and cell subsets used for the constrained (training)
/// distribution. Indexed by noun index.
struct GenerationConstraints {
  double fraction = 1.0;
  std::vector<std::vector<std::string>> allowed_attributes;
  std::vector<std::vector<Cell>> allowed_cells;

  bool attribute_allowed(int noun, const std::string& adjective) const;
  bool cell_allowed(int noun, const Cell& cell) const;
};

/// Each subset has ceil(fraction * full size) members, drawn once from `seed`.
GenerationConstraints make_constraints(const Vocabulary& vocab, const GridSpec& grid, double fraction,
                                       std::uint64_t seed);

struct Sample {
  SceneState scene;
  std::string instruction;
  ProgramGraph gold_graph;
  Cell gold_target;
  std::string target_id;
  int scenario = 1;  // as requested; 6 draws a family in 1..5
  int family = 1;    // the family actually generated
  std::uint64_t seed = 0;
};

/// Scenario families:
///  1 target noun unique
///  2 two same-noun distractors, the target's adjectives discriminate
///  3 as 2, a prepositional phrase on a unique referent discriminates
///  4 as 3, with the (redundant) target adjectives also spoken
///  5 same-noun distractors identical to the target; only the
///    prepositional phrase discriminates, referent adjectives as needed
///  6 uniform mixture of 1..5
/// Throws GenerationFailure after settings.max_attempts rejected attempts.
Sample generate_sample(int scenario, const GenerationConstraints* constraints, const Vocabulary& vocab,
                       const GridSpec& grid, const GeneratorSettings& settings, std::uint64_t seed);

/// Surface text for a program; verb synonyms are drawn from `rng`.
std::string render_instruction(const ProgramGraph& graph, const Vocabulary& vocab, Rng& rng);

/// Any program the grammar can express: PickLike or PutLike, up to
/// `max_adjectives` adjectives per phrase and `max_chain` prepositional
/// phrases in a chain. Words are drawn from the whole vocabulary.
ProgramGraph random_gold_graph(const Vocabulary& vocab, Rng& rng, int max_adjectives = 2, int max_chain = 2);

/// True when `located` lies on the ray from `referent` along `direction`
/// (at least one step away).
bool on_ray(const Cell& located, const Cell& referent, const Cell& direction);

/// Symbolic meaning of the noun-phrase subprogram rooted at `node`: ids of
/// the placed objects it denotes. Detect matches by noun or attribute, And
/// intersects, Shift keeps objects on the preposition ray of some referent.
std::set<std::string> denotation(const ProgramGraph& graph, int node, const SceneState& scene,
                                 const Vocabulary& vocab);

/// Dataset files: a header line then one JSON record per sample.
inline constexpr int kDatasetVersion = 1;
void write_dataset(const std::filesystem::path& path, const std::vector<Sample>& samples, const std::string& split);
std::vector<Sample> read_dataset(const std::filesystem::path& path, const Vocabulary& vocab);

std::vector<Sample> generate_batch(int scenario, const GenerationConstraints* constraints, const Vocabulary& vocab,
                                   const GridSpec& grid, const GeneratorSettings& settings, std::uint64_t base_seed,
                                   std::uint64_t stream, std::size_t count);

}  // namespace gridground
