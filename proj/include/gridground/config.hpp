#pragma once

#include <cstdint>
#include <filesystem>

#include "gridground/anchoring.hpp"
#include "gridground/belief.hpp"
#include "gridground/serialization.hpp"
#include "gridground/synthetic.hpp"
#include "gridground/trainer.hpp"
#include "gridground/world.hpp"

namespace gridground {

enum class RevisionMode {
  Always,     // belief revision runs on every instruction
  OnFailure,  // only when a mentioned noun is nobody's top label
};

/// Everything a run needs, loaded from one JSON file. Symbol order in the
/// file defines every index.
struct Config {
  Vocabulary vocab;
  GridSpec grid;
  GeneratorSettings generator;
  double constraint_fraction = 0.75;
  std::uint64_t constraint_seed = 5;  // which combinations training may use
  CurriculumConfig curriculum;
  NoiseModel noise;
  MatchSettings matching;
  BeliefSettings belief;
  RevisionMode revision = RevisionMode::Always;
  std::uint64_t init_seed = 11;
};

/// Full-size defaults: 102 nouns, 26 adjectives, 27 prepositions on a
/// 10 x 10 x 3 grid of 0.1 m cells.
Config default_config();

Config config_from_json(const Json& j);
Json config_to_json(const Config& c);
Config load_config(const std::filesystem::path& path);

/// The constrained (training) distribution a config describes.
GenerationConstraints training_constraints(const Config& c);

}  // namespace gridground
