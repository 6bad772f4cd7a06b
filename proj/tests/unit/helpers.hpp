#pragma once

#include <string>

#include "gridground/config.hpp"

#ifndef GRIDGROUND_SOURCE_DIR
#define GRIDGROUND_SOURCE_DIR "."
#endif

namespace testing {

inline std::string source_path(const std::string& rel) { return std::string(GRIDGROUND_SOURCE_DIR) + "/" + rel; }

inline const gridground::Config& desk() {
  static const gridground::Config c = gridground::load_config(source_path("configs/desk.json"));
  return c;
}

// C = 8: five nouns, three adjectives. Used where the gradient checks want
// small tensors.
inline gridground::Vocabulary tiny_vocab() {
  using gridground::Preposition;
  return gridground::Vocabulary(
      {"apple", "pear", "mug", "pot", "cup"}, {"red", "black", "green"},
      {Preposition{"left-of", "to the left of", {-1, 0, 0}}, Preposition{"right-of", "to the right of", {1, 0, 0}},
       Preposition{"in-front-of", "in front of", {0, -1, 0}}, Preposition{"behind", "behind", {0, 1, 0}},
       Preposition{"on", "on", {0, 0, 1}}},
      {{"pick up", gridground::VerbClass::PickLike}, {"grab", gridground::VerbClass::PickLike},
       {"put", gridground::VerbClass::PutLike}, {"drop", gridground::VerbClass::PutLike}});
}

inline gridground::GridSpec tiny_grid() { return gridground::GridSpec{4, 4, 2, 0.1, {}}; }

}  // namespace testing
