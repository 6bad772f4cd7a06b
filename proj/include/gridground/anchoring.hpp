#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridground/world.hpp"

namespace gridground {

struct LabelProb {
  std::string label;
  double p = 0.0;
  bool operator==(const LabelProb&) const = default;
};

/// Categorical belief over nouns, sorted by descending mass (ties keep
/// insertion order). Zero-mass labels are dropped.
using LabelBelief = std::vector<LabelProb>;

double belief_of(const LabelBelief& belief, std::string_view label);
void sort_belief(LabelBelief& belief);

struct Anchor {
  std::string id;  // "<label>-<n>", fixed at acquisition
  LabelBelief belief;
  std::vector<std::string> attributes;
  Vec3 position;
  int last_seen = 0;

  const std::string& top_label() const { return belief.front().label; }
};

/// A perceived candidate object for one frame.
struct Percept {
  LabelBelief belief;
  std::vector<std::string> attributes;
  Vec3 position;
  std::string truth_id;  // ground-truth object it came from; diagnostics only
};

class AnchorSpace {
 public:
  const std::vector<Anchor>& anchors() const { return anchors_; }
  std::vector<Anchor>& anchors() { return anchors_; }
  int time() const { return time_; }
  void set_time(int t) { time_ = t; }

  const Anchor* find(std::string_view id) const;
  Anchor* find(std::string_view id);
  const Anchor& get(std::string_view id) const;  // throws UnknownAnchor

  /// Mints "<top label>-<n>" with a per-label counter that never goes back.
  const Anchor& acquire(const Percept& candidate);
  /// Replaces the anchor's percept-derived fields with the candidate's.
  void re_acquire(const Percept& candidate, std::string_view anchor_id);
  void erase(std::string_view id);

  const std::map<std::string, int>& counters() const { return counters_; }
  void set_counters(std::map<std::string, int> c) { counters_ = std::move(c); }

  /// Throws if a belief does not sum to one or ids repeat.
  void validate() const;

 private:
  std::vector<Anchor> anchors_;
  std::map<std::string, int> counters_;
  int time_ = 0;
};

struct NoiseModel {
  /// noun -> confusable classes with their probabilities (row sums to 1).
  std::map<std::string, LabelBelief> confusion;
  double band_low = 0.55;   // mass range of the top label
  double band_high = 0.9;
  double position_jitter = 0.0;  // meters, per axis
  std::uint64_t seed = 0;

  void validate() const;
};

/// One candidate per placed object. The perceived top label is drawn from
/// the object's confusion row; its mass is drawn from the band and the rest
/// goes to the runner-up (the true class when the top label is wrong).
/// Objects without a confusion row (or a single-entry row) are perceived
/// with certainty.
std::vector<Percept> simulate_perception(const SceneState& ground_truth, const NoiseModel& noise, int time);

struct MatchSettings {
  double radius_cells = 1.5;
  double attribute_overlap = 0.5;  // Jaccard
};

/// Nearest anchor within the radius whose attribute overlap reaches the
/// threshold; ties by distance then id. `exclude` lists anchors already
/// claimed this frame.
std::optional<std::string> match(const AnchorSpace& space, const Percept& candidate, const MatchSettings& settings,
                                 const GridSpec& grid, const std::vector<std::string>& exclude = {});

/// Runs match for every percept, re-acquiring matched anchors and acquiring
/// the rest, and advances the space clock to `time`.
void process_frame(AnchorSpace& space, const std::vector<Percept>& percepts, const MatchSettings& settings,
                   const GridSpec& grid, int time);

/// anchor id -> chosen noun. Anchors not listed use their top label.
using LabelSelection = std::map<std::string, std::string>;

/// One object per anchor (cells from positions). The held anchor is kept in
/// the scene but excluded from the grid. Throws CellCollision.
SceneState anchors_to_scene(const AnchorSpace& space, const LabelSelection& selection, const GridSpec& grid,
                            const std::optional<std::string>& held = std::nullopt);

}  // namespace gridground
