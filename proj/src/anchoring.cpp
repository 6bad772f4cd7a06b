#include "gridground/anchoring.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gridground/errors.hpp"
#include "gridground/rng.hpp"

namespace gridground {

double belief_of(const LabelBelief& belief, std::string_view label) {
  for (const auto& lp : belief) {
    if (lp.label == label) return lp.p;
  }
  return 0.0;
}

void sort_belief(LabelBelief& belief) {
  std::erase_if(belief, [](const LabelProb& lp) { return !(lp.p > 0.0); });
  std::stable_sort(belief.begin(), belief.end(), [](const LabelProb& a, const LabelProb& b) { return a.p > b.p; });
}

const Anchor* AnchorSpace::find(std::string_view id) const {
  for (const auto& a : anchors_) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

Anchor* AnchorSpace::find(std::string_view id) {
  for (auto& a : anchors_) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

const Anchor& AnchorSpace::get(std::string_view id) const {
  if (const auto* a = find(id)) return *a;
  throw Error(ErrorCode::UnknownAnchor, "no anchor '" + std::string(id) + "'");
}

const Anchor& AnchorSpace::acquire(const Percept& candidate) {
  if (candidate.belief.empty()) throw Error(ErrorCode::InvalidScene, "percept without label belief");
  const std::string& label = candidate.belief.front().label;
  const int n = ++counters_[label];
  anchors_.push_back(Anchor{label + "-" + std::to_string(n), candidate.belief, candidate.attributes, candidate.position, time_});
  return anchors_.back();
}

void AnchorSpace::re_acquire(const Percept& candidate, std::string_view anchor_id) {
  Anchor* a = find(anchor_id);
  if (!a) throw Error(ErrorCode::UnknownAnchor, "no anchor '" + std::string(anchor_id) + "'");
  a->belief = candidate.belief;
  a->attributes = candidate.attributes;
  a->position = candidate.position;
  a->last_seen = time_;
}

void AnchorSpace::erase(std::string_view id) {
  std::erase_if(anchors_, [&](const Anchor& a) { return a.id == id; });
}

void AnchorSpace::validate() const {
  std::set<std::string> ids;
  for (const auto& a : anchors_) {
    if (!ids.insert(a.id).second) throw Error(ErrorCode::InvalidScene, "duplicate anchor id " + a.id);
    if (a.belief.empty()) throw Error(ErrorCode::InvalidScene, "anchor " + a.id + " has no belief");
    double s = 0.0;
    for (const auto& lp : a.belief) {
      if (lp.p < 0.0) throw Error(ErrorCode::InvalidScene, "negative belief on " + a.id);
      s += lp.p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw Error(ErrorCode::InvalidScene, "belief of " + a.id + " does not sum to 1");
  }
}

void NoiseModel::validate() const {
  if (!(band_low > 0.5 && band_low <= band_high && band_high <= 1.0)) {
    throw Error(ErrorCode::FormatError, "belief band must satisfy 0.5 < low <= high <= 1");
  }
  if (position_jitter < 0.0) throw Error(ErrorCode::FormatError, "negative jitter");
  for (const auto& [noun, row] : confusion) {
    double s = 0.0;
    for (const auto& lp : row) {
      if (lp.p < 0.0) throw Error(ErrorCode::FormatError, "negative confusion entry for " + noun);
      s += lp.p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw Error(ErrorCode::FormatError, "confusion row for " + noun + " does not sum to 1");
  }
}

std::vector<Percept> simulate_perception(const SceneState& truth, const NoiseModel& noise, int time) {
  Rng rng(derive_seed(noise.seed, 0x5e45e, static_cast<std::uint64_t>(time)));
  const GridSpec& g = truth.grid;
  std::vector<Percept> out;
  for (const auto* o : truth.placed()) {
    Percept p;
    p.truth_id = o->id;
    p.attributes = o->attributes;
    p.position = o->position;
    if (noise.position_jitter > 0.0) {
      auto clamp = [](double v, double lo, double hi) { return std::min(std::max(v, lo), std::nextafter(hi, lo)); };
      p.position.x = clamp(p.position.x + rng.normal(0.0, noise.position_jitter), g.origin.x, g.origin.x + g.width * g.cell_size);
      p.position.y = clamp(p.position.y + rng.normal(0.0, noise.position_jitter), g.origin.y, g.origin.y + g.height * g.cell_size);
      p.position.z = clamp(p.position.z + rng.normal(0.0, noise.position_jitter), g.origin.z, g.origin.z + g.layers * g.cell_size);
    }
    auto row_it = noise.confusion.find(o->noun);
    LabelBelief row;
    if (row_it != noise.confusion.end()) {
      for (const auto& lp : row_it->second) {
        if (lp.p > 0.0) row.push_back(lp);
      }
    }
    if (row.size() < 2) {
      const std::string top = row.empty() ? o->noun : row.front().label;
      if (top == o->noun) {
        p.belief = {{top, 1.0}};
      } else {
        const double m = rng.uniform(noise.band_low, noise.band_high);
        p.belief = {{top, m}, {o->noun, 1.0 - m}};
      }
      out.push_back(std::move(p));
      continue;
    }
    double u = rng.uniform();
    std::size_t pick = row.size() - 1;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (u < row[i].p) {
        pick = i;
        break;
      }
      u -= row[i].p;
    }
    const std::string top = row[pick].label;
    std::string second;
    if (top == o->noun) {
      double best = -1.0;
      for (const auto& lp : row) {
        if (lp.label != top && lp.p > best) {
          best = lp.p;
          second = lp.label;
        }
      }
    } else {
      second = o->noun;
    }
    const double m = rng.uniform(noise.band_low, noise.band_high);
    p.belief = {{top, m}, {second, 1.0 - m}};
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

}  // namespace

std::optional<std::string> match(const AnchorSpace& space, const Percept& candidate, const MatchSettings& settings,
                                 const GridSpec& grid, const std::vector<std::string>& exclude) {
  const double radius = settings.radius_cells * grid.cell_size;
  const Anchor* best = nullptr;
  double best_d = 0.0;
  for (const auto& a : space.anchors()) {
    if (std::find(exclude.begin(), exclude.end(), a.id) != exclude.end()) continue;
    const double d = distance(a.position, candidate.position);
    if (d > radius || jaccard(a.attributes, candidate.attributes) < settings.attribute_overlap) continue;
    if (!best || d < best_d || (d == best_d && a.id < best->id)) {
      best = &a;
      best_d = d;
    }
  }
  return best ? std::optional<std::string>(best->id) : std::nullopt;
}

void process_frame(AnchorSpace& space, const std::vector<Percept>& percepts, const MatchSettings& settings,
                   const GridSpec& grid, int time) {
  space.set_time(time);
  std::vector<std::string> claimed;
  std::vector<const Percept*> unmatched;
  for (const auto& p : percepts) {
    if (auto id = match(space, p, settings, grid, claimed)) {
      space.re_acquire(p, *id);
      claimed.push_back(*id);
    } else {
      unmatched.push_back(&p);
    }
  }
  for (const auto* p : unmatched) space.acquire(*p);
}

SceneState anchors_to_scene(const AnchorSpace& space, const LabelSelection& selection, const GridSpec& grid,
                            const std::optional<std::string>& held) {
  SceneState s;
  s.grid = grid;
  std::set<Cell> used;
  for (const auto& a : space.anchors()) {
    ObjectInstance o;
    o.id = a.id;
    auto it = selection.find(a.id);
    o.noun = it != selection.end() ? it->second : a.top_label();
    o.attributes = a.attributes;
    o.position = a.position;
    const bool is_held = held && *held == a.id;
    if (is_held) {
      o.cell = Cell{-1, -1, -1};  // off the table
    } else {
      o.cell = cell_of(a.position, grid);
      if (!used.insert(o.cell).second) throw Error(ErrorCode::CellCollision, "two anchors map to one cell at " + a.id);
    }
    s.objects.push_back(std::move(o));
  }
  if (held) {
    if (!space.find(*held)) throw Error(ErrorCode::UnknownAnchor, "held anchor '" + *held + "' not in space");
    s.held = held;
  }
  return s;
}

}  // namespace gridground
