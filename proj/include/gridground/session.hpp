#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridground/anchoring.hpp"
#include "gridground/belief.hpp"
#include "gridground/config.hpp"
#include "gridground/neural.hpp"
#include "gridground/program.hpp"
#include "gridground/serialization.hpp"

namespace gridground {

struct ActionCommand {
  enum class Kind { PickUp, Place, NoOp };
  Kind kind = Kind::NoOp;
  std::string anchor_id;  // picked anchor, or the held anchor being placed
  Vec3 coordinate{};      // Place only
  Cell cell{};            // Place only
  std::string reason;     // NoOp only

  static ActionCommand pick_up(std::string id);
  static ActionCommand place(std::string held_id, const Vec3& where, const Cell& cell);
  static ActionCommand no_op(std::string why);
  bool operator==(const ActionCommand&) const = default;
};

std::string_view to_string(ActionCommand::Kind kind);

/// Attention map of one executed node, in the executed program's numbering.
struct NodeAttention {
  int node = 0;
  std::string op;  // the node's serialized token
  AttentionMap map;
};

struct LogEntry {
  std::int64_t step = 0;  // logical clock; one tick per logged action
  std::string instruction;
  std::string graph;      // serialized parse, empty on parser errors
  std::string posterior;  // one-line summary
  std::optional<Posterior> full_posterior;
  ActionCommand action;
};

struct InstructionResult {
  ActionCommand action;
  std::optional<ProgramGraph> graph;
  std::optional<Posterior> posterior;
  std::optional<ProgramGraph> executed;  // the locate program that was grounded
  std::vector<NodeAttention> attention;
};

/// The part of a session that replay starts from.
struct SessionSnapshot {
  AnchorSpace space;
  std::optional<std::string> held;
};

/// One live instruction loop. Not thread-safe; callers serialize access.
class Session {
 public:
  Session(Config config, ParamStore params, SessionSnapshot initial);

  /// parse, resolve, apply the posterior, act. Failures come back as NoOp.
  InstructionResult submit(std::string_view text);

  /// Carries out an action and logs it. Throws InvalidAction.
  void step_world(const ActionCommand& action, std::string_view instruction = {}, std::string graph = {},
                  std::optional<Posterior> posterior = std::nullopt);

  const AnchorSpace& space() const { return space_; }
  const std::optional<std::string>& held() const { return held_; }
  const std::vector<LogEntry>& log() const { return log_; }
  const SessionSnapshot& initial() const { return initial_; }
  const Config& config() const { return config_; }
  const ParamStore& params() const { return params_; }
  std::int64_t clock() const { return clock_; }

  /// Cells taken by placed (not held) anchors.
  std::vector<Cell> occupied() const;

 private:
  InstructionResult ground(const ProgramGraph& locate_program, bool attach_maps);
  int revision_k(const ProgramGraph& graph) const;

  Config config_;
  ParamStore params_;
  SessionSnapshot initial_;
  AnchorSpace space_;
  std::optional<std::string> held_;
  std::vector<LogEntry> log_;
  std::int64_t clock_ = 0;
};

/// First free in-grid cell on the ray from `target` along the preposition's
/// direction. Throws NoFreePosition.
Cell position_compute(const Cell& target, const Preposition& preposition, const GridSpec& grid,
                      const std::vector<Cell>& occupied);

/// Re-runs every logged instruction from the initial snapshot and checks
/// actions and posteriors bit for bit.
bool replay_matches(const Session& session);

/// The scripted pick-and-place scene: two balls, a can, and a black object
/// perceived as pot 0.6 / mug 0.4.
SessionSnapshot showcase_snapshot(const GridSpec& grid);

/// Ground truth from the generator, perceived once through the noise model.
SessionSnapshot generated_snapshot(const Config& config, std::uint64_t seed);

/// Reads the "anchors" and "held" fields of a snapshot document (the shape
/// snapshot_json writes). Id counters resume past the largest id seen.
SessionSnapshot snapshot_from_json(const Json& j);

Json to_json(const Anchor& a, const GridSpec& grid);
Json to_json(const Posterior& p);
Json to_json(const ActionCommand& a);
Json to_json(const LogEntry& e);
Json to_json(const NodeAttention& n);
Json snapshot_json(const Session& s);
Json result_json(const InstructionResult& r);
std::string posterior_summary(const Posterior& p);

}  // namespace gridground
