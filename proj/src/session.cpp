#include "gridground/session.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "gridground/errors.hpp"
#include "gridground/parser.hpp"
#include "gridground/synthetic.hpp"

namespace gridground {

ActionCommand ActionCommand::pick_up(std::string id) {
  ActionCommand a;
  a.kind = Kind::PickUp;
  a.anchor_id = std::move(id);
  return a;
}

ActionCommand ActionCommand::place(std::string held_id, const Vec3& where, const Cell& cell) {
  ActionCommand a;
  a.kind = Kind::Place;
  a.anchor_id = std::move(held_id);
  a.coordinate = where;
  a.cell = cell;
  return a;
}

ActionCommand ActionCommand::no_op(std::string why) {
  ActionCommand a;
  a.reason = std::move(why);
  return a;
}

std::string_view to_string(ActionCommand::Kind kind) {
  switch (kind) {
    case ActionCommand::Kind::PickUp: return "pickup";
    case ActionCommand::Kind::Place: return "place";
    case ActionCommand::Kind::NoOp: return "noop";
  }
  return "?";
}

Session::Session(Config config, ParamStore params, SessionSnapshot initial)
    : config_(std::move(config)), params_(std::move(params)), initial_(std::move(initial)),
      space_(initial_.space), held_(initial_.held) {
  if (params_.vocab_hash() != config_.vocab.hash()) throw Error(ErrorCode::VocabMismatch, "weights belong to another vocabulary");
  space_.validate();
  if (held_ && !space_.find(*held_)) throw Error(ErrorCode::UnknownAnchor, "held anchor " + *held_ + " is not in the space");
  // cell exclusivity up front; later steps keep it
  anchors_to_scene(space_, {}, config_.grid, held_);
}

std::vector<Cell> Session::occupied() const {
  std::vector<Cell> cells;
  for (const auto& a : space_.anchors()) {
    if (held_ && a.id == *held_) continue;
    cells.push_back(cell_of(a.position, config_.grid));
  }
  std::sort(cells.begin(), cells.end());
  return cells;
}

int Session::revision_k(const ProgramGraph& graph) const {
  if (config_.revision == RevisionMode::Always) return config_.belief.top_k;
  // trigger only when some mentioned noun is nobody's best guess
  for (const auto& n : graph.nodes()) {
    if (n.kind != NodeKind::Detect || !config_.vocab.is_noun(n.symbol)) continue;
    const bool someone = std::any_of(space_.anchors().begin(), space_.anchors().end(), [&](const Anchor& a) {
      return (!held_ || a.id != *held_) && a.top_label() == n.symbol;
    });
    if (!someone) return config_.belief.top_k;
  }
  return 1;
}

InstructionResult Session::ground(const ProgramGraph& program, bool attach_maps) {
  InstructionResult r;
  r.executed = program;
  const BeliefSettings settings{revision_k(program), config_.belief.max_anchors};
  r.posterior = resolve(space_, program, params_, config_.vocab, config_.grid, settings, std::nullopt, held_);
  if (attach_maps) {
    const Posterior& post = *r.posterior;
    LabelSelection sel;
    const auto& labels = post.configurations.at(post.map_configuration).labels;
    for (std::size_t a = 0; a < post.anchor_ids.size(); ++a) sel[post.anchor_ids[a]] = labels[a];
    const SceneState scene = anchors_to_scene(space_, sel, config_.grid, held_);
    const ExecutionTrace trace = execute(program, encode_scene(scene, config_.vocab), config_.grid, config_.vocab, params_);
    std::istringstream tokens(program.serialize());
    std::string tok;
    for (int i = 0; i < program.size() && tokens >> tok; ++i) {
      NodeAttention na{i, tok, trace.nodes[static_cast<std::size_t>(i)].output};
      if (i == program.root()) na.map.values = trace.distribution;
      r.attention.push_back(std::move(na));
    }
  }
  return r;
}

namespace {

ProgramGraph locate_of(const ProgramGraph& graph, int np_root) {
  std::vector<Node> nodes = graph.subgraph(np_root).nodes();
  const int root = static_cast<int>(nodes.size()) - 1;
  nodes.push_back(Node{NodeKind::Locate, "", {root}});
  return ProgramGraph(std::move(nodes));
}

std::optional<std::string> head_noun(const ProgramGraph& graph, const Vocabulary& vocab) {
  for (const auto& n : graph.nodes()) {
    if (n.kind == NodeKind::Detect && vocab.is_noun(n.symbol)) return n.symbol;
  }
  return std::nullopt;
}

}  // namespace

InstructionResult Session::submit(std::string_view text) {
  InstructionResult r;
  std::string graph_text;
  try {
    const ProgramGraph g = parse(text, config_.vocab);
    r.graph = g;
    graph_text = g.serialize();
    if (g.is_locate()) {
      if (held_) {
        r.action = ActionCommand::no_op("hand occupied");
      } else {
        InstructionResult gr = ground(g, true);
        r.posterior = std::move(gr.posterior);
        r.executed = std::move(gr.executed);
        r.attention = std::move(gr.attention);
        if (r.posterior->degenerate) {
          r.action = ActionCommand::no_op("degenerate evidence");
        } else {
          space_ = apply_posterior(space_, *r.posterior);
          r.action = r.posterior->map_grounding ? ActionCommand::pick_up(*r.posterior->map_grounding)
                                                : ActionCommand::no_op("nothing to ground");
        }
      }
    } else {
      const Node& root = g.root_node();
      const Node& source = g.node(root.inputs[0]);
      if (!held_) {
        r.action = ActionCommand::no_op(source.kind == NodeKind::Held ? "unresolvable pronoun" : "hand empty");
      } else if (auto noun = source.kind == NodeKind::Locate ? head_noun(g.subgraph(root.inputs[0]), config_.vocab)
                                                             : std::nullopt;
                 noun && belief_of(space_.get(*held_).belief, *noun) <= 0.0) {
        r.action = ActionCommand::no_op("held object is not a " + *noun);
      } else {
        InstructionResult gr = ground(locate_of(g, root.inputs[1]), true);
        r.posterior = std::move(gr.posterior);
        r.executed = std::move(gr.executed);
        r.attention = std::move(gr.attention);
        if (r.posterior->degenerate) {
          r.action = ActionCommand::no_op("degenerate evidence");
        } else if (!r.posterior->map_grounding) {
          space_ = apply_posterior(space_, *r.posterior);
          r.action = ActionCommand::no_op("nothing to ground");
        } else {
          space_ = apply_posterior(space_, *r.posterior);
          const Cell target = cell_of(space_.get(*r.posterior->map_grounding).position, config_.grid);
          try {
            const Cell c = position_compute(target, config_.vocab.preposition(root.symbol), config_.grid, occupied());
            r.action = ActionCommand::place(*held_, cell_center(c, config_.grid), c);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::NoFreePosition) throw;
            r.action = ActionCommand::no_op(e.what());
          }
        }
      }
    }
  } catch (const Error& e) {
    r.action = ActionCommand::no_op(e.what());
  }
  try {
    step_world(r.action, text, graph_text, r.posterior);
  } catch (const Error& e) {
    r.action = ActionCommand::no_op(e.what());
    step_world(r.action, text, graph_text, r.posterior);
  }
  return r;
}

void Session::step_world(const ActionCommand& action, std::string_view instruction, std::string graph,
                         std::optional<Posterior> posterior) {
  using K = ActionCommand::Kind;
  if (action.kind == K::PickUp) {
    if (held_) throw Error(ErrorCode::InvalidAction, "hand already holds " + *held_);
    if (!space_.find(action.anchor_id)) throw Error(ErrorCode::InvalidAction, "no anchor " + action.anchor_id);
    held_ = action.anchor_id;
  } else if (action.kind == K::Place) {
    if (!held_) throw Error(ErrorCode::InvalidAction, "nothing is held");
    if (action.anchor_id != *held_) throw Error(ErrorCode::InvalidAction, action.anchor_id + " is not the held object");
    if (!config_.grid.contains(action.cell)) throw Error(ErrorCode::InvalidAction, "placement outside the grid");
    const auto occ = occupied();
    if (std::binary_search(occ.begin(), occ.end(), action.cell)) {
      throw Error(ErrorCode::InvalidAction, "placement cell is occupied");
    }
    Anchor* a = space_.find(*held_);
    a->position = action.coordinate;
    held_.reset();
  }
  LogEntry e;
  e.step = clock_++;
  e.instruction = std::string(instruction);
  e.graph = std::move(graph);
  if (posterior) e.posterior = posterior_summary(*posterior);
  e.full_posterior = std::move(posterior);
  e.action = action;
  log_.push_back(std::move(e));
}

Cell position_compute(const Cell& target, const Preposition& preposition, const GridSpec& grid,
                      const std::vector<Cell>& occupied) {
  if (preposition.direction == Cell{}) throw Error(ErrorCode::InvalidAction, "preposition has no direction");
  for (int t = 1;; ++t) {
    const Cell c = target + preposition.direction * t;
    if (!grid.contains(c)) throw Error(ErrorCode::NoFreePosition, "no free cell " + preposition.surface + " the target");
    if (std::find(occupied.begin(), occupied.end(), c) == occupied.end()) return c;
  }
}

namespace {

bool same_posterior(const std::optional<Posterior>& a, const std::optional<Posterior>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->anchor_ids == b->anchor_ids && a->labels == b->labels && a->configurations == b->configurations &&
         a->config_prior == b->config_prior && a->likelihood == b->likelihood &&
         a->config_posterior == b->config_posterior && a->grounding == b->grounding &&
         a->map_grounding == b->map_grounding && a->map_configuration == b->map_configuration &&
         a->degenerate == b->degenerate;
}

}  // namespace

bool replay_matches(const Session& session) {
  Session again(session.config(), session.params(), session.initial());
  for (const auto& e : session.log()) {
    if (!e.instruction.empty()) {
      again.submit(e.instruction);
    } else {
      again.step_world(e.action);
    }
    const LogEntry& r = again.log().back();
    if (r.step != e.step || r.graph != e.graph || r.posterior != e.posterior || !(r.action == e.action) ||
        !same_posterior(r.full_posterior, e.full_posterior)) {
      return false;
    }
  }
  return true;
}

SessionSnapshot showcase_snapshot(const GridSpec& grid) {
  struct Item {
    LabelBelief belief;
    std::vector<std::string> attributes;
    Cell cell;
  };
  const std::vector<Item> items{
      {{{"ball", 1.0}}, {"red"}, {3, 2, 0}},
      {{{"ball", 1.0}}, {"red"}, {1, 4, 0}},
      {{{"can", 1.0}}, {"blue"}, {3, 3, 0}},
      {{{"pot", 0.6}, {"mug", 0.4}}, {"black"}, {5, 4, 0}},
  };
  SessionSnapshot s;
  for (const auto& it : items) {
    if (!grid.contains(it.cell)) throw Error(ErrorCode::InvalidScene, "showcase needs at least a 6 x 6 x 1 grid");
    s.space.acquire(Percept{it.belief, it.attributes, cell_center(it.cell, grid), ""});
  }
  return s;
}

SessionSnapshot generated_snapshot(const Config& config, std::uint64_t seed) {
  const Sample sample = generate_sample(6, nullptr, config.vocab, config.grid, config.generator, seed);
  NoiseModel noise = config.noise;
  noise.seed = derive_seed(noise.seed, 0x5ce4e, seed);
  SessionSnapshot s;
  process_frame(s.space, simulate_perception(sample.scene, noise, 0), config.matching, config.grid, 0);
  return s;
}

SessionSnapshot snapshot_from_json(const Json& j) {
  SessionSnapshot s;
  std::map<std::string, int> counters;
  try {
    for (const auto& a : j.at("anchors")) {
      Anchor anchor;
      anchor.id = a.at("id").get<std::string>();
      for (const auto& lp : a.at("belief")) anchor.belief.push_back({lp.at(0).get<std::string>(), lp.at(1).get<double>()});
      sort_belief(anchor.belief);
      anchor.attributes = a.value("attributes", std::vector<std::string>{});
      anchor.position = a.at("position").get<Vec3>();
      anchor.last_seen = a.value("last_seen", 0);
      const auto dash = anchor.id.rfind('-');
      if (dash != std::string::npos) {
        try {
          int& c = counters[anchor.id.substr(0, dash)];
          c = std::max(c, std::stoi(anchor.id.substr(dash + 1)));
        } catch (const std::exception&) {
        }
      }
      s.space.anchors().push_back(std::move(anchor));
    }
    if (j.contains("held") && !j.at("held").is_null()) s.held = j.at("held").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("anchor snapshot: ") + e.what());
  }
  s.space.set_counters(std::move(counters));
  s.space.validate();
  return s;
}

namespace {

Json belief_json(const LabelBelief& b) {
  Json out = Json::array();
  for (const auto& lp : b) out.push_back({lp.label, lp.p});
  return out;
}

}  // namespace

Json to_json(const Anchor& a, const GridSpec& grid) {
  Json cell = nullptr;
  try {
    cell = cell_of(a.position, grid);
  } catch (const Error&) {
  }
  return Json{{"id", a.id},         {"top", a.top_label()},  {"belief", belief_json(a.belief)},
              {"attributes", a.attributes}, {"position", a.position}, {"cell", cell},
              {"last_seen", a.last_seen}};
}

Json to_json(const Posterior& p) {
  Json anchors = Json::array();
  for (std::size_t a = 0; a < p.anchor_ids.size(); ++a) {
    anchors.push_back({{"id", p.anchor_ids[a]}, {"labels", belief_json(p.labels[a])}, {"grounding", p.grounding[a]}});
  }
  Json configs = Json::array();
  for (std::size_t c = 0; c < p.configurations.size(); ++c) {
    configs.push_back({{"labels", p.configurations[c].labels},
                       {"prior", p.config_prior[c]},
                       {"likelihood", p.likelihood[c]},
                       {"posterior", p.config_posterior[c]}});
  }
  return Json{{"anchors", anchors},
              {"configurations", configs},
              {"map_grounding", p.map_grounding ? Json(*p.map_grounding) : Json(nullptr)},
              {"map_configuration", p.map_configuration},
              {"degenerate", p.degenerate}};
}

Json to_json(const ActionCommand& a) {
  Json j{{"kind", to_string(a.kind)}};
  switch (a.kind) {
    case ActionCommand::Kind::PickUp: j["anchor"] = a.anchor_id; break;
    case ActionCommand::Kind::Place:
      j["anchor"] = a.anchor_id;
      j["coordinate"] = a.coordinate;
      j["cell"] = a.cell;
      break;
    case ActionCommand::Kind::NoOp: j["reason"] = a.reason; break;
  }
  return j;
}

Json to_json(const LogEntry& e) {
  return Json{{"step", e.step},
              {"instruction", e.instruction},
              {"graph", e.graph},
              {"posterior", e.posterior},
              {"action", to_json(e.action)}};
}

Json to_json(const NodeAttention& n) {
  return Json{{"node", n.node}, {"op", n.op}, {"values", n.map.values}};
}

Json snapshot_json(const Session& s) {
  Json anchors = Json::array();
  for (const auto& a : s.space().anchors()) anchors.push_back(to_json(a, s.config().grid));
  Json log = Json::array();
  for (const auto& e : s.log()) log.push_back(to_json(e));
  return Json{{"grid", s.config().grid},
              {"clock", s.clock()},
              {"held", s.held() ? Json(*s.held()) : Json(nullptr)},
              {"anchors", anchors},
              {"log", log}};
}

Json result_json(const InstructionResult& r) {
  Json attention = Json::array();
  for (const auto& n : r.attention) attention.push_back(to_json(n));
  return Json{{"action", to_json(r.action)},
              {"graph", r.graph ? Json(r.graph->serialize()) : Json(nullptr)},
              {"executed", r.executed ? Json(r.executed->serialize()) : Json(nullptr)},
              {"posterior", r.posterior ? to_json(*r.posterior) : Json(nullptr)},
              {"attention", attention}};
}

std::string posterior_summary(const Posterior& p) {
  std::string out;
  char buf[64];
  for (std::size_t a = 0; a < p.anchor_ids.size(); ++a) {
    if (p.labels[a].size() < 2) continue;  // nothing was in doubt
    if (!out.empty()) out += "; ";
    out += p.anchor_ids[a];
    for (const auto& lp : p.labels[a]) {
      std::snprintf(buf, sizeof buf, " %s=%.4f", lp.label.c_str(), lp.p);
      out += buf;
    }
  }
  if (!out.empty()) out += "; ";
  out += "map=" + (p.map_grounding ? *p.map_grounding : std::string("none"));
  if (p.degenerate) out += " degenerate";
  return out;
}

}  // namespace gridground
