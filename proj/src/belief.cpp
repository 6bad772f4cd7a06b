#include "gridground/belief.hpp"

#include <algorithm>

#include "gridground/errors.hpp"

namespace gridground {

LabelSelection ConfigurationSet::selection(std::size_t config) const {
  LabelSelection sel;
  const auto& c = configurations.at(config);
  for (std::size_t a = 0; a < anchor_ids.size(); ++a) sel[anchor_ids[a]] = c.labels[a];
  return sel;
}

ConfigurationSet enumerate_configurations(const AnchorSpace& space, int k, int max_anchors,
                                          const std::optional<std::string>& held) {
  if (k < 1) throw Error(ErrorCode::FormatError, "k must be at least 1");
  ConfigurationSet set;
  set.k = k;
  for (const auto& a : space.anchors()) {
    if (held && a.id == *held) continue;
    LabelBelief top;
    for (const auto& lp : a.belief) {
      if (static_cast<int>(top.size()) == k) break;
      if (lp.p > 0.0) top.push_back(lp);
    }
    if (top.empty()) throw Error(ErrorCode::InvalidScene, "anchor " + a.id + " has no labels");
    set.anchor_ids.push_back(a.id);
    set.candidates.push_back(std::move(top));
  }
  if (static_cast<int>(set.anchor_ids.size()) > max_anchors) {
    throw Error(ErrorCode::TooManyAnchors,
                std::to_string(set.anchor_ids.size()) + " anchors exceed the cap of " + std::to_string(max_anchors));
  }
  std::vector<std::size_t> digit(set.anchor_ids.size(), 0);
  while (true) {
    LabelConfiguration c;
    for (std::size_t a = 0; a < digit.size(); ++a) c.labels.push_back(set.candidates[a][digit[a]].label);
    set.configurations.push_back(std::move(c));
    std::size_t pos = digit.size();
    while (pos > 0) {
      --pos;
      if (++digit[pos] < set.candidates[pos].size()) break;
      digit[pos] = 0;
      if (pos == 0) return set;
    }
    if (digit.empty()) return set;
  }
}

double config_prior(const ConfigurationSet& set, std::size_t config) {
  const auto& c = set.configurations.at(config);
  double p = 1.0;
  for (std::size_t a = 0; a < c.labels.size(); ++a) p *= belief_of(set.candidates[a], c.labels[a]);
  return p;
}

std::vector<double> config_priors(const ConfigurationSet& set) {
  std::vector<double> out(set.configurations.size());
  double z = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) z += out[i] = config_prior(set, i);
  for (double& v : out) v /= z;
  return out;
}

Posterior resolve_with(const ConfigurationSet& set, const EvidenceFn& evidence) {
  Posterior post;
  post.anchor_ids = set.anchor_ids;
  post.configurations = set.configurations;
  post.config_prior = config_priors(set);
  const std::size_t n_config = set.configurations.size();
  const std::size_t n_anchor = set.anchor_ids.size();
  std::vector<Evidence> ev;
  ev.reserve(n_config);
  for (std::size_t c = 0; c < n_config; ++c) {
    ev.push_back(evidence(c));
    post.likelihood.push_back(ev.back().likelihood);
  }

  post.config_posterior.resize(n_config);
  double z = 0.0;
  for (std::size_t c = 0; c < n_config; ++c) z += post.config_posterior[c] = post.config_prior[c] * post.likelihood[c];
  if (!(z > 0.0)) {
    post.degenerate = true;
    post.config_posterior = post.config_prior;
  } else {
    for (double& v : post.config_posterior) v /= z;
  }

  post.labels.resize(n_anchor);
  for (std::size_t a = 0; a < n_anchor; ++a) {
    for (const auto& lp : set.candidates[a]) post.labels[a].push_back({lp.label, 0.0});
  }
  for (std::size_t c = 0; c < n_config; ++c) {
    for (std::size_t a = 0; a < n_anchor; ++a) {
      for (auto& lp : post.labels[a]) {
        if (lp.label == set.configurations[c].labels[a]) lp.p += post.config_posterior[c];
      }
    }
  }

  post.grounding.assign(n_anchor, 0.0);
  for (std::size_t c = 0; c < n_config; ++c) {
    const auto& mass = ev[c].anchor_mass;
    for (std::size_t a = 0; a < n_anchor && a < mass.size(); ++a) post.grounding[a] += post.config_posterior[c] * mass[a];
  }
  std::size_t best = 0;
  for (std::size_t a = 1; a < n_anchor; ++a) {
    if (post.grounding[a] > post.grounding[best]) best = a;
  }
  if (n_anchor > 0) post.map_grounding = post.anchor_ids[best];
  std::size_t best_c = 0;
  for (std::size_t c = 1; c < n_config; ++c) {
    if (post.config_posterior[c] > post.config_posterior[best_c]) best_c = c;
  }
  post.map_configuration = best_c;
  return post;
}

EvidenceFn grounder_evidence(const ConfigurationSet& set, const AnchorSpace& space, const ProgramGraph& graph,
                             const ParamStore& params, const Vocabulary& vocab, const GridSpec& grid,
                             const std::optional<std::string>& target, const std::optional<std::string>& held) {
  if (!graph.is_locate()) throw Error(ErrorCode::MalformedPhrase, "belief revision needs a locate-rooted program");
  std::optional<std::size_t> target_ix;
  if (target) {
    for (std::size_t a = 0; a < set.anchor_ids.size(); ++a) {
      if (set.anchor_ids[a] == *target) target_ix = a;
    }
    if (!target_ix) throw Error(ErrorCode::UnknownAnchor, "target '" + *target + "' is not a participating anchor");
  }
  return [&set, &space, &graph, &params, &vocab, grid, target_ix, held](std::size_t config) {
    const SceneState scene = anchors_to_scene(space, set.selection(config), grid, held);
    const GridTensor x = encode_scene(scene, vocab);
    const ExecutionTrace t = execute(graph, x, grid, vocab, params);
    Evidence ev;
    for (const auto& id : set.anchor_ids) {
      const ObjectInstance* o = scene.find(id);
      ev.anchor_mass.push_back(t.distribution[static_cast<std::size_t>(grid.flat(o->cell))]);
    }
    if (target_ix) {
      ev.likelihood = ev.anchor_mass[*target_ix];
    } else {
      for (double m : ev.anchor_mass) ev.likelihood += m;
    }
    return ev;
  };
}

double config_likelihood(const ConfigurationSet& set, std::size_t config, const AnchorSpace& space,
                         const ProgramGraph& graph, const ParamStore& params, const Vocabulary& vocab,
                         const GridSpec& grid, const std::optional<std::string>& target,
                         const std::optional<std::string>& held) {
  return grounder_evidence(set, space, graph, params, vocab, grid, target, held)(config).likelihood;
}

Posterior resolve(const AnchorSpace& space, const ProgramGraph& graph, const ParamStore& params,
                  const Vocabulary& vocab, const GridSpec& grid, const BeliefSettings& settings,
                  const std::optional<std::string>& target, const std::optional<std::string>& held) {
  const ConfigurationSet set = enumerate_configurations(space, settings.top_k, settings.max_anchors, held);
  return resolve_with(set, grounder_evidence(set, space, graph, params, vocab, grid, target, held));
}

AnchorSpace apply_posterior(const AnchorSpace& space, const Posterior& posterior, ApplyPolicy policy) {
  AnchorSpace out = space;
  for (std::size_t a = 0; a < posterior.anchor_ids.size(); ++a) {
    Anchor* anchor = out.find(posterior.anchor_ids[a]);
    if (!anchor) throw Error(ErrorCode::UnknownAnchor, "posterior names unknown anchor " + posterior.anchor_ids[a]);
    const auto& post = posterior.labels[a];
    double candidate_mass = 0.0;
    for (const auto& lp : post) candidate_mass += belief_of(anchor->belief, lp.label);
    LabelBelief next;
    for (const auto& lp : anchor->belief) {
      const bool candidate = std::any_of(post.begin(), post.end(), [&](const LabelProb& q) { return q.label == lp.label; });
      if (!candidate) next.push_back(lp);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < post.size(); ++i) {
      if (post[i].p > post[best].p) best = i;
    }
    for (std::size_t i = 0; i < post.size(); ++i) {
      const double p = policy == ApplyPolicy::Soft ? candidate_mass * post[i].p : (i == best ? candidate_mass : 0.0);
      next.push_back({post[i].label, p});
    }
    sort_belief(next);
    anchor->belief = std::move(next);
  }
  return out;
}

}  // namespace gridground
