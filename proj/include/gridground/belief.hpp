#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gridground/anchoring.hpp"
#include "gridground/neural.hpp"
#include "gridground/program.hpp"

namespace gridground {

struct BeliefSettings {
  int top_k = 2;
  int max_anchors = 12;
};

/// One label per participating anchor, parallel to ConfigurationSet::anchor_ids.
struct LabelConfiguration {
  std::vector<std::string> labels;
  bool operator==(const LabelConfiguration&) const = default;
};

struct ConfigurationSet {
  int k = 2;
  std::vector<std::string> anchor_ids;
  std::vector<LabelBelief> candidates;  // per anchor: its top-k labels with prior mass
  std::vector<LabelConfiguration> configurations;

  /// Label selection usable with anchors_to_scene.
  LabelSelection selection(std::size_t config) const;
};

/// Cartesian product of each anchor's top-k labels (labels with positive
/// mass only), first anchor slowest. The held anchor, if any, does not take
/// part. Throws TooManyAnchors.
ConfigurationSet enumerate_configurations(const AnchorSpace& space, int k, int max_anchors = 12,
                                          const std::optional<std::string>& held = std::nullopt);

/// Product of the anchors' belief masses for their assigned labels.
double config_prior(const ConfigurationSet& set, std::size_t config);
/// config_prior over the whole set, renormalized to sum to one.
std::vector<double> config_priors(const ConfigurationSet& set);

/// Grounding evidence for one configuration: p(g | c, i) and the Locate mass
/// on each participating anchor's cell.
struct Evidence {
  double likelihood = 0.0;
  std::vector<double> anchor_mass;
};

using EvidenceFn = std::function<Evidence(std::size_t config)>;

struct Posterior {
  std::vector<std::string> anchor_ids;
  std::vector<LabelBelief> labels;  // per anchor, over its candidate labels
  std::vector<LabelConfiguration> configurations;
  std::vector<double> config_prior;
  std::vector<double> likelihood;
  std::vector<double> config_posterior;
  std::vector<double> grounding;  // per anchor: posterior-weighted Locate mass
  std::optional<std::string> map_grounding;
  std::size_t map_configuration = 0;
  bool degenerate = false;  // all likelihoods zero; posterior is the prior
};

/// posterior(c) ~ prior(c) * likelihood(c); per-anchor label posterior is
/// the marginal over configurations assigning that label.
Posterior resolve_with(const ConfigurationSet& set, const EvidenceFn& evidence);

/// Evidence from running the grounder on each configuration's scene. With a
/// target the likelihood is the Locate mass on the target anchor's cell,
/// otherwise the mass on all anchor-occupied cells.
EvidenceFn grounder_evidence(const ConfigurationSet& set, const AnchorSpace& space, const ProgramGraph& graph,
                             const ParamStore& params, const Vocabulary& vocab, const GridSpec& grid,
                             const std::optional<std::string>& target, const std::optional<std::string>& held);

double config_likelihood(const ConfigurationSet& set, std::size_t config, const AnchorSpace& space,
                         const ProgramGraph& graph, const ParamStore& params, const Vocabulary& vocab,
                         const GridSpec& grid, const std::optional<std::string>& target,
                         const std::optional<std::string>& held = std::nullopt);

/// Full pipeline for a locate-rooted program.
Posterior resolve(const AnchorSpace& space, const ProgramGraph& graph, const ParamStore& params,
                  const Vocabulary& vocab, const GridSpec& grid, const BeliefSettings& settings,
                  const std::optional<std::string>& target = std::nullopt,
                  const std::optional<std::string>& held = std::nullopt);

enum class ApplyPolicy {
  Soft,  // belief over the candidates becomes the posterior; mass outside them is kept
  Hard,  // the MAP label takes the candidates' whole mass
};

AnchorSpace apply_posterior(const AnchorSpace& space, const Posterior& posterior, ApplyPolicy policy = ApplyPolicy::Soft);

}  // namespace gridground
