#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "gridground/neural.hpp"
#include "gridground/synthetic.hpp"

namespace gridground {

struct CurriculumConfig {
  std::vector<int> scenario_order{1, 2, 3, 4, 5, 6};
  int eval_period = 500;
  int eval_batch = 200;
  double stop_threshold = 1e-5;
  double ema_decay = 0.9;
  std::int64_t max_samples = 200000;  // per stage
  std::uint64_t seed = 1;
  AdamSettings adam{};

  void validate() const;
};

struct CurvePoint {
  int stage = 0;
  int scenario = 0;
  std::int64_t samples_seen = 0;  // cumulative over the curriculum
  std::int64_t stage_samples = 0;
  double error = 0.0;
  double ema = 0.0;
};

struct StageResult {
  int stage = 0;
  int scenario = 0;
  std::int64_t samples = 0;
  bool converged = false;  // false means the stage hit max_samples (StageTimeout)
  std::vector<CurvePoint> points;

  /// Stage-local sample count at which the EMA first fell below the
  /// threshold, if it did.
  std::optional<std::int64_t> samples_to_threshold() const {
    return converged ? std::optional<std::int64_t>(samples) : std::nullopt;
  }
};

struct TrainReport {
  std::vector<StageResult> stages;
};

/// Fraction of locate-rooted samples whose predicted cell differs from the gold cell.
double evaluate(const ParamStore& params, const std::vector<Sample>& samples, const Vocabulary& vocab);

/// One supervised step on a sample: forward, backprop, Adam. Returns the loss.
double train_step(ParamStore& params, const Sample& sample, const Vocabulary& vocab, const AdamSettings& adam,
                  Gradients& scratch);

struct TrainHooks {
  std::function<void(const CurvePoint&, const ParamStore&)> on_point;
  std::function<void(const StageResult&, const ParamStore&)> on_stage_end;
};

/// Stages run in order on constrained samples, one Adam step per sample.
/// Every eval_period samples the model is scored on fresh unconstrained
/// samples and the moving average of the error is updated; a stage ends once
/// it falls below stop_threshold or max_samples is reached. Weights carry
/// over between stages.
TrainReport train_curriculum(const CurriculumConfig& config, const Vocabulary& vocab, const GridSpec& grid,
                             const GeneratorSettings& generator, const GenerationConstraints& constraints,
                             ParamStore& params, const TrainHooks& hooks = {});

/// Learning-curve file: one record per line, appended as training runs.
///   point <stage> <scenario> <samples_seen> <stage_samples> <error> <ema>
///   stage <stage> <scenario> <stage_samples> <converged>
inline constexpr const char* kReportHeader = "# gridground-report 1";
std::string format_point(const CurvePoint& p);
std::string format_stage(const StageResult& s);
TrainReport read_report(const std::filesystem::path& path);
void write_report(const std::filesystem::path& path, const TrainReport& report);

}  // namespace gridground
