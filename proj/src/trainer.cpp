#include "gridground/trainer.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gridground/errors.hpp"

namespace gridground {

void CurriculumConfig::validate() const {
  if (scenario_order.empty()) throw Error(ErrorCode::FormatError, "scenario order is empty");
  for (int s : scenario_order) {
    if (s < 1 || s > 6) throw Error(ErrorCode::FormatError, "scenario out of range");
  }
  if (eval_period <= 0 || eval_batch <= 0 || max_samples <= 0) throw Error(ErrorCode::FormatError, "periods must be positive");
  if (!(stop_threshold > 0.0)) throw Error(ErrorCode::FormatError, "stop threshold must be positive");
  if (!(ema_decay > 0.0 && ema_decay < 1.0)) throw Error(ErrorCode::FormatError, "ema decay must be in (0, 1)");
}

double evaluate(const ParamStore& params, const std::vector<Sample>& samples, const Vocabulary& vocab) {
  int counted = 0;
  int wrong = 0;
  for (const auto& s : samples) {
    if (!s.gold_graph.is_locate()) continue;
    const GridTensor x = encode_scene(s.scene, vocab);
    const ExecutionTrace t = execute(s.gold_graph, x, s.scene.grid, vocab, params);
    ++counted;
    wrong += t.prediction != s.scene.grid.flat(s.gold_target);
  }
  return counted == 0 ? 0.0 : static_cast<double>(wrong) / counted;
}

double train_step(ParamStore& params, const Sample& sample, const Vocabulary& vocab, const AdamSettings& adam,
                  Gradients& scratch) {
  const GridTensor x = encode_scene(sample.scene, vocab);
  const ExecutionTrace t = execute(sample.gold_graph, x, sample.scene.grid, vocab, params);
  const int gold = sample.scene.grid.flat(sample.gold_target);
  scratch.assign(params.values().size(), 0.0);
  backprop(sample.gold_graph, t, x, vocab, params, gold, scratch);
  adam_step(params, scratch, adam);
  return cross_entropy(t, gold);
}

TrainReport train_curriculum(const CurriculumConfig& config, const Vocabulary& vocab, const GridSpec& grid,
                             const GeneratorSettings& generator, const GenerationConstraints& constraints,
                             ParamStore& params, const TrainHooks& hooks) {
  config.validate();
  TrainReport report;
  Gradients scratch;
  std::int64_t total = 0;
  for (std::size_t si = 0; si < config.scenario_order.size(); ++si) {
    const int scenario = config.scenario_order[si];
    const auto stage = static_cast<int>(si) + 1;
    StageResult result;
    result.stage = stage;
    result.scenario = scenario;
    std::optional<double> ema;
    std::int64_t evals = 0;
    while (result.samples < config.max_samples) {
      const Sample s = generate_sample(scenario, &constraints, vocab, grid, generator,
                                       derive_seed(config.seed, 100 + si, static_cast<std::uint64_t>(result.samples)));
      train_step(params, s, vocab, config.adam, scratch);
      ++result.samples;
      ++total;
      if (result.samples % config.eval_period != 0) continue;
      const auto batch = generate_batch(scenario, nullptr, vocab, grid, generator,
                                        derive_seed(config.seed, 200 + si, static_cast<std::uint64_t>(evals++)), 0,
                                        static_cast<std::size_t>(config.eval_batch));
      const double err = evaluate(params, batch, vocab);
      ema = ema ? config.ema_decay * *ema + (1.0 - config.ema_decay) * err : err;
      CurvePoint p{stage, scenario, total, result.samples, err, *ema};
      result.points.push_back(p);
      if (hooks.on_point) hooks.on_point(p, params);
      if (*ema < config.stop_threshold) {
        result.converged = true;
        break;
      }
    }
    if (hooks.on_stage_end) hooks.on_stage_end(result, params);
    report.stages.push_back(std::move(result));
  }
  return report;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_point(const CurvePoint& p) {
  return "point " + std::to_string(p.stage) + " " + std::to_string(p.scenario) + " " + std::to_string(p.samples_seen) +
         " " + std::to_string(p.stage_samples) + " " + fmt_double(p.error) + " " + fmt_double(p.ema);
}

std::string format_stage(const StageResult& s) {
  return "stage " + std::to_string(s.stage) + " " + std::to_string(s.scenario) + " " + std::to_string(s.samples) + " " +
         (s.converged ? "1" : "0");
}

void write_report(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::FormatError, "cannot write " + path.string());
  out << kReportHeader << '\n';
  for (const auto& s : report.stages) {
    for (const auto& p : s.points) out << format_point(p) << '\n';
    out << format_stage(s) << '\n';
  }
}

TrainReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FormatError, "cannot read " + path.string());
  TrainReport r;
  StageResult current;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "point") {
      CurvePoint p;
      ls >> p.stage >> p.scenario >> p.samples_seen >> p.stage_samples >> p.error >> p.ema;
      if (!ls) throw Error(ErrorCode::FormatError, "bad point record: " + line);
      current.points.push_back(p);
    } else if (kind == "stage") {
      int converged = 0;
      ls >> current.stage >> current.scenario >> current.samples >> converged;
      if (!ls) throw Error(ErrorCode::FormatError, "bad stage record: " + line);
      current.converged = converged != 0;
      r.stages.push_back(std::move(current));
      current = StageResult{};
    } else {
      throw Error(ErrorCode::FormatError, "unknown report record: " + line);
    }
  }
  return r;
}

}  // namespace gridground
