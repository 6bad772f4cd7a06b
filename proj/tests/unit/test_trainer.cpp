#include <doctest.h>

#include <filesystem>

#include "gridground/errors.hpp"
#include "gridground/trainer.hpp"
#include "helpers.hpp"

using namespace gridground;

namespace {

struct Small {
  Vocabulary vocab = testing::tiny_vocab();
  GridSpec grid{5, 5, 2, 0.1, {}};
  GeneratorSettings gen{6, 2, 2, 1000};
  GenerationConstraints cons = make_constraints(vocab, grid, 0.75, 3);
  CurriculumConfig cfg;
  Small() {
    cfg.scenario_order = {1, 2};
    cfg.eval_period = 50;
    cfg.eval_batch = 20;
    cfg.stop_threshold = 0.2;
    cfg.max_samples = 300;
    cfg.seed = 4;
  }
};

}  // namespace

TEST_CASE("curriculum is deterministic and carries weights over") {
  Small s;
  ParamStore a = ParamStore::initialized(s.vocab, s.grid, 11);
  ParamStore b = ParamStore::initialized(s.vocab, s.grid, 11);
  std::vector<std::vector<double>> at_stage_end;
  TrainHooks hooks;
  hooks.on_stage_end = [&](const StageResult&, const ParamStore& p) { at_stage_end.push_back(p.values()); };
  const TrainReport ra = train_curriculum(s.cfg, s.vocab, s.grid, s.gen, s.cons, a, hooks);
  const TrainReport rb = train_curriculum(s.cfg, s.vocab, s.grid, s.gen, s.cons, b);
  CHECK(a.values() == b.values());
  CHECK(a.first_moment() == b.first_moment());
  REQUIRE(ra.stages.size() == 2);
  REQUIRE(at_stage_end.size() == 2);
  CHECK(at_stage_end.back() == a.values());
  CHECK(a.step_count() == ra.stages[0].samples + ra.stages[1].samples);
  for (std::size_t i = 0; i < ra.stages.size(); ++i) {
    CHECK(ra.stages[i].samples == rb.stages[i].samples);
    CHECK(ra.stages[i].converged == rb.stages[i].converged);
    CHECK(ra.stages[i].samples <= s.cfg.max_samples);
    REQUIRE(ra.stages[i].points.size() == rb.stages[i].points.size());
    for (std::size_t k = 0; k < ra.stages[i].points.size(); ++k) {
      CHECK(ra.stages[i].points[k].error == rb.stages[i].points[k].error);
      CHECK(ra.stages[i].points[k].samples_seen == rb.stages[i].points[k].samples_seen);
    }
  }
  // second stage's cumulative count starts where the first ended
  CHECK(ra.stages[1].points.front().samples_seen == ra.stages[0].samples + ra.stages[1].points.front().stage_samples);
}

TEST_CASE("ema update") {
  Small s;
  s.cfg.scenario_order = {3};
  s.cfg.max_samples = 200;
  s.cfg.stop_threshold = 1e-9;
  ParamStore p = ParamStore::initialized(s.vocab, s.grid, 2);
  const TrainReport r = train_curriculum(s.cfg, s.vocab, s.grid, s.gen, s.cons, p);
  const auto& pts = r.stages[0].points;
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].ema == pts[0].error);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(pts[i].ema == doctest::Approx(0.9 * pts[i - 1].ema + 0.1 * pts[i].error).epsilon(1e-12));
    CHECK(pts[i].stage_samples == pts[i - 1].stage_samples + 50);
  }
  CHECK_FALSE(r.stages[0].converged);
  CHECK_FALSE(r.stages[0].samples_to_threshold().has_value());
}

TEST_CASE("report files round trip") {
  TrainReport r;
  StageResult st;
  st.stage = 1;
  st.scenario = 3;
  st.samples = 1500;
  st.converged = true;
  st.points.push_back({1, 3, 500, 500, 0.25, 0.25});
  st.points.push_back({1, 3, 1000, 1000, 0.125, 0.2375});
  r.stages.push_back(st);
  const auto path = std::filesystem::temp_directory_path() / "gridground_report_test.txt";
  write_report(path, r);
  const TrainReport back = read_report(path);
  REQUIRE(back.stages.size() == 1);
  CHECK(back.stages[0].samples == 1500);
  CHECK(back.stages[0].converged);
  CHECK(back.stages[0].scenario == 3);
  REQUIRE(back.stages[0].points.size() == 2);
  CHECK(back.stages[0].points[1].error == 0.125);
  CHECK(back.stages[0].points[1].ema == 0.2375);
  CHECK(*back.stages[0].samples_to_threshold() == 1500);
  std::filesystem::remove(path);
}

TEST_CASE("invalid curriculum") {
  CurriculumConfig c;
  c.scenario_order = {7};
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.eval_period = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}
