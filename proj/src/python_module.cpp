#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gridground/config.hpp"
#include "gridground/errors.hpp"
#include "gridground/parser.hpp"
#include "gridground/session.hpp"
#include "gridground/trainer.hpp"

namespace py = pybind11;
using namespace gridground;

namespace {

// nlohmann -> python via the json module; payloads are small.
py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json sample_json(const Sample& s) {
  return Json{{"scenario", s.scenario}, {"family", s.family},     {"seed", s.seed},
              {"instruction", s.instruction}, {"graph", s.gold_graph.serialize()},
              {"target", s.gold_target},  {"target_id", s.target_id}, {"scene", s.scene}};
}

Json report_json(const TrainReport& r) {
  Json stages = Json::array();
  for (const auto& st : r.stages) {
    Json pts = Json::array();
    for (const auto& p : st.points) {
      pts.push_back({{"samples_seen", p.samples_seen}, {"stage_samples", p.stage_samples}, {"error", p.error}, {"ema", p.ema}});
    }
    stages.push_back({{"stage", st.stage}, {"scenario", st.scenario}, {"samples", st.samples}, {"converged", st.converged},
                      {"points", pts}});
  }
  return Json{{"stages", stages}};
}

SessionSnapshot opening(const Config& c, const std::string& fixture, std::optional<std::uint64_t> seed) {
  if (seed) return generated_snapshot(c, *seed);
  if (fixture != "showcase") throw Error(ErrorCode::FormatError, "unknown fixture '" + fixture + "'");
  return showcase_snapshot(c.grid);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "grid-world language grounding with belief revision";

  static py::exception<Error> error(m, "GridgroundError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<Config>(m, "Config")
      .def_static("load", &load_config, py::arg("path"))
      .def_static("default", &default_config)
      .def_static("from_json", [](const std::string& text) { return config_from_json(Json::parse(text)); })
      .def("to_dict", [](const Config& c) { return to_py(config_to_json(c)); })
      .def_property_readonly("grid", [](const Config& c) { return std::make_tuple(c.grid.width, c.grid.height, c.grid.layers); })
      .def_property_readonly("nouns", [](const Config& c) { return c.vocab.nouns(); })
      .def_property_readonly("adjectives", [](const Config& c) { return c.vocab.adjectives(); });

  py::class_<ParamStore>(m, "Params")
      .def_static("initialized", [](const Config& c, std::uint64_t seed) { return ParamStore::initialized(c.vocab, c.grid, seed); },
                  py::arg("config"), py::arg("seed"))
      .def_static("indicator", [](const Config& c, double scale) { return indicator_params(c.vocab, c.grid, scale); },
                  py::arg("config"), py::arg("scale") = 10.0)
      .def_static("load", [](const std::string& path, const Config& c) { return load_weights(path, c.vocab); },
                  py::arg("path"), py::arg("config"))
      .def("save", [](const ParamStore& p, const std::string& path) { save_weights(p, path); }, py::arg("path"))
      .def("__len__", [](const ParamStore& p) { return p.values().size(); })
      .def_property_readonly("values", [](const ParamStore& p) { return p.values(); })
      .def_property_readonly("steps", &ParamStore::step_count);

  m.def("parse", [](const std::string& text, const Config& c) { return parse(text, c.vocab).serialize(); },
        py::arg("text"), py::arg("config"), "Instruction to serialized program graph.");
  m.def("expression", [](const std::string& graph) { return ProgramGraph::deserialize(graph).to_expression(); },
        py::arg("graph"));
  m.def(
      "generate",
      [](const Config& c, int scenario, std::size_t count, std::uint64_t seed, bool constrained) {
        const auto cons = training_constraints(c);
        py::list out;
        for (const auto& s : generate_batch(scenario, constrained ? &cons : nullptr, c.vocab, c.grid, c.generator, seed,
                                            static_cast<std::uint64_t>(scenario), count)) {
          out.append(to_py(sample_json(s)));
        }
        return out;
      },
      py::arg("config"), py::arg("scenario"), py::arg("count"), py::arg("seed"), py::arg("constrained") = false);
  m.def(
      "evaluate",
      [](const ParamStore& p, const Config& c, int scenario, std::size_t count, std::uint64_t seed) {
        const auto samples = generate_batch(scenario, nullptr, c.vocab, c.grid, c.generator, seed,
                                            static_cast<std::uint64_t>(scenario), count);
        py::gil_scoped_release release;
        return evaluate(p, samples, c.vocab);
      },
      py::arg("params"), py::arg("config"), py::arg("scenario"), py::arg("count"), py::arg("seed"));
  m.def(
      "train",
      [](const Config& c, ParamStore& p, std::vector<int> scenarios, std::int64_t max_samples, std::uint64_t seed) {
        CurriculumConfig cc = c.curriculum;
        if (!scenarios.empty()) cc.scenario_order = std::move(scenarios);
        if (max_samples > 0) cc.max_samples = max_samples;
        cc.seed = seed;
        TrainReport r;
        {
          py::gil_scoped_release release;
          r = train_curriculum(cc, c.vocab, c.grid, c.generator, training_constraints(c), p);
        }
        return to_py(report_json(r));
      },
      py::arg("config"), py::arg("params"), py::arg("scenarios") = std::vector<int>{}, py::arg("max_samples") = 0,
      py::arg("seed") = 1, "Runs the curriculum in place on params and returns the learning curve.");

  py::class_<Session>(m, "Session")
      .def(py::init([](const Config& c, const ParamStore& p, const std::string& fixture, std::optional<std::uint64_t> seed) {
             return Session(c, p, opening(c, fixture, seed));
           }),
           py::arg("config"), py::arg("params"), py::arg("fixture") = "showcase", py::arg("seed") = py::none())
      .def("submit", [](Session& s, const std::string& text) { return to_py(result_json(s.submit(text))); }, py::arg("text"))
      .def("state", [](const Session& s) { return to_py(snapshot_json(s)); })
      .def_property_readonly("held", [](const Session& s) { return s.held(); })
      .def("replay_matches", [](const Session& s) { return replay_matches(s); });
}
