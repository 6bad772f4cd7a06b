// Command-line front end. Every subcommand takes --config; randomness is
// driven only by the config seeds and --seed.
#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "gridground/config.hpp"
#include "gridground/errors.hpp"
#include "gridground/parser.hpp"
#include "gridground/server.hpp"
#include "gridground/session.hpp"

using namespace gridground;

namespace {

ParamStore weights_or_init(const Config& config, const std::string& path) {
  if (!path.empty()) return load_weights(path, config.vocab);
  std::cerr << "note: no --weights given, using untrained parameters\n";
  return ParamStore::initialized(config.vocab, config.grid, config.init_seed);
}

SessionSnapshot opening_scene(const Config& config, const std::string& fixture, std::int64_t seed,
                              const std::string& anchors_file) {
  if (!anchors_file.empty()) {
    std::ifstream in(anchors_file);
    if (!in) throw Error(ErrorCode::FormatError, "cannot read " + anchors_file);
    return snapshot_from_json(Json::parse(in));
  }
  if (seed >= 0) return generated_snapshot(config, static_cast<std::uint64_t>(seed));
  if (fixture != "showcase") throw Error(ErrorCode::FormatError, "unknown fixture '" + fixture + "'");
  return showcase_snapshot(config.grid);
}

void print_result(const InstructionResult& r, const Session& s, bool json, bool attention, bool table = false) {
  if (json) {
    Json j = result_json(r);
    if (!attention) j.erase("attention");
    std::cout << j.dump() << "\n";
    return;
  }
  const LogEntry& e = s.log().back();
  std::cout << "graph   " << (e.graph.empty() ? "-" : e.graph) << "\n";
  if (r.posterior && table) {
    const Posterior& p = *r.posterior;
    char buf[160];
    for (std::size_t c = 0; c < p.configurations.size(); ++c) {
      std::string labels;
      for (const auto& l : p.configurations[c].labels) labels += (labels.empty() ? "" : ",") + l;
      std::snprintf(buf, sizeof buf, " prior %.6f likelihood %.6f posterior %.6f", p.config_prior[c], p.likelihood[c],
                    p.config_posterior[c]);
      std::cout << "config  " << labels << buf << "\n";
    }
    for (std::size_t a = 0; a < p.anchor_ids.size(); ++a) {
      std::cout << "anchor  " << p.anchor_ids[a];
      for (const auto& lp : p.labels[a]) {
        std::snprintf(buf, sizeof buf, " %s=%.6f", lp.label.c_str(), lp.p);
        std::cout << buf;
      }
      std::snprintf(buf, sizeof buf, " grounding=%.6f", p.grounding[a]);
      std::cout << buf << "\n";
    }
    std::cout << "map     " << (p.map_grounding ? *p.map_grounding : std::string("none"))
              << (p.degenerate ? " degenerate" : "") << "\n";
  } else if (!e.posterior.empty()) {
    std::cout << "belief  " << e.posterior << "\n";
  }
  std::cout << "action  " << to_string(r.action.kind);
  switch (r.action.kind) {
    case ActionCommand::Kind::PickUp: std::cout << " " << r.action.anchor_id; break;
    case ActionCommand::Kind::Place:
      std::cout << " " << r.action.anchor_id << " at (" << r.action.cell.x << "," << r.action.cell.y << ","
                << r.action.cell.z << ")";
      break;
    case ActionCommand::Kind::NoOp: std::cout << " (" << r.action.reason << ")"; break;
  }
  std::cout << "\n";
}

HttpServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridground: grounded instruction following on a grid world"};
  app.require_subcommand(1);
  std::string config_path = "configs/desk.json";
  app.add_option("--config", config_path, "config file")->check(CLI::ExistingFile);

  // generate-data
  auto* gen = app.add_subcommand("generate-data", "write a JSONL dataset");
  int gen_scenario = 1;
  std::size_t gen_count = 1000;
  std::uint64_t gen_seed = 1;
  std::string gen_split = "train", gen_out;
  gen->add_option("--scenario", gen_scenario, "1..6")->check(CLI::Range(1, 6));
  gen->add_option("--count", gen_count);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--split", gen_split, "train draws from the constrained distribution")
      ->check(CLI::IsMember({"train", "test"}));
  gen->add_option("--out", gen_out)->required();

  // train
  auto* train = app.add_subcommand("train", "run the curriculum");
  std::string train_out, train_report;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::int64_t> train_max;
  std::vector<int> train_order;
  bool train_quiet = false;
  train->add_option("--out", train_out, "weight file")->required();
  train->add_option("--report", train_report, "learning-curve report");
  train->add_option("--seed", train_seed, "overrides the curriculum seed");
  train->add_option("--max-samples", train_max, "per-stage sample budget");
  train->add_option("--scenarios", train_order, "stage order")->delimiter(',');
  train->add_flag("--quiet", train_quiet);

  // eval
  auto* eval = app.add_subcommand("eval", "error rate of a weight file");
  std::string eval_weights, eval_data;
  int eval_scenario = 6;
  std::size_t eval_count = 1000;
  std::uint64_t eval_seed = 1;
  eval->add_option("--weights", eval_weights)->required()->check(CLI::ExistingFile);
  eval->add_option("--data", eval_data, "JSONL dataset; otherwise fresh unconstrained samples");
  eval->add_option("--scenario", eval_scenario)->check(CLI::Range(1, 6));
  eval->add_option("--count", eval_count);
  eval->add_option("--seed", eval_seed);

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "print the program for an instruction");
  std::vector<std::string> parse_text;
  parse_cmd->add_option("text", parse_text)->required();

  // resolve / repl / serve share the scene options
  std::string weights, fixture = "showcase";
  std::int64_t scene_seed = -1;
  std::string anchors_file;
  auto scene_opts = [&](CLI::App* c) {
    c->add_option("--anchors", anchors_file, "anchor snapshot JSON (as GET state returns)")->check(CLI::ExistingFile);
    c->add_option("--weights", weights)->check(CLI::ExistingFile);
    c->add_option("--fixture", fixture, "opening scene")->check(CLI::IsMember({"showcase"}));
    c->add_option("--seed", scene_seed, "generate the opening scene from this seed instead");
  };
  auto* resolve_cmd = app.add_subcommand("resolve", "run instructions against a scene");
  std::vector<std::string> resolve_text;
  bool resolve_json = false, resolve_attention = false;
  scene_opts(resolve_cmd);
  resolve_cmd->add_option("instructions", resolve_text, "one argument per instruction")->required();
  resolve_cmd->add_flag("--json", resolve_json);
  resolve_cmd->add_flag("--attention", resolve_attention, "include per-node maps (implies --json)");

  auto* repl = app.add_subcommand("repl", "interactive prompt");
  scene_opts(repl);

  auto* serve = app.add_subcommand("serve", "HTTP API and event stream");
  std::string host = "127.0.0.1";
  int port = 8080;
  scene_opts(serve);
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  CLI11_PARSE(app, argc, argv);

  try {
    const Config config = load_config(config_path);

    if (*gen) {
      const GenerationConstraints cons = training_constraints(config);
      const auto samples = generate_batch(gen_scenario, gen_split == "train" ? &cons : nullptr, config.vocab,
                                          config.grid, config.generator, gen_seed,
                                          static_cast<std::uint64_t>(gen_scenario), gen_count);
      write_dataset(gen_out, samples, gen_split);
      std::cout << "wrote " << samples.size() << " samples to " << gen_out << "\n";
    } else if (*train) {
      CurriculumConfig cc = config.curriculum;
      if (train_seed) cc.seed = *train_seed;
      if (train_max) cc.max_samples = *train_max;
      if (!train_order.empty()) cc.scenario_order = train_order;
      ParamStore params = ParamStore::initialized(config.vocab, config.grid, config.init_seed);
      // the curve is appended as it is produced so a long run can be watched
      std::ofstream curve;
      if (!train_report.empty()) {
        curve.open(train_report, std::ios::trunc);
        if (!curve) throw Error(ErrorCode::FormatError, "cannot write " + train_report);
        curve << kReportHeader << '\n' << std::flush;
      }
      TrainHooks hooks;
      hooks.on_point = [&](const CurvePoint& p, const ParamStore&) {
        if (curve.is_open()) curve << format_point(p) << '\n' << std::flush;
      };
      hooks.on_stage_end = [&](const StageResult& s, const ParamStore&) {
        if (curve.is_open()) curve << format_stage(s) << '\n' << std::flush;
        if (!train_quiet) std::cout << format_stage(s) << std::endl;
      };
      const TrainReport report =
          train_curriculum(cc, config.vocab, config.grid, config.generator, training_constraints(config), params, hooks);
      save_weights(params, train_out);
      bool all = true;
      for (const auto& s : report.stages) all = all && s.converged;
      std::cout << (all ? "converged" : "stopped") << " after " << report.stages.size() << " stages\n";
    } else if (*eval) {
      const ParamStore params = load_weights(eval_weights, config.vocab);
      const auto samples = eval_data.empty() ? generate_batch(eval_scenario, nullptr, config.vocab, config.grid,
                                                              config.generator, eval_seed,
                                                              static_cast<std::uint64_t>(eval_scenario), eval_count)
                                             : read_dataset(eval_data, config.vocab);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", evaluate(params, samples, config.vocab));
      std::cout << "error " << buf << " samples " << samples.size() << "\n";
    } else if (*parse_cmd) {
      std::string text;
      for (const auto& w : parse_text) text += (text.empty() ? "" : " ") + w;
      const ProgramGraph g = parse(text, config.vocab);
      std::cout << g.serialize() << "\n" << g.to_expression() << "\n";
    } else if (*resolve_cmd) {
      Session s(config, weights_or_init(config, weights), opening_scene(config, fixture, scene_seed, anchors_file));
      for (const auto& t : resolve_text) {
        const InstructionResult r = s.submit(t);
        if (!resolve_json && !resolve_attention) std::cout << "> " << t << "\n";
        print_result(r, s, resolve_json || resolve_attention, resolve_attention, true);
      }
    } else if (*repl) {
      Session s(config, weights_or_init(config, weights), opening_scene(config, fixture, scene_seed, anchors_file));
      std::cout << "commands: :state :quit; anything else is an instruction\n";
      std::string line;
      while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
        if (line == ":quit" || line == ":q") break;
        if (line == ":state") {
          std::cout << snapshot_json(s).dump(2) << "\n";
          continue;
        }
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        print_result(s.submit(line), s, false, false);
      }
    } else if (*serve) {
      SessionHub hub(config, weights_or_init(config, weights));
      HttpServer server(hub);
      const int bound = server.bind(host, port);
      if (bound < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
      }
      g_server = &server;
      std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
      });
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      server.serve();
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
