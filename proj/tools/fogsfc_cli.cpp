// fogsfc: command-line front end for the solvers, the traffic generator and
// the scenario runner.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fogsfc/fogsfc.hpp"

using namespace fogsfc;

namespace {

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else write_text_file(path, text);
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(first + k);
  return out;
}

struct ScenarioFlags {
  std::string scenario = "S2";
  std::string config;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  std::size_t slots = 0;
  std::size_t max_flows = 0;
  double alpha = -1.0;
  double time_limit = -1.0;
  bool many = false;

  void add(CLI::App* app, bool many_seeds) {
    many = many_seeds;
    app->add_option("--scenario", scenario, "S1..S9, or a custom id when --config sets params")->capture_default_str();
    app->add_option("--config", config, "JSON scenario config; flags given here override it");
    app->add_option("--seed", seed, many_seeds ? "First seed" : "Seed")->capture_default_str();
    if (many_seeds) app->add_option("--seeds", seeds, "Number of consecutive seeds")->capture_default_str();
    app->add_option("--slots", slots, "Time slots (overrides config)");
    app->add_option("--max-flows", max_flows, "Keep only the first N generated flows");
    app->add_option("--alpha", alpha, "Energy weight; beta = 1 - alpha");
    app->add_option("--time-limit", time_limit, "Exact solver time limit in seconds");
  }

  ScenarioConfig build(CLI::App* app) const {
    ScenarioConfig cfg;
    cfg.id = scenario;
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), scenario) != names.end()) cfg.params = scenario_params(scenario);
    if (!config.empty()) apply_scenario_json(cfg, parse_json_text(read_text_file(config)));
    if (app->count("--scenario")) {
      cfg.id = scenario;
      if (std::find(names.begin(), names.end(), scenario) != names.end()) cfg.params = scenario_params(scenario);
    }
    if (app->count("--seed") || (many && app->count("--seeds")) || config.empty()) cfg.seeds = seed_range(seed, seeds);
    if (slots) cfg.slots = slots;
    if (max_flows) cfg.max_flows = max_flows;
    if (alpha >= 0.0) {
      cfg.alpha = alpha;
      cfg.beta = 1.0 - alpha;
    }
    if (time_limit >= 0.0) cfg.exact.time_limit_s = time_limit;
    cfg.validate();
    return cfg;
  }
};

struct InstanceFiles {
  std::string topology, demands, prev;
  std::size_t slot = 0;
  void add(CLI::App* app) {
    app->add_option("--topology", topology, "Topology JSON")->required();
    app->add_option("--demands", demands, "Demand JSON (list of flows)")->required();
    app->add_option("--prev", prev, "Previous assignment JSON (default: none)");
    app->add_option("--slot", slot, "Time slot")->capture_default_str();
  }
};

std::string solve_output(const TopologyDoc& topo, const std::vector<FlowSpec>& flows, const Assignment& prev,
                         const SolveResult& r, double alpha, double beta, std::size_t slot) {
  json out = solve_result_to_json(r);
  const auto placed = flows_in(flows, r.assignment);
  out["report"] = report_to_json(evaluate(topo.model, placed, topo.catalog, prev, r.assignment, alpha, beta, slot));
  out["metrics"] = metrics_to_json(metrics(topo.model, placed, topo.catalog, prev, r.assignment, slot));
  return out.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy- and fault-aware SFC routing in fog-supported SDN"};
  app.require_subcommand(1);

  // topology
  auto* topo = app.add_subcommand("topology", "Emit or validate a topology document");
  topo->require_subcommand(1);
  auto* topo_emit = topo->add_subcommand("emit", "Abilene with seeded Fog Nodes and fault probabilities");
  ScenarioFlags emit_flags;
  std::string emit_out;
  emit_flags.add(topo_emit, false);
  topo_emit->add_option("-o,--output", emit_out, "Output file (default stdout)");
  auto* topo_validate = topo->add_subcommand("validate", "Check a topology document");
  std::string validate_file;
  topo_validate->add_option("file", validate_file, "Topology JSON")->required();

  // flowgen
  auto* gen = app.add_subcommand("flowgen", "Generate a demand file");
  ScenarioFlags gen_flags;
  std::string gen_out;
  gen_flags.add(gen, false);
  gen->add_option("-o,--output", gen_out, "Output file (default stdout)");

  // solve-exact
  auto* sx = app.add_subcommand("solve-exact", "Exact solver on a topology and demand file");
  InstanceFiles sx_files;
  sx_files.add(sx);
  SolveConfig sx_cfg;
  std::string sx_out;
  sx->add_option("--alpha", sx_cfg.alpha, "Energy weight; beta = 1 - alpha")->capture_default_str();
  sx->add_option("--time-limit", sx_cfg.time_limit_s, "Seconds")->capture_default_str();
  sx->add_option("--path-budget", sx_cfg.path_budget, "Candidate paths per flow, 0 = unlimited")->capture_default_str();
  sx->add_flag("--allow-drop", sx_cfg.allow_drop, "Drop flows that cannot be placed instead of failing");
  sx->add_option("-o,--output", sx_out, "Output file (default stdout)");

  // solve-heuristic
  auto* sh = app.add_subcommand("solve-heuristic", "Recursive or greedy heuristic");
  InstanceFiles sh_files;
  sh_files.add(sh);
  std::string sh_algo = "greedy", sh_out;
  double sh_alpha = 0.5;
  sh->add_option("--algo", sh_algo, "recursive | greedy")->check(CLI::IsMember({"recursive", "greedy"}))->capture_default_str();
  sh->add_option("--alpha", sh_alpha, "Weight used for the reported objective")->capture_default_str();
  sh->add_option("-o,--output", sh_out, "Output file (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "Run a scenario over seeds and slots, write CSV/JSON results");
  ScenarioFlags run_flags;
  std::string run_solver_name = "greedy", run_dir;
  bool run_timing = false;
  run_flags.add(run, true);
  run->add_option("--solver", run_solver_name, "exact | recursive | greedy | both (exact and greedy)")
      ->check(CLI::IsMember({"exact", "recursive", "greedy", "both"}))
      ->capture_default_str();
  run->add_option("--results-dir", run_dir, "Results root (default $FOGSFC_RESULTS_DIR or ./results)");
  run->add_flag("--timing", run_timing, "Record wall-clock time (output is then not reproducible)");

  // sweep-alpha
  auto* sweep = app.add_subcommand("sweep-alpha", "Exact solver over an alpha grid on one instance");
  ScenarioFlags sweep_flags;
  std::vector<double> alphas{0, 0.001, 0.004, 0.005, 0.1, 0.75, 1};
  std::string sweep_out;
  sweep_flags.add(sweep, false);
  sweep->add_option("--alphas", alphas, "Alpha grid")->capture_default_str();
  sweep->add_option("-o,--output", sweep_out, "CSV output (default stdout)");

  // compare
  auto* cmp = app.add_subcommand("compare", "Heuristics against the exact solver on identical instances");
  ScenarioFlags cmp_flags;
  std::string cmp_out;
  cmp_flags.add(cmp, true);
  cmp->add_option("-o,--output", cmp_out, "JSON output (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*topo_emit) {
      auto cfg = emit_flags.build(topo_emit);
      GeneratorParams p = cfg.params;
      p.seed = cfg.seeds.front();
      p.slots = cfg.slots;
      Instance inst = build_instance(p);
      emit(emit_out, topology_to_json(inst.model, inst.catalog).dump(2) + "\n");
    } else if (*topo_validate) {
      auto doc = parse_topology(read_text_file(validate_file));
      doc.model.validate();
      std::cout << "ok: " << doc.model.switch_count() << " switches, " << doc.model.directed_link_count()
                << " directed links, " << doc.model.fog_switches().size() << " Fog Nodes, " << doc.catalog.size()
                << " VNF types\n";
    } else if (*gen) {
      auto cfg = gen_flags.build(gen);
      Instance inst = scenario_instance(cfg, cfg.seeds.front(), cfg.slots);
      emit(gen_out, flows_to_json(inst.flows).dump(2) + "\n");
    } else if (*sx || *sh) {
      const InstanceFiles& files = *sx ? sx_files : sh_files;
      auto doc = parse_topology(read_text_file(files.topology));
      auto flows = flows_from_json(parse_json_text(read_text_file(files.demands)), &doc.model, &doc.catalog);
      Assignment prev = files.prev.empty() ? Assignment(doc.model.switch_count())
                                           : assignment_from_json(parse_json_text(read_text_file(files.prev)));
      if (*sx) {
        sx_cfg.beta = 1.0 - sx_cfg.alpha;
        auto r = solve_exact(doc.model, flows, prev, doc.catalog, sx_cfg, files.slot);
        emit(sx_out, solve_output(doc, flows, prev, r, sx_cfg.alpha, sx_cfg.beta, files.slot));
        return r.status == SolveStatus::infeasible ? 2 : 0;
      }
      auto r = sh_algo == "greedy" ? solve_greedy(doc.model, flows, prev, doc.catalog, files.slot)
                                   : solve_recursive(doc.model, flows, prev, doc.catalog, files.slot);
      emit(sh_out, solve_output(doc, flows, prev, r, sh_alpha, 1.0 - sh_alpha, files.slot));
      return r.status == SolveStatus::infeasible ? 2 : 0;
    } else if (*run) {
      auto cfg = run_flags.build(run);
      cfg.timing = cfg.timing || run_timing;
      std::vector<SolverKind> solvers;
      if (run_solver_name == "both") solvers = {SolverKind::exact, SolverKind::greedy};
      else solvers = {solver_from_string(run_solver_name)};
      cfg.solver = solvers.front();
      auto records = run_scenario(cfg, solvers);
      const auto dir = write_results(run_dir.empty() ? results_root() : std::filesystem::path(run_dir), cfg, records);
      std::cout << "wrote " << records.size() << " records to " << dir.string() << "\n";
    } else if (*sweep) {
      auto cfg = sweep_flags.build(sweep);
      auto rows = sweep_alpha(cfg, alphas, cfg.seeds.front());
      std::string csv = "alpha,beta,energy_j,ns,objective,placed,status\n";
      char buf[256];
      for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%zu,%.10g,%zu,%s\n", r.alpha, r.beta, r.energy_j, r.ns,
                      r.objective, r.placed, r.status.c_str());
        csv += buf;
      }
      emit(sweep_out, csv);
    } else if (*cmp) {
      auto cfg = cmp_flags.build(cmp);
      auto rows = compare_solvers(cfg);
      auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
      json out = json::array();
      std::map<std::string, std::vector<double>> ratios;
      for (const auto& r : rows) {
        out.push_back({{"seed", r.seed},
                       {"heuristic", r.heuristic},
                       {"flows", r.flows},
                       {"exact_available", r.exact_available},
                       {"exact_status", r.exact_status},
                       {"note", r.note},
                       {"exact_placed", r.exact_placed},
                       {"heuristic_placed", r.heur_placed},
                       {"exact", r.exact_available ? metrics_to_json(r.exact) : json(nullptr)},
                       {"heuristic_metrics", metrics_to_json(r.heur)},
                       {"energy_ratio", opt(r.energy_ratio)},
                       {"fault_gap", opt(r.fault_gap)},
                       {"path_len_ratio", opt(r.path_len_ratio)},
                       {"ns_ratio", opt(r.ns_ratio)},
                       {"max_util_ratio", opt(r.max_util_ratio)}});
        if (r.energy_ratio && r.exact_placed == r.heur_placed && r.heur_placed == r.flows)
          ratios[r.heuristic].push_back(*r.energy_ratio);
      }
      json summary = json::object();
      for (const auto& [h, v] : ratios) {
        auto s = summarize(v);
        summary[h] = {{"instances", s.count}, {"median_energy_ratio", s.median}, {"ci95", {s.lo, s.hi}}, {"p95", s.p95}};
      }
      emit(cmp_out, json{{"rows", out}, {"summary", summary}}.dump(2) + "\n");
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error at " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
