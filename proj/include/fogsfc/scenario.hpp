#pragma once

// Discrete-time event loop (failures, arrivals, periodic reconfiguration),
// scenario sweeps and result files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fogsfc/feasibility.hpp"
#include "fogsfc/flowgen.hpp"
#include "fogsfc/hfes.hpp"
#include "fogsfc/net_model.hpp"
#include "fogsfc/ofes_exact.hpp"
#include "fogsfc/solve_common.hpp"
#include "fogsfc/topology_io.hpp"

namespace fogsfc {

inline constexpr const char* kVersion = "0.1.0";

enum class SolverKind { exact, recursive, greedy };

inline const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::exact: return "exact";
    case SolverKind::recursive: return "recursive";
    case SolverKind::greedy: return "greedy";
  }
  return "unknown";
}

inline SolverKind solver_from_string(const std::string& s) {
  if (s == "exact") return SolverKind::exact;
  if (s == "recursive") return SolverKind::recursive;
  if (s == "greedy") return SolverKind::greedy;
  throw ModelError("unknown solver '" + s + "' (expected exact, recursive or greedy)");
}

struct FailureEvent {
  std::size_t slot = 0;
  std::set<SwitchId> switches;
};

struct ArrivalEvent {
  std::size_t slot = 0;
  FlowSpec flow;
};

struct ScenarioConfig {
  std::string id = "S2";
  GeneratorParams params;
  double alpha = 0.5;
  double beta = 0.5;
  SolverKind solver = SolverKind::greedy;
  std::size_t slots = 1;
  std::vector<std::uint64_t> seeds{1};
  std::vector<FailureEvent> failures;
  std::vector<FailureEvent> repairs;
  std::vector<ArrivalEvent> arrivals;
  std::size_t reconfig_period = 1;
  std::size_t max_flows = 0;  // 0 keeps every generated flow
  SolveConfig exact;
  HfesConfig hfes;
  bool timing = false;        // wall_ms stays 0 unless set, so output is reproducible

  void validate() const {
    check_weights(alpha, beta);
    if (slots < 1) throw ModelError("scenario: slots must be at least 1");
    if (seeds.empty()) throw ModelError("scenario: no seeds");
    if (reconfig_period < 1) throw ModelError("scenario: reconfig_period must be at least 1");
    for (const auto& e : failures)
      if (e.slot >= slots) throw ModelError("scenario: failure scheduled outside [0, slots)");
    for (const auto& e : repairs)
      if (e.slot >= slots) throw ModelError("scenario: repair scheduled outside [0, slots)");
    for (const auto& e : arrivals)
      if (e.slot >= slots) throw ModelError("scenario: arrival scheduled outside [0, slots)");
    params.validate();
  }
};

struct RunRecord {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string solver;
  std::size_t slot = 0;
  MetricsReport metrics;
  std::string status;
  double wall_ms = 0.0;
  std::string event;  // "timer", "failure", "incremental"
  std::vector<FlowId> dropped;
  std::vector<FlowId> replaced;
  Assignment assignment;
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

inline json scenario_to_json(const ScenarioConfig& c) {
  json failures = json::array(), repairs = json::array(), arrivals = json::array();
  for (const auto& e : c.failures) failures.push_back({{"slot", e.slot}, {"switches", e.switches}});
  for (const auto& e : c.repairs) repairs.push_back({{"slot", e.slot}, {"switches", e.switches}});
  for (const auto& e : c.arrivals) arrivals.push_back({{"slot", e.slot}, {"flow", flow_to_json(e.flow)}});
  return {{"id", c.id},
          {"params", params_to_json(c.params)},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"solver", to_string(c.solver)},
          {"slots", c.slots},
          {"seeds", c.seeds},
          {"failures", failures},
          {"repairs", repairs},
          {"arrivals", arrivals},
          {"reconfig_period", c.reconfig_period},
          {"max_flows", c.max_flows},
          {"exact", {{"time_limit_s", c.exact.time_limit_s}, {"path_budget", c.exact.path_budget}}},
          {"hfes", {{"expansion_limit", c.hfes.expansion_limit}}},
          {"timing", c.timing}};
}

// Overlays a JSON config onto `c`. A string "id" naming S1..S9 resets the
// generator parameters to that preset before "params" is applied.
inline void apply_scenario_json(ScenarioConfig& c, const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ParseError("$", "expected an object");
  if (j.contains("id")) {
    c.id = j["id"].get<std::string>();
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), c.id) != names.end())
      c.params = scenario_params(c.id, c.params.seed);
  }
  for (const auto& [key, v] : j.items()) {
    const std::string at = "$." + key;
    if (key == "id") continue;
    if (key == "params") apply_params_json(c.params, v, at);
    else if (key == "alpha") c.alpha = number(v, at);
    else if (key == "beta") c.beta = number(v, at);
    else if (key == "solver") c.solver = wrap_model_error(at, [&] { return solver_from_string(v.get<std::string>()); });
    else if (key == "slots") c.slots = index(v, at);
    else if (key == "seeds") {
      c.seeds.clear();
      for (std::size_t k = 0; k < array(v, at).size(); ++k) c.seeds.push_back(index(v[k], at + "[" + std::to_string(k) + "]"));
    } else if (key == "failures" || key == "repairs") {
      auto& list = key == "failures" ? c.failures : c.repairs;
      list.clear();
      for (std::size_t k = 0; k < array(v, at).size(); ++k) {
        const std::string p = at + "[" + std::to_string(k) + "]";
        FailureEvent e;
        e.slot = index(field(v[k], "slot", p), p + ".slot");
        const json& sw = array(field(v[k], "switches", p), p + ".switches");
        for (std::size_t m = 0; m < sw.size(); ++m) e.switches.insert(index(sw[m], p + ".switches[" + std::to_string(m) + "]"));
        list.push_back(std::move(e));
      }
    } else if (key == "arrivals") {
      c.arrivals.clear();
      for (std::size_t k = 0; k < array(v, at).size(); ++k) {
        const std::string p = at + "[" + std::to_string(k) + "]";
        c.arrivals.push_back({index(field(v[k], "slot", p), p + ".slot"), flow_from_json(field(v[k], "flow", p), p + ".flow")});
      }
    } else if (key == "reconfig_period") c.reconfig_period = index(v, at);
    else if (key == "max_flows") c.max_flows = index(v, at);
    else if (key == "exact") {
      if (v.contains("time_limit_s")) c.exact.time_limit_s = number(v["time_limit_s"], at + ".time_limit_s");
      if (v.contains("path_budget")) c.exact.path_budget = index(v["path_budget"], at + ".path_budget");
    } else if (key == "hfes") {
      if (v.contains("expansion_limit")) c.hfes.expansion_limit = index(v["expansion_limit"], at + ".expansion_limit");
    } else if (key == "timing") c.timing = v.get<bool>();
    else throw ParseError(at, "unknown scenario field");
  }
  wrap_model_error("$", [&] {
    c.validate();
    return 0;
  });
}

inline std::uint64_t config_hash(const ScenarioConfig& c) { return detail::fnv1a(scenario_to_json(c).dump()); }

// Instance for one seed: Abilene with seeded faults, Fog Nodes and demands
// over `slots` slots, optionally cut to the first `max_flows` flows.
inline Instance scenario_instance(const ScenarioConfig& cfg, std::uint64_t seed, std::size_t slots) {
  GeneratorParams p = cfg.params;
  p.seed = seed;
  p.slots = slots;
  Instance inst = build_instance(p);
  if (cfg.max_flows > 0 && inst.flows.size() > cfg.max_flows) inst.flows.resize(cfg.max_flows);
  return inst;
}

inline SolveResult run_solver(SolverKind solver, const ScenarioConfig& cfg, const NetworkModel& model,
                              const std::vector<FlowSpec>& flows, const Assignment& prev, const VnfCatalog& catalog,
                              std::size_t slot, const Assignment* pinned, double alpha, double beta) {
  switch (solver) {
    case SolverKind::exact: {
      SolveConfig c = cfg.exact;
      c.alpha = alpha;
      c.beta = beta;
      c.allow_drop = true;
      return solve_exact(model, flows, prev, catalog, c, slot, pinned);
    }
    case SolverKind::recursive: return solve_recursive(model, flows, prev, catalog, slot, cfg.hfes, pinned);
    case SolverKind::greedy: return solve_greedy(model, flows, prev, catalog, slot, pinned);
  }
  throw ModelError("unknown solver");
}

// One seed, one solver. Per slot: failures (only flows whose route touches a
// newly failed switch are re-placed), then either a full reconfiguration on
// timer slots or an incremental step that keeps every flow whose route still
// fits and places arrivals and evicted flows. Metrics use the previous
// slot's final assignment as prev.
inline std::vector<RunRecord> run_seed(const ScenarioConfig& cfg, std::uint64_t seed, SolverKind solver) {
  cfg.validate();
  Instance inst = scenario_instance(cfg, seed, cfg.slots);
  const std::size_t n = inst.model.switch_count();
  std::vector<std::pair<std::size_t, FlowSpec>> population;
  for (const auto& f : inst.flows) population.emplace_back(0, f);
  std::set<FlowId> ids;
  for (const auto& f : inst.flows) ids.insert(f.id);
  for (const auto& a : cfg.arrivals) {
    if (!ids.insert(a.flow.id).second) throw ModelError("arrival reuses flow id " + std::to_string(a.flow.id));
    a.flow.validate(n, inst.catalog.size());
    population.emplace_back(a.slot, a.flow);
  }
  for (const auto& e : cfg.failures)
    for (SwitchId s : e.switches)
      if (s >= n) throw ModelError("failure names unknown switch " + std::to_string(s));

  std::vector<RunRecord> out;
  std::set<SwitchId> failed;
  Assignment last(n);
  for (std::size_t t = 0; t < cfg.slots; ++t) {
    std::set<SwitchId> newly;
    for (const auto& e : cfg.failures)
      if (e.slot == t)
        for (SwitchId s : e.switches)
          if (!failed.count(s)) newly.insert(s);
    for (const auto& e : cfg.repairs)
      if (e.slot == t)
        for (SwitchId s : e.switches) failed.erase(s);
    failed.insert(newly.begin(), newly.end());
    const NetworkModel model_t = without_switches(inst.model, failed);

    std::vector<FlowSpec> active;
    for (const auto& [slot, f] : population)
      if (slot <= t && !failed.count(f.source) && !failed.count(f.dest)) active.push_back(f);

    const bool timer = newly.empty() && t % cfg.reconfig_period == 0;
    const auto start = std::chrono::steady_clock::now();
    SolveResult res;
    std::vector<FlowId> replaced;
    std::string event = timer ? "timer" : (newly.empty() ? "incremental" : "failure");
    if (timer) res = run_solver(solver, cfg, model_t, active, last, inst.catalog, t, nullptr, cfg.alpha, cfg.beta);
    if (!timer || (res.assignment.flows.empty() && !active.empty() && res.status == SolveStatus::timeout)) {
      auto split = split_for_recovery(model_t, active, last, newly, inst.catalog, t);
      for (const auto& f : split.affected) replaced.push_back(f.id);
      res = run_solver(solver, cfg, model_t, active, last, inst.catalog, t, &split.pinned, cfg.alpha, cfg.beta);
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    RunRecord r;
    r.scenario = cfg.id;
    r.seed = seed;
    r.solver = to_string(solver);
    r.slot = t;
    r.metrics = metrics(model_t, flows_in(active, res.assignment), inst.catalog, last, res.assignment, t);
    r.status = to_string(res.status);
    r.wall_ms = cfg.timing ? ms : 0.0;
    r.event = event;
    for (const auto& [slot, f] : population)
      if (slot <= t && !res.assignment.flows.count(f.id)) r.dropped.push_back(f.id);
    r.replaced = replaced;
    r.assignment = res.assignment;
    out.push_back(std::move(r));
    last = res.assignment;
  }
  return out;
}

inline std::vector<RunRecord> run_scenario(const ScenarioConfig& cfg, const std::vector<SolverKind>& solvers) {
  std::vector<RunRecord> out;
  for (auto seed : cfg.seeds)
    for (auto s : solvers) {
      auto recs = run_seed(cfg, seed, s);
      out.insert(out.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    }
  return out;
}

inline std::vector<RunRecord> run_scenario(const ScenarioConfig& cfg) { return run_scenario(cfg, {cfg.solver}); }

struct SweepRow {
  double alpha = 0.0;
  double beta = 0.0;
  double energy_j = 0.0;
  std::size_t ns = 0;
  double objective = 0.0;
  std::string status;
  std::size_t placed = 0;
};

// Same two-slot instance at every alpha: slot 0 is placed once by the greedy
// heuristic, slot 1 is re-solved with the exact
// solver at each (alpha, 1 - alpha) against that slot-0 assignment.
inline std::vector<SweepRow> sweep_alpha(const ScenarioConfig& cfg, const std::vector<double>& alphas,
                                         std::uint64_t seed) {
  cfg.validate();
  Instance inst = scenario_instance(cfg, seed, 2);
  const Assignment empty(inst.model.switch_count());
  auto first = solve_greedy(inst.model, inst.flows, empty, inst.catalog, 0);
  std::vector<SweepRow> rows;
  for (double a : alphas) {
    const double b = 1.0 - a;
    auto res = run_solver(SolverKind::exact, cfg, inst.model, inst.flows, first.assignment, inst.catalog, 1, nullptr,
                          a, std::max(0.0, b));
    SweepRow row;
    row.alpha = a;
    row.beta = std::max(0.0, b);
    row.energy_j = energy(inst.model, res.assignment);
    row.ns = side_effect(first.assignment, res.assignment);
    row.objective = objective_value(row.alpha, row.beta, row.energy_j, row.ns);
    row.status = to_string(res.status);
    row.placed = res.assignment.flows.size();
    rows.push_back(row);
  }
  return rows;
}

struct ComparisonRow {
  std::uint64_t seed = 0;
  std::string heuristic;
  bool exact_available = false;
  std::string exact_status;
  std::string note;
  MetricsReport exact, heur;
  std::size_t exact_placed = 0, heur_placed = 0, flows = 0;
  // Heuristic over exact; empty when exact is unavailable or the base is 0.
  std::optional<double> energy_ratio, path_len_ratio, ns_ratio, max_util_ratio;
  std::optional<double> fault_gap;  // heuristic mean fault minus exact
};

namespace detail {

inline std::optional<double> ratio(double a, double b) {
  if (b == 0.0) return a == 0.0 ? std::optional<double>(1.0) : std::nullopt;
  return a / b;
}

}  // namespace detail

// Both heuristics against the exact solver on slot 0 of each seed. The exact
// solver is refused above its switch cap; those rows carry heuristic
// metrics only.
inline std::vector<ComparisonRow> compare_solvers(const ScenarioConfig& cfg) {
  cfg.validate();
  std::vector<ComparisonRow> rows;
  for (auto seed : cfg.seeds) {
    Instance inst = scenario_instance(cfg, seed, 1);
    const Assignment empty(inst.model.switch_count());
    std::optional<SolveResult> ex;
    std::string note;
    try {
      ex = run_solver(SolverKind::exact, cfg, inst.model, inst.flows, empty, inst.catalog, 0, nullptr, cfg.alpha, cfg.beta);
    } catch (const ModelError& e) {
      note = e.what();
    }
    for (SolverKind h : {SolverKind::recursive, SolverKind::greedy}) {
      auto hr = run_solver(h, cfg, inst.model, inst.flows, empty, inst.catalog, 0, nullptr, cfg.alpha, cfg.beta);
      ComparisonRow row;
      row.seed = seed;
      row.heuristic = to_string(h);
      row.flows = inst.flows.size();
      row.note = note;
      row.heur = metrics(inst.model, flows_in(inst.flows, hr.assignment), inst.catalog, empty, hr.assignment, 0);
      row.heur_placed = hr.assignment.flows.size();
      if (ex) {
        row.exact_available = true;
        row.exact_status = to_string(ex->status);
        row.exact = metrics(inst.model, flows_in(inst.flows, ex->assignment), inst.catalog, empty, ex->assignment, 0);
        row.exact_placed = ex->assignment.flows.size();
        row.energy_ratio = detail::ratio(row.heur.energy_j, row.exact.energy_j);
        row.path_len_ratio = detail::ratio(row.heur.mean_path_len, row.exact.mean_path_len);
        row.ns_ratio = detail::ratio(static_cast<double>(row.heur.side_effect), static_cast<double>(row.exact.side_effect));
        row.max_util_ratio = detail::ratio(row.heur.max_link_util, row.exact.max_link_util);
        row.fault_gap = row.heur.mean_fault - row.exact.mean_fault;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

struct MedianSummary {
  std::size_t count = 0;
  double median = 0.0, lo = 0.0, hi = 0.0;  // 95% order-statistic interval
  double p95 = 0.0;
};

inline MedianSummary summarize(std::vector<double> v) {
  MedianSummary s;
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  const double half = 0.98 * std::sqrt(static_cast<double>(n));
  const double mid = static_cast<double>(n) / 2.0;
  const auto lo = static_cast<std::ptrdiff_t>(std::floor(mid - half)), hi = static_cast<std::ptrdiff_t>(std::ceil(mid + half));
  s.lo = v[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(lo, 0, static_cast<std::ptrdiff_t>(n) - 1))];
  s.hi = v[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(hi, 0, static_cast<std::ptrdiff_t>(n) - 1))];
  s.p95 = v[std::min(n - 1, static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n))) - 1)];
  return s;
}

// ---- result files ---------------------------------------------------------

inline const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols{"energy_j",       "ns",           "mean_fault",    "max_fault",
                                             "mean_path_len",  "mean_link_util", "max_link_util", "mean_fog_util",
                                             "max_fog_util"};
  return cols;
}

inline std::string metric_value(const RunRecord& r, const std::string& col) {
  const auto& m = r.metrics;
  if (col == "energy_j") return detail::fmt(m.energy_j);
  if (col == "ns") return std::to_string(m.side_effect);
  if (col == "mean_fault") return detail::fmt(m.mean_fault);
  if (col == "max_fault") return detail::fmt(m.max_fault);
  if (col == "mean_path_len") return detail::fmt(m.mean_path_len);
  if (col == "mean_link_util") return detail::fmt(m.mean_link_util);
  if (col == "max_link_util") return detail::fmt(m.max_link_util);
  if (col == "mean_fog_util") return detail::fmt(m.mean_fog_util);
  if (col == "max_fog_util") return detail::fmt(m.max_fog_util);
  throw ModelError("unknown metric column " + col);
}

inline std::string records_csv(const std::vector<RunRecord>& records) {
  std::string out = "scenario,seed,solver,slot";
  for (const auto& c : metric_columns()) out += "," + c;
  out += ",wall_ms,status\n";
  for (const auto& r : records) {
    out += r.scenario + "," + std::to_string(r.seed) + "," + r.solver + "," + std::to_string(r.slot);
    for (const auto& c : metric_columns()) out += "," + metric_value(r, c);
    out += "," + detail::fmt(r.wall_ms) + "," + r.status + "\n";
  }
  return out;
}

inline std::string metric_csv(const std::vector<RunRecord>& records, const std::string& col) {
  std::string out = "scenario,seed,solver,slot," + col + "\n";
  for (const auto& r : records)
    out += r.scenario + "," + std::to_string(r.seed) + "," + r.solver + "," + std::to_string(r.slot) + "," +
           metric_value(r, col) + "\n";
  return out;
}

inline json records_json(const ScenarioConfig& cfg, const std::vector<RunRecord>& records) {
  json recs = json::array();
  for (const auto& r : records)
    recs.push_back({{"scenario", r.scenario},
                    {"seed", r.seed},
                    {"solver", r.solver},
                    {"slot", r.slot},
                    {"event", r.event},
                    {"status", r.status},
                    {"wall_ms", r.wall_ms},
                    {"metrics", metrics_to_json(r.metrics)},
                    {"dropped", r.dropped},
                    {"replaced", r.replaced}});
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  return {{"version", kVersion}, {"config_hash", hash}, {"config", scenario_to_json(cfg)}, {"records", recs}};
}

// <root>/<scenario>/metrics.csv, one <metric>.csv per column and run.json.
inline std::filesystem::path write_results(const std::filesystem::path& root, const ScenarioConfig& cfg,
                                           const std::vector<RunRecord>& records) {
  const auto dir = root / cfg.id;
  std::filesystem::create_directories(dir);
  write_text_file((dir / "metrics.csv").string(), records_csv(records));
  for (const auto& c : metric_columns()) write_text_file((dir / (c + ".csv")).string(), metric_csv(records, c));
  write_text_file((dir / "run.json").string(), records_json(cfg, records).dump(2) + "\n");
  return dir;
}

inline std::filesystem::path results_root() {
  const char* env = std::getenv("FOGSFC_RESULTS_DIR");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("results");
}

}  // namespace fogsfc
