#pragma once

// Random small instances and an exhaustive reference solver for tests.
// The reference shares only the data types with the library: paths, loads,
// fault products and the objective are recomputed here from scratch.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "fogsfc/net_model.hpp"

namespace fogsfc::testsupport {

struct SmallInstance {
  NetworkModel model;
  VnfCatalog catalog;
  std::vector<FlowSpec> flows;
  Assignment prev;
};

struct SmallOptions {
  std::size_t min_n = 3, max_n = 6;
  std::size_t max_flows = 3;
  std::size_t vnf_types = 4;
  std::size_t max_requested = 2;
  double extra_edge_prob = 0.35;
  double fog_prob = 0.6;
  double prev_prob = 0.5;  // chance that a flow already had a route
};

inline std::vector<std::vector<SwitchId>> all_simple_paths(const NetworkModel& m, SwitchId s, SwitchId d);

inline SmallInstance random_instance(std::mt19937_64& rng, const SmallOptions& o = {}) {
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](std::size_t a, std::size_t b) { return std::uniform_int_distribution<std::size_t>(a, b)(rng); };
  const std::size_t n = pick(o.min_n, o.max_n);

  SmallInstance inst;
  inst.model = NetworkModel(n);
  inst.catalog.proc_per_unit.resize(o.vnf_types);
  inst.catalog.proc_time_ms.resize(o.vnf_types);
  for (std::size_t x = 0; x < o.vnf_types; ++x) {
    inst.catalog.proc_per_unit[x] = static_cast<double>(pick(1, 2));
    inst.catalog.proc_time_ms[x] = static_cast<double>(pick(0, 2));
  }

  static constexpr double kCaps[] = {60.0, 100.0, 150.0, 1000.0};
  auto link = [&](SwitchId a, SwitchId b) {
    inst.model.set_bidirectional_link(a, b, kCaps[pick(0, 3)], static_cast<double>(pick(1, 20)));
  };
  for (SwitchId v = 1; v < n; ++v) link(v, static_cast<SwitchId>(pick(0, v - 1)));
  for (SwitchId a = 0; a < n; ++a)
    for (SwitchId b = a + 1; b < n; ++b)
      if (!inst.model.has_link(a, b) && uni(0, 1) < o.extra_edge_prob) link(a, b);

  for (SwitchId v = 0; v < n; ++v) {
    inst.model.set_fault_prob(v, uni(0.0, 0.04));
    if (uni(0, 1) >= o.fog_prob) continue;
    FogNode fog;
    fog.host_switch = v;
    fog.capacity = static_cast<double>(pick(2, 8)) * 25.0;
    fog.power_on_watts = static_cast<double>(pick(1, 6)) * 100.0;
    fog.idle_fraction = 0.5;
    fog.supported_vnfs.resize(o.vnf_types);
    for (std::size_t x = 0; x < o.vnf_types; ++x) fog.supported_vnfs[x] = uni(0, 1) < 0.6;
    inst.model.set_fog(v, fog);
  }
  inst.model.set_mt(uni(0, 1) < 0.5 ? 0.1 : uni(0.03, 0.12));
  inst.model.set_mu(uni(0, 1) < 0.7 ? 1.0 : 0.8);

  const std::size_t flows = pick(std::min<std::size_t>(1, o.max_flows), o.max_flows);
  for (std::size_t k = 0; k < flows; ++k) {
    FlowSpec f;
    f.id = k;
    f.source = static_cast<SwitchId>(pick(0, n - 1));
    do f.dest = static_cast<SwitchId>(pick(0, n - 1));
    while (f.dest == f.source);
    f.rates = {static_cast<double>(pick(1, 8)) * 10.0};
    std::vector<VnfId> all(o.vnf_types);
    for (std::size_t x = 0; x < o.vnf_types; ++x) all[x] = x;
    std::vector<VnfId> req;
    std::sample(all.begin(), all.end(), std::back_inserter(req), pick(0, o.max_requested), rng);
    f.requested = {req};
    f.max_delay_ms = static_cast<double>(pick(20, 90));
    inst.flows.push_back(f);
  }
  inst.prev = Assignment(n);
  for (const auto& f : inst.flows) {
    if (uni(0, 1) >= o.prev_prob) continue;
    const auto paths = all_simple_paths(inst.model, f.source, f.dest);
    inst.prev.flows.emplace(f.id, FlowAssignment::from_path(paths[pick(0, paths.size() - 1)]));
  }
  return inst;
}

// Every loop-free s->d node sequence, found by plain DFS.
inline std::vector<std::vector<SwitchId>> all_simple_paths(const NetworkModel& m, SwitchId s, SwitchId d) {
  std::vector<std::vector<SwitchId>> out;
  std::vector<SwitchId> path{s};
  std::vector<bool> seen(m.switch_count(), false);
  seen[s] = true;
  std::function<void()> dfs = [&] {
    const SwitchId u = path.back();
    if (u == d) {
      out.push_back(path);
      return;
    }
    for (SwitchId v = 0; v < m.switch_count(); ++v) {
      if (seen[v] || !m.has_link(u, v)) continue;
      seen[v] = true;
      path.push_back(v);
      dfs();
      path.pop_back();
      seen[v] = false;
    }
  };
  dfs();
  return out;
}

// One way of serving a single flow: its links and (vnf, node) pairs.
struct FlowOption {
  std::set<std::pair<SwitchId, SwitchId>> links;
  std::vector<std::pair<VnfId, SwitchId>> services;
};

inline std::vector<FlowOption> flow_options(const NetworkModel& m, const VnfCatalog& cat, const FlowSpec& f) {
  std::vector<FlowOption> out;
  const double rate = f.rate(0);
  double service_ms = 0.0;
  for (VnfId x : f.vnfs(0)) service_ms += cat.proc_time_ms[x] * rate;
  for (const auto& p : all_simple_paths(m, f.source, f.dest)) {
    double delay = 0.0, survive = 1.0;
    bool fits = true;
    for (std::size_t k = 0; k < p.size(); ++k) {
      survive *= 1.0 - m.fault_prob(p[k], 0);
      if (k + 1 < p.size()) {
        delay += m.delay(p[k], p[k + 1]);
        if (rate > m.mu() * m.capacity(p[k], p[k + 1]) + 1e-9) fits = false;
      }
    }
    if (!fits || delay > f.max_delay_ms - service_ms + 1e-9 || 1.0 - survive > m.mt() + 1e-9) continue;
    std::set<std::pair<SwitchId, SwitchId>> links;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) links.insert({p[k], p[k + 1]});

    // Each requested VNF on any path switch that hosts it.
    const auto& req = f.vnfs(0);
    std::vector<std::pair<VnfId, SwitchId>> chosen;
    std::function<void(std::size_t)> place = [&](std::size_t i) {
      if (i == req.size()) {
        out.push_back({links, chosen});
        return;
      }
      for (SwitchId v : p) {
        if (!m.supports(v, req[i])) continue;
        chosen.push_back({req[i], v});
        place(i + 1);
        chosen.pop_back();
      }
    };
    place(0);
  }
  return out;
}

struct BruteForceResult {
  std::optional<double> best;  // nullopt when nothing is feasible
  std::size_t combinations = 0;
  bool skipped = false;        // space larger than the limit
};

// Minimum alpha*E + beta*NS over every combination of per-flow options and
// every ON set containing the serving switches.
inline BruteForceResult brute_force(const SmallInstance& inst, double alpha, double beta,
                                    std::size_t limit = 4000000) {
  const auto& m = inst.model;
  const std::size_t n = m.switch_count();
  std::vector<std::vector<FlowOption>> opts;
  double space = 1.0;
  for (const auto& f : inst.flows) {
    opts.push_back(flow_options(m, inst.catalog, f));
    space *= static_cast<double>(opts.back().size());
  }
  BruteForceResult res;
  if (space > static_cast<double>(limit)) {
    res.skipped = true;
    return res;
  }

  std::vector<SwitchId> fogs;
  for (SwitchId v = 0; v < n; ++v)
    if (m.has_fog(v)) fogs.push_back(v);

  std::vector<std::size_t> pick(inst.flows.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k < inst.flows.size()) {
      for (std::size_t i = 0; i < opts[k].size(); ++i) {
        pick[k] = i;
        rec(k + 1);
      }
      return;
    }
    ++res.combinations;
    std::map<std::pair<SwitchId, SwitchId>, double> link_load;
    std::vector<double> fog_load(n, 0.0);
    std::vector<bool> serving(n, false);
    std::size_t ns = 0;
    for (std::size_t f = 0; f < inst.flows.size(); ++f) {
      const auto& o = opts[f][pick[f]];
      const double rate = inst.flows[f].rate(0);
      for (const auto& l : o.links) link_load[l] += rate;
      for (const auto& [x, v] : o.services) {
        fog_load[v] += inst.catalog.proc_per_unit[x] * rate;
        serving[v] = true;
      }
      std::set<std::pair<SwitchId, SwitchId>> before;
      auto it = inst.prev.flows.find(inst.flows[f].id);
      if (it != inst.prev.flows.end())
        for (const auto& l : it->second.links) before.insert({l.from, l.to});
      for (const auto& l : o.links) ns += before.count(l) ? 0 : 1;
      for (const auto& l : before) ns += o.links.count(l) ? 0 : 1;
    }
    for (const auto& [id, fa] : inst.prev.flows) {
      bool live = false;
      for (const auto& f : inst.flows) live = live || f.id == id;
      if (!live) ns += fa.links.size();
    }
    for (const auto& [l, load] : link_load)
      if (load > m.mu() * m.capacity(l.first, l.second) + 1e-9) return;
    for (SwitchId v = 0; v < n; ++v)
      if (fog_load[v] > m.node_capacity(v) + 1e-9) return;

    // ON sets: every superset of the serving switches among the Fog Nodes.
    std::vector<SwitchId> spare;
    double base_energy = 0.0;
    for (SwitchId v : fogs) {
      if (serving[v]) base_energy += m.power(v);
      else spare.push_back(v);
    }
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << spare.size()); ++mask) {
      double e = base_energy;
      for (std::size_t b = 0; b < spare.size(); ++b)
        if (mask >> b & 1) e += m.power(spare[b]);
      const double obj = alpha * e + beta * static_cast<double>(ns);
      if (!res.best || obj < *res.best) res.best = obj;
    }
  };
  rec(0);
  return res;
}

}  // namespace fogsfc::testsupport
