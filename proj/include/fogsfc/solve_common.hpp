#pragma once

// Pieces shared by the exact solver and the heuristics: result type,
// residual resources after pinned flows, and failure-recovery bookkeeping.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "fogsfc/feasibility.hpp"
#include "fogsfc/net_model.hpp"

namespace fogsfc {

enum class SolveStatus {
  optimal,     // exact search exhausted
  budgeted,    // exact search exhausted, but a candidate-path budget was hit
  timeout,     // best found before the time limit, optimality not proven
  feasible,    // heuristic placed every flow
  partial,     // some flows dropped, the rest placed
  infeasible,  // nothing could be placed
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::budgeted: return "budgeted";
    case SolveStatus::timeout: return "timeout";
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::partial: return "partial";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

struct SolveResult {
  Assignment assignment;
  SolveStatus status = SolveStatus::infeasible;
  std::vector<FlowId> dropped;
  std::string reason;  // first unsatisfiable constraint family when infeasible
  double objective = 0.0;
  std::size_t search_nodes = 0;

  bool placed_all() const { return dropped.empty() && status != SolveStatus::infeasible; }
};

// Residual link bandwidth (mu*B minus load), Fog Node capacity and ON state.
struct Residual {
  std::size_t n = 0;
  std::vector<double> bandwidth;
  std::vector<double> capacity;
  std::vector<bool> on;

  Residual() = default;
  explicit Residual(const NetworkModel& model) : n(model.switch_count()), bandwidth(n * n), capacity(n), on(n) {
    for (SwitchId i = 0; i < n; ++i) {
      for (SwitchId j = 0; j < n; ++j) bandwidth[i * n + j] = model.mu() * model.capacity(i, j);
      capacity[i] = model.node_capacity(i);
    }
  }

  double free_bw(SwitchId i, SwitchId j) const { return bandwidth[i * n + j]; }
  bool fits(SwitchId i, SwitchId j, double rate) const { return bandwidth[i * n + j] + 1e-9 >= rate; }

  void consume(const FlowSpec& f, const FlowAssignment& fa, const VnfCatalog& catalog, std::size_t slot) {
    const double rate = f.rate(slot);
    for (const auto& l : fa.links) bandwidth[l.from * n + l.to] -= rate;
    for (const auto& s : fa.services) {
      capacity[s.node] -= catalog.proc_per_unit[s.vnf] * rate;
      on[s.node] = true;
    }
  }
};

inline bool touches_any(const FlowSpec& f, const FlowAssignment& fa, const std::set<SwitchId>& switches) {
  if (switches.count(f.source) || switches.count(f.dest)) return true;
  return std::any_of(switches.begin(), switches.end(), [&](SwitchId s) { return fa.touches(s); });
}

inline const FlowSpec* find_flow(const std::vector<FlowSpec>& flows, FlowId id) {
  for (const auto& f : flows)
    if (f.id == id) return &f;
  return nullptr;
}

struct RecoverySplit {
  Assignment pinned;               // unaffected flows, routes copied from prev
  std::vector<FlowSpec> affected;  // flows that must be (re)placed
  std::vector<FlowId> lost;        // source or destination failed
};

// Splits flows into pinned ones (prev route avoids every failed switch and
// still fits at this slot's rates) and ones to re-place. Flows missing from
// prev are treated as affected.
inline RecoverySplit split_for_recovery(const NetworkModel& residual_model, const std::vector<FlowSpec>& flows,
                                        const Assignment& prev, const std::set<SwitchId>& failed,
                                        const VnfCatalog& catalog, std::size_t slot) {
  RecoverySplit out;
  out.pinned = Assignment(residual_model.switch_count());
  std::vector<FlowSpec> pinned_specs;
  for (const auto& f : flows) {
    if (failed.count(f.source) || failed.count(f.dest)) {
      out.lost.push_back(f.id);
      continue;
    }
    auto it = prev.flows.find(f.id);
    if (it == prev.flows.end() || touches_any(f, it->second, failed)) {
      out.affected.push_back(f);
      continue;
    }
    out.pinned.flows.emplace(f.id, it->second);
    pinned_specs.push_back(f);
  }

  // Rates may have moved since prev was computed; flows sitting on a link or
  // Fog Node that the pinned set now overloads are re-placed as well.
  while (true) {
    out.pinned.set_fog_on_from_services();
    std::set<FlowId> evict;
    for (const auto& v : check_link_capacity(residual_model, pinned_specs, out.pinned, slot))
      for (const auto& f : pinned_specs)
        if (out.pinned.flows.at(f.id).uses_link(v.indices[0], v.indices[1])) evict.insert(f.id);
    for (const auto& v : check_sfc(residual_model, pinned_specs, out.pinned, catalog, slot))
      if (v.constraint == constraint::kFogCapacity)
        for (const auto& f : pinned_specs)
          for (const auto& s : out.pinned.flows.at(f.id).services)
            if (s.node == v.indices[0]) evict.insert(f.id);
    for (const auto& v : check_delay(residual_model, pinned_specs, out.pinned, catalog, slot)) evict.insert(v.indices[0]);
    if (evict.empty()) break;
    for (FlowId id : evict) {
      out.pinned.flows.erase(id);
      auto it = std::find_if(pinned_specs.begin(), pinned_specs.end(), [&](const FlowSpec& f) { return f.id == id; });
      out.affected.push_back(*it);
      pinned_specs.erase(it);
    }
  }
  std::sort(out.affected.begin(), out.affected.end(), [](const FlowSpec& a, const FlowSpec& b) { return a.id < b.id; });
  return out;
}

inline std::vector<FlowSpec> flows_in(const std::vector<FlowSpec>& flows, const Assignment& a) {
  std::vector<FlowSpec> out;
  for (const auto& f : flows)
    if (a.flows.count(f.id)) out.push_back(f);
  return out;
}

}  // namespace fogsfc
