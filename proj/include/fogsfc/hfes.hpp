#pragma once

// Heuristic placement: a recursive depth-first walk that backtracks when the
// path's survival drops below 1 - MT, and a greedy variant that hops from
// service node to service node along maximum-survival paths.
//
// Both process flows one at a time in descending rate order (ties by id),
// consume residual link bandwidth and Fog Node capacity as they go, and
// prefer Fog Nodes that are already ON because reusing them costs no extra
// energy.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "fogsfc/feasibility.hpp"
#include "fogsfc/net_model.hpp"
#include "fogsfc/paths.hpp"
#include "fogsfc/solve_common.hpp"

namespace fogsfc {

struct HfesConfig {
  std::size_t expansion_limit = 200000;  // recursive search nodes per flow
};

// State of the recursive walk for one flow.
struct SearchState {
  SwitchId current = 0;
  SwitchId dest = 0;
  std::vector<VnfId> remaining;
  Residual residual;             // bandwidth, Fog capacity and ON flags
  double survival = 1.0;         // product of (1 - p_i) over chosen_path
  std::vector<SwitchId> chosen_path;
  std::vector<char> removed;     // switches already on chosen_path
  std::vector<Service> services;
  double delay_ms = 0.0;
  bool source_tried = false;
};

namespace detail {

struct FlowContext {
  const NetworkModel& model;
  const VnfCatalog& catalog;
  std::size_t slot;
  double rate;
  double delay_budget;
  double min_survival;
  std::size_t expansions = 0;
  std::size_t expansion_limit;
};

inline double vnf_need(const FlowContext& ctx, VnfId x) { return ctx.catalog.proc_per_unit[x] * ctx.rate; }

inline bool can_host_any(const FlowContext& ctx, const Residual& r, SwitchId v, const std::vector<VnfId>& needed) {
  return std::any_of(needed.begin(), needed.end(), [&](VnfId x) {
    return ctx.model.supports(v, x) && r.capacity[v] + 1e-9 >= vnf_need(ctx, x);
  });
}

// Whether delivering at v would leave nothing outstanding.
inline bool can_host_all(const FlowContext& ctx, const Residual& r, SwitchId v, const std::vector<VnfId>& needed) {
  double cap = r.capacity[v];
  for (VnfId x : needed) {
    if (!ctx.model.supports(v, x)) return false;
    cap -= vnf_need(ctx, x);
  }
  return cap + 1e-9 >= 0.0;
}

inline double incremental_energy(const NetworkModel& model, const Residual& r, SwitchId v) {
  return r.on[v] ? 0.0 : model.power(v);
}

// Delivers every still-needed VNF the switch supports, largest processing
// demand first, while capacity lasts. Returns what was delivered.
inline std::vector<Service> deliver_services(const FlowContext& ctx, SwitchId v, std::vector<VnfId>& remaining,
                                             Residual& r) {
  std::vector<VnfId> order = remaining;
  std::stable_sort(order.begin(), order.end(), [&](VnfId a, VnfId b) {
    return ctx.catalog.proc_per_unit[a] > ctx.catalog.proc_per_unit[b];
  });
  std::vector<Service> done;
  for (VnfId x : order) {
    if (!ctx.model.supports(v, x)) continue;
    const double need = vnf_need(ctx, x);
    if (r.capacity[v] + 1e-9 < need) continue;
    r.capacity[v] -= need;
    done.push_back({x, v});
  }
  if (!done.empty()) r.on[v] = true;
  for (const auto& s : done) remaining.erase(std::find(remaining.begin(), remaining.end(), s.vnf));
  return done;
}

inline void undo_services(const FlowContext& ctx, const std::vector<Service>& done, bool was_on,
                          std::vector<VnfId>& remaining, Residual& r) {
  for (const auto& s : done) {
    r.capacity[s.node] += vnf_need(ctx, s.vnf);
    remaining.push_back(s.vnf);
  }
  std::sort(remaining.begin(), remaining.end());
  if (!done.empty()) r.on[done.front().node] = was_on;
}

// Hub ranking: incremental energy per VNF the switch would deliver, then
// VNFs still outstanding afterwards, then index. Requires can_host_any.
inline std::tuple<double, std::size_t, SwitchId> hub_key(const FlowContext& ctx, const Residual& r, SwitchId v,
                                                         const std::vector<VnfId>& remaining) {
  Residual trial = r;
  std::vector<VnfId> rest = remaining;
  const std::size_t served = deliver_services(ctx, v, rest, trial).size();
  return {incremental_energy(ctx.model, r, v) / static_cast<double>(served), rest.size(), v};
}

}  // namespace detail

// Next switch for a flow that still needs services. Candidates are the
// unvisited neighbours reachable over links with enough free bandwidth (and,
// before the walk leaves the source, the source itself). Among those that can
// host a needed VNF the one with the smallest incremental energy per VNF wins (ON
// nodes cost nothing), ties by index. When no candidate hosts anything, the
// first hop of the maximum-survival path to the nearest switch that does is
// returned. The destination only qualifies if it can finish the chain.
inline std::optional<SwitchId> energy_aware_next_hub(const NetworkModel& model, const SearchState& state,
                                                     const VnfCatalog& catalog, double rate, std::size_t slot,
                                                     const std::set<SwitchId>& excluded = {}) {
  detail::FlowContext ctx{model, catalog, slot, rate, kInfinity, 0.0, 0, 0};
  const auto& r = state.residual;
  auto eligible = [&](SwitchId v) {
    if (state.removed[v] || excluded.count(v)) return false;
    if (v == state.dest) return detail::can_host_all(ctx, r, v, state.remaining);
    return true;
  };

  std::optional<SwitchId> best;
  std::tuple<double, std::size_t, SwitchId> best_key;
  auto consider = [&](SwitchId v) {
    if (!detail::can_host_any(ctx, r, v, state.remaining)) return;
    const auto key = detail::hub_key(ctx, r, v, state.remaining);
    if (!best || key < best_key) {
      best = v;
      best_key = key;
    }
  };
  if (!state.source_tried && state.current == state.chosen_path.front() && !excluded.count(state.current))
    consider(state.current);
  for (SwitchId v : model.out_neighbors(state.current))
    if (r.fits(state.current, v, rate) && eligible(v)) consider(v);
  if (best) return best;

  // Nobody adjacent hosts a needed VNF: head for the nearest switch that does.
  auto tree = shortest_path_fault(
      model, state.current, slot,
      [&](SwitchId u, SwitchId v) { return u != state.dest && r.fits(u, v, rate); },
      [&](SwitchId v) { return !state.removed[v] && !excluded.count(v); });
  std::optional<SwitchId> target;
  for (SwitchId v = 0; v < model.switch_count(); ++v) {
    if (v == state.current || !tree.reachable(v) || !detail::can_host_any(ctx, r, v, state.remaining)) continue;
    if (v == state.dest && !detail::can_host_all(ctx, r, v, state.remaining)) continue;
    if (!target || tree.weight[v] < tree.weight[*target] ||
        (tree.weight[v] == tree.weight[*target] && tree.hops[v] < tree.hops[*target]))
      target = v;
  }
  if (!target) return std::nullopt;
  const auto path = tree.path_to(*target);
  if (path.size() < 2 || path[1] == state.dest) return std::nullopt;
  return path[1];
}

namespace detail {

enum class WalkResult { found, failed, exhausted };

inline void push_hop(SearchState& s, const FlowContext& ctx, SwitchId nh) {
  s.delay_ms += ctx.model.delay(s.current, nh);
  s.residual.bandwidth[s.current * s.residual.n + nh] -= ctx.rate;
  s.survival *= 1.0 - ctx.model.fault_prob(nh, ctx.slot);
  s.chosen_path.push_back(nh);
  s.removed[nh] = 1;
  s.current = nh;
}

inline void pop_hop(SearchState& s, const FlowContext& ctx, double survival_before, double delay_before) {
  const SwitchId nh = s.chosen_path.back();
  s.chosen_path.pop_back();
  s.removed[nh] = 0;
  s.current = s.chosen_path.back();
  s.residual.bandwidth[s.current * s.residual.n + nh] += ctx.rate;
  s.survival = survival_before;
  s.delay_ms = delay_before;
}

inline WalkResult walk(SearchState& s, FlowContext& ctx, std::size_t depth) {
  if (++ctx.expansions > ctx.expansion_limit) return WalkResult::exhausted;
  if (s.survival + 1e-12 < ctx.min_survival) return WalkResult::failed;  // fault would exceed MT
  if (s.delay_ms > ctx.delay_budget + 1e-9) return WalkResult::failed;
  if (s.remaining.empty() && s.current == s.dest) return WalkResult::found;
  if (s.current == s.dest || depth > ctx.model.switch_count()) return WalkResult::failed;

  std::set<SwitchId> excluded;
  if (s.remaining.empty()) {
    while (true) {
      auto tree = shortest_path_fault(
          ctx.model, s.current, ctx.slot, [&](SwitchId u, SwitchId v) { return s.residual.fits(u, v, ctx.rate); },
          [&](SwitchId v) { return !s.removed[v] && !excluded.count(v); });
      if (!tree.reachable(s.dest)) return WalkResult::failed;
      const SwitchId nh = tree.path_to(s.dest)[1];
      const double pr = s.survival, dl = s.delay_ms;
      push_hop(s, ctx, nh);
      const auto r = walk(s, ctx, depth + 1);
      if (r == WalkResult::found) return r;
      pop_hop(s, ctx, pr, dl);
      if (r == WalkResult::exhausted) return r;
      excluded.insert(nh);
    }
  }

  while (true) {
    auto nh = energy_aware_next_hub(ctx.model, s, ctx.catalog, ctx.rate, ctx.slot, excluded);
    if (!nh) return WalkResult::failed;
    if (*nh == s.current) {
      // Serve at the source before leaving it.
      s.source_tried = true;
      const bool was_on = s.residual.on[*nh];
      auto done = deliver_services(ctx, *nh, s.remaining, s.residual);
      s.services.insert(s.services.end(), done.begin(), done.end());
      const auto r = walk(s, ctx, depth + 1);
      if (r == WalkResult::found) return r;
      s.services.resize(s.services.size() - done.size());
      undo_services(ctx, done, was_on, s.remaining, s.residual);
      if (r == WalkResult::exhausted) return r;
      excluded.insert(*nh);
      continue;
    }
    const double pr = s.survival, dl = s.delay_ms;
    const bool source_tried = s.source_tried;
    s.source_tried = true;
    push_hop(s, ctx, *nh);
    const bool was_on = s.residual.on[*nh];
    auto done = deliver_services(ctx, *nh, s.remaining, s.residual);
    s.services.insert(s.services.end(), done.begin(), done.end());
    const auto r = walk(s, ctx, depth + 1);
    if (r == WalkResult::found) return r;
    s.services.resize(s.services.size() - done.size());
    undo_services(ctx, done, was_on, s.remaining, s.residual);
    pop_hop(s, ctx, pr, dl);
    s.source_tried = source_tried;
    if (r == WalkResult::exhausted) return r;
    excluded.insert(*nh);
  }
}

}  // namespace detail

struct WalkOutcome {
  bool found = false;
  std::vector<SwitchId> path;
  std::vector<Service> services;
  std::size_t expansions = 0;
};

// Recursive walk for one flow starting from `state` (current = source,
// chosen_path = {source}). On success the state holds the consumed
// residual resources.
inline WalkOutcome hfes_recursive(SearchState& state, const NetworkModel& model, const VnfCatalog& catalog,
                                  const FlowSpec& flow, std::size_t slot, const HfesConfig& config = {}) {
  detail::FlowContext ctx{model,
                          catalog,
                          slot,
                          flow.rate(slot),
                          propagation_budget(flow, catalog, slot),
                          1.0 - model.mt(),
                          0,
                          config.expansion_limit};
  WalkOutcome out;
  if (ctx.delay_budget < 0.0) return out;
  const auto r = detail::walk(state, ctx, 0);
  out.expansions = ctx.expansions;
  if (r == detail::WalkResult::found) {
    out.found = true;
    out.path = state.chosen_path;
    out.services = state.services;
  }
  return out;
}

inline SearchState initial_state(const NetworkModel& model, const FlowSpec& flow, const Residual& residual,
                                 std::size_t slot) {
  SearchState s;
  s.current = flow.source;
  s.dest = flow.dest;
  s.remaining = flow.vnfs(slot);
  s.residual = residual;
  s.survival = 1.0 - model.fault_prob(flow.source, slot);
  s.chosen_path = {flow.source};
  s.removed.assign(model.switch_count(), 0);
  s.removed[flow.source] = 1;
  return s;
}

namespace detail {

inline std::vector<FlowSpec> processing_order(std::vector<FlowSpec> flows, std::size_t slot) {
  std::stable_sort(flows.begin(), flows.end(), [&](const FlowSpec& a, const FlowSpec& b) {
    if (a.rate(slot) != b.rate(slot)) return a.rate(slot) > b.rate(slot);
    return a.id < b.id;
  });
  return flows;
}

template <class PlaceOne>
SolveResult place_sequentially(const NetworkModel& model, const std::vector<FlowSpec>& flows, const Assignment& prev,
                               const VnfCatalog& catalog, std::size_t slot, const Assignment* pinned,
                               PlaceOne&& place_one) {
  SolveResult result;
  result.assignment = Assignment(model.switch_count());
  Residual residual(model);
  std::vector<FlowSpec> free_flows;
  for (const auto& f : flows) {
    if (pinned && pinned->flows.count(f.id)) {
      const auto& fa = pinned->flows.at(f.id);
      residual.consume(f, fa, catalog, slot);
      result.assignment.flows.emplace(f.id, fa);
    } else {
      free_flows.push_back(f);
    }
  }
  for (const auto& f : processing_order(free_flows, slot)) {
    auto placed = place_one(f, residual);
    if (!placed) {
      result.dropped.push_back(f.id);
      continue;
    }
    residual.consume(f, *placed, catalog, slot);
    result.assignment.flows.emplace(f.id, std::move(*placed));
  }
  result.assignment.set_fog_on_from_services();
  std::sort(result.dropped.begin(), result.dropped.end());
  if (result.dropped.empty()) result.status = SolveStatus::feasible;
  else if (result.dropped.size() < free_flows.size()) result.status = SolveStatus::partial;
  else result.status = free_flows.empty() ? SolveStatus::feasible : SolveStatus::infeasible;
  if (!result.dropped.empty()) result.reason = "no admissible route for dropped flows";
  result.objective = energy(model, result.assignment);  // weights are applied by callers
  (void)prev;
  return result;
}

}  // namespace detail

namespace detail {

inline SolveResult recursive_pass(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                  const Assignment& prev, const VnfCatalog& catalog, std::size_t slot,
                                  const HfesConfig& config, const Assignment* pinned) {
  std::size_t expansions = 0;
  auto result = place_sequentially(
      model, flows, prev, catalog, slot, pinned, [&](const FlowSpec& f, const Residual& residual) {
        auto state = initial_state(model, f, residual, slot);
        auto out = hfes_recursive(state, model, catalog, f, slot, config);
        expansions += out.expansions;
        return out.found ? std::optional<FlowAssignment>(FlowAssignment::from_path(out.path, out.services))
                         : std::nullopt;
      });
  result.search_nodes = expansions;
  return result;
}

}  // namespace detail

// Recursive HFES over all flows.
inline SolveResult solve_recursive(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                   const Assignment& prev, const VnfCatalog& catalog, std::size_t slot = 0,
                                   const HfesConfig& config = {}, const Assignment* pinned = nullptr) {
  return detail::recursive_pass(model, flows, prev, catalog, slot, config, pinned);
}

namespace detail {

// Greedy placement of one flow against the current residual resources.
inline std::optional<FlowAssignment> greedy_place(const NetworkModel& model, const FlowSpec& f,
                                                  const Residual& shared, const VnfCatalog& catalog,
                                                  std::size_t slot) {
  FlowContext ctx{model, catalog, slot, f.rate(slot), propagation_budget(f, catalog, slot), 1.0 - model.mt(), 0, 0};
  if (ctx.delay_budget < 0.0) return std::nullopt;
  Residual r = shared;
  std::vector<VnfId> remaining = f.vnfs(slot);
  std::vector<SwitchId> cp{f.source};
  std::vector<char> removed(model.switch_count(), 0);
  removed[f.source] = 1;
  std::vector<Service> services;
  double survival = 1.0 - model.fault_prob(f.source, slot);
  double delay = 0.0;
  SwitchId cn = f.source;

  auto extend = [&](const std::vector<SwitchId>& pth) {
    for (std::size_t k = 1; k < pth.size(); ++k) {
      delay += model.delay(pth[k - 1], pth[k]);
      survival *= 1.0 - model.fault_prob(pth[k], slot);
      cp.push_back(pth[k]);
      removed[pth[k]] = 1;
    }
  };

  while (!remaining.empty()) {
    // Links without room for the flow are pruned; visited switches are gone;
    // the destination can be reached but not crossed.
    auto tree = shortest_path_fault(
        model, cn, slot, [&](SwitchId u, SwitchId v) { return u != f.dest && r.fits(u, v, ctx.rate); },
        [&](SwitchId v) { return !removed[v]; });
    const double root_weight = tree.weight[cn];
    std::optional<SwitchId> nh;
    std::tuple<double, std::size_t, double, std::size_t> nh_key;
    for (SwitchId v = 0; v < model.switch_count(); ++v) {
      if (!tree.reachable(v) || !can_host_any(ctx, r, v, remaining)) continue;
      if (v == f.dest && !can_host_all(ctx, r, v, remaining)) continue;
      const double extra_survival = std::exp(-(tree.weight[v] - root_weight));
      if (survival * extra_survival + 1e-12 < ctx.min_survival) continue;
      double extra_delay = 0.0;
      const auto pth = tree.path_to(v);
      for (std::size_t k = 1; k < pth.size(); ++k) extra_delay += model.delay(pth[k - 1], pth[k]);
      if (delay + extra_delay > ctx.delay_budget + 1e-9) continue;
      // Lookahead: the destination must stay reachable from v within budget.
      if (v != f.dest) {
        std::vector<char> blocked = removed;
        for (SwitchId w : pth) blocked[w] = 1;
        auto rest = shortest_path_fault(
            model, v, slot, [&](SwitchId a, SwitchId b) { return r.fits(a, b, ctx.rate); },
            [&](SwitchId w) { return !blocked[w]; });
        if (!rest.reachable(f.dest)) continue;
        const double tail = std::exp(-(rest.weight[f.dest] - rest.weight[v]));
        if (survival * extra_survival * tail + 1e-12 < ctx.min_survival) continue;
        if (delay + extra_delay + path_delay(model, rest.path_to(f.dest)) > ctx.delay_budget + 1e-9) continue;
      }
      const auto [per_vnf, left, index] = hub_key(ctx, r, v, remaining);
      const auto key = std::make_tuple(per_vnf, left, tree.weight[v], tree.hops[v]);
      if (!nh || key < nh_key) {
        nh = v;
        nh_key = key;
      }
    }
    if (!nh) return std::nullopt;
    const auto pth = tree.path_to(*nh);
    for (std::size_t k = 1; k < pth.size(); ++k) r.bandwidth[pth[k - 1] * r.n + pth[k]] -= ctx.rate;
    extend(pth);
    // Services along the way: any already-ON switch, then the selected hub.
    for (std::size_t k = 0; k < pth.size(); ++k) {
      const SwitchId v = pth[k];
      if (v != *nh && !r.on[v]) continue;
      if (k == 0 && v != *nh) continue;
      auto done = deliver_services(ctx, v, remaining, r);
      services.insert(services.end(), done.begin(), done.end());
    }
    cn = *nh;
    if (cn == f.dest && !remaining.empty()) return std::nullopt;
  }

  if (cn != f.dest) {
    auto tree = shortest_path_fault(
        model, cn, slot, [&](SwitchId u, SwitchId v) { return r.fits(u, v, ctx.rate); },
        [&](SwitchId v) { return !removed[v]; });
    if (!tree.reachable(f.dest)) return std::nullopt;
    extend(tree.path_to(f.dest));
  }
  if (survival + 1e-12 < ctx.min_survival || delay > ctx.delay_budget + 1e-9) return std::nullopt;
  return FlowAssignment::from_path(cp, services);
}

}  // namespace detail

// Greedy (non-recursive) HFES over all flows.
inline SolveResult solve_greedy(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                const Assignment& prev, const VnfCatalog& catalog, std::size_t slot = 0,
                                const Assignment* pinned = nullptr) {
  return detail::place_sequentially(model, flows, prev, catalog, slot, pinned,
                                    [&](const FlowSpec& f, const Residual& residual) {
                                      return detail::greedy_place(model, f, residual, catalog, slot);
                                    });
}

enum class Heuristic { recursive, greedy };

struct HeuristicRecovery {
  SolveResult result;
  std::vector<FlowId> affected;
  NetworkModel residual_model;
};

// Same pinning rule as the exact recovery: only flows touching a failed
// switch are re-placed, with the heuristic.
inline HeuristicRecovery recover_with_heuristic(Heuristic algo, const NetworkModel& model,
                                                const std::vector<FlowSpec>& flows, const Assignment& prev,
                                                const std::set<SwitchId>& failed, const VnfCatalog& catalog,
                                                std::size_t slot = 0, const HfesConfig& config = {}) {
  HeuristicRecovery out;
  out.residual_model = without_switches(model, failed);
  auto split = split_for_recovery(out.residual_model, flows, prev, failed, catalog, slot);
  for (const auto& f : split.affected) out.affected.push_back(f.id);
  out.affected.insert(out.affected.end(), split.lost.begin(), split.lost.end());
  std::sort(out.affected.begin(), out.affected.end());
  std::vector<FlowSpec> live;
  for (const auto& f : flows)
    if (std::find(split.lost.begin(), split.lost.end(), f.id) == split.lost.end()) live.push_back(f);
  out.result = algo == Heuristic::greedy
                   ? solve_greedy(out.residual_model, live, prev, catalog, slot, &split.pinned)
                   : solve_recursive(out.residual_model, live, prev, catalog, slot, config, &split.pinned);
  out.result.dropped.insert(out.result.dropped.end(), split.lost.begin(), split.lost.end());
  std::sort(out.result.dropped.begin(), out.result.dropped.end());
  if (!out.result.dropped.empty() && out.result.status == SolveStatus::feasible) out.result.status = SolveStatus::partial;
  return out;
}

}  // namespace fogsfc
