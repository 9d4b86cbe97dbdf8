#pragma once

// Constraint checks, objective and evaluation metrics for one slot of an
// Assignment. Every solver output is validated here, and the brute-force
// oracle in the test suite scores candidates with the same functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fogsfc/net_model.hpp"

namespace fogsfc {

// Constraint family names used in reports.
namespace constraint {
inline constexpr const char* kLinkCapacity = "link_capacity";
inline constexpr const char* kFlowConservation = "flow_conservation";
inline constexpr const char* kLoopFree = "loop_free";
inline constexpr const char* kDelay = "delay";
inline constexpr const char* kFault = "fault";
inline constexpr const char* kServiceCoverage = "service_coverage";
inline constexpr const char* kServiceOnPath = "service_on_path";
inline constexpr const char* kServiceSupported = "service_supported";
inline constexpr const char* kServiceOnce = "service_once";
inline constexpr const char* kFogCapacity = "fog_capacity";
inline constexpr const char* kFogOn = "fog_on";
}  // namespace constraint

struct Violation {
  std::string constraint;
  std::vector<std::size_t> indices;  // (i,j) for links, (flow, node[, vnf]) otherwise
  std::string detail;
};

using Violations = std::vector<Violation>;

namespace detail {

inline constexpr double kTolerance = 1e-9;

inline bool exceeds(double value, double bound) {
  return value > bound + kTolerance * std::max(1.0, std::abs(bound));
}

inline const FlowAssignment& rows_of(const Assignment& a, FlowId id) {
  static const FlowAssignment empty;
  auto it = a.flows.find(id);
  return it == a.flows.end() ? empty : it->second;
}

inline void require_shape(const NetworkModel& model, const Assignment& a) {
  if (a.switch_count != model.switch_count() || a.fog_on.size() != model.switch_count())
    throw ModelError("assignment shape does not match the network model");
  for (const auto& [id, fa] : a.flows) {
    for (const auto& l : fa.links)
      if (l.from >= a.switch_count || l.to >= a.switch_count) throw ModelError("link index out of range");
    for (const auto& s : fa.services)
      if (s.node >= a.switch_count) throw ModelError("service node out of range");
  }
}

inline std::vector<double> link_loads(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                      const Assignment& a, std::size_t slot) {
  const std::size_t n = model.switch_count();
  std::vector<double> load(n * n, 0.0);
  for (const auto& f : flows)
    for (const auto& l : rows_of(a, f.id).links) load[l.from * n + l.to] += f.rate(slot);
  return load;
}

inline std::vector<double> fog_loads(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                     const Assignment& a, const VnfCatalog& catalog, std::size_t slot) {
  std::vector<double> load(model.switch_count(), 0.0);
  for (const auto& f : flows)
    for (const auto& s : rows_of(a, f.id).services) {
      const double fp = s.vnf < catalog.size() ? catalog.proc_per_unit[s.vnf] : 0.0;
      load[s.node] += fp * f.rate(slot);
    }
  return load;
}

}  // namespace detail

// Ordered switch sequence encoded by a flow's link rows, or nullopt when the
// rows are not exactly one simple s->d path.
inline std::optional<std::vector<SwitchId>> recover_path(const FlowSpec& flow, const FlowAssignment& fa) {
  std::map<SwitchId, SwitchId> next;
  for (const auto& l : fa.links)
    if (!next.emplace(l.from, l.to).second) return std::nullopt;
  std::vector<SwitchId> path{flow.source};
  std::set<SwitchId> seen{flow.source};
  while (path.back() != flow.dest) {
    auto it = next.find(path.back());
    if (it == next.end()) return std::nullopt;
    if (!seen.insert(it->second).second) return std::nullopt;
    path.push_back(it->second);
  }
  if (path.size() - 1 != fa.links.size()) return std::nullopt;
  return path;
}

struct PathView {
  std::vector<SwitchId> nodes;
  std::uint64_t path_id = 0;
  double fault_prob = 0.0;
};

// Bitmask of switches with an outgoing used link, plus the destination.
// Bit i stands for switch i (0-based), so the mask is the path's switch set.
inline std::uint64_t path_id(const FlowSpec& flow, const FlowAssignment& fa) {
  std::uint64_t z = 0;
  for (const auto& l : fa.links) z |= std::uint64_t{1} << l.from;
  return z | (std::uint64_t{1} << flow.dest);
}

inline std::uint64_t path_id(const std::vector<SwitchId>& nodes) {
  std::uint64_t z = 0;
  for (SwitchId v : nodes) z |= std::uint64_t{1} << v;
  return z;
}

// 1 - a*b: survival of every switch with an outgoing used link times the
// survival of the destination.
inline double fault_of_rows(const NetworkModel& model, const FlowSpec& flow, const FlowAssignment& fa,
                            std::size_t slot) {
  std::set<SwitchId> senders;
  for (const auto& l : fa.links) senders.insert(l.from);
  double b = 1.0;
  for (SwitchId i : senders) b *= 1.0 - model.fault_prob(i, slot);
  const double a = 1.0 - model.fault_prob(flow.dest, slot);
  return 1.0 - a * b;
}

inline double path_fault_probability(const NetworkModel& model, const FlowSpec& flow, const FlowAssignment& fa,
                                     std::size_t slot) {
  if (!recover_path(flow, fa)) throw ModelError("flow " + std::to_string(flow.id) + ": rows are not a simple path");
  return fault_of_rows(model, flow, fa, slot);
}

inline PathView path_view(const NetworkModel& model, const FlowSpec& flow, const FlowAssignment& fa,
                          std::size_t slot) {
  auto nodes = recover_path(flow, fa);
  if (!nodes) throw ModelError("flow " + std::to_string(flow.id) + ": rows are not a simple path");
  return PathView{*nodes, path_id(flow, fa), fault_of_rows(model, flow, fa, slot)};
}

inline constexpr std::size_t kFaultTableHardCap = 20;

// P_r for every path ID r in [0, 2^N).
inline std::vector<double> fault_table(const NetworkModel& model, std::size_t slot,
                                       std::size_t cap = kFaultTableHardCap) {
  const std::size_t n = model.switch_count();
  if (n > std::min(cap, kFaultTableHardCap))
    throw ModelError("fault_table: " + std::to_string(n) + " switches exceeds the exact-mode cap");
  const std::size_t size = std::size_t{1} << n;
  std::vector<double> survival(size, 1.0);
  for (std::size_t r = 1; r < size; ++r) {
    const std::size_t low = static_cast<std::size_t>(__builtin_ctzll(r));
    survival[r] = survival[r & (r - 1)] * (1.0 - model.fault_prob(low, slot));
  }
  std::vector<double> table(size);
  for (std::size_t r = 0; r < size; ++r) table[r] = 1.0 - survival[r];
  return table;
}

inline Violations check_link_capacity(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                      const Assignment& a, std::size_t slot) {
  detail::require_shape(model, a);
  const std::size_t n = model.switch_count();
  const auto load = detail::link_loads(model, flows, a, slot);
  Violations out;
  for (SwitchId i = 0; i < n; ++i)
    for (SwitchId j = 0; j < n; ++j) {
      const double bound = model.mu() * model.capacity(i, j);
      const bool used = std::any_of(flows.begin(), flows.end(),
                                    [&](const FlowSpec& f) { return detail::rows_of(a, f.id).uses_link(i, j); });
      if (detail::exceeds(load[i * n + j], bound) || (used && !model.has_link(i, j)))
        out.push_back({constraint::kLinkCapacity, {i, j},
                       "load " + std::to_string(load[i * n + j]) + " > " + std::to_string(bound)});
    }
  return out;
}

inline Violations check_flow_conservation(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                          const Assignment& a, std::size_t) {
  detail::require_shape(model, a);
  const std::size_t n = model.switch_count();
  Violations out;
  for (const auto& f : flows) {
    std::vector<long> balance(n, 0);
    for (const auto& l : detail::rows_of(a, f.id).links) {
      ++balance[l.from];
      --balance[l.to];
    }
    for (SwitchId i = 0; i < n; ++i) {
      const long want = i == f.source ? 1 : (i == f.dest ? -1 : 0);
      if (balance[i] != want)
        out.push_back({constraint::kFlowConservation, {f.id, i},
                       "out-in = " + std::to_string(balance[i]) + ", expected " + std::to_string(want)});
    }
  }
  return out;
}

// At most one outgoing used link per switch, and every used link must lie on
// the walk that starts at the source (detached cycles are rejected).
inline Violations check_loop_free(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                  const Assignment& a, std::size_t) {
  detail::require_shape(model, a);
  Violations out;
  for (const auto& f : flows) {
    const auto& fa = detail::rows_of(a, f.id);
    std::map<SwitchId, std::vector<SwitchId>> next;
    for (const auto& l : fa.links) next[l.from].push_back(l.to);
    for (const auto& [i, succ] : next)
      if (succ.size() > 1)
        out.push_back({constraint::kLoopFree, {f.id, i}, std::to_string(succ.size()) + " outgoing links"});

    std::set<Link> walked;
    std::set<SwitchId> seen{f.source};
    SwitchId cur = f.source;
    while (true) {
      auto it = next.find(cur);
      if (it == next.end() || it->second.size() != 1) break;
      const SwitchId nxt = it->second.front();
      walked.insert({cur, nxt});
      if (!seen.insert(nxt).second) {
        out.push_back({constraint::kLoopFree, {f.id, nxt}, "walk revisits switch"});
        break;
      }
      cur = nxt;
    }
    for (const auto& l : fa.links)
      if (!walked.count(l))
        out.push_back({constraint::kLoopFree, {f.id, l.from, l.to}, "link not on the source walk"});
  }
  return out;
}

// T^f_d = T^f - sum_x TP_x * R^f_x(t) * C^f(t). May be negative.
inline double propagation_budget(const FlowSpec& flow, const VnfCatalog& catalog, std::size_t slot) {
  double service = 0.0;
  for (VnfId x : flow.vnfs(slot))
    if (x < catalog.size()) service += catalog.proc_time_ms[x] * flow.rate(slot);
  return flow.max_delay_ms - service;
}

inline Violations check_delay(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                              const Assignment& a, const VnfCatalog& catalog, std::size_t slot) {
  detail::require_shape(model, a);
  Violations out;
  for (const auto& f : flows) {
    double total = 0.0;
    for (const auto& l : detail::rows_of(a, f.id).links) total += model.delay(l.from, l.to);
    const double budget = propagation_budget(f, catalog, slot);
    if (detail::exceeds(total, budget))
      out.push_back({constraint::kDelay, {f.id},
                     "propagation " + std::to_string(total) + " ms > budget " + std::to_string(budget) + " ms"});
  }
  return out;
}

inline Violations check_fault(const NetworkModel& model, const std::vector<FlowSpec>& flows, const Assignment& a,
                              std::size_t slot) {
  detail::require_shape(model, a);
  Violations out;
  for (const auto& f : flows) {
    const double p = fault_of_rows(model, f, detail::rows_of(a, f.id), slot);
    if (p > model.mt() + 1e-12)
      out.push_back({constraint::kFault, {f.id},
                     "fault " + std::to_string(p) + " > MT " + std::to_string(model.mt())});
  }
  return out;
}

inline Violations check_sfc(const NetworkModel& model, const std::vector<FlowSpec>& flows, const Assignment& a,
                            const VnfCatalog& catalog, std::size_t slot) {
  detail::require_shape(model, a);
  Violations out;
  for (const auto& f : flows) {
    const auto& fa = detail::rows_of(a, f.id);
    std::set<SwitchId> entered;
    for (const auto& l : fa.links) entered.insert(l.to);
    std::map<VnfId, std::size_t> served;
    for (const auto& s : fa.services) {
      ++served[s.vnf];
      if (s.node != f.source && !entered.count(s.node))
        out.push_back({constraint::kServiceOnPath, {f.id, s.node, s.vnf}, "service on a switch the flow never enters"});
      if (!model.supports(s.node, s.vnf))
        out.push_back({constraint::kServiceSupported, {f.id, s.node, s.vnf}, "vnf not hosted on this switch"});
    }
    for (VnfId x : f.vnfs(slot))
      if (!served.count(x)) out.push_back({constraint::kServiceCoverage, {f.id, x}, "requested vnf not served"});
    for (const auto& [x, count] : served) {
      const std::size_t want = f.requests(x, slot) ? 1 : 0;
      if (count != want)
        out.push_back({constraint::kServiceOnce, {f.id, x},
                       "served " + std::to_string(count) + " times, expected " + std::to_string(want)});
    }
  }
  const auto load = detail::fog_loads(model, flows, a, catalog, slot);
  for (SwitchId i = 0; i < model.switch_count(); ++i)
    if (detail::exceeds(load[i], model.node_capacity(i)))
      out.push_back({constraint::kFogCapacity, {i},
                     "load " + std::to_string(load[i]) + " > NC " + std::to_string(model.node_capacity(i))});
  return out;
}

struct FogOnCheck {
  Violations violations;
  std::vector<std::string> warnings;
};

// O_i must be 1 wherever a service runs. ON without service is only a warning.
inline FogOnCheck check_fog_on(const NetworkModel& model, const Assignment& a) {
  detail::require_shape(model, a);
  FogOnCheck out;
  std::vector<bool> serving(model.switch_count(), false);
  for (const auto& [id, fa] : a.flows)
    for (const auto& s : fa.services) serving[s.node] = true;
  for (SwitchId i = 0; i < model.switch_count(); ++i) {
    if (serving[i] && !a.fog_on[i])
      out.violations.push_back({constraint::kFogOn, {i}, "serving switch is not ON"});
    if (!serving[i] && a.fog_on[i]) out.warnings.push_back("wasteful ON at switch " + std::to_string(i));
  }
  return out;
}

// E(t) in joules with a 1 s slot: sum of E_i over ON Fog Nodes.
inline double energy(const NetworkModel& model, const Assignment& a) {
  double e = 0.0;
  for (SwitchId i = 0; i < model.switch_count() && i < a.fog_on.size(); ++i)
    if (a.fog_on[i]) e += model.power(i);
  return e;
}

// Informational: draw of the IDLE Fog Nodes, (1 - idle_fraction) * E_i each.
inline double idle_energy(const NetworkModel& model, const Assignment& a) {
  double e = 0.0;
  for (SwitchId i = 0; i < model.switch_count(); ++i)
    if (model.fog(i) && !(i < a.fog_on.size() && a.fog_on[i]))
      e += (1.0 - model.fog(i)->idle_fraction) * model.fog(i)->power_on_watts;
  return e;
}

inline std::size_t link_difference(const FlowAssignment& x, const FlowAssignment& y) {
  std::vector<Link> diff;
  std::set_symmetric_difference(x.links.begin(), x.links.end(), y.links.begin(), y.links.end(),
                                std::back_inserter(diff));
  return diff.size();
}

// NS(t): L1 distance between the two link-assignment tensors.
inline std::size_t side_effect(const Assignment& prev, const Assignment& next) {
  if (prev.switch_count != 0 && next.switch_count != 0 && prev.switch_count != next.switch_count)
    throw ModelError("side_effect: assignments have different switch counts");
  static const FlowAssignment empty;
  std::size_t ns = 0;
  for (const auto& [id, fa] : next.flows) {
    auto it = prev.flows.find(id);
    ns += link_difference(it == prev.flows.end() ? empty : it->second, fa);
  }
  for (const auto& [id, fa] : prev.flows)
    if (!next.flows.count(id)) ns += fa.links.size();
  return ns;
}

inline void check_weights(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0) || std::abs(alpha + beta - 1.0) > 1e-9)
    throw ModelError("objective weights must lie in [0,1] and sum to 1");
}

inline double objective_value(double alpha, double beta, double energy_j, std::size_t ns) {
  return alpha * energy_j + beta * static_cast<double>(ns);
}

inline double objective(const NetworkModel& model, const Assignment& prev, const Assignment& next, double alpha,
                        double beta) {
  check_weights(alpha, beta);
  return objective_value(alpha, beta, energy(model, next), side_effect(prev, next));
}

struct ConstraintReport {
  Violations violations;
  std::vector<std::string> warnings;
  double objective = 0.0;
  double energy_j = 0.0;
  double idle_energy_j = 0.0;
  std::size_t side_effect = 0;

  bool feasible() const { return violations.empty(); }
  std::size_t count(const std::string& family) const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [&](const Violation& v) { return v.constraint == family; }));
  }
};

// Every constraint family plus objective terms. `flows` are the flows the
// assignment is expected to serve.
inline ConstraintReport evaluate(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                 const VnfCatalog& catalog, const Assignment& prev, const Assignment& next,
                                 double alpha, double beta, std::size_t slot) {
  ConstraintReport r;
  auto append = [&](Violations v) { r.violations.insert(r.violations.end(), v.begin(), v.end()); };
  append(check_link_capacity(model, flows, next, slot));
  append(check_flow_conservation(model, flows, next, slot));
  append(check_loop_free(model, flows, next, slot));
  append(check_delay(model, flows, next, catalog, slot));
  append(check_fault(model, flows, next, slot));
  append(check_sfc(model, flows, next, catalog, slot));
  auto on = check_fog_on(model, next);
  append(on.violations);
  r.warnings = on.warnings;
  for (const auto& [id, fa] : next.flows)
    if (std::none_of(flows.begin(), flows.end(), [&](const FlowSpec& f) { return f.id == id; }))
      r.violations.push_back({constraint::kFlowConservation, {id}, "assignment for an unknown flow"});
  r.energy_j = energy(model, next);
  r.idle_energy_j = idle_energy(model, next);
  r.side_effect = side_effect(prev, next);
  r.objective = objective(model, prev, next, alpha, beta);
  return r;
}

struct MetricsReport {
  double energy_j = 0.0;
  double idle_energy_j = 0.0;
  std::size_t side_effect = 0;
  std::size_t served_flows = 0;
  double mean_fault = 0.0;
  double max_fault = 0.0;
  double mean_path_len = 0.0;
  double mean_link_util = 0.0;
  double max_link_util = 0.0;
  double mean_fog_util = 0.0;
  double max_fog_util = 0.0;
};

// Utilizations are averaged over used links and over ON Fog Nodes only.
inline MetricsReport metrics(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                             const VnfCatalog& catalog, const Assignment& prev, const Assignment& next,
                             std::size_t slot) {
  detail::require_shape(model, next);
  MetricsReport m;
  m.energy_j = energy(model, next);
  m.idle_energy_j = idle_energy(model, next);
  m.side_effect = side_effect(prev, next);

  double fault_sum = 0.0, len_sum = 0.0;
  for (const auto& f : flows) {
    auto it = next.flows.find(f.id);
    if (it == next.flows.end()) continue;
    auto nodes = recover_path(f, it->second);
    if (!nodes) continue;
    const double p = fault_of_rows(model, f, it->second, slot);
    ++m.served_flows;
    fault_sum += p;
    m.max_fault = std::max(m.max_fault, p);
    len_sum += static_cast<double>(nodes->size() - 1);
  }
  if (m.served_flows > 0) {
    m.mean_fault = fault_sum / static_cast<double>(m.served_flows);
    m.mean_path_len = len_sum / static_cast<double>(m.served_flows);
  }

  const std::size_t n = model.switch_count();
  const auto load = detail::link_loads(model, flows, next, slot);
  std::set<Link> used;
  for (const auto& f : flows)
    for (const auto& l : detail::rows_of(next, f.id).links) used.insert(l);
  double util_sum = 0.0;
  std::size_t util_count = 0;
  for (const auto& l : used) {
    if (!model.has_link(l.from, l.to)) continue;
    const double u = load[l.from * n + l.to] / model.capacity(l.from, l.to);
    util_sum += u;
    ++util_count;
    m.max_link_util = std::max(m.max_link_util, u);
  }
  if (util_count > 0) m.mean_link_util = util_sum / static_cast<double>(util_count);

  const auto fload = detail::fog_loads(model, flows, next, catalog, slot);
  double fog_sum = 0.0;
  std::size_t fog_count = 0;
  for (SwitchId i = 0; i < n; ++i) {
    if (!next.fog_on[i] || model.node_capacity(i) <= 0.0) continue;
    const double u = fload[i] / model.node_capacity(i);
    fog_sum += u;
    ++fog_count;
    m.max_fog_util = std::max(m.max_fog_util, u);
  }
  if (fog_count > 0) m.mean_fog_util = fog_sum / static_cast<double>(fog_count);
  return m;
}

}  // namespace fogsfc
