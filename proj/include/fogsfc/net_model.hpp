#pragma once

// Network, flow and assignment types shared by every solver, plus topology
// construction helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fogsfc {

using SwitchId = std::size_t;
using VnfId = std::size_t;
using FlowId = std::size_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Capacity used for the internal links created by expand_multi_server_fog.
inline constexpr double kUnconstrainedCapacity = 1e12;

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FogNode {
  SwitchId host_switch = 0;
  double capacity = 0.0;           // processing units
  std::vector<bool> supported_vnfs;
  double power_on_watts = 0.0;
  double idle_fraction = 0.0;      // IDLE draw is (1 - idle_fraction) * power

  bool supports(VnfId x) const { return x < supported_vnfs.size() && supported_vnfs[x]; }

  bool operator==(const FogNode&) const = default;
};

struct VnfCatalog {
  std::vector<double> proc_per_unit;  // processing units per Mb/s of flow rate
  std::vector<double> proc_time_ms;   // ms per unit of data

  std::size_t size() const { return proc_per_unit.size(); }

  static VnfCatalog uniform(std::size_t count, double proc_per_unit = 1.0, double proc_time_ms = 3.0) {
    return VnfCatalog{std::vector<double>(count, proc_per_unit), std::vector<double>(count, proc_time_ms)};
  }

  void validate() const {
    if (proc_per_unit.size() != proc_time_ms.size())
      throw ModelError("vnf catalog: proc_per_unit and proc_time_ms differ in length");
    for (std::size_t x = 0; x < size(); ++x) {
      if (!(proc_per_unit[x] >= 0.0) || !(proc_time_ms[x] >= 0.0))
        throw ModelError("vnf catalog: negative or NaN entry for vnf " + std::to_string(x));
    }
  }

  bool operator==(const VnfCatalog&) const = default;
};

// Dense N x N link matrices. Capacity 0 and delay +inf mean "no link".
class NetworkModel {
 public:
  NetworkModel() = default;

  explicit NetworkModel(std::size_t switch_count)
      : n_(switch_count),
        capacity_(switch_count * switch_count, 0.0),
        delay_(switch_count * switch_count, kInfinity),
        fault_(switch_count, std::vector<double>{0.0}),
        fog_(switch_count) {}

  std::size_t switch_count() const { return n_; }

  double capacity(SwitchId i, SwitchId j) const { return capacity_[i * n_ + j]; }
  double delay(SwitchId i, SwitchId j) const { return delay_[i * n_ + j]; }
  bool has_link(SwitchId i, SwitchId j) const { return capacity_[i * n_ + j] > 0.0; }

  void set_link(SwitchId i, SwitchId j, double capacity_mbps, double delay_ms) {
    check_switch(i);
    check_switch(j);
    if (i == j) throw ModelError("self link on switch " + std::to_string(i));
    if (!(capacity_mbps > 0.0) || !(delay_ms >= 0.0) || !std::isfinite(delay_ms))
      throw ModelError("link " + std::to_string(i) + "->" + std::to_string(j) +
                       ": capacity must be > 0 and delay finite and >= 0");
    capacity_[i * n_ + j] = capacity_mbps;
    delay_[i * n_ + j] = delay_ms;
  }

  void set_bidirectional_link(SwitchId i, SwitchId j, double capacity_mbps, double delay_ms) {
    set_link(i, j, capacity_mbps, delay_ms);
    set_link(j, i, capacity_mbps, delay_ms);
  }

  void remove_link(SwitchId i, SwitchId j) {
    capacity_[i * n_ + j] = 0.0;
    delay_[i * n_ + j] = kInfinity;
  }

  std::size_t directed_link_count() const {
    return static_cast<std::size_t>(
        std::count_if(capacity_.begin(), capacity_.end(), [](double b) { return b > 0.0; }));
  }

  std::vector<SwitchId> out_neighbors(SwitchId i) const {
    std::vector<SwitchId> out;
    for (SwitchId j = 0; j < n_; ++j)
      if (has_link(i, j)) out.push_back(j);
    return out;
  }

  // Fault probability of switch i in a slot. Slots past the stored horizon
  // reuse the last stored value.
  double fault_prob(SwitchId i, std::size_t slot) const {
    const auto& series = fault_[i];
    return series.empty() ? 0.0 : series[std::min(slot, series.size() - 1)];
  }
  const std::vector<double>& fault_series(SwitchId i) const { return fault_[i]; }
  void set_fault_series(SwitchId i, std::vector<double> per_slot) {
    check_switch(i);
    for (double p : per_slot)
      if (!(p >= 0.0 && p <= 1.0))
        throw ModelError("fault probability outside [0,1] on switch " + std::to_string(i));
    if (per_slot.empty()) per_slot.push_back(0.0);
    fault_[i] = std::move(per_slot);
  }
  void set_fault_prob(SwitchId i, double p) { set_fault_series(i, {p}); }

  const std::optional<FogNode>& fog(SwitchId i) const { return fog_[i]; }
  bool has_fog(SwitchId i) const { return fog_[i].has_value(); }
  void set_fog(SwitchId i, FogNode node) {
    check_switch(i);
    if (node.capacity < 0.0 || node.power_on_watts < 0.0)
      throw ModelError("fog node on switch " + std::to_string(i) + ": negative capacity or power");
    if (node.idle_fraction < 0.0 || node.idle_fraction > 1.0)
      throw ModelError("fog node on switch " + std::to_string(i) + ": idle_fraction outside [0,1]");
    node.host_switch = i;
    fog_[i] = std::move(node);
  }
  void clear_fog(SwitchId i) { fog_[i].reset(); }

  std::vector<SwitchId> fog_switches() const {
    std::vector<SwitchId> out;
    for (SwitchId i = 0; i < n_; ++i)
      if (fog_[i]) out.push_back(i);
    return out;
  }

  // NC_i, FN_(i,x) and E_i with the "no fog node" convention folded in.
  double node_capacity(SwitchId i) const { return fog_[i] ? fog_[i]->capacity : 0.0; }
  bool supports(SwitchId i, VnfId x) const { return fog_[i] && fog_[i]->supports(x); }
  double power(SwitchId i) const { return fog_[i] ? fog_[i]->power_on_watts : 0.0; }

  double mu() const { return mu_; }
  double mt() const { return mt_; }
  void set_mu(double mu) {
    if (!(mu > 0.0 && mu <= 1.0)) throw ModelError("mu must lie in (0,1]");
    mu_ = mu;
  }
  void set_mt(double mt) {
    if (!(mt >= 0.0 && mt <= 1.0)) throw ModelError("mt must lie in [0,1]");
    mt_ = mt;
  }

  std::size_t slot_horizon() const {
    std::size_t h = 1;
    for (const auto& s : fault_) h = std::max(h, s.size());
    return h;
  }

  void validate() const {
    for (SwitchId i = 0; i < n_; ++i) {
      if (capacity(i, i) != 0.0) throw ModelError("nonzero diagonal capacity at " + std::to_string(i));
      for (SwitchId j = 0; j < n_; ++j) {
        const double b = capacity(i, j), d = delay(i, j);
        if (b < 0.0 || d < 0.0) throw ModelError("negative capacity or delay");
        if ((b > 0.0) != std::isfinite(d))
          throw ModelError("capacity/delay sentinel mismatch on " + std::to_string(i) + "->" +
                           std::to_string(j));
      }
      for (double p : fault_[i])
        if (!(p >= 0.0 && p <= 1.0)) throw ModelError("fault probability outside [0,1]");
      if (fog_[i] && fog_[i]->host_switch != i) throw ModelError("fog node host mismatch");
    }
  }

  bool operator==(const NetworkModel&) const = default;

 private:
  void check_switch(SwitchId i) const {
    if (i >= n_) throw ModelError("unknown switch " + std::to_string(i));
  }

  std::size_t n_ = 0;
  std::vector<double> capacity_;
  std::vector<double> delay_;
  std::vector<std::vector<double>> fault_;
  std::vector<std::optional<FogNode>> fog_;
  double mu_ = 1.0;
  double mt_ = 0.1;
};

struct FlowSpec {
  FlowId id = 0;
  SwitchId source = 0;
  SwitchId dest = 0;
  std::vector<double> rates;                   // Mb/s, one entry per slot
  std::vector<std::vector<VnfId>> requested;   // sorted VNF ids, one entry per slot
  double max_delay_ms = kInfinity;

  double rate(std::size_t slot) const {
    return rates.empty() ? 0.0 : rates[std::min(slot, rates.size() - 1)];
  }
  const std::vector<VnfId>& vnfs(std::size_t slot) const {
    static const std::vector<VnfId> none;
    return requested.empty() ? none : requested[std::min(slot, requested.size() - 1)];
  }
  bool requests(VnfId x, std::size_t slot) const {
    const auto& r = vnfs(slot);
    return std::binary_search(r.begin(), r.end(), x);
  }

  void validate(std::size_t switch_count, std::size_t vnf_count) const {
    const std::string tag = "flow " + std::to_string(id) + ": ";
    if (source >= switch_count || dest >= switch_count) throw ModelError(tag + "unknown switch");
    if (source == dest) throw ModelError(tag + "source equals destination");
    for (double c : rates)
      if (!(c >= 0.0)) throw ModelError(tag + "negative rate");
    for (const auto& r : requested) {
      if (!std::is_sorted(r.begin(), r.end()) || std::adjacent_find(r.begin(), r.end()) != r.end())
        throw ModelError(tag + "requested vnfs must be sorted and unique");
      if (!r.empty() && r.back() >= vnf_count) throw ModelError(tag + "unknown vnf");
    }
  }

  bool operator==(const FlowSpec&) const = default;
};

struct Link {
  SwitchId from = 0;
  SwitchId to = 0;
  auto operator<=>(const Link&) const = default;
};

struct Service {
  VnfId vnf = 0;
  SwitchId node = 0;
  auto operator<=>(const Service&) const = default;
};

// One flow's rows of A^f and U^f. Links are kept sorted so that two
// assignments compare equal iff their matrices do.
struct FlowAssignment {
  std::vector<Link> links;
  std::vector<Service> services;

  static FlowAssignment from_path(const std::vector<SwitchId>& path, std::vector<Service> services = {}) {
    FlowAssignment fa;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) fa.links.push_back({path[k], path[k + 1]});
    fa.services = std::move(services);
    fa.normalize();
    return fa;
  }

  void normalize() {
    std::sort(links.begin(), links.end());
    links.erase(std::unique(links.begin(), links.end()), links.end());
    std::sort(services.begin(), services.end());
    services.erase(std::unique(services.begin(), services.end()), services.end());
  }

  bool uses_link(SwitchId i, SwitchId j) const {
    return std::binary_search(links.begin(), links.end(), Link{i, j});
  }

  bool touches(SwitchId s) const {
    for (const auto& l : links)
      if (l.from == s || l.to == s) return true;
    for (const auto& sv : services)
      if (sv.node == s) return true;
    return false;
  }

  bool operator==(const FlowAssignment&) const = default;
};

// A(t), U(t) and O(t) for one slot. Flows absent from `flows` have all-zero rows.
struct Assignment {
  std::size_t switch_count = 0;
  std::map<FlowId, FlowAssignment> flows;
  std::vector<bool> fog_on;

  Assignment() = default;
  explicit Assignment(std::size_t n) : switch_count(n), fog_on(n, false) {}

  // O_i = 1 exactly where some flow is served.
  void set_fog_on_from_services() {
    fog_on.assign(switch_count, false);
    for (const auto& [id, fa] : flows)
      for (const auto& s : fa.services) fog_on[s.node] = true;
  }

  bool operator==(const Assignment&) const = default;
};

// Built-in Abilene backbone: 11 switches, 14 bidirectional 1 Gb/s links with
// 100 ms propagation delay, MT = 0.1. Switches are numbered
// 0 Seattle, 1 Sunnyvale, 2 Los Angeles, 3 Denver, 4 Kansas City, 5 Houston,
// 6 Chicago, 7 Indianapolis, 8 Atlanta, 9 Washington, 10 New York.
inline NetworkModel abilene(double fault_prob = 0.01) {
  static constexpr std::pair<SwitchId, SwitchId> kLinks[] = {
      {0, 1}, {0, 3}, {1, 2}, {1, 3}, {2, 5}, {3, 4}, {4, 5},
      {4, 7}, {5, 8}, {7, 6}, {7, 8}, {6, 10}, {8, 9}, {10, 9},
  };
  NetworkModel m(11);
  for (auto [a, b] : kLinks) m.set_bidirectional_link(a, b, 1000.0, 100.0);
  for (SwitchId i = 0; i < 11; ++i) m.set_fault_prob(i, fault_prob);
  m.set_mu(1.0);
  m.set_mt(0.1);
  return m;
}

// Splits a multi-server Fog Node into one single-server node per server.
// The first server stays on `sw`; each further server gets a new switch
// (appended at the end) joined to `sw` by zero-delay, unconstrained links.
// New switches have fault probability 0 so traversing them does not change
// a path's survival probability.
inline NetworkModel expand_multi_server_fog(const NetworkModel& model, SwitchId sw,
                                            const std::vector<FogNode>& servers) {
  if (sw >= model.switch_count()) throw ModelError("unknown switch " + std::to_string(sw));
  if (servers.empty()) throw ModelError("expand_multi_server_fog: no servers given");

  const std::size_t n = model.switch_count();
  NetworkModel out(n + servers.size() - 1);
  out.set_mu(model.mu());
  out.set_mt(model.mt());
  for (SwitchId i = 0; i < n; ++i) {
    for (SwitchId j = 0; j < n; ++j)
      if (model.has_link(i, j)) out.set_link(i, j, model.capacity(i, j), model.delay(i, j));
    out.set_fault_series(i, model.fault_series(i));
    if (model.fog(i) && i != sw) out.set_fog(i, *model.fog(i));
  }
  out.set_fog(sw, servers.front());
  for (std::size_t k = 1; k < servers.size(); ++k) {
    const SwitchId added = n + k - 1;
    out.set_bidirectional_link(sw, added, kUnconstrainedCapacity, 0.0);
    out.set_fault_prob(added, 0.0);
    out.set_fog(added, servers[k]);
  }
  return out;
}

// Copy of the model with the given switches isolated: their links and Fog
// Nodes are removed, indices are preserved.
inline NetworkModel without_switches(const NetworkModel& model, const std::set<SwitchId>& failed) {
  NetworkModel out = model;
  for (SwitchId s : failed) {
    if (s >= model.switch_count()) throw ModelError("unknown switch " + std::to_string(s));
    for (SwitchId j = 0; j < model.switch_count(); ++j) {
      out.remove_link(s, j);
      out.remove_link(j, s);
    }
    out.clear_fog(s);
  }
  return out;
}

}  // namespace fogsfc
