#pragma once

// Seeded traffic-demand generator and the S1..S9 parameter presets.
//
// Every random quantity comes from its own mt19937_64 stream seeded with
// (seed, stream tag), so changing one parameter (e.g. the rate ratio) does
// not reshuffle unrelated draws such as endpoints or VNF sets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "fogsfc/net_model.hpp"

namespace fogsfc {

inline constexpr std::size_t kUnboundedFlows = std::numeric_limits<std::size_t>::max();

struct GeneratorParams {
  double rate_ratio = 0.05;  // B^f
  double fog_ratio = 0.5;    // gamma
  double mean_vnfs = 2.0;    // R^f
  double vnf_ratio = 0.7;    // X_gamma
  std::size_t min_vnfs = 2;
  std::size_t max_vnfs = 5;
  double edge_ratio = 1.0;    // tau
  double source_ratio = 1.0;  // tau_s
  double dest_ratio = 1.0;    // tau_d
  double omega = 0.4;
  std::size_t max_flows_per_source = 10;  // F_m, kUnboundedFlows for none
  std::size_t vnf_types = 10;             // X
  std::uint64_t seed = 1;

  std::size_t slots = 1;
  double mean_fault_prob = 0.01;     // per-switch p drawn from U[0, 2 * mean] each slot
  double link_capacity_mbps = 1000.0;
  double capacity_factor = 1.0;      // NC_i = factor * incoming link capacity
  double watts_per_unit = 0.2;       // E_i = watts_per_unit * NC_i
  double idle_fraction = 0.5;
  double delay_allowance_hops = 8.0;

  void validate() const {
    auto ratio = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw ModelError(std::string("generator: ") + name + " must lie in [0, 1]");
    };
    ratio(rate_ratio, "rate_ratio");
    ratio(fog_ratio, "fog_ratio");
    ratio(vnf_ratio, "vnf_ratio");
    ratio(edge_ratio, "edge_ratio");
    ratio(source_ratio, "source_ratio");
    ratio(dest_ratio, "dest_ratio");
    if (!(omega > 0.0)) throw ModelError("generator: omega must be positive");
    // The mean may sit outside [min_vnfs, max_vnfs] (S9 asks for 6 with a
    // cap of 5); draws are clipped either way.
    if (min_vnfs > max_vnfs) throw ModelError("generator: need min_vnfs <= max_vnfs");
    if (!(mean_vnfs >= 1.0)) throw ModelError("generator: mean_vnfs must be at least 1");
    if (max_flows_per_source < 1) throw ModelError("generator: max_flows_per_source must be at least 1");
    if (vnf_types < 1) throw ModelError("generator: vnf_types must be at least 1");
    if (slots < 1) throw ModelError("generator: slots must be at least 1");
    ratio(2.0 * mean_fault_prob, "2 * mean_fault_prob");
    if (!(link_capacity_mbps > 0.0) || !(capacity_factor >= 0.0) || !(watts_per_unit >= 0.0))
      throw ModelError("generator: capacities and power must be non-negative");
    ratio(idle_fraction, "idle_fraction");
    if (!(delay_allowance_hops >= 0.0)) throw ModelError("generator: delay_allowance_hops must be non-negative");
  }
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8", "S9"};
  return names;
}

// Table of the nine evaluation scenarios. S1-S3 vary the rate ratio, S4-S6
// the fog ratio, S7-S9 the mean number of requested VNFs.
inline GeneratorParams scenario_params(const std::string& name, std::uint64_t seed = 1) {
  static constexpr double kRate[] = {0.01, 0.05, 0.1, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05};
  static constexpr double kFog[] = {0.5, 0.5, 0.5, 0.5, 0.7, 1.0, 0.5, 0.5, 0.5};
  static constexpr double kVnfs[] = {2, 2, 2, 2, 2, 2, 2, 4, 6};
  const auto& names = scenario_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ModelError("unknown scenario '" + name + "' (expected S1..S9)");
  const auto k = static_cast<std::size_t>(it - names.begin());
  GeneratorParams p;
  p.rate_ratio = kRate[k];
  p.fog_ratio = kFog[k];
  p.mean_vnfs = kVnfs[k];
  p.seed = seed;
  return p;
}

inline std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

namespace detail {

enum Stream : std::uint64_t {
  kFogStream = 1,
  kFogVnfStream,
  kFaultStream,
  kEdgeStream,
  kEndpointStream,
  kFlowCountStream,
  kDestStream,
  kVnfCountStream,
  kVnfPickStream,
  kRateStream,
};

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t sub = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(sub)};
  return std::mt19937_64(seq);
}

// Geometric on {1, 2, ...} with the given mean (success probability 1/mean).
template <class Rng>
std::size_t geometric(Rng& rng, double mean) {
  const double p = std::min(1.0, 1.0 / std::max(mean, 1e-12));
  if (p >= 1.0) return 1;
  std::geometric_distribution<std::size_t> g(p);
  return g(rng) + 1;
}

template <class Rng>
std::vector<SwitchId> pick(Rng& rng, const std::vector<SwitchId>& from, std::size_t k) {
  std::vector<SwitchId> out;
  std::sample(from.begin(), from.end(), std::back_inserter(out), std::min(k, from.size()), rng);
  return out;
}

}  // namespace detail

// Flow count of one source: geometric with mean omega * N_d, values above
// max_flows_per_source set to it.
template <class Rng>
std::size_t draw_flow_count(Rng& rng, double mean, std::size_t max_flows) {
  return std::min(detail::geometric(rng, mean), max_flows);
}

// Fog Nodes on round(gamma * N) switches. The switches are a prefix of one
// seeded permutation, so a larger gamma keeps every node of a smaller one,
// and each node's VNF set depends only on (seed, switch).
inline NetworkModel assign_fog_placement(const NetworkModel& model, const GeneratorParams& params) {
  params.validate();
  NetworkModel out = model;
  const std::size_t n = model.switch_count();
  for (SwitchId i = 0; i < n; ++i) out.clear_fog(i);

  std::vector<SwitchId> order(n);
  std::iota(order.begin(), order.end(), SwitchId{0});
  auto rng = detail::stream(params.seed, detail::kFogStream);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t fogs = std::min(n, round_half_up(params.fog_ratio * static_cast<double>(n)));
  const std::size_t per_node = std::min(params.vnf_types, round_half_up(params.vnf_ratio * params.vnf_types));

  std::vector<std::size_t> types(params.vnf_types);
  std::iota(types.begin(), types.end(), std::size_t{0});
  for (std::size_t k = 0; k < fogs; ++k) {
    const SwitchId sw = order[k];
    double incoming = 0.0;
    for (SwitchId u = 0; u < n; ++u)
      if (model.has_link(u, sw)) incoming += model.capacity(u, sw);
    FogNode node;
    node.capacity = params.capacity_factor * incoming;
    node.power_on_watts = params.watts_per_unit * node.capacity;
    node.idle_fraction = params.idle_fraction;
    node.supported_vnfs.assign(params.vnf_types, false);
    auto vr = detail::stream(params.seed, detail::kFogVnfStream, sw);
    std::vector<std::size_t> chosen;
    std::sample(types.begin(), types.end(), std::back_inserter(chosen), per_node, vr);
    for (auto x : chosen) node.supported_vnfs[x] = true;
    out.set_fog(sw, std::move(node));
  }
  return out;
}

// Per-switch, per-slot fault probabilities from U[0, 2 * mean].
inline NetworkModel draw_fault_probabilities(const NetworkModel& model, const GeneratorParams& params) {
  NetworkModel out = model;
  auto rng = detail::stream(params.seed, detail::kFaultStream);
  std::uniform_real_distribution<double> u(0.0, 2.0 * params.mean_fault_prob);
  for (SwitchId i = 0; i < model.switch_count(); ++i) {
    std::vector<double> series(params.slots);
    for (auto& p : series) p = u(rng);
    out.set_fault_series(i, std::move(series));
  }
  return out;
}

// Flow population for `params.slots` slots. Rates are redrawn every slot; the
// requested VNF set is fixed per flow. The delay budget covers the service
// time at the flow's peak rate plus `delay_allowance_hops` of the slowest link.
inline std::vector<FlowSpec> generate_demands(const NetworkModel& model, const GeneratorParams& params,
                                              const VnfCatalog& catalog) {
  params.validate();
  const std::size_t n = model.switch_count();
  if (n < 2) throw ModelError("generator: need at least two switches");
  if (catalog.size() < params.vnf_types) throw ModelError("generator: vnf catalog smaller than vnf_types");

  std::vector<SwitchId> all(n);
  std::iota(all.begin(), all.end(), SwitchId{0});
  auto edge_rng = detail::stream(params.seed, detail::kEdgeStream);
  const auto edge = detail::pick(edge_rng, all, round_half_up(params.edge_ratio * static_cast<double>(n)));
  auto ep_rng = detail::stream(params.seed, detail::kEndpointStream);
  auto sources =
      detail::pick(ep_rng, edge, round_half_up(params.edge_ratio * params.source_ratio * static_cast<double>(n)));
  auto dests =
      detail::pick(ep_rng, edge, round_half_up(params.edge_ratio * params.dest_ratio * static_cast<double>(n)));
  std::sort(sources.begin(), sources.end());
  std::sort(dests.begin(), dests.end());

  double max_link_delay = 0.0;
  for (SwitchId i = 0; i < n; ++i)
    for (SwitchId j = 0; j < n; ++j)
      if (model.has_link(i, j)) max_link_delay = std::max(max_link_delay, model.delay(i, j));

  auto count_rng = detail::stream(params.seed, detail::kFlowCountStream);
  auto dest_rng = detail::stream(params.seed, detail::kDestStream);
  auto vcount_rng = detail::stream(params.seed, detail::kVnfCountStream);
  auto vpick_rng = detail::stream(params.seed, detail::kVnfPickStream);
  auto rate_rng = detail::stream(params.seed, detail::kRateStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double rate_scale = 2.0 * params.rate_ratio * params.link_capacity_mbps;
  const double mean_flows = params.omega * static_cast<double>(dests.size());

  std::vector<std::size_t> types(params.vnf_types);
  std::iota(types.begin(), types.end(), std::size_t{0});

  std::vector<FlowSpec> flows;
  for (SwitchId s : sources) {
    std::vector<SwitchId> targets;
    for (SwitchId d : dests)
      if (d != s) targets.push_back(d);
    const std::size_t count = draw_flow_count(count_rng, mean_flows, params.max_flows_per_source);
    if (targets.empty()) continue;
    for (std::size_t k = 0; k < count; ++k) {
      FlowSpec f;
      f.id = flows.size();
      f.source = s;
      f.dest = targets[std::uniform_int_distribution<std::size_t>(0, targets.size() - 1)(dest_rng)];
      const std::size_t want = std::clamp(detail::geometric(vcount_rng, params.mean_vnfs), params.min_vnfs,
                                          params.max_vnfs);
      std::vector<VnfId> req;
      std::sample(types.begin(), types.end(), std::back_inserter(req), std::min(want, params.vnf_types), vpick_rng);
      std::sort(req.begin(), req.end());
      f.requested = {req};
      f.rates.resize(params.slots);
      for (auto& r : f.rates) r = (1.0 - unit(rate_rng)) * rate_scale;  // (0, scale]
      const double peak = *std::max_element(f.rates.begin(), f.rates.end());
      double service = 0.0;
      for (VnfId x : req) service += catalog.proc_time_ms[x] * peak;
      f.max_delay_ms = service + params.delay_allowance_hops * max_link_delay;
      flows.push_back(std::move(f));
    }
  }
  if (flows.empty()) throw ModelError("generator: no eligible source/destination pair (edge ratios too small)");
  return flows;
}

struct Instance {
  NetworkModel model;
  VnfCatalog catalog;
  std::vector<FlowSpec> flows;
};

// Abilene with seeded fault probabilities, Fog Nodes and demands.
inline Instance build_instance(const GeneratorParams& params, const NetworkModel& base = abilene()) {
  Instance inst;
  inst.catalog = VnfCatalog::uniform(params.vnf_types);
  inst.model = assign_fog_placement(draw_fault_probabilities(base, params), params);
  inst.flows = generate_demands(inst.model, params, inst.catalog);
  return inst;
}

}  // namespace fogsfc
