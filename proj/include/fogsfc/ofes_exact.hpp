#pragma once

// Exact minimisation of alpha*E(t) + beta*NS(t) for one slot.
//
// The fault constraint screens each path on its own, so the search first
// enumerates every admissible path per flow and then explores the joint
// space. The outer loop walks ON-sets S of Fog Nodes in ascending energy;
// for each S an inner branch and bound picks one (path, placement) per flow
// with services restricted to S and shared link/Fog capacity enforced.
// Because S is visited in energy order, the loop stops as soon as
// alpha*E(S) plus a side-effect lower bound can no longer beat the incumbent.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "fogsfc/feasibility.hpp"
#include "fogsfc/net_model.hpp"
#include "fogsfc/paths.hpp"
#include "fogsfc/solve_common.hpp"

namespace fogsfc {

struct SolveConfig {
  double alpha = 0.5;
  double beta = 0.5;
  std::size_t exact_cap_n = 12;
  double time_limit_s = 10.0;
  std::size_t path_budget = 100000;  // per flow; 0 means unlimited
  bool allow_drop = false;

  void validate() const {
    check_weights(alpha, beta);
    if (exact_cap_n > kFaultTableHardCap)
      throw ModelError("exact_cap_n may not exceed " + std::to_string(kFaultTableHardCap));
  }
};

struct CandidatePath {
  std::vector<SwitchId> nodes;
  std::uint64_t path_id = 0;
  double fault_prob = 0.0;
  double delay_ms = 0.0;
};

struct CandidatePaths {
  std::vector<CandidatePath> paths;
  bool truncated = false;
};

// Loop-free s->d paths that fit the flow's rate on every link (as a lone
// flow), meet the propagation budget and whose fault probability, looked up
// by path ID in the fault table, is at most MT.
inline CandidatePaths enumerate_candidate_paths(const NetworkModel& model, const FlowSpec& flow,
                                                const VnfCatalog& catalog, std::size_t slot,
                                                const SolveConfig& config, const std::vector<double>& table) {
  if (model.switch_count() > config.exact_cap_n)
    throw ModelError("instance has " + std::to_string(model.switch_count()) + " switches, exact cap is " +
                     std::to_string(config.exact_cap_n));
  CandidatePaths out;
  PathScreen screen;
  screen.max_delay_ms = propagation_budget(flow, catalog, slot);
  screen.min_survival = 1.0 - model.mt();
  screen.min_link_capacity = flow.rate(slot);
  if (screen.max_delay_ms < 0.0) return out;
  for_each_simple_path(model, flow.source, flow.dest, slot, screen, [&](const std::vector<SwitchId>& p) {
    const std::uint64_t z = path_id(p);
    const double fault = table[z];
    if (fault <= model.mt() + 1e-12) out.paths.push_back({p, z, fault, path_delay(model, p)});
    if (config.path_budget != 0 && out.paths.size() >= config.path_budget) {
      out.truncated = true;
      return false;
    }
    return true;
  });
  return out;
}

inline CandidatePaths enumerate_candidate_paths(const NetworkModel& model, const FlowSpec& flow,
                                                const VnfCatalog& catalog, std::size_t slot,
                                                const SolveConfig& config = {}) {
  if (model.switch_count() > config.exact_cap_n)
    throw ModelError("instance has " + std::to_string(model.switch_count()) + " switches, exact cap is " +
                     std::to_string(config.exact_cap_n));
  return enumerate_candidate_paths(model, flow, catalog, slot, config, fault_table(model, slot, config.exact_cap_n));
}

namespace detail {

// Names the first constraint family that rules out every route for a lone flow.
inline std::string diagnose_unroutable(const NetworkModel& model, const FlowSpec& flow, const VnfCatalog& catalog,
                                       std::size_t slot) {
  auto any_path = [&](const PathScreen& screen) {
    bool found = false;
    for_each_simple_path(model, flow.source, flow.dest, slot, screen, [&](const std::vector<SwitchId>&) {
      found = true;
      return false;
    });
    return found;
  };
  PathScreen screen;
  if (!any_path(screen)) return constraint::kFlowConservation;
  screen.min_link_capacity = flow.rate(slot);
  if (!any_path(screen)) return constraint::kLinkCapacity;
  screen.max_delay_ms = propagation_budget(flow, catalog, slot);
  if (!any_path(screen)) return constraint::kDelay;
  return constraint::kFault;
}

class ExactSearch {
 public:
  ExactSearch(const NetworkModel& model, const std::vector<FlowSpec>& free_flows, const Assignment& prev,
              const Assignment& pinned, const std::vector<FlowSpec>& pinned_flows, const VnfCatalog& catalog,
              const SolveConfig& config, std::size_t slot)
      : model_(model), prev_(prev), catalog_(catalog), config_(config), slot_(slot),
        start_(std::chrono::steady_clock::now()), base_(model) {
    n_ = model.switch_count();
    for (const auto& f : pinned_flows) base_.consume(f, pinned.flows.at(f.id), catalog, slot);
    for (SwitchId i = 0; i < n_; ++i)
      if (base_.on[i]) forced_mask_ |= std::uint64_t{1} << i;

    // Pinned flows equal prev, so only prev flows that vanished add to NS.
    std::set<FlowId> present;
    for (const auto& f : free_flows) present.insert(f.id);
    for (const auto& f : pinned_flows) present.insert(f.id);
    for (const auto& [id, fa] : prev.flows)
      if (!present.count(id)) ns_const_ += fa.links.size();
    for (const auto& [id, fa] : pinned.flows) {
      auto it = prev.flows.find(id);
      ns_const_ += link_difference(it == prev.flows.end() ? FlowAssignment{} : it->second, fa);
    }

    table_ = fault_table(model, slot, config.exact_cap_n);
    for (const auto& f : free_flows) flows_.push_back(prepare(f));
  }

  // Index of a flow that has no admissible candidate at all, or -1.
  long unroutable_flow() const {
    for (std::size_t k = 0; k < flows_.size(); ++k)
      if (flows_[k].cands.empty()) return static_cast<long>(k);
    return -1;
  }
  const FlowSpec& flow(std::size_t k) const { return flows_[k].spec; }
  bool truncated() const {
    return std::any_of(flows_.begin(), flows_.end(), [](const FlowState& f) { return f.truncated; });
  }

  struct Outcome {
    bool found = false;
    bool timed_out = false;
    double value = 0.0;
    Assignment assignment;
    std::size_t nodes = 0;
  };

  Outcome run() {
    std::vector<SwitchId> free_fog;
    for (SwitchId i : model_.fog_switches())
      if (!(forced_mask_ >> i & 1)) free_fog.push_back(i);

    std::vector<std::uint64_t> subsets;
    if (config_.alpha == 0.0) {
      std::uint64_t all = 0;
      for (SwitchId i : free_fog) all |= std::uint64_t{1} << i;
      subsets.push_back(all);
    } else {
      const std::size_t k = free_fog.size();
      subsets.reserve(std::size_t{1} << k);
      for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k); ++bits) {
        std::uint64_t mask = 0;
        for (std::size_t b = 0; b < k; ++b)
          if (bits >> b & 1) mask |= std::uint64_t{1} << free_fog[b];
        subsets.push_back(mask);
      }
      std::stable_sort(subsets.begin(), subsets.end(), [&](std::uint64_t a, std::uint64_t b) {
        const double ea = mask_energy(a), eb = mask_energy(b);
        if (ea != eb) return ea < eb;
        const int pa = __builtin_popcountll(a), pb = __builtin_popcountll(b);
        if (pa != pb) return pa < pb;
        return a < b;
      });
    }

    std::size_t ns_floor = ns_const_;
    for (const auto& f : flows_) ns_floor += f.cands.empty() ? 0 : f.min_ns;

    for (std::uint64_t subset : subsets) {
      const std::uint64_t allowed = subset | forced_mask_;
      const double e = mask_energy(allowed);
      if (found_ && !improves(config_.alpha * e + config_.beta * static_cast<double>(ns_floor))) break;
      if (!prepare_subset(allowed)) continue;
      if (found_ && !improves(config_.alpha * e + config_.beta * static_cast<double>(ns_const_ + suffix_[0]))) continue;
      subset_energy_ = e;
      residual_ = base_;
      choice_.assign(flows_.size(), {});
      if (!dfs(0, 0)) break;
    }

    Outcome out;
    out.found = found_;
    out.timed_out = timed_out_;
    out.value = best_;
    out.nodes = nodes_;
    if (found_) out.assignment = best_assignment_;
    return out;
  }

 private:
  struct Cand {
    std::vector<SwitchId> nodes;
    std::vector<Link> links;
    std::uint64_t path_id = 0;
    std::size_t ns = 0;
    std::vector<std::vector<SwitchId>> hosts;  // per requested vnf: path switches supporting it
  };

  struct FlowState {
    FlowSpec spec;
    double rate = 0.0;
    std::vector<VnfId> vnfs;  // requested, largest processing demand first
    std::vector<Cand> cands;
    std::vector<std::size_t> usable;  // candidate indices valid for the current subset
    std::size_t min_ns = 0;
    bool truncated = false;
  };

  struct Choice {
    std::size_t cand = 0;
    std::vector<Service> services;
  };

  FlowState prepare(const FlowSpec& f) {
    FlowState st;
    st.spec = f;
    st.rate = f.rate(slot_);
    st.vnfs = f.vnfs(slot_);
    std::stable_sort(st.vnfs.begin(), st.vnfs.end(), [&](VnfId a, VnfId b) {
      return catalog_.proc_per_unit[a] > catalog_.proc_per_unit[b];
    });
    auto cp = enumerate_candidate_paths(model_, f, catalog_, slot_, config_, table_);
    st.truncated = cp.truncated;
    static const FlowAssignment empty;
    auto pit = prev_.flows.find(f.id);
    const FlowAssignment& before = pit == prev_.flows.end() ? empty : pit->second;
    for (auto& p : cp.paths) {
      Cand c;
      c.nodes = p.nodes;
      c.links = FlowAssignment::from_path(p.nodes).links;
      c.path_id = p.path_id;
      c.ns = link_difference(before, FlowAssignment{c.links, {}});
      bool hostable = true;
      for (VnfId x : st.vnfs) {
        std::vector<SwitchId> h;
        for (SwitchId v : p.nodes)
          if (model_.supports(v, x)) h.push_back(v);
        if (h.empty()) hostable = false;
        c.hosts.push_back(std::move(h));
      }
      if (hostable) st.cands.push_back(std::move(c));
    }
    std::stable_sort(st.cands.begin(), st.cands.end(), [](const Cand& a, const Cand& b) {
      if (a.ns != b.ns) return a.ns < b.ns;
      if (a.path_id != b.path_id) return a.path_id < b.path_id;
      return a.nodes < b.nodes;
    });
    if (!st.cands.empty()) st.min_ns = st.cands.front().ns;
    return st;
  }

  double mask_energy(std::uint64_t mask) const {
    double e = 0.0;
    for (SwitchId i = 0; i < n_; ++i)
      if (mask >> i & 1) e += model_.power(i);
    return e;
  }

  bool improves(double value) const { return value < best_ - 1e-9 * std::max(1.0, std::abs(best_)); }

  // Filters candidates to those servable inside `allowed`; false when some
  // flow has none left or the aggregate per-VNF demand cannot fit.
  bool prepare_subset(std::uint64_t allowed) {
    std::map<VnfId, double> demand;
    for (const auto& f : flows_)
      for (VnfId x : f.vnfs) demand[x] += catalog_.proc_per_unit[x] * f.rate;
    double total_demand = 0.0, total_cap = 0.0;
    for (const auto& [x, d] : demand) {
      total_demand += d;
      double cap = 0.0;
      for (SwitchId i = 0; i < n_; ++i)
        if ((allowed >> i & 1) && model_.supports(i, x)) cap += std::max(0.0, base_.capacity[i]);
      if (d > cap + 1e-9) return false;
    }
    for (SwitchId i = 0; i < n_; ++i)
      if (allowed >> i & 1) total_cap += std::max(0.0, base_.capacity[i]);
    if (total_demand > total_cap + 1e-9) return false;

    suffix_.assign(flows_.size() + 1, 0);
    for (auto& f : flows_) {
      f.usable.clear();
      for (std::size_t c = 0; c < f.cands.size(); ++c) {
        const Cand& cand = f.cands[c];
        bool ok = true;
        for (std::size_t v = 0; v < f.vnfs.size() && ok; ++v) {
          const double need = catalog_.proc_per_unit[f.vnfs[v]] * f.rate;
          ok = std::any_of(cand.hosts[v].begin(), cand.hosts[v].end(), [&](SwitchId h) {
            return (allowed >> h & 1) && base_.capacity[h] + 1e-9 >= need;
          });
        }
        if (ok) f.usable.push_back(c);
      }
      if (f.usable.empty()) return false;
    }
    for (std::size_t k = flows_.size(); k-- > 0;)
      suffix_[k] = suffix_[k + 1] + flows_[k].cands[flows_[k].usable.front()].ns;
    allowed_ = allowed;
    return true;
  }

  bool out_of_time() {
    if ((nodes_ & 255) == 0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      if (elapsed > config_.time_limit_s) timed_out_ = true;
    }
    return timed_out_;
  }

  // Distinct service placements of one flow on one path, as far as future
  // constraints and the objective can tell (same per-switch load).
  std::vector<std::vector<Service>> placements(const FlowState& f, const Cand& c) const {
    std::vector<std::vector<Service>> out;
    std::set<std::vector<std::pair<SwitchId, double>>> seen;
    std::vector<Service> cur;
    std::vector<double> load(n_, 0.0);
    auto rec = [&](auto&& self, std::size_t v) -> void {
      if (v == f.vnfs.size()) {
        std::vector<std::pair<SwitchId, double>> key;
        for (const auto& s : cur) key.emplace_back(s.node, 0.0);
        std::sort(key.begin(), key.end());
        key.erase(std::unique(key.begin(), key.end()), key.end());
        for (auto& [node, l] : key) l = load[node];
        if (seen.insert(key).second) {
          auto services = cur;
          std::sort(services.begin(), services.end());
          out.push_back(std::move(services));
        }
        return;
      }
      const VnfId x = f.vnfs[v];
      const double need = catalog_.proc_per_unit[x] * f.rate;
      for (SwitchId h : c.hosts[v]) {
        if (!(allowed_ >> h & 1)) continue;
        if (residual_.capacity[h] - load[h] + 1e-9 < need) continue;
        load[h] += need;
        cur.push_back({x, h});
        self(self, v + 1);
        cur.pop_back();
        load[h] -= need;
      }
    };
    rec(rec, 0);
    return out;
  }

  // Returns false when the time limit stops the search.
  bool dfs(std::size_t k, std::size_t ns) {
    ++nodes_;
    if (out_of_time()) return false;
    if (k == flows_.size()) {
      record(ns);
      return true;
    }
    FlowState& f = flows_[k];
    for (std::size_t c : f.usable) {
      const Cand& cand = f.cands[c];
      const double bound = config_.alpha * subset_energy_ +
                           config_.beta * static_cast<double>(ns_const_ + ns + cand.ns + suffix_[k + 1]);
      if (found_ && !improves(bound)) break;
      bool fits = true;
      for (const auto& l : cand.links)
        if (!residual_.fits(l.from, l.to, f.rate)) fits = false;
      if (!fits) continue;
      for (const auto& l : cand.links) residual_.bandwidth[l.from * n_ + l.to] -= f.rate;
      for (auto& services : placements(f, cand)) {
        for (const auto& s : services) residual_.capacity[s.node] -= catalog_.proc_per_unit[s.vnf] * f.rate;
        choice_[k] = Choice{c, services};
        const bool go_on = dfs(k + 1, ns + cand.ns);
        for (const auto& s : services) residual_.capacity[s.node] += catalog_.proc_per_unit[s.vnf] * f.rate;
        if (!go_on) {
          for (const auto& l : cand.links) residual_.bandwidth[l.from * n_ + l.to] += f.rate;
          return false;
        }
      }
      for (const auto& l : cand.links) residual_.bandwidth[l.from * n_ + l.to] += f.rate;
    }
    return true;
  }

  void record(std::size_t ns) {
    std::uint64_t used = forced_mask_;
    for (std::size_t k = 0; k < flows_.size(); ++k)
      for (const auto& s : choice_[k].services) used |= std::uint64_t{1} << s.node;
    const double value =
        config_.alpha * mask_energy(used) + config_.beta * static_cast<double>(ns_const_ + ns);
    if (found_ && !improves(value)) return;
    found_ = true;
    best_ = value;
    best_assignment_ = Assignment(n_);
    for (std::size_t k = 0; k < flows_.size(); ++k) {
      const Cand& cand = flows_[k].cands[choice_[k].cand];
      best_assignment_.flows.emplace(flows_[k].spec.id, FlowAssignment{cand.links, choice_[k].services});
    }
  }

  const NetworkModel& model_;
  const Assignment& prev_;
  const VnfCatalog& catalog_;
  SolveConfig config_;
  std::size_t slot_;
  std::chrono::steady_clock::time_point start_;
  std::size_t n_ = 0;

  Residual base_;
  Residual residual_;
  std::uint64_t forced_mask_ = 0;
  std::uint64_t allowed_ = 0;
  std::size_t ns_const_ = 0;
  std::vector<double> table_;
  std::vector<FlowState> flows_;
  std::vector<std::size_t> suffix_;
  std::vector<Choice> choice_;
  double subset_energy_ = 0.0;

  bool found_ = false;
  bool timed_out_ = false;
  double best_ = 0.0;
  Assignment best_assignment_;
  std::size_t nodes_ = 0;
};

inline double processing_load(const FlowSpec& f, const VnfCatalog& catalog, std::size_t slot) {
  double load = f.rate(slot);
  for (VnfId x : f.vnfs(slot)) load += catalog.proc_per_unit[x] * f.rate(slot);
  return load;
}

}  // namespace detail

// Solves one slot exactly. Flows present in `pinned` keep their routes and
// only the remaining flows are decided. With config.allow_drop, flows that
// cannot be placed are dropped (largest load first when the conflict is
// joint) instead of failing the whole instance.
inline SolveResult solve_exact(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                               const Assignment& prev, const VnfCatalog& catalog, const SolveConfig& config,
                               std::size_t slot = 0, const Assignment* pinned = nullptr) {
  config.validate();
  if (model.switch_count() > config.exact_cap_n)
    throw ModelError("instance has " + std::to_string(model.switch_count()) + " switches, exact cap is " +
                     std::to_string(config.exact_cap_n));
  const std::size_t n = model.switch_count();
  const Assignment none(n);
  const Assignment& fixed = pinned ? *pinned : none;

  std::vector<FlowSpec> pinned_flows, free_flows;
  for (const auto& f : flows) (fixed.flows.count(f.id) ? pinned_flows : free_flows).push_back(f);
  std::sort(free_flows.begin(), free_flows.end(), [](const FlowSpec& a, const FlowSpec& b) { return a.id < b.id; });

  SolveResult result;
  std::size_t total_nodes = 0;
  while (true) {
    detail::ExactSearch search(model, free_flows, prev, fixed, pinned_flows, catalog, config, slot);
    const long bad = search.unroutable_flow();
    if (bad >= 0) {
      const FlowSpec& f = search.flow(static_cast<std::size_t>(bad));
      std::string family = detail::diagnose_unroutable(model, f, catalog, slot);
      if (family == constraint::kFault) {
        // Routes exist under every screen; the requested services are the obstacle.
        CandidatePaths cp = enumerate_candidate_paths(model, f, catalog, slot, config);
        if (!cp.paths.empty()) family = constraint::kServiceSupported;
      }
      if (!config.allow_drop) {
        result.status = SolveStatus::infeasible;
        result.reason = family + " (flow " + std::to_string(f.id) + ")";
        result.assignment = fixed;
        result.assignment.set_fog_on_from_services();
        result.search_nodes = total_nodes;
        return result;
      }
      result.dropped.push_back(f.id);
      free_flows.erase(free_flows.begin() + bad);
      continue;
    }

    auto outcome = search.run();
    total_nodes += outcome.nodes;
    if (outcome.found) {
      Assignment out = outcome.assignment;
      for (const auto& [id, fa] : fixed.flows) out.flows.emplace(id, fa);
      out.set_fog_on_from_services();
      result.assignment = std::move(out);
      result.objective = objective(model, prev, result.assignment, config.alpha, config.beta);
      result.search_nodes = total_nodes;
      if (outcome.timed_out) result.status = SolveStatus::timeout;
      else if (search.truncated()) result.status = SolveStatus::budgeted;
      else result.status = SolveStatus::optimal;
      if (!result.dropped.empty()) result.reason = "dropped flows could not be placed";
      std::sort(result.dropped.begin(), result.dropped.end());
      return result;
    }
    if (outcome.timed_out || !config.allow_drop || free_flows.empty()) {
      result.status = outcome.timed_out ? SolveStatus::timeout : SolveStatus::infeasible;
      result.reason = outcome.timed_out ? "time limit reached before any feasible assignment"
                                        : "joint link_capacity/fog_capacity";
      result.assignment = fixed;
      result.assignment.set_fog_on_from_services();
      result.search_nodes = total_nodes;
      for (const auto& f : free_flows) result.dropped.push_back(f.id);
      std::sort(result.dropped.begin(), result.dropped.end());
      return result;
    }
    auto worst = std::max_element(free_flows.begin(), free_flows.end(), [&](const FlowSpec& a, const FlowSpec& b) {
      const double la = detail::processing_load(a, catalog, slot), lb = detail::processing_load(b, catalog, slot);
      if (la != lb) return la < lb;
      return a.id < b.id;
    });
    result.dropped.push_back(worst->id);
    free_flows.erase(worst);
  }
}

struct RecoveryResult {
  SolveResult result;
  std::vector<FlowId> affected;  // flows that were re-placed (or dropped)
  NetworkModel residual_model;
};

// Re-places only the flows whose previous route touches a failed switch.
// Every other flow keeps its previous route and adds nothing to NS.
inline RecoveryResult recover_from_failure(const NetworkModel& model, const std::vector<FlowSpec>& flows,
                                           const Assignment& prev, const std::set<SwitchId>& failed,
                                           const VnfCatalog& catalog, SolveConfig config, std::size_t slot = 0) {
  if (failed.empty()) throw ModelError("recover_from_failure: no failed switches given");
  RecoveryResult out;
  out.residual_model = without_switches(model, failed);
  auto split = split_for_recovery(out.residual_model, flows, prev, failed, catalog, slot);
  for (const auto& f : split.affected) out.affected.push_back(f.id);
  out.affected.insert(out.affected.end(), split.lost.begin(), split.lost.end());
  std::sort(out.affected.begin(), out.affected.end());

  std::vector<FlowSpec> live;
  for (const auto& f : flows)
    if (std::find(split.lost.begin(), split.lost.end(), f.id) == split.lost.end()) live.push_back(f);
  config.allow_drop = true;
  out.result = solve_exact(out.residual_model, live, prev, catalog, config, slot, &split.pinned);
  out.result.dropped.insert(out.result.dropped.end(), split.lost.begin(), split.lost.end());
  std::sort(out.result.dropped.begin(), out.result.dropped.end());
  if (!split.lost.empty() && out.result.status == SolveStatus::optimal) out.result.reason = "flows lost their endpoint";
  out.result.objective = objective(out.residual_model, prev, out.result.assignment, config.alpha, config.beta);
  return out;
}

}  // namespace fogsfc
