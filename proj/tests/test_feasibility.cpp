#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fogsfc/feasibility.hpp"
#include "fogsfc/paths.hpp"

using namespace fogsfc;

namespace {

FlowSpec flow(FlowId id, SwitchId s, SwitchId d, double rate, std::vector<VnfId> vnfs = {},
              double max_delay = kInfinity) {
  FlowSpec f;
  f.id = id;
  f.source = s;
  f.dest = d;
  f.rates = {rate};
  f.requested = {vnfs};
  f.max_delay_ms = max_delay;
  return f;
}

NetworkModel line(std::size_t n, double cap = 1000.0, double delay = 100.0) {
  NetworkModel m(n);
  for (SwitchId i = 0; i + 1 < n; ++i) m.set_bidirectional_link(i, i + 1, cap, delay);
  return m;
}

FogNode fog(double nc, double watts, std::size_t vnfs, std::vector<VnfId> on) {
  FogNode f;
  f.capacity = nc;
  f.power_on_watts = watts;
  f.supported_vnfs.assign(vnfs, false);
  for (VnfId x : on) f.supported_vnfs[x] = true;
  return f;
}

// Five switches wired so that 0->2->4->3->1 is a path.
NetworkModel worked_model() {
  NetworkModel m(5);
  m.set_bidirectional_link(0, 2, 100, 1);
  m.set_bidirectional_link(2, 4, 100, 1);
  m.set_bidirectional_link(4, 3, 100, 1);
  m.set_bidirectional_link(3, 1, 100, 1);
  m.set_bidirectional_link(0, 1, 100, 1);
  return m;
}

Assignment with(std::size_t n, FlowId id, FlowAssignment fa) {
  Assignment a(n);
  a.flows.emplace(id, std::move(fa));
  a.set_fog_on_from_services();
  return a;
}

}  // namespace

TEST(LinkCapacity, LightFlowPasses) {
  auto m = line(2);
  std::vector<FlowSpec> fs{flow(0, 0, 1, 20)};
  auto a = with(2, 0, FlowAssignment::from_path({0, 1}));
  EXPECT_TRUE(check_link_capacity(m, fs, a, 0).empty());
}

TEST(LinkCapacity, ElevenFlowsOverflow) {
  auto m = line(2);
  std::vector<FlowSpec> fs;
  Assignment a(2);
  for (FlowId k = 0; k < 11; ++k) {
    fs.push_back(flow(k, 0, 1, 100));
    a.flows.emplace(k, FlowAssignment::from_path({0, 1}));
  }
  auto v = check_link_capacity(m, fs, a, 0);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].indices, (std::vector<std::size_t>{0, 1}));
  fs.pop_back();
  a.flows.erase(10);
  EXPECT_TRUE(check_link_capacity(m, fs, a, 0).empty());
}

TEST(LinkCapacity, MuScalesTheBound) {
  auto m = line(2);
  m.set_mu(0.5);
  std::vector<FlowSpec> fs{flow(0, 0, 1, 300), flow(1, 0, 1, 300)};
  Assignment a(2);
  a.flows.emplace(0, FlowAssignment::from_path({0, 1}));
  a.flows.emplace(1, FlowAssignment::from_path({0, 1}));
  EXPECT_EQ(check_link_capacity(m, fs, a, 0).size(), 1u);
}

TEST(LinkCapacity, UsingMissingLinkIsViolation) {
  auto m = line(3);
  std::vector<FlowSpec> fs{flow(0, 0, 2, 1)};
  auto a = with(3, 0, FlowAssignment::from_path({0, 2}));
  EXPECT_EQ(check_link_capacity(m, fs, a, 0).size(), 1u);
}

TEST(Conservation, WorkedPathPasses) {
  auto m = worked_model();
  std::vector<FlowSpec> fs{flow(0, 0, 1, 10)};
  auto a = with(5, 0, FlowAssignment::from_path({0, 2, 4, 3, 1}));
  EXPECT_TRUE(check_flow_conservation(m, fs, a, 0).empty());
  EXPECT_TRUE(check_loop_free(m, fs, a, 0).empty());
}

TEST(Conservation, EmptyRowsFlagEndpoints) {
  auto m = worked_model();
  std::vector<FlowSpec> fs{flow(0, 0, 1, 10)};
  Assignment a(5);
  auto v = check_flow_conservation(m, fs, a, 0);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].indices[1], 0u);
  EXPECT_EQ(v[1].indices[1], 1u);
}

TEST(LoopFree, DetachedCycleIsCaught) {
  // 0->1 carries the flow, 2->3->4->2 is a separate loop with balanced degrees.
  NetworkModel m(5);
  m.set_link(0, 1, 10, 1);
  m.set_link(2, 3, 10, 1);
  m.set_link(3, 4, 10, 1);
  m.set_link(4, 2, 10, 1);
  std::vector<FlowSpec> fs{flow(0, 0, 1, 1)};
  FlowAssignment fa = FlowAssignment::from_path({0, 1});
  fa.links.push_back({2, 3});
  fa.links.push_back({3, 4});
  fa.links.push_back({4, 2});
  fa.normalize();
  auto a = with(5, 0, fa);
  EXPECT_TRUE(check_flow_conservation(m, fs, a, 0).empty());
  EXPECT_EQ(check_loop_free(m, fs, a, 0).size(), 3u);
  EXPECT_FALSE(recover_path(fs[0], fa));
}

TEST(LoopFree, TwoOutgoingLinks) {
  NetworkModel m(3);
  m.set_link(0, 1, 10, 1);
  m.set_link(0, 2, 10, 1);
  m.set_link(1, 2, 10, 1);
  std::vector<FlowSpec> fs{flow(0, 0, 2, 1)};
  FlowAssignment fa;
  fa.links = {{0, 1}, {0, 2}, {1, 2}};
  fa.normalize();
  auto a = with(3, 0, fa);
  EXPECT_FALSE(check_loop_free(m, fs, a, 0).empty());
}

TEST(Delay, PropagationBudget) {
  auto cat = VnfCatalog::uniform(4, 1.0, 3.0);
  auto f = flow(0, 0, 1, 10, {1, 2}, 500);
  EXPECT_DOUBLE_EQ(propagation_budget(f, cat, 0), 440.0);
  auto g = flow(1, 0, 1, 10, {}, 500);
  EXPECT_DOUBLE_EQ(propagation_budget(g, cat, 0), 500.0);
}

TEST(Delay, HopCountsAgainstBudget) {
  auto m = line(6);
  auto cat = VnfCatalog::uniform(4, 1.0, 3.0);
  std::vector<FlowSpec> three{flow(0, 0, 3, 10, {1, 2}, 500)};
  EXPECT_TRUE(check_delay(m, three, with(6, 0, FlowAssignment::from_path({0, 1, 2, 3})), cat, 0).empty());
  std::vector<FlowSpec> five{flow(0, 0, 5, 10, {1, 2}, 500)};
  auto v = check_delay(m, five, with(6, 0, FlowAssignment::from_path({0, 1, 2, 3, 4, 5})), cat, 0);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, constraint::kDelay);
}

TEST(Delay, NegativeBudgetFails) {
  auto m = line(2, 1000, 1);
  auto cat = VnfCatalog::uniform(1, 1.0, 3.0);
  std::vector<FlowSpec> fs{flow(0, 0, 1, 10, {0}, 20)};
  EXPECT_LT(propagation_budget(fs[0], cat, 0), 0.0);
  EXPECT_EQ(check_delay(m, fs, with(2, 0, FlowAssignment::from_path({0, 1})), cat, 0).size(), 1u);
}

TEST(Fault, ZeroProbabilities) {
  auto m = line(3);
  auto f = flow(0, 0, 2, 1);
  EXPECT_DOUBLE_EQ(path_fault_probability(m, f, FlowAssignment::from_path({0, 1, 2}), 0), 0.0);
}

TEST(Fault, SingleHop) {
  auto m = line(2);
  m.set_fault_prob(0, 0.1);
  m.set_fault_prob(1, 0.1);
  auto f = flow(0, 0, 1, 1);
  EXPECT_NEAR(path_fault_probability(m, f, FlowAssignment::from_path({0, 1}), 0), 0.19, 1e-15);
}

TEST(Fault, CertainFailure) {
  auto m = line(3);
  m.set_fault_prob(1, 1.0);
  auto f = flow(0, 0, 2, 1);
  EXPECT_DOUBLE_EQ(path_fault_probability(m, f, FlowAssignment::from_path({0, 1, 2}), 0), 1.0);
}

TEST(Fault, MatchesSurvivalProduct) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  auto m = line(6);
  for (SwitchId i = 0; i < 6; ++i) m.set_fault_prob(i, u(rng));
  auto f = flow(0, 0, 5, 1);
  const std::vector<SwitchId> p{0, 1, 2, 3, 4, 5};
  EXPECT_NEAR(path_fault_probability(m, f, FlowAssignment::from_path(p), 0), 1.0 - path_survival(m, p, 0), 1e-15);
}

TEST(Fault, ViolationAboveMt) {
  auto m = line(3);
  for (SwitchId i = 0; i < 3; ++i) m.set_fault_prob(i, 0.05);
  std::vector<FlowSpec> fs{flow(0, 0, 2, 1)};
  EXPECT_EQ(check_fault(m, fs, with(3, 0, FlowAssignment::from_path({0, 1, 2})), 0).size(), 1u);
  m.set_mt(0.15);
  EXPECT_TRUE(check_fault(m, fs, with(3, 0, FlowAssignment::from_path({0, 1, 2})), 0).empty());
}

TEST(PathId, HandValues) {
  EXPECT_EQ(path_id(flow(0, 0, 2, 1), FlowAssignment::from_path({0, 2})), 5u);
  EXPECT_EQ(path_id(flow(0, 0, 1, 1), FlowAssignment::from_path({0, 2, 4, 3, 1})), 31u);
  EXPECT_EQ(path_id(std::vector<SwitchId>{0, 2}), 5u);
  EXPECT_EQ(path_id(std::vector<SwitchId>{0, 2, 4, 3, 1}), 31u);
}

TEST(PathId, OrderDoesNotMatter) {
  EXPECT_EQ(path_id(std::vector<SwitchId>{0, 2, 4, 3, 1}), path_id(std::vector<SwitchId>{0, 4, 2, 3, 1}));
  EXPECT_EQ(path_id(flow(0, 0, 1, 1), FlowAssignment::from_path({0, 4, 2, 3, 1})), 31u);
}

TEST(FaultTable, HandValues) {
  NetworkModel m(4);
  m.set_fault_prob(0, 0.1);
  m.set_fault_prob(2, 0.1);
  m.set_fault_prob(3, 0.3);
  const auto t = fault_table(m, 0);
  ASSERT_EQ(t.size(), 16u);
  EXPECT_DOUBLE_EQ(t[0], 0.0);
  EXPECT_NEAR(t[5], 0.19, 1e-15);
  EXPECT_NEAR(t[2], 0.0, 1e-15);
}

TEST(FaultTable, MonotoneInSupersets) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  NetworkModel m(7);
  for (SwitchId i = 0; i < 7; ++i) m.set_fault_prob(i, u(rng));
  const auto t = fault_table(m, 0);
  for (std::size_t r = 0; r < t.size(); ++r)
    for (std::size_t b = 0; b < 7; ++b) EXPECT_GE(t[r | (std::size_t{1} << b)] + 1e-15, t[r]);
}

TEST(FaultTable, CapEnforced) {
  NetworkModel m(6);
  EXPECT_THROW(fault_table(m, 0, 5), ModelError);
  EXPECT_NO_THROW(fault_table(m, 0, 6));
}

TEST(Sfc, WorkedExamplePasses) {
  auto m = worked_model();
  m.set_fog(0, fog(100, 10, 4, {2}));
  m.set_fog(3, fog(100, 10, 4, {1}));
  auto cat = VnfCatalog::uniform(4);
  std::vector<FlowSpec> fs{flow(0, 0, 1, 10, {1, 2})};
  auto a = with(5, 0, FlowAssignment::from_path({0, 2, 4, 3, 1}, {{2, 0}, {1, 3}}));
  EXPECT_TRUE(check_sfc(m, fs, a, cat, 0).empty());
  EXPECT_TRUE(check_fog_on(m, a).violations.empty());
}

TEST(Sfc, ServiceOffPath) {
  auto m = worked_model();
  m.set_fog(4, fog(100, 10, 4, {1}));
  auto cat = VnfCatalog::uniform(4);
  std::vector<FlowSpec> fs{flow(0, 0, 1, 10, {1})};
  auto a = with(5, 0, FlowAssignment::from_path({0, 1}, {{1, 4}}));
  auto v = check_sfc(m, fs, a, cat, 0);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, constraint::kServiceOnPath);
}

TEST(Sfc, CoverageSupportAndOnce) {
  auto m = line(3);
  m.set_fog(1, fog(100, 10, 3, {0}));
  auto cat = VnfCatalog::uniform(3);
  std::vector<FlowSpec> fs{flow(0, 0, 2, 10, {0, 1})};
  auto a = with(3, 0, FlowAssignment::from_path({0, 1, 2}, {{0, 1}, {2, 1}}));
  auto v = check_sfc(m, fs, a, cat, 0);
  auto count = [&](const char* fam) {
    return std::count_if(v.begin(), v.end(), [&](const Violation& x) { return x.constraint == fam; });
  };
  EXPECT_EQ(count(constraint::kServiceCoverage), 1);  // vnf 1 never served
  EXPECT_EQ(count(constraint::kServiceSupported), 1);  // vnf 2 not hosted
  EXPECT_EQ(count(constraint::kServiceOnce), 1);       // vnf 2 not requested
}

TEST(Sfc, FogCapacity) {
  auto m = line(3);
  m.set_fog(1, fog(25, 10, 2, {0, 1}));
  VnfCatalog cat{{1.0, 2.0}, {0.0, 0.0}};
  std::vector<FlowSpec> fs{flow(0, 0, 2, 10, {0, 1})};
  auto a = with(3, 0, FlowAssignment::from_path({0, 1, 2}, {{0, 1}, {1, 1}}));
  auto v = check_sfc(m, fs, a, cat, 0);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, constraint::kFogCapacity);
  m.set_fog(1, fog(30, 10, 2, {0, 1}));
  EXPECT_TRUE(check_sfc(m, fs, a, cat, 0).empty());
}

TEST(Energy, SumsOnNodes) {
  NetworkModel m(3);
  m.set_fog(0, fog(1, 100, 1, {}));
  m.set_fog(1, fog(1, 200, 1, {}));
  m.set_fog(2, fog(1, 300, 1, {}));
  Assignment a(3);
  EXPECT_DOUBLE_EQ(energy(m, a), 0.0);
  a.fog_on = {true, false, true};
  EXPECT_DOUBLE_EQ(energy(m, a), 400.0);
}

TEST(Energy, IdleIsInformational) {
  NetworkModel m(2);
  auto f = fog(1, 200, 1, {});
  f.idle_fraction = 0.25;
  m.set_fog(0, f);
  m.set_fog(1, f);
  Assignment a(2);
  a.fog_on = {true, false};
  EXPECT_DOUBLE_EQ(energy(m, a), 200.0);
  EXPECT_DOUBLE_EQ(idle_energy(m, a), 150.0);
}

TEST(SideEffect, Cases) {
  Assignment p(5), q(5);
  p.flows.emplace(0, FlowAssignment::from_path({0, 1, 2}));
  EXPECT_EQ(side_effect(p, p), 0u);
  q.flows.emplace(0, FlowAssignment::from_path({0, 3, 4, 2}));
  EXPECT_EQ(side_effect(p, q), 5u);
  Assignment fresh(5);
  EXPECT_EQ(side_effect(fresh, q), 3u);
  EXPECT_EQ(side_effect(q, fresh), 3u);
}

TEST(FogOn, Cases) {
  auto m = line(3);
  m.set_fog(1, fog(100, 10, 1, {0}));
  Assignment a(3);
  a.flows.emplace(0, FlowAssignment::from_path({0, 1, 2}, {{0, 1}}));
  auto r = check_fog_on(m, a);
  EXPECT_EQ(r.violations.size(), 1u);

  Assignment none(3);
  auto clean = check_fog_on(m, none);
  EXPECT_TRUE(clean.violations.empty());
  EXPECT_TRUE(clean.warnings.empty());

  none.fog_on[1] = true;
  auto warn = check_fog_on(m, none);
  EXPECT_TRUE(warn.violations.empty());
  EXPECT_EQ(warn.warnings.size(), 1u);
}

TEST(Objective, Weights) {
  EXPECT_DOUBLE_EQ(objective_value(0.5, 0.5, 400, 6), 203.0);
  EXPECT_DOUBLE_EQ(objective_value(1.0, 0.0, 400, 6), 400.0);
  EXPECT_DOUBLE_EQ(objective_value(0.0, 1.0, 400, 6), 6.0);
  EXPECT_THROW(check_weights(0.6, 0.6), ModelError);
  EXPECT_THROW(check_weights(-0.1, 1.1), ModelError);
}

TEST(Metrics, TwoHopFlow) {
  auto m = line(3);
  m.set_fog(1, fog(100, 50, 1, {0}));
  m.set_fog(2, fog(100, 70, 1, {0}));
  auto cat = VnfCatalog::uniform(1);
  std::vector<FlowSpec> fs{flow(0, 0, 2, 200, {0})};
  Assignment prev(3);
  auto a = with(3, 0, FlowAssignment::from_path({0, 1, 2}, {{0, 1}}));
  auto r = metrics(m, fs, cat, prev, a, 0);
  EXPECT_EQ(r.served_flows, 1u);
  EXPECT_DOUBLE_EQ(r.mean_path_len, 2.0);
  EXPECT_DOUBLE_EQ(r.mean_link_util, 0.2);
  EXPECT_DOUBLE_EQ(r.max_link_util, 0.2);
  EXPECT_DOUBLE_EQ(r.energy_j, 50.0);
  EXPECT_EQ(r.side_effect, 2u);
  // Switch 2 is IDLE and stays out of the Fog averages.
  EXPECT_DOUBLE_EQ(r.mean_fog_util, 2.0);
  EXPECT_DOUBLE_EQ(r.max_fog_util, 2.0);
}

TEST(Evaluate, CleanAssignment) {
  auto m = worked_model();
  m.set_fog(3, fog(100, 120, 2, {0, 1}));
  auto cat = VnfCatalog::uniform(2, 1.0, 0.0);
  std::vector<FlowSpec> fs{flow(0, 0, 1, 10, {0, 1}, 10)};
  Assignment prev(5);
  auto a = with(5, 0, FlowAssignment::from_path({0, 2, 4, 3, 1}, {{0, 3}, {1, 3}}));
  auto r = evaluate(m, fs, cat, prev, a, 0.5, 0.5, 0);
  EXPECT_TRUE(r.feasible());
  EXPECT_DOUBLE_EQ(r.energy_j, 120.0);
  EXPECT_EQ(r.side_effect, 4u);
  EXPECT_DOUBLE_EQ(r.objective, 62.0);
}

TEST(Evaluate, UnknownFlowFlagged) {
  auto m = line(2);
  auto cat = VnfCatalog::uniform(1);
  Assignment prev(2);
  auto a = with(2, 9, FlowAssignment::from_path({0, 1}));
  auto r = evaluate(m, {}, cat, prev, a, 1, 0, 0);
  EXPECT_FALSE(r.feasible());
}
