#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fogsfc/scenario.hpp"

using namespace fogsfc;

namespace {

ScenarioConfig preset(const std::string& id, std::size_t max_flows = 0) {
  ScenarioConfig c;
  c.id = id;
  c.params = scenario_params(id);
  c.max_flows = max_flows;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Scenario, ColdStartSideEffectIsLinkCount) {
  auto c = preset("S2");
  const auto recs = run_seed(c, 3, SolverKind::greedy);
  ASSERT_EQ(recs.size(), 1u);
  std::size_t links = 0;
  for (const auto& [id, fa] : recs[0].assignment.flows) links += fa.links.size();
  EXPECT_GT(links, 0u);
  EXPECT_EQ(recs[0].metrics.side_effect, links);
  EXPECT_EQ(recs[0].event, "timer");
}

TEST(Scenario, FailureReplacesOnlyAffectedFlows) {
  auto c = preset("S2");
  c.slots = 2;
  c.reconfig_period = 100;  // slot 1 is not a timer slot
  const auto base = run_seed(c, 4, SolverKind::greedy);
  const SwitchId failed = 4;
  c.failures = {{1, {failed}}};
  const auto recs = run_seed(c, 4, SolverKind::greedy);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].event, "failure");
  const auto& before = recs[0].assignment;
  const auto inst = scenario_instance(c, 4, 2);
  std::vector<FlowId> expected, lost;
  for (const auto& f : inst.flows) {
    const bool endpoint = f.source == failed || f.dest == failed;
    if (!before.flows.count(f.id)) {
      if (!endpoint) expected.push_back(f.id);  // unplaced flows get another try
      continue;
    }
    if (before.flows.at(f.id).touches(failed)) (endpoint ? lost : expected).push_back(f.id);
  }
  EXPECT_FALSE(expected.empty());
  EXPECT_FALSE(lost.empty());
  EXPECT_EQ(recs[1].replaced, expected);
  for (FlowId id : lost) EXPECT_TRUE(std::count(recs[1].dropped.begin(), recs[1].dropped.end(), id));
  for (const auto& [id, fa] : before.flows) {
    if (fa.touches(failed)) continue;
    ASSERT_TRUE(recs[1].assignment.flows.count(id));
    EXPECT_EQ(recs[1].assignment.flows.at(id), fa);
  }
  for (const auto& [id, fa] : recs[1].assignment.flows) EXPECT_FALSE(fa.touches(failed));
  EXPECT_EQ(base[0].assignment, recs[0].assignment);
}

TEST(Scenario, QuietSlotKeepsRoutes) {
  auto c = preset("S1");
  c.slots = 3;
  c.reconfig_period = 100;
  const auto recs = run_seed(c, 2, SolverKind::greedy);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[1].event, "incremental");
  for (const auto& [id, fa] : recs[1].assignment.flows)
    if (recs[0].assignment.flows.count(id)) {
      EXPECT_EQ(recs[0].assignment.flows.at(id), fa);
    }
}

TEST(Scenario, HigherRateCostsMoreEnergy) {
  double low = 0.0, high = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    low += run_seed(preset("S1"), seed, SolverKind::greedy)[0].metrics.energy_j;
    high += run_seed(preset("S3"), seed, SolverKind::greedy)[0].metrics.energy_j;
  }
  EXPECT_LE(low, high);
}

TEST(Scenario, ArrivalIsPlaced) {
  auto c = preset("S2", 5);
  c.slots = 2;
  c.reconfig_period = 100;
  FlowSpec f;
  f.id = 1000;
  f.source = 0;
  f.dest = 9;
  f.rates = {1.0};
  f.requested = {{}};
  f.max_delay_ms = 2000;
  c.arrivals = {{1, f}};
  const auto recs = run_seed(c, 1, SolverKind::greedy);
  EXPECT_FALSE(recs[0].assignment.flows.count(1000));
  EXPECT_TRUE(recs[1].assignment.flows.count(1000));
  c.arrivals[0].flow.id = 0;
  EXPECT_THROW(run_seed(c, 1, SolverKind::greedy), ModelError);
}

TEST(Scenario, RepeatedRunsMatch) {
  auto c = preset("S8");
  c.slots = 2;
  c.seeds = {1, 2};
  const auto a = records_csv(run_scenario(c, {SolverKind::greedy, SolverKind::recursive}));
  const auto b = records_csv(run_scenario(c, {SolverKind::greedy, SolverKind::recursive}));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')),
            "scenario,seed,solver,slot,energy_j,ns,mean_fault,max_fault,mean_path_len,mean_link_util,max_link_util,"
            "mean_fog_util,max_fog_util,wall_ms,status");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 2 * 2 * 2);
}

TEST(Scenario, PureSideEffectWeightIsStable) {
  auto c = preset("S2", 4);
  c.exact.time_limit_s = 30;
  const auto rows = sweep_alpha(c, {0.0, 0.0}, 5);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].ns, rows[1].ns);
  EXPECT_DOUBLE_EQ(rows[0].energy_j, rows[1].energy_j);
  EXPECT_EQ(rows[0].ns, 0u);
}

TEST(Scenario, SweepTradesSideEffectForEnergy) {
  auto c = preset("S2", 4);
  c.exact.time_limit_s = 30;
  const auto rows = sweep_alpha(c, {0.0, 0.001, 0.1, 1.0}, 2);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_LE(rows[k].energy_j, rows[k - 1].energy_j + 1e-9);
    EXPECT_GE(rows[k].ns, rows[k - 1].ns);
    EXPECT_DOUBLE_EQ(rows[k].alpha + rows[k].beta, 1.0);
  }
}

TEST(Scenario, CompareOnSmallInstance) {
  auto c = preset("S2", 2);
  c.seeds = {1, 2, 3};
  const auto rows = compare_solvers(c);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.exact_available);
    EXPECT_EQ(r.exact_status, "optimal");
    if (r.energy_ratio) {
      EXPECT_GE(*r.energy_ratio, 1.0 - 1e-12);
    }
  }
}

TEST(Config, JsonRoundTrip) {
  auto c = preset("S7");
  c.alpha = 0.25;
  c.beta = 0.75;
  c.solver = SolverKind::recursive;
  c.slots = 3;
  c.seeds = {4, 9};
  c.failures = {{2, {1, 5}}};
  c.max_flows = 12;
  ScenarioConfig d;
  apply_scenario_json(d, scenario_to_json(c));
  EXPECT_EQ(scenario_to_json(d), scenario_to_json(c));
  EXPECT_EQ(config_hash(d), config_hash(c));
  d.alpha = 0.3;
  d.beta = 0.7;
  EXPECT_NE(config_hash(d), config_hash(c));
}

TEST(Config, PresetIdResetsParams) {
  ScenarioConfig c;
  apply_scenario_json(c, json{{"id", "S6"}});
  EXPECT_DOUBLE_EQ(c.params.fog_ratio, 1.0);
}

TEST(Config, RejectsBadInput) {
  ScenarioConfig c;
  EXPECT_THROW(apply_scenario_json(c, json{{"alhpa", 0.5}}), ParseError);
  EXPECT_THROW(apply_scenario_json(c, json{{"alpha", 0.7}}), ParseError);
  EXPECT_THROW(apply_scenario_json(c, json{{"slots", 2}, {"failures", {{{"slot", 5}, {"switches", {1}}}}}}),
               ParseError);
  EXPECT_THROW(apply_scenario_json(c, json{{"solver", "simplex"}}), ParseError);
  EXPECT_THROW(apply_scenario_json(c, json::array()), ParseError);
}

TEST(Results, FilesWritten) {
  const auto root = std::filesystem::temp_directory_path() / "fogsfc_results_test";
  std::filesystem::remove_all(root);
  auto c = preset("S1", 6);
  const auto recs = run_scenario(c);
  const auto dir = write_results(root, c, recs);
  EXPECT_EQ(slurp(dir / "metrics.csv"), records_csv(recs));
  for (const auto& col : metric_columns()) EXPECT_TRUE(std::filesystem::exists(dir / (col + ".csv"))) << col;
  const auto j = json::parse(slurp(dir / "run.json"));
  EXPECT_EQ(std::stoull(j["config_hash"].get<std::string>(), nullptr, 16), config_hash(c));
  EXPECT_EQ(j["records"].size(), recs.size());
  std::filesystem::remove_all(root);
}

TEST(Summary, MedianAndInterval) {
  const auto s = summarize({5, 1, 3, 2, 4});
  EXPECT_EQ(s.count, 5u);
  EXPECT_DOUBLE_EQ(s.median, 3.0);
  EXPECT_LE(s.lo, s.median);
  EXPECT_GE(s.hi, s.median);
  EXPECT_DOUBLE_EQ(summarize({1, 2, 3, 4}).median, 2.5);
  EXPECT_EQ(summarize({}).count, 0u);
}
