#include <gtest/gtest.h>

#include "test_helpers.hpp"
#include "uam/instgen.hpp"
#include "uam/oracles.hpp"
#include "uam/pooling.hpp"
#include "uam/validate.hpp"

using namespace uam;
using namespace uam::testing;

namespace {

PoolingConfig with_lambda(double lambda) {
  PoolingConfig cfg;
  cfg.lambda_p = lambda;
  return cfg;
}

}  // namespace

TEST(GroupDeparture, IsMaximumQuantile) {
  std::vector<Demand> ds{make_demand(0, 485, 5), make_demand(1, 490, 5), make_demand(2, 487, 5),
                         make_demand(3, 475, 5)};
  EXPECT_DOUBLE_EQ(group_departure(std::vector<int>{0}, ds), 490);
  EXPECT_DOUBLE_EQ(group_departure(std::vector<int>{0, 1, 2}, ds), 495);
  EXPECT_DOUBLE_EQ(group_departure(std::vector<int>{0, 1, 2, 3}, ds), 495);
}

TEST(GroupFeasible, ClassWaitLimits) {
  const PoolingConfig cfg;
  std::vector<Demand> ds{make_demand(0, 480, 5), make_demand(1, 500, 5),
                         make_demand(2, 480, 5, DemandClass::Premium)};
  EXPECT_TRUE(group_feasible(std::vector<int>{0}, ds, cfg));
  EXPECT_TRUE(group_feasible(std::vector<int>{0, 1}, ds, cfg));
  EXPECT_FALSE(group_feasible(std::vector<int>{2, 1}, ds, cfg));
}

TEST(GroupFeasible, CapacityAndDeadline) {
  const PoolingConfig cfg;
  std::vector<Demand> ds{make_demand(0, 480, 5, DemandClass::Regular, 3),
                         make_demand(1, 481, 5, DemandClass::Regular, 2),
                         make_demand(2, 490, 5, DemandClass::Regular, 1, 486.0),
                         make_demand(3, 483, 5, DemandClass::Regular, 1)};
  EXPECT_FALSE(group_feasible(std::vector<int>{0, 1}, ds, cfg));
  EXPECT_FALSE(group_feasible(std::vector<int>{2, 3}, ds, cfg));
  EXPECT_TRUE(group_feasible(std::vector<int>{0, 3}, ds, cfg));
}

TEST(TruncatedObjective, FrozenValues) {
  const PoolingConfig cfg;
  std::vector<Demand> ordered{make_demand(0, 480, 5), make_demand(1, 500, 3)};
  PartitionNode one{{0}, {}, 0};
  EXPECT_DOUBLE_EQ(truncated_objective(one, ordered, cfg, 1000), 1005);
  PartitionNode apart{{0, 1}, {}, 0};
  EXPECT_DOUBLE_EQ(truncated_objective(apart, ordered, cfg, 1000), 2008);
  std::vector<Demand> pair{make_demand(0, 480, 5), make_demand(1, 500, 5)};
  PartitionNode merged{{0, 0}, {}, 0};
  EXPECT_DOUBLE_EQ(truncated_objective(merged, pair, cfg, 1000), 1030);
}

TEST(ExtendPrune, CompatibleDemandGivesJoinAndSingleton) {
  const auto cfg = with_lambda(1000);
  std::vector<Demand> ds{make_demand(0, 480, 5), make_demand(1, 500, 5)};
  const auto root = start_beam(ds[0], cfg, 1000);
  const auto children = extend_prune(root.frontier, ds[1], cfg, 1000);
  ASSERT_EQ(children.size(), 2u);
  EXPECT_EQ(children[0].labels, (std::vector<int>{0, 0}));
  EXPECT_DOUBLE_EQ(children[0].score, 1030);
  EXPECT_EQ(children[1].labels, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(children[1].score, 2010);
}

TEST(ExtendPrune, CapacityConflictLeavesOnlySingleton) {
  const auto cfg = with_lambda(1000);
  std::vector<Demand> ds{make_demand(0, 480, 5, DemandClass::Regular, 3),
                         make_demand(1, 481, 5, DemandClass::Regular, 3)};
  const auto root = start_beam(ds[0], cfg, 1000);
  const auto children = extend_prune(root.frontier, ds[1], cfg, 1000);
  ASSERT_EQ(children.size(), 1u);
  EXPECT_EQ(children[0].labels, (std::vector<int>{0, 1}));
}

TEST(ExtendPrune, TwoCompatibleGroupsGiveThreeChildren) {
  const auto cfg = with_lambda(1000);
  PartitionNode parent{{0, 1},
                       {detail::singleton_cache(make_demand(0, 480, 5), cfg),
                        detail::singleton_cache(make_demand(1, 482, 5), cfg)},
                       2010};
  const std::vector<PartitionNode> frontier{parent};
  EXPECT_EQ(extend_prune(frontier, make_demand(2, 483, 5), cfg, 1000).size(), 3u);
}

TEST(RetrieveBest, SortsAndCuts) {
  std::vector<PartitionNode> children{{{0, 0}, {}, 1030}, {{0, 1}, {}, 2008}, {{0}, {}, 1005}};
  const auto best = retrieve_best(children, 2);
  ASSERT_EQ(best.size(), 2u);
  EXPECT_DOUBLE_EQ(best[0].score, 1005);
  EXPECT_DOUBLE_EQ(best[1].score, 1030);
  EXPECT_EQ(retrieve_best(children, 10).size(), 3u);
}

TEST(RetrieveBest, TiesBrokenByLabels) {
  std::vector<PartitionNode> children{{{0, 1, 1}, {}, 5}, {{0, 0, 1}, {}, 5}, {{0, 1, 0}, {}, 5}};
  const auto best = retrieve_best(children, 3);
  EXPECT_EQ(best[0].labels, (std::vector<int>{0, 0, 1}));
  EXPECT_EQ(best[1].labels, (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(best[2].labels, (std::vector<int>{0, 1, 1}));
}

TEST(BeamSearch, TwoCompatibleDemandsShareAGroup) {
  std::vector<Demand> ds{make_demand(0, 480, 5), make_demand(1, 490, 5)};
  const auto res = beam_search(ds, PoolingConfig{});
  EXPECT_EQ(res.solution.groups.size(), 1u);
  EXPECT_DOUBLE_EQ(res.solution.departures[0], 495);
}

TEST(BeamSearch, IncompatibleDemandsFlyApart) {
  std::vector<Demand> ds{make_demand(0, 480, 5, DemandClass::Regular, 3),
                         make_demand(1, 481, 5, DemandClass::Regular, 2)};
  const auto res = beam_search(ds, PoolingConfig{});
  EXPECT_EQ(res.solution.groups.size(), 2u);
}

TEST(BeamSearch, MatchesExactOracleOnSmallInstances) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto ds = gen_demands(6 + static_cast<int>(s % 7), DemandModel{}, stream_seed(11, "beam-vs-exact", s));
    const auto beam = beam_search(ds, PoolingConfig{});
    const auto exact = exact_pooling(ds, PoolingConfig{});
    EXPECT_NEAR(beam.objective, exact.objective, 1e-6) << "seed " << s;
  }
}

TEST(BeamSearch, ReportedScoreEqualsRecomputedObjective) {
  const auto ds = gen_demands(40, DemandModel{}, 5);
  const PoolingConfig cfg;
  const auto res = beam_search(ds, cfg);
  EXPECT_NEAR(res.objective, pooling_objective(res.solution, ds, cfg, res.lambda_p), 1e-6);
  EXPECT_TRUE(validate_pooling(res.solution, ds, cfg).empty());
}

TEST(ExtendIncremental, MatchesExtendPruneThenRetrieve) {
  const auto ds = insertion_order(gen_demands(25, DemandModel{}, 3));
  PoolingConfig cfg;
  cfg.beam_width = 20;
  const double lambda = cfg.resolved_lambda(ds.size());
  auto state = start_beam(ds[0], cfg, lambda);
  for (std::size_t i = 1; i < ds.size(); ++i) {
    const auto expected = retrieve_best(extend_prune(state.frontier, ds[i], cfg, lambda), cfg.beam_width);
    state = extend_incremental(state, ds[i], cfg);
    ASSERT_EQ(state.frontier, expected) << "level " << i;
  }
}

TEST(ExtendIncremental, FittingDemandKeepsGroupCount) {
  const auto cfg = with_lambda(1000);
  auto s = start_beam(make_demand(0, 480, 5), cfg, 1000);
  s = extend_incremental(s, make_demand(1, 490, 5), cfg);
  EXPECT_EQ(s.frontier.front().group_count(), 1u);
  s = extend_incremental(s, make_demand(2, 700, 5), cfg);
  EXPECT_EQ(s.frontier.front().group_count(), 2u);
}

TEST(ExtendIncremental, EqualsFromScratchWithWideBeam) {
  PoolingConfig cfg;
  cfg.beam_width = 1000000;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto ds = insertion_order(gen_demands(6, DemandModel{}, stream_seed(2, "inc", s)));
    const double lambda = cfg.resolved_lambda(ds.size());
    auto state = start_beam(ds[0], cfg, lambda);
    for (std::size_t i = 1; i < ds.size(); ++i) state = extend_incremental(state, ds[i], cfg);
    const auto scratch = beam_search(ds, cfg);
    EXPECT_NEAR(state.frontier.front().score, scratch.objective, 1e-9);
    EXPECT_EQ(to_solution(state.frontier.front(), ds), scratch.solution);
  }
}

TEST(ToRequests, FrozenValues) {
  const auto net = uniform_network(2, 10, {30, 40});
  std::vector<Demand> ds{make_demand(0, 490, 5, DemandClass::Regular, 2),
                         make_demand(1, 488, 5, DemandClass::Regular, 1),
                         make_demand(2, 600, 5, DemandClass::Regular, 2)};
  PoolingSolution sol{{{0, 1}, {2}}, {495, 605}};
  const auto reqs = to_requests(sol, ds, 0, 1, net, 120.0, 7);
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0].id, 7);
  EXPECT_EQ(reqs[1].id, 8);
  EXPECT_DOUBLE_EQ(reqs[0].depart_minute, 495);
  EXPECT_DOUBLE_EQ(reqs[0].arrive_minute, 505);
  EXPECT_EQ(reqs[0].passengers, 3);
  EXPECT_DOUBLE_EQ(reqs[0].value, 360);
  EXPECT_DOUBLE_EQ(reqs[1].value, 240);
}

TEST(ToRequests, UnbookableLegThrows) {
  auto net = uniform_network(2, 10, {30, 40});
  net.legs = {{1, 0}};
  std::vector<Demand> ds{make_demand(0, 490, 5)};
  EXPECT_THROW(to_requests(PoolingSolution{{{0}}, {495}}, ds, 0, 1, net, 120.0), InvalidInput);
}

TEST(BeamSearch, UnknownOrDuplicateIdsRejected) {
  std::vector<Demand> ds{make_demand(0, 490, 5), make_demand(0, 495, 5)};
  EXPECT_THROW(DemandIndex{ds}, InvalidInput);
}

TEST(ValidatePooling, FrozenViolations) {
  const PoolingConfig cfg;
  std::vector<Demand> one{make_demand(0, 480, 5)};
  EXPECT_TRUE(validate_pooling(PoolingSolution{{{0}}, {485}}, one, cfg).empty());

  std::vector<Demand> heavy{make_demand(0, 480, 5, DemandClass::Regular, 3),
                            make_demand(1, 480, 5, DemandClass::Regular, 3)};
  auto v = validate_pooling(PoolingSolution{{{0, 1}}, {485}}, heavy, cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, PoolingConstraint::Capacity);

  std::vector<Demand> premium{make_demand(0, 480, 5, DemandClass::Premium), make_demand(1, 495, 5)};
  v = validate_pooling(PoolingSolution{{{0, 1}}, {500}}, premium, cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, PoolingConstraint::MaxWait);
}

TEST(ValidatePooling, SingleEditsAreTagged) {
  const PoolingConfig cfg;
  std::vector<Demand> ds{make_demand(0, 480, 5), make_demand(1, 483, 5, DemandClass::Regular, 1, 495.0)};
  const PoolingSolution ok{{{0, 1}}, {488}};
  ASSERT_TRUE(validate_pooling(ok, ds, cfg).empty());

  auto late = ds;
  late[1].latest_departure = 487.0;
  auto v = validate_pooling(ok, late, cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, PoolingConstraint::Deadline);

  auto early = ok;
  early.departures[0] = 486;
  v = validate_pooling(early, ds, cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, PoolingConstraint::Quantile);

  v = validate_pooling(PoolingSolution{{{0}, {0, 1}}, {485, 488}}, ds, cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, PoolingConstraint::Assignment);
}
