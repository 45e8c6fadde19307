#include <gtest/gtest.h>

#include <cmath>

#include "taskprob/prob_model.hpp"
#include "taskprob/synthetic.hpp"
#include "test_support.hpp"

namespace taskprob {
namespace {

using testing::make_dataset;

TaskShareTable shares_from(const std::vector<double>& values) {
  TaskShareTable s;
  s.raw = values;
  s.normalized = values;
  s.use_normalized = true;
  return s;
}

TEST(BuildProbLp, TwoMutuallyRelatedTasks) {
  const Dataset d = make_dataset({{"A", 0.5, 2}}, {{"A-1", "A-2"}});
  const ProbLp lp = build_prob_lp(d, shares_from({0.5, 0.5}), 0.01);
  EXPECT_EQ(lp.problem.variables().size(), 3u);
  EXPECT_EQ(lp.problem.objective_terms(), 1u);
  EXPECT_EQ(lp.problem.constraints().size(), 4u);
  for (std::size_t t = 0; t < 2; ++t) {
    const auto& v = lp.problem.variables()[lp.p_vars[t]];
    EXPECT_EQ(v.lower, 0.0);
    EXPECT_EQ(v.upper, 1.0);
  }
}

TEST(BuildProbLp, ZeroProbabilityCollapsesBand) {
  const Dataset d = make_dataset({{"A", 0.0, 2}}, {});
  const ProbLp lp = build_prob_lp(d, shares_from({0.3, 0.7}), 0.01);
  ASSERT_EQ(lp.problem.constraints().size(), 2u);
  for (const auto& c : lp.problem.constraints()) EXPECT_EQ(c.rhs, 0.0);
}

TEST(BuildProbLp, ExcludedJobLeavesNoTrace) {
  const Dataset d = make_dataset({{"A", 0.4, 2}, {"B", 0.6, 2}}, {{"A-1", "B-1"}, {"B-1", "B-2"}});
  const ProbLp lp = build_prob_lp(d, shares_from({0.5, 0.5, 0.5, 0.5}), 0.01, 0);
  EXPECT_EQ(lp.p_vars[0], kNoVariable);
  EXPECT_EQ(lp.p_vars[1], kNoVariable);
  EXPECT_EQ(lp.problem.variables().size(), 3u);  // p(B-1), p(B-2), one pair
  EXPECT_EQ(lp.problem.constraints().size(), 4u);
}

TEST(BuildProbLp, ObjectiveVariableCountFollowsEdges) {
  SynthConfig config;
  config.jobs = 735;
  config.tasks_min = 20;
  config.tasks_max = 30;
  config.density = 0.2;
  config.cross_density = 0.2;
  config.edges_min = 1;
  config.edges_max = 2;
  const auto s = generate_synthetic(config, 3);
  const ProbLp lp = build_prob_lp(s.dataset, uniform_shares(s.dataset), 0.01);
  const std::size_t terms = lp.problem.objective_terms();
  EXPECT_EQ(terms, s.dataset.graph().edges().size());
  EXPECT_GT(terms, 50000u);
  EXPECT_LT(terms, 500000u);
}

TEST(SolveTaskProbs, ZeroProbabilityJobGivesExactZeros) {
  const Dataset d = make_dataset({{"A", 0.0, 3}, {"B", 1.0, 2}},
                                 {{"A-1", "B-1"}, {"A-2", "B-2"}, {"A-3", "B-1"}});
  const TaskProbabilities p =
      solve_task_probs(d, shares_from({0.2, 0.3, 0.5, 0.5, 0.5}), 0.01);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(p.at(t), 0.0);
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_GE(p.at(t), 0.0);
    EXPECT_LE(p.at(t), 1.0);
  }
}

// Published judge tasks: probability and share in percent; the shares sum to
// 101. Weighted mean = 40.749 / 101.
struct JudgeTask {
  double p;
  double share;
};
constexpr JudgeTask kJudges[] = {
    {1, 5.1},    {1, 3.4},    {1, 8.0},    {1, 6.2},  {1, 5.4},  {1, 3.9},
    {0.94, 5.3}, {0.46, 5.9}, {0.39, 2.7}, {0, 10.1}, {0, 6.5},  {0, 4.6},
    {0, 6.6},    {0, 6.3},    {0, 4.0},    {0, 4.7},  {0, 3.8},  {0, 8.5}};

TEST(JudgesFixture, WeightedMeanLiesInsideBand) {
  double total = 0.0;
  double weighted = 0.0;
  for (const auto& t : kJudges) {
    total += t.share;
    weighted += t.p * t.share;
  }
  EXPECT_NEAR(total, 101.0, 1e-9);
  const double mean = weighted / total;
  EXPECT_NEAR(mean, 40.749 / 101.0, 1e-12);
  EXPECT_NEAR(mean, 0.403, 0.005);
  const double epsilon = 0.01;
  EXPECT_GE(mean, 0.40 * (1 - epsilon));
  EXPECT_LE(mean, 0.40 * (1 + epsilon));
}

TEST(JudgesFixture, PublishedAssignmentIsFeasibleForTheLp) {
  std::vector<Job> jobs{Job{"JUD", "Judges", 0.40, {}, {}}};
  std::vector<Task> tasks;
  std::vector<double> shares;
  for (std::size_t k = 0; k < std::size(kJudges); ++k) {
    tasks.push_back(Task{"JUD-" + std::to_string(k + 1), 0, "", testing::point_mass(3)});
    shares.push_back(kJudges[k].share / 101.0);
  }
  const Dataset d(jobs, tasks, RelatednessGraph(tasks.size()));
  const ProbLp lp = build_prob_lp(d, shares_from(shares), 0.01);
  std::vector<double> values(lp.problem.variables().size(), 0.0);
  for (std::size_t k = 0; k < std::size(kJudges); ++k) values[lp.p_vars[k]] = kJudges[k].p;
  EXPECT_LE(lp::max_violation(lp.problem, values), 1e-12);
}

TEST(SolveTaskProbs, ThreeJobInstanceMatchesVertexOracle) {
  // A has two tasks (shares 0.6 / 0.4), B and C one each; a related triangle.
  const Dataset d = make_dataset({{"A", 0.5, 2}, {"B", 0.2, 1}, {"C", 0.9, 1}},
                                 {{"A-1", "B-1"}, {"B-1", "C-1"}, {"A-2", "C-1"}});
  const TaskShareTable shares = shares_from({0.6, 0.4, 1.0, 1.0});
  const ProbLp lp = build_prob_lp(d, shares, 0.01);
  const lp::Solution oracle = lp::enumerate_vertices_oracle(lp.problem);
  ASSERT_EQ(oracle.status, lp::Status::kOptimal);
  const TaskProbabilities p = solve_task_probs(d, shares, 0.01);
  EXPECT_NEAR(p.objective, oracle.objective, 1e-9);
}

TEST(SolveTaskProbs, BandsHoldAndObjectiveBeatsBaseline) {
  SynthConfig config;
  config.jobs = 40;
  const auto s = generate_synthetic(config, 9);
  const Dataset& d = s.dataset;
  const TaskShareTable shares = uniform_shares(d);
  const TaskProbabilities p = solve_task_probs(d, shares, 0.01);
  for (const Job& job : d.jobs()) {
    double mean = 0.0;
    for (std::size_t t : job.tasks) {
      EXPECT_GE(p.at(t), 0.0);
      EXPECT_LE(p.at(t), 1.0);
      mean += p.at(t) * shares.share(t);
    }
    EXPECT_GE(mean, job.automation_prob * 0.99 - 1e-7);
    EXPECT_LE(mean, job.automation_prob * 1.01 + 1e-7);
  }
  double baseline = 0.0;
  for (const IndexPair& e : d.graph().edges()) {
    baseline += std::abs(d.jobs()[d.tasks()[e.first].job].automation_prob -
                         d.jobs()[d.tasks()[e.second].job].automation_prob);
  }
  EXPECT_LE(p.objective, baseline + 1e-9);
  double recomputed = 0.0;
  for (std::size_t k = 0; k < p.edge_index.size(); ++k) {
    const IndexPair& e = d.graph().edges()[p.edge_index[k]];
    EXPECT_NEAR(p.pair_delta[k], std::abs(p.at(e.first) - p.at(e.second)), 1e-7);
    recomputed += p.pair_delta[k];
  }
  EXPECT_NEAR(recomputed, p.objective, 1e-7);
}

TEST(PairDiffDistribution, EqualProbabilitiesSpikeAtZero) {
  const Dataset d = make_dataset({{"A", 0.5, 3}}, {{"A-1", "A-2"}, {"A-2", "A-3"}});
  TaskProbabilities p;
  p.prob = {0.5, 0.5, 0.5};
  const PairDiffDistribution dist = pair_diff_distribution(p, d.graph(), 10);
  EXPECT_EQ(dist.pair_count, 2u);
  EXPECT_EQ(dist.histogram.counts[0], 2u);
  EXPECT_EQ(dist.mean, 0.0);
}

TEST(PairDiffDistribution, OppositeExtremesLandInTopBin) {
  const Dataset d = make_dataset({{"A", 0.5, 2}}, {{"A-1", "A-2"}});
  TaskProbabilities p;
  p.prob = {1.0, 0.0};
  const PairDiffDistribution dist = pair_diff_distribution(p, d.graph(), 10);
  EXPECT_EQ(dist.pair_count, 1u);
  EXPECT_EQ(dist.histogram.counts.back(), 1u);
  EXPECT_EQ(dist.mean, 1.0);
}

TEST(PairDiffDistribution, EmptyGraphGivesEmptyHistogram) {
  const Dataset d = make_dataset({{"A", 0.5, 2}}, {});
  TaskProbabilities p;
  p.prob = {1.0, 0.0};
  const PairDiffDistribution dist = pair_diff_distribution(p, d.graph(), 10);
  EXPECT_EQ(dist.pair_count, 0u);
  EXPECT_EQ(dist.histogram.total, 0u);
}

TEST(PairDiffDistribution, SyntheticMassNearZeroAndMeanMatchesSolution) {
  const auto s = generate_synthetic(SynthConfig::two_clusters(), 7);
  const TaskShareTable shares = compute_shares(s.truth.coefficients, s.dataset, true);
  const TaskProbabilities p = solve_task_probs(s.dataset, shares, 0.01);
  const PairDiffDistribution dist = pair_diff_distribution(p, s.dataset.graph(), 20);
  double sum = 0.0;
  for (const IndexPair& e : s.dataset.graph().edges()) sum += std::abs(p.at(e.first) - p.at(e.second));
  const double mean = sum / static_cast<double>(s.dataset.graph().edges().size());
  EXPECT_NEAR(dist.mean, mean, 1e-12);
  EXPECT_GT(static_cast<double>(dist.histogram.counts[0]) / dist.pair_count, 0.5);
}

}  // namespace
}  // namespace taskprob
