#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "taskprob/share_model.hpp"
#include "taskprob/synthetic.hpp"
#include "test_support.hpp"

namespace taskprob {
namespace {

using testing::make_dataset;
using testing::point_mass;

std::size_t count_prefix(const lp::Problem& p, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& c : p.constraints()) n += c.name.rfind(prefix, 0) == 0;
  return n;
}

TEST(BuildShareLp, TwoRelatedJobsLayout) {
  const Dataset d = make_dataset({{"A", 0.5, 2}, {"B", 0.5, 3}}, {{"A-1", "B-2"}});
  const ShareLp lp = build_share_lp(d, 0.01);
  EXPECT_EQ(lp.problem.variables().size(), 14u + 7u);
  EXPECT_EQ(lp.problem.objective_terms(), 7u);
  EXPECT_EQ(count_prefix(lp.problem, "dpos_") + count_prefix(lp.problem, "dneg_"), 14u);
  EXPECT_EQ(count_prefix(lp.problem, "band_"), 4u);
  EXPECT_EQ(count_prefix(lp.problem, "nonneg_"), 2u);
  EXPECT_EQ(count_prefix(lp.problem, "mono_"), 12u);
  EXPECT_EQ(lp.problem.constraints().size(), 14u + 4u + 2u + 12u);
}

TEST(BuildShareLp, SingleJobHasNoObjective) {
  const Dataset d = make_dataset({{"A", 0.5, 4}}, {});
  const ShareLp lp = build_share_lp(d, 0.01);
  EXPECT_EQ(lp.problem.variables().size(), 7u);
  EXPECT_EQ(lp.problem.objective_terms(), 0u);
  EXPECT_EQ(lp.problem.constraints().size(), 2u + 1u + 6u);
  EXPECT_TRUE(lp.job_pairs.empty());
}

TEST(BuildShareLp, ObjectiveVariableCountScalesWithRelatedJobs) {
  // 735 jobs, each related to about 66 others on average, give tens of
  // thousands of related pairs and so of order 1e5 objective variables.
  SynthConfig config;
  config.jobs = 735;
  config.tasks_min = 4;
  config.tasks_max = 6;
  config.density = 0.09;
  config.cross_density = 0.09;
  config.edges_min = 1;
  config.edges_max = 1;
  const auto s = generate_synthetic(config, 11);
  const ShareLp lp = build_share_lp(s.dataset, 0.01);
  const std::size_t terms = lp.problem.objective_terms();
  EXPECT_EQ(terms, lp.job_pairs.size() * kBuckets);
  EXPECT_GT(terms, 100000u);
  EXPECT_LT(terms, 300000u);
}

TEST(SolveShares, IdenticalJobsHaveZeroObjective) {
  const std::vector<FrequencyDistribution> freqs{
      {0.1, 0.1, 0.2, 0.2, 0.2, 0.1, 0.1}, {0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0},
      {0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.7}};
  const Dataset d = make_dataset({{"A", 0.3, 3}, {"B", 0.6, 3}},
                                 {{"A-1", "B-1"}, {"A-2", "B-2"}, {"A-3", "B-3"}}, freqs);
  const ShareCoefficients c = solve_shares(d, 0.01);
  EXPECT_NEAR(c.objective, 0.0, 1e-9);
  for (std::size_t l = 0; l < kBuckets; ++l) EXPECT_NEAR(c.tau[0][l], c.tau[1][l], 1e-9);
}

// Closed form for the chain A - B - C with point-mass frequencies:
//   A: one task in bucket 7        -> tau_A7 in [0.99, 1.01]
//   B: two tasks in bucket 7       -> tau_B7 in [0.495, 0.505]
//   C: four tasks in bucket 4      -> tau_C4 in [0.2475, 0.2525], tau_C5..7 >= tau_C4
// B and C can agree on every bucket (B4..6 = C4..6 = 0.2475, C7 = B7), so the
// only unavoidable gap is tau_A7 - tau_B7 >= 0.99 - 0.505 = 0.485.
TEST(SolveShares, ThreeJobChainMatchesClosedForm) {
  std::vector<FrequencyDistribution> freqs;
  freqs.push_back(point_mass(6));
  freqs.push_back(point_mass(6));
  freqs.push_back(point_mass(6));
  for (int k = 0; k < 4; ++k) freqs.push_back(point_mass(3));
  std::vector<Job> jobs{Job{"A", "A", 0.1, {}, {}}, Job{"B", "B", 0.2, {}, {}},
                        Job{"C", "C", 0.3, {}, {}}};
  std::vector<Task> tasks;
  const std::size_t owner[] = {0, 1, 1, 2, 2, 2, 2};
  for (std::size_t t = 0; t < 7; ++t) {
    tasks.push_back(Task{"t" + std::to_string(t), owner[t], "", freqs[t]});
  }
  RelatednessGraph g(7);
  g.add_edge(0, 1);
  g.add_edge(2, 3);
  const Dataset d(jobs, tasks, g);

  const ShareCoefficients c = solve_shares(d, 0.01);
  EXPECT_NEAR(c.objective, 0.485, 1e-9);
  EXPECT_NEAR(c.tau[0][6], 0.99, 1e-9);
  EXPECT_NEAR(c.tau[1][6], 0.505, 1e-9);
  EXPECT_EQ(c.job_pairs, (std::vector<IndexPair>{{0, 1}, {1, 2}}));
}

TEST(SolveShares, InvariantsOnSyntheticData) {
  SynthConfig config;
  config.jobs = 30;
  const auto s = generate_synthetic(config, 4);
  const ShareCoefficients c = solve_shares(s.dataset, 0.01);
  const TaskShareTable shares = compute_shares(c.tau, s.dataset, true);
  for (std::size_t j = 0; j < c.tau.size(); ++j) {
    EXPECT_GE(c.tau[j][0], 0.0);
    for (std::size_t l = 1; l < kBuckets; ++l) EXPECT_GE(c.tau[j][l], c.tau[j][l - 1]);
    EXPECT_GE(shares.raw_job_sum[j], 0.99 - 1e-7);
    EXPECT_LE(shares.raw_job_sum[j], 1.01 + 1e-7);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < c.job_pairs.size(); ++k) {
    for (std::size_t l = 0; l < kBuckets; ++l) {
      const double gap = std::abs(c.tau[c.job_pairs[k].first][l] - c.tau[c.job_pairs[k].second][l]);
      EXPECT_NEAR(c.delta[k][l], gap, 1e-7);
      total += c.delta[k][l];
    }
  }
  EXPECT_NEAR(total, c.objective, 1e-7);
  EXPECT_LT(c.mean_delta, c.mean_coefficient);
}

TEST(SolveShares, ZeroEpsilonIsFeasible) {
  const Dataset d = make_dataset({{"A", 0.5, 2}, {"B", 0.5, 5}}, {{"A-1", "B-2"}});
  const ShareCoefficients c = solve_shares(d, 0.0);
  const TaskShareTable shares = compute_shares(c.tau, d, false);
  EXPECT_NEAR(shares.raw_job_sum[0], 1.0, 1e-9);
  EXPECT_NEAR(shares.raw_job_sum[1], 1.0, 1e-9);
}

TEST(ComputeShares, HighestBucketCoefficientIsTheShare) {
  const Dataset d = make_dataset({{"A", 0.5, 1}}, {}, {point_mass(6)});
  Coefficients tau{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.1};
  const TaskShareTable s = compute_shares({tau}, d, false);
  EXPECT_DOUBLE_EQ(s.raw[0], 0.1);
  EXPECT_DOUBLE_EQ(s.share(0), 0.1);
}

TEST(ComputeShares, ZeroCoefficientsGiveZeroShares) {
  const Dataset d = make_dataset({{"A", 0.5, 2}}, {});
  const TaskShareTable s = compute_shares({Coefficients{}}, d, false);
  EXPECT_EQ(s.raw[0], 0.0);
  EXPECT_EQ(s.raw[1], 0.0);
}

TEST(ComputeShares, NormalizationDividesByRawSum) {
  // Two tasks in bucket 7 with tau_7 = 0.505: raw sum 1.01.
  const Dataset d = make_dataset({{"A", 0.5, 2}}, {}, {point_mass(6)});
  Coefficients tau{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.505};
  const TaskShareTable s = compute_shares({tau}, d, true);
  EXPECT_DOUBLE_EQ(s.raw_job_sum[0], 1.01);
  EXPECT_DOUBLE_EQ(s.normalized[0], 0.505 / 1.01);
  EXPECT_DOUBLE_EQ(s.normalized[0] + s.normalized[1], 1.0);
  EXPECT_DOUBLE_EQ(s.share(0), s.normalized[0]);
}

TEST(ComputeShares, RejectsMissingCoefficients) {
  const Dataset d = make_dataset({{"A", 0.5, 1}, {"B", 0.5, 1}}, {});
  EXPECT_THROW(compute_shares({Coefficients{}}, d, true), std::invalid_argument);
}

TEST(UniformShares, SplitsEvenly) {
  const Dataset d = make_dataset({{"A", 0.5, 4}, {"B", 0.5, 1}}, {});
  const TaskShareTable s = uniform_shares(d);
  EXPECT_DOUBLE_EQ(s.share(0), 0.25);
  EXPECT_DOUBLE_EQ(s.share(4), 1.0);
}

}  // namespace
}  // namespace taskprob
