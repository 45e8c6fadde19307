#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "taskprob/crossval.hpp"
#include "taskprob/synthetic.hpp"
#include "test_support.hpp"

namespace taskprob {
namespace {

using testing::make_dataset;

TaskShareTable shares_from(const std::vector<double>& values) {
  TaskShareTable s;
  s.raw = values;
  s.normalized = values;
  return s;
}

std::string lp_text(const lp::Problem& p) {
  std::ostringstream out;
  lp::write_lp_text(p, out);
  return out.str();
}

TEST(OutlierThresholds, Tiers) {
  const OutlierThresholds th;
  EXPECT_EQ(th.classify(0.0), OutlierTier::kConsistent);
  EXPECT_EQ(th.classify(0.2), OutlierTier::kConsistent);
  EXPECT_EQ(th.classify(-0.21), OutlierTier::kReview);
  EXPECT_EQ(th.classify(0.5), OutlierTier::kReview);
  EXPECT_EQ(th.classify(0.51), OutlierTier::kStrongOutlier);
  EXPECT_EQ(th.classify(-1.0), OutlierTier::kStrongOutlier);
  EXPECT_THROW((OutlierThresholds{0.1, 0.2}.validate()), std::invalid_argument);
  EXPECT_STREQ(to_string(OutlierTier::kStrongOutlier), "strong outlier");
}

TEST(NeighborAverage, MeanOfSurvivingNeighbors) {
  const Dataset d = make_dataset({{"A", 0.3, 1}, {"B", 0.2, 1}, {"C", 0.4, 1}},
                                 {{"A-1", "B-1"}, {"A-1", "C-1"}});
  TaskProbabilities loo;
  loo.prob = {std::nullopt, 0.2, 0.4};
  const NeighborAverage avg = neighbor_average(d, 0, loo);
  ASSERT_TRUE(avg.p_prime[0].has_value());
  EXPECT_DOUBLE_EQ(*avg.p_prime[0], 0.3);
  EXPECT_EQ(avg.neighbors[0], 2u);
  EXPECT_FALSE(avg.p_prime[1].has_value());
}

TEST(NeighborAverage, TaskWithoutNeighborsIsUndefined) {
  const Dataset d = make_dataset({{"A", 0.3, 2}, {"B", 0.2, 1}}, {{"A-1", "B-1"}});
  TaskProbabilities loo;
  loo.prob = {std::nullopt, std::nullopt, 0.7};
  const NeighborAverage avg = neighbor_average(d, 0, loo);
  EXPECT_TRUE(avg.p_prime[0].has_value());
  EXPECT_FALSE(avg.p_prime[1].has_value());
  EXPECT_EQ(avg.neighbors[1], 0u);
}

TEST(ReconstructJob, UniformValueIsReturned) {
  const Dataset d = make_dataset({{"A", 0.3, 3}}, {});
  const auto p = reconstruct_job({0.25, 0.25, 0.25}, shares_from({0.2, 0.3, 0.5}), d, 0);
  ASSERT_TRUE(p.p_prime.has_value());
  EXPECT_DOUBLE_EQ(*p.p_prime, 0.25);
  EXPECT_DOUBLE_EQ(p.coverage, 1.0);
}

TEST(ReconstructJob, ShareWeightedMean) {
  const Dataset d = make_dataset({{"A", 0.3, 2}}, {});
  const auto p = reconstruct_job({1.0, 0.0}, shares_from({0.6, 0.4}), d, 0);
  ASSERT_TRUE(p.p_prime.has_value());
  EXPECT_DOUBLE_EQ(*p.p_prime, 0.6);
}

TEST(ReconstructJob, UndefinedTasksAreDroppedAndSharesRenormalized) {
  const Dataset d = make_dataset({{"A", 0.3, 3}}, {});
  const auto p = reconstruct_job({1.0, std::nullopt, 0.0}, shares_from({0.3, 0.4, 0.3}), d, 0);
  ASSERT_TRUE(p.p_prime.has_value());
  EXPECT_DOUBLE_EQ(*p.p_prime, 0.5);
  EXPECT_DOUBLE_EQ(p.coverage, 0.6);
  const auto none = reconstruct_job({std::nullopt, std::nullopt, std::nullopt},
                                    shares_from({0.3, 0.4, 0.3}), d, 0);
  EXPECT_FALSE(none.p_prime.has_value());
}

// A published leave-one-out reconstruction: 23 tasks whose neighbor averages
// are listed below; the job's own probability is 0.96 and the reconstructed
// one 0.091. The gap lands in the strong-outlier tier, and any share-weighted
// mean of these task values must lie within their range.
TEST(ReconstructJob, PublishedManagerCaseIsAStrongOutlier) {
  const std::vector<double> p_prime_tasks = {0.15, 0,    0.20, 0.12, 0, 0.5,  0.42, 0,
                                             0,    0,    0,    0,    0, 0.03, 0,    0.38,
                                             0,    0,    0.67, 0,    0, 0,    0.01};
  ASSERT_EQ(p_prime_tasks.size(), 23u);
  const Dataset d = make_dataset({{"CBM", 0.96, 23}}, {});
  const TaskShareTable uniform = uniform_shares(d);
  std::vector<std::optional<double>> values(p_prime_tasks.begin(), p_prime_tasks.end());
  const auto r = reconstruct_job(values, uniform, d, 0);
  ASSERT_TRUE(r.p_prime.has_value());
  EXPECT_NEAR(*r.p_prime, 2.48 / 23.0, 1e-12);
  const auto [lo, hi] = std::minmax_element(p_prime_tasks.begin(), p_prime_tasks.end());
  EXPECT_GE(0.091, *lo);
  EXPECT_LE(0.091, *hi);
  const OutlierThresholds th;
  EXPECT_EQ(th.classify(0.96 - 0.091), OutlierTier::kStrongOutlier);
  EXPECT_EQ(th.classify(0.96 - *r.p_prime), OutlierTier::kStrongOutlier);
}

TEST(LeaveOneOut, TwoJobExclusionEqualsSingleJobLp) {
  const Dataset both = make_dataset({{"A", 0.4, 2}, {"B", 0.7, 2}},
                                    {{"A-1", "B-1"}, {"A-1", "A-2"}});
  const Dataset only_a = make_dataset({{"A", 0.4, 2}}, {{"A-1", "A-2"}});
  const TaskShareTable s_both = shares_from({0.5, 0.5, 0.3, 0.7});
  const TaskShareTable s_a = shares_from({0.5, 0.5});
  EXPECT_EQ(lp_text(build_prob_lp(both, s_both, 0.01, 1).problem),
            lp_text(build_prob_lp(only_a, s_a, 0.01).problem));
  const TaskProbabilities loo = leave_one_out_solve(both, s_both, 0.01, 1);
  const TaskProbabilities direct = solve_task_probs(only_a, s_a, 0.01);
  EXPECT_EQ(loo.prob[0], direct.prob[0]);
  EXPECT_EQ(loo.prob[1], direct.prob[1]);
  EXPECT_FALSE(loo.prob[2].has_value());
  EXPECT_FALSE(loo.prob[3].has_value());
}

TEST(LeaveOneOut, ExcludingAnUnrelatedJobKeepsOtherSolutions) {
  SynthConfig config;
  config.jobs = 12;
  const auto s = generate_synthetic(config, 21);
  // Append a job with no relations in the middle of the job list.
  std::vector<Job> jobs = s.dataset.jobs();
  std::vector<Task> tasks = s.dataset.tasks();
  const std::size_t isolated = 6;
  jobs.insert(jobs.begin() + isolated, Job{"ISO", "Isolated", 0.35, {}, {}});
  for (Task& t : tasks) {
    if (t.job >= isolated) ++t.job;
  }
  tasks.push_back(Task{"ISO-1", isolated, "", testing::point_mass(2)});
  tasks.push_back(Task{"ISO-2", isolated, "", testing::point_mass(5)});
  RelatednessGraph graph(tasks.size());
  for (const IndexPair& e : s.dataset.graph().edges()) graph.add_edge(e.first, e.second);
  const Dataset d(jobs, tasks, graph);

  const TaskShareTable shares = uniform_shares(d);
  const TaskProbabilities full = solve_task_probs(d, shares, 0.01);
  const TaskProbabilities loo = leave_one_out_solve(d, shares, 0.01, isolated);
  for (std::size_t t = 0; t < d.tasks().size(); ++t) {
    if (d.tasks()[t].job == isolated) {
      EXPECT_FALSE(loo.prob[t].has_value());
    } else {
      EXPECT_EQ(loo.prob[t], full.prob[t]) << d.tasks()[t].id;
    }
  }
  EXPECT_EQ(loo.objective, full.objective);
}

TEST(RunCrossval, ReportIsIndependentOfParallelism) {
  SynthConfig config = SynthConfig::two_clusters();
  config.jobs = 24;
  config.flipped_jobs = {5};
  const auto s = generate_synthetic(config, 3);
  const TaskShareTable shares = compute_shares(s.truth.coefficients, s.dataset, true);
  const TaskProbabilities full = solve_task_probs(s.dataset, shares, 0.01);
  const CrossvalReport a = run_crossval(s.dataset, shares, full, 0.01, {}, 20, 1);
  const CrossvalReport b = run_crossval(s.dataset, shares, full, 0.01, {}, 20, 4);
  ASSERT_EQ(a.jobs.size(), b.jobs.size());
  for (std::size_t j = 0; j < a.jobs.size(); ++j) {
    EXPECT_EQ(a.jobs[j].p_prime, b.jobs[j].p_prime);
    EXPECT_EQ(a.jobs[j].tier, b.jobs[j].tier);
  }
  for (std::size_t t = 0; t < a.tasks.size(); ++t) {
    EXPECT_EQ(a.tasks[t].p_prime, b.tasks[t].p_prime);
  }
  EXPECT_EQ(a.task_diff.counts, b.task_diff.counts);
  EXPECT_EQ(a.job_diff.counts, b.job_diff.counts);
  EXPECT_EQ(a.mean_abs_delta, b.mean_abs_delta);
}

TEST(RunCrossval, WithoutEdgesEveryJobIsUnreconstructable) {
  SynthConfig config;
  config.jobs = 6;
  config.density = 0.0;
  const auto s = generate_synthetic(config, 1);
  const TaskShareTable shares = uniform_shares(s.dataset);
  const TaskProbabilities full = solve_task_probs(s.dataset, shares, 0.01);
  const CrossvalReport r = run_crossval(s.dataset, shares, full, 0.01, {}, 10, 2);
  EXPECT_EQ(r.unreconstructable.size(), 6u);
  for (const CrossvalJob& j : r.jobs) {
    EXPECT_EQ(j.tier, OutlierTier::kUnreconstructable);
    EXPECT_FALSE(j.p_prime.has_value());
  }
  EXPECT_EQ(r.strong_outliers, 0u);
}

TEST(RunCrossval, DeltaHistogramsCoverReconstructedJobs) {
  SynthConfig config = SynthConfig::two_clusters();
  config.jobs = 20;
  const auto s = generate_synthetic(config, 5);
  const TaskShareTable shares = compute_shares(s.truth.coefficients, s.dataset, true);
  const TaskProbabilities full = solve_task_probs(s.dataset, shares, 0.01);
  const CrossvalReport r = run_crossval(s.dataset, shares, full, 0.01, {}, 20, 1);
  std::size_t defined = 0;
  double abs_sum = 0.0;
  for (const CrossvalJob& j : r.jobs) {
    if (!j.delta) continue;
    ++defined;
    abs_sum += std::abs(*j.delta);
    EXPECT_DOUBLE_EQ(*j.delta, j.p - *j.p_prime);
  }
  EXPECT_EQ(r.job_diff.total, defined);
  EXPECT_NEAR(r.mean_abs_delta, abs_sum / static_cast<double>(defined), 1e-12);
  EXPECT_EQ(r.consistent + r.review + r.strong_outliers + r.unreconstructable.size(),
            r.jobs.size());
}

}  // namespace
}  // namespace taskprob
