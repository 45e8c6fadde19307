#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "taskprob/analysis.hpp"
#include "taskprob/statistics.hpp"
#include "taskprob/synthetic.hpp"
#include "test_support.hpp"

namespace taskprob {
namespace {

using testing::make_dataset;

TEST(Pearson, ClosedFormHandComputation) {
  // Deviations (-1.5,-0.5,0.5,1.5) and (-0.5,-1.5,1.5,0.5):
  // sum of products 3, sums of squares 5 and 5, so r = 3/5.
  const std::vector<double> xs{1, 2, 3, 4};
  const std::vector<double> ys{2, 1, 4, 3};
  const auto r = pearson(xs, ys);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 0.6, 1e-12);
}

TEST(Pearson, AffineSeriesGiveUnitMagnitude) {
  const std::vector<double> xs{0.5, 1.0, 2.5, 4.0, 7.25};
  std::vector<double> up;
  for (double x : xs) up.push_back(2 * x + 1);
  EXPECT_NEAR(*pearson(xs, up), 1.0, 1e-12);
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{6, 4, 2};
  EXPECT_NEAR(*pearson(a, b), -1.0, 1e-12);
}

TEST(Pearson, ZeroVarianceIsUndefined) {
  const std::vector<double> xs{1, 2, 3};
  const std::vector<double> flat{5, 5, 5};
  EXPECT_FALSE(pearson(xs, flat).has_value());
  EXPECT_FALSE(pearson(flat, xs).has_value());
}

TEST(Pearson, RejectsMismatchedOrTinyInput) {
  const std::vector<double> two{1, 2};
  const std::vector<double> three{1, 2, 3};
  const std::vector<double> one{1};
  EXPECT_THROW(pearson(two, three), std::invalid_argument);
  EXPECT_THROW(pearson(one, one), std::invalid_argument);
}

TEST(Spearman, UsesMidRanks) {
  const std::vector<double> v{10, 20, 20, 30};
  EXPECT_EQ(ranks(v), (std::vector<double>{1, 2.5, 2.5, 4}));
  const std::vector<double> xs{1, 2, 3, 4};
  const std::vector<double> ys{1, 8, 27, 64};
  EXPECT_NEAR(*spearman(xs, ys), 1.0, 1e-12);
}

TEST(Histogram, AllValuesAtLowerEdgeFillFirstBin) {
  const std::vector<double> v(5, 0.0);
  const Histogram h = make_histogram(v, 0.0, 1.0, 4);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{5, 0, 0, 0}));
  EXPECT_EQ(h.total, 5u);
}

TEST(Histogram, EvenSpreadGivesOnePerBin) {
  std::vector<double> v;
  for (int k = 0; k < 10; ++k) v.push_back(0.05 + 0.1 * k);
  const Histogram h = make_histogram(v, 0.0, 1.0, 10);
  EXPECT_EQ(h.counts, std::vector<std::size_t>(10, 1));
  EXPECT_EQ(h.edges.size(), 11u);
}

TEST(Histogram, UpperEdgeAndClamping) {
  const std::vector<double> v{1.0, -2.0, 3.0};
  const Histogram h = make_histogram(v, 0.0, 1.0, 2);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(h.clamped, 2u);
  EXPECT_THROW(make_histogram(v, 0.0, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(make_histogram(v, 1.0, 1.0, 3), std::invalid_argument);
}

TEST(Histogram, MeanAbsoluteValue) {
  const std::vector<double> v{-0.02, 0.04, 0.0, -0.06};
  const Histogram h = make_histogram(v, -1.0, 1.0, 8);
  EXPECT_NEAR(h.mean_abs, 0.03, 1e-15);
  EXPECT_NEAR(h.mean, -0.01, 1e-15);
}

TEST(AttributeVsProbability, AttributeEqualToProbabilityCorrelatesPerfectly) {
  std::vector<Job> jobs;
  std::vector<Task> tasks;
  const double probs[] = {0.1, 0.5, 0.3, 0.9, 0.7};
  for (std::size_t j = 0; j < 5; ++j) {
    jobs.push_back(Job{"J" + std::to_string(j), "", probs[j], {{"self", probs[j]}}, {}});
    tasks.push_back(Task{"T" + std::to_string(j), j, "", testing::point_mass(0)});
  }
  jobs.push_back(Job{"NOATTR", "", 0.2, {}, {}});
  tasks.push_back(Task{"T5", 5, "", testing::point_mass(0)});
  const Dataset d(jobs, tasks, RelatednessGraph(tasks.size()));
  const ScatterSeries s = attribute_vs_probability(d, "self");
  EXPECT_EQ(s.size(), 5u);
  EXPECT_EQ(s.skipped, 1u);
  ASSERT_TRUE(s.r.has_value());
  EXPECT_NEAR(*s.r, 1.0, 1e-12);
  EXPECT_THROW(attribute_vs_probability(d, "missing"), std::invalid_argument);
}

TEST(AttributeVsProbability, PlantedNegativeMonotoneAttribute) {
  // education falls with p plus bounded noise; n = 100.
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Job> jobs;
  std::vector<Task> tasks;
  for (std::size_t j = 0; j < 100; ++j) {
    const double p = unit(rng);
    const double education = 12.0 - 10.0 * p + (unit(rng) - 0.5);
    jobs.push_back(Job{"J" + std::to_string(j), "", p, {{"education", education}}, {}});
    tasks.push_back(Task{"T" + std::to_string(j), j, "", testing::point_mass(0)});
  }
  const Dataset d(jobs, tasks, RelatednessGraph(tasks.size()));
  const ScatterSeries s = attribute_vs_probability(d, "education");
  ASSERT_TRUE(s.r.has_value());
  EXPECT_LT(*s.r, -0.8);
}

TEST(AttributeVsProbability, GeneratorAttributesFollowPlantedDirection) {
  const auto s = generate_synthetic(SynthConfig{}, 7);
  const ScatterSeries e = attribute_vs_probability(s.dataset, "education");
  ASSERT_TRUE(e.r.has_value());
  EXPECT_LT(*e.r, -0.8);
}

TEST(ShareVsProbability, EqualProbabilitiesAreUndefined) {
  const Dataset d = make_dataset({{"A", 0.5, 3}}, {});
  TaskProbabilities p;
  p.prob = {0.5, 0.5, 0.5};
  TaskShareTable shares;
  shares.raw = shares.normalized = {0.2, 0.3, 0.5};
  const ScatterSeries s = share_vs_probability(d, shares, p);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_FALSE(s.r.has_value());
}

TEST(ShareVsProbability, IndependentSharesAreUncorrelated) {
  const auto s = generate_synthetic(SynthConfig{}, 7);
  const TaskShareTable shares = compute_shares(s.truth.coefficients, s.dataset, true);
  const TaskProbabilities p = solve_task_probs(s.dataset, shares, 0.01);
  const ScatterSeries series = share_vs_probability(s.dataset, shares, p);
  EXPECT_GE(series.size(), 800u);
  ASSERT_TRUE(series.r.has_value());
  EXPECT_LT(std::abs(*series.r), 0.1);
}

}  // namespace
}  // namespace taskprob
