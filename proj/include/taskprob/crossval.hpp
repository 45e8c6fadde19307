#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taskprob/dataset.hpp"
#include "taskprob/prob_model.hpp"
#include "taskprob/share_model.hpp"
#include "taskprob/statistics.hpp"

namespace taskprob {

enum class OutlierTier { kConsistent, kReview, kStrongOutlier, kUnreconstructable };

const char* to_string(OutlierTier tier);

struct OutlierThresholds {
  double strong = 0.5;  // |delta| above this is a strong outlier
  double review = 0.2;  // |delta| above this (up to `strong`) needs review

  /// Throws std::invalid_argument unless 0 <= review <= strong <= 1.
  void validate() const;
  OutlierTier classify(double delta) const;
};

/// The probability LP over every job except `excluded_job`.
TaskProbabilities leave_one_out_solve(const Dataset& dataset, const TaskShareTable& shares,
                                      double epsilon, std::size_t excluded_job);

struct NeighborAverage {
  std::vector<std::optional<double>> p_prime;  // per task; set for the job's tasks
  std::vector<std::size_t> neighbors;          // per task; surviving neighbors used
};

/// For every task of `excluded_job`, the mean leave-one-out probability of
/// its related tasks that have one. Tasks without such neighbors stay
/// undefined.
NeighborAverage neighbor_average(const Dataset& dataset, std::size_t excluded_job,
                                 const TaskProbabilities& loo_solution);

struct JobReconstruction {
  std::optional<double> p_prime;  // empty if no task of the job is defined
  double coverage = 0.0;          // share mass of defined tasks
};

/// Share-weighted mean of the defined p'(t), with shares renormalized over
/// the defined tasks.
JobReconstruction reconstruct_job(const std::vector<std::optional<double>>& p_prime,
                                  const TaskShareTable& shares, const Dataset& dataset,
                                  std::size_t job);

struct CrossvalJob {
  std::size_t job = 0;
  double p = 0.0;
  std::optional<double> p_prime;
  std::optional<double> delta;  // p - p'
  double coverage = 0.0;
  OutlierTier tier = OutlierTier::kUnreconstructable;
};

struct CrossvalTask {
  std::size_t task = 0;
  double p = 0.0;  // from the full LP
  std::optional<double> p_prime;
  std::size_t neighbors = 0;
};

struct CrossvalReport {
  std::vector<CrossvalJob> jobs;    // job order
  std::vector<CrossvalTask> tasks;  // task order
  Histogram task_diff;              // p(t) - p'(t) over [-1, 1]
  Histogram job_diff;               // p(j) - p'(j) over [-1, 1]
  std::vector<std::size_t> unreconstructable;
  OutlierThresholds thresholds;
  double mean_abs_delta = 0.0;      // over reconstructable jobs
  double share_within_review = 0.0;  // fraction of reconstructable jobs with |delta| < review
  std::size_t strong_outliers = 0;
  std::size_t review = 0;
  std::size_t consistent = 0;
};

/// Leave-one-out over every job. Solves run on up to `parallelism` threads;
/// results are assembled in job order, so the report does not depend on
/// scheduling.
CrossvalReport run_crossval(const Dataset& dataset, const TaskShareTable& shares,
                            const TaskProbabilities& full, double epsilon,
                            const OutlierThresholds& thresholds, std::size_t bins,
                            std::size_t parallelism);

}  // namespace taskprob
