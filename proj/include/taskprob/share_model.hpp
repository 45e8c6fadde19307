#pragma once

#include <array>
#include <vector>

#include "taskprob/dataset.hpp"
#include "taskprob/lp.hpp"

namespace taskprob {

using Coefficients = std::array<double, kBuckets>;

/// The coefficient LP together with the variable layout needed to read its
/// solution back.
struct ShareLp {
  lp::Problem problem;
  std::vector<std::array<std::size_t, kBuckets>> tau_vars;    // per job
  std::vector<IndexPair> job_pairs;                           // related jobs
  std::vector<std::array<std::size_t, kBuckets>> delta_vars;  // per job pair
};

/// Per job, seven nondecreasing nonnegative coefficients turning bucket
/// frequencies into time shares, chosen to keep related jobs' coefficients
/// close. Rows per related pair and bucket: delta >= tau_a - tau_b and
/// delta >= tau_b - tau_a. Rows per job: share sum <= 1 + eps, share sum
/// >= 1 - eps, tau_1 >= 0, and tau_l >= tau_(l-1) for l = 2..7.
ShareLp build_share_lp(const Dataset& dataset, double epsilon);

struct ShareCoefficients {
  std::vector<Coefficients> tau;               // per job
  std::vector<IndexPair> job_pairs;
  std::vector<Coefficients> delta;             // per job pair
  std::vector<bool> unconstrained_by_relations;  // per job: no related job
  double objective = 0.0;
  double mean_delta = 0.0;      // over all delta variables; 0 without pairs
  double mean_coefficient = 0.0;
  double epsilon = 0.0;
  std::size_t variable_count = 0;
  std::size_t constraint_count = 0;
  std::size_t iterations = 0;
};

/// Solves the coefficient LP. The returned coefficients are nudged by at
/// most the solver tolerance so that they are exactly nonnegative and
/// nondecreasing and every job's raw share sum, as compute_shares() forms
/// it, lies exactly inside [1 - eps, 1 + eps]. Pair slacks and the objective
/// are the solver's. Throws SolverError if the LP is not optimal, naming the
/// stage.
ShareCoefficients solve_shares(const Dataset& dataset, double epsilon);

struct TaskShareTable {
  std::vector<double> raw;         // per task
  std::vector<double> normalized;  // per task, sums to 1 per job
  std::vector<double> raw_job_sum;  // per job
  bool use_normalized = true;

  /// The share the probability LP should use.
  double share(std::size_t task) const {
    return use_normalized ? normalized[task] : raw[task];
  }
};

/// s(t) = sum over buckets of tau_l * f_l(t) with the coefficients of the
/// task's job. Throws std::invalid_argument if coefficients are missing for
/// a job.
TaskShareTable compute_shares(const std::vector<Coefficients>& tau,
                              const Dataset& dataset, bool normalize);

/// Every task of job j gets 1/|T_j|; for comparison runs.
TaskShareTable uniform_shares(const Dataset& dataset);

}  // namespace taskprob
