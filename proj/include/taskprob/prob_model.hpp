#pragma once

#include <optional>
#include <vector>

#include "taskprob/statistics.hpp"
#include "taskprob/dataset.hpp"
#include "taskprob/lp.hpp"
#include "taskprob/share_model.hpp"

namespace taskprob {

inline constexpr std::size_t kNoVariable = static_cast<std::size_t>(-1);

/// The task-probability LP and its variable layout.
struct ProbLp {
  lp::Problem problem;
  std::vector<std::size_t> p_vars;       // per task; kNoVariable if excluded
  std::vector<std::size_t> edge_index;   // graph edge behind each pair variable
  std::vector<std::size_t> delta_vars;   // per pair
};

/// One p in [0,1] per task and one pair variable in [0,1] per related task
/// pair, with p(t) - p(t') <= D and p(t') - p(t) <= D, and per job
/// p(j)(1 - eps) <= sum_t p(t) s(t) <= p(j)(1 + eps). Tasks of
/// `excluded_job`, its band rows, and every pair touching its tasks are left
/// out.
ProbLp build_prob_lp(const Dataset& dataset, const TaskShareTable& shares,
                     double epsilon,
                     std::optional<std::size_t> excluded_job = std::nullopt);

struct TaskProbabilities {
  std::vector<std::optional<double>> prob;  // per task; empty if excluded
  std::vector<std::size_t> edge_index;      // pairs present in the LP
  std::vector<double> pair_delta;           // per pair, at the optimum
  std::vector<bool> anchored;               // per task: has a pair term
  double objective = 0.0;
  double epsilon = 0.0;
  std::size_t variable_count = 0;
  std::size_t constraint_count = 0;
  std::size_t iterations = 0;

  double at(std::size_t task) const { return prob.at(task).value(); }
  std::size_t unanchored_count() const;
};

/// Solves the LP. Throws SolverError if it is not optimal, naming the stage.
TaskProbabilities solve_task_probs(const Dataset& dataset, const TaskShareTable& shares,
                                   double epsilon,
                                   std::optional<std::size_t> excluded_job = std::nullopt);

struct PairDiffDistribution {
  Histogram histogram;           // |p(t) - p(t')| over [0,1]
  std::size_t pair_count = 0;
  double mean = 0.0;             // mean over pairs; 0 when there are none
  std::vector<double> diffs;     // per graph edge with both ends defined
  std::vector<std::size_t> edges;
};

/// Histogram of the probability gap over every related pair whose two
/// tasks have a probability.
PairDiffDistribution pair_diff_distribution(const TaskProbabilities& probs,
                                            const RelatednessGraph& graph,
                                            std::size_t bins);

}  // namespace taskprob
