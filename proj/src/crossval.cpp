#include "taskprob/crossval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace taskprob {

const char* to_string(OutlierTier tier) {
  switch (tier) {
    case OutlierTier::kConsistent: return "consistent";
    case OutlierTier::kReview: return "review";
    case OutlierTier::kStrongOutlier: return "strong outlier";
    case OutlierTier::kUnreconstructable: return "unreconstructable";
  }
  return "unknown";
}

void OutlierThresholds::validate() const {
  if (!(review >= 0.0 && review <= strong && strong <= 1.0)) {
    throw std::invalid_argument("outlier thresholds must satisfy 0 <= review <= strong <= 1");
  }
}

OutlierTier OutlierThresholds::classify(double delta) const {
  const double d = std::abs(delta);
  if (d > strong) return OutlierTier::kStrongOutlier;
  if (d > review) return OutlierTier::kReview;
  return OutlierTier::kConsistent;
}

TaskProbabilities leave_one_out_solve(const Dataset& dataset, const TaskShareTable& shares,
                                      double epsilon, std::size_t excluded_job) {
  return solve_task_probs(dataset, shares, epsilon, excluded_job);
}

NeighborAverage neighbor_average(const Dataset& dataset, std::size_t excluded_job,
                                 const TaskProbabilities& loo_solution) {
  NeighborAverage out;
  const std::size_t n = dataset.tasks().size();
  out.p_prime.resize(n);
  out.neighbors.assign(n, 0);
  for (std::size_t t : dataset.jobs().at(excluded_job).tasks) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t nb : dataset.graph().neighbors(t)) {
      const auto& value = loo_solution.prob.at(nb);
      if (!value) continue;
      sum += *value;
      ++count;
    }
    out.neighbors[t] = count;
    if (count) out.p_prime[t] = std::clamp(sum / static_cast<double>(count), 0.0, 1.0);
  }
  return out;
}

JobReconstruction reconstruct_job(const std::vector<std::optional<double>>& p_prime,
                                  const TaskShareTable& shares, const Dataset& dataset,
                                  std::size_t job) {
  JobReconstruction out;
  double weighted = 0.0;
  double mass = 0.0;
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t t : dataset.jobs().at(job).tasks) {
    if (!p_prime.at(t)) continue;
    const double s = shares.share(t);
    weighted += *p_prime[t] * s;
    mass += s;
    lo = std::min(lo, *p_prime[t]);
    hi = std::max(hi, *p_prime[t]);
  }
  out.coverage = mass;
  if (mass > 0.0) {
    out.p_prime = std::clamp(weighted / mass, lo, hi);
  } else if (hi >= lo) {
    // Defined tasks that all carry zero share: fall back to their plain mean.
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t : dataset.jobs().at(job).tasks) {
      if (p_prime[t]) {
        sum += *p_prime[t];
        ++count;
      }
    }
    out.p_prime = sum / static_cast<double>(count);
  }
  return out;
}

namespace {

struct JobOutcome {
  NeighborAverage average;
  JobReconstruction reconstruction;
  std::exception_ptr error;
};

JobOutcome cross_validate_job(const Dataset& dataset, const TaskShareTable& shares,
                              double epsilon, std::size_t job) {
  JobOutcome outcome;
  try {
    const TaskProbabilities loo = leave_one_out_solve(dataset, shares, epsilon, job);
    outcome.average = neighbor_average(dataset, job, loo);
    outcome.reconstruction = reconstruct_job(outcome.average.p_prime, shares, dataset, job);
  } catch (...) {
    outcome.error = std::current_exception();
  }
  return outcome;
}

}  // namespace

CrossvalReport run_crossval(const Dataset& dataset, const TaskShareTable& shares,
                            const TaskProbabilities& full, double epsilon,
                            const OutlierThresholds& thresholds, std::size_t bins,
                            std::size_t parallelism) {
  thresholds.validate();
  const auto& jobs = dataset.jobs();
  const auto& tasks = dataset.tasks();
  std::vector<JobOutcome> outcomes(jobs.size());

  const std::size_t workers = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(jobs.size(), 1));
  if (workers == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      outcomes[j] = cross_validate_job(dataset, shares, epsilon, j);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
          outcomes[j] = cross_validate_job(dataset, shares, epsilon, j);
        }
      });
    }
  }
  for (const JobOutcome& outcome : outcomes) {
    if (outcome.error) std::rethrow_exception(outcome.error);
  }

  CrossvalReport report;
  report.thresholds = thresholds;
  report.tasks.resize(tasks.size());
  std::vector<double> task_diffs;
  std::vector<double> job_diffs;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const JobOutcome& outcome = outcomes[j];
    for (std::size_t t : jobs[j].tasks) {
      CrossvalTask& row = report.tasks[t];
      row.task = t;
      row.p = full.at(t);
      row.p_prime = outcome.average.p_prime[t];
      row.neighbors = outcome.average.neighbors[t];
      if (row.p_prime) task_diffs.push_back(row.p - *row.p_prime);
    }
    CrossvalJob row;
    row.job = j;
    row.p = jobs[j].automation_prob;
    row.coverage = outcome.reconstruction.coverage;
    row.p_prime = outcome.reconstruction.p_prime;
    if (row.p_prime) {
      row.delta = row.p - *row.p_prime;
      row.tier = thresholds.classify(*row.delta);
      job_diffs.push_back(*row.delta);
      switch (row.tier) {
        case OutlierTier::kStrongOutlier: ++report.strong_outliers; break;
        case OutlierTier::kReview: ++report.review; break;
        default: ++report.consistent; break;
      }
    } else {
      row.tier = OutlierTier::kUnreconstructable;
      report.unreconstructable.push_back(j);
    }
    report.jobs.push_back(row);
  }
  report.task_diff = make_histogram(task_diffs, -1.0, 1.0, bins);
  report.job_diff = make_histogram(job_diffs, -1.0, 1.0, bins);
  report.mean_abs_delta = report.job_diff.mean_abs;
  if (!job_diffs.empty()) {
    const auto within = std::count_if(job_diffs.begin(), job_diffs.end(), [&](double d) {
      return std::abs(d) < thresholds.review;
    });
    report.share_within_review = static_cast<double>(within) / static_cast<double>(job_diffs.size());
  }
  return report;
}

}  // namespace taskprob
