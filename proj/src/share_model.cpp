#include "taskprob/share_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "taskprob/error.hpp"

namespace taskprob {

namespace {

double raw_share(const Coefficients& c, const Task& task) {
  double s = 0.0;
  for (std::size_t l = 0; l < kBuckets; ++l) s += c[l] * task.freq[l];
  return s;
}

/// The simplex meets each row only up to its tolerance and sums the band row
/// bucket by bucket, while shares are summed task by task. Moves a job's
/// coefficients by at most that tolerance so that nonnegativity, monotonicity
/// and the share-sum band hold exactly as compute_shares() evaluates them.
void polish(Coefficients& c, const Dataset& dataset, const Job& job, double epsilon) {
  c[0] = std::max(c[0], 0.0);
  for (std::size_t l = 1; l < kBuckets; ++l) c[l] = std::max(c[l], c[l - 1]);
  const double lo = 1.0 - epsilon;
  const double hi = 1.0 + epsilon;
  double target_lo = lo;
  double target_hi = hi;
  for (int attempt = 0; attempt < 16; ++attempt) {
    double sum = 0.0;
    for (std::size_t t : job.tasks) sum += raw_share(c, dataset.tasks()[t]);
    if (!(sum > 0.0) || (sum >= lo && sum <= hi)) return;
    // A positive factor keeps the coefficients nonnegative and ordered.
    const double factor = (sum < lo ? target_lo : target_hi) / sum;
    for (double& v : c) v *= factor;
    target_lo = std::nextafter(target_lo, hi);
    target_hi = std::nextafter(target_hi, lo);
  }
}

}  // namespace

ShareLp build_share_lp(const Dataset& dataset, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0,1)");
  }
  ShareLp out;
  const auto& jobs = dataset.jobs();
  const auto& tasks = dataset.tasks();
  lp::Problem& p = out.problem;

  out.tau_vars.resize(jobs.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    for (std::size_t l = 0; l < kBuckets; ++l) {
      out.tau_vars[j][l] = p.add_variable(
          "tau_" + jobs[j].id + "_" + std::to_string(l + 1), -lp::kInfinity,
          lp::kInfinity, 0.0);
    }
  }

  out.job_pairs = derive_job_relatedness(dataset);
  out.delta_vars.resize(out.job_pairs.size());
  for (std::size_t k = 0; k < out.job_pairs.size(); ++k) {
    const auto [a, b] = out.job_pairs[k];
    for (std::size_t l = 0; l < kBuckets; ++l) {
      const std::string suffix = jobs[a].id + "_" + jobs[b].id + "_" + std::to_string(l + 1);
      const std::size_t d = p.add_variable("delta_" + suffix, 0.0, lp::kInfinity, 1.0);
      out.delta_vars[k][l] = d;
      const std::size_t ta = out.tau_vars[a][l];
      const std::size_t tb = out.tau_vars[b][l];
      p.add_constraint("dpos_" + suffix, {{d, 1.0}, {ta, -1.0}, {tb, 1.0}},
                       lp::Relation::kGreaterEqual, 0.0);
      p.add_constraint("dneg_" + suffix, {{d, 1.0}, {tb, -1.0}, {ta, 1.0}},
                       lp::Relation::kGreaterEqual, 0.0);
    }
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    // Bucket mass summed over the job's tasks multiplies each coefficient.
    std::array<double, kBuckets> mass{};
    for (std::size_t t : jobs[j].tasks) {
      for (std::size_t l = 0; l < kBuckets; ++l) mass[l] += tasks[t].freq[l];
    }
    std::vector<lp::Term> terms;
    for (std::size_t l = 0; l < kBuckets; ++l) {
      terms.push_back({out.tau_vars[j][l], mass[l]});
    }
    const std::string& id = jobs[j].id;
    p.add_constraint("band_hi_" + id, terms, lp::Relation::kLessEqual, 1.0 + epsilon);
    p.add_constraint("band_lo_" + id, terms, lp::Relation::kGreaterEqual, 1.0 - epsilon);
    p.add_constraint("nonneg_" + id, {{out.tau_vars[j][0], 1.0}},
                     lp::Relation::kGreaterEqual, 0.0);
    for (std::size_t l = 1; l < kBuckets; ++l) {
      p.add_constraint("mono_" + id + "_" + std::to_string(l + 1),
                       {{out.tau_vars[j][l], 1.0}, {out.tau_vars[j][l - 1], -1.0}},
                       lp::Relation::kGreaterEqual, 0.0);
    }
  }
  return out;
}

ShareCoefficients solve_shares(const Dataset& dataset, double epsilon) {
  const ShareLp lp = build_share_lp(dataset, epsilon);
  const lp::Solution sol = lp::solve(lp.problem);
  if (sol.status != lp::Status::kOptimal) {
    throw SolverError(std::string("LP1 (task shares) is ") + lp::to_string(sol.status));
  }

  ShareCoefficients out;
  out.epsilon = epsilon;
  out.objective = sol.objective;
  out.iterations = sol.iterations;
  out.variable_count = lp.problem.variables().size();
  out.constraint_count = lp.problem.constraints().size();
  out.job_pairs = lp.job_pairs;

  const std::size_t n_jobs = dataset.jobs().size();
  out.tau.resize(n_jobs);
  double coef_total = 0.0;
  for (std::size_t j = 0; j < n_jobs; ++j) {
    for (std::size_t l = 0; l < kBuckets; ++l) {
      out.tau[j][l] = sol.values[lp.tau_vars[j][l]];
    }
    polish(out.tau[j], dataset, dataset.jobs()[j], epsilon);
    for (double v : out.tau[j]) coef_total += v;
  }
  out.mean_coefficient = n_jobs ? coef_total / static_cast<double>(n_jobs * kBuckets) : 0.0;

  out.unconstrained_by_relations.assign(n_jobs, true);
  out.delta.resize(lp.job_pairs.size());
  for (std::size_t k = 0; k < lp.job_pairs.size(); ++k) {
    out.unconstrained_by_relations[lp.job_pairs[k].first] = false;
    out.unconstrained_by_relations[lp.job_pairs[k].second] = false;
    for (std::size_t l = 0; l < kBuckets; ++l) {
      out.delta[k][l] = sol.values[lp.delta_vars[k][l]];
    }
  }
  const std::size_t delta_count = lp.job_pairs.size() * kBuckets;
  out.mean_delta = delta_count ? sol.objective / static_cast<double>(delta_count) : 0.0;
  return out;
}

TaskShareTable compute_shares(const std::vector<Coefficients>& tau,
                              const Dataset& dataset, bool normalize) {
  const auto& jobs = dataset.jobs();
  const auto& tasks = dataset.tasks();
  if (tau.size() != jobs.size()) {
    throw std::invalid_argument("coefficients cover " + std::to_string(tau.size()) +
                                " jobs, dataset has " + std::to_string(jobs.size()));
  }
  TaskShareTable table;
  table.use_normalized = normalize;
  table.raw.assign(tasks.size(), 0.0);
  table.normalized.assign(tasks.size(), 0.0);
  table.raw_job_sum.assign(jobs.size(), 0.0);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const double s = raw_share(tau[tasks[t].job], tasks[t]);
    table.raw[t] = s;
    table.raw_job_sum[tasks[t].job] += s;
  }
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const double total = table.raw_job_sum[j];
    for (std::size_t t : jobs[j].tasks) {
      table.normalized[t] = total > 0.0 ? table.raw[t] / total
                                        : 1.0 / static_cast<double>(jobs[j].tasks.size());
    }
  }
  return table;
}

TaskShareTable uniform_shares(const Dataset& dataset) {
  TaskShareTable table;
  const auto& jobs = dataset.jobs();
  table.raw.assign(dataset.tasks().size(), 0.0);
  table.raw_job_sum.assign(jobs.size(), 1.0);
  for (const Job& job : jobs) {
    for (std::size_t t : job.tasks) table.raw[t] = 1.0 / static_cast<double>(job.tasks.size());
  }
  table.normalized = table.raw;
  return table;
}

}  // namespace taskprob
