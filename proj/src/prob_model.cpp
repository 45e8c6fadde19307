#include "taskprob/prob_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "taskprob/error.hpp"

namespace taskprob {

ProbLp build_prob_lp(const Dataset& dataset, const TaskShareTable& shares,
                     double epsilon, std::optional<std::size_t> excluded_job) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0,1)");
  }
  const auto& jobs = dataset.jobs();
  const auto& tasks = dataset.tasks();
  if (shares.raw.size() != tasks.size() || shares.normalized.size() != tasks.size()) {
    throw std::invalid_argument("share table does not cover every task");
  }
  if (excluded_job && *excluded_job >= jobs.size()) {
    throw std::invalid_argument("excluded job index out of range");
  }
  auto included = [&](std::size_t task) {
    return !excluded_job || tasks[task].job != *excluded_job;
  };

  ProbLp out;
  lp::Problem& p = out.problem;
  out.p_vars.assign(tasks.size(), kNoVariable);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!included(t)) continue;
    out.p_vars[t] = p.add_variable("p_" + tasks[t].id, 0.0, 1.0, 0.0);
  }

  const auto& edges = dataset.graph().edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    if (!included(a) || !included(b)) continue;
    const std::string suffix = tasks[a].id + "_" + tasks[b].id;
    const std::size_t d = p.add_variable("D_" + suffix, 0.0, 1.0, 1.0);
    out.edge_index.push_back(e);
    out.delta_vars.push_back(d);
    p.add_constraint("dpos_" + suffix, {{out.p_vars[a], 1.0}, {out.p_vars[b], -1.0}, {d, -1.0}},
                     lp::Relation::kLessEqual, 0.0);
    p.add_constraint("dneg_" + suffix, {{out.p_vars[b], 1.0}, {out.p_vars[a], -1.0}, {d, -1.0}},
                     lp::Relation::kLessEqual, 0.0);
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (excluded_job && j == *excluded_job) continue;
    std::vector<lp::Term> terms;
    for (std::size_t t : jobs[j].tasks) terms.push_back({out.p_vars[t], shares.share(t)});
    const double pj = jobs[j].automation_prob;
    p.add_constraint("band_hi_" + jobs[j].id, terms, lp::Relation::kLessEqual,
                     pj * (1.0 + epsilon));
    p.add_constraint("band_lo_" + jobs[j].id, terms, lp::Relation::kGreaterEqual,
                     pj * (1.0 - epsilon));
  }
  return out;
}

std::size_t TaskProbabilities::unanchored_count() const {
  std::size_t n = 0;
  for (std::size_t t = 0; t < prob.size(); ++t) {
    if (prob[t] && !anchored[t]) ++n;
  }
  return n;
}

TaskProbabilities solve_task_probs(const Dataset& dataset, const TaskShareTable& shares,
                                   double epsilon, std::optional<std::size_t> excluded_job) {
  const ProbLp lp = build_prob_lp(dataset, shares, epsilon, excluded_job);
  const lp::Solution sol = lp::solve(lp.problem);
  if (sol.status != lp::Status::kOptimal) {
    std::string stage = "LP2 (task probabilities)";
    if (excluded_job) stage += " without job '" + dataset.jobs()[*excluded_job].id + "'";
    throw SolverError(stage + " is " + lp::to_string(sol.status));
  }

  const auto& edges = dataset.graph().edges();
  TaskProbabilities out;
  out.epsilon = epsilon;
  out.objective = sol.objective;
  out.iterations = sol.iterations;
  out.variable_count = lp.problem.variables().size();
  out.constraint_count = lp.problem.constraints().size();
  out.prob.resize(dataset.tasks().size());
  out.anchored.assign(dataset.tasks().size(), false);
  for (std::size_t t = 0; t < lp.p_vars.size(); ++t) {
    if (lp.p_vars[t] != kNoVariable) out.prob[t] = sol.values[lp.p_vars[t]];
  }
  out.edge_index = lp.edge_index;
  for (std::size_t k = 0; k < lp.delta_vars.size(); ++k) {
    out.pair_delta.push_back(sol.values[lp.delta_vars[k]]);
    out.anchored[edges[lp.edge_index[k]].first] = true;
    out.anchored[edges[lp.edge_index[k]].second] = true;
  }
  return out;
}

PairDiffDistribution pair_diff_distribution(const TaskProbabilities& probs,
                                            const RelatednessGraph& graph,
                                            std::size_t bins) {
  PairDiffDistribution out;
  const auto& edges = graph.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& a = probs.prob.at(edges[e].first);
    const auto& b = probs.prob.at(edges[e].second);
    if (!a || !b) continue;
    out.diffs.push_back(std::abs(*a - *b));
    out.edges.push_back(e);
  }
  out.histogram = make_histogram(out.diffs, 0.0, 1.0, bins);
  out.pair_count = out.diffs.size();
  out.mean = out.histogram.mean;
  return out;
}

}  // namespace taskprob
