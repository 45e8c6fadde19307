#include "taskprob/analysis.hpp"

#include <stdexcept>

namespace taskprob {

const char* to_string(CorrelationMethod method) {
  return method == CorrelationMethod::kSpearman ? "spearman" : "pearson";
}

std::optional<double> correlate(CorrelationMethod method, std::span<const double> xs,
                                std::span<const double> ys) {
  if (xs.size() < 2) return std::nullopt;
  return method == CorrelationMethod::kSpearman ? spearman(xs, ys) : pearson(xs, ys);
}

ScatterSeries share_vs_probability(const Dataset& dataset, const TaskShareTable& shares,
                                   const TaskProbabilities& probs, CorrelationMethod method) {
  const auto& tasks = dataset.tasks();
  if (probs.prob.size() != tasks.size() || shares.raw.size() != tasks.size()) {
    throw std::invalid_argument("share and probability tables must cover the same tasks");
  }
  ScatterSeries series;
  series.x_label = "share";
  series.y_label = "probability";
  series.method = method;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!probs.prob[t]) {
      ++series.skipped;
      continue;
    }
    series.ids.push_back(tasks[t].id);
    series.xs.push_back(shares.share(t));
    series.ys.push_back(*probs.prob[t]);
  }
  series.r = correlate(method, series.xs, series.ys);
  return series;
}

ScatterSeries attribute_vs_probability(const Dataset& dataset, const std::string& attribute,
                                       CorrelationMethod method) {
  ScatterSeries series;
  series.x_label = attribute;
  series.y_label = "automation_prob";
  series.method = method;
  for (const Job& job : dataset.jobs()) {
    auto it = job.attributes.find(attribute);
    if (it == job.attributes.end()) {
      ++series.skipped;
      continue;
    }
    series.ids.push_back(job.id);
    series.xs.push_back(it->second);
    series.ys.push_back(job.automation_prob);
  }
  if (series.xs.empty()) {
    throw std::invalid_argument("unknown attribute '" + attribute + "'");
  }
  series.r = correlate(method, series.xs, series.ys);
  return series;
}

}  // namespace taskprob
