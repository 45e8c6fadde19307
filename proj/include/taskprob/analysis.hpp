#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taskprob/dataset.hpp"
#include "taskprob/prob_model.hpp"
#include "taskprob/share_model.hpp"
#include "taskprob/statistics.hpp"

namespace taskprob {

enum class CorrelationMethod { kPearson, kSpearman };

const char* to_string(CorrelationMethod method);

std::optional<double> correlate(CorrelationMethod method, std::span<const double> xs,
                                std::span<const double> ys);

struct ScatterSeries {
  std::string x_label;
  std::string y_label;
  std::vector<std::string> ids;
  std::vector<double> xs;
  std::vector<double> ys;
  std::optional<double> r;  // empty when undefined (zero variance, < 2 points)
  std::size_t skipped = 0;  // entities without a value for x
  CorrelationMethod method = CorrelationMethod::kPearson;

  std::size_t size() const noexcept { return xs.size(); }
};

/// One point per task with a probability: (share, p(t)).
ScatterSeries share_vs_probability(const Dataset& dataset, const TaskShareTable& shares,
                                   const TaskProbabilities& probs,
                                   CorrelationMethod method = CorrelationMethod::kPearson);

/// One point per job carrying `attribute`: (level, p(j)). Jobs without it are
/// skipped and counted. Throws std::invalid_argument for a name no job has.
ScatterSeries attribute_vs_probability(const Dataset& dataset, const std::string& attribute,
                                       CorrelationMethod method = CorrelationMethod::kPearson);

}  // namespace taskprob
