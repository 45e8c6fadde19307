#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "taskprob/error.hpp"

namespace taskprob {

/// Number of performance-frequency buckets, from "yearly or less" (index 0)
/// to "hourly or more" (index 6).
inline constexpr std::size_t kBuckets = 7;

/// Allowed |sum - 1| of an input frequency row before it is rejected.
inline constexpr double kFrequencyRenormalizeBand = 0.02;

/// Rows closer to 1 than this are left untouched so that reloading written
/// data reproduces it bit for bit.
inline constexpr double kFrequencyExactBand = 1e-12;

using FrequencyDistribution = std::array<double, kBuckets>;

struct Task {
  std::string id;
  std::size_t job = 0;  // index into Dataset::jobs()
  std::string description;
  FrequencyDistribution freq{};
};

struct Job {
  std::string id;
  std::string title;
  double automation_prob = 0.0;
  std::map<std::string, double> attributes;
  std::vector<std::size_t> tasks;  // indices into Dataset::tasks(), file order
};

/// Unordered pair of indices stored with first < second.
struct IndexPair {
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const IndexPair&, const IndexPair&) = default;
  friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

/// Undirected task-relatedness graph. Edges keep insertion order; duplicate
/// insertions (in either orientation) are ignored.
class RelatednessGraph {
 public:
  RelatednessGraph() = default;
  explicit RelatednessGraph(std::size_t task_count);

  /// Returns false when the edge already exists. Throws std::invalid_argument
  /// on a self-loop or an out-of-range endpoint.
  bool add_edge(std::size_t a, std::size_t b);

  std::size_t task_count() const noexcept { return adjacency_.size(); }
  const std::vector<IndexPair>& edges() const noexcept { return edges_; }

  /// Neighbors sorted by task index.
  std::span<const std::size_t> neighbors(std::size_t task) const {
    return adjacency_.at(task);
  }

  bool related(std::size_t a, std::size_t b) const;

 private:
  std::vector<IndexPair> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// A validated problem instance. Immutable after construction.
class Dataset {
 public:
  Dataset() = default;

  /// Checks every invariant and throws ValidationError listing all
  /// violations. `Job::tasks` is rebuilt from `Task::job`.
  Dataset(std::vector<Job> jobs, std::vector<Task> tasks,
          RelatednessGraph graph);

  const std::vector<Job>& jobs() const noexcept { return jobs_; }
  const std::vector<Task>& tasks() const noexcept { return tasks_; }
  const RelatednessGraph& graph() const noexcept { return graph_; }

  std::optional<std::size_t> find_job(const std::string& id) const;
  std::optional<std::size_t> find_task(const std::string& id) const;

  /// Sorted attribute names present on at least one job.
  std::vector<std::string> attribute_names() const;

 private:
  std::vector<Job> jobs_;
  std::vector<Task> tasks_;
  RelatednessGraph graph_;
  std::unordered_map<std::string, std::size_t> job_index_;
  std::unordered_map<std::string, std::size_t> task_index_;
};

struct DatasetPaths {
  std::filesystem::path jobs;
  std::filesystem::path tasks;
  std::filesystem::path related;
  std::optional<std::filesystem::path> attributes;

  /// jobs.csv, tasks.csv, related.csv and (if present) attributes.csv.
  static DatasetPaths in_directory(const std::filesystem::path& dir);
};

/// Reads the four CSV files. Frequency rows off by at most
/// kFrequencyRenormalizeBand are rescaled to sum to 1. All problems found are
/// reported together in one ValidationError.
Dataset load_dataset(const DatasetPaths& paths);

/// Loads a directory of CSVs or a single JSON document, by path type.
Dataset load_dataset(const std::filesystem::path& path);

Dataset load_dataset_json(const std::filesystem::path& path);

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& dir);
void write_dataset_json(const Dataset& dataset,
                        const std::filesystem::path& path);

/// Job pairs (first < second, sorted) that own at least one related task
/// pair. Edges inside one job contribute nothing.
std::vector<IndexPair> derive_job_relatedness(const Dataset& dataset);

}  // namespace taskprob
