#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "taskprob/dataset.hpp"

namespace taskprob {

/// Parameters of the planted-truth generator.
///
/// Every task carries a planted automation probability of 0 or 1, drawn with
/// its cluster's rate. Jobs of the same cluster are related with probability
/// `density`, jobs of different clusters with `cross_density`. Each related
/// job pair receives between `edges_min` and `edges_max` task edges; an edge
/// joins two tasks with equal planted probability unless it is one of the
/// `edge_noise` fraction of unconstrained edges.
struct SynthConfig {
  std::size_t jobs = 100;
  std::size_t tasks_min = 8;
  std::size_t tasks_max = 12;
  double density = 0.05;
  double cross_density = 0.0;
  std::size_t edges_min = 1;
  std::size_t edges_max = 3;
  double edge_noise = 0.0;
  /// Planted fraction of automatable tasks, one entry per cluster. Jobs are
  /// assigned to clusters round-robin.
  std::vector<double> cluster_rates = {0.1, 0.9};
  /// Top up edges until every task has same-level neighbors in at least this
  /// many other jobs (0 disables; skipped when both densities are 0).
  std::size_t min_neighbor_jobs = 1;
  /// All jobs copy job 0's tasks and frequencies; copies of the same task are
  /// related.
  bool identical_jobs = false;
  /// One coefficient vector for every job; each job's frequencies are then
  /// tilted toward the first or last bucket until its shares sum to one.
  /// Otherwise every job draws its own vector, rescaled to fit its tasks.
  bool shared_coefficients = true;
  /// Jobs whose published probability is replaced by 1 - p (planted outliers).
  std::vector<std::size_t> flipped_jobs;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Two well-separated, mutually consistent clusters (rates 0.1 / 0.9).
  /// Relatedness is spread thin (many related jobs, one or two edges each)
  /// and every task is anchored in three other jobs, so a leave-one-out
  /// solve still pins the neighbors of the excluded job and a single
  /// inconsistent job cannot dominate any neighbor average.
  static SynthConfig two_clusters();
};

/// Ground truth recorded alongside a generated dataset.
struct PlantedTruth {
  std::uint64_t seed = 0;
  SynthConfig config;
  std::vector<std::array<double, kBuckets>> coefficients;  // per job
  std::vector<double> shares;                              // per task
  std::vector<double> task_probs;                          // per task
  std::vector<std::size_t> job_cluster;                    // per job
  std::vector<double> unflipped_job_probs;                 // per job
};

struct SyntheticDataset {
  Dataset dataset;
  PlantedTruth truth;
};

/// Deterministic for a fixed (config, seed) on every platform: only the
/// standardized mt19937_64 bit stream is consumed.
SyntheticDataset generate_synthetic(const SynthConfig& config, std::uint64_t seed);

void write_truth_json(const SyntheticDataset& synthetic,
                      const std::filesystem::path& path);

}  // namespace taskprob
