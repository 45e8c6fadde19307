#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "taskprob/analysis.hpp"
#include "taskprob/crossval.hpp"
#include "taskprob/dataset.hpp"
#include "taskprob/prob_model.hpp"
#include "taskprob/share_model.hpp"
#include "taskprob/synthetic.hpp"

namespace taskprob {

/// Process exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,  // bad input data or configuration
  kExitSolver = 2,      // an LP stage failed
  kExitIo = 3,          // file system or serialization failure
};

/// Settings shared by every pipeline stage.
struct RunConfig {
  std::filesystem::path data;          // CSV directory or JSON document
  std::filesystem::path out = "out";   // output directory
  double epsilon = 0.01;
  bool normalize_shares = true;
  OutlierThresholds thresholds;
  std::size_t bins = 50;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;                // cross-validation threads
  bool dump_lp = false;                // write the LPs in CPLEX LP text form
  bool uniform_shares = false;         // replace computed shares by 1/|T(j)|
  CorrelationMethod correlation = CorrelationMethod::kPearson;
  bool timings = false;                // add wall-clock seconds to the manifest
  /// Directory holding outputs of an earlier run; stages reuse the files
  /// they find there instead of recomputing them.
  std::optional<std::filesystem::path> reuse;

  /// Throws std::invalid_argument unless epsilon lies in (0, 1), the
  /// outlier thresholds are ordered, bins >= 1 and jobs >= 1.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Stage output files

void write_coefficients_csv(const std::filesystem::path& path, const Dataset& dataset,
                            const ShareCoefficients& coefficients);
void write_shares_csv(const std::filesystem::path& path, const Dataset& dataset,
                      const TaskShareTable& shares);
/// Reads a shares file written by write_shares_csv for the same dataset.
/// Throws ValidationError on missing, duplicate or unknown tasks.
TaskShareTable read_shares_csv(const std::filesystem::path& path, const Dataset& dataset,
                               bool normalize);

void write_task_probs_csv(const std::filesystem::path& path, const Dataset& dataset,
                          const TaskShareTable& shares, const TaskProbabilities& probs);
/// Reads a task probability file for the same dataset. Pair differences and
/// the objective are recomputed from the graph; solver statistics are zero.
TaskProbabilities read_task_probs_csv(const std::filesystem::path& path,
                                      const Dataset& dataset, double epsilon);
void write_pair_diffs_csv(const std::filesystem::path& path, const Dataset& dataset,
                          const TaskProbabilities& probs);

void write_crossval_jobs_csv(const std::filesystem::path& path, const Dataset& dataset,
                             const CrossvalReport& report);
void write_crossval_tasks_csv(const std::filesystem::path& path, const Dataset& dataset,
                              const CrossvalReport& report);

/// Signed differences p - p' recovered from cross-validation files.
struct CrossvalDiffs {
  std::vector<double> task;
  std::vector<double> job;
};
CrossvalDiffs read_crossval_diffs(const std::filesystem::path& jobs_csv,
                                  const std::filesystem::path& tasks_csv);

/// Fraction of defined task probabilities in [0, 0.05] or [0.95, 1].
double polarization(const TaskProbabilities& probs);

// ---------------------------------------------------------------------------
// Commands. Each returns an ExitCode and never throws: failures are reported
// on `log` with the failing stage named.

/// Loads the dataset and prints a JSON validation report on `out`.
int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_shares(const RunConfig& config, std::ostream& log);
int cmd_probs(const RunConfig& config, std::ostream& log);
int cmd_crossval(const RunConfig& config, std::ostream& log);
int cmd_analyze(const RunConfig& config, std::ostream& log);
/// Every stage, plus manifest.json.
int cmd_run(const RunConfig& config, std::ostream& log);

struct SynthOptions {
  SynthConfig generator;
  std::uint64_t seed = 1;
  std::filesystem::path out = "synthetic";
  bool json = false;  // also write dataset.json
};
/// Writes jobs.csv, tasks.csv, related.csv, attributes.csv and truth.json.
int cmd_synth(const SynthOptions& options, std::ostream& log);

}  // namespace taskprob
