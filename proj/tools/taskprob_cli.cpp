// Command-line entry point: dataset validation, the two LP stages,
// leave-one-out cross-validation, analysis exports and synthetic data.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "taskprob/pipeline.hpp"

namespace {

using taskprob::CorrelationMethod;
using taskprob::RunConfig;
using taskprob::SynthOptions;

void add_data_option(CLI::App& cmd, RunConfig& config) {
  cmd.add_option("--data", config.data, "Dataset directory (CSV files) or JSON document")
      ->required();
}

void add_stage_options(CLI::App& cmd, RunConfig& config, std::string& correlation,
                       std::string& reuse) {
  add_data_option(cmd, config);
  cmd.add_option("--out", config.out, "Output directory")->capture_default_str();
  cmd.add_option("--epsilon", config.epsilon, "Relative band half-width of both LPs")
      ->capture_default_str();
  cmd.add_flag("!--no-normalize-shares", config.normalize_shares,
               "Use raw shares instead of shares rescaled to sum to 1 per job");
  cmd.add_option("--outlier-strong", config.thresholds.strong,
                 "|p - p'| above this marks a strong outlier")
      ->capture_default_str();
  cmd.add_option("--outlier-review", config.thresholds.review,
                 "|p - p'| above this marks a job for review")
      ->capture_default_str();
  cmd.add_option("--bins", config.bins, "Histogram bins")->capture_default_str();
  cmd.add_option("--seed", config.seed, "Seed recorded in the manifest")->capture_default_str();
  cmd.add_option("--jobs", config.jobs, "Cross-validation threads")->capture_default_str();
  cmd.add_flag("--dump-lp", config.dump_lp, "Write the LPs in CPLEX LP text format");
  cmd.add_option("--correlation", correlation, "Correlation statistic")
      ->check(CLI::IsMember({"pearson", "spearman"}))
      ->capture_default_str();
  cmd.add_flag("--uniform-shares", config.uniform_shares,
               "Debug: give every task of a job the same share instead of solving LP1");
  cmd.add_flag("--timings", config.timings,
               "Record wall-clock seconds per stage in manifest.json (breaks byte identity)");
  cmd.add_option("--reuse", reuse, "Directory with outputs of an earlier stage to reuse");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decompose job automation probabilities into task probabilities"};
  app.require_subcommand(1);

  RunConfig config;
  std::string correlation = "pearson";
  std::string reuse;

  auto* validate = app.add_subcommand("validate", "Check a dataset and print a JSON report");
  add_data_option(*validate, config);

  std::map<std::string, CLI::App*> stages;
  const std::pair<const char*, const char*> stage_help[] = {
      {"shares", "Solve the coefficient LP and write task shares"},
      {"probs", "Solve the task probability LP"},
      {"crossval", "Leave-one-out cross-validation and outlier tiers"},
      {"analyze", "Correlations and plot data"},
      {"run", "All stages plus manifest.json"},
  };
  for (const auto& [name, help] : stage_help) {
    stages[name] = app.add_subcommand(name, help);
    add_stage_options(*stages[name], config, correlation, reuse);
  }

  SynthOptions synth;
  std::string preset = "default";
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset with planted truth");
  synth_cmd->add_option("--out", synth.out, "Output directory")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--preset", preset, "Starting configuration")
      ->check(CLI::IsMember({"default", "two-clusters"}))
      ->capture_default_str();
  // Overrides are applied after the preset.
  std::optional<std::size_t> job_count, tasks_min, tasks_max, edges_min, edges_max, min_neighbors;
  std::optional<double> density, cross_density, edge_noise;
  std::vector<std::size_t> flips;
  std::vector<double> rates;
  bool no_shared = false;
  synth_cmd->add_option("--job-count", job_count, "Number of jobs");
  synth_cmd->add_option("--tasks-min", tasks_min, "Fewest tasks per job");
  synth_cmd->add_option("--tasks-max", tasks_max, "Most tasks per job");
  synth_cmd->add_option("--density", density, "Relatedness probability of same-cluster jobs");
  synth_cmd->add_option("--cross-density", cross_density,
                        "Relatedness probability of jobs in different clusters");
  synth_cmd->add_option("--edges-min", edges_min, "Fewest task edges per related job pair");
  synth_cmd->add_option("--edges-max", edges_max, "Most task edges per related job pair");
  synth_cmd->add_option("--edge-noise", edge_noise, "Fraction of edges ignoring planted levels");
  synth_cmd->add_option("--min-neighbor-jobs", min_neighbors,
                        "Other jobs every task must have a same-level neighbor in");
  synth_cmd->add_option("--cluster-rates", rates, "Planted automatable fraction per cluster");
  synth_cmd->add_option("--flip", flips, "0-based job index whose probability is published as 1 - p");
  synth_cmd->add_flag("--per-job-coefficients", no_shared,
                      "Draw a separate coefficient vector for every job");
  synth_cmd->add_flag("--json", synth.json, "Also write dataset.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? taskprob::kExitOk : taskprob::kExitValidation;
  }

  config.correlation =
      correlation == "spearman" ? CorrelationMethod::kSpearman : CorrelationMethod::kPearson;
  if (!reuse.empty()) config.reuse = reuse;

  if (validate->parsed()) return taskprob::cmd_validate(config, std::cout, std::cerr);
  if (synth_cmd->parsed()) {
    synth.generator = preset == "two-clusters" ? taskprob::SynthConfig::two_clusters()
                                               : taskprob::SynthConfig{};
    auto& g = synth.generator;
    if (job_count) g.jobs = *job_count;
    if (tasks_min) g.tasks_min = *tasks_min;
    if (tasks_max) g.tasks_max = *tasks_max;
    if (density) g.density = *density;
    if (cross_density) g.cross_density = *cross_density;
    if (edges_min) g.edges_min = *edges_min;
    if (edges_max) g.edges_max = *edges_max;
    if (edge_noise) g.edge_noise = *edge_noise;
    if (min_neighbors) g.min_neighbor_jobs = *min_neighbors;
    if (!rates.empty()) g.cluster_rates = rates;
    if (no_shared) g.shared_coefficients = false;
    g.flipped_jobs = flips;
    return taskprob::cmd_synth(synth, std::cerr);
  }
  if (stages["shares"]->parsed()) return taskprob::cmd_shares(config, std::cerr);
  if (stages["probs"]->parsed()) return taskprob::cmd_probs(config, std::cerr);
  if (stages["crossval"]->parsed()) return taskprob::cmd_crossval(config, std::cerr);
  if (stages["analyze"]->parsed()) return taskprob::cmd_analyze(config, std::cerr);
  return taskprob::cmd_run(config, std::cerr);
}
