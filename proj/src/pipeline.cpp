#include "taskprob/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "taskprob/csv.hpp"
#include "taskprob/error.hpp"
#include "taskprob/lp.hpp"

namespace taskprob {

using nlohmann::json;
namespace fs = std::filesystem;

void RunConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  thresholds.validate();
  if (bins < 1) throw std::invalid_argument("bins must be at least 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
}

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

std::string number(double value) { return csv::format_number(value); }

std::string optional_number(const std::optional<double>& value) {
  return value ? number(*value) : std::string();
}

json optional_json(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

json histogram_json(const Histogram& h) {
  return {{"lo", h.edges.front()},   {"hi", h.edges.back()}, {"bins", h.counts.size()},
          {"edges", h.edges},        {"counts", h.counts},   {"total", h.total},
          {"clamped", h.clamped},    {"mean", h.mean},       {"mean_abs", h.mean_abs}};
}

void write_histogram_csv(const fs::path& path, const Histogram& h) {
  auto out = open_output(path);
  csv::write_row(out, {"bin_lo", "bin_hi", "count"});
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    csv::write_row(out, {number(h.edges[b]), number(h.edges[b + 1]),
                         std::to_string(h.counts[b])});
  }
}

/// Column positions of `names` in a table header; issues for missing ones.
std::vector<std::size_t> locate_columns(const csv::Table& table,
                                        const std::vector<std::string>& names) {
  std::vector<std::size_t> positions;
  std::vector<Issue> issues;
  for (const std::string& name : names) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      issues.push_back({table.path.string(), 1, "missing column '" + name + "'"});
    } else {
      positions.push_back(static_cast<std::size_t>(it - table.header.begin()));
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return positions;
}

/// Reads one task-keyed value table, checking every task appears once.
template <typename OnRow>
void read_task_rows(const fs::path& path, const Dataset& dataset,
                    const std::vector<std::string>& columns, OnRow on_row) {
  const csv::Table table = csv::read(path);
  std::vector<std::string> wanted{"task_id"};
  wanted.insert(wanted.end(), columns.begin(), columns.end());
  const auto pos = locate_columns(table, wanted);
  std::vector<Issue> issues;
  std::vector<bool> seen(dataset.tasks().size(), false);
  for (const csv::Row& row : table.rows) {
    auto issue = [&](const std::string& message) {
      issues.push_back({path.string(), row.line, message});
    };
    if (row.fields.size() != table.header.size()) {
      issue("expected " + std::to_string(table.header.size()) + " fields");
      continue;
    }
    const std::string& id = row.fields[pos[0]];
    const auto task = dataset.find_task(id);
    if (!task) {
      issue("unknown task '" + id + "'");
      continue;
    }
    if (seen[*task]) {
      issue("duplicate task '" + id + "'");
      continue;
    }
    seen[*task] = true;
    std::vector<std::string> values;
    for (std::size_t k = 1; k < pos.size(); ++k) values.push_back(row.fields[pos[k]]);
    if (auto message = on_row(*task, values)) issue(*message);
  }
  for (std::size_t t = 0; t < seen.size(); ++t) {
    if (!seen[t]) issues.push_back({path.string(), 0, "no row for task '" + dataset.tasks()[t].id + "'"});
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '_' || c == '-';
    out += keep ? c : '_';
  }
  return out.empty() ? std::string("_") : out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stage output files

void write_coefficients_csv(const fs::path& path, const Dataset& dataset,
                            const ShareCoefficients& coefficients) {
  auto out = open_output(path);
  std::vector<std::string> header{"job_id"};
  for (std::size_t l = 1; l <= kBuckets; ++l) header.push_back("tau" + std::to_string(l));
  csv::write_row(out, header);
  for (std::size_t j = 0; j < dataset.jobs().size(); ++j) {
    std::vector<std::string> row{dataset.jobs()[j].id};
    for (double tau : coefficients.tau.at(j)) row.push_back(number(tau));
    csv::write_row(out, row);
  }
}

void write_shares_csv(const fs::path& path, const Dataset& dataset,
                      const TaskShareTable& shares) {
  auto out = open_output(path);
  csv::write_row(out, {"task_id", "job_id", "share_raw", "share_normalized"});
  for (std::size_t t = 0; t < dataset.tasks().size(); ++t) {
    const Task& task = dataset.tasks()[t];
    csv::write_row(out, {task.id, dataset.jobs()[task.job].id, number(shares.raw.at(t)),
                         number(shares.normalized.at(t))});
  }
}

TaskShareTable read_shares_csv(const fs::path& path, const Dataset& dataset,
                               bool normalize) {
  TaskShareTable table;
  const std::size_t n = dataset.tasks().size();
  table.raw.assign(n, 0.0);
  table.normalized.assign(n, 0.0);
  table.use_normalized = normalize;
  read_task_rows(path, dataset, {"share_raw", "share_normalized"},
                 [&](std::size_t t, const std::vector<std::string>& v) -> std::optional<std::string> {
                   if (!csv::parse_number(v[0], table.raw[t]) ||
                       !csv::parse_number(v[1], table.normalized[t])) {
                     return "share is not a number";
                   }
                   if (table.raw[t] < 0.0 || table.normalized[t] < 0.0) return "negative share";
                   return std::nullopt;
                 });
  table.raw_job_sum.assign(dataset.jobs().size(), 0.0);
  for (std::size_t t = 0; t < n; ++t) table.raw_job_sum[dataset.tasks()[t].job] += table.raw[t];
  return table;
}

void write_task_probs_csv(const fs::path& path, const Dataset& dataset,
                          const TaskShareTable& shares, const TaskProbabilities& probs) {
  auto out = open_output(path);
  csv::write_row(out, {"task_id", "job_id", "share", "probability", "anchored"});
  for (std::size_t t = 0; t < dataset.tasks().size(); ++t) {
    const Task& task = dataset.tasks()[t];
    csv::write_row(out, {task.id, dataset.jobs()[task.job].id, number(shares.share(t)),
                         optional_number(probs.prob.at(t)),
                         probs.anchored.at(t) ? "1" : "0"});
  }
}

TaskProbabilities read_task_probs_csv(const fs::path& path, const Dataset& dataset,
                                      double epsilon) {
  TaskProbabilities probs;
  const std::size_t n = dataset.tasks().size();
  probs.prob.assign(n, std::nullopt);
  probs.anchored.assign(n, false);
  probs.epsilon = epsilon;
  read_task_rows(path, dataset, {"probability", "anchored"},
                 [&](std::size_t t, const std::vector<std::string>& v) -> std::optional<std::string> {
                   if (!v[0].empty()) {
                     double p = 0.0;
                     if (!csv::parse_number(v[0], p)) return "probability is not a number";
                     if (p < 0.0 || p > 1.0) return "probability outside [0, 1]";
                     probs.prob[t] = p;
                   }
                   if (v[1] != "0" && v[1] != "1") return "anchored must be 0 or 1";
                   probs.anchored[t] = v[1] == "1";
                   return std::nullopt;
                 });
  const auto& edges = dataset.graph().edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& a = probs.prob[edges[e].first];
    const auto& b = probs.prob[edges[e].second];
    if (!a || !b) continue;
    probs.edge_index.push_back(e);
    probs.pair_delta.push_back(std::abs(*a - *b));
    probs.objective += probs.pair_delta.back();
  }
  return probs;
}

void write_pair_diffs_csv(const fs::path& path, const Dataset& dataset,
                          const TaskProbabilities& probs) {
  auto out = open_output(path);
  csv::write_row(out, {"task_id_a", "task_id_b", "p_a", "p_b", "abs_diff"});
  for (const IndexPair& edge : dataset.graph().edges()) {
    const auto& a = probs.prob.at(edge.first);
    const auto& b = probs.prob.at(edge.second);
    if (!a || !b) continue;
    csv::write_row(out, {dataset.tasks()[edge.first].id, dataset.tasks()[edge.second].id,
                         number(*a), number(*b), number(std::abs(*a - *b))});
  }
}

void write_crossval_jobs_csv(const fs::path& path, const Dataset& dataset,
                             const CrossvalReport& report) {
  auto out = open_output(path);
  csv::write_row(out, {"job_id", "p", "p_prime", "delta", "coverage", "tier"});
  for (const CrossvalJob& row : report.jobs) {
    csv::write_row(out, {dataset.jobs()[row.job].id, number(row.p), optional_number(row.p_prime),
                         optional_number(row.delta), number(row.coverage),
                         to_string(row.tier)});
  }
}

void write_crossval_tasks_csv(const fs::path& path, const Dataset& dataset,
                              const CrossvalReport& report) {
  auto out = open_output(path);
  csv::write_row(out, {"task_id", "p", "p_prime", "neighbors"});
  for (const CrossvalTask& row : report.tasks) {
    csv::write_row(out, {dataset.tasks()[row.task].id, number(row.p),
                         optional_number(row.p_prime), std::to_string(row.neighbors)});
  }
}

CrossvalDiffs read_crossval_diffs(const fs::path& jobs_csv, const fs::path& tasks_csv) {
  CrossvalDiffs diffs;
  std::vector<Issue> issues;
  auto collect = [&](const fs::path& path, const std::vector<std::string>& columns,
                     std::vector<double>& target, bool difference) {
    const csv::Table table = csv::read(path);
    const auto pos = locate_columns(table, columns);
    for (const csv::Row& row : table.rows) {
      if (row.fields.size() != table.header.size()) {
        issues.push_back({path.string(), row.line, "wrong field count"});
        continue;
      }
      const std::string& first = row.fields[pos[0]];
      if (difference) {
        const std::string& second = row.fields[pos[1]];
        if (second.empty()) continue;
        double p = 0.0;
        double q = 0.0;
        if (!csv::parse_number(first, p) || !csv::parse_number(second, q)) {
          issues.push_back({path.string(), row.line, "value is not a number"});
          continue;
        }
        target.push_back(p - q);
      } else {
        if (first.empty()) continue;
        double d = 0.0;
        if (!csv::parse_number(first, d)) {
          issues.push_back({path.string(), row.line, "delta is not a number"});
          continue;
        }
        target.push_back(d);
      }
    }
  };
  collect(jobs_csv, {"delta"}, diffs.job, false);
  collect(tasks_csv, {"p", "p_prime"}, diffs.task, true);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return diffs;
}

double polarization(const TaskProbabilities& probs) {
  std::size_t defined = 0;
  std::size_t extreme = 0;
  for (const auto& p : probs.prob) {
    if (!p) continue;
    ++defined;
    if (*p <= 0.05 || *p >= 0.95) ++extreme;
  }
  return defined ? static_cast<double>(extreme) / static_cast<double>(defined) : 0.0;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

class Pipeline {
 public:
  Pipeline(const RunConfig& config, std::ostream& log) : config_(config), log_(log) {}

  /// Runs `body` with error handling; returns the exit code.
  template <typename Body>
  int guarded(Body body) {
    try {
      config_.validate();
      body();
      return kExitOk;
    } catch (const ValidationError& e) {
      report("invalid input");
      for (const Issue& issue : e.issues()) log_ << "  " << issue.to_string() << '\n';
      return kExitValidation;
    } catch (const SolverError& e) {
      report(e.what());
      return kExitSolver;
    } catch (const IoError& e) {
      report(e.what());
      return kExitIo;
    } catch (const fs::filesystem_error& e) {
      report(e.what());
      return kExitIo;
    } catch (const std::invalid_argument& e) {
      report(e.what());
      return kExitValidation;
    } catch (const std::exception& e) {
      report(std::string("unexpected failure: ") + e.what());
      return kExitValidation;
    }
  }

  void load() {
    begin("load");
    dataset_ = load_dataset(config_.data);
    fs::create_directories(config_.out);
    job_pairs_ = derive_job_relatedness(dataset_).size();
    end();
  }

  void shares(bool force) {
    if (shares_) return;
    if (!force && config_.uniform_shares) force = true;
    if (!force && reusable("shares.csv")) {
      begin("shares");
      shares_ = read_shares_csv(*config_.reuse / "shares.csv", dataset_, config_.normalize_shares);
      stages_["shares"] = {{"reused", (*config_.reuse / "shares.csv").generic_string()}};
      end();
      return;
    }
    begin("shares");
    json summary;
    if (config_.uniform_shares) {
      shares_ = uniform_shares(dataset_);
      summary = {{"method", "uniform"}};
    } else {
      if (config_.dump_lp) {
        const ShareLp lp = build_share_lp(dataset_, config_.epsilon);
        auto out = open_output(config_.out / "lp1_shares.lp");
        lp::write_lp_text(lp.problem, out);
        record("lp1_shares.lp");
      }
      const ShareCoefficients c = solve_shares(dataset_, config_.epsilon);
      shares_ = compute_shares(c.tau, dataset_, config_.normalize_shares);
      write_coefficients_csv(config_.out / "coefficients.csv", dataset_, c);
      record("coefficients.csv");
      json unconstrained = json::array();
      for (std::size_t j = 0; j < c.unconstrained_by_relations.size(); ++j) {
        if (c.unconstrained_by_relations[j]) unconstrained.push_back(dataset_.jobs()[j].id);
      }
      const auto [lo, hi] = std::minmax_element(shares_->raw_job_sum.begin(),
                                                shares_->raw_job_sum.end());
      summary = {{"method", "lp"},
                 {"epsilon", c.epsilon},
                 {"objective", c.objective},
                 {"variables", c.variable_count},
                 {"constraints", c.constraint_count},
                 {"objective_variables", c.job_pairs.size() * kBuckets},
                 {"job_pairs", c.job_pairs.size()},
                 {"iterations", c.iterations},
                 {"mean_delta", c.mean_delta},
                 {"mean_coefficient", c.mean_coefficient},
                 {"raw_share_sum_min", lo == shares_->raw_job_sum.end() ? 0.0 : *lo},
                 {"raw_share_sum_max", hi == shares_->raw_job_sum.end() ? 0.0 : *hi},
                 {"jobs_without_relations", unconstrained}};
    }
    summary["normalized"] = config_.normalize_shares;
    write_shares_csv(config_.out / "shares.csv", dataset_, *shares_);
    record("shares.csv");
    write_json(config_.out / "shares_summary.json", summary);
    record("shares_summary.json");
    stages_["shares"] = summary;
    end();
  }

  void probs(bool force) {
    if (probs_) return;
    shares(false);
    if (!force && reusable("task_probs.csv")) {
      begin("probs");
      probs_ = read_task_probs_csv(*config_.reuse / "task_probs.csv", dataset_, config_.epsilon);
      stages_["probs"] = {{"reused", (*config_.reuse / "task_probs.csv").generic_string()}};
      end();
      return;
    }
    begin("probs");
    if (config_.dump_lp) {
      const ProbLp lp = build_prob_lp(dataset_, *shares_, config_.epsilon);
      auto out = open_output(config_.out / "lp2_probs.lp");
      lp::write_lp_text(lp.problem, out);
      record("lp2_probs.lp");
    }
    probs_ = solve_task_probs(dataset_, *shares_, config_.epsilon);
    write_task_probs_csv(config_.out / "task_probs.csv", dataset_, *shares_, *probs_);
    record("task_probs.csv");
    write_pair_diffs_csv(config_.out / "pair_diffs.csv", dataset_, *probs_);
    record("pair_diffs.csv");
    const PairDiffDistribution diffs =
        pair_diff_distribution(*probs_, dataset_.graph(), config_.bins);
    json summary = {{"epsilon", probs_->epsilon},
                    {"objective", probs_->objective},
                    {"variables", probs_->variable_count},
                    {"constraints", probs_->constraint_count},
                    {"objective_variables", probs_->pair_delta.size()},
                    {"iterations", probs_->iterations},
                    {"pairs", diffs.pair_count},
                    {"mean_pair_diff", diffs.mean},
                    {"unanchored_tasks", probs_->unanchored_count()},
                    {"polarization", polarization(*probs_)},
                    {"pair_diff_histogram", histogram_json(diffs.histogram)}};
    write_json(config_.out / "probs_summary.json", summary);
    record("probs_summary.json");
    summary.erase("pair_diff_histogram");
    stages_["probs"] = summary;
    end();
  }

  void crossval() {
    probs(false);
    begin("crossval");
    const CrossvalReport report = run_crossval(dataset_, *shares_, *probs_, config_.epsilon,
                                               config_.thresholds, config_.bins, config_.jobs);
    write_crossval_jobs_csv(config_.out / "crossval_jobs.csv", dataset_, report);
    record("crossval_jobs.csv");
    write_crossval_tasks_csv(config_.out / "crossval_tasks.csv", dataset_, report);
    record("crossval_tasks.csv");
    write_json(config_.out / "crossval_histograms.json",
               {{"task_diff", histogram_json(report.task_diff)},
                {"job_diff", histogram_json(report.job_diff)}});
    record("crossval_histograms.json");
    json unreconstructable = json::array();
    for (std::size_t j : report.unreconstructable) unreconstructable.push_back(dataset_.jobs()[j].id);
    json strong = json::array();
    for (const CrossvalJob& row : report.jobs) {
      if (row.tier == OutlierTier::kStrongOutlier) strong.push_back(dataset_.jobs()[row.job].id);
    }
    json summary = {{"solves", dataset_.jobs().size()},
                    {"threshold_strong", report.thresholds.strong},
                    {"threshold_review", report.thresholds.review},
                    {"mean_abs_delta", report.mean_abs_delta},
                    {"share_within_review", report.share_within_review},
                    {"consistent", report.consistent},
                    {"review", report.review},
                    {"strong_outliers", report.strong_outliers},
                    {"strong_outlier_jobs", strong},
                    {"unreconstructable", unreconstructable}};
    write_json(config_.out / "crossval_summary.json", summary);
    record("crossval_summary.json");
    stages_["crossval"] = summary;
    CrossvalDiffs diffs;
    for (const CrossvalTask& row : report.tasks) {
      if (row.p_prime) diffs.task.push_back(row.p - *row.p_prime);
    }
    for (const CrossvalJob& row : report.jobs) {
      if (row.delta) diffs.job.push_back(*row.delta);
    }
    crossval_diffs_ = std::move(diffs);
    end();
  }

  void analyze() {
    probs(false);
    if (!crossval_diffs_ && reusable("crossval_jobs.csv") && reusable("crossval_tasks.csv")) {
      crossval_diffs_ = read_crossval_diffs(*config_.reuse / "crossval_jobs.csv",
                                            *config_.reuse / "crossval_tasks.csv");
    }
    begin("analyze");
    json summary;
    summary["correlation_method"] = to_string(config_.correlation);
    json figures = json::array();

    const ScatterSeries share = share_vs_probability(dataset_, *shares_, *probs_, config_.correlation);
    {
      auto out = open_output(config_.out / "fig_share_vs_probability.csv");
      csv::write_row(out, {"task_id", "share", "probability"});
      for (std::size_t i = 0; i < share.size(); ++i) {
        csv::write_row(out, {share.ids[i], number(share.xs[i]), number(share.ys[i])});
      }
    }
    figures.push_back(record("fig_share_vs_probability.csv"));
    summary["share_vs_probability"] = {
        {"r", optional_json(share.r)}, {"points", share.size()}, {"skipped", share.skipped}};

    json attributes = json::object();
    for (const std::string& name : dataset_.attribute_names()) {
      const ScatterSeries series = attribute_vs_probability(dataset_, name, config_.correlation);
      const std::string file = "fig_attribute_" + sanitize(name) + ".csv";
      auto out = open_output(config_.out / file);
      csv::write_row(out, {"job_id", name, "automation_prob"});
      for (std::size_t i = 0; i < series.size(); ++i) {
        csv::write_row(out, {series.ids[i], number(series.xs[i]), number(series.ys[i])});
      }
      figures.push_back(record(file));
      attributes[name] = {{"r", optional_json(series.r)},
                          {"points", series.size()},
                          {"skipped", series.skipped},
                          {"figure", file}};
    }
    summary["attributes"] = attributes;

    std::vector<double> task_probs;
    for (const auto& p : probs_->prob) {
      if (p) task_probs.push_back(*p);
    }
    const Histogram prob_hist = make_histogram(task_probs, 0.0, 1.0, config_.bins);
    write_histogram_csv(config_.out / "fig_task_probability_hist.csv", prob_hist);
    figures.push_back(record("fig_task_probability_hist.csv"));
    summary["task_probability"] = {{"tasks", task_probs.size()},
                                   {"mean", prob_hist.mean},
                                   {"polarization", polarization(*probs_)}};

    const PairDiffDistribution pairs = pair_diff_distribution(*probs_, dataset_.graph(), config_.bins);
    write_histogram_csv(config_.out / "fig_pair_diff_hist.csv", pairs.histogram);
    figures.push_back(record("fig_pair_diff_hist.csv"));
    summary["pair_diff"] = {{"pairs", pairs.pair_count}, {"mean", pairs.mean}};

    if (crossval_diffs_) {
      const Histogram task_hist = make_histogram(crossval_diffs_->task, -1.0, 1.0, config_.bins);
      const Histogram job_hist = make_histogram(crossval_diffs_->job, -1.0, 1.0, config_.bins);
      write_histogram_csv(config_.out / "fig_crossval_task_diff_hist.csv", task_hist);
      figures.push_back(record("fig_crossval_task_diff_hist.csv"));
      write_histogram_csv(config_.out / "fig_crossval_job_diff_hist.csv", job_hist);
      figures.push_back(record("fig_crossval_job_diff_hist.csv"));
      summary["crossval"] = {{"tasks", task_hist.total},
                             {"task_mean_abs_diff", task_hist.mean_abs},
                             {"jobs", job_hist.total},
                             {"job_mean_abs_diff", job_hist.mean_abs}};
    } else {
      summary["crossval"] = nullptr;
    }
    summary["figures"] = figures;
    write_json(config_.out / "analysis_summary.json", summary);
    record("analysis_summary.json");
    stages_["analyze"] = {{"figures", figures.size()}};
    end();
  }

  void manifest() {
    json config = {{"data", config_.data.generic_string()},
                   {"epsilon", config_.epsilon},
                   {"normalize_shares", config_.normalize_shares},
                   {"uniform_shares", config_.uniform_shares},
                   {"outlier_strong", config_.thresholds.strong},
                   {"outlier_review", config_.thresholds.review},
                   {"bins", config_.bins},
                   {"seed", config_.seed},
                   {"correlation", to_string(config_.correlation)},
                   {"dump_lp", config_.dump_lp}};
    if (config_.reuse) config["reuse"] = config_.reuse->generic_string();
    json doc = {
        {"tool", "taskprob"},
        {"format_version", 1},
        {"config", config},
        {"solver",
         {{"pivot_rule", lp::kPivotRule},
          {"feasibility_tolerance", lp::kFeasibilityTol},
          {"optimality_tolerance", lp::kOptimalityTol}}},
        {"dataset",
         {{"jobs", dataset_.jobs().size()},
          {"tasks", dataset_.tasks().size()},
          {"related_pairs", dataset_.graph().edges().size()},
          {"related_jobs", job_pairs_}}},
        {"stages", stages_},
    };
    std::vector<std::string> outputs(outputs_.begin(), outputs_.end());
    outputs.push_back("manifest.json");
    std::sort(outputs.begin(), outputs.end());
    doc["outputs"] = outputs;
    if (config_.timings) doc["wall_clock_seconds"] = timings_;
    write_json(config_.out / "manifest.json", doc);
  }

  const Dataset& dataset() const { return dataset_; }

 private:
  bool reusable(const std::string& file) const {
    return config_.reuse && fs::exists(*config_.reuse / file);
  }

  std::string record(const std::string& file) {
    outputs_.insert(file);
    return file;
  }

  void begin(const std::string& stage) {
    stage_ = stage;
    started_ = std::chrono::steady_clock::now();
  }

  void end() {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    timings_[stage_] = seconds;
    log_ << "stage " << stage_ << ": done (" << seconds << " s)\n";
    stage_.clear();
  }

  void report(const std::string& message) {
    log_ << "error";
    if (!stage_.empty()) log_ << " in stage " << stage_;
    log_ << ": " << message << '\n';
  }

  const RunConfig& config_;
  std::ostream& log_;
  Dataset dataset_;
  std::size_t job_pairs_ = 0;
  std::optional<TaskShareTable> shares_;
  std::optional<TaskProbabilities> probs_;
  std::optional<CrossvalDiffs> crossval_diffs_;
  json stages_ = json::object();
  json timings_ = json::object();
  std::set<std::string> outputs_;
  std::string stage_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& log) {
  json report = {{"valid", false}, {"issues", json::array()}};
  int code = kExitOk;
  auto add = [&](const Issue& issue) {
    report["issues"].push_back(
        {{"file", issue.file}, {"line", issue.line}, {"message", issue.message}});
    log << issue.to_string() << '\n';
  };
  try {
    const Dataset dataset = load_dataset(config.data);
    report["valid"] = true;
    report["jobs"] = dataset.jobs().size();
    report["tasks"] = dataset.tasks().size();
    report["related_pairs"] = dataset.graph().edges().size();
    report["related_jobs"] = derive_job_relatedness(dataset).size();
  } catch (const ValidationError& e) {
    for (const Issue& issue : e.issues()) add(issue);
    code = kExitValidation;
  } catch (const IoError& e) {
    add({config.data.string(), 0, e.what()});
    code = kExitIo;
  } catch (const fs::filesystem_error& e) {
    add({config.data.string(), 0, e.what()});
    code = kExitIo;
  }
  out << report.dump(2) << '\n';
  return code;
}

int cmd_shares(const RunConfig& config, std::ostream& log) {
  Pipeline p(config, log);
  return p.guarded([&] {
    p.load();
    p.shares(true);
  });
}

int cmd_probs(const RunConfig& config, std::ostream& log) {
  Pipeline p(config, log);
  return p.guarded([&] {
    p.load();
    p.probs(true);
  });
}

int cmd_crossval(const RunConfig& config, std::ostream& log) {
  Pipeline p(config, log);
  return p.guarded([&] {
    p.load();
    p.crossval();
  });
}

int cmd_analyze(const RunConfig& config, std::ostream& log) {
  Pipeline p(config, log);
  return p.guarded([&] {
    p.load();
    p.analyze();
  });
}

int cmd_run(const RunConfig& config, std::ostream& log) {
  Pipeline p(config, log);
  return p.guarded([&] {
    p.load();
    p.shares(true);
    p.probs(true);
    p.crossval();
    p.analyze();
    p.manifest();
  });
}

int cmd_synth(const SynthOptions& options, std::ostream& log) {
  try {
    const SyntheticDataset synthetic = generate_synthetic(options.generator, options.seed);
    write_dataset_csv(synthetic.dataset, options.out);
    write_truth_json(synthetic, options.out / "truth.json");
    if (options.json) write_dataset_json(synthetic.dataset, options.out / "dataset.json");
    log << "synth: " << synthetic.dataset.jobs().size() << " jobs, "
        << synthetic.dataset.tasks().size() << " tasks, "
        << synthetic.dataset.graph().edges().size() << " related pairs -> "
        << options.out.string() << '\n';
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    log << "error: generated data failed validation\n";
    for (const Issue& issue : e.issues()) log << "  " << issue.to_string() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace taskprob
