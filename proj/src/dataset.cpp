#include "taskprob/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "taskprob/csv.hpp"

namespace taskprob {

std::string Issue::to_string() const {
  std::ostringstream out;
  if (!file.empty()) {
    out << file;
    if (line) out << ':' << line;
    out << ": ";
  }
  out << message;
  return out.str();
}

namespace {

std::string summarize(const std::vector<Issue>& issues) {
  if (issues.empty()) return "invalid dataset";
  std::string text = issues.front().to_string();
  if (issues.size() > 1) {
    text += " (and " + std::to_string(issues.size() - 1) + " more)";
  }
  return text;
}

}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : std::runtime_error(summarize(issues)), issues_(std::move(issues)) {}

// ---------------------------------------------------------------------------
// RelatednessGraph

RelatednessGraph::RelatednessGraph(std::size_t task_count)
    : adjacency_(task_count) {}

bool RelatednessGraph::add_edge(std::size_t a, std::size_t b) {
  if (a >= adjacency_.size() || b >= adjacency_.size()) {
    throw std::invalid_argument("edge endpoint out of range");
  }
  if (a == b) {
    throw std::invalid_argument("self-loop on task " + std::to_string(a));
  }
  if (related(a, b)) return false;
  auto insert_sorted = [](std::vector<std::size_t>& v, std::size_t x) {
    v.insert(std::lower_bound(v.begin(), v.end(), x), x);
  };
  insert_sorted(adjacency_[a], b);
  insert_sorted(adjacency_[b], a);
  edges_.push_back({std::min(a, b), std::max(a, b)});
  return true;
}

bool RelatednessGraph::related(std::size_t a, std::size_t b) const {
  const auto& n = adjacency_.at(a);
  return std::binary_search(n.begin(), n.end(), b);
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<Job> jobs, std::vector<Task> tasks,
                 RelatednessGraph graph)
    : jobs_(std::move(jobs)), tasks_(std::move(tasks)), graph_(std::move(graph)) {
  std::vector<Issue> issues;
  auto fail = [&](std::string message) {
    issues.push_back(Issue{"", 0, std::move(message)});
  };

  for (std::size_t i = 0; i < jobs_.size(); ++i) {
    Job& job = jobs_[i];
    job.tasks.clear();
    if (!job_index_.emplace(job.id, i).second) {
      fail("duplicate job id '" + job.id + "'");
    }
    if (!(job.automation_prob >= 0.0 && job.automation_prob <= 1.0)) {
      fail("job '" + job.id + "' automation probability outside [0,1]");
    }
    for (const auto& [name, value] : job.attributes) {
      if (!std::isfinite(value)) {
        fail("job '" + job.id + "' attribute '" + name + "' is not finite");
      }
    }
  }
  for (std::size_t t = 0; t < tasks_.size(); ++t) {
    const Task& task = tasks_[t];
    if (!task_index_.emplace(task.id, t).second) {
      fail("duplicate task id '" + task.id + "'");
    }
    if (task.job >= jobs_.size()) {
      fail("task '" + task.id + "' references a missing job");
      continue;
    }
    jobs_[task.job].tasks.push_back(t);
    double sum = 0.0;
    for (double f : task.freq) {
      if (!(f >= 0.0 && f <= 1.0)) {
        fail("task '" + task.id + "' frequency outside [0,1]");
      }
      sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      fail("task '" + task.id + "' frequencies do not sum to 1");
    }
  }
  for (const Job& job : jobs_) {
    if (job.tasks.empty()) fail("job without tasks: '" + job.id + "'");
  }
  if (graph_.task_count() != tasks_.size()) {
    if (graph_.task_count() == 0 && graph_.edges().empty()) {
      graph_ = RelatednessGraph(tasks_.size());
    } else {
      fail("relatedness graph does not match the task count");
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::optional<std::size_t> Dataset::find_job(const std::string& id) const {
  auto it = job_index_.find(id);
  if (it == job_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Dataset::find_task(const std::string& id) const {
  auto it = task_index_.find(id);
  if (it == task_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Dataset::attribute_names() const {
  std::set<std::string> names;
  for (const Job& job : jobs_) {
    for (const auto& entry : job.attributes) names.insert(entry.first);
  }
  return {names.begin(), names.end()};
}

// ---------------------------------------------------------------------------
// Loading

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir) {
  DatasetPaths paths{dir / "jobs.csv", dir / "tasks.csv", dir / "related.csv",
                     std::nullopt};
  if (std::filesystem::exists(dir / "attributes.csv")) {
    paths.attributes = dir / "attributes.csv";
  }
  return paths;
}

namespace {

class IssueLog {
 public:
  void add(const std::filesystem::path& file, std::size_t line,
           std::string message) {
    issues_.push_back(Issue{file.string(), line, std::move(message)});
  }
  bool empty() const { return issues_.empty(); }
  std::vector<Issue> take() { return std::move(issues_); }

 private:
  std::vector<Issue> issues_;
};

/// Maps required column names to positions; records an issue per missing one.
std::optional<std::vector<std::size_t>> locate_columns(
    const csv::Table& table, const std::vector<std::string>& required,
    IssueLog& log) {
  std::vector<std::size_t> cols;
  bool ok = true;
  for (const auto& name : required) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      log.add(table.path, 1, "missing column '" + name + "'");
      ok = false;
    } else {
      cols.push_back(static_cast<std::size_t>(it - table.header.begin()));
    }
  }
  if (!ok) return std::nullopt;
  return cols;
}

/// Validates a raw frequency row and rescales it when the sum is within the
/// tolerated band. Returns an error message or an empty string.
std::string normalize_frequencies(FrequencyDistribution& freq) {
  double sum = 0.0;
  for (std::size_t l = 0; l < kBuckets; ++l) {
    if (!(freq[l] >= 0.0 && freq[l] <= 1.0)) {
      return "frequency f" + std::to_string(l + 1) + " outside [0,1]";
    }
    sum += freq[l];
  }
  const double deviation = std::abs(sum - 1.0);
  if (deviation > kFrequencyRenormalizeBand) {
    return "frequency sum " + csv::format_number(sum) +
           " deviates from 1 by more than " +
           csv::format_number(kFrequencyRenormalizeBand);
  }
  if (deviation > kFrequencyExactBand) {
    for (double& f : freq) f /= sum;
  }
  return {};
}

struct RawEdge {
  std::string a;
  std::string b;
  std::string file;
  std::size_t line = 0;
};

struct RawAttribute {
  std::string job;
  std::string name;
  double value = 0.0;
  std::string file;
  std::size_t line = 0;
};

struct RawJob {
  Job job;
  std::string file;
  std::size_t line = 0;
};

struct RawTask {
  Task task;
  std::string job_id;
  std::string file;
  std::size_t line = 0;
};

/// Resolves string references, checks integrity and builds the Dataset.
Dataset assemble(std::vector<RawJob> raw_jobs, std::vector<RawTask> raw_tasks,
                 const std::vector<RawEdge>& raw_edges,
                 const std::vector<RawAttribute>& raw_attrs, IssueLog& log) {
  std::unordered_map<std::string, std::size_t> job_index;
  std::vector<Job> jobs;
  std::vector<std::pair<std::string, std::size_t>> job_origin;
  for (auto& raw : raw_jobs) {
    if (!job_index.emplace(raw.job.id, jobs.size()).second) {
      log.add(raw.file, raw.line, "duplicate job id '" + raw.job.id + "'");
      continue;
    }
    jobs.push_back(std::move(raw.job));
    job_origin.emplace_back(raw.file, raw.line);
  }

  std::unordered_map<std::string, std::size_t> task_index;
  std::vector<Task> tasks;
  std::vector<std::size_t> task_count(jobs.size(), 0);
  for (auto& raw : raw_tasks) {
    auto job = job_index.find(raw.job_id);
    if (job == job_index.end()) {
      log.add(raw.file, raw.line,
              "task '" + raw.task.id + "' references unknown job '" +
                  raw.job_id + "'");
      continue;
    }
    if (!task_index.emplace(raw.task.id, tasks.size()).second) {
      log.add(raw.file, raw.line, "duplicate task id '" + raw.task.id + "'");
      continue;
    }
    raw.task.job = job->second;
    ++task_count[job->second];
    tasks.push_back(std::move(raw.task));
  }
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (task_count[j] == 0) {
      log.add(job_origin[j].first, job_origin[j].second,
              "job without tasks: '" + jobs[j].id + "'");
    }
  }

  RelatednessGraph graph(tasks.size());
  for (const auto& edge : raw_edges) {
    auto a = task_index.find(edge.a);
    auto b = task_index.find(edge.b);
    if (a == task_index.end() || b == task_index.end()) {
      const std::string& missing = a == task_index.end() ? edge.a : edge.b;
      log.add(edge.file, edge.line,
              "edge (" + edge.a + "," + edge.b + ") references unknown task '" +
                  missing + "'");
      continue;
    }
    if (a->second == b->second) {
      log.add(edge.file, edge.line, "self-loop on task '" + edge.a + "'");
      continue;
    }
    graph.add_edge(a->second, b->second);
  }

  for (const auto& attr : raw_attrs) {
    auto job = job_index.find(attr.job);
    if (job == job_index.end()) {
      log.add(attr.file, attr.line,
              "attribute references unknown job '" + attr.job + "'");
      continue;
    }
    if (!jobs[job->second].attributes.emplace(attr.name, attr.value).second) {
      log.add(attr.file, attr.line,
              "duplicate attribute '" + attr.name + "' for job '" + attr.job +
                  "'");
    }
  }

  if (!log.empty()) throw ValidationError(log.take());
  return Dataset(std::move(jobs), std::move(tasks), std::move(graph));
}

bool check_width(const csv::Table& table, const csv::Row& row, IssueLog& log) {
  if (row.fields.size() != table.header.size()) {
    log.add(table.path, row.line,
            "expected " + std::to_string(table.header.size()) +
                " fields, found " + std::to_string(row.fields.size()));
    return false;
  }
  return true;
}

/// Reads a table, turning an open failure into a logged issue.
std::optional<csv::Table> read_table(const std::filesystem::path& path,
                                     IssueLog& log) {
  try {
    return csv::read(path);
  } catch (const IoError& e) {
    log.add(path, 0, e.what());
  } catch (const ValidationError& e) {
    for (const auto& issue : e.issues()) log.add(issue.file, issue.line, issue.message);
  }
  return std::nullopt;
}

}  // namespace

Dataset load_dataset(const DatasetPaths& paths) {
  IssueLog log;
  std::vector<RawJob> jobs;
  std::vector<RawTask> tasks;
  std::vector<RawEdge> edges;
  std::vector<RawAttribute> attrs;

  if (auto table = read_table(paths.jobs, log)) {
    if (auto cols = locate_columns(*table, {"job_id", "title", "automation_prob"}, log)) {
      for (const auto& row : table->rows) {
        if (!check_width(*table, row, log)) continue;
        RawJob raw{Job{}, table->path.string(), row.line};
        raw.job.id = row.fields[(*cols)[0]];
        raw.job.title = row.fields[(*cols)[1]];
        if (raw.job.id.empty()) {
          log.add(table->path, row.line, "empty job_id");
          continue;
        }
        double p = 0.0;
        if (!csv::parse_number(row.fields[(*cols)[2]], p)) {
          log.add(table->path, row.line,
                  "automation_prob '" + row.fields[(*cols)[2]] + "' is not a number");
          continue;
        }
        if (p < 0.0 || p > 1.0) {
          log.add(table->path, row.line, "automation_prob outside [0,1]");
          continue;
        }
        raw.job.automation_prob = p;
        jobs.push_back(std::move(raw));
      }
    }
  }

  if (auto table = read_table(paths.tasks, log)) {
    std::vector<std::string> required = {"task_id", "job_id", "description"};
    for (std::size_t l = 1; l <= kBuckets; ++l) required.push_back("f" + std::to_string(l));
    if (auto cols = locate_columns(*table, required, log)) {
      for (const auto& row : table->rows) {
        if (!check_width(*table, row, log)) continue;
        RawTask raw{Task{}, row.fields[(*cols)[1]], table->path.string(), row.line};
        raw.task.id = row.fields[(*cols)[0]];
        raw.task.description = row.fields[(*cols)[2]];
        if (raw.task.id.empty()) {
          log.add(table->path, row.line, "empty task_id");
          continue;
        }
        bool ok = true;
        for (std::size_t l = 0; l < kBuckets; ++l) {
          const std::string& text = row.fields[(*cols)[3 + l]];
          if (!csv::parse_number(text, raw.task.freq[l])) {
            log.add(table->path, row.line,
                    "f" + std::to_string(l + 1) + " '" + text + "' is not a number");
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        if (auto problem = normalize_frequencies(raw.task.freq); !problem.empty()) {
          log.add(table->path, row.line, problem);
          continue;
        }
        tasks.push_back(std::move(raw));
      }
    }
  }

  if (auto table = read_table(paths.related, log)) {
    if (auto cols = locate_columns(*table, {"task_id_a", "task_id_b"}, log)) {
      for (const auto& row : table->rows) {
        if (!check_width(*table, row, log)) continue;
        edges.push_back(RawEdge{row.fields[(*cols)[0]], row.fields[(*cols)[1]],
                                table->path.string(), row.line});
      }
    }
  }

  if (paths.attributes) {
    if (auto table = read_table(*paths.attributes, log)) {
      if (auto cols = locate_columns(*table, {"job_id", "attribute", "value"}, log)) {
        for (const auto& row : table->rows) {
          if (!check_width(*table, row, log)) continue;
          RawAttribute raw{row.fields[(*cols)[0]], row.fields[(*cols)[1]], 0.0,
                           table->path.string(), row.line};
          if (!csv::parse_number(row.fields[(*cols)[2]], raw.value)) {
            log.add(table->path, row.line,
                    "attribute value '" + row.fields[(*cols)[2]] + "' is not a finite number");
            continue;
          }
          attrs.push_back(std::move(raw));
        }
      }
    }
  }

  return assemble(std::move(jobs), std::move(tasks), edges, attrs, log);
}

Dataset load_dataset(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) {
    return load_dataset(DatasetPaths::in_directory(path));
  }
  if (!std::filesystem::exists(path)) {
    throw IoError("dataset path does not exist: " + path.string());
  }
  return load_dataset_json(path);
}

Dataset load_dataset_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError({Issue{path.string(), 0, e.what()}});
  }

  IssueLog log;
  std::vector<RawJob> jobs;
  std::vector<RawTask> tasks;
  std::vector<RawEdge> edges;
  std::vector<RawAttribute> attrs;
  const std::string file = path.string();

  try {
    std::size_t index = 0;
    for (const auto& item : doc.at("jobs")) {
      ++index;
      RawJob raw{Job{}, file, index};
      raw.job.id = item.at("job_id").get<std::string>();
      raw.job.title = item.value("title", std::string{});
      raw.job.automation_prob = item.at("automation_prob").get<double>();
      if (!(raw.job.automation_prob >= 0.0 && raw.job.automation_prob <= 1.0)) {
        log.add(file, 0, "job '" + raw.job.id + "' automation_prob outside [0,1]");
        continue;
      }
      if (item.contains("attributes")) {
        for (const auto& [name, value] : item.at("attributes").items()) {
          attrs.push_back(RawAttribute{raw.job.id, name, value.get<double>(), file, 0});
        }
      }
      jobs.push_back(std::move(raw));
    }
    for (const auto& item : doc.at("tasks")) {
      RawTask raw{Task{}, item.at("job_id").get<std::string>(), file, 0};
      raw.task.id = item.at("task_id").get<std::string>();
      raw.task.description = item.value("description", std::string{});
      for (std::size_t l = 0; l < kBuckets; ++l) {
        raw.task.freq[l] = item.at("f" + std::to_string(l + 1)).get<double>();
      }
      if (auto problem = normalize_frequencies(raw.task.freq); !problem.empty()) {
        log.add(file, 0, "task '" + raw.task.id + "': " + problem);
        continue;
      }
      tasks.push_back(std::move(raw));
    }
    if (doc.contains("related")) {
      for (const auto& item : doc.at("related")) {
        edges.push_back(RawEdge{item.at("task_id_a").get<std::string>(),
                                item.at("task_id_b").get<std::string>(), file, 0});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    log.add(file, 0, std::string("schema violation: ") + e.what());
    throw ValidationError(log.take());
  }
  return assemble(std::move(jobs), std::move(tasks), edges, attrs, log);
}

// ---------------------------------------------------------------------------
// Writing

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& jobs = dataset.jobs();
  const auto& tasks = dataset.tasks();
  {
    auto out = open_output(dir / "jobs.csv");
    csv::write_row(out, {"job_id", "title", "automation_prob"});
    for (const Job& job : jobs) {
      csv::write_row(out, {job.id, job.title, csv::format_number(job.automation_prob)});
    }
  }
  {
    auto out = open_output(dir / "tasks.csv");
    csv::write_row(out, {"task_id", "job_id", "description", "f1", "f2", "f3",
                         "f4", "f5", "f6", "f7"});
    for (const Task& task : tasks) {
      std::vector<std::string> row = {task.id, jobs[task.job].id, task.description};
      for (double f : task.freq) row.push_back(csv::format_number(f));
      csv::write_row(out, row);
    }
  }
  {
    auto out = open_output(dir / "related.csv");
    csv::write_row(out, {"task_id_a", "task_id_b"});
    for (const auto& edge : dataset.graph().edges()) {
      csv::write_row(out, {tasks[edge.first].id, tasks[edge.second].id});
    }
  }
  {
    auto out = open_output(dir / "attributes.csv");
    csv::write_row(out, {"job_id", "attribute", "value"});
    for (const Job& job : jobs) {
      for (const auto& [name, value] : job.attributes) {
        csv::write_row(out, {job.id, name, csv::format_number(value)});
      }
    }
  }
}

void write_dataset_json(const Dataset& dataset, const std::filesystem::path& path) {
  using nlohmann::json;
  json doc;
  doc["jobs"] = json::array();
  for (const Job& job : dataset.jobs()) {
    json item = {{"job_id", job.id},
                 {"title", job.title},
                 {"automation_prob", job.automation_prob}};
    json attrs = json::object();
    for (const auto& [name, value] : job.attributes) attrs[name] = value;
    item["attributes"] = attrs;
    doc["jobs"].push_back(std::move(item));
  }
  doc["tasks"] = json::array();
  for (const Task& task : dataset.tasks()) {
    json item = {{"task_id", task.id},
                 {"job_id", dataset.jobs()[task.job].id},
                 {"description", task.description}};
    for (std::size_t l = 0; l < kBuckets; ++l) {
      item["f" + std::to_string(l + 1)] = task.freq[l];
    }
    doc["tasks"].push_back(std::move(item));
  }
  doc["related"] = json::array();
  for (const auto& edge : dataset.graph().edges()) {
    doc["related"].push_back({{"task_id_a", dataset.tasks()[edge.first].id},
                              {"task_id_b", dataset.tasks()[edge.second].id}});
  }
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

std::vector<IndexPair> derive_job_relatedness(const Dataset& dataset) {
  std::set<IndexPair> pairs;
  const auto& tasks = dataset.tasks();
  for (const auto& edge : dataset.graph().edges()) {
    const std::size_t a = tasks[edge.first].job;
    const std::size_t b = tasks[edge.second].job;
    if (a == b) continue;
    pairs.insert({std::min(a, b), std::max(a, b)});
  }
  return {pairs.begin(), pairs.end()};
}

}  // namespace taskprob
