#include "taskprob/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace taskprob {

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid generator config: " + what);
  };
  if (jobs == 0) fail("jobs must be at least 1");
  if (tasks_min == 0) fail("tasks_min must be at least 1");
  if (tasks_max < tasks_min) fail("tasks_max below tasks_min");
  if (!(density >= 0.0 && density <= 1.0)) fail("density outside [0,1]");
  if (!(cross_density >= 0.0 && cross_density <= 1.0)) fail("cross_density outside [0,1]");
  if (edges_max < edges_min) fail("edges_max below edges_min");
  if (!(edge_noise >= 0.0 && edge_noise <= 1.0)) fail("edge_noise outside [0,1]");
  if (cluster_rates.empty()) fail("at least one cluster rate is required");
  for (double r : cluster_rates) {
    if (!(r >= 0.0 && r <= 1.0)) fail("cluster rate outside [0,1]");
  }
  for (std::size_t j : flipped_jobs) {
    if (j >= jobs) fail("flipped job index out of range");
  }
}

SynthConfig SynthConfig::two_clusters() {
  SynthConfig config;
  config.cluster_rates = {0.1, 0.9};
  config.density = 0.16;
  config.edges_min = 1;
  config.edges_max = 2;
  config.min_neighbor_jobs = 3;
  return config;
}

namespace {

/// Distribution helpers over the raw engine output so that results do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::size_t index(std::size_t count) {
    return static_cast<std::size_t>(engine_() % count);
  }

  std::size_t between(std::size_t lo, std::size_t hi) {
    return lo + index(hi - lo + 1);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

std::string padded(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

FrequencyDistribution draw_frequencies(Rng& rng) {
  const std::size_t mode = rng.index(kBuckets);
  FrequencyDistribution f{};
  double sum = 0.0;
  for (std::size_t l = 0; l < kBuckets; ++l) {
    const double distance = std::abs(static_cast<double>(l) - static_cast<double>(mode));
    f[l] = std::exp(-distance) * -std::log(1.0 - rng.uniform());
    sum += f[l];
  }
  for (double& x : f) x /= sum;
  return f;
}

std::array<double, kBuckets> draw_coefficients(Rng& rng) {
  std::array<double, kBuckets> tau{};
  double level = 0.0;
  for (std::size_t l = 0; l < kBuckets; ++l) {
    level += l == 0 ? 0.1 * rng.uniform() : rng.uniform();
    tau[l] = level;
  }
  return tau;
}

double dot(const std::array<double, kBuckets>& a, const FrequencyDistribution& b) {
  double s = 0.0;
  for (std::size_t l = 0; l < kBuckets; ++l) s += a[l] * b[l];
  return s;
}

/// Mixes every task of the job starting at `first` with a point mass on the
/// last bucket (sum too small) or the first bucket (sum too large) so that
/// the shares under `tau` add up to one.
void tilt_frequencies(std::vector<Task>& tasks, std::size_t first,
                      const std::array<double, kBuckets>& tau, double raw_total) {
  const auto n = static_cast<double>(tasks.size() - first);
  const std::size_t target = raw_total < 1.0 ? kBuckets - 1 : 0;
  const double extreme = n * tau[target];
  if (raw_total == 1.0 || extreme == raw_total) return;
  const double lambda = std::clamp((1.0 - raw_total) / (extreme - raw_total), 0.0, 1.0);
  for (std::size_t t = first; t < tasks.size(); ++t) {
    auto& f = tasks[t].freq;
    for (double& x : f) x *= 1.0 - lambda;
    f[target] += lambda;
  }
}

/// Picks a task of `job`, preferring one whose planted probability equals
/// `level`.
std::size_t pick_matching(Rng& rng, const std::vector<std::size_t>& job_tasks,
                          const std::vector<double>& planted, double level) {
  std::vector<std::size_t> matching;
  for (std::size_t t : job_tasks) {
    if (planted[t] == level) matching.push_back(t);
  }
  if (matching.empty()) return job_tasks[rng.index(job_tasks.size())];
  return matching[rng.index(matching.size())];
}

}  // namespace

SyntheticDataset generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);

  const std::size_t n_jobs = config.jobs;
  const std::size_t clusters = config.cluster_rates.size();
  const std::size_t job_width = std::to_string(n_jobs).size();

  PlantedTruth truth;
  truth.seed = seed;
  truth.config = config;

  std::vector<Job> jobs(n_jobs);
  std::vector<Task> tasks;
  std::vector<std::vector<std::size_t>> job_tasks(n_jobs);

  // The shared vector keeps tau_7 * tasks_min >= 2 and tau_1 small, so every
  // job can be tilted to an exact share sum of one.
  std::array<double, kBuckets> shared_tau{};
  if (config.shared_coefficients) {
    shared_tau = draw_coefficients(rng);
    const double top = shared_tau[kBuckets - 1];
    for (double& x : shared_tau) x *= 2.0 / (top * static_cast<double>(config.tasks_min));
  }

  for (std::size_t j = 0; j < n_jobs; ++j) {
    const std::size_t cluster = j % clusters;
    Job& job = jobs[j];
    job.id = "J" + padded(j + 1, job_width);
    job.title = "Synthetic job " + std::to_string(j + 1) + " (cluster " +
                std::to_string(cluster) + ")";
    truth.job_cluster.push_back(cluster);

    if (config.identical_jobs && j > 0) {
      truth.coefficients.push_back(truth.coefficients.front());
      for (std::size_t k = 0; k < job_tasks[0].size(); ++k) {
        const Task& source = tasks[job_tasks[0][k]];
        Task task = source;
        task.job = j;
        task.id = job.id + "-T" + padded(k + 1, 2);
        task.description = "Task " + std::to_string(k + 1) + " of " + job.id;
        truth.shares.push_back(truth.shares[job_tasks[0][k]]);
        truth.task_probs.push_back(truth.task_probs[job_tasks[0][k]]);
        job_tasks[j].push_back(tasks.size());
        tasks.push_back(std::move(task));
      }
      continue;
    }

    const std::size_t count = rng.between(config.tasks_min, config.tasks_max);
    auto tau = config.shared_coefficients ? shared_tau : draw_coefficients(rng);
    const std::size_t first = tasks.size();
    for (std::size_t k = 0; k < count; ++k) {
      Task task;
      task.id = job.id + "-T" + padded(k + 1, 2);
      task.job = j;
      task.description = "Task " + std::to_string(k + 1) + " of " + job.id;
      task.freq = draw_frequencies(rng);
      truth.task_probs.push_back(
          rng.bernoulli(config.cluster_rates[cluster]) ? 1.0 : 0.0);
      job_tasks[j].push_back(tasks.size());
      tasks.push_back(std::move(task));
    }
    double raw_total = 0.0;
    for (std::size_t t = first; t < tasks.size(); ++t) raw_total += dot(tau, tasks[t].freq);
    if (config.shared_coefficients) {
      tilt_frequencies(tasks, first, tau, raw_total);
    } else {
      for (double& x : tau) x /= raw_total;
    }
    double share_total = 0.0;
    for (std::size_t t = first; t < tasks.size(); ++t) {
      truth.shares.push_back(dot(tau, tasks[t].freq));
      share_total += truth.shares.back();
    }
    for (std::size_t t = first; t < tasks.size(); ++t) truth.shares[t] /= share_total;
    truth.coefficients.push_back(tau);
  }

  for (std::size_t j = 0; j < n_jobs; ++j) {
    double p = 0.0;
    for (std::size_t t : job_tasks[j]) p += truth.shares[t] * truth.task_probs[t];
    p = std::clamp(p, 0.0, 1.0);
    if (std::abs(p - std::round(p)) < 1e-12) p = std::round(p);  // exact 0 / 1
    truth.unflipped_job_probs.push_back(p);
    jobs[j].automation_prob = p;
  }
  for (std::size_t j : config.flipped_jobs) {
    jobs[j].automation_prob = 1.0 - truth.unflipped_job_probs[j];
  }

  // Attributes: two ordinal scales falling with the published probability,
  // one weakly rising.
  for (std::size_t j = 0; j < n_jobs; ++j) {
    const double p = jobs[j].automation_prob;
    const double noise_a = rng.uniform() - 0.5;
    const double noise_b = rng.uniform() - 0.5;
    const double noise_c = rng.uniform();
    jobs[j].attributes["education"] =
        std::clamp(std::round(12.0 - 11.0 * p + 1.5 * noise_a), 1.0, 12.0);
    jobs[j].attributes["deductive_reasoning"] =
        std::clamp(std::round(7.0 - 6.0 * p + noise_b), 1.0, 7.0);
    jobs[j].attributes["degree_of_automation"] =
        std::clamp(std::round(1.0 + 4.0 * (0.3 * p + 0.7 * noise_c)), 1.0, 5.0);
  }

  RelatednessGraph graph(tasks.size());
  if (config.identical_jobs) {
    for (std::size_t j = 1; j < n_jobs; ++j) {
      for (std::size_t k = 0; k < job_tasks[j].size(); ++k) {
        graph.add_edge(job_tasks[j - 1][k], job_tasks[j][k]);
      }
    }
  } else {
    for (std::size_t a = 0; a < n_jobs; ++a) {
      for (std::size_t b = a + 1; b < n_jobs; ++b) {
        const bool same = truth.job_cluster[a] == truth.job_cluster[b];
        const double chance = same ? config.density : config.cross_density;
        if (!rng.bernoulli(chance)) continue;
        const std::size_t count = rng.between(config.edges_min, config.edges_max);
        for (std::size_t e = 0; e < count; ++e) {
          const std::size_t ta = job_tasks[a][rng.index(job_tasks[a].size())];
          std::size_t tb;
          if (rng.bernoulli(config.edge_noise)) {
            tb = job_tasks[b][rng.index(job_tasks[b].size())];
          } else {
            tb = pick_matching(rng, job_tasks[b], truth.task_probs, truth.task_probs[ta]);
          }
          graph.add_edge(ta, tb);
        }
      }
    }

    const bool any_relatedness = config.density > 0.0 || config.cross_density > 0.0;
    if (config.min_neighbor_jobs > 0 && any_relatedness && n_jobs > 1) {
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        const std::size_t job = tasks[t].job;
        const double level = truth.task_probs[t];
        auto neighbor_jobs = [&] {
          std::vector<std::size_t> out;
          for (std::size_t n : graph.neighbors(t)) {
            if (tasks[n].job != job) out.push_back(tasks[n].job);
          }
          std::sort(out.begin(), out.end());
          out.erase(std::unique(out.begin(), out.end()), out.end());
          return out;
        };
        auto has_level = [&](std::size_t other) {
          return std::any_of(job_tasks[other].begin(), job_tasks[other].end(),
                             [&](std::size_t u) { return truth.task_probs[u] == level; });
        };
        std::vector<std::size_t> present = neighbor_jobs();
        while (present.size() < config.min_neighbor_jobs) {
          // Prefer jobs this job is already related to, then its own cluster,
          // then any job; always one that has a task at the same level.
          auto usable = [&](std::size_t other) {
            return other != job && has_level(other) &&
                   !std::binary_search(present.begin(), present.end(), other);
          };
          std::vector<std::size_t> candidates;
          for (std::size_t other : job_tasks[job]) {
            for (std::size_t n : graph.neighbors(other)) {
              if (usable(tasks[n].job)) candidates.push_back(tasks[n].job);
            }
          }
          std::sort(candidates.begin(), candidates.end());
          candidates.erase(std::unique(candidates.begin(), candidates.end()),
                           candidates.end());
          if (candidates.empty()) {
            for (std::size_t other = 0; other < n_jobs; ++other) {
              if (usable(other) && truth.job_cluster[other] == truth.job_cluster[job]) {
                candidates.push_back(other);
              }
            }
          }
          if (candidates.empty()) {
            for (std::size_t other = 0; other < n_jobs; ++other) {
              if (usable(other)) candidates.push_back(other);
            }
          }
          if (candidates.empty()) break;
          const std::size_t partner = candidates[rng.index(candidates.size())];
          graph.add_edge(t, pick_matching(rng, job_tasks[partner], truth.task_probs, level));
          present = neighbor_jobs();
        }
      }
    }
  }

  return SyntheticDataset{Dataset(std::move(jobs), std::move(tasks), std::move(graph)),
                          std::move(truth)};
}

void write_truth_json(const SyntheticDataset& synthetic,
                      const std::filesystem::path& path) {
  using nlohmann::json;
  const PlantedTruth& truth = synthetic.truth;
  const Dataset& data = synthetic.dataset;
  const SynthConfig& c = truth.config;

  json doc;
  doc["seed"] = truth.seed;
  doc["config"] = {{"jobs", c.jobs},
                   {"tasks_min", c.tasks_min},
                   {"tasks_max", c.tasks_max},
                   {"density", c.density},
                   {"cross_density", c.cross_density},
                   {"edges_min", c.edges_min},
                   {"edges_max", c.edges_max},
                   {"edge_noise", c.edge_noise},
                   {"cluster_rates", c.cluster_rates},
                   {"min_neighbor_jobs", c.min_neighbor_jobs},
                   {"identical_jobs", c.identical_jobs},
                   {"shared_coefficients", c.shared_coefficients},
                   {"flipped_jobs", c.flipped_jobs}};
  doc["jobs"] = json::array();
  for (std::size_t j = 0; j < data.jobs().size(); ++j) {
    doc["jobs"].push_back({{"job_id", data.jobs()[j].id},
                           {"cluster", truth.job_cluster[j]},
                           {"coefficients", truth.coefficients[j]},
                           {"planted_prob", truth.unflipped_job_probs[j]},
                           {"published_prob", data.jobs()[j].automation_prob}});
  }
  doc["tasks"] = json::array();
  for (std::size_t t = 0; t < data.tasks().size(); ++t) {
    doc["tasks"].push_back({{"task_id", data.tasks()[t].id},
                            {"share", truth.shares[t]},
                            {"planted_prob", truth.task_probs[t]}});
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace taskprob
