#pragma once

#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "taskprob/dataset.hpp"
#include "taskprob/lp.hpp"

namespace taskprob::testing {

/// Random bounded LP with at most `max_vars` variables and `max_rows`
/// constraints. Integer data keeps the oracle's arithmetic exact enough for
/// 1e-9 comparisons.
inline lp::Problem random_bounded_lp(std::mt19937_64& rng, std::size_t max_vars = 6,
                                     std::size_t max_rows = 8) {
  auto pick = [&](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  lp::Problem p;
  const auto n = static_cast<std::size_t>(pick(1, static_cast<int>(max_vars)));
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = pick(-5, 2);
    const double hi = lo + pick(1, 10);
    p.add_variable("x" + std::to_string(j), lo, hi, pick(-5, 5));
  }
  const auto m = static_cast<std::size_t>(pick(1, static_cast<int>(max_rows)));
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<lp::Term> terms;
    for (std::size_t j = 0; j < n; ++j) {
      if (pick(0, 3) == 0) continue;
      terms.push_back({j, static_cast<double>(pick(-4, 4))});
    }
    const int kind = pick(0, 6);
    const lp::Relation rel = kind < 3   ? lp::Relation::kLessEqual
                             : kind < 6 ? lp::Relation::kGreaterEqual
                                        : lp::Relation::kEqual;
    p.add_constraint("c" + std::to_string(i), std::move(terms), rel, pick(-8, 12));
  }
  return p;
}

/// Fresh directory under the system temp dir, named after the running test
/// and removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "taskprob_";
    if (info) name += std::string(info->test_suite_name()) + "_" + info->name();
    for (char& c : name) {
      if (c == '/') c = '_';
    }
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

/// Frequency row with all mass in one bucket.
inline FrequencyDistribution point_mass(std::size_t bucket) {
  FrequencyDistribution f{};
  f.at(bucket) = 1.0;
  return f;
}

/// Builds a dataset from (job id, probability, task count) triples; task ids
/// are "<job>-<k>" and every task uses `freq`. Edges are given as task ids.
struct JobSpec {
  std::string id;
  double p = 0.0;
  std::size_t tasks = 1;
};

inline Dataset make_dataset(const std::vector<JobSpec>& specs,
                            const std::vector<std::pair<std::string, std::string>>& edges,
                            const std::vector<FrequencyDistribution>& freqs = {}) {
  std::vector<Job> jobs;
  std::vector<Task> tasks;
  for (std::size_t j = 0; j < specs.size(); ++j) {
    jobs.push_back(Job{specs[j].id, specs[j].id, specs[j].p, {}, {}});
    for (std::size_t k = 0; k < specs[j].tasks; ++k) {
      Task t;
      t.id = specs[j].id + "-" + std::to_string(k + 1);
      t.job = j;
      t.description = t.id;
      t.freq = freqs.empty() ? point_mass(3) : freqs.at(tasks.size() % freqs.size());
      tasks.push_back(t);
    }
  }
  RelatednessGraph graph(tasks.size());
  auto index = [&](const std::string& id) {
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (tasks[t].id == id) return t;
    }
    throw std::invalid_argument("unknown task " + id);
  };
  for (const auto& [a, b] : edges) graph.add_edge(index(a), index(b));
  return Dataset(std::move(jobs), std::move(tasks), std::move(graph));
}

}  // namespace taskprob::testing
