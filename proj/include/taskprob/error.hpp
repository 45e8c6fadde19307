#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace taskprob {

/// One problem found while reading or checking a dataset.
struct Issue {
  std::string file;  // empty when the issue is not tied to a file
  std::size_t line = 0;  // 1-based; 0 when unknown
  std::string message;

  std::string to_string() const;
};

/// Input data violates a schema or a dataset invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Issue> issues);

  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  std::vector<Issue> issues_;
};

/// The solver could not produce a trustworthy answer, or an LP stage was
/// infeasible where the model guarantees feasibility.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system or serialization failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace taskprob
