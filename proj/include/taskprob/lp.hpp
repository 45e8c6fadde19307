#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace taskprob::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Primal feasibility tolerance for constraint rows.
inline constexpr double kFeasibilityTol = 1e-7;
/// Reduced-cost tolerance and the snap distance for variable bounds.
inline constexpr double kOptimalityTol = 1e-9;

/// Identifier recorded in run manifests.
inline constexpr const char* kPivotRule =
    "bounded-dual-simplex/largest-infeasibility+revised-primal-simplex/"
    "dantzig-lowest-index+bland-on-stall;basis=klu";

enum class Relation { kLessEqual, kGreaterEqual, kEqual };

struct Term {
  std::size_t var = 0;
  double coef = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  double cost = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;  // sparse row
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

/// A minimization problem over bounded variables and sparse rows.
class Problem {
 public:
  /// Throws std::invalid_argument on a duplicate name or lower > upper.
  std::size_t add_variable(std::string name, double lower, double upper,
                           double cost);

  /// Throws std::invalid_argument if a term references an undeclared
  /// variable. Repeated variables in one row are merged.
  std::size_t add_constraint(std::string name, std::vector<Term> terms,
                             Relation relation, double rhs);

  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const std::vector<Constraint>& constraints() const noexcept { return constraints_; }

  std::optional<std::size_t> find_variable(const std::string& name) const;

  /// Number of variables with a nonzero objective coefficient.
  std::size_t objective_terms() const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

const char* to_string(Status status);

struct Solution {
  Status status = Status::kInfeasible;
  std::vector<double> values;  // aligned with Problem::variables()
  double objective = 0.0;
  std::size_t iterations = 0;

  /// Value of a named variable; throws std::out_of_range if unknown.
  double value(const Problem& problem, const std::string& name) const;
};

/// Revised simplex over bounded variables with a sparse LU basis.
///
/// When the all-slack basis is dual feasible (every column can rest at the
/// bound its cost sign asks for), a dual simplex runs first: the leaving row
/// is the basic variable furthest outside its bounds, the entering column
/// the smallest dual ratio with ties going to the largest pivot. A primal
/// pass then finishes from the dual's basis. Otherwise, and to confirm an
/// infeasibility verdict from the dual, a two-phase primal simplex runs from
/// a slack/artificial basis.
///
/// Primal pricing is Dantzig's largest reduced cost with ties broken by the
/// lowest variable index. After a run of degenerate pivots the solver
/// switches to Bland's rule (lowest eligible index entering, lowest index
/// leaving among ratio ties) until the objective moves again, which rules
/// out cycling. The result depends only on the problem's contents and
/// ordering.
///
/// Throws SolverError on numeric breakdown (singular basis or lost
/// feasibility), naming the pivot step.
Solution solve(const Problem& problem);

/// Exact optimum of a tiny problem by enumerating every vertex of the
/// feasible region. Infinite bounds are replaced by a large box; growth of
/// the optimum with the box size signals unboundedness.
///
/// Throws std::invalid_argument when the candidate active set (constraints
/// plus finite bounds plus box sides) exceeds kOracleMaxRows.
Solution enumerate_vertices_oracle(const Problem& problem);

inline constexpr std::size_t kOracleMaxRows = 26;

/// Largest violation of any bound or row at `values`.
double max_violation(const Problem& problem, const std::vector<double>& values);

/// CPLEX LP text format, one constraint per line. Names are sanitized to the
/// format's identifier alphabet.
void write_lp_text(const Problem& problem, std::ostream& out);

}  // namespace taskprob::lp
