#include <algorithm>
#include <cmath>
#include <string>

#include <klu.h>

#include "taskprob/error.hpp"
#include "taskprob/lp.hpp"

namespace taskprob::lp {
namespace {

// Entries of B^-1 a_q smaller than this are not accepted as pivots.
constexpr double kPivotTol = 1e-9;
// Step lengths closer than this are ratio-test ties.
constexpr double kRatioTie = 1e-12;
// Steps shorter than this count as degenerate.
constexpr double kDegenerateStep = 1e-12;
// Consecutive degenerate pivots before switching to Bland's rule.
constexpr std::size_t kStallLimit = 100;
// Eta updates between fresh factorizations of the basis.
constexpr std::size_t kRefactorInterval = 64;
// Basic values drifting further than this outside their bounds after a
// refactorization mean the factorization can no longer be trusted.
constexpr double kDriftLimit = 1e-6;
// Basic variables outside their bounds by more than this are repaired by
// the dual simplex.
constexpr double kDualPrimalTol = 1e-9;

enum class State : unsigned char { kBasic, kAtLower, kAtUpper, kFreeZero };

/// Sparse LU factorization of the basis (KLU: block triangular form, then
/// AMD-ordered Gilbert-Peierls LU per block) with in-place solves.
class BasisFactor {
 public:
  BasisFactor() { klu_defaults(&common_); }
  ~BasisFactor() { release(); }
  BasisFactor(const BasisFactor&) = delete;
  BasisFactor& operator=(const BasisFactor&) = delete;

  /// Factors the n x n column-compressed matrix; false if it is singular.
  bool factor(int n, std::vector<int>& starts, std::vector<int>& rows,
              std::vector<double>& values) {
    release();
    symbolic_ = klu_analyze(n, starts.data(), rows.data(), &common_);
    if (!symbolic_) return false;
    numeric_ = klu_factor(starts.data(), rows.data(), values.data(), symbolic_, &common_);
    return numeric_ != nullptr && common_.status == KLU_OK;
  }

  /// x := B^-1 x
  void solve(std::vector<double>& x) {
    klu_solve(symbolic_, numeric_, static_cast<int>(x.size()), 1, x.data(), &common_);
  }

  /// x := B^-T x
  void solve_transposed(std::vector<double>& x) {
    klu_tsolve(symbolic_, numeric_, static_cast<int>(x.size()), 1, x.data(), &common_);
  }

 private:
  void release() {
    if (numeric_) klu_free_numeric(&numeric_, &common_);
    if (symbolic_) klu_free_symbolic(&symbolic_, &common_);
  }

  klu_common common_{};
  klu_symbolic* symbolic_ = nullptr;
  klu_numeric* numeric_ = nullptr;
};

class RevisedSimplex {
 public:
  explicit RevisedSimplex(const Problem& problem);
  Solution run();

 private:
  enum class Outcome { kOptimal, kUnbounded };
  enum class DualOutcome { kPrimalFeasible, kInfeasible };

  void add_column(const std::vector<std::pair<std::size_t, double>>& entries,
                  double lower, double upper);
  void refactor();
  void recompute_basics();
  void recompute_basics_unchecked();
  void compute_basics(bool check_drift);
  void ftran(std::size_t column, std::vector<double>& z);
  void btran(std::vector<double>& y);
  void btran_in_place(std::vector<double>& v);
  double column_dot(std::size_t column, const std::vector<double>& y) const;
  Outcome iterate();
  bool dual_start();
  void recompute_reduced_costs();
  DualOutcome dual_iterate();
  void primal_start();
  Solution finish(Outcome outcome);
  [[noreturn]] void breakdown(const std::string& what) const;

  const Problem& problem_;
  std::size_t rows_ = 0;
  std::size_t structural_ = 0;

  // Column-compressed storage over structural, slack and artificial columns.
  std::vector<std::size_t> col_start_{0};
  std::vector<std::size_t> col_row_;
  std::vector<double> col_val_;

  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> rhs_;
  std::vector<double> x_;
  std::vector<State> state_;
  std::vector<std::size_t> basis_;  // row -> column
  std::size_t first_artificial_ = 0;

  struct Eta {
    std::size_t row = 0;
    double pivot = 1.0;
    std::vector<std::pair<std::size_t, double>> entries;  // off-pivot part of w
  };
  BasisFactor lu_;
  std::vector<Eta> etas_;
  std::vector<double> y_;  // simplex multipliers
  std::vector<double> w_;  // entering column in basis coordinates
  std::vector<double> d_;  // reduced costs (dual simplex)
  std::vector<double> rho_;  // row of the basis inverse (dual simplex)

  std::size_t iterations_ = 0;
  std::size_t iteration_limit_ = 0;
};

RevisedSimplex::RevisedSimplex(const Problem& problem) : problem_(problem) {
  const auto& vars = problem.variables();
  const auto& rows = problem.constraints();
  rows_ = rows.size();
  structural_ = vars.size();

  std::vector<std::vector<std::pair<std::size_t, double>>> columns(structural_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (const Term& t : rows[i].terms) columns[t.var].emplace_back(i, t.coef);
  }
  for (std::size_t j = 0; j < structural_; ++j) {
    add_column(columns[j], vars[j].lower, vars[j].upper);
    cost_.push_back(vars[j].cost);
  }
  rhs_.reserve(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    double lo = 0.0;
    double hi = 0.0;
    switch (rows[i].relation) {
      case Relation::kLessEqual: hi = kInfinity; break;
      case Relation::kGreaterEqual: lo = -kInfinity; break;
      case Relation::kEqual: break;
    }
    add_column({{i, 1.0}}, lo, hi);
    cost_.push_back(0.0);
    rhs_.push_back(rows[i].rhs);
  }
  iteration_limit_ = 100 * (rows_ + structural_) + 10000;
}

void RevisedSimplex::add_column(
    const std::vector<std::pair<std::size_t, double>>& entries, double lower,
    double upper) {
  for (const auto& [row, value] : entries) {
    col_row_.push_back(row);
    col_val_.push_back(value);
  }
  col_start_.push_back(col_row_.size());
  lower_.push_back(lower);
  upper_.push_back(upper);
}

void RevisedSimplex::breakdown(const std::string& what) const {
  throw SolverError("numeric breakdown at pivot step " +
                    std::to_string(iterations_) + ": " + what);
}

void RevisedSimplex::refactor() {
  etas_.clear();
  if (rows_ == 0) return;
  std::vector<int> starts{0};
  std::vector<int> rows;
  std::vector<double> values;
  starts.reserve(rows_ + 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    const std::size_t c = basis_[i];
    for (std::size_t k = col_start_[c]; k < col_start_[c + 1]; ++k) {
      rows.push_back(static_cast<int>(col_row_[k]));
      values.push_back(col_val_[k]);
    }
    starts.push_back(static_cast<int>(rows.size()));
  }
  if (!lu_.factor(static_cast<int>(rows_), starts, rows, values)) breakdown("singular basis");
}

void RevisedSimplex::recompute_basics() { compute_basics(true); }

void RevisedSimplex::recompute_basics_unchecked() { compute_basics(false); }

void RevisedSimplex::compute_basics(bool check_drift) {
  if (rows_ == 0) return;
  std::vector<double> xb = rhs_;
  for (std::size_t c = 0; c < x_.size(); ++c) {
    if (state_[c] == State::kBasic || x_[c] == 0.0) continue;
    for (std::size_t k = col_start_[c]; k < col_start_[c + 1]; ++k) {
      xb[col_row_[k]] -= col_val_[k] * x_[c];
    }
  }
  lu_.solve(xb);
  for (std::size_t i = 0; i < rows_; ++i) {
    const std::size_t c = basis_[i];
    const double v = xb[i];
    if (!std::isfinite(v) ||
        (check_drift && (v < lower_[c] - kDriftLimit || v > upper_[c] + kDriftLimit))) {
      breakdown("basic variable left its bounds after refactorization");
    }
    x_[c] = v;
  }
}

void RevisedSimplex::ftran(std::size_t column, std::vector<double>& z) {
  z.assign(rows_, 0.0);
  for (std::size_t k = col_start_[column]; k < col_start_[column + 1]; ++k) {
    z[col_row_[k]] = col_val_[k];
  }
  lu_.solve(z);
  for (const Eta& eta : etas_) {
    const double zr = z[eta.row] / eta.pivot;
    if (zr != 0.0) {
      for (const auto& [i, w] : eta.entries) z[i] -= w * zr;
    }
    z[eta.row] = zr;
  }
}

void RevisedSimplex::btran(std::vector<double>& y) {
  y.resize(rows_);
  for (std::size_t i = 0; i < rows_; ++i) y[i] = cost_[basis_[i]];
  btran_in_place(y);
}

void RevisedSimplex::btran_in_place(std::vector<double>& v) {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double acc = v[it->row];
    for (const auto& [i, w] : it->entries) acc -= w * v[i];
    v[it->row] = acc / it->pivot;
  }
  lu_.solve_transposed(v);
}

double RevisedSimplex::column_dot(std::size_t column, const std::vector<double>& y) const {
  double s = 0.0;
  for (std::size_t k = col_start_[column]; k < col_start_[column + 1]; ++k) {
    s += col_val_[k] * y[col_row_[k]];
  }
  return s;
}

RevisedSimplex::Outcome RevisedSimplex::iterate() {
  const std::size_t columns = x_.size();
  bool bland = false;
  std::size_t degenerate_run = 0;

  for (;;) {
    if (etas_.size() >= kRefactorInterval) {
      refactor();
      recompute_basics();
    }

    // Pricing.
    if (rows_) btran(y_);
    const std::vector<double>& y = y_;
    std::size_t entering = columns;
    double best = 0.0;
    double entering_d = 0.0;
    for (std::size_t c = 0; c < columns; ++c) {
      const State s = state_[c];
      if (s == State::kBasic || lower_[c] == upper_[c]) continue;
      const double d = cost_[c] - (rows_ ? column_dot(c, y) : 0.0);
      const bool eligible = (s == State::kAtLower && d < -kOptimalityTol) ||
                            (s == State::kAtUpper && d > kOptimalityTol) ||
                            (s == State::kFreeZero && std::abs(d) > kOptimalityTol);
      if (!eligible) continue;
      if (bland) {
        entering = c;
        entering_d = d;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        entering = c;
        entering_d = d;
      }
    }
    if (entering == columns) return Outcome::kOptimal;

    const double dir = entering_d < 0.0 ? 1.0 : -1.0;
    if (rows_) ftran(entering, w_);
    const std::vector<double>& w = w_;

    // Ratio test; a bound flip of the entering column is the default step.
    double theta = upper_[entering] - lower_[entering];  // inf if unbounded
    std::size_t leave_row = rows_;
    bool leave_to_lower = true;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double wi = w[i];
      if (std::abs(wi) <= kPivotTol) continue;
      const std::size_t c = basis_[i];
      const double alpha = dir * wi;  // basic value moves by -theta * alpha
      double t;
      bool to_lower;
      if (alpha > 0.0) {
        if (!std::isfinite(lower_[c])) continue;
        t = (x_[c] - lower_[c]) / alpha;
        to_lower = true;
      } else {
        if (!std::isfinite(upper_[c])) continue;
        t = (upper_[c] - x_[c]) / -alpha;
        to_lower = false;
      }
      t = std::max(t, 0.0);
      bool take = false;
      if (t < theta - kRatioTie) {
        take = true;
      } else if (t <= theta + kRatioTie && leave_row != rows_) {
        const std::size_t current = basis_[leave_row];
        if (bland) {
          take = c < current;
        } else {
          const double cur = std::abs(w[leave_row]);
          take = std::abs(wi) > cur || (std::abs(wi) == cur && c < current);
        }
      }
      if (take) {
        theta = t;
        leave_row = i;
        leave_to_lower = to_lower;
      }
    }
    if (!std::isfinite(theta)) return Outcome::kUnbounded;

    // Step.
    if (theta != 0.0) {
      x_[entering] += dir * theta;
      for (std::size_t i = 0; i < rows_; ++i) {
        const double wi = w[i];
        if (wi != 0.0) x_[basis_[i]] -= theta * dir * wi;
      }
    }
    if (leave_row == rows_) {
      const bool to_upper = dir > 0.0;
      state_[entering] = to_upper ? State::kAtUpper : State::kAtLower;
      x_[entering] = to_upper ? upper_[entering] : lower_[entering];
    } else {
      const std::size_t leaving = basis_[leave_row];
      x_[leaving] = leave_to_lower ? lower_[leaving] : upper_[leaving];
      state_[leaving] = leave_to_lower ? State::kAtLower : State::kAtUpper;
      state_[entering] = State::kBasic;
      basis_[leave_row] = entering;

      Eta eta;
      eta.row = leave_row;
      eta.pivot = w[leave_row];
      for (std::size_t i = 0; i < rows_; ++i) {
        const double wi = w[i];
        if (i != leave_row && std::abs(wi) > 1e-14) eta.entries.emplace_back(i, wi);
      }
      etas_.push_back(std::move(eta));
    }

    if (theta <= kDegenerateStep) {
      if (++degenerate_run >= kStallLimit) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
    if (++iterations_ > iteration_limit_) breakdown("iteration limit exceeded");
  }
}

bool RevisedSimplex::dual_start() {
  // With every slack basic the multipliers are zero, so the reduced cost of
  // each structural column is its cost. The start is dual feasible when every
  // column can rest at the bound its cost sign asks for.
  const std::size_t slack_end = structural_ + rows_;
  x_.assign(slack_end, 0.0);
  state_.assign(slack_end, State::kAtLower);
  for (std::size_t j = 0; j < structural_; ++j) {
    const double c = cost_[j];
    if (c > 0.0 || (c == 0.0 && std::isfinite(lower_[j]))) {
      if (!std::isfinite(lower_[j])) return false;
      x_[j] = lower_[j];
      state_[j] = State::kAtLower;
    } else if (c < 0.0 || std::isfinite(upper_[j])) {
      if (!std::isfinite(upper_[j])) return false;
      x_[j] = upper_[j];
      state_[j] = State::kAtUpper;
    } else {
      x_[j] = 0.0;
      state_[j] = State::kFreeZero;
    }
  }
  first_artificial_ = slack_end;
  basis_.resize(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    basis_[i] = structural_ + i;
    state_[structural_ + i] = State::kBasic;
  }
  refactor();
  recompute_basics_unchecked();
  d_.assign(slack_end, 0.0);
  for (std::size_t j = 0; j < structural_; ++j) d_[j] = cost_[j];
  return true;
}

void RevisedSimplex::recompute_reduced_costs() {
  if (rows_) btran(y_);
  d_.assign(x_.size(), 0.0);
  for (std::size_t c = 0; c < x_.size(); ++c) {
    if (state_[c] == State::kBasic) continue;
    d_[c] = cost_[c] - (rows_ ? column_dot(c, y_) : 0.0);
  }
}

RevisedSimplex::DualOutcome RevisedSimplex::dual_iterate() {
  const std::size_t columns = x_.size();
  for (;;) {
    if (etas_.size() >= kRefactorInterval) {
      refactor();
      recompute_basics_unchecked();
      recompute_reduced_costs();
    }

    // Leaving row: the basic variable furthest outside its bounds.
    std::size_t leave_row = rows_;
    double worst = kDualPrimalTol;
    for (std::size_t i = 0; i < rows_; ++i) {
      const std::size_t c = basis_[i];
      const double gap = std::max(lower_[c] - x_[c], x_[c] - upper_[c]);
      if (gap > worst) {
        worst = gap;
        leave_row = i;
      }
    }
    if (leave_row == rows_) return DualOutcome::kPrimalFeasible;
    const std::size_t leaving = basis_[leave_row];
    const bool to_lower = x_[leaving] < lower_[leaving];
    const double target = to_lower ? lower_[leaving] : upper_[leaving];
    // The leaving variable must rise (to_lower) or fall; `sense` is the sign
    // of its required change.
    const double sense = to_lower ? 1.0 : -1.0;

    rho_.assign(rows_, 0.0);
    rho_[leave_row] = 1.0;
    btran_in_place(rho_);

    // Dual ratio test. A nonbasic column moving by t changes the leaving
    // variable by -alpha * t.
    std::size_t entering = columns;
    double best_ratio = kInfinity;
    double best_alpha = 0.0;
    for (std::size_t c = 0; c < columns; ++c) {
      const State st = state_[c];
      if (st == State::kBasic || lower_[c] == upper_[c]) continue;
      const double alpha = column_dot(c, rho_);
      if (std::abs(alpha) <= kPivotTol) continue;
      const double push = -alpha * sense;  // leaving change per unit increase of c
      const bool usable = (st == State::kAtLower && push > 0.0) ||
                          (st == State::kAtUpper && push < 0.0) ||
                          st == State::kFreeZero;
      if (!usable) continue;
      const double ratio = std::abs(d_[c]) / std::abs(alpha);
      bool take = false;
      if (ratio < best_ratio - kRatioTie) {
        take = true;
      } else if (ratio <= best_ratio + kRatioTie) {
        take = std::abs(alpha) > std::abs(best_alpha);
      }
      if (take) {
        best_ratio = ratio;
        best_alpha = alpha;
        entering = c;
      }
    }
    if (entering == columns) return DualOutcome::kInfeasible;

    ftran(entering, w_);
    const double pivot = w_[leave_row];
    if (std::abs(pivot) <= kPivotTol ||
        std::abs(pivot - best_alpha) > 1e-6 * (1.0 + std::abs(best_alpha))) {
      // Row and column disagree: refresh the factorization and retry.
      if (etas_.empty()) breakdown("inconsistent pivot in the dual ratio test");
      refactor();
      recompute_basics_unchecked();
      recompute_reduced_costs();
      continue;
    }

    // Primal step: the entering column moves until the leaving variable
    // reaches its violated bound.
    const double theta = (x_[leaving] - target) / pivot;
    x_[entering] += theta;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (w_[i] != 0.0) x_[basis_[i]] -= theta * w_[i];
    }
    x_[leaving] = target;

    // Dual step.
    const double theta_d = d_[entering] / pivot;
    if (theta_d != 0.0) {
      for (std::size_t c = 0; c < columns; ++c) {
        if (state_[c] == State::kBasic || c == entering) continue;
        const double alpha = column_dot(c, rho_);
        if (alpha != 0.0) d_[c] -= theta_d * alpha;
      }
    }
    d_[leaving] = -theta_d;
    d_[entering] = 0.0;

    state_[leaving] = to_lower ? State::kAtLower : State::kAtUpper;
    state_[entering] = State::kBasic;
    basis_[leave_row] = entering;
    Eta eta;
    eta.row = leave_row;
    eta.pivot = pivot;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i != leave_row && std::abs(w_[i]) > 1e-14) eta.entries.emplace_back(i, w_[i]);
    }
    etas_.push_back(std::move(eta));

    if (++iterations_ > iteration_limit_) breakdown("iteration limit exceeded");
  }
}

void RevisedSimplex::primal_start() {
  const std::size_t slack_end = structural_ + rows_;
  x_.assign(slack_end, 0.0);
  state_.assign(slack_end, State::kAtLower);

  for (std::size_t j = 0; j < structural_; ++j) {
    if (std::isfinite(lower_[j])) {
      x_[j] = lower_[j];
      state_[j] = State::kAtLower;
    } else if (std::isfinite(upper_[j])) {
      x_[j] = upper_[j];
      state_[j] = State::kAtUpper;
    } else {
      x_[j] = 0.0;
      state_[j] = State::kFreeZero;
    }
  }

  std::vector<double> residual = rhs_;
  for (std::size_t j = 0; j < structural_; ++j) {
    if (x_[j] == 0.0) continue;
    for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      residual[col_row_[k]] -= col_val_[k] * x_[j];
    }
  }

  // Crash basis: slacks where they fit, artificials elsewhere.
  first_artificial_ = slack_end;
  basis_.assign(rows_, 0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const std::size_t s = structural_ + i;
    const double r = residual[i];
    if (r >= lower_[s] - kOptimalityTol && r <= upper_[s] + kOptimalityTol) {
      basis_[i] = s;
      state_[s] = State::kBasic;
      x_[s] = r;
      continue;
    }
    const bool below = r < lower_[s];
    const double at = below ? lower_[s] : upper_[s];
    x_[s] = at;
    state_[s] = below ? State::kAtLower : State::kAtUpper;
    const double sign = r - at > 0.0 ? 1.0 : -1.0;
    add_column({{i, sign}}, 0.0, kInfinity);
    cost_.push_back(0.0);
    x_.push_back(std::abs(r - at));
    state_.push_back(State::kBasic);
    basis_[i] = x_.size() - 1;
  }
}

Solution RevisedSimplex::run() {
  // Dual simplex from the slack basis when that basis is dual feasible; a
  // primal pass then removes any dual infeasibility left by round-off. An
  // infeasibility verdict from the dual is confirmed by the two-phase primal
  // method, which is also used when no dual feasible start exists.
  if (dual_start() && dual_iterate() == DualOutcome::kPrimalFeasible) {
    refactor();
    recompute_basics();
    return finish(iterate());
  }
  etas_.clear();
  primal_start();
  const bool needs_phase_one = x_.size() > structural_ + rows_;

  refactor();

  if (needs_phase_one) {
    std::vector<double> phase_two_cost = cost_;
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t c = first_artificial_; c < x_.size(); ++c) cost_[c] = 1.0;
    if (iterate() == Outcome::kUnbounded) breakdown("phase one reported unbounded");
    refactor();
    recompute_basics();
    double infeasibility = 0.0;
    for (std::size_t c = first_artificial_; c < x_.size(); ++c) infeasibility += x_[c];
    if (infeasibility > kFeasibilityTol) {
      Solution solution;
      solution.status = Status::kInfeasible;
      solution.iterations = iterations_;
      return solution;
    }
    cost_ = std::move(phase_two_cost);
    for (std::size_t c = first_artificial_; c < x_.size(); ++c) {
      upper_[c] = 0.0;
      if (state_[c] != State::kBasic) {
        x_[c] = 0.0;
        state_[c] = State::kAtLower;
      }
    }
  }

  return finish(iterate());
}

Solution RevisedSimplex::finish(Outcome outcome) {
  Solution solution;
  solution.iterations = iterations_;
  if (outcome == Outcome::kUnbounded) {
    solution.status = Status::kUnbounded;
    return solution;
  }
  refactor();
  recompute_basics();

  const auto& vars = problem_.variables();
  solution.status = Status::kOptimal;
  solution.values.resize(structural_);
  for (std::size_t j = 0; j < structural_; ++j) {
    double v = x_[j];
    if (std::abs(v - vars[j].lower) <= kOptimalityTol) v = vars[j].lower;
    if (std::abs(v - vars[j].upper) <= kOptimalityTol) v = vars[j].upper;
    v = std::clamp(v, vars[j].lower, vars[j].upper);
    if (v == 0.0) v = 0.0;  // no negative zero in outputs
    solution.values[j] = v;
  }
  const double violation = max_violation(problem_, solution.values);
  if (violation > kFeasibilityTol) {
    breakdown("final point violates a constraint by " + std::to_string(violation));
  }
  double objective = 0.0;
  for (std::size_t j = 0; j < structural_; ++j) {
    objective += vars[j].cost * solution.values[j];
  }
  solution.objective = objective;
  return solution;
}

}  // namespace

Solution solve(const Problem& problem) {
  return RevisedSimplex(problem).run();
}

}  // namespace taskprob::lp
