#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "taskprob/lp.hpp"

namespace taskprob::lp {
namespace {

// Stand-in for infinite bounds; growing it must not change a finite optimum.
constexpr double kBoxSize = 1e6;

struct Row {
  std::vector<long double> coef;  // dense, one per variable
  Relation relation;
  long double rhs;
};

/// Solves the square system formed by `chosen` rows. Returns false if it is
/// singular.
bool solve_active(const std::vector<Row>& rows, const std::vector<std::size_t>& chosen,
                  std::size_t n, std::vector<long double>& x) {
  std::vector<std::vector<long double>> a(n, std::vector<long double>(n + 1));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) a[r][c] = rows[chosen[r]].coef[c];
    a[r][n] = rows[chosen[r]].rhs;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (std::fabs(a[pivot][col]) < 1e-12L) return false;
    std::swap(a[pivot], a[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      if (f == 0.0L) continue;
      for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  x.resize(n);
  for (std::size_t r = 0; r < n; ++r) x[r] = a[r][n] / a[r][r];
  return true;
}

bool satisfies(const Row& row, const std::vector<long double>& x) {
  long double activity = 0.0L;
  for (std::size_t j = 0; j < x.size(); ++j) activity += row.coef[j] * x[j];
  const long double tol = 1e-9L * (1.0L + std::fabs(row.rhs));
  switch (row.relation) {
    case Relation::kLessEqual: return activity <= row.rhs + tol;
    case Relation::kGreaterEqual: return activity >= row.rhs - tol;
    case Relation::kEqual: return std::fabs(activity - row.rhs) <= tol;
  }
  return false;
}

struct Best {
  bool found = false;
  long double objective = 0.0L;
  std::vector<long double> x;
};

Best enumerate(const Problem& problem, double box) {
  const auto& vars = problem.variables();
  const std::size_t n = vars.size();
  std::vector<Row> rows;
  for (const Constraint& c : problem.constraints()) {
    Row row{std::vector<long double>(n, 0.0L), c.relation, c.rhs};
    for (const Term& t : c.terms) row.coef[t.var] += t.coef;
    rows.push_back(std::move(row));
  }
  for (std::size_t j = 0; j < n; ++j) {
    Row lo{std::vector<long double>(n, 0.0L), Relation::kGreaterEqual,
           std::isfinite(vars[j].lower) ? vars[j].lower : -box};
    lo.coef[j] = 1.0L;
    Row hi{std::vector<long double>(n, 0.0L), Relation::kLessEqual,
           std::isfinite(vars[j].upper) ? vars[j].upper : box};
    hi.coef[j] = 1.0L;
    if (lo.rhs == hi.rhs) {
      lo.relation = Relation::kEqual;
      rows.push_back(std::move(lo));
    } else {
      rows.push_back(std::move(lo));
      rows.push_back(std::move(hi));
    }
  }

  Best best;
  if (n == 0) {
    bool ok = true;
    for (const Row& row : rows) ok = ok && satisfies(row, {});
    best.found = ok;
    return best;
  }

  // Every n-subset of rows, in lexicographic order.
  std::vector<std::size_t> chosen(n);
  for (std::size_t i = 0; i < n; ++i) chosen[i] = i;
  std::vector<long double> x;
  for (;;) {
    if (solve_active(rows, chosen, n, x)) {
      bool feasible = true;
      for (const Row& row : rows) {
        if (!satisfies(row, x)) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        long double obj = 0.0L;
        for (std::size_t j = 0; j < n; ++j) obj += vars[j].cost * x[j];
        if (!best.found || obj < best.objective) {
          best.found = true;
          best.objective = obj;
          best.x = x;
        }
      }
    }
    // Next combination.
    std::size_t i = n;
    while (i > 0 && chosen[i - 1] == rows.size() - n + (i - 1)) --i;
    if (i == 0) break;
    ++chosen[i - 1];
    for (std::size_t k = i; k < n; ++k) chosen[k] = chosen[k - 1] + 1;
  }
  return best;
}

}  // namespace

Solution enumerate_vertices_oracle(const Problem& problem) {
  std::size_t active_rows = problem.constraints().size();
  for (const Variable& v : problem.variables()) {
    active_rows += v.lower == v.upper ? 1 : 2;
  }
  if (active_rows > kOracleMaxRows) {
    throw std::invalid_argument("problem too large for vertex enumeration: " +
                                std::to_string(active_rows) + " candidate rows");
  }
  if (problem.variables().size() > active_rows) {
    throw std::invalid_argument("vertex enumeration needs at least as many rows as variables");
  }

  Solution solution;
  const Best small = enumerate(problem, kBoxSize);
  if (!small.found) {
    solution.status = Status::kInfeasible;
    return solution;
  }
  const Best large = enumerate(problem, 2.0 * kBoxSize);
  const long double scale = 1.0L + std::fabs(small.objective);
  if (large.objective < small.objective - 1e-6L * scale) {
    solution.status = Status::kUnbounded;
    return solution;
  }
  solution.status = Status::kOptimal;
  solution.objective = static_cast<double>(small.objective);
  for (long double v : small.x) solution.values.push_back(static_cast<double>(v));
  return solution;
}

}  // namespace taskprob::lp
