#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "taskprob/csv.hpp"
#include "taskprob/lp.hpp"

namespace taskprob::lp {

std::size_t Problem::add_variable(std::string name, double lower, double upper,
                                  double cost) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw std::invalid_argument("variable '" + name + "' has lower > upper");
  }
  if (!std::isfinite(cost)) {
    throw std::invalid_argument("variable '" + name + "' has a non-finite cost");
  }
  const std::size_t id = variables_.size();
  if (!index_.emplace(name, id).second) {
    throw std::invalid_argument("duplicate variable name '" + name + "'");
  }
  variables_.push_back(Variable{std::move(name), lower, upper, cost});
  return id;
}

std::size_t Problem::add_constraint(std::string name, std::vector<Term> terms,
                                    Relation relation, double rhs) {
  if (!std::isfinite(rhs)) {
    throw std::invalid_argument("constraint '" + name + "' has a non-finite rhs");
  }
  for (const Term& term : terms) {
    if (term.var >= variables_.size()) {
      throw std::invalid_argument("constraint '" + name +
                                  "' references an undeclared variable");
    }
    if (!std::isfinite(term.coef)) {
      throw std::invalid_argument("constraint '" + name +
                                  "' has a non-finite coefficient");
    }
  }
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const Term& term : terms) {
    if (!merged.empty() && merged.back().var == term.var) {
      merged.back().coef += term.coef;
    } else {
      merged.push_back(term);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  constraints_.push_back(Constraint{std::move(name), std::move(merged), relation, rhs});
  return constraints_.size() - 1;
}

std::optional<std::size_t> Problem::find_variable(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Problem::objective_terms() const {
  return static_cast<std::size_t>(std::count_if(
      variables_.begin(), variables_.end(),
      [](const Variable& v) { return v.cost != 0.0; }));
}

const char* to_string(Status status) {
  switch (status) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
  }
  return "unknown";
}

double Solution::value(const Problem& problem, const std::string& name) const {
  auto id = problem.find_variable(name);
  if (!id || *id >= values.size()) {
    throw std::out_of_range("no value for variable '" + name + "'");
  }
  return values[*id];
}

double max_violation(const Problem& problem, const std::vector<double>& values) {
  double worst = 0.0;
  const auto& vars = problem.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    worst = std::max(worst, vars[j].lower - values[j]);
    worst = std::max(worst, values[j] - vars[j].upper);
  }
  for (const Constraint& row : problem.constraints()) {
    double activity = 0.0;
    for (const Term& t : row.terms) activity += t.coef * values[t.var];
    switch (row.relation) {
      case Relation::kLessEqual: worst = std::max(worst, activity - row.rhs); break;
      case Relation::kGreaterEqual: worst = std::max(worst, row.rhs - activity); break;
      case Relation::kEqual: worst = std::max(worst, std::abs(activity - row.rhs)); break;
    }
  }
  return worst;
}

namespace {

std::string sanitize(const std::string& name, const std::string& fallback) {
  static const std::string allowed = "!\"#$%&()/,.;?@_`'{}|~";
  std::string out;
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) ||
                    allowed.find(c) != std::string::npos;
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])) || out[0] == '.') {
    out = fallback + out;
  }
  return out;
}

void write_terms(std::ostream& out, const std::vector<Term>& terms,
                 const std::vector<std::string>& names) {
  if (terms.empty()) {
    out << " 0 " << names.front();
    return;
  }
  bool first = true;
  for (const Term& t : terms) {
    const double mag = std::abs(t.coef);
    out << (t.coef < 0 ? " - " : (first ? " " : " + "));
    if (mag != 1.0) out << csv::format_number(mag) << ' ';
    out << names[t.var];
    first = false;
  }
}

}  // namespace

void write_lp_text(const Problem& problem, std::ostream& out) {
  const auto& vars = problem.variables();
  std::vector<std::string> names;
  names.reserve(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) {
    names.push_back(sanitize(vars[j].name, "x" + std::to_string(j) + "_"));
  }
  if (names.empty()) names.push_back("empty");

  out << "\\ " << vars.size() << " variables, " << problem.constraints().size()
      << " constraints\n";
  out << "Minimize\n obj:";
  std::vector<Term> objective;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].cost != 0.0) objective.push_back({j, vars[j].cost});
  }
  write_terms(out, objective, names);
  out << "\nSubject To\n";
  std::size_t index = 0;
  for (const Constraint& row : problem.constraints()) {
    out << ' ' << sanitize(row.name, "c" + std::to_string(index) + "_") << ':';
    write_terms(out, row.terms, names);
    switch (row.relation) {
      case Relation::kLessEqual: out << " <= "; break;
      case Relation::kGreaterEqual: out << " >= "; break;
      case Relation::kEqual: out << " = "; break;
    }
    out << csv::format_number(row.rhs) << '\n';
    ++index;
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const Variable& v = vars[j];
    const bool lo = std::isfinite(v.lower);
    const bool hi = std::isfinite(v.upper);
    if (!lo && !hi) {
      out << ' ' << names[j] << " free\n";
    } else if (lo && hi && v.lower == v.upper) {
      out << ' ' << names[j] << " = " << csv::format_number(v.lower) << '\n';
    } else {
      out << ' ' << (lo ? csv::format_number(v.lower) : "-inf") << " <= " << names[j];
      if (hi) out << " <= " << csv::format_number(v.upper);
      out << '\n';
    }
  }
  out << "End\n";
}

}  // namespace taskprob::lp
