// Solver-agnostic description of a linear / mixed-binary program: named,
// bounded variables, sparse rows with a relation and right-hand side, and a
// linear objective. Row metadata records which period / device / phase a
// constraint came from.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "htslp/types.hpp"

namespace htslp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary };
enum class Rel { le, eq, ge };

struct LpVariable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lb = -kInf;
  double ub = kInf;
};

struct RowTag {
  std::string role;  // short functional label, e.g. "vmag", "epq_def"
  int period = -1;
  int ht = -1;
  int phase = -1;
};

struct LpRow {
  std::string name;
  std::vector<std::pair<int, double>> coeffs;  // (variable, coefficient)
  Rel rel = Rel::eq;
  double rhs = 0.0;
  RowTag tag;
  // Equality rows whose single-purpose defined variable appears nowhere else
  // may be activated lazily by the solver; the variable index is recorded so
  // an inactive row can be satisfied by assignment.
  bool lazy = false;
  int defined_var = -1;
};

// Small builder for affine expressions; keeps construction code close to the
// algebra it implements.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinExpr& add(int var, double coeff) {
    if (coeff != 0.0) terms.emplace_back(var, coeff);
    return *this;
  }
  LinExpr& add(const LinExpr& other, double scale = 1.0) {
    for (const auto& [v, c] : other.terms) add(v, scale * c);
    constant += scale * other.constant;
    return *this;
  }
};

struct LpProblem {
  std::vector<LpVariable> vars;
  std::vector<LpRow> rows;
  std::vector<std::pair<int, double>> objective;
  double objective_constant = 0.0;
  bool maximize = true;
  std::string name = "lp";

  int add_var(std::string name, double lb, double ub,
              VarKind kind = VarKind::continuous) {
    vars.push_back({std::move(name), kind, lb, ub});
    return static_cast<int>(vars.size()) - 1;
  }

  int add_row(std::string name, LinExpr expr, Rel rel, double rhs, RowTag tag = {}) {
    LpRow row;
    row.name = std::move(name);
    row.rel = rel;
    row.rhs = rhs - expr.constant;
    row.tag = std::move(tag);
    row.coeffs = combine_terms(std::move(expr.terms));
    rows.push_back(std::move(row));
    return static_cast<int>(rows.size()) - 1;
  }

  void set_objective_term(int var, double coeff) {
    for (auto& [v, c] : objective)
      if (v == var) {
        c += coeff;
        return;
      }
    if (coeff != 0.0) objective.emplace_back(var, coeff);
  }

  // Sums duplicate variable entries and drops zeros; keeps rows canonical.
  static std::vector<std::pair<int, double>> combine_terms(
      std::vector<std::pair<int, double>> terms);

  int binary_count() const {
    int n = 0;
    for (const auto& v : vars) n += v.kind == VarKind::binary;
    return n;
  }

  // Throws InvalidParameterError if a coefficient is not finite or a
  // variable is referenced by nothing.
  void validate() const;
};

}  // namespace htslp
