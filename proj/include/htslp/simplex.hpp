// Self-contained bounded-variable revised simplex. The basis is held as an
// Eigen sparse LU factorization refreshed periodically, with product-form
// eta updates between refactorizations. Phase 1 minimizes the sum of bound
// infeasibilities with the same pivoting machinery. Rows flagged lazy are
// activated on demand; a solution is only reported optimal once every row
// of the problem holds. Fully deterministic: no randomization, fixed
// tie-breaking, Bland's rule after a degeneracy streak.
#pragma once

#include <vector>

#include "htslp/lp_problem.hpp"

namespace htslp {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

enum class VarStatus : unsigned char { basic, at_lower, at_upper, nonbasic_free };

// Restart state: statuses cover structural variables then one logical per
// row (all rows, active or not), so indices stay stable across re-solves.
struct SimplexBasis {
  bool valid = false;
  std::vector<VarStatus> status;
  std::vector<char> row_active;
};

struct SimplexOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  double pivot_tol = 1e-9;
  long max_iterations = 5000000;
  int refactor_interval = 100;
  int degeneracy_limit = 60;  // consecutive degenerate pivots before Bland's rule
  bool verbose = false;
};

struct SolveOutcome {
  LpStatus status = LpStatus::iteration_limit;
  double objective = 0.0;
  Vec values;       // per variable
  Vec dual_values;  // per row, in the sense of the original problem
  Vec farkas;       // per row; set for infeasible outcomes
  long iterations = 0;
  int activations = 0;  // lazily activated rows
  SimplexBasis basis;
};

SolveOutcome solve_lp(const LpProblem& problem, const SimplexOptions& options = {},
                      const SimplexBasis* warm = nullptr);

// Max-norm primal feasibility residual and complementary-slackness residual
// of an optimal outcome.
struct LpResiduals {
  double primal = 0.0;
  double complementary = 0.0;
};
LpResiduals check_optimality(const LpProblem& problem, const SolveOutcome& outcome);

// Validates a Farkas-style certificate: y must aggregate the rows into an
// inequality no point of the variable box can satisfy.
bool verify_infeasibility_certificate(const LpProblem& problem, const Vec& y,
                                      double tol = 1e-6);

}  // namespace htslp
