// Exact best-first branch and bound over the binary variables of an
// LpProblem, solving LP relaxations with warm-started simplex. Intended for
// the small binary counts of installation decisions; node order is
// deterministic (bound, then node id).
#pragma once

#include "htslp/simplex.hpp"

namespace htslp {

struct MilpOptions {
  SimplexOptions lp;
  double integrality_tol = 1e-6;
  int max_nodes = 100000;
  bool verbose = false;
};

struct MilpStats {
  int nodes = 0;
  long lp_iterations = 0;
};

SolveOutcome solve_milp(const LpProblem& problem, const MilpOptions& options = {},
                        MilpStats* stats = nullptr,
                        const SimplexBasis* warm = nullptr);

}  // namespace htslp
