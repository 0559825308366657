#include "htslp/milp.hpp"

#include <cmath>
#include <iostream>
#include <optional>
#include <queue>

namespace htslp {

namespace {

struct Node {
  int id;
  double bound;  // parent relaxation objective, in "better is larger" sense
  std::vector<std::pair<int, double>> fixings;
  SimplexBasis basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // larger bound first
    return a.id > b.id;                                // then older node first
  }
};

}  // namespace

SolveOutcome solve_milp(const LpProblem& problem, const MilpOptions& options,
                        MilpStats* stats, const SimplexBasis* warm) {
  std::vector<int> binaries;
  for (std::size_t j = 0; j < problem.vars.size(); ++j)
    if (problem.vars[j].kind == VarKind::binary) binaries.push_back(static_cast<int>(j));

  // Work on a relaxed copy; nodes adjust the binary bounds.
  LpProblem relaxed = problem;
  for (int j : binaries) {
    relaxed.vars[j].kind = VarKind::continuous;
    relaxed.vars[j].lb = std::max(relaxed.vars[j].lb, 0.0);
    relaxed.vars[j].ub = std::min(relaxed.vars[j].ub, 1.0);
  }
  const double sense = problem.maximize ? 1.0 : -1.0;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  Node root;
  root.id = 0;
  root.bound = kInf;
  if (warm) root.basis = *warm;
  open.push(std::move(root));

  std::optional<SolveOutcome> incumbent;
  double incumbent_value = -kInf;
  int next_id = 1;
  int nodes = 0;
  long lp_iters = 0;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (nodes >= options.max_nodes) break;
    if (incumbent && node.bound <= incumbent_value + 1e-9) continue;
    ++nodes;

    for (int j : binaries) {
      relaxed.vars[j].lb = 0.0;
      relaxed.vars[j].ub = 1.0;
    }
    for (const auto& [j, v] : node.fixings) relaxed.vars[j].lb = relaxed.vars[j].ub = v;

    SolveOutcome lp = solve_lp(relaxed, options.lp,
                               node.basis.valid ? &node.basis : nullptr);
    lp_iters += lp.iterations;
    if (lp.status == LpStatus::iteration_limit || lp.status == LpStatus::unbounded) {
      if (stats) {
        stats->nodes = nodes;
        stats->lp_iterations = lp_iters;
      }
      return lp;  // surface the pathology instead of masking it
    }
    if (lp.status == LpStatus::infeasible) continue;

    const double bound = sense * lp.objective;
    if (incumbent && bound <= incumbent_value + 1e-9) continue;

    // Most fractional binary; ascending scan keeps ties at the lowest index.
    int branch_var = -1;
    double best_frac = options.integrality_tol;
    for (int j : binaries) {
      const double frac = std::abs(lp.values[j] - std::round(lp.values[j]));
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        branch_var = j;
      }
    }

    if (branch_var < 0) {
      if (!incumbent || bound > incumbent_value + 1e-9) {
        for (int j : binaries) lp.values[j] = std::round(lp.values[j]);
        incumbent = lp;
        incumbent_value = bound;
        if (options.verbose)
          std::cerr << "milp: incumbent " << lp.objective << " at node " << nodes << "\n";
      }
      continue;
    }

    for (double v : {0.0, 1.0}) {
      Node child;
      child.id = next_id++;
      child.bound = bound;
      child.fixings = node.fixings;
      child.fixings.emplace_back(branch_var, v);
      child.basis = lp.basis;
      open.push(std::move(child));
    }
  }

  if (stats) {
    stats->nodes = nodes;
    stats->lp_iterations = lp_iters;
  }
  if (!incumbent) {
    SolveOutcome out;
    out.status = LpStatus::infeasible;
    out.values = Vec::Zero(static_cast<int>(problem.vars.size()));
    return out;
  }
  return *incumbent;
}

}  // namespace htslp
