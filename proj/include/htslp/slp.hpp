// Outer sequential-linear-programming loop: per-period power flows anchor a
// linear network model, the placement MILP is solved, results are
// re-simulated through the nonlinear power flow, and network-feasibility /
// compensation-accuracy checks gate acceptance. Failed checks halve the
// trust region and re-solve against the same anchors; the loop ends on
// objective convergence, the step-size floor, or the iteration cap.
#pragma once

#include "htslp/economics.hpp"
#include "htslp/lp_build.hpp"
#include "htslp/milp.hpp"

namespace htslp {

struct SlpOptions {
  int k_max = 50;
  double obj_tol_pct = 1.0;    // convergence threshold on the objective change
  double vpq_tol_pct = 5.0;    // compensation-accuracy tolerance
  int rounding_decimals = 2;   // feasibility-check rounding
  bool literal_penalty_signs = false;
  bool verbose = false;
  int max_resolves = 40;
  int threads = 1;  // per-period power flows and model derivations
  MilpOptions milp;
};

enum class SlpTermination { converged, step_floor, iteration_cap };

struct IterationRecord {
  int k = 0;
  int resolves = 1;  // LP solves in this iteration including halvings
  double lp_objective = 0.0;
  double npv = 0.0;
  double c_exp = 0.0;
  double max_violation = 0.0;  // rounded |v| distance outside the band, pu
  double max_dvpq_pct = 0.0;
  double stp_v = 0.0;
  double stp_gamma = 0.0;
  double stp_dg_max = 0.0;
  long lp_iterations = 0;
  int milp_nodes = 0;
  bool accepted = false;
  std::string note;
};

struct SlpResult {
  bool converged = false;
  bool has_incumbent = false;  // at least one iteration passed both checks
  SlpTermination termination = SlpTermination::iteration_cap;
  std::vector<bool> b_ht;
  std::vector<std::vector<HTSetpoint>> setpoints;    // [t][device]
  std::vector<std::vector<HTInjection>> injections;  // [t][device]
  std::vector<Vec> pdg;                              // [t] per DG, pu
  std::vector<Vec> psub;                             // [t] per slack phase, pu
  std::vector<OperatingPoint> points;                // re-simulated final flows
  std::vector<InjectionSet> final_injections;        // loads + accepted controls
  double npv = 0.0;
  double c_exp = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> trace;
};

// A scenario lowered to engine terms: everything per-unit, one uncontrollable
// InjectionSet per period matching the year model's period order.
struct ScenarioRun {
  const NetworkModel* model = nullptr;
  std::vector<HTDevice> devices;
  std::vector<DGSpec> dgs;
  LpWeights weights;
  TrustRegion trust;
  EconomicParams econ;
  YearModel year;
  std::vector<InjectionSet> period_loads;
  bool literal_penalty_signs = false;
};

class SlpEngine {
 public:
  SlpEngine(const ScenarioRun& run, SlpOptions options);

  // Full optimization with placement binaries.
  SlpResult optimize();

  // Reference income: the same loop maximizing annual export income with
  // every hybrid-transformer control fixed out; returns converged C_exp.
  double compute_reference(SlpResult* detail = nullptr);

 private:
  SlpResult run_loop(bool with_ht, bool npv_objective);

  const ScenarioRun& run_;
  SlpOptions opt_;
};

}  // namespace htslp
