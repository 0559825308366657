// Builds the per-iteration placement/coordination MILP: linear network rows
// for voltages and slack export, DG box/step/power-factor/balance rows,
// Taylor-expanded hybrid-transformer injection rows around the nominal
// point, converter capability linearization with its shrink factor,
// absolute-value epigraphs, and the binary installation coupling. The
// objective is discounted export income net of investment, minus weighted
// compensation penalties.
#pragma once

#include <optional>

#include "htslp/economics.hpp"
#include "htslp/ht_pim.hpp"
#include "htslp/linear_model.hpp"
#include "htslp/lp_problem.hpp"

namespace htslp {

struct LpWeights {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
  double c2 = 0.001;  // scales compensation sums into [0, 1]
};

struct TrustRegion {
  Vec stp_dg;      // per DG, pu (same base as the DG variables)
  double stp_v = 0.05;
  double stp_gamma = 0.1 * kPi;
  Vec stp_dg_min;  // per DG, pu

  void halve() {
    stp_dg *= 0.5;
    stp_v *= 0.5;
    stp_gamma *= 0.5;
  }
  bool below_floor() const {
    for (int i = 0; i < stp_dg.size(); ++i)
      if (stp_dg[i] < stp_dg_min[i]) return true;
    return false;
  }
};

struct DGSpec {
  std::string id;
  int bus = -1;
  double p_max = 0.0;  // per-phase cap, pu
  double power_factor = 1.0;
  bool is_delta = false;
};

// Nominal-point constants of one device for one period.
struct HTNominal {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  Eigen::Vector3d gamma = Eigen::Vector3d::Zero();
  Eigen::Vector3d e_pq = Eigen::Vector3d::Zero();
  Eigen::Vector3d f_pq = Eigen::Vector3d::Zero();
  Eigen::Vector3d p_sh = Eigen::Vector3d::Zero();
  Eigen::Vector3cd v_i = Eigen::Vector3cd::Zero();
  Eigen::Vector3cd v_j = Eigen::Vector3cd::Zero();
};

struct PeriodInput {
  const LinearNetworkModel* lin = nullptr;
  double weight_hours = 0.0;       // hours of the year this period stands for
  std::vector<HTNominal> ht;       // one per device
  Vec pdg_k;                       // nominal DG output per DG, pu per phase
};

struct LpBuildInputs {
  const NetworkModel* model = nullptr;
  std::vector<PeriodInput> periods;
  std::vector<HTDevice> devices;
  std::vector<DGSpec> dgs;
  LpWeights weights;
  TrustRegion trust;
  double annuity = 1.0;
  double c_e = 0.0;
  double c_ref = 0.0;
  std::vector<double> invest_costs;
  bool include_ht = true;
  bool npv_objective = true;       // false: maximize annual income only
  bool literal_penalty_signs = false;
};

// Variable ids for extraction; [period][device][phase] etc.
struct HtLpIndex {
  int n_periods = 0, n_devices = 0, n_dgs = 0;
  std::vector<std::vector<int>> vmag;            // [t][lin row]
  std::vector<std::vector<std::array<int, 3>>> e_i, f_i, e_j, f_j;  // [t][ht]
  std::vector<std::array<int, 3>> psub;          // [t]
  std::vector<std::vector<std::array<int, 3>>> pdg, qdg;            // [t][dg]
  std::vector<std::vector<std::array<int, 3>>> dxp_dg, dxq_dg;      // [t][dg]
  std::vector<std::vector<std::array<int, 3>>> dxp_ht_i, dxq_ht_i;  // [t][ht]
  std::vector<std::vector<std::array<int, 3>>> dxp_ht_j, dxq_ht_j;
  struct HtVars {
    std::array<int, 3> r, gamma, epq, fpq, eabs, fabs, gabs, ppri, qpri, pse, qse,
        psh, qcap, qsh, qabs, qc, psec, qsec;
  };
  std::vector<std::vector<HtVars>> ht;           // [t][device]
  std::vector<int> b;                            // [device]
};

class LpBuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BuiltLp {
  LpProblem problem;
  HtLpIndex index;
};

BuiltLp build_ht_lp(const LpBuildInputs& in);

struct HtLpSolution {
  double objective = 0.0;
  double c_exp = 0.0;  // annual export income implied by the LP exports
  double npv = 0.0;    // before compensation penalties
  std::vector<bool> b_ht;
  std::vector<std::vector<HTSetpoint>> setpoints;    // [t][device]
  std::vector<std::vector<HTInjection>> injections;  // [t][device], true units
  std::vector<Vec> pdg;                              // [t], per DG (balanced)
  std::vector<Vec> psub;                             // [t], per slack phase
  std::vector<CVec> dx_wye, dx_delta, dx_ht;         // [t], per bus-phase, true units
};

// `values` is the solver's variable vector for the problem built from `in`.
HtLpSolution extract_solution(const LpBuildInputs& in, const HtLpIndex& index,
                              const Vec& values, double objective);

}  // namespace htslp
