// Hybrid-transformer power-injection model: per-phase compensating voltage,
// the component-form power injections, their compact complex-form
// equivalents, and the post-solve accuracy computations used by the outer
// optimization loop. All functions are pure.
#pragma once

#include <array>

#include "htslp/network.hpp"

namespace htslp {

struct HTSetpoint {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();      // compensation magnitude coefficient
  Eigen::Vector3d gamma = Eigen::Vector3d::Zero();  // phase shift, radians
};

// Per-phase outputs of the injection model, per-unit.
struct HTInjection {
  Eigen::Vector3d e_pq = Eigen::Vector3d::Zero();
  Eigen::Vector3d f_pq = Eigen::Vector3d::Zero();
  Eigen::Vector3d p_pri = Eigen::Vector3d::Zero();
  Eigen::Vector3d q_pri = Eigen::Vector3d::Zero();
  Eigen::Vector3d p_se = Eigen::Vector3d::Zero();
  Eigen::Vector3d q_se = Eigen::Vector3d::Zero();
  Eigen::Vector3d p_sh = Eigen::Vector3d::Zero();   // series<->shunt active exchange
  Eigen::Vector3d q_c = Eigen::Vector3d::Zero();    // series converter reactive power
  Eigen::Vector3d q_sh = Eigen::Vector3d::Zero();   // shunt converter reactive output
  Eigen::Vector3d p_sec = Eigen::Vector3d::Zero();
  Eigen::Vector3d q_sec = Eigen::Vector3d::Zero();
  Eigen::Vector3d q_cap = Eigen::Vector3d::Zero();  // converter reactive capability bound
};

class CapabilityExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Compensating voltage components: e + jf = r * v_i * exp(-j*gamma).
void compensating_voltage(const HTSetpoint& setpoint, const Eigen::Vector3cd& v_i,
                          Eigen::Vector3d& e_pq, Eigen::Vector3d& f_pq);

// Component-form injections from the compensating voltage and the two bus
// voltages. q_sh is the free shunt-converter control (zero when not given);
// it only feeds q_sec. Throws CapabilityExceededError when |p_sh| exceeds
// the converter rating and the capability bound turns imaginary.
HTInjection injections_component_form(const HTDevice& device,
                                      const Eigen::Vector3d& e_pq,
                                      const Eigen::Vector3d& f_pq,
                                      const Eigen::Vector3cd& v_i,
                                      const Eigen::Vector3cd& v_j,
                                      const Eigen::Vector3d& q_sh = Eigen::Vector3d::Zero());

// Compact complex-arithmetic equivalents; the in-repo oracle for the
// component form.
struct HTComplexInjection {
  Eigen::Vector3cd s_pri;
  Eigen::Vector3cd s_se;
  Eigen::Vector3d s_c;  // series converter apparent power
};
HTComplexInjection injections_complex_form(const HTDevice& device,
                                           const HTSetpoint& setpoint,
                                           const Eigen::Vector3cd& v_i,
                                           const Eigen::Vector3cd& v_j);

struct AccuracyReport {
  Eigen::Vector3cd v_pq1 = Eigen::Vector3cd::Zero();
  Eigen::Vector3cd v_pq2 = Eigen::Vector3cd::Zero();
  Eigen::Vector3cd v_pq_avg = Eigen::Vector3cd::Zero();
  Eigen::Vector3cd v_pq_lp = Eigen::Vector3cd::Zero();
  Eigen::Vector3d delta_pct = Eigen::Vector3d::Zero();
  Eigen::Vector3d s_c = Eigen::Vector3d::Zero();
  // Set when the LP predicted no compensation on a phase but the simulated
  // voltages imply some; the percentage test is undefined there.
  std::array<bool, 3> inactive_mismatch = {false, false, false};
  bool pass = false;
};

// Compares the compensating voltage the LP predicted against the voltage
// implied by the re-simulated operating point, and checks the series
// converter loading. prediction carries the LP values in true (unscaled)
// per-unit. Phases where both voltages are below 1e-6 pu pass trivially.
AccuracyReport accuracy_check(const HTDevice& device, const HTInjection& prediction,
                              const Eigen::Vector3cd& v_i, const Eigen::Vector3cd& v_j,
                              double v_pq_tol_pct);

}  // namespace htslp
