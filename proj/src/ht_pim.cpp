#include "htslp/ht_pim.hpp"

#include <cmath>

namespace htslp {

void compensating_voltage(const HTSetpoint& setpoint, const Eigen::Vector3cd& v_i,
                          Eigen::Vector3d& e_pq, Eigen::Vector3d& f_pq) {
  for (int p = 0; p < 3; ++p) {
    const Complex v_pq =
        setpoint.r(p) * v_i(p) * std::exp(Complex(0.0, -setpoint.gamma(p)));
    e_pq(p) = v_pq.real();
    f_pq(p) = v_pq.imag();
  }
}

HTInjection injections_component_form(const HTDevice& device,
                                      const Eigen::Vector3d& e_pq,
                                      const Eigen::Vector3d& f_pq,
                                      const Eigen::Vector3cd& v_i,
                                      const Eigen::Vector3cd& v_j,
                                      const Eigen::Vector3d& q_sh) {
  HTInjection inj;
  inj.e_pq = e_pq;
  inj.f_pq = f_pq;
  inj.q_sh = q_sh;
  for (int p = 0; p < 3; ++p) {
    // Self terms of the tertiary line admittance only.
    const Complex y = 1.0 / device.z_ht(p);
    const double g = y.real();
    const double b = y.imag();
    const double ei = v_i(p).real(), fi = v_i(p).imag();
    const double ej = v_j(p).real(), fj = v_j(p).imag();
    const double ep = e_pq(p), fp = f_pq(p);

    inj.p_pri(p) = g * (-ei * ep - fi * fp) + b * (ei * fp - fi * ep);
    inj.q_pri(p) = g * (ei * fp - fi * ep) + b * (ei * ep + fi * fp);
    inj.p_se(p) = g * (ej * ep + fj * fp) + b * (fj * ep - ej * fp);
    inj.q_se(p) = g * (fj * ep - ej * fp) - b * (ej * ep + fj * fp);
    inj.p_sh(p) = g * (ep * ep + fp * fp + ei * ep - ej * ep + fi * fp - fj * fp) +
                  b * (ei * fp - ej * fp - fi * ep + fj * ep);
    inj.q_c(p) = g * (ei * fp - ej * fp - fi * ep + fj * ep) -
                 b * (ep * ep + fp * fp + ei * ep - ej * ep + fi * fp - fj * fp);

    const double cap2 = device.s_conv_max * device.s_conv_max - inj.p_sh(p) * inj.p_sh(p);
    if (cap2 < 0.0)
      throw CapabilityExceededError(
          "converter active exchange exceeds apparent power rating");
    inj.q_cap(p) = std::sqrt(cap2);

    inj.p_sec(p) = inj.p_se(p) - inj.p_sh(p);
    inj.q_sec(p) = inj.q_se(p) + inj.q_sh(p);
  }
  return inj;
}

HTComplexInjection injections_complex_form(const HTDevice& device,
                                           const HTSetpoint& setpoint,
                                           const Eigen::Vector3cd& v_i,
                                           const Eigen::Vector3cd& v_j) {
  HTComplexInjection out;
  for (int p = 0; p < 3; ++p) {
    const Complex v_pq =
        setpoint.r(p) * v_i(p) * std::exp(Complex(0.0, -setpoint.gamma(p)));
    const Complex z = device.z_ht(p);
    out.s_pri(p) = v_i(p) * std::conj(-v_pq / z);
    out.s_se(p) = v_j(p) * std::conj(v_pq / z);
    out.s_c(p) = std::abs(v_pq * std::conj((v_i(p) + v_pq - v_j(p)) / z));
  }
  return out;
}

AccuracyReport accuracy_check(const HTDevice& device, const HTInjection& prediction,
                              const Eigen::Vector3cd& v_i, const Eigen::Vector3cd& v_j,
                              double v_pq_tol_pct) {
  constexpr double kInactive = 1e-6;  // pu; below this a phase counts as off
  AccuracyReport rep;
  rep.pass = true;
  for (int p = 0; p < 3; ++p) {
    const Complex z = device.z_ht(p);
    const Complex s_pri(prediction.p_pri(p), prediction.q_pri(p));
    const Complex s_se(prediction.p_se(p), prediction.q_se(p));
    rep.v_pq1(p) = -z * std::conj(s_pri / v_i(p));
    rep.v_pq2(p) = z * std::conj(s_se / v_j(p));
    rep.v_pq_avg(p) = 0.5 * (rep.v_pq1(p) + rep.v_pq2(p));
    rep.v_pq_lp(p) = Complex(prediction.e_pq(p), prediction.f_pq(p));
    rep.s_c(p) = std::abs(rep.v_pq_avg(p) *
                          std::conj((v_i(p) + rep.v_pq_avg(p) - v_j(p)) / z));

    const double lp_mag = std::abs(rep.v_pq_lp(p));
    const double avg_mag = std::abs(rep.v_pq_avg(p));
    if (lp_mag < kInactive && avg_mag < kInactive) {
      rep.delta_pct(p) = 0.0;
    } else if (lp_mag < kInactive) {
      rep.inactive_mismatch[p] = true;
      rep.delta_pct(p) = std::numeric_limits<double>::infinity();
      rep.pass = false;
    } else {
      rep.delta_pct(p) = std::abs(rep.v_pq_avg(p) - rep.v_pq_lp(p)) / lp_mag * 100.0;
      if (rep.delta_pct(p) > v_pq_tol_pct) rep.pass = false;
    }
    if (rep.s_c(p) > device.s_conv_max) rep.pass = false;
  }
  return rep;
}

}  // namespace htslp
