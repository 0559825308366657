// Z-bus fixed-point power flow for multiphase networks with wye and delta
// constant-power loads. Injection vectors follow the load convention used by
// the LP stacks: consumption positive, so generation shows up as negative
// entries. Slack export is positive when power flows up to the grid.
#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "htslp/network.hpp"

namespace htslp {

struct OperatingPoint {
  CVec v;     // complex phase voltage per bus-phase (slack included), pu
  Vec e, f;   // real/imaginary parts of v
  Vec p_sub;  // slack active power per phase, export-positive, pu
  Vec q_sub;  // slack reactive power per phase, same sign convention
};

// Per-bus-phase complex powers, load convention (consumption positive).
// Delta entries at (bus, phase p) denote the element between phases p and
// (p+1) mod 3 of that bus.
struct InjectionSet {
  CVec x_wye;     // uncontrollable wye loads
  CVec x_delta;   // uncontrollable delta loads
  CVec dx_wye;    // controllable wye injections (DG output appears negative)
  CVec dx_delta;  // controllable delta injections
  CVec dx_ht;     // hybrid-transformer power injections, true (unscaled) units

  static InjectionSet zeros(int n);
  CVec total_wye() const { return x_wye + dx_wye + dx_ht; }
  CVec total_delta() const { return x_delta + dx_delta; }
};

class PowerflowDivergenceError : public std::runtime_error {
 public:
  PowerflowDivergenceError(const std::string& what, double residual)
      : std::runtime_error(what), last_residual(residual) {}
  double last_residual;
};

struct ZbusOptions {
  double tolerance = 1e-10;  // complex-power mismatch, pu
  int max_iterations = 200;
  bool trace_residuals = false;  // dump per-iteration residuals to stderr
};

// Caches the Y_LL factorization of an immutable network; cheap to call many
// times per period. Stateless with respect to solve() calls.
class ZbusSolver {
 public:
  explicit ZbusSolver(const NetworkModel& model, ZbusOptions options = {});
  ~ZbusSolver();
  ZbusSolver(ZbusSolver&&) noexcept;

  OperatingPoint solve(const InjectionSet& injections,
                       const std::optional<OperatingPoint>& start = std::nullopt) const;

  // Zero-load solution (slack voltage propagated through the passive network).
  const OperatingPoint& flat_start() const;

  const NetworkModel& model() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

OperatingPoint solve_zbus(const NetworkModel& model, const InjectionSet& injections,
                          const std::optional<OperatingPoint>& start = std::nullopt,
                          ZbusOptions options = {});

// Slack-bus complex power per phase: voltage times conjugated current
// injected into the network by the grid (import-positive).
CVec slack_power(const NetworkModel& model, const OperatingPoint& point);

struct VoltageViolation {
  int bus;
  int phase;
  double magnitude;
  double rounded;
};

// A bus-phase violates iff its magnitude, rounded half-away-from-zero to
// `rounding_decimals` places, lies outside [v_min, v_max]. Bounds inclusive.
std::vector<VoltageViolation> check_voltage_feasibility(const NetworkModel& model,
                                                        const OperatingPoint& point,
                                                        double v_min, double v_max,
                                                        int rounding_decimals);

double round_half_away(double x, int decimals);

}  // namespace htslp
