#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "htslp/powerflow.hpp"

using namespace htslp;

namespace {

double max_power_mismatch(const NetworkModel& model, const OperatingPoint& point,
                          const InjectionSet& inj) {
  const CVec i = model.bus_admittance * point.v;
  double worst = 0.0;
  const CVec tot_wye = inj.total_wye();
  const CVec tot_delta = inj.total_delta();
  for (int k = 0; k < model.index.size(); ++k) {
    if (model.index.bus_of(k) == model.slack_bus) continue;
    Complex s_spec = -tot_wye[k];
    // Delta elements: this phase's pair draws from (p, p+1).
    const int bus = model.index.bus_of(k);
    const int p = model.index.phase_of(k);
    const int q_ph = (p + 1) % 3;
    const int prev = (p + 2) % 3;
    if (model.index.has(bus, q_ph) && tot_delta[k] != Complex(0, 0)) {
      const Complex u = point.v[k] - point.v[model.index.at(bus, q_ph)];
      s_spec += point.v[k] * std::conj(std::conj(-tot_delta[k]) / std::conj(u));
    }
    if (model.index.has(bus, prev)) {
      const int kp = model.index.at(bus, prev);
      if (tot_delta[kp] != Complex(0, 0)) {
        const Complex u = point.v[kp] - point.v[k];
        s_spec -= point.v[k] * std::conj(std::conj(-tot_delta[kp]) / std::conj(u));
      }
    }
    worst = std::max(worst, std::abs(point.v[k] * std::conj(i[k]) - s_spec));
  }
  return worst;
}

}  // namespace

TEST_CASE("zero injections give the no-load solution") {
  const auto model = testing::make_two_bus(1.0 / Complex(0.0, 0.05));
  const auto point = solve_zbus(model, InjectionSet::zeros(model.index.size()));
  for (int k = 0; k < model.index.size(); ++k)
    CHECK(std::abs(point.v[k] - model.slack_voltage(model.index.phase_of(k))) < 1e-12);
  CHECK(std::abs(point.p_sub.sum()) < 1e-9);  // losses only, and there are none
}

TEST_CASE("two-bus wye load matches the closed-form quadratic") {
  const Complex y = 1.0 / Complex(0.0, 0.05);
  const Complex s_load(0.1, 0.05);
  const auto model = testing::make_two_bus(y);

  auto inj = InjectionSet::zeros(model.index.size());
  for (int p = 0; p < 3; ++p) inj.x_wye[model.index.at(1, p)] = s_load;

  const auto point = solve_zbus(model, inj);
  const Complex expected = testing::two_bus_closed_form(y, s_load);
  for (int p = 0; p < 3; ++p) {
    const Complex rotated = expected * model.slack_voltage(p);
    CHECK(std::abs(point.v[model.index.at(1, p)] - rotated) < 1e-9);
  }
}

TEST_CASE("power mismatch residual is tiny at the fixed point") {
  const auto model = testing::make_three_bus(1.0 / Complex(0.01, 0.05), 1.0 / Complex(0.02, 0.04));
  auto inj = InjectionSet::zeros(model.index.size());
  for (int p = 0; p < 3; ++p) {
    inj.x_wye[model.index.at(1, p)] = Complex(0.3, 0.1);
    inj.x_wye[model.index.at(2, p)] = Complex(0.2, 0.05);
    inj.dx_wye[model.index.at(2, p)] = Complex(-0.4, 0.0);  // a generator
  }
  const auto point = solve_zbus(model, inj);
  CHECK(max_power_mismatch(model, point, inj) < 1e-8);
}

TEST_CASE("slack power balances loads plus series losses") {
  const auto model = testing::make_three_bus(1.0 / Complex(0.01, 0.05), 1.0 / Complex(0.02, 0.04));
  auto inj = InjectionSet::zeros(model.index.size());
  for (int p = 0; p < 3; ++p) {
    inj.x_wye[model.index.at(1, p)] = Complex(0.25, 0.12);
    inj.x_wye[model.index.at(2, p)] = Complex(0.1, 0.02);
  }
  const auto point = solve_zbus(model, inj);

  // Independent loss route: per-branch absorbed power from the voltages.
  Complex losses(0, 0);
  for (const auto& br : model.branches) {
    const int bf = model.bus_index(br.from);
    const int bt = model.bus_index(br.to);
    for (int p = 0; p < 3; ++p) {
      for (int q = 0; q < 3; ++q) {
        const Complex y = br.phase_admittance(p, q);
        if (y == Complex(0, 0)) continue;
        const Complex du = point.v[model.index.at(bf, q)] - point.v[model.index.at(bt, q)];
        const Complex i_pq = y * du;
        losses += (point.v[model.index.at(bf, p)] - point.v[model.index.at(bt, p)]) *
                  std::conj(i_pq);
      }
    }
  }

  const Complex slack_inj = slack_power(model, point).sum();
  const Complex total_load = inj.x_wye.sum();
  CHECK(std::abs(slack_inj - total_load - losses) < 1e-7);
  // Export convention: a net-consuming network means negative export.
  CHECK(point.p_sub.sum() < 0.0);
}

TEST_CASE("delta load draws the same total power as its wye equivalent") {
  const auto model = testing::make_two_bus(1.0 / Complex(0.005, 0.02));
  const Complex s(0.15, 0.07);

  auto wye = InjectionSet::zeros(model.index.size());
  auto delta = InjectionSet::zeros(model.index.size());
  for (int p = 0; p < 3; ++p) {
    wye.x_wye[model.index.at(1, p)] = s;
    delta.x_delta[model.index.at(1, p)] = s;
  }
  const auto pt_w = solve_zbus(model, wye);
  const auto pt_d = solve_zbus(model, delta);
  CHECK(std::abs(pt_w.p_sub.sum() - pt_d.p_sub.sum()) < 1e-6);
  CHECK(max_power_mismatch(model, pt_d, delta) < 1e-8);
}

TEST_CASE("solver output is deterministic") {
  const auto model = testing::make_three_bus(1.0 / Complex(0.01, 0.05), 1.0 / Complex(0.02, 0.04));
  auto inj = InjectionSet::zeros(model.index.size());
  for (int p = 0; p < 3; ++p) inj.x_wye[model.index.at(2, p)] = Complex(0.31, 0.13);
  const auto a = solve_zbus(model, inj);
  const auto b = solve_zbus(model, inj);
  for (int k = 0; k < model.index.size(); ++k) CHECK(a.v[k] == b.v[k]);
}

TEST_CASE("divergence reports the last residual") {
  const auto model = testing::make_two_bus(1.0 / Complex(0.0, 0.5));
  auto inj = InjectionSet::zeros(model.index.size());
  for (int p = 0; p < 3; ++p) inj.x_wye[model.index.at(1, p)] = Complex(5.0, 2.0);
  CHECK_THROWS_AS(solve_zbus(model, inj), PowerflowDivergenceError);
}

TEST_CASE("voltage feasibility rounding") {
  CHECK(round_half_away(1.1049, 2) == doctest::Approx(1.10));
  CHECK(round_half_away(1.105, 2) == doctest::Approx(1.11));
  CHECK(round_half_away(-1.105, 2) == doctest::Approx(-1.11));

  const auto model = testing::make_two_bus(Complex(1.0, -1.0));
  OperatingPoint point;
  point.v = CVec::Zero(model.index.size());
  for (int p = 0; p < 3; ++p) point.v[model.index.at(0, p)] = model.slack_voltage(p);

  auto set_mag = [&](double mag) {
    for (int p = 0; p < 3; ++p)
      point.v[model.index.at(1, p)] = mag * model.slack_voltage(p);
  };

  set_mag(1.1049);
  CHECK(check_voltage_feasibility(model, point, 0.9, 1.1, 2).empty());
  set_mag(1.105);
  CHECK(check_voltage_feasibility(model, point, 0.9, 1.1, 2).size() == 3);
  set_mag(0.90);
  CHECK(check_voltage_feasibility(model, point, 0.9, 1.1, 2).empty());
}
