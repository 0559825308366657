// Small hand-built networks shared across test files.
#pragma once

#include "htslp/network.hpp"
#include "htslp/powerflow.hpp"

namespace htslp::testing {

// Slack bus feeding one load bus through a three-phase line with diagonal
// per-phase admittance y.
inline NetworkModel make_two_bus(Complex y_line) {
  Bus slack;
  slack.id = "S";
  slack.role = BusRole::slack;
  Bus load;
  load.id = "L";
  load.role = BusRole::load;

  LineBranch line;
  line.id = "S_L";
  line.from = "S";
  line.to = "L";
  for (int p = 0; p < 3; ++p) line.phase_admittance(p, p) = y_line;

  return make_network({slack, load}, {line}, 166.67, 230.94, 0.9, 1.1);
}

// Slack -> B1 -> B2 radial feeder, diagonal lines.
inline NetworkModel make_three_bus(Complex y1, Complex y2) {
  Bus slack;
  slack.id = "S";
  slack.role = BusRole::slack;
  Bus b1;
  b1.id = "B1";
  Bus b2;
  b2.id = "B2";

  LineBranch l1;
  l1.id = "S_B1";
  l1.from = "S";
  l1.to = "B1";
  LineBranch l2;
  l2.id = "B1_B2";
  l2.from = "B1";
  l2.to = "B2";
  for (int p = 0; p < 3; ++p) {
    l1.phase_admittance(p, p) = y1;
    l2.phase_admittance(p, p) = y2;
  }
  return make_network({slack, b1, b2}, {l1, l2}, 166.67, 230.94, 0.9, 1.1);
}

// Closed-form single-line constant-power solution in the slack-rotated
// frame; valid per phase for diagonal lines and wye loads.
inline Complex two_bus_closed_form(Complex y_line, Complex s_load) {
  const Complex beta = -s_load / std::conj(y_line);
  const double fi = -beta.imag();
  const double disc = 1.0 - 4.0 * (fi * fi - beta.real());
  const double x = 0.5 * (1.0 + std::sqrt(disc));
  return {x, fi};
}

}  // namespace htslp::testing
