#include "htslp/linear_model.hpp"

#include <fstream>
#include <iomanip>

#include <Eigen/SparseLU>

namespace htslp {

namespace {

SpCMat take_block(const SpCMat& y, const std::vector<int>& row_pos,
                  const std::vector<int>& col_pos, int nr, int nc) {
  std::vector<Eigen::Triplet<Complex>> trips;
  for (int k = 0; k < y.outerSize(); ++k)
    for (SpCMat::InnerIterator it(y, k); it; ++it) {
      const int r = row_pos[it.row()];
      const int c = col_pos[it.col()];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  SpCMat out(nr, nc);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

LinearNetworkModel derive_linear_model(const NetworkModel& model,
                                       const OperatingPoint& anchor,
                                       const InjectionSet& base_injections) {
  const int n = model.index.size();
  LinearNetworkModel lin;
  lin.anchor = anchor;
  lin.base = base_injections;
  lin.s_base_kva = model.s_base_kva;
  lin.v_base_volts = model.v_base_volts;

  lin.row_of_busphase.assign(n, -1);
  std::vector<int> slack_pos(n, -1);
  std::vector<int> s_rows;
  for (int i = 0; i < n; ++i) {
    if (model.index.bus_of(i) == model.slack_bus) {
      slack_pos[i] = static_cast<int>(s_rows.size());
      s_rows.push_back(i);
    } else {
      lin.row_of_busphase[i] = static_cast<int>(lin.rows.size());
      lin.rows.push_back(i);
    }
  }
  const int nl = lin.n_rows();
  const int ns = static_cast<int>(s_rows.size());

  const SpCMat y_ll =
      take_block(model.bus_admittance, lin.row_of_busphase, lin.row_of_busphase, nl, nl);
  const SpCMat y_sl =
      take_block(model.bus_admittance, slack_pos, lin.row_of_busphase, ns, nl);

  CVec v_hat(nl);
  for (int k = 0; k < nl; ++k) v_hat[k] = anchor.v[lin.rows[k]];
  if (v_hat.cwiseAbs().minCoeff() < 1e-3)
    throw ConditioningError("anchor voltage magnitude too small for linearization");

  // True tangent of the Z-bus fixed point at the anchor. The balance at a
  // non-slack bus-phase reads Y_LL v + Y_LS v_S = i(v, s); differentiating
  // gives A dv + B conj(dv) = r with A = Y_LL plus the Wirtinger terms of
  // the constant-power currents in B. Solved in stacked real form so every
  // injection column yields an exact first-order voltage sensitivity.
  const CVec s_wye_hat = -base_injections.total_wye();    // injection convention
  const CVec s_delta_hat = -base_injections.total_delta();

  std::vector<Eigen::Triplet<double>> jt;
  const auto add_complex = [&](int r, int c, Complex a, Complex b) {
    // contribution a*dv_c + b*conj(dv_c) to residual row r
    if (a != Complex(0, 0) || b != Complex(0, 0)) {
      jt.emplace_back(r, c, a.real() + b.real());
      jt.emplace_back(r, nl + c, -a.imag() + b.imag());
      jt.emplace_back(nl + r, c, a.imag() + b.imag());
      jt.emplace_back(nl + r, nl + c, a.real() - b.real());
    }
  };
  for (int k = 0; k < y_ll.outerSize(); ++k)
    for (SpCMat::InnerIterator it(y_ll, k); it; ++it)
      add_complex(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value(),
                  Complex(0, 0));
  for (int k = 0; k < nl; ++k) {
    const Complex shat = s_wye_hat[lin.rows[k]];
    if (shat != Complex(0, 0))
      add_complex(k, k, Complex(0, 0),
                  std::conj(shat) / (std::conj(v_hat[k]) * std::conj(v_hat[k])));
  }
  struct DeltaPairInfo {
    int row_p, row_q;
    Complex u;
  };
  std::vector<DeltaPairInfo> pairs(nl, {-1, -1, Complex(0, 0)});
  for (int c = 0; c < nl; ++c) {
    const int bp = lin.rows[c];
    const int bus = model.index.bus_of(bp);
    const int p = model.index.phase_of(bp);
    const int q = (p + 1) % 3;
    if (!model.index.has(bus, q)) continue;
    const int bq = model.index.at(bus, q);
    if (lin.row_of_busphase[bq] < 0) continue;
    const Complex u = anchor.v[bp] - anchor.v[bq];
    if (std::abs(u) < 1e-6) continue;
    pairs[c] = {c, lin.row_of_busphase[bq], u};
    const Complex shat = s_delta_hat[bp];
    if (shat != Complex(0, 0)) {
      const Complex b = std::conj(shat) / (std::conj(u) * std::conj(u));
      // d i = -b conj(d u) scattered +p / -q; moved to the left-hand side.
      add_complex(pairs[c].row_p, pairs[c].row_p, Complex(0, 0), b);
      add_complex(pairs[c].row_p, pairs[c].row_q, Complex(0, 0), -b);
      add_complex(pairs[c].row_q, pairs[c].row_p, Complex(0, 0), -b);
      add_complex(pairs[c].row_q, pairs[c].row_q, Complex(0, 0), b);
    }
  }
  SpMat jac(2 * nl, 2 * nl);
  jac.setFromTriplets(jt.begin(), jt.end());
  Eigen::SparseLU<SpMat> jlu;
  jlu.compute(jac);
  if (jlu.info() != Eigen::Success)
    throw ConditioningError("power-flow Jacobian is singular at the anchor");

  // Injection columns: r = d i / d(load component), load convention.
  const auto solve_column = [&](const CVec& r) {
    Vec rhs_ri(2 * nl);
    rhs_ri.head(nl) = r.real();
    rhs_ri.tail(nl) = r.imag();
    const Vec dv = jlu.solve(rhs_ri);
    CVec out(nl);
    out.real() = dv.head(nl);
    out.imag() = dv.tail(nl);
    return out;
  };

  CMat m_wye_pu(nl, 2 * nl), m_delta_pu(nl, 2 * nl);
  const Complex j1(0.0, 1.0);
  for (int k = 0; k < nl; ++k) {
    CVec r = CVec::Zero(nl);
    r[k] = -1.0 / std::conj(v_hat[k]);  // d conj(s_inj)/d p = -1
    const CVec col_p = solve_column(r);
    r[k] = j1 / std::conj(v_hat[k]);    // d conj(s_inj)/d q = +j
    const CVec col_q = solve_column(r);
    m_wye_pu.col(k) = col_p;
    m_wye_pu.col(nl + k) = col_q;
  }
  for (int k = 0; k < nl; ++k) {
    if (pairs[k].row_p < 0) {
      m_delta_pu.col(k).setZero();
      m_delta_pu.col(nl + k).setZero();
      continue;
    }
    CVec r = CVec::Zero(nl);
    const Complex gp = 1.0 / std::conj(pairs[k].u);
    r[pairs[k].row_p] = -gp;
    r[pairs[k].row_q] = gp;
    const CVec col_p = solve_column(r);
    r[pairs[k].row_p] = j1 * gp;
    r[pairs[k].row_q] = -j1 * gp;
    const CVec col_q = solve_column(r);
    m_delta_pu.col(k) = col_p;
    m_delta_pu.col(nl + k) = col_q;
  }

  const double unit_v = model.v_base_volts / model.s_base_kva;
  lin.m_wye = unit_v * m_wye_pu;
  lin.m_delta = unit_v * m_delta_pu;

  // Slack export is exactly affine in v_L: s_exp = -v_S o conj(Y_SS v_S + Y_SL v_L).
  CVec v_s(ns);
  for (int k = 0; k < ns; ++k) v_s[k] = anchor.v[s_rows[k]];
  lin.a_wye = -(v_s.asDiagonal() * (y_sl.conjugate() * m_wye_pu.conjugate()));
  lin.a_delta = -(v_s.asDiagonal() * (y_sl.conjugate() * m_delta_pu.conjugate()));

  // Magnitude model from the exact gradient of |v| at the anchor.
  lin.k_wye.resize(nl, 2 * nl);
  lin.k_delta.resize(nl, 2 * nl);
  for (int r = 0; r < nl; ++r) {
    const Complex g = std::conj(v_hat[r]) / std::abs(v_hat[r]);
    lin.k_wye.row(r) = (g * lin.m_wye.row(r)).real();
    lin.k_delta.row(r) = (g * lin.m_delta.row(r)).real();
  }

  // Anchor the zero-order terms so the model is exact at its own injections.
  const Vec x_wye = stack_injections(lin, base_injections.total_wye());
  const Vec x_delta = stack_injections(lin, base_injections.total_delta());
  const double sb = model.s_base_kva;
  lin.m0 = model.v_base_volts * v_hat - lin.m_wye * (x_wye * sb) -
           lin.m_delta * (x_delta * sb);
  lin.k0 = model.v_base_volts * v_hat.cwiseAbs() - lin.k_wye * (x_wye * sb) -
           lin.k_delta * (x_delta * sb);

  CVec s_exp(ns);
  for (int k = 0; k < ns; ++k)
    s_exp[k] = Complex(anchor.p_sub[k], anchor.q_sub[k]);
  lin.a0 = sb * s_exp - lin.a_wye * (x_wye * sb) - lin.a_delta * (x_delta * sb);

  return lin;
}

void dump_linear_model(const LinearNetworkModel& lin, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidParameterError("cannot write " + path);
  out << std::setprecision(17);
  const auto complex_block = [&](const char* name, const CMat& m) {
    out << name << " " << m.rows() << " " << m.cols() << "\n";
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c)
        out << (c ? " " : "") << m(r, c).real() << (m(r, c).imag() < 0 ? "" : "+")
            << m(r, c).imag() << "j";
      out << "\n";
    }
  };
  const auto real_block = [&](const char* name, const Mat& m) {
    out << name << " " << m.rows() << " " << m.cols() << "\n";
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
      out << "\n";
    }
  };
  complex_block("m0", lin.m0);
  complex_block("m_wye", lin.m_wye);
  complex_block("m_delta", lin.m_delta);
  real_block("k0", lin.k0);
  real_block("k_wye", lin.k_wye);
  real_block("k_delta", lin.k_delta);
  complex_block("a0", lin.a0);
  complex_block("a_wye", lin.a_wye);
  complex_block("a_delta", lin.a_delta);
}

Vec stack_injections(const LinearNetworkModel& lin, const CVec& per_busphase) {
  const int nl = lin.n_rows();
  Vec out = Vec::Zero(2 * nl);
  for (int k = 0; k < nl; ++k) {
    out[k] = per_busphase[lin.rows[k]].real();
    out[nl + k] = per_busphase[lin.rows[k]].imag();
  }
  return out;
}

LinearPrediction predict(const LinearNetworkModel& lin, const CVec& dx_wye,
                         const CVec& dx_delta, const CVec& dx_ht_scaled, double md,
                         double s_base_kva, double v_base_volts) {
  const Vec l00 = stack_injections(lin, lin.base.x_wye) + stack_injections(lin, dx_wye) +
                  md * stack_injections(lin, dx_ht_scaled);
  const Vec l01 = stack_injections(lin, lin.base.x_delta) + stack_injections(lin, dx_delta);

  const CVec v = (lin.m0 + lin.m_wye * (l00 * s_base_kva) +
                  lin.m_delta * (l01 * s_base_kva)) /
                 v_base_volts;
  LinearPrediction out;
  out.e = v.real();
  out.f = v.imag();
  out.v_mag = (lin.k0 + lin.k_wye * (l00 * s_base_kva) +
               lin.k_delta * (l01 * s_base_kva)) /
              v_base_volts;
  out.p_sub = ((lin.a0 + lin.a_wye * (l00 * s_base_kva) +
                lin.a_delta * (l01 * s_base_kva)) /
               s_base_kva)
                  .real();
  return out;
}

}  // namespace htslp
