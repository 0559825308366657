#include "htslp/powerflow.hpp"

#include <cmath>
#include <iostream>

#include <Eigen/SparseLU>

namespace htslp {

InjectionSet InjectionSet::zeros(int n) {
  InjectionSet s;
  s.x_wye = CVec::Zero(n);
  s.x_delta = CVec::Zero(n);
  s.dx_wye = CVec::Zero(n);
  s.dx_delta = CVec::Zero(n);
  s.dx_ht = CVec::Zero(n);
  return s;
}

struct ZbusSolver::Impl {
  const NetworkModel* model;
  ZbusOptions options;
  std::vector<int> l_rows;            // non-slack bus-phase indices
  std::vector<int> s_rows;            // slack bus-phase indices
  std::vector<int> pos_in_l;          // bus-phase index -> position in l_rows, or -1
  SpCMat y_ll, y_ls, y_sl, y_ss;
  Eigen::SparseLU<SpCMat> lu;
  CVec v_slack;
  CVec w;  // zero-load voltages on L
  OperatingPoint flat;

  // Delta pairs: (row of phase p, row of phase p+1) for every bus-phase that
  // can host a delta element.
  struct DeltaPair {
    int lp;  // position in L of leading phase (-1 when it is the slack; not allowed)
    int lq;
  };
  std::vector<DeltaPair> delta_pairs;  // indexed by bus-phase index, lp=-2 if absent
};

namespace {

SpCMat submatrix(const SpCMat& y, const std::vector<int>& rows,
                 const std::vector<int>& cols, const std::vector<int>& row_pos,
                 const std::vector<int>& col_pos) {
  std::vector<Eigen::Triplet<Complex>> trips;
  for (int k = 0; k < y.outerSize(); ++k)
    for (SpCMat::InnerIterator it(y, k); it; ++it) {
      const int rp = row_pos[it.row()];
      const int cp = col_pos[it.col()];
      if (rp >= 0 && cp >= 0) trips.emplace_back(rp, cp, it.value());
    }
  SpCMat out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

ZbusSolver::ZbusSolver(const NetworkModel& model, ZbusOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->model = &model;
  impl_->options = options;

  const int n = model.index.size();
  impl_->pos_in_l.assign(n, -1);
  std::vector<int> pos_in_s(n, -1);
  for (int i = 0; i < n; ++i) {
    if (model.index.bus_of(i) == model.slack_bus) {
      pos_in_s[i] = static_cast<int>(impl_->s_rows.size());
      impl_->s_rows.push_back(i);
    } else {
      impl_->pos_in_l[i] = static_cast<int>(impl_->l_rows.size());
      impl_->l_rows.push_back(i);
    }
  }

  impl_->y_ll = submatrix(model.bus_admittance, impl_->l_rows, impl_->l_rows,
                          impl_->pos_in_l, impl_->pos_in_l);
  impl_->y_ls = submatrix(model.bus_admittance, impl_->l_rows, impl_->s_rows,
                          impl_->pos_in_l, pos_in_s);
  impl_->y_sl = submatrix(model.bus_admittance, impl_->s_rows, impl_->l_rows,
                          pos_in_s, impl_->pos_in_l);
  impl_->y_ss = submatrix(model.bus_admittance, impl_->s_rows, impl_->s_rows,
                          pos_in_s, pos_in_s);

  impl_->lu.compute(impl_->y_ll);
  if (impl_->lu.info() != Eigen::Success)
    throw TopologyError("bus admittance Y_LL factorization failed (floating island?)");

  impl_->v_slack = CVec::Zero(static_cast<int>(impl_->s_rows.size()));
  for (std::size_t k = 0; k < impl_->s_rows.size(); ++k)
    impl_->v_slack[k] = model.slack_voltage(model.index.phase_of(impl_->s_rows[k]));

  impl_->w = impl_->lu.solve(CVec(-(impl_->y_ls * impl_->v_slack)));

  impl_->delta_pairs.assign(n, {-2, -2});
  for (int i = 0; i < n; ++i) {
    const int bus = model.index.bus_of(i);
    if (bus == model.slack_bus) continue;
    const int p = model.index.phase_of(i);
    const int q = (p + 1) % 3;
    if (model.index.has(bus, q) && model.index.bus_of(model.index.at(bus, q)) != model.slack_bus)
      impl_->delta_pairs[i] = {impl_->pos_in_l[i], impl_->pos_in_l[model.index.at(bus, q)]};
  }

  // Flat start = zero-load solution.
  impl_->flat.v = CVec::Zero(n);
  for (std::size_t k = 0; k < impl_->s_rows.size(); ++k)
    impl_->flat.v[impl_->s_rows[k]] = impl_->v_slack[k];
  for (std::size_t k = 0; k < impl_->l_rows.size(); ++k)
    impl_->flat.v[impl_->l_rows[k]] = impl_->w[k];
  impl_->flat.e = impl_->flat.v.real();
  impl_->flat.f = impl_->flat.v.imag();
  const CVec s = slack_power(model, impl_->flat);
  impl_->flat.p_sub = -s.real();
  impl_->flat.q_sub = -s.imag();
}

ZbusSolver::~ZbusSolver() = default;
ZbusSolver::ZbusSolver(ZbusSolver&&) noexcept = default;

const OperatingPoint& ZbusSolver::flat_start() const { return impl_->flat; }
const NetworkModel& ZbusSolver::model() const { return *impl_->model; }

OperatingPoint ZbusSolver::solve(const InjectionSet& injections,
                                 const std::optional<OperatingPoint>& start) const {
  const NetworkModel& model = *impl_->model;
  const int n = model.index.size();
  const int nl = static_cast<int>(impl_->l_rows.size());
  if (injections.x_wye.size() != n)
    throw InvalidParameterError("injection vector size does not match network");

  // Net injected power (generation positive) on L rows.
  const CVec tot_wye = injections.total_wye();
  const CVec tot_delta = injections.total_delta();
  CVec s_wye = CVec::Zero(nl);
  for (int i = 0; i < n; ++i)
    if (impl_->pos_in_l[i] >= 0) s_wye[impl_->pos_in_l[i]] = -tot_wye[i];

  struct DeltaInj {
    int lp, lq;
    Complex s;
  };
  std::vector<DeltaInj> deltas;
  for (int i = 0; i < n; ++i) {
    if (tot_delta[i] == Complex(0, 0)) continue;
    const auto& pair = impl_->delta_pairs[i];
    if (pair.lp < 0)
      throw InvalidParameterError("delta injection needs both phases of the pair");
    deltas.push_back({pair.lp, pair.lq, -tot_delta[i]});
  }

  CVec v_l = start ? CVec([&] {
    CVec out(nl);
    for (int k = 0; k < nl; ++k) out[k] = start->v[impl_->l_rows[k]];
    return out;
  }())
                   : impl_->w;

  const auto injected_current = [&](const CVec& v) {
    CVec i_inj(nl);
    for (int k = 0; k < nl; ++k)
      i_inj[k] = std::conj(s_wye[k] / v[k]);
    for (const auto& d : deltas) {
      const Complex u = v[d.lp] - v[d.lq];
      const Complex j = std::conj(d.s / u);
      i_inj[d.lp] += j;
      i_inj[d.lq] -= j;
    }
    return i_inj;
  };

  const CVec rhs_slack = impl_->y_ls * impl_->v_slack;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < impl_->options.max_iterations; ++it) {
    const CVec i_inj = injected_current(v_l);
    const CVec v_next = impl_->lu.solve(CVec(i_inj - rhs_slack));

    // Complex-power mismatch at the candidate point.
    const CVec i_net = impl_->y_ll * v_next + rhs_slack;
    const CVec i_spec = injected_current(v_next);
    residual = 0.0;
    for (int k = 0; k < nl; ++k)
      residual = std::max(residual, std::abs(v_next[k] * std::conj(i_net[k] - i_spec[k])));
    if (impl_->options.trace_residuals)
      std::cerr << "zbus iter " << it << " residual " << residual << "\n";

    v_l = v_next;
    if (residual <= impl_->options.tolerance) {
      OperatingPoint out;
      out.v = CVec::Zero(n);
      for (std::size_t k = 0; k < impl_->s_rows.size(); ++k)
        out.v[impl_->s_rows[k]] = impl_->v_slack[k];
      for (int k = 0; k < nl; ++k) out.v[impl_->l_rows[k]] = v_l[k];
      out.e = out.v.real();
      out.f = out.v.imag();
      const CVec s = slack_power(model, out);
      out.p_sub = -s.real();
      out.q_sub = -s.imag();
      return out;
    }
    if (!std::isfinite(residual))
      throw PowerflowDivergenceError("Z-bus iteration diverged", residual);
  }
  throw PowerflowDivergenceError("Z-bus iteration did not converge", residual);
}

OperatingPoint solve_zbus(const NetworkModel& model, const InjectionSet& injections,
                          const std::optional<OperatingPoint>& start,
                          ZbusOptions options) {
  return ZbusSolver(model, options).solve(injections, start);
}

CVec slack_power(const NetworkModel& model, const OperatingPoint& point) {
  const CVec i_full = model.bus_admittance * point.v;
  std::vector<int> s_rows;
  for (int i = 0; i < model.index.size(); ++i)
    if (model.index.bus_of(i) == model.slack_bus) s_rows.push_back(i);
  CVec s(static_cast<int>(s_rows.size()));
  for (std::size_t k = 0; k < s_rows.size(); ++k)
    s[k] = point.v[s_rows[k]] * std::conj(i_full[s_rows[k]]);
  return s;
}

double round_half_away(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::copysign(std::floor(std::abs(x) * scale + 0.5), x) / scale;
}

std::vector<VoltageViolation> check_voltage_feasibility(const NetworkModel& model,
                                                        const OperatingPoint& point,
                                                        double v_min, double v_max,
                                                        int rounding_decimals) {
  std::vector<VoltageViolation> out;
  for (int i = 0; i < model.index.size(); ++i) {
    if (model.index.bus_of(i) == model.slack_bus) continue;
    const double mag = std::abs(point.v[i]);
    const double rounded = round_half_away(mag, rounding_decimals);
    if (rounded < v_min || rounded > v_max)
      out.push_back({model.index.bus_of(i), model.index.phase_of(i), mag, rounded});
  }
  return out;
}

}  // namespace htslp
