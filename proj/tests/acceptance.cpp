// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exits nonzero if any criterion fails.
#include <chrono>
#include <iomanip>
#include <cmath>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "ht_fixture.hpp"
#include "htslp/benchmarks.hpp"
#include "htslp/milp.hpp"
#include "htslp/slp.hpp"

using namespace htslp;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << number << " (" << name
            << "): " << detail << " [" << std::fixed << std::setprecision(1) << seconds
            << " s]" << std::defaultfloat << std::setprecision(6) << "\n";
  if (!pass) ++g_failures;
}

struct Timer {
  Clock::time_point start = Clock::now();
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - start).count();
  }
};

Eigen::Vector3cd phase_voltages(const NetworkModel& model, const OperatingPoint& pt,
                                int bus) {
  Eigen::Vector3cd v;
  for (int p = 0; p < 3; ++p) v(p) = pt.v[model.index.at(bus, p)];
  return v;
}

// ---------------------------------------------------------------------------
void criterion_1() {
  Timer timer;
  HTDevice dev;
  dev.z_ht.setConstant(Complex(1e-4, 1.316e-3));
  dev.s_conv_max = 1e9;  // keep the capability square root real for sampling
  std::mt19937 rng(909090);
  std::uniform_real_distribution<double> ur(-0.1, 0.1);
  std::uniform_real_distribution<double> ug(-kPi, kPi);
  std::uniform_real_distribution<double> um(0.95, 1.05);
  std::uniform_real_distribution<double> ua(-0.05, 0.05);

  double worst = 0.0;
  for (int s = 0; s < 10000; ++s) {
    HTSetpoint sp;
    Eigen::Vector3cd v_i, v_j;
    for (int p = 0; p < 3; ++p) {
      sp.r(p) = ur(rng);
      sp.gamma(p) = ug(rng);
      const double th = -2.0 * kPi / 3.0 * p;
      v_i(p) = um(rng) * std::exp(Complex(0, th + ua(rng)));
      v_j(p) = um(rng) * std::exp(Complex(0, th + ua(rng)));
    }
    Eigen::Vector3d e, f;
    compensating_voltage(sp, v_i, e, f);
    const auto comp = injections_component_form(dev, e, f, v_i, v_j);
    const auto cx = injections_complex_form(dev, sp, v_i, v_j);
    for (int p = 0; p < 3; ++p) {
      const double scale = std::max({1.0, std::abs(cx.s_pri(p)), std::abs(cx.s_se(p))});
      worst = std::max(worst,
                       std::abs(Complex(comp.p_pri(p), comp.q_pri(p)) - cx.s_pri(p)) / scale);
      worst = std::max(worst,
                       std::abs(Complex(comp.p_se(p), comp.q_se(p)) - cx.s_se(p)) / scale);
      worst = std::max(
          worst, std::abs(std::hypot(comp.p_sh(p), comp.q_c(p)) - cx.s_c(p)) / scale);
    }
  }
  report(1, "PIM equivalence", worst < 1e-10 && timer.seconds() < 5.0,
         "max relative gap " + std::to_string(worst) + " over 10000 samples",
         timer.seconds());
}

// ---------------------------------------------------------------------------
void criterion_2() {
  Timer timer;
  bool ok = true;
  std::string detail;

  // Capability circle at machine precision wherever |p_sh| <= rating.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double s_max = 0.2;
  double worst_circle = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double p_sh = s_max * u(rng);
    const double q = std::sqrt(s_max * s_max - p_sh * p_sh);
    worst_circle = std::max(worst_circle,
                            std::abs(p_sh * p_sh + q * q - s_max * s_max));
  }
  if (worst_circle > 1e-15) {
    ok = false;
    detail += "circle residual " + std::to_string(worst_circle) + "; ";
  }

  // Linearization equals the shrunk curve at the expansion point and is
  // lower-bounded by it across the sampled trust region (concavity).
  const double c1 = 0.99;
  double worst_gap = -kInf;
  bool anchored = true;
  for (double pshk : {-0.12, -0.05, 0.0, 0.06, 0.13}) {
    const double beta = std::sqrt(s_max * s_max - pshk * pshk);
    const auto lin = [&](double p) {
      return c1 * (beta - pshk / beta * (p - pshk));
    };
    if (std::abs(lin(pshk) - c1 * beta) > 1e-14) anchored = false;
    for (int i = 0; i <= 400; ++i) {
      const double p = pshk - 0.2 * s_max + 0.4 * s_max * i / 400.0;
      if (std::abs(p) >= s_max) continue;
      const double truth = c1 * std::sqrt(s_max * s_max - p * p);
      worst_gap = std::max(worst_gap, truth - lin(p));  // must stay <= 0
    }
  }
  if (!anchored || worst_gap > 1e-12) {
    ok = false;
    detail += "tangent bound violated by " + std::to_string(worst_gap) + "; ";
  }
  if (detail.empty())
    detail = "circle exact, tangent dominates the shrunk curve on the region";
  report(2, "capability identity", ok && timer.seconds() < 5.0, detail, timer.seconds());
}

// ---------------------------------------------------------------------------
void criterion_3() {
  Timer timer;
  bool ok = true;
  for (const Complex y : {Complex(1, 0), Complex(2, -1), Complex(0.3, 7.9)}) {
    const auto node = build_transformer_nodal_matrix(y);
    const auto unit = build_transformer_nodal_matrix(Complex(1, 0));
    for (int r = 0; r < 3; ++r) {
      if (std::abs(node.block<3, 3>(0, 0).row(r).sum()) != 0.0) ok = false;
      if (std::abs(node.block<3, 3>(0, 0).col(r).sum()) != 0.0) ok = false;
      if (std::abs(node.block<3, 3>(0, 3).row(r).sum()) != 0.0) ok = false;
      if (std::abs(node.block<3, 3>(0, 3).col(r).sum()) != 0.0) ok = false;
    }
    if (((node - y * unit).cwiseAbs().maxCoeff()) > 1e-15 * std::abs(y)) ok = false;
  }
  report(3, "transformer matrix structure", ok && timer.seconds() < 1.0,
         "zero sums exact, linear in the leakage admittance", timer.seconds());
}

// ---------------------------------------------------------------------------
double benchmark_mismatch(const NetworkModel& model, const OperatingPoint& pt,
                          const InjectionSet& inj) {
  const CVec i = model.bus_admittance * pt.v;
  const CVec tot = inj.total_wye();
  double worst = 0.0;
  for (int k = 0; k < model.index.size(); ++k) {
    if (model.index.bus_of(k) == model.slack_bus) continue;
    worst = std::max(worst, std::abs(pt.v[k] * std::conj(i[k]) + tot[k]));
  }
  return worst;
}

void criterion_4() {
  Timer timer;
  auto lowered = lower_scenario(load_benchmark_scenario());
  // Max load: unity modifiers on every table entry.
  InjectionSet inj = InjectionSet::zeros(lowered->model.index.size());
  const double top = [&] {
    double m = 0.0;
    for (int t = 0; t < lowered->run.year.total_periods(); ++t)
      m = std::max(m, lowered->run.year.modifier(t));
    return m;
  }();
  inj.x_wye = lowered->run.period_loads[0].x_wye * 0.0;
  for (int t = 0; t < lowered->run.year.total_periods(); ++t)
    if (lowered->run.year.modifier(t) == top) {
      inj = lowered->run.period_loads[t];
      break;
    }
  inj.x_wye /= top;  // scale back to the full table values
  inj.x_delta /= top;

  const auto pt = solve_zbus(lowered->model, inj);
  const double mismatch = benchmark_mismatch(lowered->model, pt, inj);

  const Complex y = 1.0 / Complex(0.0, 0.05);
  const auto two_bus = testing::make_two_bus(y);
  auto tb_inj = InjectionSet::zeros(two_bus.index.size());
  const Complex s_load(0.1, 0.05);
  for (int p = 0; p < 3; ++p) tb_inj.x_wye[two_bus.index.at(1, p)] = s_load;
  const auto tb = solve_zbus(two_bus, tb_inj);
  double tb_err = 0.0;
  for (int p = 0; p < 3; ++p) {
    const Complex expected = testing::two_bus_closed_form(y, s_load) * two_bus.slack_voltage(p);
    tb_err = std::max(tb_err, std::abs(tb.v[two_bus.index.at(1, p)] - expected));
  }

  report(4, "power-flow residual",
         mismatch <= 1e-8 && tb_err <= 1e-9 && timer.seconds() < 30.0,
         "benchmark mismatch " + std::to_string(mismatch) + " pu, closed-form gap " +
             std::to_string(tb_err),
         timer.seconds());
}

// ---------------------------------------------------------------------------
void criterion_5() {
  Timer timer;
  auto lowered = lower_scenario(load_benchmark_scenario());
  const NetworkModel& model = lowered->model;
  const InjectionSet& base = lowered->run.period_loads[12];  // mid-day loading
  ZbusSolver solver(model);
  const auto anchor = solver.solve(base);
  const auto lin = derive_linear_model(model, anchor, base);

  // Anchor exactness.
  const auto at_anchor = predict(lin, base.dx_wye, base.dx_delta,
                                 CVec::Zero(model.index.size()), 100.0,
                                 model.s_base_kva, model.v_base_volts);
  double anchor_err = 0.0;
  for (int r = 0; r < lin.n_rows(); ++r) {
    anchor_err = std::max(anchor_err, std::abs(Complex(at_anchor.e[r], at_anchor.f[r]) -
                                               anchor.v[lin.rows[r]]));
    anchor_err = std::max(anchor_err,
                          std::abs(at_anchor.v_mag[r] - std::abs(anchor.v[lin.rows[r]])));
  }
  for (int p = 0; p < 3; ++p)
    anchor_err = std::max(anchor_err, std::abs(at_anchor.p_sub[p] - anchor.p_sub[p]));

  std::mt19937 rng(5150);
  std::uniform_int_distribution<int> pick(0, lin.n_rows() - 1);
  std::uniform_real_distribution<double> size_kw(-5.0, 5.0);
  double v_err = 0.0, s_err = 0.0;
  for (int s = 0; s < 50; ++s) {
    const int bp = lin.rows[pick(rng)];
    const double kw = size_kw(rng);
    InjectionSet bumped = base;
    bumped.dx_wye[bp] += Complex(kw / model.s_base_kva, 0.0);
    const auto resolved = solver.solve(bumped, anchor);
    const auto pred = predict(lin, bumped.dx_wye, bumped.dx_delta,
                              CVec::Zero(model.index.size()), 100.0, model.s_base_kva,
                              model.v_base_volts);
    for (int r = 0; r < lin.n_rows(); ++r)
      v_err = std::max(v_err, std::abs(Complex(pred.e[r], pred.f[r]) -
                                       resolved.v[lin.rows[r]]));
    for (int p = 0; p < 3; ++p)
      s_err = std::max(s_err, std::abs(pred.p_sub[p] - resolved.p_sub[p]));
  }
  report(5, "linear-model oracle",
         anchor_err <= 1e-9 && v_err <= 1e-4 && s_err <= 1e-3 && timer.seconds() < 300.0,
         "anchor " + std::to_string(anchor_err) + ", voltage " + std::to_string(v_err) +
             ", slack " + std::to_string(s_err),
         timer.seconds());
}

// ---------------------------------------------------------------------------
SolveOutcome enumerate_binaries(const LpProblem& problem, int* lp_count) {
  std::vector<int> binaries;
  for (std::size_t j = 0; j < problem.vars.size(); ++j)
    if (problem.vars[j].kind == VarKind::binary) binaries.push_back(static_cast<int>(j));
  LpProblem relaxed = problem;
  for (int j : binaries) relaxed.vars[j].kind = VarKind::continuous;
  SolveOutcome best;
  best.status = LpStatus::infeasible;
  const double sense = problem.maximize ? 1.0 : -1.0;
  double best_val = -kInf;
  for (unsigned mask = 0; mask < (1u << binaries.size()); ++mask) {
    for (std::size_t k = 0; k < binaries.size(); ++k) {
      const double v = (mask >> k) & 1u ? 1.0 : 0.0;
      relaxed.vars[binaries[k]].lb = relaxed.vars[binaries[k]].ub = v;
    }
    const auto out = solve_lp(relaxed);
    if (lp_count) ++*lp_count;
    if (out.status != LpStatus::optimal) continue;
    if (sense * out.objective > best_val + 1e-9) {
      best_val = sense * out.objective;
      best = out;
    }
  }
  return best;
}

void criterion_6() {
  Timer timer;
  std::vector<LpProblem> fixtures;

  {  // six binaries, covering structure, minimize
    LpProblem p;
    p.maximize = false;
    std::vector<int> b;
    for (int k = 0; k < 6; ++k)
      b.push_back(p.add_var("b" + std::to_string(k), 0, 1, VarKind::binary));
    const double cost[6] = {3, 5, 4, 6, 2, 7};
    for (int k = 0; k < 6; ++k) p.set_objective_term(b[k], cost[k]);
    p.add_row("c1", LinExpr().add(b[0], 1).add(b[2], 1).add(b[4], 1), Rel::ge, 1.0);
    p.add_row("c2", LinExpr().add(b[1], 1).add(b[2], 1).add(b[5], 1), Rel::ge, 1.0);
    p.add_row("c3", LinExpr().add(b[0], 1).add(b[3], 1), Rel::ge, 1.0);
    p.add_row("c4", LinExpr().add(b[4], 1).add(b[5], 1), Rel::ge, 2.0);
    fixtures.push_back(p);
  }
  {  // six binaries gating shared continuous capacity
    LpProblem p;
    std::vector<int> b;
    for (int k = 0; k < 6; ++k)
      b.push_back(p.add_var("g" + std::to_string(k), 0, 1, VarKind::binary));
    const int x = p.add_var("x", 0.0, 10.0);
    const int y = p.add_var("y", 0.0, 10.0);
    LinExpr cap;
    cap.add(x, 1.0).add(y, 1.0);
    for (int k = 0; k < 6; ++k) cap.add(b[k], -(1.0 + 0.5 * k));
    p.add_row("cap", std::move(cap), Rel::le, 0.0);
    p.add_row("mix", LinExpr().add(x, 1.0).add(y, -1.0), Rel::le, 1.5);
    p.set_objective_term(x, 4.0);
    p.set_objective_term(y, 3.0);
    for (int k = 0; k < 6; ++k) p.set_objective_term(b[k], -2.0 - 0.3 * k);
    fixtures.push_back(p);
  }
  {  // first-iteration placement MILP of the two-feeder fixture (2 binaries)
    auto fx = testing::make_ht_fixture(1.2, 1.0);
    ZbusSolver solver(*fx->run.model);
    std::vector<LinearNetworkModel> lins;
    lins.push_back(derive_linear_model(*fx->run.model,
                                       solver.solve(fx->run.period_loads[0]),
                                       fx->run.period_loads[0]));
    LpBuildInputs in;
    in.model = fx->run.model;
    in.devices = fx->run.devices;
    in.dgs = fx->run.dgs;
    in.weights = fx->run.weights;
    in.trust = fx->run.trust;
    in.annuity = annuity_factor(0.05, 20);
    in.c_e = 0.12;
    in.c_ref = 0.0;
    in.invest_costs = fx->run.econ.invest_costs;
    PeriodInput per;
    per.lin = &lins[0];
    per.weight_hours = 365.0 * 24.0;
    per.pdg_k = Vec::Zero(1);
    for (std::size_t h = 0; h < in.devices.size(); ++h) {
      HTNominal nom;
      const int bi = fx->run.model->bus_index(in.devices[h].virtual_bus);
      const int bj = fx->run.model->bus_index(in.devices[h].lv_bus);
      nom.v_i = phase_voltages(*fx->run.model, lins[0].anchor, bi);
      nom.v_j = phase_voltages(*fx->run.model, lins[0].anchor, bj);
      per.ht.push_back(nom);
    }
    in.periods.push_back(std::move(per));
    fixtures.push_back(build_ht_lp(in).problem);
  }

  bool ok = true;
  std::string detail;
  int lp_count = 0;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto milp = solve_milp(fixtures[i]);
    const auto brute = enumerate_binaries(fixtures[i], &lp_count);
    if (milp.status != LpStatus::optimal || brute.status != LpStatus::optimal) {
      ok = false;
      detail += "fixture " + std::to_string(i) + " not optimal; ";
      continue;
    }
    if (std::abs(milp.objective - brute.objective) >
        1e-6 * std::max(1.0, std::abs(brute.objective))) {
      ok = false;
      detail += "fixture " + std::to_string(i) + " objective gap; ";
    }
    for (std::size_t j = 0; j < fixtures[i].vars.size(); ++j)
      if (fixtures[i].vars[j].kind == VarKind::binary &&
          std::abs(milp.values[j] - brute.values[j]) > 1e-6) {
        ok = false;
        detail += "fixture " + std::to_string(i) + " placement differs; ";
        break;
      }
  }
  if (detail.empty())
    detail = "three fixtures match enumeration (" + std::to_string(lp_count) +
             " oracle LPs)";
  report(6, "MILP correctness", ok && timer.seconds() < 120.0, detail, timer.seconds());
}

// ---------------------------------------------------------------------------
struct HtOracle {
  const NetworkModel& model;
  const ScenarioRun& run;
  ZbusSolver solver;
  int dg_bus;
  int bus_i, bus_j;

  explicit HtOracle(const testing::HtFixture& fx)
      : model(fx.model), run(fx.run), solver(fx.model) {
    dg_bus = run.dgs[0].bus;
    bus_i = model.bus_index(run.devices[0].virtual_bus);
    bus_j = model.bus_index(run.devices[0].lv_bus);
  }

  // Nonlinear solve with the device held at (r, gamma) on every phase; the
  // injection model is iterated with the flows to a joint fixed point.
  // Returns annual export income, or nullopt when infeasible.
  std::optional<double> evaluate(double r, double gamma, double p_dg) {
    const HTDevice& dev = run.devices[0];
    HTSetpoint sp;
    sp.r.setConstant(r);
    sp.gamma.setConstant(gamma);

    InjectionSet inj = run.period_loads[0];
    for (int p = 0; p < 3; ++p)
      inj.dx_wye[model.index.at(dg_bus, p)] += Complex(-p_dg, 0.0);

    OperatingPoint pt;
    try {
      pt = solver.solve(inj);
    } catch (const PowerflowDivergenceError&) {
      return std::nullopt;
    }
    HTInjection last;
    for (int outer = 0; outer < 60; ++outer) {
      Eigen::Vector3d e_pq, f_pq;
      const auto v_i = phase_voltages(model, pt, bus_i);
      const auto v_j = phase_voltages(model, pt, bus_j);
      compensating_voltage(sp, v_i, e_pq, f_pq);
      HTInjection hinj;
      try {
        hinj = injections_component_form(dev, e_pq, f_pq, v_i, v_j);
      } catch (const CapabilityExceededError&) {
        return std::nullopt;
      }
      InjectionSet step = inj;
      for (int p = 0; p < 3; ++p) {
        step.dx_ht[model.index.at(bus_i, p)] = -Complex(hinj.p_pri(p), hinj.q_pri(p));
        step.dx_ht[model.index.at(bus_j, p)] = -Complex(hinj.p_sec(p), hinj.q_sec(p));
      }
      OperatingPoint next;
      try {
        next = solver.solve(step, pt);
      } catch (const PowerflowDivergenceError&) {
        return std::nullopt;
      }
      const double move = (next.v - pt.v).cwiseAbs().maxCoeff();
      pt = next;
      last = hinj;
      if (move < 1e-11) break;
    }
    // Converter limits at the solution.
    for (int p = 0; p < 3; ++p) {
      if (std::abs(last.p_sh(p)) > dev.s_conv_max) return std::nullopt;
      if (std::hypot(last.p_sh(p), last.q_c(p)) > dev.s_conv_max) return std::nullopt;
    }
    if (!check_voltage_feasibility(model, pt, model.v_min, model.v_max, 2).empty())
      return std::nullopt;
    std::vector<Vec> psub = {pt.p_sub};
    return annual_export_income(psub, run.year, model.s_base_kva, run.econ.c_e);
  }

  // Largest feasible balanced DG output for a setpoint, by bisection.
  std::optional<double> max_income(double r, double gamma, double p_cap) {
    if (!evaluate(r, gamma, 0.0)) return std::nullopt;
    double lo = 0.0, hi = p_cap;
    if (evaluate(r, gamma, p_cap)) return evaluate(r, gamma, p_cap);
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (evaluate(r, gamma, mid))
        lo = mid;
      else
        hi = mid;
    }
    return evaluate(r, gamma, lo);
  }
};

void criterion_7() {
  Timer timer;
  auto fx = testing::make_ht_fixture();
  SlpOptions opt;
  SlpEngine ref_engine(fx->run, opt);
  fx->run.econ.c_ref = ref_engine.compute_reference();

  SlpEngine engine(fx->run, opt);
  const SlpResult res = engine.optimize();

  bool ok = res.converged && res.iterations <= 50 && res.b_ht[0];
  std::string detail;
  if (!res.converged) detail += "did not converge; ";
  if (!res.b_ht[0]) detail += "missed the placement; ";

  for (const auto& pt : res.points)
    if (!check_voltage_feasibility(fx->model, pt, fx->model.v_min, fx->model.v_max, 2)
             .empty()) {
      ok = false;
      detail += "final anchors violate limits; ";
      break;
    }
  for (const auto& rec : res.trace)
    if (rec.accepted && rec.max_dvpq_pct > opt.vpq_tol_pct) {
      ok = false;
      detail += "accepted iterate over the accuracy tolerance; ";
      break;
    }

  // Brute-force lattice oracle with nonlinear flows.
  HtOracle oracle(*fx);
  const double annuity = annuity_factor(fx->run.econ.coc, fx->run.econ.ht_years);
  double best = -kInf;
  const double p_cap = fx->run.dgs[0].p_max;
  for (int ri = 0; ri < 41; ++ri) {
    const double r = -0.1 + 0.2 * ri / 40.0;
    for (int gi = 0; gi < 63; ++gi) {
      const double gamma = -kPi + 2.0 * kPi * gi / 62.0;
      const auto income = oracle.max_income(r, gamma, p_cap);
      if (!income) continue;
      const double invest = r == 0.0 ? 0.0 : fx->run.devices[0].invest_cost;
      best = std::max(best, annuity * (*income - fx->run.econ.c_ref) - invest);
    }
  }
  if (res.npv < 0.98 * best) {
    ok = false;
    detail += "npv " + std::to_string(res.npv) + " below 0.98 x oracle " +
              std::to_string(best) + "; ";
  }
  if (detail.empty())
    detail = "installed, converged in " + std::to_string(res.iterations) +
             " iterations, npv " + std::to_string(res.npv) + " vs oracle " +
             std::to_string(best);
  report(7, "SLP end-to-end", ok && timer.seconds() < 600.0, detail, timer.seconds());
}

// ---------------------------------------------------------------------------
void criterion_8() {
  Timer timer;
  const ScenarioConfig config = load_benchmark_scenario();
  ScenarioOverrides ov;
  ov.periods = 24;
  ov.price = 0.12;
  ov.discount = 0.05;

  double e_ref = 0.0;
  {
    ov.cost_mode = std::string("full");
    auto lowered = lower_scenario(config, ov);
    ScenarioRun unit = lowered->run;
    unit.econ.c_e = 1.0;
    unit.econ.c_ref = 0.0;
    SlpEngine ref(unit, lowered->slp_options);
    e_ref = ref.compute_reference();
  }

  const auto run_mode = [&](const std::string& mode) {
    ov.cost_mode = mode;
    auto lowered = lower_scenario(config, ov);
    lowered->run.econ.c_ref = 0.12 * e_ref;
    SlpEngine engine(lowered->run, lowered->slp_options);
    SlpResult res = engine.optimize();
    return std::make_pair(std::move(res), std::move(lowered));
  };

  auto [full, full_sc] = run_mode("full");
  bool ok = full.converged && full.npv > 0.0;
  std::string detail = "full npv " + std::to_string(full.npv);
  if (!full.converged) detail += " (not converged)";

  // Re-simulation of the returned solution.
  ZbusSolver solver(full_sc->model);
  double psub_gap = 0.0;
  std::vector<Vec> psub;
  for (std::size_t t = 0; t < full.final_injections.size(); ++t) {
    const auto pt = solver.solve(full.final_injections[t]);
    psub.push_back(pt.p_sub);
    for (int p = 0; p < 3; ++p)
      psub_gap = std::max(psub_gap, std::abs(pt.p_sub[p] - full.psub[t][p]));
  }
  const double c_exp = annual_export_income(psub, full_sc->run.year,
                                            full_sc->model.s_base_kva, 0.12);
  const double npv_re = npv(c_exp, full_sc->run.econ, full.b_ht);
  if (psub_gap > 1e-5) {
    ok = false;
    detail += "; exports drift " + std::to_string(psub_gap);
  }
  if (std::abs(npv_re - full.npv) > 1e-3 * std::abs(full.npv)) {
    ok = false;
    detail += "; npv re-simulation gap";
  }

  auto [offset, offset_sc] = run_mode("offset");
  if (!offset.converged) {
    ok = false;
    detail += "; offset run not converged";
  }
  if (!(offset.npv >= full.npv)) {
    ok = false;
    detail += "; offset npv not >= full";
  }
  if (offset.b_ht == full.b_ht) {
    double cost_gap = 0.0;
    for (std::size_t h = 0; h < full.b_ht.size(); ++h)
      if (full.b_ht[h])
        cost_gap += full_sc->run.devices[h].invest_cost -
                    offset_sc->run.devices[h].invest_cost;
    if (std::abs((offset.npv - full.npv) - cost_gap) >
        1e-6 * std::max(1.0, std::abs(cost_gap))) {
      ok = false;
      detail += "; offset difference != investment offset";
    } else {
      detail += "; offset +'" + std::to_string(cost_gap) + "' as priced";
    }
  } else {
    detail += "; placements differ between cost modes";
  }
  report(8, "reduced benchmark scenario", ok && timer.seconds() < 3600.0, detail,
         timer.seconds());
}

// ---------------------------------------------------------------------------
void criterion_9() {
  Timer timer;
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> uc(0.0, 0.2);
  std::uniform_int_distribution<int> uy(1, 40);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double coc = uc(rng);
    const int years = uy(rng);
    double direct = 0.0;
    for (int t = 1; t <= years; ++t) direct += std::pow(1.0 + coc, -t);
    worst = std::max(worst, std::abs(annuity_factor(coc, years) - direct) /
                                std::max(1.0, direct));
  }
  const double a20 = annuity_factor(0.05, 20);
  const bool ok = worst <= 1e-9 && std::abs(a20 - 12.4622) <= 1e-4;
  report(9, "economics",
         ok && timer.seconds() < 1.0,
         "annuity residual " + std::to_string(worst) + ", 20y factor " +
             std::to_string(a20),
         timer.seconds());
}

// ---------------------------------------------------------------------------
void criterion_10() {
  Timer timer;
  const ScenarioConfig config = load_benchmark_scenario();

  // Scaling over 1..8 identical synthetic days of 3 periods each.
  std::vector<double> wall;
  std::optional<double> e_ref_cache;
  for (int days = 1; days <= 8; ++days) {
    ScenarioOverrides ov;
    ov.periods = 3 * days;
    ov.cost_mode = std::string("full");
    auto lowered = lower_scenario(config, ov);
    ScenarioRun unit = lowered->run;
    unit.econ.c_e = 1.0;
    unit.econ.c_ref = 0.0;
    SlpEngine ref(unit, lowered->slp_options);
    const double e_ref = ref.compute_reference();
    lowered->run.econ.c_ref = lowered->run.econ.c_e * e_ref;
    (void)e_ref_cache;
    SlpEngine engine(lowered->run, lowered->slp_options);
    const Timer t;
    (void)engine.optimize();
    wall.push_back(std::max(t.seconds(), 1e-3));
  }
  const double ratio_84 = wall[7] / wall[3];
  const double ratio_42 = wall[3] / wall[1];
  const bool scaling_ok = ratio_84 <= 1.2 * ratio_42 * 2.0;

  // Sensitivity ordering on the reduced grid.
  std::optional<double> e_ref6;
  const auto npv_cell = [&](double price, double discount) {
    ScenarioOverrides ov;
    ov.periods = 6;
    ov.price = price;
    ov.discount = discount;
    ov.cost_mode = std::string("full");
    auto lowered = lower_scenario(config, ov);
    if (!e_ref6) {
      ScenarioRun unit = lowered->run;
      unit.econ.c_e = 1.0;
      unit.econ.c_ref = 0.0;
      SlpEngine ref(unit, lowered->slp_options);
      e_ref6 = ref.compute_reference();
    }
    lowered->run.econ.c_ref = price * *e_ref6;
    SlpEngine engine(lowered->run, lowered->slp_options);
    return engine.optimize().npv;
  };

  const double prices[3] = {0.01, 0.04, 0.12};
  const double discounts[3] = {0.05, 0.07, 0.10};
  double grid[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) grid[i][j] = npv_cell(prices[i], discounts[j]);

  bool monotone = true;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i + 1 < 3; ++i)
      if (!(grid[i + 1][j] > grid[i][j])) monotone = false;  // price up, npv up
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j + 1 < 3; ++j)
      if (!(grid[i][j + 1] < grid[i][j])) monotone = false;  // discount up, npv down

  std::ostringstream os;
  os << "time(8)/time(4)=" << ratio_84 << " vs bound " << 1.2 * ratio_42 * 2.0
     << "; grid npv range [" << grid[0][2] << ", " << grid[2][0] << "]"
     << (monotone ? ", ordering holds" : ", ordering broken");
  report(10, "desk-scale substitution", scaling_ok && monotone, os.str(),
         timer.seconds());
}

}  // namespace

int main() {
  std::cout << "running acceptance criteria\n";
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (g_failures) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
