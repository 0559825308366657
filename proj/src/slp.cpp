#include "htslp/slp.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <iostream>
#include <thread>

namespace htslp {

namespace {

// Static chunking keeps results identical for any thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) body(i);
    });
  for (auto& th : pool) th.join();
}

struct Snapshot {
  std::vector<OperatingPoint> points;
  std::vector<InjectionSet> injections;
  std::vector<std::vector<HTSetpoint>> setpoints;
  std::vector<std::vector<HTInjection>> ht_injections;
  std::vector<Vec> pdg;
  std::vector<Vec> psub;
  std::vector<bool> b_ht;
  double npv = 0.0;
  double c_exp = 0.0;
  bool valid = false;
};

double rounded_violation(const NetworkModel& model, const OperatingPoint& pt,
                         int decimals) {
  double worst = 0.0;
  for (const auto& v : check_voltage_feasibility(model, pt, model.v_min, model.v_max,
                                                 decimals)) {
    worst = std::max(worst, std::max(model.v_min - v.rounded, v.rounded - model.v_max));
  }
  return worst;
}

}  // namespace

SlpEngine::SlpEngine(const ScenarioRun& run, SlpOptions options)
    : run_(run), opt_(std::move(options)) {
  if (static_cast<int>(run_.period_loads.size()) != run_.year.total_periods())
    throw InvalidParameterError("period loads do not match the year model");
}

SlpResult SlpEngine::optimize() { return run_loop(true, true); }

double SlpEngine::compute_reference(SlpResult* detail) {
  SlpResult res = run_loop(false, false);
  if (detail) *detail = res;
  return res.c_exp;
}

SlpResult SlpEngine::run_loop(bool with_ht, bool npv_objective) {
  const NetworkModel& model = *run_.model;
  const int n_t = run_.year.total_periods();
  const int n_h = with_ht ? static_cast<int>(run_.devices.size()) : 0;
  const int n_d = static_cast<int>(run_.dgs.size());

  ZbusSolver solver(model);

  // Anchors from the all-passive network: DGs and compensation inactive.
  std::vector<OperatingPoint> anchors;
  std::vector<InjectionSet> anchor_inj;
  anchors.reserve(n_t);
  for (int t = 0; t < n_t; ++t) {
    anchor_inj.push_back(run_.period_loads[t]);
    anchors.push_back(solver.solve(run_.period_loads[t]));
    if (rounded_violation(model, anchors.back(), opt_.rounding_decimals) > 0.0)
      throw InvalidParameterError("base-case power flow violates voltage limits in period " +
                                  std::to_string(t));
  }

  // Nominal-point constants, all zero before the first solve.
  std::vector<std::vector<HTNominal>> nominal(n_t, std::vector<HTNominal>(n_h));
  std::vector<Vec> pdg_k(n_t, Vec::Zero(n_d));
  TrustRegion trust = run_.trust;

  LpBuildInputs in;
  in.model = &model;
  in.devices.assign(run_.devices.begin(), run_.devices.begin() + n_h);
  in.dgs = run_.dgs;
  in.weights = run_.weights;
  in.annuity = annuity_factor(run_.econ.coc, run_.econ.ht_years);
  in.c_e = run_.econ.c_e;
  in.c_ref = npv_objective ? run_.econ.c_ref : 0.0;
  in.invest_costs = run_.econ.invest_costs;
  in.include_ht = with_ht;
  in.npv_objective = npv_objective;
  in.literal_penalty_signs = run_.literal_penalty_signs;

  Snapshot best;  // last accepted iterate
  SlpResult result;
  result.termination = SlpTermination::iteration_cap;

  SimplexBasis warm;
  double metric_prev = 0.0;
  bool have_prev_metric = false;

  for (int k = 1; k <= opt_.k_max; ++k) {
    // (a) linear network models at the current anchors.
    std::vector<LinearNetworkModel> lins(n_t);
    parallel_for(n_t, opt_.threads, [&](int t) {
      lins[t] = derive_linear_model(model, anchors[t], anchor_inj[t]);
    });

    // Nominal bus voltages come from the current anchors.
    for (int t = 0; t < n_t; ++t)
      for (int h = 0; h < n_h; ++h) {
        const HTDevice& dev = run_.devices[h];
        const int bi = model.bus_index(dev.virtual_bus);
        const int bj = model.bus_index(dev.lv_bus);
        for (int phi = 0; phi < 3; ++phi) {
          nominal[t][h].v_i(phi) = anchors[t].v[model.index.at(bi, phi)];
          nominal[t][h].v_j(phi) = anchors[t].v[model.index.at(bj, phi)];
        }
      }

    in.periods.assign(n_t, PeriodInput{});
    for (int t = 0; t < n_t; ++t) {
      in.periods[t].lin = &lins[t];
      in.periods[t].weight_hours = run_.year.period_weight_hours(t);
      in.periods[t].ht = nominal[t];
      in.periods[t].pdg_k = pdg_k[t];
    }

    IterationRecord rec;
    rec.k = k;

    bool accepted = false;
    HtLpSolution sol;
    std::vector<OperatingPoint> new_points(n_t);
    std::vector<InjectionSet> new_inj(n_t);

    for (int attempt = 0; attempt < opt_.max_resolves; ++attempt) {
      rec.resolves = attempt + 1;
      in.trust = trust;

      auto built = build_ht_lp(in);
      MilpStats stats;
      SolveOutcome outcome =
          with_ht ? solve_milp(built.problem, opt_.milp, &stats,
                               warm.valid ? &warm : nullptr)
                  : solve_lp(built.problem, opt_.milp.lp, warm.valid ? &warm : nullptr);
      rec.lp_iterations += outcome.iterations;
      rec.milp_nodes += stats.nodes;

      const auto fail_step = [&](const std::string& why) -> bool {
        // Halve the DG and compensation step sizes and retry; the floor rule
        // ends the run with the previous feasible iterate.
        rec.note = why;
        trust.halve();
        if (opt_.verbose)
          std::cerr << "slp k=" << k << " " << why << "; halving steps to stp_v="
                    << trust.stp_v << "\n";
        return trust.below_floor();
      };

      if (outcome.status != LpStatus::optimal) {
        if (fail_step(outcome.status == LpStatus::infeasible ? "lp infeasible"
                                                             : "lp not optimal"))
          break;
        continue;
      }
      warm = outcome.basis;
      rec.lp_objective = outcome.objective;
      sol = extract_solution(in, built.index, outcome.values, outcome.objective);

      // (c) nonlinear re-simulation with the extracted controls.
      std::atomic<bool> diverged{false};
      parallel_for(n_t, opt_.threads, [&](int t) {
        new_inj[t] = run_.period_loads[t];
        new_inj[t].dx_wye += sol.dx_wye[t];
        new_inj[t].dx_delta += sol.dx_delta[t];
        new_inj[t].dx_ht += sol.dx_ht[t];
        try {
          new_points[t] = solver.solve(new_inj[t], anchors[t]);
        } catch (const PowerflowDivergenceError&) {
          diverged = true;
        }
      });
      if (diverged) {
        if (fail_step("re-simulation diverged")) break;
        continue;
      }

      // (d) network feasibility check at rounded magnitudes.
      double worst = 0.0;
      for (int t = 0; t < n_t; ++t)
        worst = std::max(worst,
                         rounded_violation(model, new_points[t], opt_.rounding_decimals));
      rec.max_violation = worst;
      if (worst > 0.0) {
        if (fail_step("voltage violation")) break;
        continue;
      }

      // (e) compensation accuracy check.
      double worst_dvpq = 0.0;
      bool accuracy_ok = true;
      for (int t = 0; t < n_t && n_h > 0; ++t) {
        for (int h = 0; h < n_h; ++h) {
          const HTDevice& dev = run_.devices[h];
          Eigen::Vector3cd v_i, v_j;
          const int bi = model.bus_index(dev.virtual_bus);
          const int bj = model.bus_index(dev.lv_bus);
          for (int phi = 0; phi < 3; ++phi) {
            v_i(phi) = new_points[t].v[model.index.at(bi, phi)];
            v_j(phi) = new_points[t].v[model.index.at(bj, phi)];
          }
          const AccuracyReport rep =
              accuracy_check(dev, sol.injections[t][h], v_i, v_j, opt_.vpq_tol_pct);
          for (int phi = 0; phi < 3; ++phi)
            if (std::isfinite(rep.delta_pct(phi)))
              worst_dvpq = std::max(worst_dvpq, rep.delta_pct(phi));
          if (!rep.pass) {
            accuracy_ok = false;
            if (opt_.verbose)
              for (int phi = 0; phi < 3; ++phi)
                if (rep.delta_pct(phi) > opt_.vpq_tol_pct ||
                    rep.s_c(phi) > dev.s_conv_max || rep.inactive_mismatch[phi])
                  std::cerr << "  accuracy fail t=" << t << " " << dev.id << " ph" << phi
                            << " dvpq=" << rep.delta_pct(phi) << " s_c=" << rep.s_c(phi)
                            << "/" << dev.s_conv_max
                            << " lp=" << std::abs(rep.v_pq_lp(phi))
                            << " avg=" << std::abs(rep.v_pq_avg(phi))
                            << (rep.inactive_mismatch[phi] ? " inactive" : "") << "\n";
          }
        }
      }
      rec.max_dvpq_pct = worst_dvpq;
      if (!accuracy_ok) {
        if (fail_step("accuracy check failed")) break;
        continue;
      }

      accepted = true;
      break;
    }
    if (!accepted) {
      result.termination = SlpTermination::step_floor;
      result.trace.push_back(rec);
      break;
    }

    // (f) accept: anchors move to the re-simulated flows; control constants
    // come from the LP, and the dependent nominal quantities are re-derived
    // from those controls at the accepted voltages. A zero setpoint then
    // carries exactly zero nominal compensation into the next Taylor
    // expansion instead of a stale phantom.
    anchors = new_points;
    anchor_inj = new_inj;
    for (int t = 0; t < n_t; ++t) {
      for (int h = 0; h < n_h; ++h) {
        const HTDevice& dev = run_.devices[h];
        HTNominal& nom = nominal[t][h];
        nom.r = sol.setpoints[t][h].r;
        nom.gamma = sol.setpoints[t][h].gamma;
        const int bi = model.bus_index(dev.virtual_bus);
        const int bj = model.bus_index(dev.lv_bus);
        Eigen::Vector3cd v_i, v_j;
        for (int phi = 0; phi < 3; ++phi) {
          v_i(phi) = anchors[t].v[model.index.at(bi, phi)];
          v_j(phi) = anchors[t].v[model.index.at(bj, phi)];
        }
        HTSetpoint sp;
        sp.r = nom.r;
        sp.gamma = nom.gamma;
        Eigen::Vector3d e_pq, f_pq;
        compensating_voltage(sp, v_i, e_pq, f_pq);
        nom.e_pq = e_pq;
        nom.f_pq = f_pq;
        try {
          nom.p_sh = injections_component_form(dev, e_pq, f_pq, v_i, v_j).p_sh;
        } catch (const CapabilityExceededError&) {
          nom.p_sh = sol.injections[t][h].p_sh;  // keep the LP's in-range value
        }
      }
      for (int d = 0; d < n_d; ++d) pdg_k[t][d] = sol.pdg[t][d];
    }

    std::vector<Vec> psub(n_t);
    for (int t = 0; t < n_t; ++t) psub[t] = anchors[t].p_sub;
    const double c_exp =
        annual_export_income(psub, run_.year, model.s_base_kva, run_.econ.c_e);
    EconomicParams econ = run_.econ;
    if (!npv_objective) econ.c_ref = 0.0;
    const double npv_now = npv(c_exp, econ, sol.b_ht);

    best.valid = true;
    best.points = anchors;
    best.injections = anchor_inj;
    best.setpoints = sol.setpoints;
    best.ht_injections = sol.injections;
    best.pdg = sol.pdg;
    best.psub = psub;
    best.b_ht = sol.b_ht;
    best.npv = npv_now;
    best.c_exp = c_exp;

    rec.npv = npv_now;
    rec.c_exp = c_exp;
    rec.stp_v = trust.stp_v;
    rec.stp_gamma = trust.stp_gamma;
    rec.stp_dg_max = trust.stp_dg.size() ? trust.stp_dg.maxCoeff() : 0.0;
    rec.accepted = true;
    result.trace.push_back(rec);
    result.iterations = k;
    if (opt_.verbose)
      std::cerr << "slp k=" << k << " objective=" << rec.lp_objective
                << " npv=" << npv_now << " c_exp=" << c_exp
                << " max_violation=" << rec.max_violation
                << " max_dvpq=" << rec.max_dvpq_pct << " stp_v=" << trust.stp_v
                << " stp_gamma=" << trust.stp_gamma
                << " stp_dg_max=" << rec.stp_dg_max << " resolves=" << rec.resolves
                << "\n";

    // (g) objective convergence between consecutive accepted iterations.
    // Near a zero previous value the percentage test degenerates; one
    // currency unit stands in for the denominator there.
    const double metric = npv_objective ? npv_now : c_exp;
    if (have_prev_metric) {
      const double denom = std::max(std::abs(metric_prev), 1.0);
      const double delta_pct = std::abs(metric - metric_prev) / denom * 100.0;
      if (delta_pct < opt_.obj_tol_pct) {
        result.converged = true;
        result.termination = SlpTermination::converged;
        break;
      }
    }
    metric_prev = metric;
    have_prev_metric = true;
  }

  if (!best.valid) {
    // Nothing ever passed: report the passive network state.
    std::vector<Vec> psub;
    ZbusSolver solver2(model);
    for (int t = 0; t < n_t; ++t) {
      const auto pt = solver2.solve(run_.period_loads[t]);
      psub.push_back(pt.p_sub);
      result.points.push_back(pt);
      result.final_injections.push_back(run_.period_loads[t]);
    }
    result.c_exp =
        annual_export_income(psub, run_.year, model.s_base_kva, run_.econ.c_e);
    EconomicParams econ = run_.econ;
    if (!npv_objective) econ.c_ref = 0.0;
    result.b_ht.assign(n_h, false);
    result.npv = npv(result.c_exp, econ, result.b_ht);
    result.psub = psub;
    result.pdg.assign(n_t, Vec::Zero(n_d));
    result.setpoints.assign(n_t, std::vector<HTSetpoint>(n_h));
    result.injections.assign(n_t, std::vector<HTInjection>(n_h));
    return result;
  }

  result.has_incumbent = true;
  result.b_ht = best.b_ht;
  result.setpoints = best.setpoints;
  result.injections = best.ht_injections;
  result.pdg = best.pdg;
  result.psub = best.psub;
  result.points = best.points;
  result.final_injections = best.injections;
  result.npv = best.npv;
  result.c_exp = best.c_exp;
  return result;
}

}  // namespace htslp
