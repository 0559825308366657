#include "htslp/lp_build.hpp"

#include <cmath>

namespace htslp {

namespace {

std::string tag3(const std::string& stem, int t, int a, int b) {
  return stem + "_t" + std::to_string(t) + "_" + std::to_string(a) + "_p" +
         std::to_string(b);
}

// Affine shorthand used by the Taylor-expanded injection rows.
struct Shorthand {
  LinExpr l0_re, l0_im, l1, l2, l3, l4, l5;
};

}  // namespace

BuiltLp build_ht_lp(const LpBuildInputs& in) {
  const NetworkModel& model = *in.model;
  const LinearNetworkModel& lin0 = *in.periods.at(0).lin;
  const int n_t = static_cast<int>(in.periods.size());
  const int n_h = in.include_ht ? static_cast<int>(in.devices.size()) : 0;
  const int n_d = static_cast<int>(in.dgs.size());
  const int nl = lin0.n_rows();
  const double sb = model.s_base_kva;
  const double vb = model.v_base_volts;

  BuiltLp out;
  LpProblem& p = out.problem;
  HtLpIndex& ix = out.index;
  p.name = "ht_lp";
  p.maximize = true;
  ix.n_periods = n_t;
  ix.n_devices = n_h;
  ix.n_dgs = n_d;

  // Binary coupling guard: with every compensation tracker at its largest
  // possible value the scaled sum must stay within the binary's reach.
  if (in.include_ht) {
    for (const auto& dev : in.devices) {
      const double worst_phase = 2.0 * std::max(std::abs(dev.r_max), std::abs(dev.r_min)) *
                                     model.v_max +
                                 kPi + dev.c1 * dev.s_conv_max;
      const double bound = in.weights.c2 * 3.0 * n_t * worst_phase;
      if (bound > 1.0)
        throw LpBuildError("installation coupling scale exceeds 1 for " + dev.id +
                           "; lower c2 or the horizon");
    }
  }

  // --- variables -----------------------------------------------------------
  ix.vmag.assign(n_t, std::vector<int>(nl, -1));
  ix.psub.assign(n_t, {-1, -1, -1});
  ix.pdg.assign(n_t, std::vector<std::array<int, 3>>(n_d, {-1, -1, -1}));
  ix.qdg = ix.pdg;
  ix.dxp_dg = ix.pdg;
  ix.dxq_dg = ix.pdg;
  ix.e_i.assign(n_t, std::vector<std::array<int, 3>>(n_h, {-1, -1, -1}));
  ix.f_i = ix.e_i;
  ix.e_j = ix.e_i;
  ix.f_j = ix.e_i;
  ix.dxp_ht_i = ix.e_i;
  ix.dxq_ht_i = ix.e_i;
  ix.dxp_ht_j = ix.e_i;
  ix.dxq_ht_j = ix.e_i;
  ix.ht.assign(n_t, std::vector<HtLpIndex::HtVars>(n_h));

  for (int t = 0; t < n_t; ++t) {
    const PeriodInput& per = in.periods[t];
    if (per.lin->n_rows() != nl) throw LpBuildError("period model dimensions differ");

    for (int r = 0; r < nl; ++r)
      ix.vmag[t][r] = p.add_var("vm_t" + std::to_string(t) + "_" + std::to_string(r),
                                model.v_min, model.v_max);
    for (int phi = 0; phi < 3; ++phi)
      ix.psub[t][phi] = p.add_var(tag3("psub", t, 0, phi), -kInf, kInf);

    for (int d = 0; d < n_d; ++d) {
      const double pk = per.pdg_k[d];
      const double lb = std::max(0.0, pk - in.trust.stp_dg[d]);
      const double ub = std::min(in.dgs[d].p_max, pk + in.trust.stp_dg[d]);
      for (int phi = 0; phi < 3; ++phi) {
        ix.pdg[t][d][phi] = p.add_var(tag3("pdg", t, d, phi), lb, ub);
        ix.qdg[t][d][phi] = p.add_var(tag3("qdg", t, d, phi), -kInf, kInf);
        ix.dxp_dg[t][d][phi] = p.add_var(tag3("dxp", t, d, phi), -kInf, kInf);
        ix.dxq_dg[t][d][phi] = p.add_var(tag3("dxq", t, d, phi), -kInf, kInf);
      }
    }

    for (int h = 0; h < n_h; ++h) {
      const HTDevice& dev = in.devices[h];
      const HTNominal& nom = per.ht[h];
      auto& v = ix.ht[t][h];
      for (int phi = 0; phi < 3; ++phi) {
        ix.e_i[t][h][phi] = p.add_var(tag3("ei", t, h, phi), -kInf, kInf);
        ix.f_i[t][h][phi] = p.add_var(tag3("fi", t, h, phi), -kInf, kInf);
        ix.e_j[t][h][phi] = p.add_var(tag3("ej", t, h, phi), -kInf, kInf);
        ix.f_j[t][h][phi] = p.add_var(tag3("fj", t, h, phi), -kInf, kInf);
        ix.dxp_ht_i[t][h][phi] = p.add_var(tag3("dhpi", t, h, phi), -kInf, kInf);
        ix.dxq_ht_i[t][h][phi] = p.add_var(tag3("dhqi", t, h, phi), -kInf, kInf);
        ix.dxp_ht_j[t][h][phi] = p.add_var(tag3("dhpj", t, h, phi), -kInf, kInf);
        ix.dxq_ht_j[t][h][phi] = p.add_var(tag3("dhqj", t, h, phi), -kInf, kInf);

        v.r[phi] = p.add_var(tag3("r", t, h, phi),
                             std::max(dev.r_min, nom.r[phi] - in.trust.stp_v),
                             std::min(dev.r_max, nom.r[phi] + in.trust.stp_v));
        v.gamma[phi] = p.add_var(tag3("g", t, h, phi),
                                 std::max(-kPi, nom.gamma[phi] - in.trust.stp_gamma),
                                 std::min(kPi, nom.gamma[phi] + in.trust.stp_gamma));
        v.epq[phi] = p.add_var(tag3("epq", t, h, phi), -kInf, kInf);
        v.fpq[phi] = p.add_var(tag3("fpq", t, h, phi), -kInf, kInf);
        v.eabs[phi] = p.add_var(tag3("eab", t, h, phi), 0.0, kInf);
        v.fabs[phi] = p.add_var(tag3("fab", t, h, phi), 0.0, kInf);
        v.gabs[phi] = p.add_var(tag3("gab", t, h, phi), 0.0, kInf);
        v.ppri[phi] = p.add_var(tag3("ppri", t, h, phi), -kInf, kInf);
        v.qpri[phi] = p.add_var(tag3("qpri", t, h, phi), -kInf, kInf);
        v.pse[phi] = p.add_var(tag3("pse", t, h, phi), -kInf, kInf);
        v.qse[phi] = p.add_var(tag3("qse", t, h, phi), -kInf, kInf);
        v.psh[phi] = p.add_var(tag3("psh", t, h, phi), -dev.s_conv_max, dev.s_conv_max);
        v.qcap[phi] = p.add_var(tag3("qcap", t, h, phi), -kInf, kInf);
        v.qsh[phi] = p.add_var(tag3("qsh", t, h, phi), -kInf, kInf);
        v.qabs[phi] = p.add_var(tag3("qab", t, h, phi), 0.0, kInf);
        v.qc[phi] = p.add_var(tag3("qc", t, h, phi), -kInf, kInf);
        v.psec[phi] = p.add_var(tag3("psec", t, h, phi), -kInf, kInf);
        v.qsec[phi] = p.add_var(tag3("qsec", t, h, phi), -kInf, kInf);
      }
    }
  }
  ix.b.assign(n_h, -1);
  for (int h = 0; h < n_h; ++h)
    ix.b[h] = p.add_var("b_h" + std::to_string(h), 0.0, 1.0, VarKind::binary);

  // --- linear network rows --------------------------------------------------
  // One injection slot per (bus-phase, p/q, family) with family-dependent
  // scaling; the voltage and slack rows sum over every slot of the period.
  struct Slot {
    int var;
    int col;       // stack column in the linear model
    bool is_delta;
    double scale;  // md for HT slots, 1 otherwise
  };

  for (int t = 0; t < n_t; ++t) {
    const PeriodInput& per = in.periods[t];
    const LinearNetworkModel& lm = *per.lin;

    std::vector<Slot> slots;
    for (int d = 0; d < n_d; ++d) {
      const DGSpec& dg = in.dgs[d];
      for (int phi = 0; phi < 3; ++phi) {
        const int row = lm.row_of_busphase[model.index.at(dg.bus, phi)];
        if (row < 0) throw LpBuildError("DG on slack bus is not supported");
        slots.push_back({ix.dxp_dg[t][d][phi], row, dg.is_delta, 1.0});
        slots.push_back({ix.dxq_dg[t][d][phi], nl + row, dg.is_delta, 1.0});
      }
    }
    for (int h = 0; h < n_h; ++h) {
      const HTDevice& dev = in.devices[h];
      const int bus_i = model.bus_index(dev.virtual_bus);
      const int bus_j = model.bus_index(dev.lv_bus);
      for (int phi = 0; phi < 3; ++phi) {
        const int row_i = lm.row_of_busphase[model.index.at(bus_i, phi)];
        const int row_j = lm.row_of_busphase[model.index.at(bus_j, phi)];
        slots.push_back({ix.dxp_ht_i[t][h][phi], row_i, false, dev.md});
        slots.push_back({ix.dxq_ht_i[t][h][phi], nl + row_i, false, dev.md});
        slots.push_back({ix.dxp_ht_j[t][h][phi], row_j, false, dev.md});
        slots.push_back({ix.dxq_ht_j[t][h][phi], nl + row_j, false, dev.md});
      }
    }

    // Constant parts from the uncontrollable loads.
    const Vec xw = stack_injections(lm, lm.base.x_wye) * sb;
    const Vec xd = stack_injections(lm, lm.base.x_delta) * sb;
    const CVec v_const = (lm.m0 + lm.m_wye * xw + lm.m_delta * xd) / vb;
    const Vec k_const = (lm.k0 + lm.k_wye * xw + lm.k_delta * xd) / vb;
    const CVec a_const = (lm.a0 + lm.a_wye * xw + lm.a_delta * xd) / sb;

    // |v| rows: lazy monitors over every non-slack bus-phase.
    for (int r = 0; r < nl; ++r) {
      LinExpr ex;
      ex.add(ix.vmag[t][r], 1.0);
      for (const Slot& s : slots) {
        const double m = s.is_delta ? lm.k_delta(r, s.col) : lm.k_wye(r, s.col);
        ex.add(s.var, -m * sb * s.scale / vb);
      }
      RowTag tag{"vmag", t, -1, model.index.phase_of(lm.rows[r])};
      const int row = p.add_row(tag3("vmag", t, 0, r), std::move(ex), Rel::eq,
                                k_const[r], tag);
      p.rows[row].lazy = true;
      p.rows[row].defined_var = ix.vmag[t][r];
    }

    // Complex-voltage rows, only where the Taylor terms consume them.
    for (int h = 0; h < n_h; ++h) {
      const HTDevice& dev = in.devices[h];
      const int bus_i = model.bus_index(dev.virtual_bus);
      const int bus_j = model.bus_index(dev.lv_bus);
      for (int phi = 0; phi < 3; ++phi) {
        const struct {
          int e_var, f_var, row;
        } sides[2] = {
            {ix.e_i[t][h][phi], ix.f_i[t][h][phi],
             lm.row_of_busphase[model.index.at(bus_i, phi)]},
            {ix.e_j[t][h][phi], ix.f_j[t][h][phi],
             lm.row_of_busphase[model.index.at(bus_j, phi)]},
        };
        for (const auto& side : sides) {
          LinExpr ex_e, ex_f;
          ex_e.add(side.e_var, 1.0);
          ex_f.add(side.f_var, 1.0);
          for (const Slot& s : slots) {
            const Complex m = s.is_delta ? lm.m_delta(side.row, s.col)
                                         : lm.m_wye(side.row, s.col);
            ex_e.add(s.var, -m.real() * sb * s.scale / vb);
            ex_f.add(s.var, -m.imag() * sb * s.scale / vb);
          }
          RowTag tag_e{"e_def", t, h, phi};
          RowTag tag_f{"f_def", t, h, phi};
          int row = p.add_row(tag3("edef", t, h * 10 + (side.e_var == ix.e_j[t][h][phi]), phi),
                              std::move(ex_e), Rel::eq, v_const[side.row].real(), tag_e);
          p.rows[row].defined_var = side.e_var;
          row = p.add_row(tag3("fdef", t, h * 10 + (side.f_var == ix.f_j[t][h][phi]), phi),
                          std::move(ex_f), Rel::eq, v_const[side.row].imag(), tag_f);
          p.rows[row].defined_var = side.f_var;
        }
      }
    }

    // Slack export rows.
    for (int phi = 0; phi < 3; ++phi) {
      LinExpr ex;
      ex.add(ix.psub[t][phi], 1.0);
      for (const Slot& s : slots) {
        const Complex a = s.is_delta ? lm.a_delta(phi, s.col) : lm.a_wye(phi, s.col);
        ex.add(s.var, -a.real() * sb * s.scale / sb);
      }
      const int row = p.add_row(tag3("psub", t, 0, phi), std::move(ex), Rel::eq,
                                a_const[phi].real(), RowTag{"psub", t, -1, phi});
      p.rows[row].defined_var = ix.psub[t][phi];
    }

    // DG wiring, power-factor link and phase balance.
    for (int d = 0; d < n_d; ++d) {
      const DGSpec& dg = in.dgs[d];
      const double tanphi =
          std::sqrt(std::max(0.0, 1.0 - dg.power_factor * dg.power_factor)) /
          dg.power_factor;
      for (int phi = 0; phi < 3; ++phi) {
        int row = p.add_row(tag3("wdp", t, d, phi),
                            LinExpr().add(ix.dxp_dg[t][d][phi], 1.0).add(
                                ix.pdg[t][d][phi], 1.0),
                            Rel::eq, 0.0, RowTag{"dx_dg_p", t, -1, phi});
        p.rows[row].defined_var = ix.dxp_dg[t][d][phi];
        row = p.add_row(tag3("wdq", t, d, phi),
                        LinExpr().add(ix.dxq_dg[t][d][phi], 1.0).add(
                            ix.qdg[t][d][phi], 1.0),
                        Rel::eq, 0.0, RowTag{"dx_dg_q", t, -1, phi});
        p.rows[row].defined_var = ix.dxq_dg[t][d][phi];
        row = p.add_row(tag3("pf", t, d, phi),
                        LinExpr().add(ix.qdg[t][d][phi], 1.0).add(
                            ix.pdg[t][d][phi], -tanphi),
                        Rel::eq, 0.0, RowTag{"dg_pf", t, -1, phi});
        p.rows[row].defined_var = ix.qdg[t][d][phi];
      }
      for (int phi = 1; phi < 3; ++phi) {
        const int row = p.add_row(
            tag3("bal", t, d, phi),
            LinExpr().add(ix.pdg[t][d][0], 1.0).add(ix.pdg[t][d][phi], -1.0), Rel::eq,
            0.0, RowTag{"dg_balance", t, -1, phi});
        p.rows[row].defined_var = ix.pdg[t][d][phi];
      }
    }

    // Hybrid-transformer blocks.
    for (int h = 0; h < n_h; ++h) {
      const HTDevice& dev = in.devices[h];
      const HTNominal& nom = per.ht[h];
      const auto& v = ix.ht[t][h];
      for (int phi = 0; phi < 3; ++phi) {
        const Complex y = 1.0 / dev.z_ht(phi);
        const double gp = y.real(), bp = y.imag();
        const double md = dev.md;

        const Complex ck = std::exp(Complex(0.0, -nom.gamma[phi]));
        const Complex vk_i = nom.v_i(phi);
        const Complex base = nom.r[phi] * vk_i * ck;
        const double ek_i = vk_i.real(), fk_i = vk_i.imag();
        const double ek_j = nom.v_j(phi).real(), fk_j = nom.v_j(phi).imag();
        const double epqk = nom.e_pq[phi], fpqk = nom.f_pq[phi];
        const double pshk = nom.p_sh[phi];

        Shorthand sh;
        {
          const Complex c_r = vk_i * ck;
          const Complex c_e = nom.r[phi] * ck;
          const Complex c_g = Complex(0, -1) * base;
          const Complex c0 = -base + Complex(0, 1) * base * nom.gamma[phi];
          sh.l0_re.add(v.r[phi], c_r.real())
              .add(ix.e_i[t][h][phi], c_e.real())
              .add(ix.f_i[t][h][phi], (Complex(0, 1) * c_e).real())
              .add(v.gamma[phi], c_g.real());
          sh.l0_re.constant = c0.real();
          sh.l0_im.add(v.r[phi], c_r.imag())
              .add(ix.e_i[t][h][phi], c_e.imag())
              .add(ix.f_i[t][h][phi], (Complex(0, 1) * c_e).imag())
              .add(v.gamma[phi], c_g.imag());
          sh.l0_im.constant = c0.imag();
        }
        sh.l1.add(ix.e_i[t][h][phi], epqk)
            .add(v.epq[phi], ek_i)
            .add(ix.f_i[t][h][phi], fpqk)
            .add(v.fpq[phi], fk_i);
        sh.l1.constant = -(ek_i * epqk + fk_i * fpqk);
        sh.l2.add(ix.e_i[t][h][phi], fpqk)
            .add(v.fpq[phi], ek_i)
            .add(ix.f_i[t][h][phi], -epqk)
            .add(v.epq[phi], -fk_i);
        sh.l2.constant = -(ek_i * fpqk) + fk_i * epqk;
        sh.l3.add(ix.e_j[t][h][phi], epqk)
            .add(v.epq[phi], ek_j)
            .add(ix.f_j[t][h][phi], fpqk)
            .add(v.fpq[phi], fk_j);
        sh.l3.constant = -(ek_j * epqk + fk_j * fpqk);
        sh.l4.add(ix.f_j[t][h][phi], epqk)
            .add(v.epq[phi], fk_j)
            .add(ix.e_j[t][h][phi], -fpqk)
            .add(v.fpq[phi], -ek_j);
        sh.l4.constant = -(fk_j * epqk) + ek_j * fpqk;
        sh.l5.add(v.epq[phi], 2.0 * epqk).add(v.fpq[phi], 2.0 * fpqk);
        sh.l5.constant = -(epqk * epqk + fpqk * fpqk);

        const auto def_row = [&](const char* stem, const char* role, int var,
                                 LinExpr expr) {
          LinExpr ex;
          ex.add(var, 1.0).add(expr, -1.0);
          const int row = p.add_row(tag3(stem, t, h, phi), std::move(ex), Rel::eq, 0.0,
                                    RowTag{role, t, h, phi});
          p.rows[row].defined_var = var;
        };

        def_row("epqd", "epq_def", v.epq[phi], sh.l0_re);
        def_row("fpqd", "fpq_def", v.fpq[phi], sh.l0_im);

        {  // scaled primary and secondary-side injections
          LinExpr e1;
          e1.add(sh.l1, -gp / md).add(sh.l2, bp / md);
          def_row("pprid", "ppri_def", v.ppri[phi], e1);
          LinExpr e2;
          e2.add(sh.l2, gp / md).add(sh.l1, bp / md);
          def_row("qprid", "qpri_def", v.qpri[phi], e2);
          LinExpr e3;
          e3.add(sh.l3, gp / md).add(sh.l4, bp / md);
          def_row("psed", "pse_def", v.pse[phi], e3);
          LinExpr e4;
          e4.add(sh.l4, gp / md).add(sh.l3, -bp / md);
          def_row("qsed", "qse_def", v.qse[phi], e4);
        }
        {  // converter exchange and series reactive power, true scale
          LinExpr e5;
          e5.add(sh.l5, gp).add(sh.l1, gp).add(sh.l3, -gp).add(sh.l2, bp).add(sh.l4, bp);
          def_row("pshd", "psh_def", v.psh[phi], e5);
          LinExpr e6;
          e6.add(sh.l2, gp).add(sh.l4, gp).add(sh.l5, -bp).add(sh.l1, -bp).add(sh.l3, bp);
          def_row("qcd", "qc_def", v.qc[phi], e6);
        }
        {  // capability linearization with the shrink factor
          const double s2 = dev.s_conv_max * dev.s_conv_max;
          if (s2 <= pshk * pshk)
            throw LpBuildError("capability linearization point outside the circle for " +
                               dev.id);
          const double beta = std::sqrt(s2 - pshk * pshk);
          LinExpr ex;
          ex.add(v.qcap[phi], 1.0).add(v.psh[phi], dev.c1 * pshk / beta);
          const int row =
              p.add_row(tag3("qcapd", t, h, phi), std::move(ex), Rel::eq,
                        dev.c1 * (beta + pshk * pshk / beta), RowTag{"qcap_lin", t, h, phi});
          p.rows[row].defined_var = v.qcap[phi];
        }
        {  // secondary-side totals carry the scaled exchange terms
          LinExpr ex;
          ex.add(v.psec[phi], 1.0).add(v.pse[phi], -1.0).add(v.psh[phi], 1.0 / md);
          const int row = p.add_row(tag3("psecd", t, h, phi), std::move(ex), Rel::eq, 0.0,
                                    RowTag{"psec_def", t, h, phi});
          p.rows[row].defined_var = v.psec[phi];
          LinExpr ex2;
          ex2.add(v.qsec[phi], 1.0).add(v.qse[phi], -1.0).add(v.qsh[phi], -1.0 / md);
          const int row2 = p.add_row(tag3("qsecd", t, h, phi), std::move(ex2), Rel::eq,
                                     0.0, RowTag{"qsec_def", t, h, phi});
          p.rows[row2].defined_var = v.qsec[phi];
        }

        // Converter reactive ranges against the linearized capability.
        p.add_row(tag3("qshu", t, h, phi),
                  LinExpr().add(v.qsh[phi], 1.0).add(v.qcap[phi], -1.0), Rel::le, 0.0,
                  RowTag{"qsh_range", t, h, phi});
        p.add_row(tag3("qshl", t, h, phi),
                  LinExpr().add(v.qsh[phi], 1.0).add(v.qcap[phi], 1.0), Rel::ge, 0.0,
                  RowTag{"qsh_range", t, h, phi});
        p.add_row(tag3("qcu", t, h, phi),
                  LinExpr().add(v.qc[phi], 1.0).add(v.qcap[phi], -1.0), Rel::le, 0.0,
                  RowTag{"qc_range", t, h, phi});
        p.add_row(tag3("qcl", t, h, phi),
                  LinExpr().add(v.qc[phi], 1.0).add(v.qcap[phi], 1.0), Rel::ge, 0.0,
                  RowTag{"qc_range", t, h, phi});

        // Absolute-value epigraphs.
        const auto epigraph = [&](const char* stem, const char* role, int absvar,
                                  int var) {
          p.add_row(tag3(stem, t, h, phi) + "a",
                    LinExpr().add(absvar, 1.0).add(var, -1.0), Rel::ge, 0.0,
                    RowTag{role, t, h, phi});
          p.add_row(tag3(stem, t, h, phi) + "b",
                    LinExpr().add(absvar, 1.0).add(var, 1.0), Rel::ge, 0.0,
                    RowTag{role, t, h, phi});
        };
        epigraph("eab", "eabs_epi", v.eabs[phi], v.epq[phi]);
        epigraph("fab", "fabs_epi", v.fabs[phi], v.fpq[phi]);
        epigraph("gab", "gabs_epi", v.gabs[phi], v.gamma[phi]);
        epigraph("qab", "qabs_epi", v.qabs[phi], v.qsh[phi]);

        // Injection wiring to the network model.
        const auto wire = [&](const char* stem, const char* role, int dxvar,
                              int source) {
          const int row = p.add_row(tag3(stem, t, h, phi),
                                    LinExpr().add(dxvar, 1.0).add(source, 1.0), Rel::eq,
                                    0.0, RowTag{role, t, h, phi});
          p.rows[row].defined_var = dxvar;
        };
        wire("whpi", "dx_ht_p", ix.dxp_ht_i[t][h][phi], v.ppri[phi]);
        wire("whqi", "dx_ht_q", ix.dxq_ht_i[t][h][phi], v.qpri[phi]);
        wire("whpj", "dx_ht_p", ix.dxp_ht_j[t][h][phi], v.psec[phi]);
        wire("whqj", "dx_ht_q", ix.dxq_ht_j[t][h][phi], v.qsec[phi]);
      }
    }
  }

  // Installation coupling: any compensation forces the binary to one.
  for (int h = 0; h < n_h; ++h) {
    LinExpr ex;
    ex.add(ix.b[h], 1.0);
    for (int t = 0; t < n_t; ++t)
      for (int phi = 0; phi < 3; ++phi) {
        const auto& v = ix.ht[t][h];
        ex.add(v.eabs[phi], -in.weights.c2);
        ex.add(v.fabs[phi], -in.weights.c2);
        ex.add(v.gabs[phi], -in.weights.c2);
        ex.add(v.qabs[phi], -in.weights.c2);
      }
    p.add_row("install_h" + std::to_string(h), std::move(ex), Rel::ge, 0.0,
              RowTag{"install", -1, h, -1});
  }

  // --- objective -------------------------------------------------------------
  const double horizon = in.npv_objective ? in.annuity : 1.0;
  for (int t = 0; t < n_t; ++t) {
    const double coef = horizon * in.periods[t].weight_hours * sb * in.c_e;
    for (int phi = 0; phi < 3; ++phi) p.set_objective_term(ix.psub[t][phi], coef);
  }
  if (in.npv_objective) {
    p.objective_constant = -in.annuity * in.c_ref;
    for (int h = 0; h < n_h; ++h)
      p.set_objective_term(ix.b[h], -in.invest_costs.at(h));
  }
  const double sign23 = in.literal_penalty_signs ? 1.0 : -1.0;
  for (int t = 0; t < n_t; ++t)
    for (int h = 0; h < n_h; ++h)
      for (int phi = 0; phi < 3; ++phi) {
        const auto& v = ix.ht[t][h];
        p.set_objective_term(v.eabs[phi], -in.weights.w1);
        p.set_objective_term(v.fabs[phi], -in.weights.w1);
        p.set_objective_term(v.qabs[phi], sign23 * in.weights.w2);
        p.set_objective_term(v.gabs[phi], sign23 * in.weights.w3);
      }

  p.validate();
  return out;
}

HtLpSolution extract_solution(const LpBuildInputs& in, const HtLpIndex& ix,
                              const Vec& values, double objective) {
  const NetworkModel& model = *in.model;
  const int n = model.index.size();
  HtLpSolution sol;
  sol.objective = objective;

  sol.b_ht.assign(ix.n_devices, false);
  for (int h = 0; h < ix.n_devices; ++h) sol.b_ht[h] = values[ix.b[h]] > 0.5;

  sol.setpoints.resize(ix.n_periods);
  sol.injections.resize(ix.n_periods);
  sol.pdg.resize(ix.n_periods);
  sol.psub.resize(ix.n_periods);
  sol.dx_wye.assign(ix.n_periods, CVec::Zero(n));
  sol.dx_delta.assign(ix.n_periods, CVec::Zero(n));
  sol.dx_ht.assign(ix.n_periods, CVec::Zero(n));

  double c_exp = 0.0;
  for (int t = 0; t < ix.n_periods; ++t) {
    sol.psub[t] = Vec::Zero(3);
    for (int phi = 0; phi < 3; ++phi) sol.psub[t][phi] = values[ix.psub[t][phi]];
    c_exp += in.periods[t].weight_hours * sol.psub[t].sum() * model.s_base_kva * in.c_e;

    sol.pdg[t] = Vec::Zero(ix.n_dgs);
    for (int d = 0; d < ix.n_dgs; ++d) {
      sol.pdg[t][d] = values[ix.pdg[t][d][0]];
      const DGSpec& dg = in.dgs[d];
      for (int phi = 0; phi < 3; ++phi) {
        const int bp = model.index.at(dg.bus, phi);
        const Complex dx(values[ix.dxp_dg[t][d][phi]], values[ix.dxq_dg[t][d][phi]]);
        if (dg.is_delta)
          sol.dx_delta[t][bp] += dx;
        else
          sol.dx_wye[t][bp] += dx;
      }
    }

    sol.setpoints[t].resize(ix.n_devices);
    sol.injections[t].resize(ix.n_devices);
    for (int h = 0; h < ix.n_devices; ++h) {
      const HTDevice& dev = in.devices[h];
      const auto& v = ix.ht[t][h];
      HTSetpoint& sp = sol.setpoints[t][h];
      HTInjection& inj = sol.injections[t][h];
      for (int phi = 0; phi < 3; ++phi) {
        sp.r[phi] = values[v.r[phi]];
        sp.gamma[phi] = values[v.gamma[phi]];
        inj.e_pq[phi] = values[v.epq[phi]];
        inj.f_pq[phi] = values[v.fpq[phi]];
        inj.p_pri[phi] = values[v.ppri[phi]] * dev.md;
        inj.q_pri[phi] = values[v.qpri[phi]] * dev.md;
        inj.p_se[phi] = values[v.pse[phi]] * dev.md;
        inj.q_se[phi] = values[v.qse[phi]] * dev.md;
        inj.p_sec[phi] = values[v.psec[phi]] * dev.md;
        inj.q_sec[phi] = values[v.qsec[phi]] * dev.md;
        inj.p_sh[phi] = values[v.psh[phi]];
        inj.q_sh[phi] = values[v.qsh[phi]];
        inj.q_c[phi] = values[v.qc[phi]];
        inj.q_cap[phi] = values[v.qcap[phi]];

        const int bp_i = model.index.at(model.bus_index(dev.virtual_bus), phi);
        const int bp_j = model.index.at(model.bus_index(dev.lv_bus), phi);
        sol.dx_ht[t][bp_i] += dev.md * Complex(values[ix.dxp_ht_i[t][h][phi]],
                                               values[ix.dxq_ht_i[t][h][phi]]);
        sol.dx_ht[t][bp_j] += dev.md * Complex(values[ix.dxp_ht_j[t][h][phi]],
                                               values[ix.dxq_ht_j[t][h][phi]]);
      }
    }
  }
  sol.c_exp = c_exp;
  double invested = 0.0;
  for (int h = 0; h < ix.n_devices; ++h)
    if (sol.b_ht[h]) invested += in.invest_costs.at(h);
  sol.npv = in.annuity * (c_exp - in.c_ref) - invested;
  return sol;
}

}  // namespace htslp
