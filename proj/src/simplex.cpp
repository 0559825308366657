#include "htslp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>

#include <Eigen/SparseLU>

namespace htslp {

namespace {

constexpr double kEps = 1e-12;

struct Eta {
  int p;  // pivot position
  double wp;
  std::vector<std::pair<int, double>> w;  // entries of the FTRANed column, w[p] excluded
};

// One simplex run over the currently active row set.
class Solver {
 public:
  Solver(const LpProblem& problem, const SimplexOptions& opt) : p_(problem), opt_(opt) {
    n_ = static_cast<int>(p_.vars.size());
    m_all_ = static_cast<int>(p_.rows.size());
    ntot_ = n_ + m_all_;

    lb_.resize(ntot_);
    ub_.resize(ntot_);
    cost_.assign(ntot_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lb_[j] = p_.vars[j].lb;
      ub_[j] = p_.vars[j].ub;
    }
    for (int g = 0; g < m_all_; ++g) {
      switch (p_.rows[g].rel) {
        case Rel::le: lb_[n_ + g] = 0.0; ub_[n_ + g] = kInf; break;
        case Rel::ge: lb_[n_ + g] = -kInf; ub_[n_ + g] = 0.0; break;
        case Rel::eq: lb_[n_ + g] = 0.0; ub_[n_ + g] = 0.0; break;
      }
    }
    const double sign = p_.maximize ? -1.0 : 1.0;
    for (const auto& [v, c] : p_.objective) cost_[v] += sign * c;

    // A row may only be lazy when its defined variable really is private to
    // it and carries no objective weight; otherwise treat it as ordinary.
    std::vector<int> occurrences(n_, 0);
    for (const auto& row : p_.rows)
      for (const auto& [v, c] : row.coeffs) ++occurrences[v];
    lazy_ok_.assign(m_all_, false);
    for (int g = 0; g < m_all_; ++g) {
      const auto& row = p_.rows[g];
      if (!row.lazy || row.rel != Rel::eq || row.defined_var < 0) continue;
      const int d = row.defined_var;
      if (occurrences[d] != 1 || cost_[d] != 0.0) continue;
      bool has_coeff = false;
      for (const auto& [v, c] : row.coeffs)
        if (v == d && std::abs(c) > kEps) has_coeff = true;
      lazy_ok_[g] = has_coeff;
    }
  }

  SolveOutcome run(const SimplexBasis* warm) {
    status_.assign(ntot_, VarStatus::at_lower);
    row_active_.assign(m_all_, 1);
    for (int g = 0; g < m_all_; ++g)
      if (lazy_ok_[g]) row_active_[g] = 0;

    bool have_warm = warm && warm->valid &&
                     static_cast<int>(warm->status.size()) == ntot_ &&
                     static_cast<int>(warm->row_active.size()) == m_all_;
    if (have_warm) {
      status_ = warm->status;
      for (int g = 0; g < m_all_; ++g)
        row_active_[g] = lazy_ok_[g] ? warm->row_active[g] : 1;
    } else {
      for (int j = 0; j < ntot_; ++j) status_[j] = default_nonbasic(j);
    }

    SolveOutcome out;
    while (true) {
      build_instance();
      if (!setup_basis(have_warm)) {
        have_warm = false;
        continue;  // fall back to a crash basis
      }
      const LpStatus st = iterate(out.iterations);
      if (st == LpStatus::optimal) {
        std::vector<int> violated = violated_lazy_rows();
        if (violated.empty()) {
          finalize(out, LpStatus::optimal);
          if (opt_.verbose)
            std::cerr << "lp: m=" << m_ << " iters=" << out.iterations
                      << " activations=" << out.activations << " obj=" << out.objective
                      << "\n";
          return out;
        }
        for (int g : violated) {
          row_active_[g] = 1;
          status_[p_.rows[g].defined_var] = VarStatus::basic;
          status_[n_ + g] = default_nonbasic(n_ + g);
          ++out.activations;
        }
        have_warm = true;  // keep the current basis, extended
        continue;
      }
      finalize(out, st);
      if (opt_.verbose)
        std::cerr << "lp: m=" << m_ << " iters=" << out.iterations << " status "
                  << static_cast<int>(st) << "\n";
      return out;
    }
  }

 private:
  const LpProblem& p_;
  SimplexOptions opt_;
  int n_ = 0, m_all_ = 0, ntot_ = 0;
  Vec lb_, ub_;
  std::vector<double> cost_;
  std::vector<char> lazy_ok_;

  std::vector<VarStatus> status_;
  std::vector<char> row_active_;

  // Instance (active rows only).
  int m_ = 0;
  std::vector<int> act_rows_;  // instance position -> global row
  std::vector<int> act_pos_;   // global row -> instance position or -1
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;
  Vec rhs_;

  std::vector<int> basic_;    // instance position -> variable
  std::vector<int> pos_of_;   // variable -> basic position or -1
  Vec xb_;                    // basic values
  Eigen::SparseLU<SpMat> lu_;
  std::vector<Eta> etas_;
  int pivots_since_refactor_ = 0;
  int degen_streak_ = 0;
  double ratio_skip_ = 1e-6;  // candidate-pivot floor for the ratio test
  int price_cursor_ = 0;

  VarStatus default_nonbasic(int j) const {
    if (lb_[j] > -kInf) return VarStatus::at_lower;
    if (ub_[j] < kInf) return VarStatus::at_upper;
    return VarStatus::nonbasic_free;
  }

  double nonbasic_value(int j) const {
    switch (status_[j]) {
      case VarStatus::at_lower: return lb_[j];
      case VarStatus::at_upper: return ub_[j];
      default: return 0.0;
    }
  }

  void build_instance() {
    act_rows_.clear();
    act_pos_.assign(m_all_, -1);
    for (int g = 0; g < m_all_; ++g)
      if (row_active_[g]) {
        act_pos_[g] = static_cast<int>(act_rows_.size());
        act_rows_.push_back(g);
      }
    m_ = static_cast<int>(act_rows_.size());

    std::vector<int> counts(n_, 0);
    for (int g : act_rows_)
      for (const auto& [v, c] : p_.rows[g].coeffs) ++counts[v];
    col_start_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + counts[j];
    col_row_.assign(col_start_[n_], 0);
    col_val_.assign(col_start_[n_], 0.0);
    std::vector<int> fill(n_, 0);
    for (int i = 0; i < m_; ++i) {
      const auto& row = p_.rows[act_rows_[i]];
      for (const auto& [v, c] : row.coeffs) {
        const int k = col_start_[v] + fill[v]++;
        col_row_[k] = i;
        col_val_[k] = c;
      }
    }
    rhs_.resize(m_);
    for (int i = 0; i < m_; ++i) rhs_[i] = p_.rows[act_rows_[i]].rhs;
  }

  // Scatter the column of variable j into dense `out` (instance rows).
  void column_into(int j, Vec& out) const {
    out.setZero();
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
        out[col_row_[k]] = col_val_[k];
    } else {
      const int pos = act_pos_[j - n_];
      if (pos >= 0) out[pos] = 1.0;
    }
  }

  double dot_column(int j, const Vec& y) const {
    if (j < n_) {
      double s = 0.0;
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
        s += col_val_[k] * y[col_row_[k]];
      return s;
    }
    const int pos = act_pos_[j - n_];
    return pos >= 0 ? y[pos] : 0.0;
  }

  bool setup_basis(bool from_status) {
    basic_.clear();
    pos_of_.assign(ntot_, -1);
    if (from_status) {
      for (int j = 0; j < ntot_; ++j) {
        if (status_[j] != VarStatus::basic) continue;
        if (j >= n_ && act_pos_[j - n_] < 0) {  // logical of an inactive row
          status_[j] = default_nonbasic(j);
          continue;
        }
        basic_.push_back(j);
      }
      if (static_cast<int>(basic_.size()) != m_) from_status = false;
    }
    if (!from_status) {
      // Crash: defined variables of equality rows where possible, logicals
      // elsewhere.
      basic_.clear();
      std::vector<char> used(ntot_, 0);
      for (int j = 0; j < ntot_; ++j)
        if (status_[j] == VarStatus::basic) status_[j] = default_nonbasic(j);
      for (int i = 0; i < m_; ++i) {
        const auto& row = p_.rows[act_rows_[i]];
        int pick = n_ + act_rows_[i];
        if (row.rel == Rel::eq && row.defined_var >= 0 && !used[row.defined_var]) {
          for (const auto& [v, c] : row.coeffs)
            if (v == row.defined_var && std::abs(c) > kEps) pick = row.defined_var;
        }
        if (used[pick]) pick = n_ + act_rows_[i];
        used[pick] = 1;
        basic_.push_back(pick);
        status_[pick] = VarStatus::basic;
      }
    }
    for (std::size_t i = 0; i < basic_.size(); ++i) pos_of_[basic_[i]] = static_cast<int>(i);

    if (!refactorize()) {
      // Singular crash basis: retreat to the all-logical basis.
      for (int j : basic_) status_[j] = default_nonbasic(j);
      basic_.clear();
      pos_of_.assign(ntot_, -1);
      for (int i = 0; i < m_; ++i) {
        const int j = n_ + act_rows_[i];
        basic_.push_back(j);
        status_[j] = VarStatus::basic;
        pos_of_[j] = i;
      }
      if (!refactorize()) return false;
    }
    compute_xb();
    return true;
  }

  bool refactorize() {
    if (m_ == 0) {
      etas_.clear();
      pivots_since_refactor_ = 0;
      return true;
    }
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < m_; ++i) {
      const int j = basic_[i];
      if (j < n_) {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
          trips.emplace_back(col_row_[k], i, col_val_[k]);
      } else {
        trips.emplace_back(act_pos_[j - n_], i, 1.0);
      }
    }
    SpMat b(m_, m_);
    b.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(b);
    etas_.clear();
    pivots_since_refactor_ = 0;
    return lu_.info() == Eigen::Success;
  }

  void compute_xb() {
    Vec rhs_eff = rhs_;
    for (int j = 0; j < n_; ++j) {
      if (status_[j] == VarStatus::basic) continue;
      const double xj = nonbasic_value(j);
      if (xj == 0.0) continue;
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
        rhs_eff[col_row_[k]] -= col_val_[k] * xj;
    }
    // Nonbasic logicals always sit at zero; nothing to subtract.
    xb_ = ftran(rhs_eff);
  }

  Vec ftran(Vec v) {
    if (m_ == 0) return v;
    Vec x = lu_.solve(v);
    for (const auto& e : etas_) {
      const double xp = x[e.p] / e.wp;
      x[e.p] = xp;
      if (xp != 0.0)
        for (const auto& [i, wi] : e.w) x[i] -= wi * xp;
    }
    return x;
  }

  Vec btran(Vec c) {
    if (m_ == 0) return c;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = c[it->p];
      for (const auto& [i, wi] : it->w) acc -= wi * c[i];
      c[it->p] = acc / it->wp;
    }
    return lu_.transpose().solve(c);
  }

  // Infeasibility gradient over basic positions; zero when feasible.
  double infeasibility(Vec* grad) const {
    double total = 0.0;
    if (grad) grad->setZero();
    for (int i = 0; i < m_; ++i) {
      const int j = basic_[i];
      if (xb_[i] < lb_[j] - opt_.feas_tol) {
        total += lb_[j] - xb_[i];
        if (grad) (*grad)[i] = -1.0;
      } else if (xb_[i] > ub_[j] + opt_.feas_tol) {
        total += xb_[i] - ub_[j];
        if (grad) (*grad)[i] = 1.0;
      }
    }
    return total;
  }

  // A phase-1 plateau usually means the working set is genuinely infeasible
  // by a whisker (fixed binaries versus structurally positive compensation
  // sums). Prune only on a certificate that survives exact verification.
  bool certify_infeasible(const Vec& grad) {
    const Vec y = btran(grad);
    Vec farkas = Vec::Zero(m_all_);
    for (int i = 0; i < m_; ++i) farkas[act_rows_[i]] = y[i];
    const bool ok = verify_infeasibility_certificate(p_, farkas, opt_.feas_tol);
    if (opt_.verbose) {
      double sign_viol = 0.0;
      for (std::size_t g = 0; g < p_.rows.size(); ++g) {
        if (p_.rows[g].rel == Rel::le) sign_viol = std::max(sign_viol, farkas[g]);
        if (p_.rows[g].rel == Rel::ge) sign_viol = std::max(sign_viol, -farkas[g]);
      }
      Vec coef = Vec::Zero(p_.vars.size());
      double rhs = 0.0;
      for (std::size_t g = 0; g < p_.rows.size(); ++g) {
        for (const auto& [v, c] : p_.rows[g].coeffs) coef[v] += farkas[g] * c;
        rhs += farkas[g] * p_.rows[g].rhs;
      }
      double sup = 0.0;
      int inf_bound = -1;
      for (std::size_t j = 0; j < p_.vars.size(); ++j) {
        if (coef[j] == 0.0) continue;
        const double b = coef[j] > 0 ? p_.vars[j].ub : p_.vars[j].lb;
        if (!std::isfinite(b)) { if (inf_bound < 0) inf_bound = (int)j; continue; }
        sup += coef[j] * b;
      }
      std::cerr << "  certify: ok=" << ok << " sign_viol=" << sign_viol
                << " sup=" << sup << " rhs=" << rhs;
      if (inf_bound >= 0) std::cerr << " inf_bound_var=" << p_.vars[inf_bound].name
                                    << " coef=" << coef[inf_bound];
      std::cerr << "\n";
    }
    return ok;
  }

  LpStatus iterate(long& iterations) {
    Vec grad(m_);
    Vec w(m_);
    long local_iter = 0;
    double best_infeas = kInf;
    int stall = 0;
    bool force_bland = false;
    while (true) {
      if (iterations >= opt_.max_iterations) return LpStatus::iteration_limit;
      ++iterations;
      ++local_iter;

      // Periodic exact probe: refresh the factorization, and when the
      // working set is a hair infeasible try to prove it with a verified
      // certificate instead of crawling the plateau.
      if (++stall >= 4000) {
        stall = 0;
        refactorize();
        compute_xb();
        const double exact = infeasibility(&grad);
        if (exact > opt_.feas_tol) {
          if (certify_infeasible(grad)) return LpStatus::infeasible;
          if (exact > 0.5 * best_infeas) force_bland = true;
          best_infeas = std::min(best_infeas, exact);
        }
      }

      double infeas = infeasibility(&grad);
      if (opt_.verbose && local_iter % 20000 == 0) {
        int worst = -1;
        double dist = 0.0;
        for (int i = 0; i < m_; ++i) {
          const int j = basic_[i];
          const double d = std::max(lb_[j] - xb_[i], xb_[i] - ub_[j]);
          if (d > dist) {
            dist = d;
            worst = j;
          }
        }
        std::cerr << "  simplex iter " << local_iter << " infeas " << infeas
                  << " worst ";
        if (worst >= 0 && worst < n_)
          std::cerr << p_.vars[worst].name;
        else if (worst >= n_)
          std::cerr << "slack:" << p_.rows[worst - n_].name;
        std::cerr << " dist " << dist << " etas " << etas_.size() << "\n";
      }
      const bool phase1 = infeas > opt_.feas_tol;

      Vec y;
      if (phase1) {
        y = btran(grad);
      } else {
        Vec cb(m_);
        for (int i = 0; i < m_; ++i) cb[i] = cost_[basic_[i]];
        y = btran(cb);
      }

      const bool bland = force_bland || degen_streak_ >= opt_.degeneracy_limit;
      int enter = -1;
      int dir = 0;
      double best = phase1 ? opt_.feas_tol : opt_.opt_tol;
      const auto consider = [&](int j) -> bool {
        if (status_[j] == VarStatus::basic) return false;
        if (lb_[j] == ub_[j]) return false;  // fixed
        const double d = phase1 ? -dot_column(j, y)
                                : cost_[j] - dot_column(j, y);
        // Moving up from lower (or free) pays when d < 0; moving down from
        // upper (or free) pays when d > 0.
        double score = 0.0;
        int sigma = 0;
        if (status_[j] == VarStatus::at_lower && d < -best) {
          score = -d;
          sigma = 1;
        } else if (status_[j] == VarStatus::at_upper && d > best) {
          score = d;
          sigma = -1;
        } else if (status_[j] == VarStatus::nonbasic_free && std::abs(d) > best) {
          score = std::abs(d);
          sigma = d < 0 ? 1 : -1;
        }
        if (sigma == 0) return false;
        enter = j;
        dir = sigma;
        if (!bland) best = score;
        return true;
      };

      if (bland) {
        for (int j = 0; j < ntot_ && enter < 0; ++j) consider(j);
      } else {
        // Partial pricing: rotate over fixed-size segments.
        const int segment = std::max(4096, ntot_ / 8);
        int scanned = 0;
        while (scanned < ntot_) {
          const int start = price_cursor_;
          for (int k = 0; k < segment && scanned < ntot_; ++k, ++scanned) {
            consider((start + k) % ntot_);
          }
          price_cursor_ = (start + segment) % ntot_;
          if (enter >= 0) break;
        }
      }

      if (enter < 0) {
        // Exit only against exactly recomputed values; incremental drift can
        // misclassify the phase near the tolerance band.
        if (pivots_since_refactor_ > 0 || !etas_.empty()) {
          refactorize();
          compute_xb();
          const double exact = infeasibility(nullptr);
          if ((exact > opt_.feas_tol) != phase1) continue;
        }
        return phase1 ? LpStatus::infeasible : LpStatus::optimal;
      }

      column_into(enter, w);
      Vec alpha = ftran(w);

      // Two-pass ratio test. Pass one finds the largest step admissible with
      // bounds relaxed by the feasibility tolerance; pass two picks, among
      // blockers within that step, the numerically strongest pivot. Keeps
      // pivots large so the eta updates stay well conditioned.
      const double enter_val = nonbasic_value(enter);
      double t_limit = kInf;  // bound flip
      if (lb_[enter] > -kInf && ub_[enter] < kInf) t_limit = ub_[enter] - lb_[enter];

      // Strict event step and target bound for basic position i.
      const auto event_of = [&](int i, double relax) {
        struct Event {
          double t = kInf;
          int to_upper = 0;
        } ev;
        const double a = alpha[i];
        if (std::abs(a) < ratio_skip_) return ev;
        const int j = basic_[i];
        const double delta = -dir * a;
        if (xb_[i] < lb_[j] - opt_.feas_tol) {
          if (delta > 0) ev.t = (lb_[j] + relax - xb_[i]) / delta;
        } else if (xb_[i] > ub_[j] + opt_.feas_tol) {
          if (delta < 0) {
            ev.t = (ub_[j] - relax - xb_[i]) / delta;
            ev.to_upper = 1;
          }
        } else if (delta < 0) {
          if (lb_[j] > -kInf)
            ev.t = (lb_[j] - relax - std::min(xb_[i], ub_[j])) / delta;
        } else {
          if (ub_[j] < kInf) {
            ev.t = (ub_[j] + relax - std::max(xb_[i], lb_[j])) / delta;
            ev.to_upper = 1;
          }
        }
        if (ev.t < 0.0) ev.t = 0.0;
        return ev;
      };

      // Relaxation stays far below the working feasibility margin so the
      // per-pivot overshoot cannot accumulate into phantom infeasibility
      // within one refactorization cycle.
      const double relax = 0.01 * opt_.feas_tol;
      double t_relaxed = t_limit;
      for (int i = 0; i < m_; ++i)
        t_relaxed = std::min(t_relaxed, event_of(i, relax).t);

      int leave_pos = -1;
      int leave_to_upper = 0;
      double t_best = t_limit;
      double best_pivot = 0.0;
      for (int i = 0; i < m_; ++i) {
        const auto ev = event_of(i, 0.0);
        if (ev.t > t_relaxed) continue;
        const double a = std::abs(alpha[i]);
        bool take = false;
        if (bland) {
          take = leave_pos < 0 || basic_[i] < basic_[leave_pos];
        } else {
          take = a > best_pivot + 1e-12 ||
                 (std::abs(a - best_pivot) <= 1e-12 &&
                  (leave_pos < 0 || basic_[i] < basic_[leave_pos]));
        }
        if (take) {
          leave_pos = i;
          leave_to_upper = ev.to_upper;
          best_pivot = a;
          t_best = ev.t;
        }
      }
      if (leave_pos < 0 && t_limit > t_relaxed) {
        // All blockers sit below the pivot floor; retry once accepting
        // smaller pivots rather than stepping through their bounds.
        ratio_skip_ = opt_.pivot_tol;
        for (int i = 0; i < m_; ++i) {
          const auto ev = event_of(i, 0.0);
          if (ev.t < t_best) {
            t_best = ev.t;
            leave_pos = i;
            leave_to_upper = ev.to_upper;
          }
        }
        ratio_skip_ = 1e-6;
      }

      if (t_best == kInf) {
        if (phase1) throw std::logic_error("phase-1 ray; inconsistent bounds");
        return LpStatus::unbounded;
      }

      degen_streak_ = (t_best <= 1e-9) ? degen_streak_ + 1 : 0;

      // Apply the step.
      if (t_best != 0.0)
        for (int i = 0; i < m_; ++i) xb_[i] -= dir * alpha[i] * t_best;

      if (leave_pos < 0) {
        // Bound flip: entering variable crosses to its other bound.
        status_[enter] =
            dir > 0 ? VarStatus::at_upper : VarStatus::at_lower;
        continue;
      }

      const int leaving = basic_[leave_pos];
      if (std::abs(alpha[leave_pos]) < opt_.pivot_tol) {
        // Numerically bad pivot: refresh the factorization and retry.
        if (pivots_since_refactor_ > 0) {
          refactorize();
          compute_xb();
          continue;
        }
        throw std::runtime_error("simplex: vanishing pivot after refactorization");
      }

      status_[leaving] = leave_to_upper ? VarStatus::at_upper : VarStatus::at_lower;
      if (lb_[leaving] == -kInf && ub_[leaving] == kInf)
        status_[leaving] = VarStatus::nonbasic_free;
      status_[enter] = VarStatus::basic;
      basic_[leave_pos] = enter;
      pos_of_[leaving] = -1;
      pos_of_[enter] = leave_pos;
      xb_[leave_pos] = enter_val + dir * t_best;

      Eta eta;
      eta.p = leave_pos;
      eta.wp = alpha[leave_pos];
      for (int i = 0; i < m_; ++i)
        if (i != leave_pos && std::abs(alpha[i]) > kEps) eta.w.emplace_back(i, alpha[i]);
      etas_.push_back(std::move(eta));

      if (++pivots_since_refactor_ >= opt_.refactor_interval) {
        if (!refactorize()) throw std::runtime_error("simplex: basis refactorization failed");
        compute_xb();
      }
    }
  }

  std::vector<int> violated_lazy_rows() {
    std::vector<int> out;
    lazy_value_.clear();
    for (int g = 0; g < m_all_; ++g) {
      if (row_active_[g] || !lazy_ok_[g]) continue;
      const auto& row = p_.rows[g];
      double sum = 0.0;
      double dcoef = 0.0;
      for (const auto& [v, c] : row.coeffs) {
        if (v == row.defined_var) {
          dcoef = c;
          continue;
        }
        sum += c * value_of(v);
      }
      const double xd = (row.rhs - sum) / dcoef;
      if (xd < lb_[row.defined_var] - opt_.feas_tol ||
          xd > ub_[row.defined_var] + opt_.feas_tol)
        out.push_back(g);
      else
        lazy_value_[row.defined_var] = xd;
    }
    return out;
  }

  double value_of(int j) const {
    if (status_[j] == VarStatus::basic) return xb_[pos_of_[j]];
    return nonbasic_value(j);
  }

  void finalize(SolveOutcome& out, LpStatus st) {
    out.status = st;
    out.values = Vec::Zero(n_);
    for (int j = 0; j < n_; ++j) out.values[j] = value_of(j);
    for (const auto& [j, v] : lazy_value_) out.values[j] = v;

    out.basis.valid = true;
    out.basis.status = status_;
    out.basis.row_active.assign(row_active_.begin(), row_active_.end());

    const double sign = p_.maximize ? -1.0 : 1.0;
    double obj = 0.0;
    for (const auto& [v, c] : p_.objective) obj += c * out.values[v];
    out.objective = obj + p_.objective_constant;

    out.dual_values = Vec::Zero(m_all_);
    if (st == LpStatus::optimal) {
      Vec cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost_[basic_[i]];
      const Vec y = btran(cb);
      for (int i = 0; i < m_; ++i) out.dual_values[act_rows_[i]] = sign * y[i];
    } else if (st == LpStatus::infeasible) {
      Vec grad(m_);
      infeasibility(&grad);
      const Vec y = btran(grad);
      out.farkas = Vec::Zero(m_all_);
      for (int i = 0; i < m_; ++i) out.farkas[act_rows_[i]] = y[i];
    }
  }

  std::map<int, double> lazy_value_;
};

}  // namespace

SolveOutcome solve_lp(const LpProblem& problem, const SimplexOptions& options,
                      const SimplexBasis* warm) {
  Solver solver(problem, options);
  return solver.run(warm);
}

LpResiduals check_optimality(const LpProblem& p, const SolveOutcome& out) {
  LpResiduals res;
  std::vector<double> row_dual(p.rows.size(), 0.0);
  for (std::size_t g = 0; g < p.rows.size(); ++g)
    if (out.dual_values.size() > static_cast<int>(g)) row_dual[g] = out.dual_values[g];

  Vec reduced = Vec::Zero(p.vars.size());
  for (const auto& [v, c] : p.objective) reduced[v] += c;
  for (std::size_t g = 0; g < p.rows.size(); ++g) {
    const auto& row = p.rows[g];
    double act = 0.0;
    for (const auto& [v, c] : row.coeffs) {
      act += c * out.values[v];
      reduced[v] -= row_dual[g] * c;
    }
    const double slack = row.rhs - act;
    double viol = 0.0;
    if (row.rel == Rel::eq) viol = std::abs(slack);
    if (row.rel == Rel::le) viol = std::max(0.0, -slack);
    if (row.rel == Rel::ge) viol = std::max(0.0, slack);
    res.primal = std::max(res.primal, viol);
    res.complementary = std::max(res.complementary, std::abs(row_dual[g] * slack));
  }
  for (std::size_t j = 0; j < p.vars.size(); ++j) {
    const auto& v = p.vars[j];
    res.primal = std::max(res.primal, std::max(v.lb - out.values[j], 0.0));
    res.primal = std::max(res.primal, std::max(out.values[j] - v.ub, 0.0));
    // At an interior value the reduced cost must vanish.
    const bool at_lb = v.lb > -kInf && out.values[j] <= v.lb + 1e-7;
    const bool at_ub = v.ub < kInf && out.values[j] >= v.ub - 1e-7;
    if (!at_lb && !at_ub)
      res.complementary = std::max(res.complementary, std::abs(reduced[j]));
  }
  return res;
}

bool verify_infeasibility_certificate(const LpProblem& p, const Vec& y, double tol) {
  if (y.size() != static_cast<int>(p.rows.size())) return false;
  // Sign conditions so that y aggregates the rows into a valid inequality
  // sum_i y_i a_i x >= sum_i y_i b_i for every feasible x.
  for (std::size_t g = 0; g < p.rows.size(); ++g) {
    if (p.rows[g].rel == Rel::le && y[g] > tol) return false;
    if (p.rows[g].rel == Rel::ge && y[g] < -tol) return false;
  }
  Vec coef = Vec::Zero(p.vars.size());
  double rhs = 0.0;
  for (std::size_t g = 0; g < p.rows.size(); ++g) {
    for (const auto& [v, c] : p.rows[g].coeffs) coef[v] += y[g] * c;
    rhs += y[g] * p.rows[g].rhs;
  }
  double sup = 0.0;
  for (std::size_t j = 0; j < p.vars.size(); ++j) {
    if (coef[j] == 0.0) continue;
    const double b = coef[j] > 0 ? p.vars[j].ub : p.vars[j].lb;
    if (!std::isfinite(b)) return false;  // unbounded aggregate: no certificate
    sup += coef[j] * b;
  }
  return sup < rhs - tol;
}

}  // namespace htslp
