// Per-period linear sensitivity model of the network around a converged
// operating point: complex voltage, voltage magnitude and slack export as
// affine functions of the wye/delta power-injection stacks. Derived in
// closed form from the Z-bus impedance structure evaluated at the anchor
// (fixed-point linearization); exact at the anchor by construction.
//
// Stacks follow the LP layout: length 2*N_L, first the active then the
// reactive injections, load convention, per-unit. The model matrices carry
// the boundary unit factors so the affine evaluation is
//   v     = (m0 + m_wye*(L00*s_base) + m_delta*(L01*s_base)) / v_base
//   |v|   = (k0 + ...) / v_base
//   p_sub = Re(a0 + ...) / s_base
// with L00 = x_wye + dx_wye + md*dx_ht and L01 = x_delta + dx_delta.
#pragma once

#include "htslp/powerflow.hpp"

namespace htslp {

class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinearNetworkModel {
  CVec m0;       // volts, per non-slack bus-phase
  CMat m_wye;    // volts per kVA
  CMat m_delta;
  Vec k0;
  Mat k_wye;
  Mat k_delta;
  CVec a0;       // kVA, per slack phase
  CMat a_wye;
  CMat a_delta;

  OperatingPoint anchor;
  InjectionSet base;  // injections that produced the anchor
  std::vector<int> rows;  // bus-phase index per model row (non-slack)
  std::vector<int> row_of_busphase;  // inverse map, -1 for slack rows
  double s_base_kva = 0.0;
  double v_base_volts = 0.0;

  int n_rows() const { return static_cast<int>(rows.size()); }
};

struct LinearPrediction {
  Vec e, f, v_mag;  // per model row, pu
  Vec p_sub;        // per slack phase, pu, export-positive
};

LinearNetworkModel derive_linear_model(const NetworkModel& model,
                                       const OperatingPoint& anchor,
                                       const InjectionSet& base_injections);

// Evaluates the affine model. dx_ht is in LP-scaled units and gets
// multiplied by md before entering the wye stack.
LinearPrediction predict(const LinearNetworkModel& lin, const CVec& dx_wye,
                         const CVec& dx_delta, const CVec& dx_ht_scaled, double md,
                         double s_base_kva, double v_base_volts);

// Stacks a complex per-bus-phase vector into (p; q) layout over model rows.
Vec stack_injections(const LinearNetworkModel& lin, const CVec& per_busphase);

// Plain-text dump for offline inspection. Format: one header line per
// matrix ("name rows cols"), then whitespace-separated entries row-major;
// complex entries as "re+imj". Not consumed anywhere in the pipeline.
void dump_linear_model(const LinearNetworkModel& lin, const std::string& path);

}  // namespace htslp
