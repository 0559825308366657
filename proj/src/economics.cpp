#include "htslp/economics.hpp"

#include <cmath>

namespace htslp {

double annuity_factor(double coc, int years) {
  if (coc <= -1.0) throw InvalidParameterError("discount rate must exceed -100%");
  if (coc == 0.0) return static_cast<double>(years);
  const double g = 1.0 / (1.0 + coc);
  // Geometric series g + g^2 + ... + g^years.
  return g * (1.0 - std::pow(g, years)) / (1.0 - g);
}

double annual_export_income(const std::vector<Vec>& p_sub, const YearModel& year,
                            double s_base_kva, double c_e) {
  if (static_cast<int>(p_sub.size()) != year.total_periods())
    throw InvalidParameterError("period count does not match the year model");
  double income = 0.0;
  for (int t = 0; t < year.total_periods(); ++t)
    income += year.period_weight_hours(t) * p_sub[t].sum() * s_base_kva * c_e;
  return income;
}

double npv(double c_exp, const EconomicParams& params,
           const std::vector<bool>& installed) {
  double invested = 0.0;
  for (std::size_t i = 0; i < installed.size(); ++i)
    if (installed[i]) invested += params.invest_costs.at(i);
  return annuity_factor(params.coc, params.ht_years) * (c_exp - params.c_ref) -
         invested;
}

}  // namespace htslp
