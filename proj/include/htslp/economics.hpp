// Annual export income aggregation over representative day types, and net
// present value of a hybrid-transformer installation plan.
#pragma once

#include <string>
#include <vector>

#include "htslp/types.hpp"

namespace htslp {

struct EconomicParams {
  double c_e = 0.0;            // energy export price, currency per kWh
  double coc = 0.0;            // discount rate per year
  int ht_years = 20;           // device lifespan, years
  std::vector<double> invest_costs;  // per candidate, currency
  double c_ref = 0.0;          // baseline annual export income, currency/yr
};

struct DayType {
  std::string name;
  double weight_days = 0.0;        // representative days per year
  std::vector<double> modifiers;   // per-period load multipliers, (0, 1]
};

struct YearModel {
  std::vector<DayType> day_types;
  int periods_per_day = 24;
  double period_hours = 1.0;

  int total_periods() const {
    return static_cast<int>(day_types.size()) * periods_per_day;
  }
  // Hours of the year one period stands for: day-type weight times duration.
  double period_weight_hours(int period) const {
    return day_types[period / periods_per_day].weight_days * period_hours;
  }
  double modifier(int period) const {
    return day_types[period / periods_per_day].modifiers[period % periods_per_day];
  }
};

// Sum of the discount factors 1/(1+coc)^t for t = 1..years.
double annuity_factor(double coc, int years);

// p_sub: per-period slack exports per phase (pu on s_base); periods ordered
// day type by day type. Returns currency per year.
double annual_export_income(const std::vector<Vec>& p_sub, const YearModel& year,
                            double s_base_kva, double c_e);

// Discounted net cash flow minus investment of the installed devices.
double npv(double c_exp, const EconomicParams& params,
           const std::vector<bool>& installed);

}  // namespace htslp
