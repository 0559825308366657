// Declarative scenario files: network, loads, DG fleet, hybrid-transformer
// candidates with costs, economics, optimization constants and the seasonal
// year model, as schema-versioned JSON. Parsing is strict; lowering turns a
// config into the per-unit engine inputs.
#pragma once

#include <optional>

#include "htslp/slp.hpp"

namespace htslp {

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& what, std::string where = {})
      : std::runtime_error(where.empty() ? what : what + " (at " + where + ")"),
        location(std::move(where)) {}
  std::string location;
};

struct ScenarioBus {
  std::string id;
  std::vector<int> phases = {0, 1, 2};
  std::string connection = "wye";
  std::string role = "load";
  double v_base_volts = 230.94;
};

struct ScenarioCable {
  std::string id, from, to;
  std::array<double, 3> r_ohm{}, x_ohm{};
  double mutual_r_ohm = 0.0, mutual_x_ohm = 0.0;
  std::string note;
};

struct ScenarioTransformer {
  std::string id, from, to;
  double r_ohm = 0.0, x_ohm = 0.0;
  double rating_kva = 0.0;
  std::string note;
};

struct ScenarioLoad {
  std::string bus;
  double s_kva = 0.0;
  double power_factor = 1.0;
  std::string connection = "wye";
};

struct ScenarioDG {
  std::string id, bus;
  double p_max_kw = 0.0;
  double power_factor = 1.0;
};

struct ScenarioHT {
  std::string id, transformer;
  double r_ht_ohm = 0.0, x_ht_ohm = 0.0;
  double s_conv_kva = 0.0;
  double r_min = -0.1, r_max = 0.1;
  double cost_full = 0.0, cost_offset = 0.0;
};

struct WeightRow {
  double price = 0.0;
  std::string cost_mode = "full";
  double w1 = 0.0, w2 = 0.0, w3 = 0.0;
};

struct ScenarioSlpConstants {
  double c1 = 0.99;
  double c2 = 0.001;
  double md_ht = 100.0;
  double stp_v = 0.05;
  double stp_gamma_rad = 0.1 * kPi;
  double stp_dg_frac = 0.333;
  double stp_dg_min_frac = 0.005;
  double vpq_tol_pct = 5.0;
  double obj_tol_pct = 1.0;
  int k_max = 50;
  int rounding_decimals = 2;
  std::string dg_limit_mode = "per_phase";  // or "three_phase_total"
  bool literal_penalty_signs = false;
};

struct ScenarioEconomics {
  double export_price_per_kwh = 0.0;
  double discount_rate = 0.0;
  int ht_lifespan_years = 20;
  std::string cost_mode = "full";
  std::optional<double> c_ref;  // computed by a reference run when absent
};

struct ScenarioYear {
  int periods_per_day = 24;
  double period_hours = 1.0;
  std::vector<DayType> day_types;
};

struct ScenarioConfig {
  int schema_version = 1;
  std::string name;
  double s_base_kva = 166.67;
  double v_base_volts = 230.94;
  double v_min = 0.9, v_max = 1.1;
  std::vector<ScenarioBus> buses;
  std::vector<ScenarioCable> cables;
  std::vector<ScenarioTransformer> transformers;
  std::vector<ScenarioLoad> loads;
  std::vector<ScenarioDG> dgs;
  std::vector<ScenarioHT> hts;
  std::vector<WeightRow> weights;
  ScenarioEconomics economics;
  ScenarioSlpConstants slp;
  ScenarioYear year;
};

ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);
std::string serialize_scenario(const ScenarioConfig& config);

struct ScenarioOverrides {
  std::optional<double> price;
  std::optional<double> discount;
  std::optional<std::string> cost_mode;
  std::optional<int> periods;  // tiles the first day type's modifiers
};

// The lowered scenario owns the network model the run points at.
struct LoweredScenario {
  ScenarioConfig config;
  NetworkModel model;
  ScenarioRun run;
  SlpOptions slp_options;

  LoweredScenario() = default;
  LoweredScenario(const LoweredScenario&) = delete;
  LoweredScenario(LoweredScenario&&) = delete;
};

// Applies overrides, converts to per-unit, inserts every candidate device
// and prepares per-period load sets. Throws SchemaError on inconsistencies.
std::unique_ptr<LoweredScenario> lower_scenario(const ScenarioConfig& config,
                                                const ScenarioOverrides& overrides = {});

}  // namespace htslp
