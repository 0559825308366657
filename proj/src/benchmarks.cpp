#include "htslp/benchmarks.hpp"

#include <cstdlib>

namespace htslp {

std::string default_data_dir() {
  if (const char* env = std::getenv("HTSLP_DATA_DIR")) return env;
  return HTSLP_DATA_DIR;
}

std::string benchmark_scenario_path() {
  return default_data_dir() + "/scenarios/v1/cigre_combined.json";
}

std::string benchmark_scenario_path_coupled() {
  return default_data_dir() + "/scenarios/v1/cigre_combined_coupled.json";
}

ScenarioConfig load_benchmark_scenario() {
  return load_scenario(benchmark_scenario_path());
}

NetworkModel build_test_network() {
  const auto lowered = lower_scenario(load_benchmark_scenario());
  return lowered->model;
}

YearModel load_profiles() {
  const ScenarioConfig c = load_benchmark_scenario();
  return YearModel{c.year.day_types, c.year.periods_per_day, c.year.period_hours};
}

}  // namespace htslp
