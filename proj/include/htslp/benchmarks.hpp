// Builders for the combined low-voltage benchmark scenario shipped under
// data/: the European LV feeder set extended with two extra LV networks,
// eight DG units, six hybrid-transformer candidates and seasonal profiles.
#pragma once

#include "htslp/scenario.hpp"

namespace htslp {

std::string default_data_dir();
std::string benchmark_scenario_path();          // diagonal-impedance cables
std::string benchmark_scenario_path_coupled();  // variant with mutual coupling

ScenarioConfig load_benchmark_scenario();

// Combined network with every candidate inserted.
NetworkModel build_test_network();

// Eight seasonal day types, 24 hourly periods each.
YearModel load_profiles();

}  // namespace htslp
