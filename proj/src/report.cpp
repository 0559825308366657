#include "htslp/report.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace htslp {

namespace fs = std::filesystem;

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out += '"';  // embedded quotes are doubled
    out += ch;
  }
  out += "\"";
  return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw InvalidParameterError("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << csv_field(header[i]);
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << "\n";
  }
}

namespace {

std::string num(double v, int precision = 10) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

const char* termination_name(SlpTermination t) {
  switch (t) {
    case SlpTermination::converged: return "converged";
    case SlpTermination::step_floor: return "step_floor";
    case SlpTermination::iteration_cap: return "iteration_cap";
  }
  return "unknown";
}

}  // namespace

void write_run_outputs(const RunArtifacts& meta, const LoweredScenario& scenario,
                       const SlpResult& result) {
  fs::create_directories(meta.directory);
  const NetworkModel& model = scenario.model;

  {  // iteration trace
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : result.trace)
      rows.push_back({std::to_string(r.k), std::to_string(r.resolves),
                      num(r.lp_objective), num(r.npv), num(r.c_exp),
                      num(r.max_violation), num(r.max_dvpq_pct), num(r.stp_v),
                      num(r.stp_gamma), num(r.stp_dg_max), std::to_string(r.lp_iterations),
                      std::to_string(r.milp_nodes), r.accepted ? "1" : "0", r.note});
    write_csv(meta.directory + "/trace.csv",
              {"k", "resolves", "lp_objective", "npv", "c_exp", "max_violation",
               "max_dvpq_pct", "stp_v", "stp_gamma", "stp_dg_max", "lp_iterations",
               "milp_nodes", "accepted", "note"},
              rows);
  }

  {  // placements
    std::vector<std::vector<std::string>> rows;
    for (std::size_t h = 0; h < result.b_ht.size(); ++h)
      rows.push_back({scenario.run.devices[h].id, result.b_ht[h] ? "1" : "0",
                      num(scenario.run.devices[h].invest_cost)});
    write_csv(meta.directory + "/placements.csv", {"ht", "installed", "invest_cost"},
              rows);
  }

  {  // voltage profiles, final flows against compensation switched off
    ZbusSolver solver(model);
    for (int t = 0; t < static_cast<int>(result.points.size()); ++t) {
      InjectionSet no_comp = result.final_injections[t];
      no_comp.dx_ht.setZero();
      OperatingPoint base;
      try {
        base = solver.solve(no_comp, result.points[t]);
      } catch (const PowerflowDivergenceError&) {
        base = result.points[t];  // keep the file shape; flag via equal columns
      }
      std::vector<std::vector<std::string>> rows;
      for (int k = 0; k < model.index.size(); ++k) {
        rows.push_back({model.buses[model.index.bus_of(k)].id,
                        std::to_string(model.index.phase_of(k)),
                        num(std::abs(result.points[t].v[k])),
                        num(std::abs(base.v[k]))});
      }
      write_csv(meta.directory + "/voltages_" + std::to_string(t) + ".csv",
                {"bus", "phase", "vmag_with_ht", "vmag_without_ht"}, rows);
    }
  }

  {  // timing
    write_csv(meta.directory + "/solve_time.csv",
              {"periods", "wall_seconds", "iterations", "lp_iterations"},
              {{std::to_string(scenario.run.year.total_periods()), num(meta.wall_seconds),
                std::to_string(result.iterations),
                std::to_string(meta.total_lp_iterations)}});
  }

  {  // machine-readable run metadata
    nlohmann::json j;
    j["schema_version"] = 1;
    j["scenario"] = scenario.config.name;
    j["price"] = scenario.run.econ.c_e;
    j["discount"] = scenario.run.econ.coc;
    j["cost_mode"] = scenario.config.economics.cost_mode;
    j["periods"] = scenario.run.year.total_periods();
    j["termination"] = termination_name(result.termination);
    j["converged"] = result.converged;
    j["has_incumbent"] = result.has_incumbent;
    j["iterations"] = result.iterations;
    j["npv"] = result.npv;
    j["c_exp"] = result.c_exp;
    j["c_ref"] = scenario.run.econ.c_ref;
    j["wall_seconds"] = meta.wall_seconds;
    j["installed"] = nlohmann::json::array();
    for (std::size_t h = 0; h < result.b_ht.size(); ++h)
      if (result.b_ht[h]) j["installed"].push_back(scenario.run.devices[h].id);
    std::ofstream out(meta.directory + "/run.json");
    out << j.dump(1) << "\n";
  }
}

void append_npv_results(const std::string& directory, const std::vector<NpvRow>& rows) {
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows)
    body.push_back({num(r.price), num(r.discount), r.cost_mode, num(r.npv, 12),
                    num(r.npv_vs_full, 12)});
  write_csv(directory + "/npv_results.csv",
            {"price", "discount", "cost_mode", "npv", "npv_vs_full"}, body);
}

}  // namespace htslp
