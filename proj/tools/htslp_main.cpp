// Command-line front end: run a scenario (optionally a price/discount/cost
// sweep or a timing series), summarize a finished run directory, or solve an
// exported MPS file standalone.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "htslp/milp.hpp"
#include "htslp/mps_io.hpp"
#include "htslp/report.hpp"
#include "htslp/scenario.hpp"

namespace fs = std::filesystem;
using namespace htslp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSchema = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitInternal = 4;

struct RunFlags {
  std::string scenario_path;
  std::vector<double> prices;
  std::vector<double> discounts;
  std::vector<std::string> cost_modes;
  int periods = 0;
  int timing = 0;
  int threads = 1;
  bool verbose = false;
  std::string out_dir = "runs";
};

std::string cell_name(double price, double discount, const std::string& mode) {
  std::ostringstream os;
  os << "p" << std::setprecision(6) << price << "_d" << discount << "_" << mode;
  std::string s = os.str();
  for (auto& ch : s)
    if (ch == '.') ch = '_';
  return s;
}

// Exported energy at the no-compensation optimum scales linearly with the
// price, so one reference run per period setting covers the whole sweep.
double reference_energy_kwh(const ScenarioRun& run, SlpOptions opt) {
  ScenarioRun unit = run;
  unit.econ.c_e = 1.0;
  unit.econ.c_ref = 0.0;
  SlpEngine engine(unit, opt);
  return engine.compute_reference();
}

int do_run(const RunFlags& flags) {
  ScenarioConfig config = load_scenario(flags.scenario_path);

  std::vector<double> prices = flags.prices;
  if (prices.empty()) prices = {config.economics.export_price_per_kwh};
  std::vector<double> discounts = flags.discounts;
  if (discounts.empty()) discounts = {config.economics.discount_rate};
  std::vector<std::string> modes = flags.cost_modes;
  if (modes.empty()) modes = {config.economics.cost_mode};

  fs::create_directories(flags.out_dir);

  // Timing series: identical synthetic days, one run per day count.
  if (flags.timing > 0) {
    const int day_len = flags.periods > 0 ? flags.periods : config.year.periods_per_day;
    std::vector<std::vector<std::string>> rows;
    for (int d = 1; d <= flags.timing; ++d) {
      ScenarioOverrides ov;
      ov.periods = d * day_len;
      ov.price = prices.front();
      ov.discount = discounts.front();
      ov.cost_mode = modes.front();
      const auto lowered = lower_scenario(config, ov);
      SlpOptions opt = lowered->slp_options;
      opt.verbose = flags.verbose;
      opt.threads = flags.threads;
      if (!lowered->config.economics.c_ref)
        lowered->run.econ.c_ref = prices.front() * reference_energy_kwh(lowered->run, opt);
      SlpEngine engine(lowered->run, opt);
      const auto t0 = std::chrono::steady_clock::now();
      const SlpResult result = engine.optimize();
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      long lp_iters = 0;
      for (const auto& r : result.trace) lp_iters += r.lp_iterations;
      rows.push_back({std::to_string(d), std::to_string(d * day_len),
                      std::to_string(secs), std::to_string(result.iterations),
                      std::to_string(lp_iters)});
      std::cout << "timing: " << d << " day(s), " << d * day_len << " periods, "
                << secs << " s\n";
    }
    write_csv(flags.out_dir + "/solve_time.csv",
              {"days", "periods", "wall_seconds", "iterations", "lp_iterations"}, rows);
    return kExitOk;
  }

  std::optional<double> e_ref_kwh;  // lazily computed once per period setting
  std::vector<NpvRow> npv_rows;
  std::map<std::pair<double, double>, double> full_npv;
  bool all_ok = true;

  for (double price : prices)
    for (double discount : discounts)
      for (const std::string& mode : modes) {
        ScenarioOverrides ov;
        ov.price = price;
        ov.discount = discount;
        ov.cost_mode = mode;
        if (flags.periods > 0) ov.periods = flags.periods;

        const auto lowered = lower_scenario(config, ov);
        SlpOptions opt = lowered->slp_options;
        opt.verbose = flags.verbose;
        opt.threads = flags.threads;

        if (!lowered->config.economics.c_ref) {
          if (!e_ref_kwh) e_ref_kwh = reference_energy_kwh(lowered->run, opt);
          lowered->run.econ.c_ref = price * *e_ref_kwh;
        }

        SlpEngine engine(lowered->run, opt);
        const auto t0 = std::chrono::steady_clock::now();
        const SlpResult result = engine.optimize();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        RunArtifacts meta;
        meta.directory = flags.out_dir + "/" + cell_name(price, discount, mode);
        meta.wall_seconds = secs;
        for (const auto& r : result.trace) meta.total_lp_iterations += r.lp_iterations;
        write_run_outputs(meta, *lowered, result);

        NpvRow row;
        row.price = price;
        row.discount = discount;
        row.cost_mode = mode;
        row.npv = result.npv;
        if (mode == "full") full_npv[{price, discount}] = result.npv;
        if (mode == "offset" && full_npv.count({price, discount}))
          row.npv_vs_full = result.npv - full_npv[{price, discount}];
        npv_rows.push_back(row);

        const bool ok = result.termination == SlpTermination::converged ||
                        (result.termination == SlpTermination::step_floor &&
                         result.has_incumbent);
        if (!ok) all_ok = false;
        std::cout << "run " << cell_name(price, discount, mode) << ": npv=" << result.npv
                  << " installed=";
        int count = 0;
        for (std::size_t h = 0; h < result.b_ht.size(); ++h)
          if (result.b_ht[h]) {
            std::cout << (count++ ? "+" : "") << lowered->run.devices[h].id;
          }
        if (!count) std::cout << "none";
        std::cout << " (" << secs << " s)\n";
      }

  append_npv_results(flags.out_dir, npv_rows);
  return all_ok ? kExitOk : kExitNoConvergence;
}

int do_report(const std::string& dir) {
  std::ifstream npv(dir + "/npv_results.csv");
  if (npv) {
    std::cout << "NPV results\n-----------\n";
    std::string line;
    while (std::getline(npv, line)) std::cout << "  " << line << "\n";
  }
  bool any = false;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    std::ifstream meta(entry.path() / "run.json");
    if (!meta) continue;
    nlohmann::json j;
    meta >> j;
    any = true;
    std::cout << "\nrun " << entry.path().filename().string() << "\n";
    std::cout << "  termination: " << j.value("termination", "?")
              << ", iterations: " << j.value("iterations", 0) << "\n";
    std::cout << "  npv: " << j.value("npv", 0.0) << " (c_exp " << j.value("c_exp", 0.0)
              << ", c_ref " << j.value("c_ref", 0.0) << ")\n";
    std::cout << "  installed:";
    for (const auto& id : j.value("installed", nlohmann::json::array()))
      std::cout << " " << id.get<std::string>();
    if (j.value("installed", nlohmann::json::array()).empty()) std::cout << " none";
    std::cout << "\n  wall time: " << j.value("wall_seconds", 0.0) << " s\n";

    // Highest accepted-iterate violation must be zero by construction.
    std::ifstream trace(entry.path() / "trace.csv");
    std::string line;
    double worst = 0.0;
    if (trace) {
      std::getline(trace, line);
      while (std::getline(trace, line)) {
        std::stringstream ss(line);
        std::string field;
        int col = 0;
        bool accepted = false;
        double viol = 0.0;
        while (std::getline(ss, field, ',')) {
          if (col == 5) viol = std::stod(field);
          if (col == 12) accepted = field == "1";
          ++col;
        }
        if (accepted) worst = std::max(worst, viol);
      }
    }
    std::cout << "  max accepted violation: " << worst << " pu\n";
  }
  if (!any && !npv) {
    std::cerr << "no run artifacts under " << dir << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

int do_solve(const std::string& path, bool verbose) {
  const LpProblem problem = read_mps_file(path);
  MilpOptions opt;
  opt.verbose = verbose;
  MilpStats stats;
  const SolveOutcome out = problem.binary_count() > 0
                               ? solve_milp(problem, opt, &stats)
                               : solve_lp(problem, opt.lp);
  switch (out.status) {
    case LpStatus::optimal:
      std::cout << "optimal objective " << std::setprecision(12) << out.objective
                << " (" << out.iterations << " simplex iterations";
      if (stats.nodes) std::cout << ", " << stats.nodes << " nodes";
      std::cout << ")\n";
      return kExitOk;
    case LpStatus::infeasible:
      std::cout << "infeasible\n";
      return kExitOk;
    case LpStatus::unbounded:
      std::cout << "unbounded\n";
      return kExitOk;
    default:
      std::cout << "iteration limit reached\n";
      return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid-transformer placement optimizer"};
  app.require_subcommand(1);

  RunFlags flags;
  auto* run = app.add_subcommand("run", "optimize a scenario (optionally a sweep)");
  run->add_option("scenario", flags.scenario_path, "scenario JSON file")->required();
  run->add_option("--price", flags.prices, "export price override(s), currency/kWh");
  run->add_option("--discount", flags.discounts, "discount rate override(s)");
  run->add_option("--cost-mode", flags.cost_modes, "full or offset (repeatable)")
      ->check(CLI::IsMember({"full", "offset"}));
  run->add_option("--periods", flags.periods, "synthetic period count (tiles day 1)");
  run->add_option("--timing", flags.timing, "run 1..K identical days, emit solve_time.csv");
  run->add_option("--threads", flags.threads, "per-period worker threads");
  run->add_flag("--verbose", flags.verbose, "iteration log on stderr");
  run->add_option("--out", flags.out_dir, "output directory");

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "summarize a run directory");
  rep->add_option("dir", report_dir, "run directory")->required();

  std::string mps_path;
  bool solve_verbose = false;
  auto* slv = app.add_subcommand("solve", "solve an exported MPS file");
  slv->add_option("file", mps_path, "MPS file")->required();
  slv->add_flag("--verbose", solve_verbose);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitUsage : kExitOk;
  }

  try {
    if (run->parsed()) return do_run(flags);
    if (rep->parsed()) return do_report(report_dir);
    if (slv->parsed()) return do_solve(mps_path, solve_verbose);
  } catch (const SchemaError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
