// CSV and run-directory emission for the CLI: iteration traces, placement
// summaries, per-period voltage comparisons, timing rows and the run
// metadata file.
#pragma once

#include <string>
#include <vector>

#include "htslp/scenario.hpp"

namespace htslp {

// RFC-4180-style quoting: fields with commas, quotes or newlines are quoted
// and embedded quotes doubled.
std::string csv_field(const std::string& value);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

struct NpvRow {
  double price = 0.0;
  double discount = 0.0;
  std::string cost_mode;
  double npv = 0.0;
  double npv_vs_full = 0.0;  // offset-cost improvement over the full-cost run
};

struct RunArtifacts {
  std::string directory;
  double wall_seconds = 0.0;
  long total_lp_iterations = 0;
};

// Writes trace.csv, placements.csv, voltages_<t>.csv (final flows vs the
// same DG schedule with compensation off), solve_time.csv and run.json.
void write_run_outputs(const RunArtifacts& meta, const LoweredScenario& scenario,
                       const SlpResult& result);

void append_npv_results(const std::string& directory, const std::vector<NpvRow>& rows);

}  // namespace htslp
