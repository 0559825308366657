// Free-format MPS reader/writer for LpProblem, covering the subset this
// project emits: OBJSENSE, ROWS, COLUMNS with integrality markers, RHS,
// BOUNDS. Enables cross-checks against external solvers.
#pragma once

#include <iosfwd>
#include <string>

#include "htslp/lp_problem.hpp"

namespace htslp {

void write_mps(const LpProblem& problem, std::ostream& out);
void write_mps_file(const LpProblem& problem, const std::string& path);

LpProblem read_mps(std::istream& in);
LpProblem read_mps_file(const std::string& path);

}  // namespace htslp
