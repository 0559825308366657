#include "htslp/mps_io.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace htslp {

namespace {

char rel_char(Rel r) {
  switch (r) {
    case Rel::le: return 'L';
    case Rel::ge: return 'G';
    case Rel::eq: return 'E';
  }
  return 'E';
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

void write_mps(const LpProblem& p, std::ostream& out) {
  out << "NAME " << (p.name.empty() ? "lp" : p.name) << "\n";
  out << "OBJSENSE\n " << (p.maximize ? "MAX" : "MIN") << "\n";
  out << "ROWS\n N obj\n";
  for (const auto& row : p.rows) out << " " << rel_char(row.rel) << " " << row.name << "\n";

  // Column-major entries.
  std::vector<std::vector<std::pair<std::string, double>>> cols(p.vars.size());
  for (const auto& [v, c] : p.objective) cols[v].emplace_back("obj", c);
  for (const auto& row : p.rows)
    for (const auto& [v, c] : row.coeffs) cols[v].emplace_back(row.name, c);

  out << "COLUMNS\n";
  bool in_int = false;
  for (std::size_t v = 0; v < p.vars.size(); ++v) {
    const bool want_int = p.vars[v].kind == VarKind::binary;
    if (want_int && !in_int) {
      out << " MARKER M" << v << " 'MARKER' 'INTORG'\n";
      in_int = true;
    } else if (!want_int && in_int) {
      out << " MARKER M" << v << " 'MARKER' 'INTEND'\n";
      in_int = false;
    }
    for (const auto& [row, c] : cols[v])
      out << " " << p.vars[v].name << " " << row << " " << fmt(c) << "\n";
    if (cols[v].empty())  // keep the column present so the parse round-trips
      out << " " << p.vars[v].name << " obj 0\n";
  }
  if (in_int) out << " MARKER MEND 'MARKER' 'INTEND'\n";

  out << "RHS\n";
  if (p.objective_constant != 0.0)
    out << " rhs obj " << fmt(-p.objective_constant) << "\n";
  for (const auto& row : p.rows)
    if (row.rhs != 0.0) out << " rhs " << row.name << " " << fmt(row.rhs) << "\n";

  out << "BOUNDS\n";
  for (const auto& v : p.vars) {
    if (v.kind == VarKind::binary) {
      out << " BV bnd " << v.name << "\n";
      continue;
    }
    if (v.lb == -kInf && v.ub == kInf) {
      out << " FR bnd " << v.name << "\n";
    } else if (v.lb == v.ub) {
      out << " FX bnd " << v.name << " " << fmt(v.lb) << "\n";
    } else {
      if (v.lb == -kInf)
        out << " MI bnd " << v.name << "\n";
      else if (v.lb != 0.0)
        out << " LO bnd " << v.name << " " << fmt(v.lb) << "\n";
      if (v.ub != kInf) out << " UP bnd " << v.name << " " << fmt(v.ub) << "\n";
    }
  }
  out << "ENDATA\n";
}

void write_mps_file(const LpProblem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidParameterError("cannot open for writing: " + path);
  write_mps(problem, out);
}

LpProblem read_mps(std::istream& in) {
  LpProblem p;
  p.maximize = false;
  std::map<std::string, int> row_ids;
  std::map<std::string, int> var_ids;
  std::string objective_row;

  enum class Section { none, objsense, rows, columns, rhs, bounds, ranges };
  Section section = Section::none;
  bool integral = false;
  std::string line;

  const auto get_var = [&](const std::string& name) {
    auto it = var_ids.find(name);
    if (it != var_ids.end()) return it->second;
    const int id = p.add_var(name, 0.0, kInf,
                             integral ? VarKind::binary : VarKind::continuous);
    var_ids.emplace(name, id);
    return id;
  };

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (!std::isspace(static_cast<unsigned char>(line[0]))) {
      const std::string& kw = tok[0];
      if (kw == "NAME") {
        if (tok.size() > 1) p.name = tok[1];
      } else if (kw == "OBJSENSE") {
        section = Section::objsense;
        if (tok.size() > 1) p.maximize = tok[1] == "MAX" || tok[1] == "MAXIMIZE";
      } else if (kw == "ROWS")
        section = Section::rows;
      else if (kw == "COLUMNS")
        section = Section::columns;
      else if (kw == "RHS")
        section = Section::rhs;
      else if (kw == "RANGES")
        section = Section::ranges;
      else if (kw == "BOUNDS")
        section = Section::bounds;
      else if (kw == "ENDATA")
        break;
      else
        throw InvalidParameterError("unsupported MPS section: " + kw);
      continue;
    }

    switch (section) {
      case Section::objsense:
        p.maximize = tok[0] == "MAX" || tok[0] == "MAXIMIZE";
        break;
      case Section::rows: {
        const char t = std::toupper(static_cast<unsigned char>(tok[0][0]));
        if (t == 'N') {
          objective_row = tok[1];
        } else {
          LpRow row;
          row.name = tok[1];
          row.rel = t == 'L' ? Rel::le : t == 'G' ? Rel::ge : Rel::eq;
          row_ids.emplace(row.name, static_cast<int>(p.rows.size()));
          p.rows.push_back(std::move(row));
        }
        break;
      }
      case Section::columns: {
        if (tok.size() >= 3 && tok[tok.size() - 2] + std::string() == "'MARKER'") {
          // tolerate both "name 'MARKER' 'INTORG'" orders used in the wild
        }
        if (std::find(tok.begin(), tok.end(), "'INTORG'") != tok.end()) {
          integral = true;
          break;
        }
        if (std::find(tok.begin(), tok.end(), "'INTEND'") != tok.end()) {
          integral = false;
          break;
        }
        const int var = get_var(tok[0]);
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const double val = std::stod(tok[k + 1]);
          if (tok[k] == objective_row) {
            if (val != 0.0) p.set_objective_term(var, val);
          } else {
            auto it = row_ids.find(tok[k]);
            if (it == row_ids.end())
              throw InvalidParameterError("MPS column references unknown row " + tok[k]);
            p.rows[it->second].coeffs.emplace_back(var, val);
          }
        }
        break;
      }
      case Section::rhs: {
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const double val = std::stod(tok[k + 1]);
          if (tok[k] == objective_row)
            p.objective_constant = -val;
          else
            p.rows.at(row_ids.at(tok[k])).rhs = val;
        }
        break;
      }
      case Section::bounds: {
        const std::string& type = tok[0];
        const int var = get_var(tok[2]);
        const double val = tok.size() > 3 ? std::stod(tok[3]) : 0.0;
        if (type == "UP")
          p.vars[var].ub = val;
        else if (type == "LO")
          p.vars[var].lb = val;
        else if (type == "FX")
          p.vars[var].lb = p.vars[var].ub = val;
        else if (type == "FR") {
          p.vars[var].lb = -kInf;
          p.vars[var].ub = kInf;
        } else if (type == "MI")
          p.vars[var].lb = -kInf;
        else if (type == "PL")
          p.vars[var].ub = kInf;
        else if (type == "BV") {
          p.vars[var].kind = VarKind::binary;
          p.vars[var].lb = 0.0;
          p.vars[var].ub = 1.0;
        } else
          throw InvalidParameterError("unsupported MPS bound type: " + type);
        break;
      }
      case Section::ranges:
        throw InvalidParameterError("MPS RANGES section is not supported");
      case Section::none:
        break;
    }
  }
  for (auto& row : p.rows) row.coeffs = LpProblem::combine_terms(std::move(row.coeffs));
  return p;
}

LpProblem read_mps_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameterError("cannot open MPS file: " + path);
  return read_mps(in);
}

}  // namespace htslp
