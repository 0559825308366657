#include "htslp/lp_problem.hpp"

#include <algorithm>
#include <cmath>

namespace htslp {

std::vector<std::pair<int, double>> LpProblem::combine_terms(
    std::vector<std::pair<int, double>> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> out;
  out.reserve(terms.size());
  for (const auto& [v, c] : terms) {
    if (!out.empty() && out.back().first == v)
      out.back().second += c;
    else
      out.emplace_back(v, c);
  }
  std::erase_if(out, [](const auto& t) { return t.second == 0.0; });
  return out;
}

void LpProblem::validate() const {
  std::vector<char> referenced(vars.size(), 0);
  for (const auto& row : rows)
    for (const auto& [v, c] : row.coeffs) {
      if (!std::isfinite(c))
        throw InvalidParameterError("non-finite coefficient in row " + row.name);
      referenced.at(v) = 1;
    }
  for (const auto& [v, c] : objective) {
    if (!std::isfinite(c)) throw InvalidParameterError("non-finite objective coefficient");
    referenced.at(v) = 1;
  }
  for (std::size_t v = 0; v < vars.size(); ++v)
    if (!referenced[v])
      throw InvalidParameterError("variable referenced by nothing: " + vars[v].name);
}

}  // namespace htslp
