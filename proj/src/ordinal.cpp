#include "sequtil/ordinal.hpp"

#include <algorithm>

namespace sequtil {

ConsistencyReport check_pairwise(const std::vector<Comparison>& comparisons) {
  ConsistencyReport report;
  report.check = "ordinal";
  report.tolerance = 0.0;

  std::vector<Trajectory> items;
  for (const auto& c : comparisons) {
    items.push_back(c.left);
    items.push_back(c.right);
  }
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  const std::size_t n = items.size();
  auto index = [&](const Trajectory& tau) {
    return static_cast<std::size_t>(std::lower_bound(items.begin(), items.end(), tau) - items.begin());
  };

  // weak[i][j]: i ≿ j stated; strict[i][j]: i ≻ j stated.
  std::vector<std::vector<bool>> weak(n, std::vector<bool>(n, false));
  std::vector<std::vector<bool>> strict = weak;
  for (std::size_t i = 0; i < n; ++i) weak[i][i] = true;
  for (const auto& c : comparisons) {
    const std::size_t l = index(c.left);
    const std::size_t r = index(c.right);
    weak[l][r] = true;
    if (c.relation == Relation::strict) {
      strict[l][r] = true;
    } else {
      weak[r][l] = true;
    }
  }

  for (std::size_t i = 0; i < n && !report.truncated; ++i) {
    for (std::size_t j = i + 1; j < n && !report.truncated; ++j) {
      if (!weak[i][j] && !weak[j][i]) {
        report.add({WitnessKind::incomparable, std::nullopt, {items[i], items[j]}, 0.0, 0.0});
      }
      if ((strict[i][j] && weak[j][i]) || (strict[j][i] && weak[i][j])) {
        report.add({WitnessKind::strict_conflict, std::nullopt, {items[i], items[j]}, 0.0, 0.0});
      }
    }
  }
  for (std::size_t a = 0; a < n && !report.truncated; ++a) {
    for (std::size_t b = 0; b < n && !report.truncated; ++b) {
      if (a == b || !weak[a][b]) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (c == a || c == b || !weak[b][c] || !strict[c][a]) continue;
        report.add({WitnessKind::intransitive, std::nullopt, {items[a], items[b], items[c]}, 0.0, 0.0});
        if (report.truncated) break;
      }
    }
  }
  return report;
}

}  // namespace sequtil
