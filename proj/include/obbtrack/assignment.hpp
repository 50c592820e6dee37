#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace obbtrack {

/// Dense weight matrix for bipartite matching; absent entries are forbidden pairs.
class WeightMatrix {
 public:
  WeightMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), w_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void set(std::size_t r, std::size_t c, double w) { w_[r * cols_ + c] = w; }
  const std::optional<double>& at(std::size_t r, std::size_t c) const { return w_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::optional<double>> w_;
};

/// Maximum-weight bipartite matching over the allowed pairs (weights must be positive).
/// Returns (row, col) pairs in ascending row order. Hungarian method, O(n^3).
inline std::vector<std::pair<std::size_t, std::size_t>> max_weight_matching(const WeightMatrix& m) {
  const std::size_t n = std::max(m.rows(), m.cols());
  if (n == 0) return {};

  // Square cost matrix; forbidden and padded cells cost 0 (= leave unmatched).
  std::vector<std::vector<double>> cost(n + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (const auto& w = m.at(r, c)) cost[r + 1][c + 1] = -*w;
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0][j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::vector<std::size_t> row_to_col(n + 1, 0);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j]] = j;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const std::size_t c = row_to_col[r + 1];
    if (c == 0 || c > m.cols()) continue;
    if (m.at(r, c - 1)) out.emplace_back(r, c - 1);
  }
  return out;
}

}  // namespace obbtrack
