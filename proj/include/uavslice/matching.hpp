#pragma once

#include "common.hpp"

#include <limits>
#include <type_traits>

namespace uavslice {

// Lexicographic cost (primary, tie) so that equal-weight optima are broken
// deterministically toward low (user, UAV) indices.
struct LexCost {
  double primary = 0.0;
  double tie = 0.0;

  friend LexCost operator+(LexCost a, LexCost b) { return {a.primary + b.primary, a.tie + b.tie}; }
  friend LexCost operator-(LexCost a, LexCost b) { return {a.primary - b.primary, a.tie - b.tie}; }
  friend bool operator<(LexCost a, LexCost b) {
    return a.primary < b.primary || (a.primary == b.primary && a.tie < b.tie);
  }
  static LexCost infinity() {
    return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
};

template <class C>
C cost_infinity() {
  if constexpr (std::is_same_v<C, LexCost>) return LexCost::infinity();
  else return std::numeric_limits<C>::infinity();
}

// Minimum-cost perfect assignment on an n x n matrix given as cost(i, j).
// Returns col[i] for each row.
template <class C, class CostFn>
std::vector<int> hungarian(int n, CostFn cost) {
  const C inf = cost_infinity<C>();
  std::vector<C> u(n + 1), v(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<C> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      C delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const C cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] = u[p[j]] + delta;
          v[j] = v[j] - delta;
        } else {
          minv[j] = minv[j] - delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) col[p[j] - 1] = j - 1;
  return col;
}

using AcceptMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

// Maximum-weight one-to-one matching between users (rows) and UAVs (cols).
// Only strictly positive weights produce an accepted pair.
inline AcceptMatrix match_requests(const Mat& c) {
  const int n = static_cast<int>(c.rows()), m = static_cast<int>(c.cols());
  AcceptMatrix a = AcceptMatrix::Zero(n, m);
  const int N = std::max(n, m);
  if (N == 0) return a;
  auto cost = [&](int i, int j) -> LexCost {
    if (i >= n || j >= m) return {0.0, 0.0};
    const double w = c(i, j);
    if (!(w > 0.0)) return {0.0, 0.0};
    return {-w, static_cast<double>(i * m + j + 1)};
  };
  const auto col = hungarian<LexCost>(N, cost);
  for (int i = 0; i < n; ++i) {
    const int j = col[i];
    if (j >= 0 && j < m && c(i, j) > 0.0) a(i, j) = 1;
  }
  return a;
}

inline double matching_weight(const Mat& c, const AcceptMatrix& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j)
      if (a(i, j)) s += c(i, j);
  return s;
}

}  // namespace uavslice
