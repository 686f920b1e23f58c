#include "uavslice/matching.hpp"

#include <gtest/gtest.h>

#include <functional>

using namespace uavslice;

namespace {

// exhaustive one-to-one matching where each user takes a UAV or nothing
double brute_force_best(const Mat& c) {
  const int n = static_cast<int>(c.rows()), m = static_cast<int>(c.cols());
  std::vector<char> taken(m, 0);
  std::function<double(int)> rec = [&](int i) -> double {
    if (i == n) return 0.0;
    double best = rec(i + 1);
    for (int j = 0; j < m; ++j) {
      if (taken[j] || !(c(i, j) > 0.0)) continue;
      taken[j] = 1;
      best = std::max(best, c(i, j) + rec(i + 1));
      taken[j] = 0;
    }
    return best;
  };
  return rec(0);
}

void expect_one_to_one(const AcceptMatrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) EXPECT_LE(a.row(i).sum(), 1);
  for (Eigen::Index j = 0; j < a.cols(); ++j) EXPECT_LE(a.col(j).sum(), 1);
}

}  // namespace

TEST(Hungarian, SolvesSmallAssignment) {
  const double c[3][3] = {{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
  const auto col = hungarian<double>(3, [&](int i, int j) { return c[i][j]; });
  // optimum 1 + 2 + 2 = 5 via (0,1), (1,0), (2,2)
  EXPECT_EQ(col, (std::vector<int>{1, 0, 2}));
}

TEST(Matching, EqualsBruteForceOnRandomInstances) {
  Rng rng(7);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 7));
    const int m = 1 + static_cast<int>(uniform_index(rng, 4));
    Mat c(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) c(i, j) = uniform01(rng) < 0.3 ? -uniform(rng, 0, 5) : uniform(rng, 0, 10);
    const auto a = match_requests(c);
    expect_one_to_one(a);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        if (a(i, j)) {
          EXPECT_GT(c(i, j), 0.0);
        }
    EXPECT_NEAR(matching_weight(c, a), brute_force_best(c), 1e-9);
  }
}

TEST(Matching, TiesBreakTowardLowIndices) {
  const Mat c = Mat::Ones(3, 2);
  const auto a = match_requests(c);
  EXPECT_EQ(a(0, 0) + a(0, 1), 1);
  EXPECT_EQ(a(1, 0) + a(1, 1), 1);
  EXPECT_EQ(a.row(2).sum(), 0);
  EXPECT_EQ(match_requests(c), a);  // deterministic
}

TEST(Matching, NothingPositiveMeansNoPairs) {
  Mat c = Mat::Zero(4, 2);
  c(1, 1) = -3.0;
  EXPECT_EQ(match_requests(c).sum(), 0);
  EXPECT_EQ(match_requests(Mat(0, 0)).size(), 0);
}
