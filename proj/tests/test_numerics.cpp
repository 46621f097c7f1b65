#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ctcsum/numerics.hpp"

using namespace ctcsum;

TEST(LogSumExp, MatchesDirectSum) {
  std::vector<double> v{-1.0, -2.5, 0.3};
  double direct = std::log(std::exp(-1.0) + std::exp(-2.5) + std::exp(0.3));
  EXPECT_NEAR(log_sum_exp(v), direct, 1e-14);
  EXPECT_NEAR(log_sum_exp(-1.0, -2.5), std::log(std::exp(-1.0) + std::exp(-2.5)), 1e-14);
  EXPECT_NEAR(log_sum_exp(-1.0, -2.5, 0.3), direct, 1e-14);
}

TEST(LogSumExp, HandlesZeroProbabilityAndLargeValues) {
  EXPECT_EQ(log_sum_exp(std::vector<double>{}), kLogZero);
  EXPECT_EQ(log_sum_exp(kLogZero, kLogZero), kLogZero);
  EXPECT_DOUBLE_EQ(log_sum_exp(kLogZero, -3.0), -3.0);
  EXPECT_NEAR(log_sum_exp(1000.0, 1000.0), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_NEAR(log_sum_exp(-1000.0, -1000.0), -1000.0 + std::log(2.0), 1e-12);
}

TEST(Softmax, RowsSumToOneAndLogAgrees) {
  Matrix z = Matrix::from_rows({{1.0, 2.0, 3.0}, {-500.0, 0.0, 500.0}});
  Matrix p = softmax_rows(z), lp = log_softmax_rows(z);
  for (std::size_t r = 0; r < 2; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      s += p(r, c);
      if (p(r, c) > 0) {
        EXPECT_NEAR(std::log(p(r, c)), lp(r, c), 1e-12);
      }
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Matmul, ShapesAndValues) {
  Matrix a = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  Matrix b = Matrix::from_rows({{1, 0, 2}, {0, 1, 3}});
  Matrix c = matmul(a, b);
  EXPECT_EQ(c, Matrix::from_rows({{1, 2, 8}, {3, 4, 18}, {5, 6, 28}}));
  EXPECT_EQ(matmul_at(a, a), Matrix::from_rows({{35, 44}, {44, 56}}));
  EXPECT_EQ(matmul_bt(b, b), Matrix::from_rows({{5, 6}, {6, 10}}));
  EXPECT_THROW(matmul(a, a), ShapeError);
  std::vector<double> out(3, 1.0), x{1.0, -1.0};
  accumulate_vec_mat(x, b, out);
  EXPECT_EQ(out, (std::vector<double>{2.0, 0.0, 0.0}));
}

TEST(Rng, DeterministicAndSplitsIndependently) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(Rng::derive_seed(42, "init"), Rng::derive_seed(42, "shuffle"));
  EXPECT_NE(Rng::derive_seed(42, "init"), Rng::derive_seed(43, "init"));
  Rng c(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    double u = c.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    std::uint64_t k = c.below(5);
    ASSERT_LT(k, 5u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(Rng, NormalHasRoughlyUnitMoments) {
  Rng r(3);
  double s = 0, s2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.05);
  EXPECT_NEAR(s2 / n, 1.0, 0.05);
}

TEST(Rng, ShuffleIsAPermutation) {
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  Rng r(11);
  shuffle(v, r);
  std::multiset<int> m(v.begin(), v.end());
  EXPECT_EQ(m.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(m.count(i), 1u);
}
