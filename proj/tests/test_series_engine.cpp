#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace obsv;
using obsv::testing::convolve;
using obsv::testing::random_series;
using obsv::testing::random_series_matrix;

namespace {

const PrimeField F101(101);
const PrimeField F7(7);

TruncSeries series(std::vector<std::uint64_t> c) { return TruncSeries(std::move(c)); }

// 1/k! mod p for k = 0..order
TruncSeries exp_series(const PrimeField& f, std::size_t order, std::uint64_t rate = 1) {
  TruncSeries e(order);
  std::uint64_t fact = 1;
  std::uint64_t pw = 1;
  for (std::size_t k = 0; k <= order; ++k) {
    if (k > 0) {
      fact = f.mul(fact, k);
      pw = f.mul(pw, rate);
    }
    e[k] = f.div(pw, fact);
  }
  return e;
}

FpMatrix matrix(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> v) {
  FpMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = v[i * cols + j];
  }
  return m;
}

SeriesMatrix random_invertible(const PrimeField& f, std::mt19937_64& rng, std::size_t n, std::size_t order) {
  while (true) {
    SeriesMatrix a = random_series_matrix(f, rng, n, n, order);
    if (rank_fp(f, a.coefficient(0)) == n) return a;
  }
}

}  // namespace

TEST(SeriesMul, OnePlusTTimesOneMinusT) {
  const auto a = series({1, 1, 0});
  const auto b = series({1, F101.neg(1), 0});
  EXPECT_EQ(mul(F101, a, b), series({1, 0, F101.neg(1)}));
}

TEST(SeriesMul, TruncationDropsHighTerms) {
  TruncSeries top(4);
  top[4] = 3;
  TruncSeries t(4);
  t[1] = 1;
  EXPECT_TRUE(mul(F101, top, t).is_zero());
}

TEST(SeriesMul, MatchesConvolution) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t order = trial % 17;
    const auto a = random_series(F101, rng, order);
    const auto b = random_series(F101, rng, order);
    EXPECT_EQ(mul(F101, a, b).coefficients(), convolve(F101, a.coefficients(), b.coefficients(), order));
  }
}

TEST(SeriesMul, OrderMismatchThrows) {
  EXPECT_THROW(mul(F101, TruncSeries(2), TruncSeries(3)), std::invalid_argument);
  EXPECT_THROW(add(F101, TruncSeries(2), TruncSeries(3)), std::invalid_argument);
  EXPECT_THROW(mul(F101, SeriesMatrix(2, 2, 1), SeriesMatrix(2, 2, 2)), std::invalid_argument);
  EXPECT_THROW(mul(F101, SeriesMatrix(2, 3, 1), SeriesMatrix(2, 2, 1)), std::invalid_argument);
}

TEST(SeriesInvert, GeometricSeries) {
  EXPECT_EQ(invert(F101, series({1, F101.neg(1), 0, 0})), series({1, 1, 1, 1}));
}

TEST(SeriesInvert, ZeroConstantTermThrows) {
  EXPECT_THROW(invert(F101, series({0, 1, 2})), NonUnitError);
  SeriesMatrix a(2, 2, 1);
  a(0, 0)[0] = 1;
  EXPECT_THROW(invert(F101, a), NonUnitError);
}

TEST(SeriesInvert, TwoSidedScalar) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_series(F101, rng, trial % 20);
    if (a[0] == 0) a[0] = 1;
    const auto b = invert(F101, a);
    EXPECT_EQ(b.order(), a.order());
    EXPECT_EQ(mul(F101, a, b), TruncSeries::constant(a.order(), 1));
    EXPECT_EQ(mul(F101, b, a), TruncSeries::constant(a.order(), 1));
  }
}

TEST(SeriesInvert, UpperTriangularMatrix) {
  SeriesMatrix a = SeriesMatrix::identity(2, 3);
  a(0, 1)[1] = 1;
  SeriesMatrix want = SeriesMatrix::identity(2, 3);
  want(0, 1)[1] = F101.neg(1);
  EXPECT_EQ(invert(F101, a), want);
}

TEST(SeriesInvert, RandomMatricesTwoSided) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t order = trial % 9;
    const SeriesMatrix a = random_invertible(F101, rng, 3, order);
    const SeriesMatrix b = invert(F101, a);
    EXPECT_EQ(mul(F101, a, b), SeriesMatrix::identity(3, order));
    EXPECT_EQ(mul(F101, b, a), SeriesMatrix::identity(3, order));
  }
}

TEST(SeriesIntegrate, Examples) {
  EXPECT_EQ(integrate(F7, series({1, 1, 0})), series({0, 1, 4}));
  EXPECT_TRUE(integrate(F7, TruncSeries(3)).is_zero());
  EXPECT_THROW(integrate(F7, TruncSeries(6)), std::domain_error);
}

TEST(SeriesIntegrate, DerivativeUndoesIntegral) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t order = 1 + trial % 30;
    const auto a = random_series(F101, rng, order);
    // d/dt of the antiderivative recovers a below the top coefficient, which integration drops.
    auto want = a;
    want[order] = 0;
    EXPECT_EQ(derivative(F101, integrate(F101, a)), want);
    auto z = a;
    z[0] = 0;
    EXPECT_EQ(integrate(F101, derivative(F101, z)), z);
  }
}

TEST(SeriesRingLaws, Randomized) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t order = trial % 12;
    const auto a = random_series(F101, rng, order);
    const auto b = random_series(F101, rng, order);
    const auto c = random_series(F101, rng, order);
    EXPECT_EQ(mul(F101, add(F101, a, b), c), add(F101, mul(F101, a, c), mul(F101, b, c)));
    EXPECT_EQ(mul(F101, mul(F101, a, b), c), mul(F101, a, mul(F101, b, c)));
    EXPECT_EQ(mul(F101, a, b), mul(F101, b, a));
    EXPECT_EQ(sub(F101, add(F101, a, b), b), a);
    EXPECT_TRUE(add(F101, a, neg(F101, a)).is_zero());
    EXPECT_EQ(mul(F101, a, TruncSeries::constant(order, 1)), a);
  }
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t order = trial % 6;
    const auto A = random_series_matrix(F101, rng, 3, 2, order);
    const auto B = random_series_matrix(F101, rng, 2, 4, order);
    const auto C = random_series_matrix(F101, rng, 2, 4, order);
    const auto D = random_series_matrix(F101, rng, 4, 2, order);
    EXPECT_EQ(mul(F101, A, add(F101, B, C)), add(F101, mul(F101, A, B), mul(F101, A, C)));
    EXPECT_EQ(mul(F101, mul(F101, A, B), D), mul(F101, A, mul(F101, B, D)));
  }
}

TEST(SeriesMatrixViews, CoefficientRoundTrip) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_series_matrix(F101, rng, 1 + trial % 4, 1 + trial % 3, trial % 7);
    const auto coeffs = m.coefficients();
    ASSERT_EQ(coeffs.size(), m.order() + 1);
    EXPECT_EQ(SeriesMatrix::from_coefficients(coeffs), m);
  }
  // the matrix product agrees with the series-of-matrices convolution
  const auto A = random_series_matrix(F101, rng, 2, 3, 5);
  const auto B = random_series_matrix(F101, rng, 3, 2, 5);
  const auto P = mul(F101, A, B);
  for (std::size_t k = 0; k <= 5; ++k) {
    FpMatrix acc(2, 2);
    for (std::size_t i = 0; i <= k; ++i) {
      const FpMatrix term = multiply(F101, A.coefficient(i), B.coefficient(k - i));
      for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 2; ++c) acc(r, c) = F101.add(acc(r, c), term(r, c));
      }
    }
    EXPECT_EQ(P.coefficient(k), acc);
  }
}

TEST(SolveLinearOde, ExponentialSeries) {
  SeriesMatrix M(1, 1, 9);
  M(0, 0)[0] = 1;
  const SeriesMatrix S = solve_linear_ode(F101, M, FpMatrix::identity(1), 9);
  EXPECT_EQ(S(0, 0), exp_series(F101, 9));
}

TEST(SolveLinearOde, NilpotentGenerator) {
  const SeriesMatrix M = SeriesMatrix::from_constant(matrix(2, 2, {0, 1, 0, 0}), 4);
  SeriesMatrix want = SeriesMatrix::identity(2, 4);
  want(0, 1)[1] = 1;
  EXPECT_EQ(solve_linear_ode(F101, M, FpMatrix::identity(2), 4), want);
}

TEST(SolveLinearOde, ResidualVanishes) {
  std::mt19937_64 rng(11);
  const PrimeField f(1000003);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const std::size_t k = 1 + trial % 3;
    const std::size_t order = 2 + trial % 10;
    const auto M = random_series_matrix(f, rng, n, n, order);
    const auto R = random_series_matrix(f, rng, n, k, order);
    FpMatrix W0(n, k);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) W0(i, j) = std::uniform_int_distribution<std::uint64_t>(0, 1000)(rng);
    }
    const SeriesMatrix S = solve_linear_ode(f, M, R, W0, order);
    EXPECT_EQ(S.coefficient(0), W0);
    // S' - M S - R vanishes below t^order (the derivative's top coefficient is unknown).
    const SeriesMatrix res = sub(f, sub(f, derivative(f, S), mul(f, M.truncated(order), S)), R.truncated(order));
    for (std::size_t c = 0; c < order; ++c) EXPECT_TRUE(res.coefficient(c).is_zero()) << trial << " " << c;
  }
}

TEST(SolveLinearOde, DoublingMatchesRecurrence) {
  std::mt19937_64 rng(12);
  const PrimeField f(1000003);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const std::size_t order = 1 + trial % 13;
    const auto M = random_series_matrix(f, rng, n, n, order);
    const SeriesMatrix fast = homogeneous_resolution_from(f, M, order);
    const SeriesMatrix slow = solve_linear_ode(f, M, FpMatrix::identity(n), order);
    EXPECT_EQ(fast, slow) << "trial " << trial;
  }
}

TEST(SolveLinearOde, ShapeAndLengthErrors) {
  EXPECT_THROW(solve_linear_ode(F101, SeriesMatrix(2, 2, 3), FpMatrix::identity(3), 3), std::invalid_argument);
  EXPECT_THROW(solve_linear_ode(F101, SeriesMatrix(2, 2, 1), FpMatrix::identity(2), 5), std::invalid_argument);
  EXPECT_THROW(solve_linear_ode(F7, SeriesMatrix(1, 1, 9), FpMatrix::identity(1), 9), std::domain_error);
}

TEST(SeriesRing, EvaluatesAnSlp) {
  // x^5 / (1 - x) with x = t, order 6: t^5 + t^6
  SlpBuilder b({"x"});
  const Operand x = Operand::input(0);
  const Operand x2 = b.mul(x, x);
  const Operand x4 = b.mul(x2, x2);
  const Operand x5 = b.mul(x4, x);
  b.add_result("r", b.div(x5, b.sub(b.constant(1), x)));
  const Slp slp = std::move(b).build();
  TruncSeries t(6);
  t[1] = 1;
  const std::vector<TruncSeries> in{t};
  const auto out = evaluate(slp, SeriesRing{F101, 6}, std::span<const TruncSeries>(in));
  EXPECT_EQ(out[0], series({0, 0, 0, 0, 0, 1, 1}));
}
