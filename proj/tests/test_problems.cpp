#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "asgd/error.hpp"
#include "asgd/problems.hpp"

using namespace asgd;

namespace {

Vec vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

Problem random_logsumexp(std::uint64_t seed, int rows, int dim, double ridge) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat a(rows, dim);
  Vec b(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = normal(rng);
    b(i) = normal(rng);
  }
  return make_logsumexp(a, b, ridge);
}

}  // namespace

TEST(Quadratic, IdentityInOneDimension) {
  const Problem p = make_quadratic(vec({1.0}), vec({0.0}));
  EXPECT_EQ(p.mu(), 1.0);
  EXPECT_EQ(p.lipschitz(), 1.0);
  EXPECT_EQ(p.minimizer()(0), 0.0);
  EXPECT_EQ(p.min_value(), 0.0);
  EXPECT_DOUBLE_EQ(p.value(vec({3.0})), 4.5);
}

TEST(Quadratic, ConstantsFromEigenvalues) {
  const Problem p = make_quadratic(vec({1.0, 4.0}), vec({0.0, 0.0}));
  EXPECT_EQ(p.mu(), 1.0);
  EXPECT_EQ(p.lipschitz(), 4.0);
  EXPECT_EQ(p.condition_number(), 4.0);
}

TEST(Quadratic, GradientVanishesAtShiftedMinimizer) {
  const Problem p = make_quadratic(vec({0.01, 1.0}), vec({2.0, -3.0}));
  EXPECT_EQ(p.gradient(p.minimizer()).norm(), 0.0);
  EXPECT_EQ(p.gap(p.minimizer()), 0.0);
}

TEST(Quadratic, RejectsBadInput) {
  EXPECT_THROW(make_quadratic(vec({1.0, -1.0}), vec({0.0, 0.0})), ConfigError);
  EXPECT_THROW(make_quadratic(vec({1.0, 2.0}), vec({0.0})), DimensionError);
  const Problem p = make_quadratic(vec({1.0, 2.0}), vec({0.0, 0.0}));
  EXPECT_THROW(p.value(vec({1.0})), DimensionError);
}

TEST(Quadratic, ZeroOrEmptyEigenvaluesAreRejected) {
  EXPECT_THROW(make_quadratic(vec({0.0, 2.0}), vec({0.0, 0.0})), ConfigError);
  EXPECT_THROW(make_quadratic(Vec(0), Vec(0)), ConfigError);
}

TEST(AllProblems, SmoothnessAndStrongConvexityOnSamples) {
  Mat a(3, 2);
  a << 1, 0, 0, 2, 1, 1;
  const std::vector<Problem> problems = {
      make_quadratic(vec({0.5, 3.0, 7.0}), vec({1.0, -2.0, 0.0})),
      make_least_squares(a, vec({1.0, 2.0, 0.5})), random_logsumexp(21, 7, 3, 0.2),
      make_huberized_abs(vec({0.0, 1.0}), 0.3)};
  std::mt19937_64 rng(22);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (const Problem& p : problems) {
    EXPECT_LE(p.gradient(p.minimizer()).norm(), 1e-10) << p.name();
    EXPECT_NEAR(p.value(p.minimizer()), p.min_value(), 1e-12 * (1.0 + std::abs(p.min_value())));
    for (int trial = 0; trial < 500; ++trial) {
      Vec x(p.dim());
      Vec y(p.dim());
      for (int i = 0; i < p.dim(); ++i) {
        x(i) = normal(rng);
        y(i) = normal(rng);
      }
      const double bregman = p.value(y) - p.value(x) - p.gradient(x).dot(y - x);
      const double d2 = (y - x).squaredNorm();
      const double slack = 1e-12 * (1.0 + std::abs(p.value(y)) + std::abs(p.value(x)));
      EXPECT_LE(bregman, 0.5 * p.lipschitz() * d2 + slack) << p.name();
      EXPECT_GE(bregman, 0.5 * p.mu() * d2 - slack) << p.name();
    }
  }
}

TEST(LogSumExp, ConstantRowReducesToRidge) {
  Mat a(1, 1);
  a << 0.0;
  const Problem p = make_logsumexp(a, vec({0.0}), 1.0);
  EXPECT_NEAR(p.minimizer()(0), 0.0, 1e-14);
  EXPECT_NEAR(p.min_value(), 0.0, 1e-14);
  EXPECT_NEAR(p.value(vec({2.0})), 2.0, 1e-14);
}

TEST(LogSumExp, SymmetricRows) {
  Mat a(2, 1);
  a << 1.0, -1.0;
  const Problem p = make_logsumexp(a, vec({0.0, 0.0}), 0.0);
  EXPECT_NEAR(p.minimizer()(0), 0.0, 1e-12);
  EXPECT_NEAR(p.min_value(), std::log(2.0), 1e-14);
}

TEST(LogSumExp, NewtonPresolveReachesStationarity) {
  Mat a(3, 2);
  a << 1, 0, 0, 1, -1, -1;
  const Problem p = make_logsumexp(a, vec({0.0, 0.0, 0.0}), 0.1);
  EXPECT_LE(p.gradient(p.minimizer()).norm(), 1e-10);
  EXPECT_EQ(p.mu(), 0.1);
}

TEST(LogSumExp, GradientMatchesFiniteDifferences) {
  const Problem p = random_logsumexp(3, 6, 4, 0.05);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec x(4);
  for (int i = 0; i < 4; ++i) x(i) = normal(rng);
  const Vec g = p.gradient(x);
  for (int i = 0; i < 4; ++i) {
    Vec e = Vec::Zero(4);
    e(i) = 1e-6;
    const double fd = (p.value(x + e) - p.value(x - e)) / 2e-6;
    EXPECT_NEAR(g(i), fd, 1e-7);
  }
}

TEST(LogSumExp, GapAgreesWithValueDifference) {
  const Problem p = random_logsumexp(5, 8, 5, 0.1);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec d(5);
    for (int i = 0; i < 5; ++i) d(i) = normal(rng);
    const double scale = std::pow(10.0, -trial / 10.0);
    const Vec x = p.minimizer() + scale * d;
    const double direct = p.value(x) - p.min_value();
    EXPECT_GE(p.gap(x), 0.0);
    EXPECT_NEAR(p.gap(x), direct, 8.0 * 2.2e-16 * (1.0 + std::abs(p.min_value())) + 1e-12 * direct);
  }
}

TEST(LogSumExp, GapKeepsRelativeAccuracyNearMinimizer) {
  const Problem p = random_logsumexp(5, 8, 5, 0.1);
  Vec d = Vec::Ones(5);
  // Along a fixed direction the gap is quadratic: gap(x* + s d) / s^2 tends to a constant.
  const double g1 = p.gap(p.minimizer() + 1e-4 * d) / 1e-8;
  const double g2 = p.gap(p.minimizer() + 1e-7 * d) / 1e-14;
  EXPECT_NEAR(g2, g1, 1e-3 * g1);
}

TEST(LeastSquares, ConstantsAndGap) {
  Mat a(3, 2);
  a << 1, 0, 0, 2, 1, 1;
  const Problem p = make_least_squares(a, vec({1.0, 2.0, 0.5}));
  EXPECT_LE(p.gradient(p.minimizer()).norm(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> eig(a.transpose() * a);
  EXPECT_NEAR(p.mu(), eig.eigenvalues().minCoeff(), 1e-12);
  EXPECT_NEAR(p.lipschitz(), eig.eigenvalues().maxCoeff(), 1e-12);
  const Vec x = vec({0.3, -0.7});
  EXPECT_NEAR(p.gap(x), p.value(x) - p.min_value(), 1e-14);
}

TEST(LeastSquares, RankDeficientIsRejected) {
  Mat a(2, 2);
  a << 1, 1, 1, 1;
  EXPECT_THROW(make_least_squares(a, vec({1.0, 1.0})), ConfigError);
}

TEST(HuberizedAbs, ValueAndGradient) {
  const Problem p = make_huberized_abs(vec({1.0, -1.0}), 0.5);
  EXPECT_EQ(p.mu(), 0.0);
  EXPECT_EQ(p.lipschitz(), 2.0);
  EXPECT_EQ(p.gap(p.minimizer()), 0.0);
  // Quadratic zone |r| <= delta and linear zone.
  EXPECT_DOUBLE_EQ(p.value(vec({1.25, -1.0})), 0.0625);
  EXPECT_DOUBLE_EQ(p.value(vec({3.0, -1.0})), 1.75);
  const Vec g = p.gradient(vec({3.0, -1.25}));
  EXPECT_EQ(g(0), 1.0);
  EXPECT_DOUBLE_EQ(g(1), -0.5);
}

TEST(HessianVector, ClosedFormAgreesWithDifferences) {
  const Problem q = make_quadratic(vec({1.0, 3.0}), vec({0.5, 0.0}));
  EXPECT_TRUE(q.has_exact_hessian());
  const Vec hv = q.hessian_vector(vec({1.0, 1.0}), vec({1.0, -2.0}));
  EXPECT_EQ(hv(0), 1.0);
  EXPECT_EQ(hv(1), -6.0);
  const Problem l = random_logsumexp(9, 5, 3, 0.2);
  const Vec x = l.minimizer() + Vec::Constant(3, 0.3);
  const Vec d = Vec::Constant(3, 1.0);
  const Vec fd = l.hessian_vector(x, d);
  const Vec central = (l.gradient(x + 1e-5 * d) - l.gradient(x - 1e-5 * d)) / 2e-5;
  EXPECT_LE((fd - central).norm(), 1e-5 * central.norm());
}
