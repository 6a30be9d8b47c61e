#include "ailsrs/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace ailsrs {
namespace {

// Values from an independent splitmix64 / Box-Muller transcription.
constexpr std::uint64_t kSeed2Labels501First = 9423153842889192705ULL;
constexpr std::uint64_t kSeed1Label0First = 2952671057175321964ULL;
constexpr std::uint64_t kSeed1Label1First = 15453050337563922905ULL;
constexpr double kSeed7FirstGaussian = -0.36563239494584632;
constexpr double kSeed7SecondGaussian = 1.0758811219967945;

TEST(Rng, SameSeedAndLabelsGiveIdenticalStreams) {
  Rng a = rng_new(1);
  Rng b = rng_new(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng c = rng_new(9, {3, 4});
  Rng d = rng_new(9, {3, 4});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(c.gaussian(), d.gaussian());
}

TEST(Rng, LabelledStreamsMatchReference) {
  EXPECT_EQ(rng_new(2, {5, 0, 1}).next_u64(), kSeed2Labels501First);
  EXPECT_EQ(rng_new(1, {0}).next_u64(), kSeed1Label0First);
  EXPECT_EQ(rng_new(1, {1}).next_u64(), kSeed1Label1First);
}

TEST(Rng, LabelOrderMatters) {
  EXPECT_NE(rng_new(3, {1, 2}).next_u64(), rng_new(3, {2, 1}).next_u64());
}

TEST(Rng, UniformIsInOpenClosedUnitInterval) {
  Rng rng = rng_new(11);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform_open_closed();
    EXPECT_GT(u, 0.0);
    EXPECT_LE(u, 1.0);
  }
}

TEST(Gaussian, FirstDrawsMatchReference) {
  Rng rng = rng_new(7);
  EXPECT_DOUBLE_EQ(rng.gaussian(), kSeed7FirstGaussian);
  EXPECT_DOUBLE_EQ(rng.gaussian(), kSeed7SecondGaussian);
}

TEST(Gaussian, MomentsOverManyDraws) {
  constexpr int n = 100000;
  Rng rng = rng_new(2024);
  std::vector<double> xs(n);
  double sum = 0.0;
  for (double& x : xs) sum += (x = rng.gaussian());
  const double mean = sum / n;
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  EXPECT_LE(std::abs(mean), 5.0 / std::sqrt(double(n)));
  EXPECT_LE(std::abs(sq / n - 1.0), 0.03);
}

TEST(GaussianMatrix, FilledRowMajorFromSequentialDraws) {
  Rng a = rng_new(5, {1});
  Rng b = rng_new(5, {1});
  const Matrix m = gaussian_matrix(a, 2, 3);
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 3);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(m(r, c), b.gaussian());
}

TEST(GaussianMatrix, ConsecutiveCallsDoNotReuseValues) {
  Rng rng = rng_new(5);
  const Matrix first = gaussian_matrix(rng, 3, 3);
  const Matrix second = gaussian_matrix(rng, 3, 3);
  for (Eigen::Index i = 0; i < first.size(); ++i)
    for (Eigen::Index j = 0; j < second.size(); ++j) EXPECT_NE(first.data()[i], second.data()[j]);
}

TEST(GaussianMatrix, OneByOneIsNextDraw) {
  Rng a = rng_new(8);
  Rng b = rng_new(8);
  EXPECT_EQ(gaussian_matrix(a, 1, 1)(0, 0), b.gaussian());
}

TEST(GaussianMatrix, RejectsEmptyShape) {
  Rng rng = rng_new(1);
  EXPECT_THROW(gaussian_matrix(rng, 0, 2), std::invalid_argument);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  AdamState<double> state(3);
  Vector params(3);
  params << 1.0, -2.0, 0.5;
  Vector grads(3);
  grads << 0.3, -40.0, 1e-3;
  const Vector before = params;
  adam_step(state, params, grads, 0.01);
  EXPECT_EQ(state.step, 1);
  for (int i = 0; i < 3; ++i) {
    const double delta = params(i) - before(i);
    EXPECT_LT(delta * grads(i), 0.0);
    EXPECT_NEAR(std::abs(delta), 0.01, 0.01 * 1e-4);
  }
}

TEST(Adam, ZeroGradientsLeaveParametersUnchanged) {
  AdamState<double> state(4);
  Vector params = Vector::LinSpaced(4, -1.0, 1.0);
  const Vector before = params;
  for (int i = 0; i < 5; ++i) adam_step(state, params, Vector::Zero(4), 0.1);
  EXPECT_EQ(params, before);
  EXPECT_EQ(state.step, 5);
}

TEST(Adam, MinimizesQuadratic) {
  AdamState<double> state(1);
  Vector x = Vector::Constant(1, 1.0);
  for (int i = 0; i < 200; ++i) adam_step(state, x, 2.0 * x, 0.1);
  EXPECT_LT(std::abs(x(0)), 0.05);
}

TEST(Adam, RejectsMismatchedLengthsAndBadRate) {
  AdamState<double> state(2);
  Vector params = Vector::Zero(2);
  EXPECT_THROW(adam_step(state, params, Vector::Zero(3), 0.1), DimensionError);
  EXPECT_THROW(adam_step(state, params, Vector::Zero(2), 0.0), std::invalid_argument);
}

TEST(Welford, ScalarSequence) {
  RunningStats<double> stats;
  for (double x : {1.0, 2.0, 3.0}) welford_update(stats, Vector::Constant(1, x));
  EXPECT_EQ(stats.count, 3);
  EXPECT_DOUBLE_EQ(stats.mean(0), 2.0);
  EXPECT_DOUBLE_EQ(stats.variance()(0), 2.0 / 3.0);
}

TEST(Welford, SingleObservation) {
  RunningStats<double> stats;
  Vector x(2);
  x << 4.0, -1.5;
  welford_update(stats, x);
  EXPECT_EQ(stats.mean, x);
  EXPECT_EQ(stats.variance(), Vector::Zero(2));
}

TEST(Welford, MatchesTwoPassStatistics) {
  constexpr int n = 1000;
  constexpr int dim = 5;
  Rng rng = rng_new(31);
  Matrix data(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) data(i, j) = 3.0 * j + (j + 1) * rng.gaussian();
  RunningStats<double> stats;
  for (int i = 0; i < n; ++i) welford_update(stats, data.row(i).transpose());
  const Vector mean = data.colwise().mean().transpose();
  const Vector var = (data.rowwise() - mean.transpose()).array().square().colwise().sum().transpose() / n;
  for (int j = 0; j < dim; ++j) {
    EXPECT_LE(std::abs(stats.mean(j) - mean(j)), 1e-10 * (1.0 + std::abs(mean(j))));
    EXPECT_LE(std::abs(stats.variance()(j) - var(j)), 1e-10 * (1.0 + std::abs(var(j))));
  }
}

TEST(Welford, RejectsDimensionChange) {
  RunningStats<double> stats(2);
  EXPECT_THROW(welford_update(stats, Vector::Zero(3)), DimensionError);
}

TEST(FiniteDiff, SumOfSquares) {
  Vector x(2);
  x << 1.0, 2.0;
  const Vector g = finite_diff<double>([](const Vector& v) { return v.squaredNorm(); }, x, 1e-5);
  EXPECT_NEAR(g(0), 2.0, 1e-6);
  EXPECT_NEAR(g(1), 4.0, 1e-6);
}

TEST(FiniteDiff, ConstantHasZeroGradient) {
  const Vector g = finite_diff<double>([](const Vector&) { return 7.0; }, Vector::Ones(3), 1e-5);
  EXPECT_EQ(g, Vector::Zero(3));
}

TEST(FiniteDiff, Product) {
  Vector x(2);
  x << 3.0, -2.0;
  const Vector g = finite_diff<double>([](const Vector& v) { return v(0) * v(1); }, x, 1e-5);
  EXPECT_NEAR(g(0), -2.0, 1e-6);
  EXPECT_NEAR(g(1), 3.0, 1e-6);
}

}  // namespace
}  // namespace ailsrs
