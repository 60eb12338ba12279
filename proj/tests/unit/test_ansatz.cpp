#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "mbump/ansatz.hpp"
#include "mbump/error.hpp"

using namespace mbump;

namespace {

const GroundState& cubic() {
  static const GroundState gs = compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 1), 1);
  return gs;
}

}  // namespace

TEST(Configuration, SeparationAndDiameter) {
  const Configuration c{2, {Point3{0, 0, 0}, Point3{3, 4, 0}, Point3{-6, 0, 0}}, 5.0};
  const ConfigurationCheck chk = validate_configuration(c);
  EXPECT_TRUE(chk.valid);
  EXPECT_DOUBLE_EQ(chk.min_distance, 5.0);
  EXPECT_DOUBLE_EQ(chk.margin, 0.0);
  EXPECT_DOUBLE_EQ(diameter(c), std::hypot(9.0, 4.0));
  const Configuration bad{1, {Point3{0, 0, 0}, Point3{4, 0, 0}}, 5.0};
  EXPECT_FALSE(validate_configuration(bad).valid);
  const Configuration one{1, {Point3{1, 0, 0}}, 5.0};
  EXPECT_EQ(validate_configuration(one).margin, std::numeric_limits<double>::infinity());
  EXPECT_THROW(validate_configuration(Configuration{1, {}, 5.0}), InvalidArgument);
  EXPECT_THROW(validate_configuration(Configuration{1, {Point3{std::nan(""), 0, 0}}, 5.0}), InvalidArgument);
}

TEST(Configuration, EtaConstraints) {
  EXPECT_NO_THROW(validate_eta(WeightedNormParams{0.75}, 1.0, 0.25));
  EXPECT_THROW(validate_eta(WeightedNormParams{0.5}, 1.0, 0.25), InvalidArgument);
  EXPECT_THROW(validate_eta(WeightedNormParams{0.6}, 1.0, 0.7), InvalidArgument);
  // (1 + sigma) eta > 1 fails for sigma = 0.2, eta = 0.8.
  EXPECT_THROW(validate_eta(WeightedNormParams{0.8}, 0.2, 0.25), InvalidArgument);
}

TEST(Cutoff, IsC2Smoothstep) {
  EXPECT_EQ(cutoff(0.0, 1.0, 2.0), 1.0);
  EXPECT_EQ(cutoff(1.0, 1.0, 2.0), 1.0);
  EXPECT_EQ(cutoff(2.0, 1.0, 2.0), 0.0);
  EXPECT_NEAR(cutoff(1.5, 1.0, 2.0), 0.5, 1e-15);
  const double e = 1e-4;
  for (double r : {1.0, 2.0}) {
    const double d1 = (cutoff(r + e, 1.0, 2.0) - cutoff(r - e, 1.0, 2.0)) / (2 * e);
    const double d2 = (cutoff(r + e, 1.0, 2.0) - 2 * cutoff(r, 1.0, 2.0) + cutoff(r - e, 1.0, 2.0)) / (e * e);
    // Central difference of 1 - 10 t^3 + ... leaves 5 e^2.
    EXPECT_NEAR(d1, 0.0, 6.0 * e * e);
    EXPECT_NEAR(d2, 0.0, 1e-3);
  }
  for (double r = 1.0; r < 2.0; r += 0.01) EXPECT_GE(cutoff(r, 1.0, 2.0), cutoff(r + 0.01, 1.0, 2.0));
}

TEST(Ansatz, SumOfTranslatedBumps) {
  const Grid g(1, 30.0, 0.1);
  const Configuration c{1, {Point3{-5, 0, 0}, Point3{5, 0, 0}}, 10.0};
  const Field u = build_ansatz(c, cubic(), g);
  for (std::size_t k = 0; k < g.size(); k += 37) {
    const double x = g.point(k)[0];
    EXPECT_NEAR(u[k], std::sqrt(2.0) / std::cosh(x + 5) + std::sqrt(2.0) / std::cosh(x - 5), 1e-8);
  }
  EXPECT_THROW(build_ansatz(Configuration{1, {Point3{25, 0, 0}}, 10.0}, cubic(), g), InvalidArgument);
}

TEST(Ansatz, KernelsAreCutOffTranslationDerivatives) {
  const Grid g(1, 30.0, 0.1);
  const double q = 2.0;
  const Configuration c{1, {Point3{q, 0, 0}}, 10.0};
  const auto z = kernel_functions(c, cubic(), g);
  ASSERT_EQ(z.size(), 1u);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double y = g.point(k)[0] - q;
    // d/dx sqrt(2) sech(x - q).
    const double exact = -std::sqrt(2.0) * std::tanh(y) / std::cosh(y);
    if (std::abs(y) <= 4.5) { EXPECT_NEAR(z[0][k], exact, 1e-7); }
    if (std::abs(y) >= 5.0) { EXPECT_EQ(z[0][k], 0.0); }
  }
  EXPECT_THROW(kernel_functions(Configuration{1, {Point3{0, 0, 0}}, 1.0}, cubic(), g), InvalidArgument);
}

TEST(Ansatz, KernelOrderingIsSpikeMajor) {
  const GroundState gs = compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 2), 2);
  const Grid g(2, 16.0, 0.25);
  const Configuration c{2, {Point3{-3, 0, 0}, Point3{3, 1, 0}}, 6.0};
  const auto z = kernel_functions(c, gs, g);
  ASSERT_EQ(z.size(), 4u);
  // Z_{1,2} is odd in y - 1 around the second spike and vanishes near the first.
  const std::size_t near_second = g.node({g.half_steps() + 12 + 2, g.half_steps() + 4 + 2, 0});
  const std::size_t near_first = g.node({g.half_steps() - 12, g.half_steps() + 2, 0});
  EXPECT_NE(z[3][near_second], 0.0);
  EXPECT_EQ(z[3][near_first], 0.0);
  EXPECT_NE(z[1][near_first], 0.0);
}

TEST(WeightedNorm, EnvelopeHasUnitNorm) {
  const Grid g(1, 20.0, 0.1);
  const Configuration c{1, {Point3{-4, 0, 0}, Point3{4, 0, 0}}, 8.0};
  const WeightedNormParams p{0.75};
  Field w = weight_field(c, g, p);
  EXPECT_NEAR(weighted_norm(w, c, p), 1.0, 1e-15);
  for (std::size_t k = 0; k < g.size(); ++k) w[k] *= -2.5;
  EXPECT_NEAR(weighted_norm(w, c, p), 2.5, 1e-14);
}

TEST(BumpModel, ContinuumMatchesGroundState) {
  const BumpModel b = BumpModel::continuum(cubic());
  EXPECT_FALSE(b.has_correction());
  EXPECT_DOUBLE_EQ(b.value({1.5, 0, 0}), cubic().value(1.5));
  EXPECT_DOUBLE_EQ(b.value({-1.5, 0, 0}), cubic().value(1.5));
}
