#include <cmath>
#include <functional>
#include <numbers>

#include <gtest/gtest.h>

#include "mbump/error.hpp"
#include "mbump/profile.hpp"

using namespace mbump;

namespace {

// Composite Simpson rule on [-a, a], used as an independent quadrature.
double simpson(const std::function<double(double)>& g, double a, int n = 200000) {
  const double h = 2.0 * a / n;
  double s = g(-a) + g(a);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(-a + i * h);
  return s * h / 3.0;
}

double sech(double x) { return 1.0 / std::cosh(x); }

const GroundState& cubic() {
  static const GroundState gs = compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 1), 1);
  return gs;
}

const GroundState& quadratic() {
  static const GroundState gs = compute_ground_state(make_nonlinearity(2.0, 1.5, 0.0, 1), 1);
  return gs;
}

}  // namespace

TEST(Nonlinearity, ValidatesParameters) {
  EXPECT_THROW(make_nonlinearity(1.0, 0.5, 0.0, 1), InvalidArgument);
  EXPECT_THROW(make_nonlinearity(3.0, 2.0, -1.0, 1), InvalidArgument);
  EXPECT_THROW(make_nonlinearity(3.0, 3.5, 1.0, 1), InvalidArgument);
  EXPECT_THROW(make_nonlinearity(5.0, 2.0, 0.0, 3), InvalidArgument);
  EXPECT_NO_THROW(make_nonlinearity(4.9, 2.0, 0.0, 3));
  EXPECT_DOUBLE_EQ(make_nonlinearity(1.5, 1.2, 1.0, 2).holder_sigma, 0.2);
}

TEST(Nonlinearity, PrimitiveAndDerivativeAreConsistent) {
  const Nonlinearity nl = make_nonlinearity(3.0, 2.0, 0.5, 1);
  const double t = 0.7;
  const double e = 1e-6;
  EXPECT_NEAR((nl.primitive(t + e) - nl.primitive(t - e)) / (2 * e), nl.f(t), 1e-9);
  EXPECT_NEAR((nl.f(t + e) - nl.f(t - e)) / (2 * e), nl.df(t), 1e-8);
  EXPECT_EQ(nl.f(-1.0), 0.0);
  EXPECT_EQ(nl.primitive(0.0), 0.0);
}

TEST(GroundState, CubicMatchesSech) {
  const GroundState& gs = cubic();
  EXPECT_NEAR(gs.center_value(), std::sqrt(2.0), 1e-6);
  double sup = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double r = 1e-3 * i;
    sup = std::max(sup, std::abs(gs.value(r) - std::sqrt(2.0) * sech(r)));
  }
  EXPECT_LE(sup, 1e-5);
  EXPECT_NEAR(gs.derivative(1.0), -std::sqrt(2.0) * sech(1.0) * std::tanh(1.0), 1e-6);
}

TEST(GroundState, QuadraticMatchesSechSquared) {
  const GroundState& gs = quadratic();
  EXPECT_NEAR(gs.center_value(), 1.5, 1e-6);
  double sup = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double r = 1e-3 * i;
    sup = std::max(sup, std::abs(gs.value(r) - 1.5 * std::pow(sech(0.5 * r), 2)));
  }
  EXPECT_LE(sup, 1e-5);
}

TEST(GroundState, CubicEnergyAndInteractionConstant) {
  const GroundState& gs = cubic();
  EXPECT_NEAR(gs.energy(), 4.0 / 3.0, 1e-4);
  // gamma_1 = int f(w) e^{-y} dy with w = sqrt(2) sech y.
  const double oracle = simpson([](double y) { return std::pow(std::sqrt(2.0) * sech(y), 3) * std::exp(-y); }, 40.0);
  EXPECT_NEAR(oracle, 4.0 * std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(interaction_constant(gs) / oracle, 1.0, 1e-3);
}

TEST(GroundState, QuadraticEnergyAndInteractionConstant) {
  const GroundState& gs = quadratic();
  const auto w = [](double y) { return 1.5 * std::pow(sech(0.5 * y), 2); };
  const auto dw = [](double y) { return -1.5 * std::pow(sech(0.5 * y), 2) * std::tanh(0.5 * y); };
  const double energy =
      simpson([&](double y) { return 0.5 * (dw(y) * dw(y) + w(y) * w(y)) - std::pow(w(y), 3) / 3.0; }, 40.0);
  EXPECT_NEAR(gs.energy(), energy, 1e-4);
  const double gamma1 = simpson([&](double y) { return w(y) * w(y) * std::exp(-y); }, 40.0);
  EXPECT_NEAR(interaction_constant(gs) / gamma1, 1.0, 1e-3);
}

TEST(GroundState, FirstIntegralHoldsWithSubtractedPower) {
  // In 1D, w'^2 / 2 = w^2 / 2 - F(w) along the whole profile.
  const Nonlinearity nl = make_nonlinearity(3.0, 2.0, 0.5, 1);
  const GroundState gs = compute_ground_state(nl, 1);
  for (double r : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double w = gs.value(r);
    const double dw = gs.derivative(r);
    EXPECT_NEAR(0.5 * dw * dw, 0.5 * w * w - nl.primitive(w), 1e-8);
  }
  // F(w(0)) = w(0)^2 / 2.
  const double w0 = gs.center_value();
  EXPECT_NEAR(nl.primitive(w0), 0.5 * w0 * w0, 1e-8);
}

TEST(Spectrum, CubicPoschlTeller) {
  // Delta - 1 + 6 sech^2: eigenvalues 3 and 0 above the essential spectrum.
  const SpectrumReport& s = cubic().spectrum();
  ASSERT_GE(s.eigenvalues.size(), 2u);
  EXPECT_NEAR(s.eigenvalues[0], 3.0, 1e-3);
  EXPECT_NEAR(s.eigenvalues[1], 0.0, 1e-4);
  EXPECT_EQ(s.kernel_dim, 1);
  EXPECT_EQ(s.positive_count, 1);
  int near_zero = 0;
  for (double ev : s.eigenvalues) near_zero += std::abs(ev) < 1e-4;
  EXPECT_EQ(near_zero, 1);
}

TEST(Spectrum, QuadraticPoschlTeller) {
  // Delta - 1 + 3 sech^2(x/2): eigenvalues 5/4, 0, -3/4.
  const SpectrumReport& s = quadratic().spectrum();
  ASSERT_GE(s.eigenvalues.size(), 3u);
  EXPECT_NEAR(s.eigenvalues[0], 1.25, 1e-3);
  EXPECT_NEAR(s.eigenvalues[1], 0.0, 1e-4);
  EXPECT_NEAR(s.eigenvalues[2], -0.75, 1e-3);
}

TEST(Spectrum, TopEigenfunctionIsPositive) {
  // For the cubic case phi_0 is proportional to sech^2.
  const RadialSamples& phi = cubic().phi0_profile();
  ASSERT_FALSE(phi.values.empty());
  double sup = 0.0;
  for (std::size_t i = 0; i < phi.values.size() && (i + 0.5) * phi.step < 10.0; ++i) {
    const double r = (i + 0.5) * phi.step;
    EXPECT_GT(phi.values[i], 0.0);
    sup = std::max(sup, std::abs(phi.values[i] / phi.values[0] - std::pow(sech(r) / sech(0.5 * phi.step), 2)));
  }
  EXPECT_LT(sup, 1e-3);
}

TEST(Spectrum, SectorMultiplicities) {
  EXPECT_EQ(sector_multiplicity(1, 1), 1);
  EXPECT_EQ(sector_multiplicity(2, 0), 1);
  EXPECT_EQ(sector_multiplicity(2, 3), 2);
  EXPECT_EQ(sector_multiplicity(3, 1), 3);
  EXPECT_EQ(sector_multiplicity(3, 2), 5);
}

TEST(GroundState, DecayFit) {
  // sqrt(2) sech r ~ 2 sqrt(2) e^{-r}; 3/2 sech^2(r/2) ~ 6 e^{-r}.
  EXPECT_NEAR(cubic().decay_rate(), 1.0, 0.02);
  EXPECT_NEAR(cubic().decay_amplitude() / (2.0 * std::sqrt(2.0)), 1.0, 1e-2);
  EXPECT_NEAR(quadratic().decay_amplitude() / 6.0, 1.0, 1e-2);
}

TEST(GroundState, HigherDimensionalCubic) {
  // Reference central values of the cubic ground states: 2.2062 in 2D (Townes
  // profile) and 4.3374 in 3D.
  const GroundState g2 = compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 2), 2);
  EXPECT_NEAR(g2.center_value(), 2.2062, 1e-3);
  EXPECT_EQ(g2.kernel_dim(), 2);
  EXPECT_EQ(g2.spectrum().positive_count, 1);
  const GroundState g3 = compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 3), 3);
  EXPECT_NEAR(g3.center_value(), 4.3374, 1e-3);
  EXPECT_EQ(g3.kernel_dim(), 3);
  for (double r = 0.0; r < 8.0; r += 0.25) EXPECT_GT(g3.value(r), g3.value(r + 0.25));
}

TEST(GroundState, RejectsBadArguments) {
  EXPECT_THROW(compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 1), 4), InvalidArgument);
  EXPECT_THROW(compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 1), 1, 1e-13), InvalidArgument);
}

TEST(GroundState, RadialMeasure) {
  EXPECT_DOUBLE_EQ(radial_measure(1, 3.0), 2.0);
  EXPECT_DOUBLE_EQ(radial_measure(2, 1.0), 2.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(radial_measure(3, 1.0), 4.0 * std::numbers::pi);
}
