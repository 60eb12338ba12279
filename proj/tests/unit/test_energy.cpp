#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "mbump/energy.hpp"
#include "mbump/error.hpp"

using namespace mbump;

namespace {

const GroundState& cubic() {
  static const GroundState gs = compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 1), 1);
  return gs;
}

double simpson(const std::function<double(double)>& g, double a, double b, int n = 100000) {
  const double h = (b - a) / n;
  double s = g(a) + g(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(Energy, ContinuumBumpEnergy) {
  const Grid g(1, 25.0, 0.01);
  const EnergyBreakdown e =
      full_energy(build_ansatz(Configuration{1, {Point3{0, 0, 0}}, 10.0}, cubic(), g), zero_potential(), 0.0,
                  cubic().nonlinearity());
  EXPECT_NEAR(e.total, 4.0 / 3.0, 1e-4);
  // Parts of the exact energy: 1/2 (4/3 + 4) and -1/4 (16/3).
  EXPECT_NEAR(e.quadratic_part, 8.0 / 3.0, 1e-4);
  EXPECT_NEAR(e.nonlinear_part, -4.0 / 3.0, 1e-4);
  EXPECT_EQ(e.potential_part, 0.0);
  EXPECT_GT(e.roundoff, 0.0);
  EXPECT_LT(e.roundoff, 1e-13);
}

TEST(Energy, ReducedEnergyOfOneSpikeConvergesToI) {
  double previous = 0.0;
  for (double h : {0.1, 0.05}) {
    const Grid g(1, 30.0, h);
    const double e = reduced_energy(Configuration{1, {Point3{0, 0, 0}}, 10.0}, zero_potential(), 0.0, cubic(), g);
    const double err = std::abs(e - 4.0 / 3.0);
    if (previous > 0.0) { EXPECT_NEAR(previous / err, 4.0, 0.25); }
    previous = err;
  }
}

TEST(Energy, FirstOrderPotentialGain) {
  // M(Q) - I_h = (delta / 2) int V w_Q^2 + O(delta^2) for one spike.
  const Grid g(1, 30.0, 0.1);
  const Potential v = algebraic_potential();
  const Configuration c{1, {Point3{3.0, 0, 0}}, 10.0};
  const double delta = 1e-4;
  const double base = reduced_energy(c, zero_potential(), 0.0, cubic(), g);
  const double pert = reduced_energy(c, v, delta, cubic(), g);
  const double oracle = 0.5 * delta * simpson([](double x) {
    const double w = std::sqrt(2.0) / std::cosh(x - 3.0);
    return w * w / (1.0 + x * x);
  }, -30.0, 30.0);
  EXPECT_NEAR((pert - base) / oracle, 1.0, 1e-2);
  EXPECT_NEAR(potential_gain(c, v, delta, cubic()) / oracle, 1.0, 1e-6);
}

TEST(Energy, PredictedEnergyTracksReducedEnergy) {
  const Grid g(1, 40.0, 0.05);
  const Configuration c{1, {Point3{-6, 0, 0}, Point3{6, 0, 0}}, 10.0};
  const double m = reduced_energy(c, algebraic_potential(), 1e-6, cubic(), g);
  const double p = predicted_energy(c, algebraic_potential(), 1e-6, cubic());
  // Differences: O(h^2) per spike and higher-order interaction terms.
  EXPECT_NEAR(m, p, 2e-3);
}

TEST(Energy, TwoBumpInteractionLaw) {
  const auto rows = two_bump_interaction_study(cubic(), {10.0, 12.0, 14.0});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_LE(std::abs(rows[0].ratio - 1.0), 0.3);
  EXPECT_LT(std::abs(rows[1].ratio - 1.0), std::abs(rows[0].ratio - 1.0));
  EXPECT_LT(std::abs(rows[2].ratio - 1.0), std::abs(rows[1].ratio - 1.0));
  for (const auto& r : rows) EXPECT_LT(r.deviation, 0.0);
  EXPECT_THROW(two_bump_interaction_study(cubic(), {6.0}), InvalidArgument);
}
