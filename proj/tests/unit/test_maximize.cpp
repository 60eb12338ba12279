#include <cmath>

#include <gtest/gtest.h>

#include "mbump/error.hpp"
#include "mbump/maximize.hpp"

using namespace mbump;

namespace {

const GroundState& cubic() {
  static const GroundState gs = compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 1), 1);
  return gs;
}

const Grid& ledger_grid() {
  static const Grid g(1, 60.0, 0.1);
  return g;
}

ScalarModel model_on(const Grid& g, const Potential& v, double delta) {
  return ScalarModel(g, v, delta, cubic().nonlinearity(),
                     make_grid_consistent_bump(cubic(), g.spacing(), default_bump_reach(g)));
}

MaximizeOptions options(double delta) {
  MaximizeOptions o;
  o.rho = 10.0;
  o.delta = delta;
  o.restarts = 2;
  return o;
}

const EnergyLedger& ledger() {
  static const EnergyLedger l = build_ledger(2, algebraic_potential(), 1e-9, cubic(), ledger_grid(), options(1e-9));
  return l;
}

}  // namespace

TEST(SearchRadius, Formula) {
  const Grid g(1, 100.0, 0.1);
  EXPECT_NEAR(search_radius_for(0.0, 1e-9, 0.75, 0.25, 10.0, g), std::log(1e9) / 0.5, 1e-12);
  EXPECT_NEAR(search_radius_for(3.0, 1e-9, 0.75, 0.25, 10.0, g), (3.0 + std::log(1e9)) / 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(search_radius_for(0.0, 1e-9, 0.75, 0.25, 10.0, Grid(1, 40.0, 0.1)), 28.0);
  EXPECT_DOUBLE_EQ(search_radius_for(0.0, 0.0, 0.75, 0.25, 10.0, g), 30.0);
  EXPECT_THROW(search_radius_for(0.0, 1e-9, 0.25, 0.25, 10.0, g), InvalidArgument);
  EXPECT_THROW(search_radius_for(0.0, 1e-9, 0.75, 0.25, 10.0, Grid(1, 10.0, 0.1)), InvalidArgument);
}

TEST(Maximize, SingleSpikeWithoutPotentialIsFlat) {
  const Grid g(1, 30.0, 0.1);
  const ScalarModel m = model_on(g, zero_potential(), 0.0);
  const MaximizerRecord r = maximize_reduced_energy(m, 1, options(0.0));
  const double i_h = reduced_energy(m, Configuration{1, {Point3{0, 0, 0}}, 10.0}).value;
  EXPECT_NEAR(r.value, i_h, 1e-9);
  EXPECT_FALSE(r.supremum_not_attained);
  EXPECT_EQ(r.restarts_failed, 0);
}

TEST(Maximize, TwoSpikesWithoutPotentialSeparateToTheBall) {
  const Grid g(1, 40.0, 0.1);
  const ScalarModel m = model_on(g, zero_potential(), 0.0);
  const MaximizerRecord r = maximize_reduced_energy(m, 2, options(0.0));
  EXPECT_TRUE(r.supremum_not_attained);
  // M grows with the distance until the gain drops below the rounding level
  // of the energy, near d = 30.
  EXPECT_GT(diameter(r.config), 25.0);
}

TEST(Maximize, DeterministicAcrossWorkerCounts) {
  const Grid g(1, 40.0, 0.1);
  const ScalarModel m = model_on(g, algebraic_potential(), 1e-6);
  MaximizeOptions serial = options(1e-6);
  serial.restarts = 3;
  MaximizeOptions parallel = serial;
  parallel.jobs = 3;
  const MaximizerRecord a = maximize_reduced_energy(m, 2, serial);
  const MaximizerRecord b = maximize_reduced_energy(m, 2, parallel);
  const MaximizerRecord c = maximize_reduced_energy(m, 2, serial);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.value, c.value);
  EXPECT_EQ(a.config.points, b.config.points);
}

TEST(Maximize, RejectsBadArguments) {
  const Grid g(1, 30.0, 0.1);
  const ScalarModel m = model_on(g, zero_potential(), 0.0);
  EXPECT_THROW(maximize_reduced_energy(m, 0, options(0.0)), InvalidArgument);
  MaximizeOptions o = options(0.0);
  o.search_radius = 25.0;
  EXPECT_THROW(maximize_reduced_energy(m, 1, o), InvalidArgument);
}

TEST(Ledger, IncrementsExceedNoise) {
  const EnergyLedger& l = ledger();
  ASSERT_EQ(l.entries.size(), 2u);
  EXPECT_TRUE(l.accepted) << l.failure;
  for (const LedgerEntry& e : l.entries) {
    EXPECT_GT(e.increment, 10.0 * e.noise_floor);
    EXPECT_TRUE(e.interior);
  }
  EXPECT_FALSE(l.supremum_not_attained);
  // Single-bump energy is exact up to rounding under sub-cell shifts of the
  // grid-consistent bump.
  EXPECT_LT(l.bump_energy_spread, 1e-13);
}

TEST(Ledger, ValidatesInput) {
  EXPECT_THROW(build_ledger(1, algebraic_potential(), 1e-9, cubic(), ledger_grid()), InvalidArgument);
  EXPECT_THROW(build_ledger(2, zero_potential(), 1e-9, cubic(), ledger_grid()), InvalidArgument);
}

TEST(Maximizer, GradientAndMultipliersVanish) {
  const LedgerEntry& e = ledger().entries.at(1);
  const ScalarModel m = model_on(ledger_grid(), algebraic_potential(), 1e-9);
  const MultiplierReport rep = multiplier_check(m, e.record);
  EXPECT_TRUE(rep.diagonally_dominant);
  EXPECT_GT(rep.min_dominance_gap, 0.0);
  // The multipliers are O(delta w) small at the maximiser; a displaced
  // configuration shows a larger gradient.
  const Eigen::VectorXd grad = fd_gradient(m, e.record.config, 1e-2);
  Configuration moved = e.record.config;
  moved.points[0][0] += 2.0;
  const Eigen::VectorXd grad_moved = fd_gradient(m, moved, 1e-2);
  EXPECT_LT(grad.cwiseAbs().maxCoeff(), grad_moved.cwiseAbs().maxCoeff());
}

TEST(Maximizer, PolishGivesTwoPeakSolution) {
  const LedgerEntry& e = ledger().entries.at(1);
  const ScalarModel m = model_on(ledger_grid(), algebraic_potential(), 1e-9);
  const PolishResult p = polish_solution(m, e.record);
  EXPECT_LE(p.report.residual, 1e-10);
  EXPECT_GT(p.report.min_value, 0.0);
  EXPECT_EQ(p.report.n_local_maxima, 2);
  EXPECT_LE(p.report.max_peak_offset, ledger_grid().spacing());
}

TEST(LocalMaxima, FindsStrictPeaks) {
  const Grid g(2, 10.0, 0.25);
  const Field u = sample(g, [](const Point3& x) {
    return std::exp(-std::pow(x[0] - 3.0, 2) - x[1] * x[1]) + 0.5 * std::exp(-std::pow(x[0] + 3.0, 2) - x[1] * x[1]);
  });
  const auto peaks = local_maxima(u);
  ASSERT_EQ(peaks.size(), 2u);
  const Field flat(g, 1.0);
  EXPECT_TRUE(local_maxima(flat).empty());
}

TEST(Packing, SumBoundedByLatticeSum) {
  const Configuration c{1, {Point3{-20, 0, 0}, Point3{-10, 0, 0}, Point3{0, 0, 0}, Point3{10, 0, 0}}, 10.0};
  const PackingReport p = packing_check(c, cubic());
  EXPECT_TRUE(p.pass);
  EXPECT_NEAR(p.max_sum, 2.0 * cubic().value(10.0) + cubic().value(20.0), 1e-12);
}
