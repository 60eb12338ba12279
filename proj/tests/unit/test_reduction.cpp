#include <cmath>

#include <gtest/gtest.h>

#include "mbump/error.hpp"
#include "mbump/reduction.hpp"

using namespace mbump;

namespace {

const GroundState& cubic() {
  static const GroundState gs = compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 1), 1);
  return gs;
}

ScalarModel model_on(const Grid& g, const Potential& v, double delta) {
  return ScalarModel(g, v, delta, cubic().nonlinearity(),
                     make_grid_consistent_bump(cubic(), g.spacing(), default_bump_reach(g)));
}

double interior_sup(const Field& f) {
  double m = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (!f.grid().is_boundary(k)) m = std::max(m, std::abs(f[k]));
  return m;
}

}  // namespace

TEST(Reduction, SingleSpikeAtNodeNeedsNoCorrection) {
  const Grid g(1, 30.0, 0.1);
  const CorrectionResult r = solve_projected(Configuration{1, {Point3{0, 0, 0}}, 10.0}, zero_potential(), 0.0,
                                             cubic(), g);
  EXPECT_LT(r.phi.front().max_abs(), 1e-12);
  EXPECT_LT(r.multipliers.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Reduction, SingleSpikeOffNodeHasVanishingMultiplier) {
  const Grid g(1, 30.0, 0.1);
  for (double q : {0.03, 1.234, -2.71}) {
    const CorrectionResult r =
        solve_projected(Configuration{1, {Point3{q, 0, 0}}, 10.0}, zero_potential(), 0.0, cubic(), g);
    EXPECT_LT(r.multipliers.cwiseAbs().maxCoeff(), 1e-10) << q;
    EXPECT_LT(r.orthogonality, 1e-10);
    // Sub-cell interpolation of the discrete bump, fourth order in h.
    EXPECT_LT(r.phi.front().max_abs(), 1e-5);
  }
}

TEST(Reduction, ProjectedEquationHoldsBySubstitution) {
  const Grid g(1, 40.0, 0.1);
  const Potential v = algebraic_potential();
  const double delta = 1e-3;
  const ScalarModel m = model_on(g, v, delta);
  const Configuration c{1, {Point3{-7.05, 0, 0}, Point3{4.0, 0, 0}, Point3{16.3, 0, 0}}, 10.0};
  const CorrectionResult r = solve_projected(m, c);
  // Independent residual evaluation: S(u_Q + phi) - sum c_ij Z_ij.
  Field s = residual(m.component(r.state, 0), v, delta, cubic().nonlinearity());
  const auto z = kernel_functions(c, cubic(), g);
  for (std::size_t l = 0; l < z.size(); ++l)
    for (std::size_t k = 0; k < g.size(); ++k) s[k] -= r.multipliers(static_cast<Eigen::Index>(l), 0) * z[l][k];
  EXPECT_LT(interior_sup(s), 1e-9);
  for (const Field& zl : z) {
    double dot = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) dot += g.cell_volume() * r.phi.front()[k] * zl[k];
    EXPECT_LT(std::abs(dot), 1e-10);
  }
  // The multipliers are small but not zero at a non-critical configuration.
  EXPECT_GT(r.multipliers.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT(r.multipliers.cwiseAbs().maxCoeff(), 1e-2);
}

TEST(Reduction, RejectsInvalidConfiguration) {
  const Grid g(1, 30.0, 0.1);
  EXPECT_THROW(solve_projected(Configuration{1, {Point3{0, 0, 0}, Point3{5, 0, 0}}, 10.0}, zero_potential(), 0.0,
                               cubic(), g),
               InvalidArgument);
  EXPECT_THROW(model_on(g, zero_potential(), -1.0), InvalidArgument);
}

TEST(Reduction, CorrectionDecaysExponentially) {
  const DecayStudy s = correction_decay_study(cubic(), zero_potential(), 0.0, {8.0, 10.0, 12.0});
  EXPECT_TRUE(s.monotone);
  EXPECT_GE(s.xi, 0.5);
  ASSERT_EQ(s.rows.size(), 3u);
  for (std::size_t i = 1; i < s.rows.size(); ++i) EXPECT_LT(s.rows[i].star_norm, s.rows[i - 1].star_norm);
  EXPECT_THROW(correction_decay_study(cubic(), zero_potential(), 0.0, {8.0, 10.0}), InvalidArgument);
}

TEST(Reduction, DecayStudyIsIndependentOfWorkerCount) {
  DecayStudyOptions serial;
  DecayStudyOptions parallel;
  parallel.jobs = 3;
  const DecayStudy a = correction_decay_study(cubic(), algebraic_potential(), 1e-9, {8.0, 9.0, 10.0}, serial);
  const DecayStudy b = correction_decay_study(cubic(), algebraic_potential(), 1e-9, {8.0, 9.0, 10.0}, parallel);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].star_norm, b.rows[i].star_norm);
  EXPECT_EQ(a.xi, b.xi);
}

TEST(Reduction, IncrementBoundForAugmentations) {
  const DecayStudy calib = correction_decay_study(cubic(), zero_potential(), 0.0, {8.0, 10.0, 12.0});
  const Grid g(1, 40.0, 0.1);
  for (double delta : {0.0, 1e-9}) {
    const Configuration two{1, {Point3{-6, 0, 0}, Point3{6, 0, 0}}, 12.0};
    const IncrementReport r = increment_bound_check(two, Point3{18, 0, 0}, algebraic_potential(), delta, cubic(), g,
                                                    calib);
    EXPECT_TRUE(r.pass) << r.lhs << " > " << r.rhs;
    EXPECT_GT(r.lhs, 0.0);
  }
  // A far new spike barely changes the correction.
  const Configuration one{1, {Point3{-10, 0, 0}}, 10.0};
  const IncrementReport far = increment_bound_check(one, Point3{10, 0, 0}, zero_potential(), 0.0, cubic(), g, calib);
  EXPECT_LT(far.lhs, 1e-12);
}

TEST(Reduction, NewtonFailureCarriesHistory) {
  const Grid g(1, 30.0, 0.1);
  NewtonOptions o;
  o.max_iterations = 1;
  o.tolerance = 1e-300;
  try {
    solve_projected(Configuration{1, {Point3{0, 0, 0}, Point3{10, 0, 0}}, 10.0}, zero_potential(), 0.0, cubic(), g, o);
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    EXPECT_FALSE(e.history().empty());
  }
}
