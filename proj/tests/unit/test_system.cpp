#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "mbump/error.hpp"
#include "mbump/system.hpp"

using namespace mbump;

namespace {

const GroundState& cubic() {
  static const GroundState gs = compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 1), 1);
  return gs;
}

// Eigenvalues of the 2x2 block operator assembled densely on a uniform 1D grid
// with Dirichlet ends, independent of the diagonalisation used in the library.
std::vector<double> dense_block_eigenvalues(const CouplingParams& p, double half, double h) {
  const int n = static_cast<int>(std::lround(2.0 * half / h)) - 1;
  const double a2 = p.alpha * p.alpha;
  const double g2 = p.gamma * p.gamma;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    const double x = -half + (i + 1) * h;
    const double w2 = std::pow(cubic().value(std::abs(x)), 2);
    for (int b = 0; b < 2; ++b) {
      m(b * n + i, b * n + i) = -2.0 / (h * h) - 1.0;
      if (i > 0) m(b * n + i, b * n + i - 1) = 1.0 / (h * h);
      if (i + 1 < n) m(b * n + i, b * n + i + 1) = 1.0 / (h * h);
    }
    m(i, i) += (3.0 * p.mu1 * a2 + p.beta * g2) * w2;
    m(n + i, n + i) += (3.0 * p.mu2 * g2 + p.beta * a2) * w2;
    m(i, n + i) = m(n + i, i) = 2.0 * p.beta * p.alpha * p.gamma * w2;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 2 * n);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

}  // namespace

TEST(Amplitudes, Examples) {
  const CouplingParams decoupled = synchronized_amplitudes(1.0, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(decoupled.alpha, 1.0);
  EXPECT_DOUBLE_EQ(decoupled.gamma, 1.0);
  EXPECT_FALSE(decoupled.admissible);
  const CouplingParams strong = synchronized_amplitudes(1.0, 1.0, 3.0);
  EXPECT_EQ(strong.alpha, 0.5);
  EXPECT_EQ(strong.gamma, 0.5);
  EXPECT_TRUE(strong.admissible);
  EXPECT_THROW(synchronized_amplitudes(1.0, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(synchronized_amplitudes(1.0, 1.0, -1.0), InvalidArgument);
  EXPECT_THROW(synchronized_amplitudes(0.0, 1.0, 0.5), InvalidArgument);
}

TEST(Amplitudes, SolveTheAlgebraicSystem) {
  // mu1 alpha^2 + beta gamma^2 = 1 and beta alpha^2 + mu2 gamma^2 = 1.
  for (double beta : {-0.3, 0.2, 0.7, 2.5, 6.0}) {
    const CouplingParams p = synchronized_amplitudes(1.0, 2.0, beta, 0.5);
    if (!(p.alpha > 0.0)) continue;
    EXPECT_NEAR(p.mu1 * p.alpha * p.alpha + beta * p.gamma * p.gamma, 1.0, 1e-14);
    EXPECT_NEAR(beta * p.alpha * p.alpha + p.mu2 * p.gamma * p.gamma, 1.0, 1e-14);
  }
}

TEST(Amplitudes, AdmissibleIntervals) {
  EXPECT_TRUE(synchronized_amplitudes(1.0, 2.0, 0.5).admissible);
  // beta between min and max: negative radicand.
  const CouplingParams mid = synchronized_amplitudes(1.0, 2.0, 1.5);
  EXPECT_FALSE(mid.admissible);
  EXPECT_FALSE(mid.reason.empty());
  EXPECT_TRUE(synchronized_amplitudes(1.0, 2.0, 3.0).admissible);
  EXPECT_FALSE(synchronized_amplitudes(1.0, 1.0, -0.2).admissible);
  EXPECT_TRUE(synchronized_amplitudes(1.0, 1.0, -0.2, 3.0 / 7.0).admissible);
  EXPECT_FALSE(synchronized_amplitudes(1.0, 1.0, -0.5, 3.0 / 7.0).admissible);
}

TEST(Amplitudes, ContinuousThroughZero) {
  double prev = synchronized_amplitudes(1.0, 2.0, -0.02, 0.5).alpha;
  for (int i = -19; i <= 20; ++i) {
    if (i == 0) continue;
    const double a = synchronized_amplitudes(1.0, 2.0, 1e-3 * i, 0.5).alpha;
    EXPECT_LT(std::abs(a - prev), 2e-3);
    prev = a;
  }
}

TEST(Amplitudes, InteractionFactor) {
  EXPECT_DOUBLE_EQ(interaction_factor(synchronized_amplitudes(1.0, 1.0, 3.0)), 0.5);
  // A = alpha^2 + gamma^2 for synchronized amplitudes.
  const CouplingParams p = synchronized_amplitudes(1.0, 2.0, 0.4);
  EXPECT_NEAR(interaction_factor(p), p.alpha * p.alpha + p.gamma * p.gamma, 1e-14);
}

TEST(CoupledResidual, Cases) {
  const Grid g(1, 25.0, 0.05);
  const Field w = build_ansatz(Configuration{1, {Point3{0, 0, 0}}, 10.0}, cubic(), g);
  const CouplingParams p = synchronized_amplitudes(1.0, 1.0, 3.0);
  Field u = w;
  Field v = w;
  for (std::size_t k = 0; k < g.size(); ++k) {
    u[k] *= p.alpha;
    v[k] *= p.gamma;
  }
  const PairField r = coupled_residual({u, v}, zero_potential(), zero_potential(), 0.0, p);
  // O(h^2) truncation of the stencil.
  EXPECT_LT(r.u.max_abs(), 1e-3);
  EXPECT_LT(r.v.max_abs(), 1e-3);
  const PairField zero = coupled_residual({Field(g), Field(g)}, algebraic_potential(), algebraic_potential(), 1.0, p);
  EXPECT_EQ(zero.u.max_abs(), 0.0);
  EXPECT_EQ(zero.v.max_abs(), 0.0);
  const CouplingParams dec = synchronized_amplitudes(1.0, 1.0, 0.0);
  const PairField half = coupled_residual({w, Field(g)}, zero_potential(), zero_potential(), 0.0, dec);
  // Unit amplitude: h^2 w''''(0) / 12 = 5 sqrt(2) h^2 / 12 = 1.47e-3.
  EXPECT_LT(half.u.max_abs(), 2e-3);
  EXPECT_EQ(half.v.max_abs(), 0.0);
  EXPECT_THROW(coupled_residual({w, Field(Grid(1, 20.0, 0.05))}, zero_potential(), zero_potential(), 0.0, p),
               InvalidArgument);
}

TEST(CoupledSpectrum, DecoupledIsTwoCopies) {
  const CoupledSpectrum s = coupled_spectrum(synchronized_amplitudes(1.0, 1.0, 0.0), cubic());
  ASSERT_GE(s.eigenvalues.size(), 4u);
  EXPECT_NEAR(s.eigenvalues[0], 3.0, 1e-3);
  EXPECT_NEAR(s.eigenvalues[1], 3.0, 1e-3);
  EXPECT_NEAR(s.eigenvalues[2], 0.0, 1e-4);
  EXPECT_NEAR(s.eigenvalues[3], 0.0, 1e-4);
  EXPECT_EQ(s.positive_count, 2);
  EXPECT_EQ(s.kernel_dim, 2);
  EXPECT_FALSE(s.nondegenerate);
}

TEST(CoupledSpectrum, StrongCouplingIsNondegenerate) {
  const CoupledSpectrum s = coupled_spectrum(synchronized_amplitudes(1.0, 1.0, 3.0), cubic());
  EXPECT_EQ(s.kernel_dim, 1);
  EXPECT_GE(s.positive_count, 1);
  EXPECT_TRUE(s.nondegenerate);
  EXPECT_NEAR(s.m_first, 3.0, 1e-14);
  EXPECT_NEAR(s.m_second, 0.0, 1e-14);
}

TEST(CoupledSpectrum, AgreesWithDenseBlockAssembly) {
  for (double beta : {0.3, -0.2, 2.0}) {
    const CouplingParams p = synchronized_amplitudes(1.0, 1.5, beta, 0.5);
    ASSERT_GT(p.alpha, 0.0);
    const CoupledSpectrum s = coupled_spectrum(p, cubic());
    const std::vector<double> dense = dense_block_eigenvalues(p, 20.0, 0.02);
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
      if (s.eigenvalues[i] < -0.8) break;
      EXPECT_NEAR(s.eigenvalues[i], dense[i], 2e-3) << "beta " << beta << " index " << i;
    }
  }
}

TEST(CoupledSpectrum, BetaStarFromPoschlTeller) {
  // For mu1 = mu2 = 1 the second coupling eigenvalue is (3 - beta)/(1 + beta);
  // it reaches 6, where Delta - 1 + 6 w^2 gains a new zero mode, at beta = -3/7.
  EXPECT_NEAR(estimate_beta_star(1.0, 1.0, cubic()), 3.0 / 7.0, 1e-3);
}

TEST(CoupledSpectrum, PositiveCountConstantOnIntervals) {
  int k_neg = -1;
  for (double beta : {-0.4, -0.3, -0.2, -0.1, -0.05}) {
    const int k = coupled_spectrum(synchronized_amplitudes(1.0, 1.0, beta, 3.0 / 7.0), cubic()).positive_count;
    if (k_neg < 0) k_neg = k;
    EXPECT_EQ(k, k_neg) << beta;
  }
  EXPECT_EQ(k_neg, 3);
  for (double beta : {0.1, 0.4, 0.8})
    EXPECT_EQ(coupled_spectrum(synchronized_amplitudes(1.0, 1.0, beta), cubic()).positive_count, 2) << beta;
  for (double beta : {1.5, 3.0, 8.0})
    EXPECT_EQ(coupled_spectrum(synchronized_amplitudes(1.0, 1.0, beta), cubic()).positive_count, 1) << beta;
}

TEST(CoupledModel, DecoupledSingleSpikeEnergy) {
  // beta = 0: I(U, V) = 2 I(w) = 8/3.
  const Grid g(1, 20.0, 0.02);
  const CoupledModel m(g, zero_potential(), zero_potential(), 0.0, synchronized_amplitudes(1.0, 1.0, 0.0),
                       make_grid_consistent_bump(cubic(), g.spacing(), default_bump_reach(g)));
  const ReducedEnergy e = reduced_energy(m, Configuration{1, {Point3{0, 0, 0}}, 10.0});
  EXPECT_NEAR(e.value, 8.0 / 3.0, 1e-4);
}

TEST(CoupledModel, JacobianMatchesFiniteDifferences) {
  const Grid g(1, 12.0, 0.25);
  const CouplingParams p = synchronized_amplitudes(1.0, 2.0, 0.4);
  const CoupledModel m(g, algebraic_potential(), sub_exponential_potential(), 0.1, p, BumpModel::continuum(cubic()));
  Eigen::VectorXd s = m.ansatz(Configuration{1, {Point3{0.3, 0, 0}}, 10.0});
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] += 0.01 * std::sin(0.7 * i);
  const Eigen::MatrixXd j = Eigen::MatrixXd(m.jacobian(s));
  const double e = 1e-6;
  for (Eigen::Index col : {Eigen::Index(3), Eigen::Index(40), Eigen::Index(95)}) {
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.unknowns()));
    dx[col] = e;
    const Eigen::VectorXd fd =
        (m.to_unknowns(m.residual(s + m.from_unknowns(dx))) - m.to_unknowns(m.residual(s - m.from_unknowns(dx)))) /
        (2 * e);
    EXPECT_LT((fd - j.col(col)).cwiseAbs().maxCoeff(), 1e-6) << col;
  }
}

TEST(CoupledPipeline, InteractionConstantA) {
  const auto rows = coupled_interaction_study(synchronized_amplitudes(1.0, 1.0, 3.0), cubic(), {10.0, 14.0});
  EXPECT_LE(std::abs(rows[0].ratio - 1.0), 0.3);
  EXPECT_LT(std::abs(rows[1].ratio - 1.0), std::abs(rows[0].ratio - 1.0));
}

TEST(CoupledPipeline, PolishedSymmetricSolution) {
  const Grid g(1, 60.0, 0.1);
  MaximizeOptions o;
  o.restarts = 2;
  const CoupledRun run = coupled_reduce_and_maximize(2, algebraic_potential(), algebraic_potential(), 1e-9,
                                                     synchronized_amplitudes(1.0, 1.0, 3.0), cubic(), g, o);
  EXPECT_LE(run.residual_u, 1e-10);
  EXPECT_LE(run.residual_v, 1e-10);
  EXPECT_LE(run.symmetry_gap, 1e-8);
  EXPECT_EQ(run.polish.n_local_maxima, 2);
  EXPECT_GT(run.polish.min_value, 0.0);
}

TEST(CoupledPipeline, LedgerIncrementsByCoupledBumpEnergy) {
  MaximizeOptions o;
  o.restarts = 2;
  const EnergyLedger l = coupled_ledger(2, algebraic_potential(), algebraic_potential(), 1e-9,
                                        synchronized_amplitudes(1.0, 1.0, 3.0), cubic(), Grid(1, 60.0, 0.1), o);
  EXPECT_TRUE(l.accepted) << l.failure;
  // I(U, V) = A I(w) with A = 1/2 here.
  EXPECT_NEAR(l.bump_energy, 0.5 * 4.0 / 3.0, 1e-3);
}

TEST(CoupledPipeline, RejectsInadmissibleInput) {
  const Grid g(1, 60.0, 0.1);
  EXPECT_THROW(coupled_reduce_and_maximize(2, algebraic_potential(), algebraic_potential(), 1e-9,
                                           synchronized_amplitudes(1.0, 1.0, 0.0), cubic(), g),
               InvalidArgument);
  EXPECT_THROW(coupled_reduce_and_maximize(2, zero_potential(), zero_potential(), 1e-9,
                                           synchronized_amplitudes(1.0, 1.0, 3.0), cubic(), g),
               InvalidArgument);
  const GroundState quad = compute_ground_state(make_nonlinearity(2.0, 1.5, 0.0, 1), 1);
  EXPECT_THROW(coupled_spectrum(synchronized_amplitudes(1.0, 1.0, 3.0), quad), InvalidArgument);
}
