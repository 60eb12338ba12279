#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mbump/energy.hpp"
#include "mbump/maximize.hpp"
#include "mbump/model.hpp"
#include "mbump/potential.hpp"
#include "mbump/profile.hpp"

namespace mbump {

/// Coupling of Delta u - (1 + delta a) u + mu1 u^3 + beta v^2 u = 0 and
/// Delta v - (1 + delta b) v + mu2 v^3 + beta u^2 v = 0, with the synchronized
/// amplitudes (u, v) = (alpha w, gamma w).
struct CouplingParams {
  double mu1 = 1.0;
  double mu2 = 1.0;
  double beta = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  bool admissible = false;
  std::string reason;
};

/// alpha = sqrt((mu2 - beta) / (mu1 mu2 - beta^2)), gamma likewise. Admissible
/// iff beta lies in (-beta_star, 0), (0, min mu) or (max mu, inf); negative
/// beta is inadmissible when beta_star is not supplied. Throws InvalidArgument
/// for mu <= 0 or beta^2 = mu1 mu2.
CouplingParams synchronized_amplitudes(double mu1, double mu2, double beta,
                                       std::optional<double> beta_star = std::nullopt);

/// mu1 alpha^4 + mu2 gamma^4 + 2 beta alpha^2 gamma^2.
double interaction_factor(const CouplingParams& params);

struct PairField {
  Field u;
  Field v;
};

/// Component-wise residual on every node (Laplacian with zero exterior).
PairField coupled_residual(const PairField& pair, const Potential& a, const Potential& b, double delta,
                           const CouplingParams& params);

struct CoupledSpectrum {
  /// Discrete eigenvalues above -1 + margin, descending, with multiplicity.
  std::vector<double> eigenvalues;
  /// Eigenvalues of the constant coupling matrix; each gives a scalar problem
  /// Delta - 1 + m w^2.
  double m_first = 0.0;
  double m_second = 0.0;
  int positive_count = 0;
  int kernel_dim = 0;
  bool nondegenerate = false;
};

/// Spectrum of the linearization around (alpha w, gamma w), where w is the
/// cubic ground state. The 2 x 2 block operator is diagonalised by the
/// eigenvectors of the coupling matrix.
CoupledSpectrum coupled_spectrum(const CouplingParams& params, const GroundState& gs, int n_modes = 16,
                                 const SpectrumOptions& options = {});

/// Smallest |beta| in (0, sqrt(mu1 mu2)) at which the positive count jumps for
/// negative beta, located by a scan and bisection; sqrt(mu1 mu2) if none.
double estimate_beta_star(double mu1, double mu2, const GroundState& gs, int scan_points = 24,
                          const SpectrumOptions& options = {});

/// The coupled problem on a grid. States hold u then v.
class CoupledModel final : public DiscreteModel {
 public:
  CoupledModel(const Grid& grid, const Potential& a, const Potential& b, double delta, const CouplingParams& params,
               BumpModel bump);

  const Grid& grid() const noexcept override { return grid_; }
  int components() const noexcept override { return 2; }
  Eigen::VectorXd ansatz(const Configuration& config) const override;
  std::vector<Eigen::VectorXd> kernels(const Configuration& config) const override;
  Eigen::VectorXd residual(const Eigen::VectorXd& state) const override;
  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& state) const override;
  EnergyBreakdown energy(const Eigen::VectorXd& state) const override;

  const CouplingParams& params() const noexcept { return params_; }

 private:
  Grid grid_;
  Field a_samples_;
  Field b_samples_;
  double delta_;
  CouplingParams params_;
  BumpModel bump_;
  Eigen::SparseMatrix<double> laplacian_;
};

struct CoupledRun {
  MaximizerRecord record;
  PolishReport polish;
  PairField solution;
  /// sup |u - v| of the polished pair.
  double symmetry_gap = 0.0;
  /// Component-wise sup of the polished residual over interior nodes.
  double residual_u = 0.0;
  double residual_v = 0.0;
};

/// Maximises the coupled reduced energy over k spikes and polishes the
/// maximiser. Throws InvalidArgument for inadmissible parameters, a non-cubic
/// ground state or potentials failing the weighted hypothesis check.
CoupledRun coupled_reduce_and_maximize(int k, const Potential& a, const Potential& b, double delta,
                                       const CouplingParams& params, const GroundState& gs, const Grid& grid,
                                       MaximizeOptions options = {});

/// Coupled ledger with the coupled single-bump energy as the increment base.
EnergyLedger coupled_ledger(int k_max, const Potential& a, const Potential& b, double delta,
                            const CouplingParams& params, const GroundState& gs, const Grid& grid,
                            MaximizeOptions options = {});

/// Two-spike coupled ansatz energy against -A gamma_1 w(d).
std::vector<InteractionRow> coupled_interaction_study(const CouplingParams& params, const GroundState& gs,
                                                      const std::vector<double>& d_list,
                                                      const InteractionStudyOptions& options = {});

}  // namespace mbump
