#pragma once

#include <vector>

#include "mbump/ansatz.hpp"
#include "mbump/model.hpp"
#include "mbump/parallel.hpp"
#include "mbump/potential.hpp"
#include "mbump/profile.hpp"

namespace mbump {

/// The scalar problem Delta u - (1 + delta V) u + f(u) = 0 on a grid.
class ScalarModel final : public DiscreteModel {
 public:
  ScalarModel(const Grid& grid, const Potential& v, double delta, const Nonlinearity& nl, BumpModel bump);

  const Grid& grid() const noexcept override { return grid_; }
  int components() const noexcept override { return 1; }
  Eigen::VectorXd ansatz(const Configuration& config) const override;
  std::vector<Eigen::VectorXd> kernels(const Configuration& config) const override;
  Eigen::VectorXd residual(const Eigen::VectorXd& u) const override;
  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& u) const override;
  EnergyBreakdown energy(const Eigen::VectorXd& u) const override;

  const Potential& potential() const noexcept { return v_; }
  const Field& potential_samples() const noexcept { return v_samples_; }
  double delta() const noexcept { return delta_; }
  const Nonlinearity& nonlinearity() const noexcept { return nl_; }
  const BumpModel& bump() const noexcept { return bump_; }

 private:
  Grid grid_;
  Potential v_;
  Field v_samples_;
  double delta_;
  Nonlinearity nl_;
  BumpModel bump_;
  Eigen::SparseMatrix<double> laplacian_;
};

/// S(u) = Delta u - (1 + delta V) u + f(u) on every node (Laplacian with zero
/// exterior values).
Field residual(const Field& u, const Potential& v, double delta, const Nonlinearity& nl);

struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 30;
  int max_halvings = 5;
  BorderedOptions bordered;
  /// Enters only the reported star norm.
  WeightedNormParams norm;
};

/// Solution of the projected problem S(u_Q + phi) = sum_ij c_ij Z_ij with
/// <phi, Z_ij> = 0.
struct CorrectionResult {
  /// One field per component.
  std::vector<Field> phi;
  /// k x dim matrix of c_ij.
  Eigen::MatrixXd multipliers;
  /// Full state u_Q + phi.
  Eigen::VectorXd state;
  double star_norm = 0.0;
  double h1_norm = 0.0;
  int newton_iterations = 0;
  /// sup |S(u) - sum c_ij Z_ij| on interior nodes.
  double final_residual = 0.0;
  /// max_ij |<phi, Z_ij>|.
  double orthogonality = 0.0;
  std::vector<double> history;
};

/// Newton iteration from phi = 0; each step solves the bordered linearised
/// system for the update and the multipliers. Throws NumericalFailure with the
/// residual history after max_iterations.
CorrectionResult solve_projected(const DiscreteModel& model, const Configuration& config,
                                 const NewtonOptions& options = {});

/// Grid-consistent bump for grids of the given spacing: solves the discrete
/// single-spike problem at the origin on a box of half width `reach` and
/// tabulates the difference from w.
BumpModel make_grid_consistent_bump(const GroundState& gs, double spacing, double reach);

/// Reach used by the convenience overloads: the full offset range in 1D, and
/// 14 in higher dimensions.
double default_bump_reach(const Grid& grid);

/// Convenience overload building a ScalarModel with a grid-consistent bump.
CorrectionResult solve_projected(const Configuration& config, const Potential& v, double delta, const GroundState& gs,
                                 const Grid& grid, const NewtonOptions& options = {});

struct DecayStudyOptions {
  double spacing = 0.1;
  /// Distance from a spike to the box edge.
  double box_margin = 14.0;
  NewtonOptions newton;
  int jobs = 1;
  /// Factor applied to the largest observed increment ratio.
  double increment_safety = 2.0;
};

struct DecayStudyRow {
  double rho = 0.0;
  double star_norm = 0.0;
  double h1_norm = 0.0;
  double max_multiplier = 0.0;
  /// ||phi(2 spikes) - phi(1 spike)||^2_{H1} for the symmetric pair.
  double increment = 0.0;
  /// e^{-xi rho} w(rho) + delta^2 (int V^2 w^2 + (int |V| w)^2) for the same pair.
  double increment_scale = 0.0;
};

struct DecayStudy {
  std::vector<DecayStudyRow> rows;
  /// Fit ||phi||_* ~ C e^{-xi rho}.
  double xi = 0.0;
  double constant = 0.0;
  bool monotone = false;
  /// Calibrated constant of the increment bound.
  double increment_constant = 0.0;
};

/// Two spikes at +-rho/2 on the first axis for every rho; least-squares fit of
/// log ||phi||_* against -rho. Throws InvalidArgument unless rho_list is
/// increasing with at least three entries.
DecayStudy correction_decay_study(const GroundState& gs, const Potential& v, double delta,
                                  const std::vector<double>& rho_list, const DecayStudyOptions& options = {});

struct IncrementReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double interaction_term = 0.0;
  double potential_term = 0.0;
  bool pass = false;
};

/// ||phi(k+1) - phi(k)||^2_{H1} against C [e^{-xi rho} sum_i w(|Q_new - Q_i|)
/// + delta^2 (int V^2 w_new^2 + (int |V| w_new)^2)] with C, xi from the study.
IncrementReport increment_bound_check(const Configuration& config_k, const Point3& new_point, const Potential& v,
                                      double delta, const GroundState& gs, const Grid& grid,
                                      const DecayStudy& calibration, const NewtonOptions& options = {});

}  // namespace mbump
