#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mbump/ansatz.hpp"
#include "mbump/grid.hpp"

namespace mbump {

/// Terms of J(u) = 1/2 int |grad u|^2 + (1 + delta V) u^2 - int F(u).
struct EnergyBreakdown {
  double quadratic_part = 0.0;
  /// The delta-weighted term 1/2 delta int V u^2.
  double potential_part = 0.0;
  /// -int F(u).
  double nonlinear_part = 0.0;
  double total = 0.0;
  /// Rounding bound of the compensated sums (|terms| * eps).
  double roundoff = 0.0;
  std::optional<double> predicted;
  std::optional<double> prediction_error;
};

/// A discretised elliptic problem S(u) = 0 with a spike ansatz.
///
/// States are full-grid vectors holding `components()` fields back to back.
/// Unknowns of the linear algebra are the interior nodes of each component in
/// the same order; boundary nodes carry the ansatz values and never move.
class DiscreteModel {
 public:
  virtual ~DiscreteModel() = default;

  virtual const Grid& grid() const noexcept = 0;
  virtual int components() const noexcept = 0;

  virtual Eigen::VectorXd ansatz(const Configuration& config) const = 0;
  /// Approximate kernels, one per (spike, direction), i-major.
  virtual std::vector<Eigen::VectorXd> kernels(const Configuration& config) const = 0;
  /// S(u) on interior nodes, zero on boundary nodes.
  virtual Eigen::VectorXd residual(const Eigen::VectorXd& u) const = 0;
  /// dS/du restricted to the interior unknowns.
  virtual Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& u) const = 0;
  virtual EnergyBreakdown energy(const Eigen::VectorXd& u) const = 0;

  std::size_t state_size() const noexcept { return grid().size() * static_cast<std::size_t>(components()); }
  std::size_t unknowns() const noexcept { return grid().interior_size() * static_cast<std::size_t>(components()); }

  Eigen::VectorXd to_unknowns(const Eigen::VectorXd& state) const;
  /// Scatters interior unknowns into a full state with zero boundary values.
  Eigen::VectorXd from_unknowns(const Eigen::VectorXd& x) const;
  Field component(const Eigen::VectorXd& state, int c) const;
};

}  // namespace mbump
