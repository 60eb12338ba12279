#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace mbump {

using Index3 = std::array<int, 3>;
using Point3 = std::array<double, 3>;

/// Uniform tensor grid on the box [-L, L]^dim. The origin is always a node.
///
/// Nodes are stored row-major with the last axis fastest. The outermost layer
/// of nodes is the Dirichlet boundary; every other node is an interior node.
class Grid {
 public:
  /// Throws InvalidArgument unless dim is 1..3, h is in (0, 0.25] and L >= 2h.
  Grid(int dim, double half_width, double spacing);

  int dim() const noexcept { return dim_; }
  /// Actual half width, round(L/h) * h.
  double half_width() const noexcept { return half_steps_ * h_; }
  double spacing() const noexcept { return h_; }
  int points_per_axis() const noexcept { return n_; }
  int half_steps() const noexcept { return half_steps_; }

  std::size_t size() const noexcept { return size_; }
  std::size_t interior_size() const noexcept { return interior_size_; }
  double cell_volume() const noexcept { return cell_volume_; }

  double coordinate(int i) const noexcept { return (i - half_steps_) * h_; }
  Index3 multi_index(std::size_t node) const noexcept;
  std::size_t node(const Index3& idx) const noexcept;
  Point3 point(std::size_t node) const noexcept;

  bool is_boundary(std::size_t node) const noexcept;
  /// Interior numbering: row-major over the (n-2)^dim interior block.
  std::size_t interior_node(std::size_t interior_index) const noexcept;
  /// Returns size() for boundary nodes.
  std::size_t interior_index(std::size_t node) const noexcept;

  /// Trapezoid weight of a node (h^dim times 1/2 per boundary axis).
  double quadrature_weight(std::size_t node) const noexcept;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.h_ == b.h_;
  }

 private:
  int dim_;
  double h_;
  int half_steps_;
  int n_;
  std::size_t size_;
  std::size_t interior_size_;
  double cell_volume_;
};

/// Real samples on every node of a grid.
class Field {
 public:
  explicit Field(const Grid& grid, double fill = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  Eigen::Map<const Eigen::VectorXd> vector() const noexcept {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }
  Eigen::Map<Eigen::VectorXd> vector() noexcept {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  bool all_finite() const noexcept;
  double max_abs() const noexcept;
  double max_abs_on_boundary() const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Samples fn(point) on every node.
template <class Fn>
Field sample(const Grid& grid, Fn&& fn) {
  Field out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = fn(grid.point(i));
  return out;
}

/// Second-order centered Laplacian on all nodes, zero outside the box.
Field laplacian(const Field& u);

/// Delta u - (1 + delta V) u with the same stencil. Throws on grid mismatch or
/// non-finite input.
Field apply_schrodinger_operator(const Field& u, const Field& potential_samples, double delta);

/// Trapezoid rule over the box.
double integrate(const Field& u);
/// Trapezoid-weighted L2 inner product.
double inner_product(const Field& u, const Field& v);

/// Sum over grid edges of ((u_a - u_b)/h)^2 times h^dim: the discrete Dirichlet
/// energy whose gradient is exactly minus the Laplacian stencil on interior nodes.
double gradient_energy(const Grid& grid, std::span<const double> u);

/// Discrete H1 norm squared: gradient_energy + trapezoid integral of u^2.
double h1_norm_squared(const Field& u);

/// Laplacian restricted to interior nodes (boundary values treated as data).
Eigen::SparseMatrix<double> interior_laplacian(const Grid& grid);

/// Restriction to / extension from interior nodes (extension writes zeros on
/// the boundary).
Eigen::VectorXd restrict_to_interior(const Grid& grid, std::span<const double> full);
Field extend_from_interior(const Grid& grid, const Eigen::VectorXd& interior);

/// A linear operator acting on the interior nodes of a grid.
struct InteriorOperator {
  Grid grid;
  Eigen::SparseMatrix<double> matrix;
};

InteriorOperator identity_operator(const Grid& grid);
/// Delta - shift on the interior nodes.
InteriorOperator shifted_laplacian(const Grid& grid, double shift);
/// Delta - 1 + diag(coefficient) on the interior nodes.
InteriorOperator schrodinger_linearization(const Field& coefficient);

struct BorderedOptions {
  double relative_tolerance = 1e-10;
  double max_gram_condition = 1e8;
  int refinement_steps = 3;
};

/// Solution of the saddle-point problem
///   A x + sum_j mu_j c_j = rhs,   <x, c_j> = r_j.
struct BorderedVectors {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;
  double relative_residual = 0.0;
};

/// Vector-level bordered solve. Constraint columns and rhs live on the same
/// unknowns as A; <x, c> = weight * x.dot(c). Throws NumericalFailure on an
/// ill-conditioned constraint Gram matrix, a singular augmented matrix, or a
/// residual above tolerance after refinement.
BorderedVectors solve_bordered(const Eigen::SparseMatrix<double>& a,
                               const std::vector<Eigen::VectorXd>& constraints,
                               const Eigen::VectorXd& rhs, const Eigen::VectorXd& rhs_constraints,
                               double weight, const BorderedOptions& options = {});

struct BorderedSolution {
  Field x;
  std::vector<double> multipliers;
  double relative_residual = 0.0;
};

/// Field-level bordered solve on interior nodes; x vanishes on the boundary.
BorderedSolution solve_bordered_system(const InteriorOperator& a, std::span<const Field> constraints,
                                       const Field& rhs, std::span<const double> rhs_constraints,
                                       const BorderedOptions& options = {});

/// Neumaier-compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }
  double abs_total() const noexcept { return abs_total_ + abs_compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
  double abs_total_ = 0.0;
  double abs_compensation_ = 0.0;
};

}  // namespace mbump
