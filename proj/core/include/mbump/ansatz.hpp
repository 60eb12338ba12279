#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mbump/grid.hpp"
#include "mbump/profile.hpp"

namespace mbump {

/// k spike centres with separation parameter rho.
struct Configuration {
  int dim = 1;
  std::vector<Point3> points;
  double rho = 10.0;

  std::size_t size() const noexcept { return points.size(); }
};

struct ConfigurationCheck {
  bool valid = false;
  double min_distance = 0.0;
  /// min_distance - rho; +infinity for a single spike.
  double margin = 0.0;
  int first = -1;
  int second = -1;
};

double distance(const Point3& a, const Point3& b, int dim) noexcept;

/// Membership in the configuration space: pairwise distances at least rho.
ConfigurationCheck validate_configuration(const Configuration& config);

/// Largest pairwise distance.
double diameter(const Configuration& config);

/// Exponent of the weighted norm W = sum_i exp(-eta |x - Q_i|).
struct WeightedNormParams {
  double eta = 0.75;
};

/// Throws InvalidArgument unless eta > 1/2, eta + sigma > 1, (1 + sigma) eta > 1
/// and eta > eta_bar.
void validate_eta(const WeightedNormParams& params, double holder_sigma, double eta_bar);

/// The radial bump used to build ansatz fields. The continuum model is the
/// ground state itself. The grid-consistent model adds a tabulated correction
/// d_h that makes a single bump an exact solution of the discrete equation on
/// grids with the same spacing; it is interpolated with Catmull-Rom splines for
/// off-node centres.
class BumpModel {
 public:
  static BumpModel continuum(const GroundState& gs);
  static BumpModel grid_consistent(const GroundState& gs, Field correction);

  const GroundState& ground_state() const noexcept { return *gs_; }
  bool has_correction() const noexcept { return static_cast<bool>(correction_); }
  const Field* correction() const noexcept { return correction_.get(); }
  int dim() const noexcept { return gs_->dim(); }

  /// Bump value at offset y = x - Q.
  double value(const Point3& y) const noexcept;
  /// Largest |y| at which the correction table is available.
  double correction_reach() const noexcept;

 private:
  std::shared_ptr<const GroundState> gs_;
  std::shared_ptr<const Field> correction_;
};

/// C^2 cutoff equal to 1 on [0, inner] and 0 on [outer, inf).
double cutoff(double r, double inner, double outer) noexcept;

/// Sum of translated bumps, scaled by amplitude. Throws InvalidArgument when a
/// spike lies within 10 of the box edge or the dimensions disagree.
Field build_ansatz(const Configuration& config, const BumpModel& bump, const Grid& grid, double amplitude = 1.0);
Field build_ansatz(const Configuration& config, const GroundState& gs, const Grid& grid);

/// Z_ij = d/dx_j w(x - Q_i) * chi(|x - Q_i|) with chi = 1 inside (rho-1)/2 and
/// 0 outside rho/2; ordered i-major (index i * dim + j).
std::vector<Field> kernel_functions(const Configuration& config, const GroundState& gs, const Grid& grid,
                                    double amplitude = 1.0);

/// W(x) = sum_i exp(-eta |x - Q_i|) on every node.
Field weight_field(const Configuration& config, const Grid& grid, const WeightedNormParams& params);

/// sup over nodes of |h| / W.
double weighted_norm(const Field& h, const Configuration& config, const WeightedNormParams& params);

/// Throws InvalidArgument if some spike is closer than margin to the box edge.
void require_inside(const Configuration& config, const Grid& grid, double margin = 10.0);

}  // namespace mbump
