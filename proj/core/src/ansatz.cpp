#include "mbump/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mbump/error.hpp"

namespace mbump {

namespace {

void catmull_rom_weights(double t, double w[4]) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}

}  // namespace

double distance(const Point3& a, const Point3& b, int dim) noexcept {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

ConfigurationCheck validate_configuration(const Configuration& c) {
  ConfigurationCheck out;
  if (c.points.empty()) throw InvalidArgument("configuration must contain at least one spike");
  for (const Point3& p : c.points)
    for (int a = 0; a < c.dim; ++a)
      if (!std::isfinite(p[a])) throw InvalidArgument("configuration has non-finite coordinates");
  out.min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.points.size(); ++i)
    for (std::size_t j = i + 1; j < c.points.size(); ++j) {
      const double d = distance(c.points[i], c.points[j], c.dim);
      if (d < out.min_distance) {
        out.min_distance = d;
        out.first = static_cast<int>(i);
        out.second = static_cast<int>(j);
      }
    }
  out.margin = out.min_distance - c.rho;
  out.valid = out.margin >= 0.0;
  return out;
}

double diameter(const Configuration& c) {
  double d = 0.0;
  for (std::size_t i = 0; i < c.points.size(); ++i)
    for (std::size_t j = i + 1; j < c.points.size(); ++j) d = std::max(d, distance(c.points[i], c.points[j], c.dim));
  return d;
}

void validate_eta(const WeightedNormParams& p, double sigma, double eta_bar) {
  std::ostringstream os;
  if (!(p.eta > 0.5 && p.eta < 1.0))
    os << "eta must lie in (1/2, 1)";
  else if (!(p.eta + sigma > 1.0))
    os << "eta + sigma must exceed 1";
  else if (!((1.0 + sigma) * p.eta > 1.0))
    os << "(1 + sigma) eta must exceed 1";
  else if (!(p.eta > eta_bar))
    os << "eta must exceed eta_bar = " << eta_bar;
  if (!os.str().empty()) throw InvalidArgument(os.str());
}

BumpModel BumpModel::continuum(const GroundState& gs) {
  BumpModel b;
  b.gs_ = std::make_shared<const GroundState>(gs);
  return b;
}

BumpModel BumpModel::grid_consistent(const GroundState& gs, Field correction) {
  if (correction.grid().dim() != gs.dim()) throw InvalidArgument("bump correction has the wrong dimension");
  BumpModel b;
  b.gs_ = std::make_shared<const GroundState>(gs);
  b.correction_ = std::make_shared<const Field>(std::move(correction));
  return b;
}

double BumpModel::correction_reach() const noexcept {
  return correction_ ? correction_->grid().half_width() : 0.0;
}

double BumpModel::value(const Point3& y) const noexcept {
  const int dim = gs_->dim();
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += y[a] * y[a];
  double out = gs_->value(std::sqrt(r2));
  if (!correction_) return out;

  const Grid& g = correction_->grid();
  const int n = g.points_per_axis();
  int base[3] = {0, 0, 0};
  double wts[3][4] = {{0, 1, 0, 0}, {0, 1, 0, 0}, {0, 1, 0, 0}};
  for (int a = 0; a < dim; ++a) {
    double t = y[a] / g.spacing() + g.half_steps();
    const double rt = std::round(t);
    if (std::abs(t - rt) < 1e-9) t = rt;
    const double fl = std::floor(t);
    base[a] = static_cast<int>(fl) - 1;
    if (base[a] + 3 < 0 || base[a] > n - 1) return out;
    catmull_rom_weights(t - fl, wts[a]);
  }
  double corr = 0.0;
  const int span1 = dim > 1 ? 4 : 1;
  const int span2 = dim > 2 ? 4 : 1;
  for (int i = 0; i < 4; ++i) {
    const int ii = base[0] + i;
    if (ii < 0 || ii >= n || wts[0][i] == 0.0) continue;
    for (int j = 0; j < span1; ++j) {
      const int jj = dim > 1 ? base[1] + j : 0;
      if (jj < 0 || jj >= n || (dim > 1 && wts[1][j] == 0.0)) continue;
      for (int k = 0; k < span2; ++k) {
        const int kk = dim > 2 ? base[2] + k : 0;
        if (kk < 0 || kk >= n || (dim > 2 && wts[2][k] == 0.0)) continue;
        double w = wts[0][i];
        if (dim > 1) w *= wts[1][j];
        if (dim > 2) w *= wts[2][k];
        corr += w * (*correction_)[g.node({ii, jj, kk})];
      }
    }
  }
  return out + corr;
}

double cutoff(double r, double inner, double outer) noexcept {
  if (r <= inner) return 1.0;
  if (r >= outer) return 0.0;
  const double t = (outer - r) / (outer - inner);
  return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

void require_inside(const Configuration& c, const Grid& grid, double margin) {
  if (c.dim != grid.dim()) throw InvalidArgument("configuration and grid dimensions differ");
  const double limit = grid.half_width() - margin + 1e-9;
  for (std::size_t i = 0; i < c.points.size(); ++i)
    for (int a = 0; a < c.dim; ++a)
      if (std::abs(c.points[i][a]) > limit) {
        std::ostringstream os;
        os << "spike " << i << " lies within " << margin << " of the grid boundary";
        throw InvalidArgument(os.str());
      }
}

Field build_ansatz(const Configuration& c, const BumpModel& bump, const Grid& grid, double amplitude) {
  if (bump.dim() != grid.dim()) throw InvalidArgument("bump and grid dimensions differ");
  require_inside(c, grid);
  Field u(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point3 x = grid.point(k);
    double s = 0.0;
    for (const Point3& q : c.points) s += bump.value({x[0] - q[0], x[1] - q[1], x[2] - q[2]});
    u[k] = amplitude * s;
  }
  return u;
}

Field build_ansatz(const Configuration& c, const GroundState& gs, const Grid& grid) {
  return build_ansatz(c, BumpModel::continuum(gs), grid);
}

std::vector<Field> kernel_functions(const Configuration& c, const GroundState& gs, const Grid& grid,
                                    double amplitude) {
  require_inside(c, grid);
  if (!(c.rho > 1.0)) throw InvalidArgument("rho must exceed 1 for the kernel cutoff");
  const int dim = grid.dim();
  const double inner = 0.5 * (c.rho - 1.0);
  const double outer = 0.5 * c.rho;
  std::vector<Field> z;
  z.reserve(c.points.size() * dim);
  for (const Point3& q : c.points) {
    std::vector<Field> zi(dim, Field(grid));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Point3 x = grid.point(k);
      const double r = distance(x, q, dim);
      if (r >= outer || r == 0.0) continue;
      const double s = amplitude * gs.derivative(r) * cutoff(r, inner, outer) / r;
      for (int j = 0; j < dim; ++j) zi[j][k] = s * (x[j] - q[j]);
    }
    for (Field& f : zi) z.push_back(std::move(f));
  }
  return z;
}

Field weight_field(const Configuration& c, const Grid& grid, const WeightedNormParams& p) {
  return sample(grid, [&](const Point3& x) {
    double s = 0.0;
    for (const Point3& q : c.points) s += std::exp(-p.eta * distance(x, q, grid.dim()));
    return s;
  });
}

double weighted_norm(const Field& h, const Configuration& c, const WeightedNormParams& p) {
  const Field w = weight_field(c, h.grid(), p);
  double m = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) m = std::max(m, std::abs(h[k]) / w[k]);
  return m;
}

}  // namespace mbump
