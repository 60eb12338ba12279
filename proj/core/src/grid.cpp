#include "mbump/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "mbump/error.hpp"

namespace mbump {

namespace {

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": fields live on different grids");
}

void require_finite(const Field& u, const char* what) {
  if (!u.all_finite()) throw InvalidArgument(std::string(what) + ": non-finite input");
}

}  // namespace

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    compensation_ += (sum_ - t) + x;
  else
    compensation_ += (x - t) + sum_;
  sum_ = t;
  const double a = std::abs(x);
  const double ta = abs_total_ + a;
  abs_compensation_ += abs_total_ >= a ? (abs_total_ - ta) + a : (a - ta) + abs_total_;
  abs_total_ = ta;
}

Grid::Grid(int dim, double half_width, double spacing) : dim_(dim), h_(spacing) {
  if (dim < 1 || dim > 3) throw InvalidArgument("grid dimension must be 1, 2 or 3");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw InvalidArgument("grid spacing must be positive");
  if (spacing > 0.25 + 1e-12) throw InvalidArgument("grid spacing must not exceed 0.25");
  if (!std::isfinite(half_width) || half_width < 2.0 * spacing)
    throw InvalidArgument("grid half width must be at least two cells");
  half_steps_ = static_cast<int>(std::lround(half_width / spacing));
  n_ = 2 * half_steps_ + 1;
  size_ = ipow(static_cast<std::size_t>(n_), dim_);
  interior_size_ = ipow(static_cast<std::size_t>(n_ - 2), dim_);
  cell_volume_ = std::pow(h_, dim_);
}

Index3 Grid::multi_index(std::size_t node) const noexcept {
  Index3 idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(node % n_);
    node /= n_;
  }
  return idx;
}

std::size_t Grid::node(const Index3& idx) const noexcept {
  std::size_t k = 0;
  for (int a = 0; a < dim_; ++a) k = k * n_ + static_cast<std::size_t>(idx[a]);
  return k;
}

Point3 Grid::point(std::size_t node) const noexcept {
  const Index3 idx = multi_index(node);
  Point3 p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) p[a] = coordinate(idx[a]);
  return p;
}

bool Grid::is_boundary(std::size_t node) const noexcept {
  const Index3 idx = multi_index(node);
  for (int a = 0; a < dim_; ++a)
    if (idx[a] == 0 || idx[a] == n_ - 1) return true;
  return false;
}

std::size_t Grid::interior_node(std::size_t interior_index) const noexcept {
  const int m = n_ - 2;
  Index3 idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(interior_index % m) + 1;
    interior_index /= m;
  }
  return node(idx);
}

std::size_t Grid::interior_index(std::size_t node) const noexcept {
  const Index3 idx = multi_index(node);
  const int m = n_ - 2;
  std::size_t k = 0;
  for (int a = 0; a < dim_; ++a) {
    if (idx[a] == 0 || idx[a] == n_ - 1) return size_;
    k = k * m + static_cast<std::size_t>(idx[a] - 1);
  }
  return k;
}

double Grid::quadrature_weight(std::size_t node) const noexcept {
  const Index3 idx = multi_index(node);
  double w = cell_volume_;
  for (int a = 0; a < dim_; ++a)
    if (idx[a] == 0 || idx[a] == n_ - 1) w *= 0.5;
  return w;
}

Field::Field(const Grid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw InvalidArgument("field size does not match grid");
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double Field::max_abs_on_boundary() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (grid_.is_boundary(i)) m = std::max(m, std::abs(values_[i]));
  return m;
}

Field laplacian(const Field& u) {
  require_finite(u, "laplacian");
  const Grid& g = u.grid();
  const int n = g.points_per_axis();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  Field out(g);
  std::size_t stride[3] = {1, 1, 1};
  for (int a = g.dim() - 2; a >= 0; --a) stride[a] = stride[a + 1] * n;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Index3 idx = g.multi_index(k);
    double acc = -2.0 * g.dim() * u[k];
    for (int a = 0; a < g.dim(); ++a) {
      if (idx[a] > 0) acc += u[k - stride[a]];
      if (idx[a] < n - 1) acc += u[k + stride[a]];
    }
    out[k] = acc * inv_h2;
  }
  return out;
}

Field apply_schrodinger_operator(const Field& u, const Field& potential_samples, double delta) {
  require_same_grid(u.grid(), potential_samples.grid(), "apply_schrodinger_operator");
  require_finite(potential_samples, "apply_schrodinger_operator");
  if (!std::isfinite(delta)) throw InvalidArgument("apply_schrodinger_operator: non-finite delta");
  Field out = laplacian(u);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= (1.0 + delta * potential_samples[k]) * u[k];
  return out;
}

double integrate(const Field& u) {
  require_finite(u, "integrate");
  const Grid& g = u.grid();
  CompensatedSum s;
  for (std::size_t k = 0; k < g.size(); ++k) s.add(g.quadrature_weight(k) * u[k]);
  return s.value();
}

double inner_product(const Field& u, const Field& v) {
  require_same_grid(u.grid(), v.grid(), "inner_product");
  const Grid& g = u.grid();
  CompensatedSum s;
  for (std::size_t k = 0; k < g.size(); ++k) s.add(g.quadrature_weight(k) * u[k] * v[k]);
  return s.value();
}

double gradient_energy(const Grid& g, std::span<const double> u) {
  const int n = g.points_per_axis();
  std::size_t stride[3] = {1, 1, 1};
  for (int a = g.dim() - 2; a >= 0; --a) stride[a] = stride[a + 1] * n;
  const double scale = g.cell_volume() / (g.spacing() * g.spacing());
  CompensatedSum s;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Index3 idx = g.multi_index(k);
    for (int a = 0; a < g.dim(); ++a) {
      if (idx[a] == n - 1) continue;
      const double d = u[k + stride[a]] - u[k];
      s.add(scale * d * d);
    }
  }
  return s.value();
}

double h1_norm_squared(const Field& u) {
  return gradient_energy(u.grid(), u.values()) + inner_product(u, u);
}

Eigen::SparseMatrix<double> interior_laplacian(const Grid& g) {
  const int m = g.points_per_axis() - 2;
  const auto ni = static_cast<Eigen::Index>(g.interior_size());
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  std::size_t stride[3] = {1, 1, 1};
  for (int a = g.dim() - 2; a >= 0; --a) stride[a] = stride[a + 1] * m;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(ni) * (2 * g.dim() + 1));
  for (Eigen::Index k = 0; k < ni; ++k) {
    t.emplace_back(k, k, -2.0 * g.dim() * inv_h2);
    std::size_t rest = static_cast<std::size_t>(k);
    int idx[3] = {0, 0, 0};
    for (int a = g.dim() - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rest % m);
      rest /= m;
    }
    for (int a = 0; a < g.dim(); ++a) {
      const auto s = static_cast<Eigen::Index>(stride[a]);
      if (idx[a] > 0) t.emplace_back(k, k - s, inv_h2);
      if (idx[a] < m - 1) t.emplace_back(k, k + s, inv_h2);
    }
  }
  Eigen::SparseMatrix<double> a(ni, ni);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

Eigen::VectorXd restrict_to_interior(const Grid& g, std::span<const double> full) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(g.interior_size()));
  for (std::size_t i = 0; i < g.interior_size(); ++i) out[static_cast<Eigen::Index>(i)] = full[g.interior_node(i)];
  return out;
}

Field extend_from_interior(const Grid& g, const Eigen::VectorXd& interior) {
  if (static_cast<std::size_t>(interior.size()) != g.interior_size())
    throw InvalidArgument("extend_from_interior: size mismatch");
  Field out(g);
  for (std::size_t i = 0; i < g.interior_size(); ++i) out[g.interior_node(i)] = interior[static_cast<Eigen::Index>(i)];
  return out;
}

InteriorOperator identity_operator(const Grid& g) {
  const auto ni = static_cast<Eigen::Index>(g.interior_size());
  Eigen::SparseMatrix<double> id(ni, ni);
  id.setIdentity();
  return {g, id};
}

InteriorOperator shifted_laplacian(const Grid& g, double shift) {
  Eigen::SparseMatrix<double> a = interior_laplacian(g);
  for (Eigen::Index k = 0; k < a.rows(); ++k) a.coeffRef(k, k) -= shift;
  return {g, a};
}

InteriorOperator schrodinger_linearization(const Field& coefficient) {
  const Grid& g = coefficient.grid();
  Eigen::SparseMatrix<double> a = interior_laplacian(g);
  for (Eigen::Index k = 0; k < a.rows(); ++k)
    a.coeffRef(k, k) += -1.0 + coefficient[g.interior_node(static_cast<std::size_t>(k))];
  return {g, a};
}

BorderedVectors solve_bordered(const Eigen::SparseMatrix<double>& a,
                               const std::vector<Eigen::VectorXd>& constraints,
                               const Eigen::VectorXd& rhs, const Eigen::VectorXd& rhs_constraints,
                               double weight, const BorderedOptions& options) {
  const Eigen::Index n = a.rows();
  const auto m = static_cast<Eigen::Index>(constraints.size());
  if (a.cols() != n || rhs.size() != n || rhs_constraints.size() != m)
    throw InvalidArgument("solve_bordered: dimension mismatch");
  for (const auto& c : constraints)
    if (c.size() != n) throw InvalidArgument("solve_bordered: constraint size mismatch");
  if (!rhs.allFinite() || !rhs_constraints.allFinite()) throw InvalidArgument("solve_bordered: non-finite data");

  if (m > 0) {
    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = weight * constraints[i].dot(constraints[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > options.max_gram_condition) {
      std::ostringstream os;
      os << "bordered solve: constraint Gram matrix ill-conditioned (eigenvalues " << lo << ", " << hi << ")";
      throw NumericalFailure(os.str());
    }
  }

  // Constraint rows are scaled by 1/weight so the augmented matrix is symmetric
  // whenever A is.
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = constraints[j][i];
      if (c == 0.0) continue;
      t.emplace_back(i, n + j, c);
      t.emplace_back(n + j, i, c);
    }
  Eigen::SparseMatrix<double> k(n + m, n + m);
  k.setFromTriplets(t.begin(), t.end());
  k.makeCompressed();

  Eigen::VectorXd b(n + m);
  b.head(n) = rhs;
  if (m > 0) b.tail(m) = rhs_constraints / weight;
  const double bnorm = b.norm();

  BorderedVectors out;
  if (bnorm == 0.0) {
    out.x = Eigen::VectorXd::Zero(n);
    out.multipliers = Eigen::VectorXd::Zero(m);
    return out;
  }

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(k);
  lu.factorize(k);
  if (lu.info() != Eigen::Success) throw NumericalFailure("bordered solve: augmented matrix is singular");
  Eigen::VectorXd z = lu.solve(b);
  std::vector<double> history;
  double rel = (b - k * z).norm() / bnorm;
  history.push_back(rel);
  for (int s = 0; s < options.refinement_steps && rel > 1e-3 * options.relative_tolerance; ++s) {
    const Eigen::VectorXd r = b - k * z;
    z += lu.solve(r);
    const double next = (b - k * z).norm() / bnorm;
    history.push_back(next);
    if (!(next < rel)) {
      rel = std::min(rel, next);
      break;
    }
    rel = next;
  }
  if (!z.allFinite() || !(rel <= options.relative_tolerance)) {
    std::ostringstream os;
    os << "bordered solve: relative residual " << rel << " above tolerance " << options.relative_tolerance;
    throw NumericalFailure(os.str(), history);
  }
  out.x = z.head(n);
  out.multipliers = z.tail(m);
  out.relative_residual = rel;
  return out;
}

BorderedSolution solve_bordered_system(const InteriorOperator& a, std::span<const Field> constraints,
                                       const Field& rhs, std::span<const double> rhs_constraints,
                                       const BorderedOptions& options) {
  const Grid& g = a.grid;
  require_same_grid(g, rhs.grid(), "solve_bordered_system");
  if (constraints.size() != rhs_constraints.size())
    throw InvalidArgument("solve_bordered_system: constraint count mismatch");
  std::vector<Eigen::VectorXd> cs;
  cs.reserve(constraints.size());
  for (const Field& c : constraints) {
    require_same_grid(g, c.grid(), "solve_bordered_system");
    require_finite(c, "solve_bordered_system");
    cs.push_back(restrict_to_interior(g, c.values()));
  }
  require_finite(rhs, "solve_bordered_system");
  Eigen::VectorXd rc(static_cast<Eigen::Index>(rhs_constraints.size()));
  for (std::size_t j = 0; j < rhs_constraints.size(); ++j) rc[static_cast<Eigen::Index>(j)] = rhs_constraints[j];
  BorderedVectors v = solve_bordered(a.matrix, cs, restrict_to_interior(g, rhs.values()), rc, g.cell_volume(), options);
  BorderedSolution out{extend_from_interior(g, v.x), {}, v.relative_residual};
  out.multipliers.assign(v.multipliers.data(), v.multipliers.data() + v.multipliers.size());
  return out;
}

}  // namespace mbump
