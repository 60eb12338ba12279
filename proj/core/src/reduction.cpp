#include "mbump/reduction.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include <Eigen/Dense>

#include "mbump/error.hpp"

namespace mbump {

Eigen::VectorXd DiscreteModel::to_unknowns(const Eigen::VectorXd& state) const {
  const Grid& g = grid();
  const std::size_t n = g.size();
  const std::size_t ni = g.interior_size();
  Eigen::VectorXd x(static_cast<Eigen::Index>(unknowns()));
  for (int c = 0; c < components(); ++c)
    for (std::size_t i = 0; i < ni; ++i)
      x[static_cast<Eigen::Index>(c * ni + i)] = state[static_cast<Eigen::Index>(c * n + g.interior_node(i))];
  return x;
}

Eigen::VectorXd DiscreteModel::from_unknowns(const Eigen::VectorXd& x) const {
  const Grid& g = grid();
  const std::size_t n = g.size();
  const std::size_t ni = g.interior_size();
  Eigen::VectorXd state = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(state_size()));
  for (int c = 0; c < components(); ++c)
    for (std::size_t i = 0; i < ni; ++i)
      state[static_cast<Eigen::Index>(c * n + g.interior_node(i))] = x[static_cast<Eigen::Index>(c * ni + i)];
  return state;
}

Field DiscreteModel::component(const Eigen::VectorXd& state, int c) const {
  const Grid& g = grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  const Eigen::VectorXd seg = state.segment(c * n, n);
  return Field(g, std::vector<double>(seg.data(), seg.data() + n));
}

ScalarModel::ScalarModel(const Grid& grid, const Potential& v, double delta, const Nonlinearity& nl, BumpModel bump)
    : grid_(grid),
      v_(v),
      v_samples_(sample_potential(v, grid)),
      delta_(delta),
      nl_(nl),
      bump_(std::move(bump)),
      laplacian_(interior_laplacian(grid)) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be finite and nonnegative");
  if (bump_.dim() != grid.dim()) throw InvalidArgument("bump and grid dimensions differ");
}

Eigen::VectorXd ScalarModel::ansatz(const Configuration& config) const {
  const Field u = build_ansatz(config, bump_, grid_);
  return u.vector();
}

std::vector<Eigen::VectorXd> ScalarModel::kernels(const Configuration& config) const {
  std::vector<Eigen::VectorXd> out;
  for (const Field& z : kernel_functions(config, bump_.ground_state(), grid_)) out.emplace_back(z.vector());
  return out;
}

Eigen::VectorXd ScalarModel::residual(const Eigen::VectorXd& u) const {
  const Field uf(grid_, std::vector<double>(u.data(), u.data() + u.size()));
  Field s = apply_schrodinger_operator(uf, v_samples_, delta_);
  Eigen::VectorXd out(u.size());
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out[i] = grid_.is_boundary(k) ? 0.0 : s[k] + nl_.f(u[i]);
  }
  return out;
}

Eigen::SparseMatrix<double> ScalarModel::jacobian(const Eigen::VectorXd& u) const {
  Eigen::SparseMatrix<double> j = laplacian_;
  for (Eigen::Index i = 0; i < j.rows(); ++i) {
    const std::size_t k = grid_.interior_node(static_cast<std::size_t>(i));
    j.coeffRef(i, i) += -1.0 - delta_ * v_samples_[k] + nl_.df(u[static_cast<Eigen::Index>(k)]);
  }
  return j;
}

EnergyBreakdown ScalarModel::energy(const Eigen::VectorXd& u) const {
  CompensatedSum mass, pot, nonlin;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    const double w = grid_.quadrature_weight(k);
    const double x = u[static_cast<Eigen::Index>(k)];
    mass.add(w * x * x);
    pot.add(w * v_samples_[k] * x * x);
    nonlin.add(w * nl_.primitive(x));
  }
  const double grad = gradient_energy(grid_, std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
  EnergyBreakdown e;
  e.quadratic_part = 0.5 * (grad + mass.value());
  e.potential_part = 0.5 * delta_ * pot.value();
  e.nonlinear_part = -nonlin.value();
  CompensatedSum total;
  total.add(e.quadratic_part);
  total.add(e.potential_part);
  total.add(e.nonlinear_part);
  e.total = total.value();
  // Every summand carries a relative rounding error of a few ulp.
  const double eps = std::numeric_limits<double>::epsilon();
  e.roundoff = 4.0 * eps * (grad + mass.abs_total() + delta_ * pot.abs_total() + nonlin.abs_total());
  return e;
}

Field residual(const Field& u, const Potential& v, double delta, const Nonlinearity& nl) {
  Field s = apply_schrodinger_operator(u, sample_potential(v, u.grid()), delta);
  for (std::size_t k = 0; k < u.size(); ++k) s[k] += nl.f(u[k]);
  return s;
}

namespace {

double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::VectorXd projected_residual(const Eigen::VectorXd& r, const std::vector<Eigen::VectorXd>& z,
                                   const Eigen::VectorXd& c) {
  Eigen::VectorXd out = r;
  for (std::size_t l = 0; l < z.size(); ++l) out -= c[static_cast<Eigen::Index>(l)] * z[l];
  return out;
}

}  // namespace

CorrectionResult solve_projected(const DiscreteModel& model, const Configuration& config, const NewtonOptions& o) {
  const ConfigurationCheck check = validate_configuration(config);
  if (!check.valid) {
    std::ostringstream os;
    os << "configuration violates the separation constraint (margin " << check.margin << ")";
    throw InvalidArgument(os.str());
  }
  const Grid& g = model.grid();
  const double weight = g.cell_volume();
  const Eigen::VectorXd u0 = model.ansatz(config);
  std::vector<Eigen::VectorXd> z;
  for (const auto& full : model.kernels(config)) z.push_back(model.to_unknowns(full));
  const auto m = static_cast<Eigen::Index>(z.size());

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.unknowns()));
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd u = u0;
  Eigen::VectorXd r = model.to_unknowns(model.residual(u));
  double err = sup_norm(projected_residual(r, z, c));
  CorrectionResult out;
  out.history.push_back(err);

  int iterations = 0;
  bool extra_taken = false;
  while (true) {
    const bool converged = err <= o.tolerance;
    if (converged && extra_taken) break;
    if (iterations >= o.max_iterations) {
      if (converged) break;
      std::ostringstream os;
      os << "projected Newton did not converge in " << o.max_iterations << " iterations (residual " << err << ")";
      throw NumericalFailure(os.str(), out.history);
    }
    Eigen::VectorXd rc(m);
    for (Eigen::Index l = 0; l < m; ++l) rc[l] = -weight * phi.dot(z[static_cast<std::size_t>(l)]);
    BorderedVectors step;
    try {
      step = solve_bordered(model.jacobian(u), z, -r, rc, weight, o.bordered);
    } catch (const NumericalFailure&) {
      if (converged) break;
      throw;
    }
    const Eigen::VectorXd c_new = -step.multipliers;

    double t = 1.0;
    Eigen::VectorXd phi_t, c_t, u_t, r_t;
    double err_t = 0.0;
    for (int h = 0; h <= o.max_halvings; ++h) {
      phi_t = phi + t * step.x;
      c_t = c + t * (c_new - c);
      u_t = u0 + model.from_unknowns(phi_t);
      r_t = model.to_unknowns(model.residual(u_t));
      err_t = sup_norm(projected_residual(r_t, z, c_t));
      if (err_t < err || h == o.max_halvings || (converged && h == 0)) break;
      t *= 0.5;
    }
    if (converged) {
      extra_taken = true;
      // The extra step is kept only when it helps.
      if (!(err_t < err)) break;
    }
    if (!std::isfinite(err_t)) throw NumericalFailure("projected Newton produced non-finite values", out.history);
    phi = std::move(phi_t);
    c = std::move(c_t);
    u = std::move(u_t);
    r = std::move(r_t);
    err = err_t;
    ++iterations;
    out.history.push_back(err);
  }

  const int dim = g.dim();
  const auto k = static_cast<Eigen::Index>(config.size());
  out.multipliers = Eigen::MatrixXd::Zero(k, dim);
  for (Eigen::Index i = 0; i < k; ++i)
    for (int j = 0; j < dim; ++j) out.multipliers(i, j) = c[i * dim + j];
  out.state = u;
  const Eigen::VectorXd phi_state = model.from_unknowns(phi);
  double h1 = 0.0;
  for (int comp = 0; comp < model.components(); ++comp) {
    out.phi.push_back(model.component(phi_state, comp));
    out.star_norm = std::max(out.star_norm, weighted_norm(out.phi.back(), config, o.norm));
    h1 += h1_norm_squared(out.phi.back());
  }
  out.h1_norm = std::sqrt(h1);
  out.newton_iterations = iterations;
  out.final_residual = err;
  for (const auto& zl : z) out.orthogonality = std::max(out.orthogonality, std::abs(weight * phi.dot(zl)));
  return out;
}

BumpModel make_grid_consistent_bump(const GroundState& gs, double spacing, double reach) {
  using Key = std::tuple<int, double, double, double, double, double, double, std::size_t>;
  static std::mutex mutex;
  static std::map<Key, BumpModel> cache;
  const Nonlinearity& nl = gs.nonlinearity();
  const Key key{gs.dim(), nl.p, nl.q, nl.a, gs.center_value(), spacing, reach, gs.radial_profile().size()};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const Grid box(gs.dim(), reach, spacing);
  const ScalarModel model(box, zero_potential(), 0.0, nl, BumpModel::continuum(gs));
  Configuration single{gs.dim(), {Point3{0.0, 0.0, 0.0}}, 8.0};
  CorrectionResult res = solve_projected(model, single, NewtonOptions{});
  BumpModel bump = BumpModel::grid_consistent(gs, std::move(res.phi.front()));
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(bump)).first->second;
}

double default_bump_reach(const Grid& grid) {
  return grid.dim() == 1 ? 2.0 * grid.half_width() : 14.0;
}

CorrectionResult solve_projected(const Configuration& config, const Potential& v, double delta, const GroundState& gs,
                                 const Grid& grid, const NewtonOptions& options) {
  const ScalarModel model(grid, v, delta, gs.nonlinearity(),
                          make_grid_consistent_bump(gs, grid.spacing(), default_bump_reach(grid)));
  return solve_projected(model, config, options);
}

namespace {

struct PotentialIntegrals {
  double v2w2 = 0.0;
  double abs_vw = 0.0;
};

PotentialIntegrals potential_integrals(const Potential& v, const GroundState& gs, const Grid& grid, const Point3& q) {
  const Field vw = sample(grid, [&](const Point3& x) {
    return v.value(x, grid.dim()) * gs.value(distance(x, q, grid.dim()));
  });
  Field v2w2(grid), absvw(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    v2w2[k] = vw[k] * vw[k];
    absvw[k] = std::abs(vw[k]);
  }
  return {integrate(v2w2), integrate(absvw)};
}

double increment_h1(const CorrectionResult& big, const CorrectionResult& small) {
  double s = 0.0;
  for (std::size_t c = 0; c < big.phi.size(); ++c) {
    Field d = big.phi[c];
    for (std::size_t k = 0; k < d.size(); ++k) d[k] -= small.phi[c][k];
    s += h1_norm_squared(d);
  }
  return s;
}

}  // namespace

DecayStudy correction_decay_study(const GroundState& gs, const Potential& v, double delta,
                                  const std::vector<double>& rho_list, const DecayStudyOptions& o) {
  if (rho_list.size() < 3) throw InvalidArgument("decay study needs at least three rho values");
  for (std::size_t i = 1; i < rho_list.size(); ++i)
    if (!(rho_list[i] > rho_list[i - 1])) throw InvalidArgument("decay study rho values must increase");
  const int dim = gs.dim();
  const Grid grid(dim, 0.5 * rho_list.back() + o.box_margin, o.spacing);
  const ScalarModel model(grid, v, delta, gs.nonlinearity(),
                          make_grid_consistent_bump(gs, grid.spacing(), default_bump_reach(grid)));

  struct Raw {
    DecayStudyRow row;
    double potential_term;
  };
  const auto raw = parallel_map<Raw>(rho_list.size(), o.jobs, [&](std::size_t i) {
    const double rho = rho_list[i];
    Configuration two{dim, {Point3{-0.5 * rho, 0.0, 0.0}, Point3{0.5 * rho, 0.0, 0.0}}, rho};
    Configuration one{dim, {two.points[0]}, rho};
    const CorrectionResult r2 = solve_projected(model, two, o.newton);
    const CorrectionResult r1 = solve_projected(model, one, o.newton);
    const PotentialIntegrals pi = potential_integrals(v, gs, grid, two.points[1]);
    Raw out;
    out.row.rho = rho;
    out.row.star_norm = r2.star_norm;
    out.row.h1_norm = r2.h1_norm;
    out.row.max_multiplier = r2.multipliers.cwiseAbs().maxCoeff();
    out.row.increment = increment_h1(r2, r1);
    out.potential_term = delta * delta * (pi.v2w2 + pi.abs_vw * pi.abs_vw);
    return out;
  });

  DecayStudy study;
  const auto n = static_cast<Eigen::Index>(raw.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  study.monotone = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const DecayStudyRow& row = raw[static_cast<std::size_t>(i)].row;
    if (!(row.star_norm > 0.0)) throw NumericalFailure("decay study: correction vanished identically");
    a(i, 0) = 1.0;
    a(i, 1) = -row.rho;
    b[i] = std::log(row.star_norm);
    if (i > 0 && !(row.star_norm < raw[static_cast<std::size_t>(i - 1)].row.star_norm)) study.monotone = false;
  }
  const Eigen::Vector2d x = a.colPivHouseholderQr().solve(b);
  study.constant = std::exp(x[0]);
  study.xi = x[1];
  for (const Raw& r : raw) {
    DecayStudyRow row = r.row;
    row.increment_scale = std::exp(-study.xi * row.rho) * gs.value(row.rho) + r.potential_term;
    study.increment_constant = std::max(study.increment_constant, o.increment_safety * row.increment / row.increment_scale);
    study.rows.push_back(row);
  }
  return study;
}

IncrementReport increment_bound_check(const Configuration& config_k, const Point3& new_point, const Potential& v,
                                      double delta, const GroundState& gs, const Grid& grid,
                                      const DecayStudy& cal, const NewtonOptions& options) {
  Configuration bigger = config_k;
  bigger.points.push_back(new_point);
  if (!validate_configuration(bigger).valid)
    throw InvalidArgument("augmented configuration violates the separation constraint");
  const ScalarModel model(grid, v, delta, gs.nonlinearity(),
                          make_grid_consistent_bump(gs, grid.spacing(), default_bump_reach(grid)));
  const CorrectionResult small = solve_projected(model, config_k, options);
  const CorrectionResult big = solve_projected(model, bigger, options);
  IncrementReport rep;
  rep.lhs = increment_h1(big, small);
  double sum_w = 0.0;
  for (const Point3& q : config_k.points) sum_w += gs.value(distance(q, new_point, grid.dim()));
  rep.interaction_term = std::exp(-cal.xi * config_k.rho) * sum_w;
  const PotentialIntegrals pi = potential_integrals(v, gs, grid, new_point);
  rep.potential_term = delta * delta * (pi.v2w2 + pi.abs_vw * pi.abs_vw);
  rep.rhs = cal.increment_constant * (rep.interaction_term + rep.potential_term);
  rep.pass = rep.lhs <= rep.rhs;
  return rep;
}

}  // namespace mbump
