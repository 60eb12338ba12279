#include "mbump/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mbump/error.hpp"

namespace mbump {

CouplingParams synchronized_amplitudes(double mu1, double mu2, double beta, std::optional<double> beta_star) {
  if (!(mu1 > 0.0) || !(mu2 > 0.0) || !std::isfinite(mu1) || !std::isfinite(mu2))
    throw InvalidArgument("mu1 and mu2 must be positive and finite");
  if (!std::isfinite(beta)) throw InvalidArgument("beta must be finite");
  const double det = mu1 * mu2 - beta * beta;
  if (std::abs(det) <= 1e-14 * mu1 * mu2) throw InvalidArgument("beta^2 = mu1 mu2 makes the amplitudes singular");
  CouplingParams p{mu1, mu2, beta, 0.0, 0.0, false, {}};
  const double ra = (mu2 - beta) / det;
  const double rg = (mu1 - beta) / det;
  if (!(ra > 0.0) || !(rg > 0.0)) {
    p.reason = "negative radicand: no synchronized solution for this beta";
    p.alpha = std::numeric_limits<double>::quiet_NaN();
    p.gamma = std::numeric_limits<double>::quiet_NaN();
    return p;
  }
  p.alpha = std::sqrt(ra);
  p.gamma = std::sqrt(rg);
  if (beta == 0.0) {
    p.reason = "beta = 0 decouples the system and the kernel exceeds the translations";
  } else if (beta > 0.0) {
    p.admissible = beta < std::min(mu1, mu2) || beta > std::max(mu1, mu2);
    if (!p.admissible) p.reason = "beta between min(mu1, mu2) and max(mu1, mu2)";
  } else if (!beta_star) {
    p.reason = "negative beta needs an estimate of beta_star";
  } else {
    p.admissible = -beta < *beta_star;
    if (!p.admissible) p.reason = "beta at or below -beta_star";
  }
  return p;
}

double interaction_factor(const CouplingParams& p) {
  const double a2 = p.alpha * p.alpha;
  const double g2 = p.gamma * p.gamma;
  return p.mu1 * a2 * a2 + p.mu2 * g2 * g2 + 2.0 * p.beta * a2 * g2;
}

PairField coupled_residual(const PairField& pair, const Potential& a, const Potential& b, double delta,
                           const CouplingParams& p) {
  if (!(pair.u.grid() == pair.v.grid())) throw InvalidArgument("pair components live on different grids");
  PairField out{apply_schrodinger_operator(pair.u, sample_potential(a, pair.u.grid()), delta),
                apply_schrodinger_operator(pair.v, sample_potential(b, pair.v.grid()), delta)};
  for (std::size_t k = 0; k < pair.u.size(); ++k) {
    const double u = pair.u[k];
    const double v = pair.v[k];
    out.u[k] += p.mu1 * u * u * u + p.beta * v * v * u;
    out.v[k] += p.mu2 * v * v * v + p.beta * u * u * v;
  }
  return out;
}

namespace {

void require_cubic(const GroundState& gs) {
  const Nonlinearity& nl = gs.nonlinearity();
  if (nl.p != 3.0 || nl.a != 0.0) throw InvalidArgument("the coupled system needs the cubic ground state f(u) = u^3");
}

void require_amplitudes(const CouplingParams& p) {
  if (!(p.alpha > 0.0) || !(p.gamma > 0.0)) throw InvalidArgument("coupling has no positive synchronized amplitudes");
}

}  // namespace

CoupledSpectrum coupled_spectrum(const CouplingParams& p, const GroundState& gs, int n_modes,
                                 const SpectrumOptions& o) {
  require_cubic(gs);
  require_amplitudes(p);
  if (n_modes < 1) throw InvalidArgument("spectrum: n_modes must be positive");
  const double a2 = p.alpha * p.alpha;
  const double g2 = p.gamma * p.gamma;
  const double m11 = 3.0 * p.mu1 * a2 + p.beta * g2;
  const double m22 = 3.0 * p.mu2 * g2 + p.beta * a2;
  const double m12 = 2.0 * p.beta * p.alpha * p.gamma;
  const double mean = 0.5 * (m11 + m22);
  const double radius = std::hypot(0.5 * (m11 - m22), m12);
  CoupledSpectrum rep;
  rep.m_first = mean + radius;
  rep.m_second = mean - radius;
  const int dim = gs.dim();
  const int last = dim == 1 ? 1 : o.max_sector;
  std::vector<double> all;
  for (double m : {rep.m_first, rep.m_second}) {
    const auto coefficient = [&gs, m](double r) {
      const double w = gs.value(r);
      return m * w * w;
    };
    for (int l = 0; l <= last; ++l) {
      const int mult = sector_multiplicity(dim, l);
      for (double ev : sector_eigenvalues(dim, l, coefficient, o))
        for (int k = 0; k < mult; ++k) all.push_back(ev);
    }
  }
  std::sort(all.begin(), all.end(), std::greater<>());
  for (double ev : all) {
    if (std::abs(ev) < o.kernel_tol) ++rep.kernel_dim;
    if (ev >= o.kernel_tol) ++rep.positive_count;
  }
  all.resize(std::min(all.size(), static_cast<std::size_t>(n_modes)));
  rep.eigenvalues = std::move(all);
  rep.nondegenerate = rep.kernel_dim == dim;
  return rep;
}

double estimate_beta_star(double mu1, double mu2, const GroundState& gs, int scan_points, const SpectrumOptions& o) {
  if (scan_points < 2) throw InvalidArgument("beta_star scan needs at least two points");
  const double limit = std::sqrt(mu1 * mu2);
  const auto count = [&](double s) {
    const CouplingParams p = synchronized_amplitudes(mu1, mu2, -s * limit, limit);
    if (!(p.alpha > 0.0) || !(p.gamma > 0.0)) return std::numeric_limits<int>::max();
    const CoupledSpectrum c = coupled_spectrum(p, gs, 1, o);
    return c.kernel_dim > gs.dim() ? -1 : c.positive_count;
  };
  const double s0 = 1e-3;
  const int base = count(s0);
  double lo = s0;
  double hi = -1.0;
  for (int i = 1; i <= scan_points; ++i) {
    const double s = s0 + (0.999 - s0) * i / scan_points;
    if (count(s) != base) {
      hi = s;
      break;
    }
    lo = s;
  }
  if (hi < 0.0) return limit;
  for (int it = 0; it < 40 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    (count(mid) == base ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) * limit;
}

CoupledModel::CoupledModel(const Grid& grid, const Potential& a, const Potential& b, double delta,
                           const CouplingParams& params, BumpModel bump)
    : grid_(grid),
      a_samples_(sample_potential(a, grid)),
      b_samples_(sample_potential(b, grid)),
      delta_(delta),
      params_(params),
      bump_(std::move(bump)),
      laplacian_(interior_laplacian(grid)) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be finite and nonnegative");
  require_amplitudes(params);
  require_cubic(bump_.ground_state());
  if (bump_.dim() != grid.dim()) throw InvalidArgument("bump and grid dimensions differ");
}

Eigen::VectorXd CoupledModel::ansatz(const Configuration& config) const {
  const Field w = build_ansatz(config, bump_, grid_);
  const auto n = static_cast<Eigen::Index>(grid_.size());
  Eigen::VectorXd s(2 * n);
  s.head(n) = params_.alpha * w.vector();
  s.tail(n) = params_.gamma * w.vector();
  return s;
}

std::vector<Eigen::VectorXd> CoupledModel::kernels(const Configuration& config) const {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  std::vector<Eigen::VectorXd> out;
  for (const Field& z : kernel_functions(config, bump_.ground_state(), grid_)) {
    Eigen::VectorXd s(2 * n);
    s.head(n) = params_.alpha * z.vector();
    s.tail(n) = params_.gamma * z.vector();
    out.push_back(std::move(s));
  }
  return out;
}

Eigen::VectorXd CoupledModel::residual(const Eigen::VectorXd& state) const {
  const std::size_t n = grid_.size();
  const PairField pair{component(state, 0), component(state, 1)};
  const Field su = apply_schrodinger_operator(pair.u, a_samples_, delta_);
  const Field sv = apply_schrodinger_operator(pair.v, b_samples_, delta_);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(state.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (grid_.is_boundary(k)) continue;
    const double u = pair.u[k];
    const double v = pair.v[k];
    out[static_cast<Eigen::Index>(k)] = su[k] + params_.mu1 * u * u * u + params_.beta * v * v * u;
    out[static_cast<Eigen::Index>(n + k)] = sv[k] + params_.mu2 * v * v * v + params_.beta * u * u * v;
  }
  return out;
}

Eigen::SparseMatrix<double> CoupledModel::jacobian(const Eigen::VectorXd& state) const {
  const auto ni = static_cast<Eigen::Index>(grid_.interior_size());
  const auto n = static_cast<Eigen::Index>(grid_.size());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(2 * laplacian_.nonZeros() + 4 * ni));
  for (int block = 0; block < 2; ++block)
    for (Eigen::Index col = 0; col < laplacian_.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(laplacian_, col); it; ++it)
        t.emplace_back(block * ni + it.row(), block * ni + it.col(), it.value());
  for (Eigen::Index i = 0; i < ni; ++i) {
    const auto k = static_cast<Eigen::Index>(grid_.interior_node(static_cast<std::size_t>(i)));
    const double u = state[k];
    const double v = state[n + k];
    const auto kk = static_cast<std::size_t>(k);
    t.emplace_back(i, i, -1.0 - delta_ * a_samples_[kk] + 3.0 * params_.mu1 * u * u + params_.beta * v * v);
    t.emplace_back(ni + i, ni + i, -1.0 - delta_ * b_samples_[kk] + 3.0 * params_.mu2 * v * v + params_.beta * u * u);
    t.emplace_back(i, ni + i, 2.0 * params_.beta * u * v);
    t.emplace_back(ni + i, i, 2.0 * params_.beta * u * v);
  }
  Eigen::SparseMatrix<double> j(2 * ni, 2 * ni);
  j.setFromTriplets(t.begin(), t.end());
  return j;
}

EnergyBreakdown CoupledModel::energy(const Eigen::VectorXd& state) const {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  CompensatedSum mass, pot, quartic;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    const double w = grid_.quadrature_weight(k);
    const double u = state[static_cast<Eigen::Index>(k)];
    const double v = state[n + static_cast<Eigen::Index>(k)];
    mass.add(w * (u * u + v * v));
    pot.add(w * (a_samples_[k] * u * u + b_samples_[k] * v * v));
    quartic.add(0.25 * w * (params_.mu1 * u * u * u * u + params_.mu2 * v * v * v * v + 2.0 * params_.beta * u * u * v * v));
  }
  const double grad = gradient_energy(grid_, std::span<const double>(state.data(), static_cast<std::size_t>(n))) +
                      gradient_energy(grid_, std::span<const double>(state.data() + n, static_cast<std::size_t>(n)));
  EnergyBreakdown e;
  e.quadratic_part = 0.5 * (grad + mass.value());
  e.potential_part = 0.5 * delta_ * pot.value();
  e.nonlinear_part = -quartic.value();
  CompensatedSum total;
  total.add(e.quadratic_part);
  total.add(e.potential_part);
  total.add(e.nonlinear_part);
  e.total = total.value();
  const double eps = std::numeric_limits<double>::epsilon();
  e.roundoff = 4.0 * eps * (grad + mass.abs_total() + delta_ * pot.abs_total() + quartic.abs_total());
  return e;
}

namespace {

void require_admissible(const CouplingParams& p) {
  if (!p.admissible) throw InvalidArgument("coupling parameters are not admissible: " + p.reason);
}

void require_system_hypotheses(const Potential& a, const Potential& b, double delta, const CouplingParams& p,
                               int dim) {
  if (delta <= 0.0) return;
  const double eta_bar = std::max(a.eta_bar, b.eta_bar);
  const HypothesisReport h = check_system_hypotheses(a, b, p.alpha, p.gamma, eta_bar, dim);
  if (!h.pass) throw InvalidArgument("potentials fail the weighted slow-decay hypotheses: " + h.first_violation);
}

double interior_sup(const Grid& g, const Field& f) {
  double m = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (!g.is_boundary(k)) m = std::max(m, std::abs(f[k]));
  return m;
}

}  // namespace

CoupledRun coupled_reduce_and_maximize(int k, const Potential& a, const Potential& b, double delta,
                                       const CouplingParams& params, const GroundState& gs, const Grid& grid,
                                       MaximizeOptions options) {
  require_admissible(params);
  require_cubic(gs);
  require_system_hypotheses(a, b, delta, params, gs.dim());
  options.delta = delta;
  options.eta_bar = std::max(a.eta_bar, b.eta_bar);
  const CoupledModel model(grid, a, b, delta, params,
                           make_grid_consistent_bump(gs, grid.spacing(), default_bump_reach(grid)));
  MaximizerRecord record = maximize_reduced_energy(model, k, options);
  PolishResult polished = polish_solution(model, record, options.newton);
  CoupledRun run{std::move(record), polished.report,
                 PairField{model.component(polished.state, 0), model.component(polished.state, 1)}};
  const Eigen::VectorXd r = model.residual(polished.state);
  run.residual_u = interior_sup(grid, model.component(r, 0));
  run.residual_v = interior_sup(grid, model.component(r, 1));
  for (std::size_t i = 0; i < grid.size(); ++i)
    run.symmetry_gap = std::max(run.symmetry_gap, std::abs(run.solution.u[i] - run.solution.v[i]));
  return run;
}

EnergyLedger coupled_ledger(int k_max, const Potential& a, const Potential& b, double delta,
                            const CouplingParams& params, const GroundState& gs, const Grid& grid,
                            MaximizeOptions options) {
  if (k_max < 2) throw InvalidArgument("ledger needs k_max >= 2");
  require_admissible(params);
  require_cubic(gs);
  require_system_hypotheses(a, b, delta, params, gs.dim());
  options.delta = delta;
  options.eta_bar = std::max(a.eta_bar, b.eta_bar);
  const BumpModel bump = make_grid_consistent_bump(gs, grid.spacing(), default_bump_reach(grid));
  const CoupledModel model(grid, a, b, delta, params, bump);
  const CoupledModel flat(grid, zero_potential(), zero_potential(), 0.0, params, bump);
  return build_ledger(model, flat, k_max, options);
}

std::vector<InteractionRow> coupled_interaction_study(const CouplingParams& params, const GroundState& gs,
                                                      const std::vector<double>& d_list,
                                                      const InteractionStudyOptions& o) {
  require_cubic(gs);
  require_amplitudes(params);
  if (d_list.empty() || d_list.front() < 8.0) throw InvalidArgument("interaction study needs distances >= 8");
  const int dim = gs.dim();
  const double gamma1 = interaction_constant(gs);
  const double factor = interaction_factor(params) * o.interaction_scale;
  std::vector<InteractionRow> rows;
  for (double d : d_list) {
    const Grid grid(dim, 0.5 * d + o.box_margin, o.spacing);
    const CoupledModel model(grid, zero_potential(), zero_potential(), 0.0, params, BumpModel::continuum(gs));
    const Point3 left{-0.5 * d, 0.0, 0.0};
    const Point3 right{0.5 * d, 0.0, 0.0};
    const double j2 = model.energy(model.ansatz(Configuration{dim, {left, right}, d})).total;
    const double j1 = model.energy(model.ansatz(Configuration{dim, {left}, d})).total;
    InteractionRow row;
    row.d = d;
    row.deviation = j2 - 2.0 * j1;
    row.predicted = -factor * gamma1 * gs.value(d);
    row.ratio = row.deviation / row.predicted;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mbump
