#include "mbump/maximize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/SparseLU>

#include "mbump/error.hpp"

namespace mbump {

namespace {

double norm(const Point3& p, int dim) { return distance(p, Point3{0.0, 0.0, 0.0}, dim); }

double max_norm(const Configuration& c) {
  double m = 0.0;
  for (const Point3& p : c.points) m = std::max(m, norm(p, c.dim));
  return m;
}

void clamp_to_ball(Configuration& c, double radius) {
  for (Point3& p : c.points) {
    const double r = norm(p, c.dim);
    if (r > radius)
      for (int a = 0; a < c.dim; ++a) p[a] *= radius / r;
  }
}

// Pushes violating pairs apart to rho + 0.1 about their midpoint and keeps all
// points in the search ball.
std::optional<Configuration> project(Configuration c, double radius) {
  clamp_to_ball(c, radius);
  for (int pass = 0; pass < 100; ++pass) {
    bool clean = true;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        Point3& a = c.points[i];
        Point3& b = c.points[j];
        const double d = distance(a, b, c.dim);
        if (d >= c.rho) continue;
        clean = false;
        Point3 dir{1.0, 0.0, 0.0};
        if (d > 0.0)
          for (int k = 0; k < c.dim; ++k) dir[k] = (b[k] - a[k]) / d;
        const double half = 0.5 * (c.rho + 0.1);
        for (int k = 0; k < c.dim; ++k) {
          const double mid = 0.5 * (a[k] + b[k]);
          a[k] = mid - half * dir[k];
          b[k] = mid + half * dir[k];
        }
      }
    clamp_to_ball(c, radius);
    if (clean) return c;
  }
  if (validate_configuration(c).valid) return c;
  return std::nullopt;
}

struct Evaluation {
  bool ok = false;
  double value = -std::numeric_limits<double>::infinity();
  double roundoff = 0.0;
  double multiplier_max = 0.0;
};

Evaluation evaluate(const DiscreteModel& model, const Configuration& c, const NewtonOptions& o) {
  Evaluation e;
  try {
    const ReducedEnergy r = reduced_energy(model, c, o);
    e.ok = true;
    e.value = r.value;
    e.roundoff = r.breakdown.roundoff;
    e.multiplier_max = r.correction.multipliers.size() ? r.correction.multipliers.cwiseAbs().maxCoeff() : 0.0;
  } catch (const NumericalFailure&) {
  }
  return e;
}

struct SearchResult {
  Configuration config;
  Evaluation eval;
  int evaluations = 0;
};

SearchResult pattern_search(const DiscreteModel& model, Configuration start, double radius, double min_step,
                            const NewtonOptions& o) {
  SearchResult best{start, evaluate(model, start, o), 1};
  if (!best.eval.ok) return best;
  double step = 0.25 * start.rho;
  while (step >= min_step) {
    bool improved = false;
    for (std::size_t i = 0; i < best.config.size(); ++i)
      for (int a = 0; a < start.dim; ++a)
        for (double sign : {1.0, -1.0}) {
          Configuration trial = best.config;
          trial.points[i][a] += sign * step;
          const auto projected = project(trial, radius);
          if (!projected) continue;
          const Evaluation e = evaluate(model, *projected, o);
          ++best.evaluations;
          const double noise = e.roundoff + best.eval.roundoff;
          if (e.ok && e.value > best.eval.value + noise) {
            best.config = *projected;
            best.eval = e;
            improved = true;
            break;
          }
        }
    if (!improved) step *= 0.5;
  }
  return best;
}

std::optional<Configuration> random_start(int k, int dim, double rho, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Configuration c{dim, {}, rho};
  for (int tries = 0; tries < 10000 && static_cast<int>(c.size()) < k; ++tries) {
    Point3 p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) p[a] = u(rng);
    if (norm(p, dim) > radius) continue;
    bool ok = true;
    for (const Point3& q : c.points) ok = ok && distance(p, q, dim) >= rho + 0.1;
    if (ok) c.points.push_back(p);
  }
  if (static_cast<int>(c.size()) < k) return std::nullopt;
  return c;
}

Configuration augmented_start(const Configuration& seed, int k, double rho, double radius, double far) {
  Configuration c = seed;
  c.rho = rho;
  Point3 centroid{0.0, 0.0, 0.0};
  for (const Point3& p : seed.points)
    for (int a = 0; a < seed.dim; ++a) centroid[a] += p[a] / static_cast<double>(seed.size());
  Point3 dir{centroid[0] > 0.0 ? -1.0 : 1.0, 0.0, 0.0};
  while (static_cast<int>(c.size()) < k) {
    const double r = std::min(radius, std::max(far, max_norm(c) + rho + 0.1));
    c.points.push_back(Point3{r * dir[0], 0.0, 0.0});
    dir[0] = -dir[0];
  }
  return c;
}

}  // namespace

double search_radius_for(double max_norm_seed, double delta, double eta, double eta_bar, double rho,
                         const Grid& grid) {
  const double cap = grid.half_width() - 12.0;
  if (!(cap > 0.0)) throw InvalidArgument("grid too small for a search ball (half width must exceed 12)");
  if (delta <= 0.0) return std::min(3.0 * rho, cap);
  if (!(eta > eta_bar)) throw InvalidArgument("eta must exceed eta_bar for the search radius");
  return std::min((max_norm_seed + std::abs(std::log(delta))) / (eta - eta_bar), cap);
}

MaximizerRecord maximize_reduced_energy(const DiscreteModel& model, int k, const MaximizeOptions& o) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  const Grid& grid = model.grid();
  const int dim = grid.dim();
  const double seed_norm = o.seed_config ? max_norm(*o.seed_config) : 0.0;
  const double radius =
      o.search_radius ? *o.search_radius : search_radius_for(seed_norm, o.delta, o.eta, o.eta_bar, o.rho, grid);
  if (!(radius > 0.0) || radius > grid.half_width() - 10.0)
    throw InvalidArgument("search radius must be positive and keep spikes 10 away from the grid boundary");
  const double min_step = o.min_step ? *o.min_step : grid.spacing();

  std::vector<Configuration> starts;
  if (o.seed_config && static_cast<int>(o.seed_config->size()) <= k && o.seed_config->dim == dim) {
    const double far = o.delta > 0.0 && o.eta > o.eta_bar
                           ? (seed_norm + std::abs(std::log(o.delta))) / (o.eta - o.eta_bar)
                           : radius;
    if (auto p = project(augmented_start(*o.seed_config, k, o.rho, radius, far), radius)) starts.push_back(*p);
  }
  std::mt19937_64 rng(o.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(k));
  int failed = 0;
  while (static_cast<int>(starts.size()) < std::max(1, o.restarts)) {
    auto c = random_start(k, dim, o.rho, radius, rng);
    if (!c) {
      ++failed;
      if (failed > 10 * std::max(1, o.restarts)) break;
      continue;
    }
    starts.push_back(*c);
  }
  if (starts.empty()) throw NumericalFailure("maximize: no feasible start configuration in the search ball");

  const auto results = parallel_map<SearchResult>(starts.size(), o.jobs, [&](std::size_t i) {
    return pattern_search(model, starts[i], radius, min_step, o.newton);
  });

  const SearchResult* best = nullptr;
  int evaluations = 0;
  int restart_failures = 0;
  for (const SearchResult& r : results) {
    evaluations += r.evaluations;
    if (!r.eval.ok) {
      ++restart_failures;
      continue;
    }
    if (!best || r.eval.value > best->eval.value + o.tie_tolerance ||
        (std::abs(r.eval.value - best->eval.value) <= o.tie_tolerance && diameter(r.config) < diameter(best->config)))
      best = &r;
  }
  if (!best) throw NumericalFailure("maximize: every restart failed to evaluate the reduced energy");

  MaximizerRecord rec;
  rec.config = best->config;
  rec.value = best->eval.value;
  rec.roundoff = best->eval.roundoff;
  rec.multiplier_max = best->eval.multiplier_max;
  rec.interior_margin = validate_configuration(rec.config).margin;
  rec.search_radius = radius;
  rec.boundary_distance = radius - max_norm(rec.config);
  rec.restarts_used = static_cast<int>(results.size());
  rec.restarts_failed = restart_failures;
  rec.evaluations = evaluations;
  rec.supremum_not_attained = o.delta <= 0.0 && k > 1;
  return rec;
}

MaximizerRecord maximize_reduced_energy(int k, const Potential& v, double delta, const GroundState& gs,
                                        const Grid& grid, MaximizeOptions options) {
  options.delta = delta;
  options.eta_bar = v.eta_bar;
  const ScalarModel model(grid, v, delta, gs.nonlinearity(),
                          make_grid_consistent_bump(gs, grid.spacing(), default_bump_reach(grid)));
  return maximize_reduced_energy(model, k, options);
}

bool interior_check(const MaximizerRecord& record, double rho) {
  const ConfigurationCheck c = validate_configuration(Configuration{record.config.dim, record.config.points, rho});
  return c.margin >= 0.5 && record.boundary_distance >= 2.0;
}

MultiplierReport multiplier_check(const DiscreteModel& model, const MaximizerRecord& record,
                                  const NewtonOptions& options, double fd_step) {
  const Configuration& c = record.config;
  const CorrectionResult base = solve_projected(model, c, options);
  MultiplierReport rep;
  rep.multiplier_max = base.multipliers.cwiseAbs().maxCoeff();
  const std::vector<Eigen::VectorXd> z = model.kernels(c);
  const auto n = static_cast<Eigen::Index>(z.size());
  const double weight = model.grid().cell_volume();
  rep.gram = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    const auto s = static_cast<std::size_t>(col) / static_cast<std::size_t>(c.dim);
    const int l = static_cast<int>(col % c.dim);
    Configuration plus = c, minus = c;
    plus.points[s][l] += fd_step;
    minus.points[s][l] -= fd_step;
    const Eigen::VectorXd du =
        (solve_projected(model, plus, options).state - solve_projected(model, minus, options).state) / (2 * fd_step);
    for (Eigen::Index row = 0; row < n; ++row) rep.gram(row, col) = weight * z[static_cast<std::size_t>(row)].dot(du);
  }
  rep.diagonally_dominant = true;
  rep.min_dominance_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < n; ++r) {
    const double off = rep.gram.row(r).cwiseAbs().sum() - std::abs(rep.gram(r, r));
    const double gap = std::abs(rep.gram(r, r)) - off;
    rep.min_dominance_gap = std::min(rep.min_dominance_gap, gap);
    if (gap < 0.0) rep.diagonally_dominant = false;
  }
  return rep;
}

std::vector<Point3> local_maxima(const Field& u, double threshold) {
  const Grid& g = u.grid();
  const int n = g.points_per_axis();
  const double cut = threshold * u.max_abs();
  std::vector<Point3> out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_boundary(k) || u[k] <= cut) continue;
    const Index3 idx = g.multi_index(k);
    bool strict = true;
    const int span1 = g.dim() > 1 ? 1 : 0;
    const int span2 = g.dim() > 2 ? 1 : 0;
    for (int a = -1; a <= 1 && strict; ++a)
      for (int b = -span1; b <= span1 && strict; ++b)
        for (int c = -span2; c <= span2 && strict; ++c) {
          if (a == 0 && b == 0 && c == 0) continue;
          const Index3 j{idx[0] + a, idx[1] + b, idx[2] + c};
          if (j[0] < 0 || j[0] >= n || j[1] < 0 || j[1] >= n || j[2] < 0 || j[2] >= n) continue;
          if (!(u[k] > u[g.node(j)])) strict = false;
        }
    if (strict) out.push_back(g.point(k));
  }
  return out;
}

PolishResult polish_solution(const DiscreteModel& model, const MaximizerRecord& record, const NewtonOptions& o) {
  const Configuration& c = record.config;
  const Grid& g = model.grid();
  const double weight = g.cell_volume();
  const CorrectionResult base = solve_projected(model, c, o);
  PolishResult out;
  out.report.residual_ansatz = model.to_unknowns(model.residual(model.ansatz(c))).cwiseAbs().maxCoeff();
  std::vector<Eigen::VectorXd> z;
  for (const auto& full : model.kernels(c)) z.push_back(model.to_unknowns(full));

  Eigen::VectorXd u = base.state;
  Eigen::VectorXd r = model.to_unknowns(model.residual(u));
  double err = r.cwiseAbs().maxCoeff();
  out.report.residual_before = err;
  std::vector<double> history{err};
  int it = 0;
  bool extra = false;
  for (; it < o.max_iterations; ++it) {
    if (err <= o.tolerance && extra) break;
    if (err <= o.tolerance) extra = true;
    const Eigen::SparseMatrix<double> jac = model.jacobian(u);
    Eigen::VectorXd step;
    try {
      step = solve_bordered(jac, z, -r, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(z.size())), weight,
                            o.bordered)
                 .x;
    } catch (const NumericalFailure&) {
      if (err <= o.tolerance) break;
      throw;
    }
    double t = 1.0;
    Eigen::VectorXd u_t, r_t;
    double err_t = 0.0;
    for (int h = 0; h <= o.max_halvings; ++h) {
      u_t = u + model.from_unknowns(t * step);
      r_t = model.to_unknowns(model.residual(u_t));
      err_t = r_t.cwiseAbs().maxCoeff();
      if (err_t < err) break;
      t *= 0.5;
    }
    if (!(err_t < err)) {
      // The transversal step stalls on the kernel component of the residual;
      // try one plain Newton step before giving up.
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
      if (lu.info() == Eigen::Success) {
        const Eigen::VectorXd plain = lu.solve(-r);
        u_t = u + model.from_unknowns(plain);
        r_t = model.to_unknowns(model.residual(u_t));
        err_t = r_t.cwiseAbs().maxCoeff();
      }
      if (!(err_t < err)) break;
    }
    u = std::move(u_t);
    r = std::move(r_t);
    err = err_t;
    history.push_back(err);
  }
  out.report.newton_iterations = it;
  out.report.residual = err;
  if (!(err <= o.tolerance)) {
    std::ostringstream os;
    os << "polish: Newton stalled at residual " << err;
    throw NumericalFailure(os.str(), history);
  }

  double min_value = std::numeric_limits<double>::infinity();
  for (int comp = 0; comp < model.components(); ++comp) {
    const Field f = model.component(u, comp);
    for (std::size_t k = 0; k < g.size(); ++k) min_value = std::min(min_value, f[k]);
  }
  out.report.min_value = min_value;
  if (!(min_value > 0.0)) {
    std::ostringstream os;
    os << "polish: solution is not positive (min " << min_value << ")";
    throw NumericalFailure(os.str(), history);
  }
  const Field first = model.component(u, 0);
  out.report.maxima = local_maxima(first);
  out.report.n_local_maxima = static_cast<int>(out.report.maxima.size());
  for (const Point3& q : c.points) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const Point3& m : out.report.maxima) nearest = std::min(nearest, distance(q, m, c.dim));
    out.report.max_peak_offset = std::max(out.report.max_peak_offset, nearest);
  }
  out.state = std::move(u);
  return out;
}

Eigen::VectorXd fd_gradient(const DiscreteModel& model, const Configuration& config, double step,
                            const NewtonOptions& options) {
  Eigen::VectorXd grad(static_cast<Eigen::Index>(config.size()) * config.dim);
  for (std::size_t i = 0; i < config.size(); ++i)
    for (int a = 0; a < config.dim; ++a) {
      Configuration plus = config, minus = config;
      plus.points[i][a] += step;
      minus.points[i][a] -= step;
      grad[static_cast<Eigen::Index>(i) * config.dim + a] =
          (reduced_energy(model, plus, options).value - reduced_energy(model, minus, options).value) / (2 * step);
    }
  return grad;
}

PackingReport packing_check(const Configuration& c, const GroundState& gs) {
  PackingReport rep;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (j != i) s += gs.value(distance(c.points[i], c.points[j], c.dim));
    rep.max_sum = std::max(rep.max_sum, s);
  }
  const double cn = std::pow(6.0, c.dim);
  for (int l = 1; l <= 200; ++l) rep.bound += cn * std::pow(l, c.dim - 1) * gs.value(l * c.rho);
  rep.pass = rep.max_sum <= rep.bound;
  return rep;
}

EnergyLedger build_ledger(const DiscreteModel& model, const DiscreteModel& unperturbed, int k_max,
                          const MaximizeOptions& o) {
  if (k_max < 2) throw InvalidArgument("ledger needs k_max >= 2");
  const Grid& g = model.grid();
  EnergyLedger ledger;

  // Single-bump energy and its variation over sub-cell placements.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double bump_roundoff = 0.0;
  for (int s = 0; s < 4; ++s) {
    Configuration one{g.dim(), {Point3{0.25 * s * g.spacing(), 0.0, 0.0}}, o.rho};
    const ReducedEnergy e = reduced_energy(unperturbed, one, o.newton);
    if (s == 0) {
      ledger.bump_energy = e.value;
      bump_roundoff = e.breakdown.roundoff;
    }
    lo = std::min(lo, e.value);
    hi = std::max(hi, e.value);
  }
  ledger.bump_energy_spread = hi - lo;

  MaximizeOptions opts = o;
  double previous = 0.0;
  double previous_roundoff = 0.0;
  ledger.accepted = true;
  for (int k = 1; k <= k_max; ++k) {
    LedgerEntry entry;
    entry.k = k;
    entry.record = maximize_reduced_energy(model, k, opts);
    entry.increment = entry.record.value - previous - ledger.bump_energy;
    entry.noise_floor = entry.record.roundoff + previous_roundoff + bump_roundoff + ledger.bump_energy_spread;
    entry.interior = interior_check(entry.record, o.rho);
    if (ledger.accepted && !(entry.increment > 10.0 * entry.noise_floor)) {
      ledger.accepted = false;
      std::ostringstream os;
      os << "increment at k = " << k << " is " << entry.increment << " against noise floor " << entry.noise_floor;
      ledger.failure = os.str();
    }
    previous = entry.record.value;
    previous_roundoff = entry.record.roundoff;
    opts.seed_config = entry.record.config;
    opts.search_radius.reset();
    if (o.search_radius) opts.search_radius = o.search_radius;
    ledger.supremum_not_attained = ledger.supremum_not_attained || entry.record.supremum_not_attained;
    ledger.entries.push_back(std::move(entry));
  }
  return ledger;
}

EnergyLedger build_ledger(int k_max, const Potential& v, double delta, const GroundState& gs, const Grid& grid,
                          MaximizeOptions options) {
  if (k_max < 2) throw InvalidArgument("ledger needs k_max >= 2");
  if (delta > 0.0) {
    const HypothesisReport h = check_hypotheses(v, v.eta_bar, gs.dim());
    if (!h.pass) throw InvalidArgument("potential fails the slow-decay hypotheses: " + h.first_violation);
  }
  options.delta = delta;
  options.eta_bar = v.eta_bar;
  const BumpModel bump = make_grid_consistent_bump(gs, grid.spacing(), default_bump_reach(grid));
  const ScalarModel model(grid, v, delta, gs.nonlinearity(), bump);
  const ScalarModel flat(grid, zero_potential(), 0.0, gs.nonlinearity(), bump);
  return build_ledger(model, flat, k_max, options);
}

}  // namespace mbump
