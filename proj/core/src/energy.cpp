#include "mbump/energy.hpp"

#include <cmath>
#include <limits>

#include "mbump/error.hpp"

namespace mbump {

EnergyBreakdown full_energy(const Field& u, const Potential& v, double delta, const Nonlinearity& nl) {
  if (!u.all_finite()) throw InvalidArgument("full_energy: non-finite field");
  const Grid& g = u.grid();
  CompensatedSum mass, pot, nonlin;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double w = g.quadrature_weight(k);
    mass.add(w * u[k] * u[k]);
    if (delta != 0.0) pot.add(w * v.value(g.point(k), g.dim()) * u[k] * u[k]);
    nonlin.add(w * nl.primitive(u[k]));
  }
  const double grad = gradient_energy(g, u.values());
  EnergyBreakdown e;
  e.quadratic_part = 0.5 * (grad + mass.value());
  e.potential_part = 0.5 * delta * pot.value();
  e.nonlinear_part = -nonlin.value();
  CompensatedSum total;
  total.add(e.quadratic_part);
  total.add(e.potential_part);
  total.add(e.nonlinear_part);
  e.total = total.value();
  const double eps = std::numeric_limits<double>::epsilon();
  e.roundoff = 4.0 * eps * (grad + mass.abs_total() + delta * pot.abs_total() + nonlin.abs_total());
  return e;
}

ReducedEnergy reduced_energy(const DiscreteModel& model, const Configuration& config, const NewtonOptions& options) {
  ReducedEnergy out;
  out.correction = solve_projected(model, config, options);
  out.breakdown = model.energy(out.correction.state);
  out.value = out.breakdown.total;
  return out;
}

double reduced_energy(const Configuration& config, const Potential& v, double delta, const GroundState& gs,
                      const Grid& grid, const NewtonOptions& options) {
  const ScalarModel model(grid, v, delta, gs.nonlinearity(),
                          make_grid_consistent_bump(gs, grid.spacing(), default_bump_reach(grid)));
  return reduced_energy(model, config, options).value;
}

double potential_gain(const Configuration& config, const Potential& v, double delta, const GroundState& gs) {
  if (delta == 0.0 || v.kind == PotentialKind::zero) return 0.0;
  const int dim = gs.dim();
  const double h = dim == 1 ? 0.02 : (dim == 2 ? 0.1 : 0.2);
  const double half = dim == 1 ? 25.0 : 15.0;
  const Grid local(dim, half, h);
  CompensatedSum s;
  for (const Point3& q : config.points)
    for (std::size_t k = 0; k < local.size(); ++k) {
      const Point3 y = local.point(k);
      const double w = gs.value(distance(y, Point3{0.0, 0.0, 0.0}, dim));
      s.add(local.quadrature_weight(k) * v.value({y[0] + q[0], y[1] + q[1], y[2] + q[2]}, dim) * w * w);
    }
  return 0.5 * delta * s.value();
}

double predicted_energy(const Configuration& config, const Potential& v, double delta, const GroundState& gs,
                        double bump_energy, double gamma1) {
  double interaction = 0.0;
  for (std::size_t i = 0; i < config.size(); ++i)
    for (std::size_t j = i + 1; j < config.size(); ++j)
      interaction += gs.value(distance(config.points[i], config.points[j], config.dim));
  return static_cast<double>(config.size()) * bump_energy + potential_gain(config, v, delta, gs) -
         gamma1 * interaction;
}

double predicted_energy(const Configuration& config, const Potential& v, double delta, const GroundState& gs) {
  const double gamma1 = config.size() > 1 ? interaction_constant(gs) : 0.0;
  return predicted_energy(config, v, delta, gs, gs.energy(), gamma1);
}

std::vector<InteractionRow> two_bump_interaction_study(const GroundState& gs, const std::vector<double>& d_list,
                                                       const InteractionStudyOptions& o) {
  if (d_list.empty() || d_list.front() < 8.0) throw InvalidArgument("interaction study needs distances >= 8");
  for (std::size_t i = 1; i < d_list.size(); ++i)
    if (!(d_list[i] > d_list[i - 1])) throw InvalidArgument("interaction study distances must increase");
  const int dim = gs.dim();
  const Nonlinearity& nl = gs.nonlinearity();
  const double gamma1 = interaction_constant(gs);
  const BumpModel bump = BumpModel::continuum(gs);
  std::vector<InteractionRow> rows;
  for (double d : d_list) {
    const Grid grid(dim, 0.5 * d + o.box_margin, o.spacing);
    const Point3 left{-0.5 * d, 0.0, 0.0};
    const Point3 right{0.5 * d, 0.0, 0.0};
    const Configuration pair{dim, {left, right}, d};
    const Configuration one{dim, {left}, d};
    const double j2 = full_energy(build_ansatz(pair, bump, grid), zero_potential(), 0.0, nl).total;
    const double j1 = full_energy(build_ansatz(one, bump, grid), zero_potential(), 0.0, nl).total;
    InteractionRow row;
    row.d = d;
    row.deviation = j2 - 2.0 * j1;
    row.predicted = -o.interaction_scale * gamma1 * gs.value(d);
    row.ratio = row.deviation / row.predicted;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mbump
