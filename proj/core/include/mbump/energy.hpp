#pragma once

#include <vector>

#include "mbump/model.hpp"
#include "mbump/reduction.hpp"

namespace mbump {

/// J(u) by quadrature; the gradient term uses edge differences so that its
/// derivative is exactly minus the Laplacian stencil.
EnergyBreakdown full_energy(const Field& u, const Potential& v, double delta, const Nonlinearity& nl);

struct ReducedEnergy {
  double value = 0.0;
  EnergyBreakdown breakdown;
  CorrectionResult correction;
};

/// M(Q) = J(u_Q + phi_Q) after the projected solve.
ReducedEnergy reduced_energy(const DiscreteModel& model, const Configuration& config,
                             const NewtonOptions& options = {});
double reduced_energy(const Configuration& config, const Potential& v, double delta, const GroundState& gs,
                      const Grid& grid, const NewtonOptions& options = {});

/// (delta/2) sum_i int V w_{Q_i}^2 by quadrature on a box around each spike.
double potential_gain(const Configuration& config, const Potential& v, double delta, const GroundState& gs);

/// k I(w) + (delta/2) sum_i int V w_{Q_i}^2 - gamma_1 sum_{i<j} w(|Q_i - Q_j|).
double predicted_energy(const Configuration& config, const Potential& v, double delta, const GroundState& gs);
/// Same with precomputed I(w) and gamma_1.
double predicted_energy(const Configuration& config, const Potential& v, double delta, const GroundState& gs,
                        double bump_energy, double gamma1);

struct InteractionRow {
  double d = 0.0;
  /// J(w_{Q1} + w_{Q2}) - 2 I_h with I_h the single-bump energy on the same grid.
  double deviation = 0.0;
  /// -gamma_1 w(d).
  double predicted = 0.0;
  double ratio = 0.0;
};

struct InteractionStudyOptions {
  double spacing = 0.01;
  double box_margin = 16.0;
  /// Multiplies the predicted interaction (A for the coupled system).
  double interaction_scale = 1.0;
};

/// Energy of the uncorrected two-bump ansatz against the interaction law.
/// Throws InvalidArgument unless d_list is increasing with minimum >= 8.
std::vector<InteractionRow> two_bump_interaction_study(const GroundState& gs, const std::vector<double>& d_list,
                                                       const InteractionStudyOptions& options = {});

}  // namespace mbump
