#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mbump/energy.hpp"
#include "mbump/model.hpp"
#include "mbump/reduction.hpp"

namespace mbump {

struct MaximizeOptions {
  double rho = 10.0;
  /// Used for the default search radius and the delta = 0 flag; must match the model.
  double delta = 0.0;
  double eta = 0.75;
  double eta_bar = 0.25;
  int restarts = 4;
  std::uint64_t seed = 1;
  int jobs = 1;
  /// Defaults to search_radius_for(...) when absent.
  std::optional<double> search_radius;
  /// Previous ledger entry; the first start augments it by a far point.
  std::optional<Configuration> seed_config;
  /// Smallest pattern step; the grid spacing when absent.
  std::optional<double> min_step;
  /// Values within this distance count as ties, broken by smaller diameter.
  double tie_tolerance = 1e-12;
  NewtonOptions newton;
};

struct MaximizerRecord {
  Configuration config;
  double value = 0.0;
  /// min pairwise distance - rho (+inf for k = 1).
  double interior_margin = 0.0;
  /// search_radius - max_i |Q_i|.
  double boundary_distance = 0.0;
  double multiplier_max = 0.0;
  int restarts_used = 0;
  int restarts_failed = 0;
  int evaluations = 0;
  double search_radius = 0.0;
  /// Rounding bound of the energy evaluation at the recorded configuration.
  double roundoff = 0.0;
  /// Set for delta = 0, where the supremum is approached at infinity.
  bool supremum_not_attained = false;
};

/// Radius of the search ball: (max|Q| + |ln delta|) / (eta - eta_bar), capped
/// at half_width - 12; for delta = 0 it is min(3 rho, half_width - 12).
double search_radius_for(double max_norm, double delta, double eta, double eta_bar, double rho, const Grid& grid);

/// Multi-start coordinate pattern search of M over the configuration space,
/// with moves projected onto the separation constraint and the search ball.
/// Throws NumericalFailure when every restart fails.
MaximizerRecord maximize_reduced_energy(const DiscreteModel& model, int k, const MaximizeOptions& options);

/// Scalar convenience form; delta and eta_bar in the options are overwritten
/// from the arguments.
MaximizerRecord maximize_reduced_energy(int k, const Potential& v, double delta, const GroundState& gs,
                                        const Grid& grid, MaximizeOptions options = {});

/// Pass iff interior_margin >= 0.5 and boundary_distance >= 2.
bool interior_check(const MaximizerRecord& record, double rho);

struct MultiplierReport {
  double multiplier_max = 0.0;
  /// G(ij, sl) = <Z_ij, d(u_Q + phi)/dQ_sl>.
  Eigen::MatrixXd gram;
  bool diagonally_dominant = false;
  double min_dominance_gap = 0.0;
};

MultiplierReport multiplier_check(const DiscreteModel& model, const MaximizerRecord& record,
                                  const NewtonOptions& options = {}, double fd_step = 1e-3);

struct PolishReport {
  /// sup |S| of the bare ansatz.
  double residual_ansatz = 0.0;
  /// sup |S| of u_Q + phi.
  double residual_before = 0.0;
  /// sup |S| after polishing (all interior nodes, no projection).
  double residual = 0.0;
  double min_value = 0.0;
  int n_local_maxima = 0;
  /// Locations of the strict local maxima, per component 0.
  std::vector<Point3> maxima;
  /// Largest distance from a recorded spike to its nearest maximum.
  double max_peak_offset = 0.0;
  int newton_iterations = 0;
};

struct PolishResult {
  Eigen::VectorXd state;
  PolishReport report;
};

/// Newton on S(u) = 0 from u_Q + phi with steps kept transversal to the
/// approximate kernels. Throws NumericalFailure on divergence or when u is
/// not positive on the grid interior.
PolishResult polish_solution(const DiscreteModel& model, const MaximizerRecord& record,
                             const NewtonOptions& options = {});

/// Strict local maxima over the 3^dim neighbourhood with value above
/// threshold * max.
std::vector<Point3> local_maxima(const Field& u, double threshold = 1e-3);

/// Finite-difference gradient of M in the spike coordinates.
Eigen::VectorXd fd_gradient(const DiscreteModel& model, const Configuration& config, double step,
                            const NewtonOptions& options = {});

struct PackingReport {
  double max_sum = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// max_i sum_{j != i} w(|Q_i - Q_j|) against 6^N sum_{l >= 1} l^{N-1} w(l rho).
PackingReport packing_check(const Configuration& config, const GroundState& gs);

struct LedgerEntry {
  int k = 0;
  MaximizerRecord record;
  /// C_k - C_{k-1} - I, with C_0 = 0.
  double increment = 0.0;
  /// Estimated numerical uncertainty of the increment.
  double noise_floor = 0.0;
  bool interior = false;
};

struct EnergyLedger {
  std::vector<LedgerEntry> entries;
  /// Single-bump energy on the ledger grid.
  double bump_energy = 0.0;
  /// Spread of the single-bump energy over sub-cell shifts.
  double bump_energy_spread = 0.0;
  /// Every increment positive and above ten times its noise floor.
  bool accepted = false;
  bool supremum_not_attained = false;
  std::string failure;
};

/// C_1..C_kmax, each maximisation seeded from the previous entry. The bump
/// energy comes from a k = 1 solve of the same model with delta = 0.
EnergyLedger build_ledger(const DiscreteModel& model, const DiscreteModel& unperturbed, int k_max,
                          const MaximizeOptions& options);

/// Scalar convenience form. Throws InvalidArgument for k_max < 2 or when the
/// potential fails the hypothesis check with delta > 0.
EnergyLedger build_ledger(int k_max, const Potential& v, double delta, const GroundState& gs, const Grid& grid,
                          MaximizeOptions options = {});

}  // namespace mbump
