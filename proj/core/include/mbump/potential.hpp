#pragma once

#include <string>
#include <vector>

#include "mbump/grid.hpp"

namespace mbump {

enum class PotentialKind { algebraic, sub_exponential, signed_compact_negative, zero };

/// Preset slowly decaying potentials.
///
///   algebraic:               amplitude * (1 + |x|^2)^(-m/2)
///   sub_exponential:         amplitude * exp(-rate |x|)
///   signed_compact_negative: algebraic minus depth * (1 - |x|^2/radius^2)^3 on |x| < radius
///   zero:                    0
struct Potential {
  PotentialKind kind = PotentialKind::zero;
  double amplitude = 1.0;
  double m = 2.0;
  double rate = 0.3;
  double depth = 2.0;
  double radius = 3.0;
  /// Exponent certifying the slow decay: V e^{eta_bar |x|} grows without bound.
  double eta_bar = 0.5;

  double value(const Point3& x, int dim) const noexcept;
  std::string describe() const;
};

Potential algebraic_potential(double m = 2.0, double amplitude = 1.0, double eta_bar = 0.25);
Potential sub_exponential_potential(double rate = 0.3, double amplitude = 1.0, double eta_bar = 0.5);
Potential signed_compact_negative_potential(double m = 2.0, double amplitude = 1.0, double depth = 2.0,
                                            double radius = 3.0, double eta_bar = 0.25);
Potential zero_potential();

/// Parses `kind` or `kind:key=value,...` with keys m, amplitude, rate, depth,
/// radius, eta_bar. Throws InvalidArgument on unknown kinds or keys.
Potential parse_potential(const std::string& spec);

std::string to_string(PotentialKind kind);

/// Potential sampled on every grid node.
Field sample_potential(const Potential& v, const Grid& grid);

struct HypothesisReport {
  /// V tends to zero along every sampled ray.
  bool decay_to_zero = false;
  /// V e^{eta_bar |x|} is positive and increasing beyond the onset radius on every ray.
  bool slow_decay = false;
  /// V >= 0 beyond the onset radius on every ray.
  bool nonnegative_far = false;
  bool pass = false;
  /// Smallest radius beyond which V e^{eta_bar |x|} was observed increasing on every ray.
  double growth_onset = 0.0;
  /// Largest sampled radius at which V was negative (0 when never negative).
  double switch_radius = 0.0;
  std::string first_violation;
  std::vector<std::string> warnings;
};

struct HypothesisOptions {
  double max_radius = 50.0;
  double onset_radius = 10.0;
  double sample_step = 0.25;
};

/// Samples V along coordinate rays and diagonals. Passes when V -> 0 and
/// V e^{eta_bar |x|} increases strictly beyond the onset radius.
HypothesisReport check_hypotheses(const Potential& v, double eta_bar, int dim, const HypothesisOptions& options = {});

/// The coupled version: the slow-decay test runs on alpha^2 a + gamma^2 b and
/// both a and b must be nonnegative beyond the onset radius.
HypothesisReport check_system_hypotheses(const Potential& a, const Potential& b, double alpha, double gamma,
                                         double eta_bar, int dim, const HypothesisOptions& options = {});

/// Appends a warning when delta >= e^{-2 rho}, outside the regime where the
/// correction estimates are proven.
void warn_delta_regime(HypothesisReport& report, double delta, double rho);

}  // namespace mbump
