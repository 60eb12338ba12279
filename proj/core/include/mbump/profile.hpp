#pragma once

#include <functional>
#include <vector>

namespace mbump {

/// f(t) = t^p - a t^q for t >= 0 and 0 for t <= 0.
struct Nonlinearity {
  double p = 3.0;
  double q = 2.0;
  double a = 0.0;
  /// Holder exponent of f'; min(1, p-1, q-1 when a > 0).
  double holder_sigma = 1.0;

  double f(double t) const noexcept;
  double df(double t) const noexcept;
  /// Primitive F with F(0) = 0.
  double primitive(double t) const noexcept;
};

/// Validates the parameters for the given dimension and fills holder_sigma.
/// Throws InvalidArgument when p <= 1, a < 0, q outside (1, p) with a > 0, or
/// p is not subcritical for dim >= 3.
Nonlinearity make_nonlinearity(double p, double q, double a, int dim);

/// A sampled radial function on r_i = i * step.
struct RadialSamples {
  double step = 0.0;
  std::vector<double> values;
};

struct SpectrumOptions {
  double radial_step = 0.005;
  double radius = 25.0;
  int max_sector = 3;
  double kernel_tol = 1e-4;
  /// Eigenvalues at or below -1 + margin belong to the essential spectrum.
  double essential_margin = 0.05;
};

struct SpectrumReport {
  /// Discrete eigenvalues above -1 + margin, descending, repeated by multiplicity.
  std::vector<double> eigenvalues;
  /// Sector of each eigenvalue.
  std::vector<int> sectors;
  int kernel_dim = 0;
  /// Count of eigenvalues above kernel_tol.
  int positive_count = 0;
  double lambda1 = 0.0;
  /// Positive eigenfunction of lambda1 on the cell centres r = (i + 1/2) * step,
  /// normalised to max 1.
  RadialSamples phi0;
};

/// Radial ground state of w'' + (N-1)/r w' - w + f(w) = 0 with its derived data.
class GroundState {
 public:
  const Nonlinearity& nonlinearity() const noexcept { return nl_; }
  int dim() const noexcept { return dim_; }
  double step() const noexcept { return step_; }
  /// Radius up to which the shooting table is used; beyond it the exact linear
  /// tail is matched.
  double resolved_radius() const noexcept { return step_ * static_cast<double>(w_.size() - 1); }
  const std::vector<double>& radial_profile() const noexcept { return w_; }
  const std::vector<double>& radial_derivative() const noexcept { return dw_; }

  double center_value() const noexcept { return w_.front(); }
  double energy() const noexcept { return energy_; }
  double lambda1() const noexcept { return spectrum_.lambda1; }
  int kernel_dim() const noexcept { return spectrum_.kernel_dim; }
  const RadialSamples& phi0_profile() const noexcept { return spectrum_.phi0; }
  const SpectrumReport& spectrum() const noexcept { return spectrum_; }
  double decay_amplitude() const noexcept { return decay_amplitude_; }
  double decay_rate() const noexcept { return decay_rate_; }
  /// Max ODE residual over the resolved range, relative to w(0).
  double ode_residual() const noexcept { return ode_residual_; }

  /// w(r) for r >= 0, Hermite-cubic between table nodes.
  double value(double r) const noexcept;
  /// w'(r) for r >= 0.
  double derivative(double r) const noexcept;

 private:
  friend GroundState compute_ground_state(const Nonlinearity&, int, double);

  double tail_kernel(double r) const noexcept;
  double tail_kernel_derivative(double r) const noexcept;

  Nonlinearity nl_;
  int dim_ = 1;
  double step_ = 1e-3;
  std::vector<double> w_;
  std::vector<double> dw_;
  double tail_scale_ = 0.0;
  double energy_ = 0.0;
  SpectrumReport spectrum_;
  double decay_amplitude_ = 0.0;
  double decay_rate_ = 0.0;
  double ode_residual_ = 0.0;
};

/// Shooting on w(0) with bisection, then energy, spectrum and decay fit.
/// Throws InvalidArgument for dim outside 1..3 or tol < 1e-12, and
/// NumericalFailure when no bracket exists, the profile is not positive and
/// decreasing, or the ODE residual exceeds tol * max w.
GroundState compute_ground_state(const Nonlinearity& nl, int dim, double tol = 1e-9);

/// Discrete spectrum of Delta - 1 + f'(w) by angular sector.
SpectrumReport linearized_spectrum(const GroundState& gs, int n_modes, const SpectrumOptions& options = {});

/// Eigenvalues above -1 + margin of d^2/dr^2 + (N-1)/r d/dr - l(l+N-2)/r^2 - 1 + c(r)
/// on sector l (in 1D, sector 0 is the even and sector 1 the odd part).
std::vector<double> sector_eigenvalues(int dim, int sector, const std::function<double(double)>& coefficient,
                                       const SpectrumOptions& options);

/// Multiplicity of a sector in the given dimension.
int sector_multiplicity(int dim, int sector) noexcept;

/// I(w) = 1/2 int |w'|^2 + w^2 - int F(w), by radial Simpson quadrature.
double bump_energy(const GroundState& gs);

/// Integral of f(w(|y|)) e^{-y_1} over R^N by grid quadrature.
double interaction_constant(const GroundState& gs);

struct DecayFit {
  double amplitude = 0.0;
  double rate = 0.0;
  double residual = 0.0;
};

/// Least-squares fit of log w + (N-1)/2 log r = log A - rate * r on [8, 12].
/// Throws NumericalFailure when the profile is not resolved to r = 15, the fit
/// residual is large or |rate - 1| > 0.02.
DecayFit decay_fit(const GroundState& gs);

/// Surface measure of the unit sphere factor: 2, 2 pi r, 4 pi r^2.
double radial_measure(int dim, double r) noexcept;

}  // namespace mbump
