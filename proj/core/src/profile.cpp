#include "mbump/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <lapacke.h>

#include "mbump/error.hpp"

namespace mbump {

namespace {

constexpr double kPi = std::numbers::pi;

double pos_pow(double t, double e) { return t > 0.0 ? std::pow(t, e) : 0.0; }

struct Shot {
  bool overshoot = false;
  std::vector<double> w;
  std::vector<double> dw;
};

// Integrates the radial ODE from w(0) = w0 until the trajectory either crosses
// zero (overshoot) or turns upward (undershoot).
Shot shoot(const Nonlinearity& nl, int dim, double w0, double h, double r_max, bool record) {
  Shot s;
  auto rhs = [&](double r, double w, double v, double& dw, double& dv) {
    dw = v;
    dv = (dim > 1 ? -(dim - 1) * v / r : 0.0) + w - nl.f(w);
  };
  double r = 0.0;
  double w = w0;
  double v = 0.0;
  if (record) {
    s.w.push_back(w);
    s.dw.push_back(v);
  }
  if (dim > 1) {
    // Series start w = w0 + a2 r^2 + a4 r^4.
    const double a2 = (w0 - nl.f(w0)) / (2.0 * dim);
    const double a4 = (1.0 - nl.df(w0)) * a2 / (4.0 * (dim + 2));
    r = h;
    w = w0 + a2 * h * h + a4 * h * h * h * h;
    v = 2 * a2 * h + 4 * a4 * h * h * h;
    if (record) {
      s.w.push_back(w);
      s.dw.push_back(v);
    }
    if (v > 0.0) return s;
  }
  while (r < r_max) {
    // Sub-steps resolve the 1/r coefficient near the origin.
    const int sub = dim > 1 ? std::max(1, static_cast<int>(std::ceil(h / (0.002 * r)))) : 1;
    const double hs = h / sub;
    for (int k = 0; k < sub; ++k) {
      double k1w, k1v, k2w, k2v, k3w, k3v, k4w, k4v;
      rhs(r, w, v, k1w, k1v);
      rhs(r + 0.5 * hs, w + 0.5 * hs * k1w, v + 0.5 * hs * k1v, k2w, k2v);
      rhs(r + 0.5 * hs, w + 0.5 * hs * k2w, v + 0.5 * hs * k2v, k3w, k3v);
      rhs(r + hs, w + hs * k3w, v + hs * k3v, k4w, k4v);
      w += hs / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
      v += hs / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
      r += hs;
    }
    if (record) {
      s.w.push_back(w);
      s.dw.push_back(v);
    }
    if (w < 0.0) {
      s.overshoot = true;
      return s;
    }
    if (v > 0.0) return s;
  }
  // Not classified: the trajectory is still decaying monotonically. Treat as
  // an undershoot; bisection then moves the lower end up.
  return s;
}

double hermite(double h, double t, double y0, double d0, double y1, double d1) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

double hermite_derivative(double h, double t, double y0, double d0, double y1, double d1) {
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y0 + (-6 * t2 + 6 * t) * y1) / h + (3 * t2 - 4 * t + 1) * d0 + (3 * t2 - 2 * t) * d1;
}

// Composite Simpson on [0, R] with an even number of panels of width h.
template <class Fn>
double simpson(Fn&& fn, double h, std::size_t panels) {
  if (panels % 2) ++panels;
  double s = fn(0.0) + fn(h * panels);
  for (std::size_t i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * fn(h * i);
  return s * h / 3.0;
}

}  // namespace

double Nonlinearity::f(double t) const noexcept { return pos_pow(t, p) - a * pos_pow(t, q); }

double Nonlinearity::df(double t) const noexcept {
  if (t <= 0.0) return 0.0;
  return p * std::pow(t, p - 1) - (a > 0.0 ? a * q * std::pow(t, q - 1) : 0.0);
}

double Nonlinearity::primitive(double t) const noexcept {
  return pos_pow(t, p + 1) / (p + 1) - (a > 0.0 ? a * pos_pow(t, q + 1) / (q + 1) : 0.0);
}

Nonlinearity make_nonlinearity(double p, double q, double a, int dim) {
  if (dim < 1 || dim > 3) throw InvalidArgument("dimension must be 1, 2 or 3");
  if (!std::isfinite(p) || !(p > 1.0)) throw InvalidArgument("nonlinearity exponent p must exceed 1");
  if (!std::isfinite(a) || a < 0.0) throw InvalidArgument("nonlinearity coefficient a must be nonnegative");
  if (a > 0.0 && !(q > 1.0 && q < p)) throw InvalidArgument("nonlinearity requires 1 < q < p when a > 0");
  if (dim >= 3 && !(p < (dim + 2.0) / (dim - 2.0))) throw InvalidArgument("nonlinearity exponent p is not subcritical");
  Nonlinearity nl{p, q, a, 1.0};
  nl.holder_sigma = std::min(1.0, p - 1.0);
  if (a > 0.0) nl.holder_sigma = std::min(nl.holder_sigma, q - 1.0);
  return nl;
}

double radial_measure(int dim, double r) noexcept {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * kPi * r;
    default: return 4.0 * kPi * r * r;
  }
}

int sector_multiplicity(int dim, int sector) noexcept {
  if (dim == 1 || sector == 0) return 1;
  if (dim == 2) return 2;
  return 2 * sector + 1;
}

double GroundState::tail_kernel(double r) const noexcept {
  switch (dim_) {
    case 1: return std::exp(-r);
    case 2: return std::cyl_bessel_k(0.0, r);
    default: return std::exp(-r) / r;
  }
}

double GroundState::tail_kernel_derivative(double r) const noexcept {
  switch (dim_) {
    case 1: return -std::exp(-r);
    case 2: return -std::cyl_bessel_k(1.0, r);
    default: return -std::exp(-r) * (1.0 / r + 1.0 / (r * r));
  }
}

double GroundState::value(double r) const noexcept {
  r = std::abs(r);
  const double x = r / step_;
  const auto i = static_cast<std::size_t>(x);
  if (i + 1 >= w_.size()) return tail_scale_ * tail_kernel(r);
  return hermite(step_, x - static_cast<double>(i), w_[i], dw_[i], w_[i + 1], dw_[i + 1]);
}

double GroundState::derivative(double r) const noexcept {
  const double sign = r < 0.0 ? -1.0 : 1.0;
  r = std::abs(r);
  const double x = r / step_;
  const auto i = static_cast<std::size_t>(x);
  if (i + 1 >= w_.size()) return sign * tail_scale_ * tail_kernel_derivative(r);
  return sign * hermite_derivative(step_, x - static_cast<double>(i), w_[i], dw_[i], w_[i + 1], dw_[i + 1]);
}

GroundState compute_ground_state(const Nonlinearity& nl, int dim, double tol) {
  if (dim < 1 || dim > 3) throw InvalidArgument("dimension must be 1, 2 or 3");
  if (!(tol >= 1e-12)) throw InvalidArgument("ground state tolerance must be at least 1e-12");
  const double h = 1e-3;
  const double r_max = 60.0;

  double lo = 0.1;
  double hi = 10.0;
  if (shoot(nl, dim, lo, h, r_max, false).overshoot || !shoot(nl, dim, hi, h, r_max, false).overshoot)
    throw NumericalFailure("ground state: shooting bracket [0.1, 10] does not straddle the ground state");
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (shoot(nl, dim, mid, h, r_max, false).overshoot ? hi : lo) = mid;
  }
  const Shot a = shoot(nl, dim, lo, h, r_max, true);
  const Shot b = shoot(nl, dim, hi, h, r_max, true);

  // The table is trusted while the two bracketing trajectories agree to 1e-5
  // relative, and is cut once w drops below 1e-9 w(0).
  const std::size_t common = std::min(a.w.size(), b.w.size());
  std::size_t m = 0;
  while (m + 1 < common) {
    const double wa = a.w[m + 1];
    const double wb = b.w[m + 1];
    if (std::abs(wa - wb) > 1e-5 * std::abs(wa) || wa <= 1e-9 * lo) break;
    ++m;
  }
  if (m * h < 8.0) throw NumericalFailure("ground state: profile resolved only to r = " + std::to_string(m * h));

  GroundState gs;
  gs.nl_ = nl;
  gs.dim_ = dim;
  gs.step_ = h;
  gs.w_.resize(m + 1);
  gs.dw_.resize(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    gs.w_[i] = 0.5 * (a.w[i] + b.w[i]);
    gs.dw_[i] = 0.5 * (a.dw[i] + b.dw[i]);
  }
  for (std::size_t i = 1; i <= m; ++i)
    if (!(gs.w_[i] > 0.0) || !(gs.dw_[i] < 0.0) || !(gs.w_[i] < gs.w_[i - 1]))
      throw NumericalFailure("ground state: profile is not positive and strictly decreasing");
  const double r_m = h * static_cast<double>(m);
  gs.tail_scale_ = gs.w_[m] / gs.tail_kernel(r_m);

  double res = 0.0;
  for (std::size_t i = 5; i + 2 <= m; ++i) {
    const double r = h * static_cast<double>(i);
    const double d2 = (-gs.dw_[i + 2] + 8 * gs.dw_[i + 1] - 8 * gs.dw_[i - 1] + gs.dw_[i - 2]) / (12 * h);
    const double ode = d2 + (dim - 1) / r * gs.dw_[i] - gs.w_[i] + nl.f(gs.w_[i]);
    res = std::max(res, std::abs(ode));
  }
  gs.ode_residual_ = res / gs.w_[0];
  if (gs.ode_residual_ > tol) {
    std::ostringstream os;
    os << "ground state: ODE residual " << gs.ode_residual_ << " exceeds tolerance " << tol;
    throw NumericalFailure(os.str());
  }

  gs.energy_ = bump_energy(gs);
  gs.spectrum_ = linearized_spectrum(gs, 16);
  const DecayFit fit = decay_fit(gs);
  gs.decay_amplitude_ = fit.amplitude;
  gs.decay_rate_ = fit.rate;
  return gs;
}

namespace {

// Symmetrised cell-centred finite-volume discretisation of one sector on
// r_i = (i + 1/2) h. Returns the diagonal, off-diagonal and cell volumes.
struct SectorMatrix {
  std::vector<double> diag;
  std::vector<double> off;
  std::vector<double> vol;
};

SectorMatrix assemble_sector(int dim, int sector, const std::function<double(double)>& coefficient,
                             const SpectrumOptions& o) {
  if (dim < 1 || dim > 3) throw InvalidArgument("dimension must be 1, 2 or 3");
  if (sector < 0 || (dim == 1 && sector > 1)) throw InvalidArgument("invalid angular sector");
  const double h = o.radial_step;
  const auto n = static_cast<std::size_t>(std::lround(o.radius / h));
  if (n < 10) throw InvalidArgument("spectrum: radial grid too coarse");
  auto s = [dim](double r) { return dim == 1 ? 1.0 : (dim == 2 ? r : r * r); };
  const double centrifugal = dim == 1 ? 0.0 : sector * (sector + dim - 2.0);
  SectorMatrix m{std::vector<double>(n), std::vector<double>(n - 1), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double rl = h * i;
    const double rr = h * (i + 1);
    const double rc = h * (i + 0.5);
    m.vol[i] = dim == 1 ? h : (dim == 2 ? rc * h : (rr * rr * rr - rl * rl * rl) / 3.0);
    // Fluxes through the faces; Dirichlet ghost at the outer face, and in 1D an
    // odd ghost at the origin for the odd sector.
    double d = -s(rr) / h * (i + 1 < n ? 1.0 : 2.0);
    if (i > 0)
      d -= s(rl) / h;
    else if (dim == 1 && sector == 1)
      d -= 2.0 / h;
    d += m.vol[i] * (-1.0 + coefficient(rc) - (centrifugal > 0.0 ? centrifugal / (rc * rc) : 0.0));
    m.diag[i] = d / m.vol[i];
    if (i + 1 < n) m.off[i] = s(rr) / h;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) m.off[i] /= std::sqrt(m.vol[i] * m.vol[i + 1]);
  return m;
}

}  // namespace

std::vector<double> sector_eigenvalues(int dim, int sector, const std::function<double(double)>& coefficient,
                                       const SpectrumOptions& o) {
  const SectorMatrix a = assemble_sector(dim, sector, coefficient, o);
  const auto n = static_cast<lapack_int>(a.diag.size());
  // Gershgorin bound for the upper end of the search interval.
  double upper = 0.0;
  for (std::size_t i = 0; i < a.diag.size(); ++i) {
    double r = std::abs(a.diag[i]);
    if (i > 0) r += std::abs(a.off[i - 1]);
    if (i < a.off.size()) r += std::abs(a.off[i]);
    upper = std::max(upper, r);
  }
  lapack_int found = 0;
  lapack_int nsplit = 0;
  std::vector<double> w(a.diag.size());
  std::vector<lapack_int> iblock(a.diag.size()), isplit(a.diag.size());
  const lapack_int info =
      LAPACKE_dstebz('V', 'E', n, -1.0 + o.essential_margin, upper + 1.0, 0, 0, 1e-13, a.diag.data(), a.off.data(),
                     &found, &nsplit, w.data(), iblock.data(), isplit.data());
  if (info != 0) throw NumericalFailure("spectrum: bisection eigensolver failed (info " + std::to_string(info) + ")");
  std::vector<double> out(w.begin(), w.begin() + found);
  std::sort(out.rbegin(), out.rend());
  return out;
}

namespace {

// Eigenfunction of the sector-0 operator for an isolated eigenvalue, on the
// cell centres, normalised to max 1 and made positive.
RadialSamples top_eigenfunction(const GroundState& gs, double lambda, const SpectrumOptions& o) {
  const auto coefficient = [&gs](double r) { return gs.nonlinearity().df(gs.value(r)); };
  const SectorMatrix a = assemble_sector(gs.dim(), 0, coefficient, o);
  const auto n = static_cast<lapack_int>(a.diag.size());
  std::vector<double> z(a.diag.size());
  // The LAPACKE wrapper scans full-length work arrays.
  std::vector<double> w(a.diag.size(), 0.0);
  std::vector<lapack_int> iblock(a.diag.size(), 1), isplit(a.diag.size(), n);
  w[0] = lambda;
  lapack_int ifail = 0;
  const lapack_int info = LAPACKE_dstein(LAPACK_COL_MAJOR, n, a.diag.data(), a.off.data(), 1, w.data(), iblock.data(),
                                         isplit.data(), z.data(), n, &ifail);
  if (info != 0) throw NumericalFailure("spectrum: inverse iteration for the top eigenfunction failed");
  RadialSamples out{o.radial_step, std::vector<double>(a.diag.size())};
  double peak = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out.values[i] = z[i] / std::sqrt(a.vol[i]);
    if (std::abs(out.values[i]) > std::abs(peak)) peak = out.values[i];
  }
  for (double& v : out.values) v /= peak;
  return out;
}

}  // namespace

SpectrumReport linearized_spectrum(const GroundState& gs, int n_modes, const SpectrumOptions& o) {
  if (n_modes < 1) throw InvalidArgument("spectrum: n_modes must be positive");
  const int dim = gs.dim();
  const auto coefficient = [&gs](double r) { return gs.nonlinearity().df(gs.value(r)); };
  const int last = dim == 1 ? 1 : o.max_sector;
  SpectrumReport rep;
  std::vector<std::pair<double, int>> all;
  for (int l = 0; l <= last; ++l) {
    const int mult = sector_multiplicity(dim, l);
    for (double ev : sector_eigenvalues(dim, l, coefficient, o))
      for (int k = 0; k < mult; ++k) all.emplace_back(ev, l);
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  for (const auto& [ev, l] : all) {
    if (std::abs(ev) < o.kernel_tol) ++rep.kernel_dim;
    if (ev >= o.kernel_tol) ++rep.positive_count;
  }
  if (all.empty() || all.front().second != 0 || !(all.front().first > 0.0))
    throw NumericalFailure("spectrum: no positive radial eigenvalue found");
  if (rep.positive_count > 1) {
    std::ostringstream os;
    os << "spectrum: " << rep.positive_count << " positive eigenvalues; the ground state is not a mountain-pass "
       << "critical point of the assumed type";
    throw NumericalFailure(os.str());
  }
  rep.lambda1 = all.front().first;
  for (std::size_t i = 0; i < all.size() && static_cast<int>(i) < n_modes; ++i) {
    rep.eigenvalues.push_back(all[i].first);
    rep.sectors.push_back(all[i].second);
  }
  rep.phi0 = top_eigenfunction(gs, rep.lambda1, o);
  return rep;
}

double bump_energy(const GroundState& gs) {
  const int dim = gs.dim();
  const Nonlinearity& nl = gs.nonlinearity();
  const double radius = gs.resolved_radius() + 30.0;
  const double h = gs.step();
  const auto panels = static_cast<std::size_t>(std::ceil(radius / h));
  return simpson(
      [&](double r) {
        const double w = gs.value(r);
        const double dw = gs.derivative(r);
        return radial_measure(dim, r) * (0.5 * (dw * dw + w * w) - nl.primitive(w));
      },
      h, panels);
}

double interaction_constant(const GroundState& gs) {
  const int dim = gs.dim();
  const Nonlinearity& nl = gs.nonlinearity();
  const double h = dim == 1 ? 0.01 : (dim == 2 ? 0.05 : 0.2);
  const double half = dim == 1 ? 40.0 : (dim == 2 ? 25.0 : 16.0);
  const int n = static_cast<int>(std::lround(half / h));
  // Transverse directions only enter through |y|, so accumulate the weight of
  // each y_1 slice once.
  double total = 0.0;
  for (int i = -n; i <= n; ++i) {
    const double y1 = i * h;
    const double wi = (i == -n || i == n) ? 0.5 : 1.0;
    double slice = 0.0;
    if (dim == 1) {
      slice = nl.f(gs.value(std::abs(y1)));
    } else {
      for (int j = -n; j <= n; ++j) {
        const double wj = (j == -n || j == n) ? 0.5 : 1.0;
        if (dim == 2) {
          slice += wj * nl.f(gs.value(std::hypot(y1, j * h)));
        } else {
          for (int k = -n; k <= n; ++k) {
            const double wk = (k == -n || k == n) ? 0.5 : 1.0;
            slice += wj * wk * nl.f(gs.value(std::sqrt(y1 * y1 + j * h * j * h + k * h * k * h)));
          }
        }
      }
    }
    total += wi * slice * std::exp(-y1);
  }
  return total * std::pow(h, dim);
}

DecayFit decay_fit(const GroundState& gs) {
  if (gs.resolved_radius() < 12.0) {
    std::ostringstream os;
    os << "decay fit: profile resolved only to r = " << gs.resolved_radius() << " (need 12)";
    throw NumericalFailure(os.str());
  }
  const int dim = gs.dim();
  Eigen::MatrixXd a(41, 2);
  Eigen::VectorXd b(41);
  for (int i = 0; i <= 40; ++i) {
    const double r = 8.0 + 0.1 * i;
    a(i, 0) = 1.0;
    a(i, 1) = -r;
    b[i] = std::log(gs.value(r)) + 0.5 * (dim - 1) * std::log(r);
  }
  const Eigen::Vector2d x = a.colPivHouseholderQr().solve(b);
  DecayFit fit{std::exp(x[0]), x[1], std::sqrt((a * x - b).squaredNorm() / 41.0)};
  if (fit.residual > 5e-3 || std::abs(fit.rate - 1.0) > 0.02) {
    std::ostringstream os;
    os << "decay fit: rate " << fit.rate << " with residual " << fit.residual << " (profile under-resolved)";
    throw NumericalFailure(os.str());
  }
  return fit;
}

}  // namespace mbump
