#include "mbump/potential.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "mbump/error.hpp"

namespace mbump {

namespace {

double norm(const Point3& x, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += x[a] * x[a];
  return std::sqrt(s);
}

std::vector<Point3> sample_rays(int dim) {
  std::vector<Point3> rays;
  for (int a = 0; a < dim; ++a)
    for (double s : {1.0, -1.0}) {
      Point3 e{0.0, 0.0, 0.0};
      e[a] = s;
      rays.push_back(e);
    }
  if (dim > 1) {
    const double c = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int mask = 0; mask < (1 << dim); ++mask) {
      Point3 e{0.0, 0.0, 0.0};
      for (int a = 0; a < dim; ++a) e[a] = (mask >> a & 1) ? -c : c;
      rays.push_back(e);
    }
  }
  return rays;
}

std::string ray_name(const Point3& e, int dim) {
  std::ostringstream os;
  os << "(";
  for (int a = 0; a < dim; ++a) os << (a ? ", " : "") << e[a];
  os << ")";
  return os.str();
}

// Shared sampling logic; v(x) is the combined potential to test for slow decay
// and parts are the potentials that must be nonnegative far out.
template <class Fn>
HypothesisReport check_sampled(Fn&& v, const std::vector<const Potential*>& parts, double eta_bar, int dim,
                               const HypothesisOptions& o) {
  HypothesisReport rep;
  rep.decay_to_zero = true;
  rep.slow_decay = true;
  rep.nonnegative_far = true;
  auto fail = [&rep](const std::string& why) {
    if (rep.first_violation.empty()) rep.first_violation = why;
  };
  if (!(eta_bar > 0.0 && eta_bar < 1.0)) {
    rep.slow_decay = false;
    fail("eta_bar must lie in (0, 1)");
  }
  const auto steps = static_cast<int>(std::lround(o.max_radius / o.sample_step));
  for (const Point3& e : sample_rays(dim)) {
    auto at = [&](double r) {
      Point3 x{0.0, 0.0, 0.0};
      for (int a = 0; a < dim; ++a) x[a] = r * e[a];
      return x;
    };
    double sup = 0.0;
    for (int i = 0; i <= steps; ++i) sup = std::max(sup, std::abs(v(at(i * o.sample_step))));
    const double tail = std::abs(v(at(o.max_radius)));
    if (!(tail <= 1e-2 * sup) && sup > 0.0) {
      rep.decay_to_zero = false;
      fail("V does not decay along ray " + ray_name(e, dim));
    }

    double onset = 0.0;
    double prev = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double r = i * o.sample_step;
      const Point3 x = at(r);
      for (const Potential* p : parts) {
        if (p->value(x, dim) < 0.0) {
          rep.switch_radius = std::max(rep.switch_radius, r);
          if (r >= o.onset_radius && rep.nonnegative_far) {
            rep.nonnegative_far = false;
            std::ostringstream os;
            os << "potential negative at r = " << r << " along ray " << ray_name(e, dim);
            fail(os.str());
          }
        }
      }
      const double g = v(x) * std::exp(eta_bar * r);
      if (i > 0 && !(g > prev && v(x) > 0.0)) onset = r;
      prev = g;
    }
    rep.growth_onset = std::max(rep.growth_onset, onset);
    if (onset >= o.onset_radius) {
      rep.slow_decay = false;
      std::ostringstream os;
      os << "V e^{eta_bar |x|} not increasing at r = " << onset << " along ray " << ray_name(e, dim);
      fail(os.str());
    }
  }
  rep.pass = rep.decay_to_zero && rep.slow_decay && rep.nonnegative_far;
  return rep;
}

}  // namespace

double Potential::value(const Point3& x, int dim) const noexcept {
  const double r = norm(x, dim);
  switch (kind) {
    case PotentialKind::zero: return 0.0;
    case PotentialKind::algebraic: return amplitude * std::pow(1.0 + r * r, -0.5 * m);
    case PotentialKind::sub_exponential: return amplitude * std::exp(-rate * r);
    case PotentialKind::signed_compact_negative: {
      double v = amplitude * std::pow(1.0 + r * r, -0.5 * m);
      if (r < radius) {
        const double t = 1.0 - (r * r) / (radius * radius);
        v -= depth * t * t * t;
      }
      return v;
    }
  }
  return 0.0;
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::algebraic: return "algebraic";
    case PotentialKind::sub_exponential: return "sub_exponential";
    case PotentialKind::signed_compact_negative: return "signed_compact_negative";
    case PotentialKind::zero: return "zero";
  }
  return "zero";
}

std::string Potential::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case PotentialKind::algebraic: os << ":m=" << m << ",amplitude=" << amplitude; break;
    case PotentialKind::sub_exponential: os << ":rate=" << rate << ",amplitude=" << amplitude; break;
    case PotentialKind::signed_compact_negative:
      os << ":m=" << m << ",amplitude=" << amplitude << ",depth=" << depth << ",radius=" << radius;
      break;
    case PotentialKind::zero: return os.str();
  }
  os << ",eta_bar=" << eta_bar;
  return os.str();
}

Potential algebraic_potential(double m, double amplitude, double eta_bar) {
  Potential v;
  v.kind = PotentialKind::algebraic;
  v.m = m;
  v.amplitude = amplitude;
  v.eta_bar = eta_bar;
  return v;
}

Potential sub_exponential_potential(double rate, double amplitude, double eta_bar) {
  Potential v;
  v.kind = PotentialKind::sub_exponential;
  v.rate = rate;
  v.amplitude = amplitude;
  v.eta_bar = eta_bar;
  return v;
}

Potential signed_compact_negative_potential(double m, double amplitude, double depth, double radius, double eta_bar) {
  Potential v = algebraic_potential(m, amplitude, eta_bar);
  v.kind = PotentialKind::signed_compact_negative;
  v.depth = depth;
  v.radius = radius;
  return v;
}

Potential zero_potential() { return Potential{}; }

Potential parse_potential(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  Potential v;
  if (kind == "algebraic")
    v = algebraic_potential();
  else if (kind == "sub_exponential")
    v = sub_exponential_potential();
  else if (kind == "signed_compact_negative")
    v = signed_compact_negative_potential();
  else if (kind == "zero")
    v = zero_potential();
  else
    throw InvalidArgument("unknown potential kind '" + kind + "'");
  if (colon == std::string::npos) return v;

  const std::map<std::string, double*> keys{{"m", &v.m},         {"amplitude", &v.amplitude}, {"rate", &v.rate},
                                            {"depth", &v.depth}, {"radius", &v.radius},       {"eta_bar", &v.eta_bar}};
  std::stringstream rest(spec.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("potential parameter '" + item + "' lacks '='");
    const std::string key = item.substr(0, eq);
    const auto it = keys.find(key);
    if (it == keys.end()) throw InvalidArgument("unknown potential parameter '" + key + "'");
    try {
      std::size_t used = 0;
      *it->second = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("potential parameter '" + key + "' is not a number");
    }
    if (!std::isfinite(*it->second)) throw InvalidArgument("potential parameter '" + key + "' is not finite");
  }
  if (v.kind == PotentialKind::signed_compact_negative && !(v.radius > 0.0))
    throw InvalidArgument("potential radius must be positive");
  return v;
}

Field sample_potential(const Potential& v, const Grid& grid) {
  return sample(grid, [&](const Point3& x) { return v.value(x, grid.dim()); });
}

HypothesisReport check_hypotheses(const Potential& v, double eta_bar, int dim, const HypothesisOptions& options) {
  return check_sampled([&](const Point3& x) { return v.value(x, dim); }, {&v}, eta_bar, dim, options);
}

HypothesisReport check_system_hypotheses(const Potential& a, const Potential& b, double alpha, double gamma,
                                         double eta_bar, int dim, const HypothesisOptions& options) {
  const double a2 = alpha * alpha;
  const double g2 = gamma * gamma;
  return check_sampled([&](const Point3& x) { return a2 * a.value(x, dim) + g2 * b.value(x, dim); }, {&a, &b},
                       eta_bar, dim, options);
}

void warn_delta_regime(HypothesisReport& report, double delta, double rho) {
  if (delta >= std::exp(-2.0 * rho)) {
    std::ostringstream os;
    os << "delta = " << delta << " is not below e^{-2 rho} = " << std::exp(-2.0 * rho);
    report.warnings.push_back(os.str());
  }
}

}  // namespace mbump
