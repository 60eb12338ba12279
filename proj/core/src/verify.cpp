#include "mbump/verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>

#include "mbump/energy.hpp"
#include "mbump/error.hpp"
#include "mbump/maximize.hpp"
#include "mbump/reduction.hpp"
#include "mbump/system.hpp"

namespace mbump {

namespace {

std::string num(double x, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

GroundState cubic_1d() { return compute_ground_state(make_nonlinearity(3.0, 2.0, 0.0, 1), 1); }

// Shared state between criteria that reuse an expensive computation.
struct Context {
  VerifyOptions options;
  std::optional<GroundState> gs;
  std::optional<EnergyLedger> ledger;
  std::optional<DecayStudy> decay;
  const Grid ledger_grid{1, 60.0, 0.1};

  const GroundState& ground_state() {
    if (!gs) gs = cubic_1d();
    return *gs;
  }
  MaximizeOptions maximize_options() const {
    MaximizeOptions o;
    o.rho = 10.0;
    o.restarts = options.restarts;
    o.seed = options.seed;
    o.jobs = options.jobs;
    return o;
  }
  const EnergyLedger& energy_ledger() {
    if (!ledger) ledger = build_ledger(2, algebraic_potential(), 1e-9, ground_state(), ledger_grid, maximize_options());
    return *ledger;
  }
  const DecayStudy& decay_study() {
    if (!decay) {
      DecayStudyOptions o;
      o.jobs = options.jobs;
      decay = correction_decay_study(ground_state(), algebraic_potential(), 0.0, {8.0, 10.0, 12.0}, o);
    }
    return *decay;
  }
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double sup_distance(const GroundState& gs, const std::function<double(double)>& exact) {
  double d = 0.0;
  for (int i = -10000; i <= 10000; ++i) {
    const double x = 1e-3 * i;
    d = std::max(d, std::abs(gs.value(std::abs(x)) - exact(x)));
  }
  return d;
}

Outcome ground_state_oracles(Context&) {
  const GroundState cubic = cubic_1d();
  const GroundState quad = compute_ground_state(make_nonlinearity(2.0, 1.5, 0.0, 1), 1);
  const double e3 = std::abs(cubic.center_value() - std::sqrt(2.0));
  const double e2 = std::abs(quad.center_value() - 1.5);
  const double s3 = sup_distance(cubic, [](double x) { return std::sqrt(2.0) / std::cosh(x); });
  const double s2 = sup_distance(quad, [](double x) {
    const double c = std::cosh(0.5 * x);
    return 1.5 / (c * c);
  });
  std::ostringstream os;
  os << "|w0-sqrt2|=" << num(e3, 2) << " |w0-3/2|=" << num(e2, 2) << " sup(cubic)=" << num(s3, 2)
     << " sup(quadratic)=" << num(s2, 2);
  return {e3 <= 1e-6 && e2 <= 1e-6 && s3 <= 1e-5 && s2 <= 1e-5, os.str()};
}

Outcome energy_constants(Context&) {
  const GroundState gs = cubic_1d();
  const double i = gs.energy();
  const double g1 = interaction_constant(gs);
  const double l1 = gs.lambda1();
  int near_zero = 0;
  for (double ev : gs.spectrum().eigenvalues) near_zero += std::abs(ev) < 1e-4 ? 1 : 0;
  const double g_rel = std::abs(g1 / (4.0 * std::sqrt(2.0)) - 1.0);
  std::ostringstream os;
  os << "I=" << num(i, 10) << " gamma1 rel err=" << num(g_rel, 2) << " lambda1=" << num(l1, 8)
     << " eigenvalues near 0: " << near_zero;
  return {std::abs(i - 4.0 / 3.0) <= 1e-4 && g_rel <= 1e-3 && std::abs(l1 - 3.0) <= 1e-3 && near_zero == 1, os.str()};
}

Outcome correction_decay(Context& ctx) {
  const DecayStudy& s = ctx.decay_study();
  std::ostringstream os;
  os << "xi=" << num(s.xi) << " monotone=" << (s.monotone ? "yes" : "no") << " star norms:";
  for (const auto& r : s.rows) os << ' ' << num(r.star_norm, 3);
  return {s.xi >= 0.5 && s.monotone, os.str()};
}

Outcome orthogonality_suite(Context& ctx) {
  const GroundState& gs = ctx.ground_state();
  const Grid grid(1, 30.0, 0.1);
  std::mt19937_64 rng(ctx.options.seed);
  std::uniform_real_distribution<double> pos(-15.0, 15.0);
  std::uniform_real_distribution<double> sep(8.0, 12.0);
  double worst_orth = 0.0;
  double worst_c = 0.0;
  int solved = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 1 + trial % 3;
    const double delta = trial % 2 ? 1e-9 : 0.0;
    Configuration c{1, {}, sep(rng)};
    while (static_cast<int>(c.size()) < k) {
      const Point3 p{pos(rng), 0.0, 0.0};
      bool ok = true;
      for (const Point3& q : c.points) ok = ok && distance(p, q, 1) >= c.rho;
      if (ok) c.points.push_back(p);
    }
    const CorrectionResult r = solve_projected(c, algebraic_potential(), delta, gs, grid);
    worst_orth = std::max(worst_orth, r.orthogonality);
    if (k == 1 && delta == 0.0) worst_c = std::max(worst_c, r.multipliers.cwiseAbs().maxCoeff());
    ++solved;
  }
  std::ostringstream os;
  os << solved << " configurations, max|<phi,Z>|=" << num(worst_orth, 2) << " max|c| (k=1, delta=0)=" << num(worst_c, 2);
  return {worst_orth <= 1e-10 && worst_c <= 1e-10, os.str()};
}

Outcome interaction_law(Context& ctx) {
  const auto rows = two_bump_interaction_study(ctx.ground_state(), {10.0, 14.0});
  const double e10 = std::abs(rows[0].ratio - 1.0);
  const double e14 = std::abs(rows[1].ratio - 1.0);
  std::ostringstream os;
  os << "ratio d=10: " << num(rows[0].ratio, 6) << " d=14: " << num(rows[1].ratio, 6);
  return {e10 <= 0.3 && e14 < e10, os.str()};
}

Outcome increment_bound(Context& ctx) {
  const DecayStudy& calib = ctx.decay_study();
  const Grid grid(1, 40.0, 0.1);
  bool pass = true;
  double worst = 0.0;
  int checks = 0;
  for (double delta : {0.0, 1e-9})
    for (double d : {10.0, 12.0}) {
      const Configuration one{1, {Point3{-0.5 * d, 0.0, 0.0}}, d};
      const Configuration two{1, {Point3{-0.5 * d, 0.0, 0.0}, Point3{0.5 * d, 0.0, 0.0}}, d};
      for (const IncrementReport& r :
           {increment_bound_check(one, Point3{0.5 * d, 0.0, 0.0}, algebraic_potential(), delta, ctx.ground_state(),
                                  grid, calib),
            increment_bound_check(two, Point3{1.5 * d, 0.0, 0.0}, algebraic_potential(), delta, ctx.ground_state(),
                                  grid, calib)}) {
        pass = pass && r.pass;
        worst = std::max(worst, r.lhs / r.rhs);
        ++checks;
      }
    }
  return {pass, std::to_string(checks) + " augmentations, max lhs/rhs=" + num(worst, 3)};
}

Outcome ledger_inequality(Context& ctx) {
  const EnergyLedger& l = ctx.energy_ledger();
  std::ostringstream os;
  os << "I_h=" << num(l.bump_energy, 12);
  bool positive = true;
  for (const LedgerEntry& e : l.entries) {
    os << " | k=" << e.k << " increment=" << num(e.increment, 3) << " noise=" << num(e.noise_floor, 2);
    positive = positive && e.increment > 0.0;
  }
  if (!l.accepted) os << " | " << l.failure;
  return {l.accepted && positive, os.str()};
}

Outcome polish_structure(Context& ctx) {
  const EnergyLedger& l = ctx.energy_ledger();
  const LedgerEntry& e = l.entries.at(1);
  const GroundState& gs = ctx.ground_state();
  const ScalarModel model(ctx.ledger_grid, algebraic_potential(), 1e-9, gs.nonlinearity(),
                          make_grid_consistent_bump(gs, ctx.ledger_grid.spacing(), default_bump_reach(ctx.ledger_grid)));
  const PolishResult p = polish_solution(model, e.record);
  const PolishReport& r = p.report;
  std::ostringstream os;
  os << "residual=" << num(r.residual, 2) << " min u=" << num(r.min_value, 2) << " maxima=" << r.n_local_maxima
     << " max offset=" << num(r.max_peak_offset, 3);
  return {r.residual <= 1e-10 && r.min_value > 0.0 && r.n_local_maxima == 2 &&
              r.max_peak_offset <= ctx.ledger_grid.spacing(),
          os.str()};
}

Outcome system_checks(Context& ctx) {
  const GroundState& gs = ctx.ground_state();
  const CouplingParams p = synchronized_amplitudes(1.0, 1.0, 3.0);
  const bool amplitudes = p.alpha == 0.5 && p.gamma == 0.5 && p.admissible;
  const CoupledSpectrum spec = coupled_spectrum(p, gs);
  const CoupledRun run =
      coupled_reduce_and_maximize(2, algebraic_potential(), algebraic_potential(), 1e-9, p, gs, ctx.ledger_grid,
                                  ctx.maximize_options());
  const auto rows = coupled_interaction_study(p, gs, {10.0});
  const double a = interaction_factor(p);
  std::ostringstream os;
  os << "alpha=" << p.alpha << " gamma=" << p.gamma << " kernel_dim=" << spec.kernel_dim
     << " residual=" << num(std::max(run.residual_u, run.residual_v), 2) << " |u-v|=" << num(run.symmetry_gap, 2)
     << " A=" << a << " interaction ratio=" << num(rows[0].ratio, 5);
  return {amplitudes && spec.kernel_dim == 1 && std::max(run.residual_u, run.residual_v) <= 1e-10 &&
              run.symmetry_gap <= 1e-8 && a == 0.5 && std::abs(rows[0].ratio - 1.0) <= 0.3,
          os.str()};
}

double order_ratio(double a, double b, double c) { return (b - a) / (c - b); }

Outcome convergence_order(Context& ctx) {
  const GroundState& gs = ctx.ground_state();
  double i_h[3];
  double m_h[3];
  double l_h[3];
  const double spacings[3] = {0.2, 0.1, 0.05};
  for (int level = 0; level < 3; ++level) {
    const Grid g(1, 40.0, spacings[level]);
    const BumpModel bump = make_grid_consistent_bump(gs, spacings[level], default_bump_reach(g));
    const ScalarModel flat(g, zero_potential(), 0.0, gs.nonlinearity(), bump);
    const ScalarModel model(g, algebraic_potential(), 1e-9, gs.nonlinearity(), bump);
    i_h[level] = reduced_energy(flat, Configuration{1, {Point3{0.0, 0.0, 0.0}}, 10.0}).value;
    m_h[level] = reduced_energy(model, Configuration{1, {Point3{-6.0, 0.0, 0.0}, Point3{6.0, 0.0, 0.0}}, 10.0}).value;
    SpectrumOptions so;
    so.radial_step = 0.2 * spacings[level];
    l_h[level] = sector_eigenvalues(1, 0, [&gs](double r) { return gs.nonlinearity().df(gs.value(r)); }, so).front();
  }
  const double ri = order_ratio(i_h[0], i_h[1], i_h[2]);
  const double rm = order_ratio(m_h[0], m_h[1], m_h[2]);
  const double rl = order_ratio(l_h[0], l_h[1], l_h[2]);
  const auto ok = [](double r) { return r >= 3.5 && r <= 4.5; };
  std::ostringstream os;
  os << "difference ratios: I " << num(ri) << ", M(Q) " << num(rm) << ", lambda1 " << num(rl);
  return {ok(ri) && ok(rm) && ok(rl), os.str()};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  Outcome (*run)(Context&);
};

const Criterion kCriteria[] = {
    {1, "ground-state oracles", 1.0, ground_state_oracles},
    {2, "energy and constants", 10.0, energy_constants},
    {3, "correction decay", 30.0, correction_decay},
    {4, "orthogonality and multipliers", 0.0, orthogonality_suite},
    {5, "two-bump interaction", 10.0, interaction_law},
    {6, "increment bound", 0.0, increment_bound},
    {7, "ledger inequality", 0.0, ledger_inequality},
    {8, "polish and structure", 0.0, polish_structure},
    {9, "coupled system", 120.0, system_checks},
    {10, "convergence order", 0.0, convergence_order},
};

}  // namespace

std::vector<int> suite_criteria(const std::string& suite) {
  if (suite == "scalar-1d") return {1, 2, 3, 4, 5, 6, 7, 8, 10};
  if (suite == "system-1d") return {9};
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  throw InvalidArgument("unknown suite '" + suite + "' (expected scalar-1d, system-1d or all)");
}

std::vector<CriterionResult> run_acceptance(const VerifyOptions& options) {
  const std::vector<int> ids = suite_criteria(options.suite);
  Context ctx{options, {}, {}, {}};
  std::vector<CriterionResult> out;
  for (const Criterion& c : kCriteria) {
    if (std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = c.run(ctx);
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_seconds > 0.0 && r.seconds > c.budget_seconds) {
      r.pass = false;
      r.detail += " | over the " + num(c.budget_seconds) + " s budget";
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_table(const std::vector<CriterionResult>& results) {
  std::ostringstream os;
  for (const CriterionResult& r : results) {
    os << (r.pass ? "PASS" : "FAIL") << "  [" << std::setw(2) << r.id << "] " << std::left << std::setw(30) << r.name
       << std::right << std::setw(9) << std::fixed << std::setprecision(2) << r.seconds << " s  " << r.detail
       << '\n';
    os.unsetf(std::ios::fixed);
  }
  return os.str();
}

}  // namespace mbump
