#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbump/energy.hpp"
#include "mbump/error.hpp"
#include "mbump/field_io.hpp"
#include "mbump/maximize.hpp"
#include "mbump/potential.hpp"
#include "mbump/profile.hpp"
#include "mbump/reduction.hpp"
#include "mbump/system.hpp"
#include "mbump/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mbump;

namespace {

struct RunConfig {
  int dim = 1;
  double p = 3.0;
  double q = 2.0;
  double a = 0.0;
  std::optional<std::string> potential;
  double delta = 0.0;
  double rho = 10.0;
  double eta = 0.75;
  double half_width = 40.0;
  double spacing = 0.1;
  std::string points;
  int k = 2;
  int k_max = 2;
  int restarts = 4;
  int modes = 8;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out = "out";
  bool dump_fields = false;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double beta = 3.0;
  std::string potential_a = "zero";
  std::string potential_b = "zero";
  std::optional<double> beta_star;
  std::string suite = "all";
};

// Writes the summary, tables and fields of one run.
class Artifacts {
 public:
  explicit Artifacts(const fs::path& root) : root_(root) { fs::create_directories(root_); }

  json& summary() { return summary_; }

  void put(const std::string& key, double value, double tol) {
    summary_[key] = value;
    summary_[key + "_tol"] = tol;
  }

  void table(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<double>>& rows) {
    fs::create_directories(root_ / "tables");
    std::ofstream os(root_ / "tables" / (name + ".csv"));
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    os.precision(17);
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << '\n';
    }
  }

  void field(const std::string& name, const Field& f) {
    fs::create_directories(root_ / "fields");
    write_field(root_ / "fields" / name, f);
  }

  void finish() const {
    std::ofstream os(root_ / "summary.json");
    os << summary_.dump(2) << '\n';
  }

 private:
  fs::path root_;
  json summary_ = json::object();
};

GroundState ground_state_of(const RunConfig& c) {
  return compute_ground_state(make_nonlinearity(c.p, c.q, c.a, c.dim), c.dim);
}

Potential potential_of(const RunConfig& c) { return c.potential ? parse_potential(*c.potential) : zero_potential(); }

Grid grid_of(const RunConfig& c) { return Grid(c.dim, c.half_width, c.spacing); }

std::vector<Point3> parse_points(const std::string& text, int dim) {
  std::vector<Point3> out;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    Point3 p{0.0, 0.0, 0.0};
    std::stringstream coords(item);
    std::string c;
    int n = 0;
    while (std::getline(coords, c, ',')) {
      if (n >= dim) throw InvalidArgument("point '" + item + "' has more than dim coordinates");
      try {
        p[static_cast<std::size_t>(n++)] = std::stod(c);
      } catch (const std::exception&) {
        throw InvalidArgument("cannot parse coordinate '" + c + "'");
      }
    }
    if (n != dim) throw InvalidArgument("point '" + item + "' needs exactly dim coordinates");
    out.push_back(p);
  }
  if (out.empty()) throw InvalidArgument("--points is empty; use x[,y[,z]];x[,y[,z]];...");
  return out;
}

Configuration configuration_of(const RunConfig& c) {
  if (c.points.empty()) throw InvalidArgument("--points is required for this subcommand");
  return Configuration{c.dim, parse_points(c.points, c.dim), c.rho};
}

MaximizeOptions maximize_options_of(const RunConfig& c) {
  MaximizeOptions o;
  o.rho = c.rho;
  o.eta = c.eta;
  o.restarts = c.restarts;
  o.seed = c.seed;
  o.jobs = c.jobs;
  o.newton.norm.eta = c.eta;
  return o;
}

json point_json(const Configuration& config) {
  json pts = json::array();
  for (const Point3& p : config.points) {
    json q = json::array();
    for (int a = 0; a < config.dim; ++a) q.push_back(p[static_cast<std::size_t>(a)]);
    pts.push_back(q);
  }
  return pts;
}

std::vector<std::vector<double>> point_rows(const Configuration& config) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < config.size(); ++i) {
    std::vector<double> r{static_cast<double>(i)};
    for (int a = 0; a < config.dim; ++a) r.push_back(config.points[i][static_cast<std::size_t>(a)]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<std::string> point_header(int dim) {
  std::vector<std::string> h{"index"};
  for (int a = 0; a < dim; ++a) h.push_back("x" + std::to_string(a + 1));
  return h;
}

// Spike positions are resolved to the final pattern step, the grid spacing.
void record_json(Artifacts& art, const MaximizerRecord& r, double position_tol) {
  art.summary()["points"] = point_json(r.config);
  art.put("value", r.value, r.roundoff);
  art.put("interior_margin", r.interior_margin, 2.0 * position_tol);
  art.put("boundary_distance", r.boundary_distance, position_tol);
  art.put("multiplier_max", r.multiplier_max, NewtonOptions{}.tolerance);
  art.put("search_radius", r.search_radius, 0.0);
  art.summary()["restarts_used"] = r.restarts_used;
  art.summary()["restarts_failed"] = r.restarts_failed;
  art.summary()["evaluations"] = r.evaluations;
  art.summary()["supremum_not_attained"] = r.supremum_not_attained;
}

void run_ground_state(const RunConfig& c, Artifacts& art) {
  const GroundState gs = ground_state_of(c);
  const double profile_tol = std::max(gs.ode_residual(), 1e-9);
  art.summary()["dim"] = c.dim;
  art.put("w0", gs.center_value(), 1e-9 * gs.center_value());
  art.put("energy", gs.energy(), profile_tol * std::abs(gs.energy()));
  SpectrumOptions coarse;
  coarse.radial_step *= 2.0;
  const double rough = sector_eigenvalues(c.dim, 0, [&gs](double r) { return gs.nonlinearity().df(gs.value(r)); },
                                          coarse).front();
  art.put("lambda1", gs.lambda1(), std::abs(gs.lambda1() - rough) / 3.0);
  art.summary()["kernel_dim"] = gs.kernel_dim();
  art.put("decay_amplitude", gs.decay_amplitude(), 5e-3 * gs.decay_amplitude());
  art.put("decay_rate", gs.decay_rate(), 2e-2);
  art.put("resolved_radius", gs.resolved_radius(), gs.step());
  art.put("ode_residual", gs.ode_residual(), 0.0);
  std::vector<std::vector<double>> rows;
  const double step = 0.01;
  for (int i = 0; i * step <= gs.resolved_radius(); ++i)
    rows.push_back({i * step, gs.value(i * step), gs.derivative(i * step)});
  art.table("profile", {"r", "w", "dw"}, rows);
  std::cout << "w(0) = " << gs.center_value() << "  I = " << gs.energy() << "  lambda1 = " << gs.lambda1()
            << "  kernel_dim = " << gs.kernel_dim() << '\n';
}

void run_spectrum(const RunConfig& c, Artifacts& art) {
  const GroundState gs = ground_state_of(c);
  const SpectrumOptions fine;
  SpectrumOptions coarse = fine;
  coarse.radial_step = 2.0 * fine.radial_step;
  const SpectrumReport rep = linearized_spectrum(gs, c.modes, fine);
  const SpectrumReport rough = linearized_spectrum(gs, c.modes, coarse);
  // Second-order scheme: the fine-grid error is about a third of the change.
  std::vector<std::vector<double>> rows;
  json evs = json::array();
  for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
    const double tol =
        i < rough.eigenvalues.size() ? std::abs(rep.eigenvalues[i] - rough.eigenvalues[i]) / 3.0 : fine.kernel_tol;
    rows.push_back({static_cast<double>(i), rep.eigenvalues[i], static_cast<double>(rep.sectors[i]), tol});
    evs.push_back({{"value", rep.eigenvalues[i]}, {"value_tol", tol}, {"sector", rep.sectors[i]}});
  }
  art.summary()["eigenvalues"] = evs;
  art.put("lambda1", rep.lambda1, std::abs(rep.lambda1 - rough.lambda1) / 3.0);
  art.summary()["kernel_dim"] = rep.kernel_dim;
  art.summary()["positive_count"] = rep.positive_count;
  art.summary()["nondegenerate"] = rep.kernel_dim == c.dim;
  art.table("spectrum", {"index", "eigenvalue", "sector", "tolerance"}, rows);
  std::cout << "lambda1 = " << rep.lambda1 << "  kernel_dim = " << rep.kernel_dim
            << "  positive = " << rep.positive_count << '\n';
}

void run_reduce(const RunConfig& c, Artifacts& art) {
  const GroundState gs = ground_state_of(c);
  const Grid grid = grid_of(c);
  const Configuration config = configuration_of(c);
  NewtonOptions newton;
  newton.norm.eta = c.eta;
  const ScalarModel model(grid, potential_of(c), c.delta, gs.nonlinearity(),
                          make_grid_consistent_bump(gs, grid.spacing(), default_bump_reach(grid)));
  const CorrectionResult r = solve_projected(model, config, newton);
  art.summary()["points"] = point_json(config);
  art.put("star_norm", r.star_norm, newton.tolerance);
  art.put("h1_norm", r.h1_norm, newton.tolerance);
  art.put("final_residual", r.final_residual, newton.tolerance);
  art.put("orthogonality", r.orthogonality, newton.tolerance);
  art.put("multiplier_max", r.multipliers.cwiseAbs().maxCoeff(), newton.tolerance);
  art.summary()["newton_iterations"] = r.newton_iterations;
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < r.multipliers.rows(); ++i)
    for (Eigen::Index j = 0; j < r.multipliers.cols(); ++j)
      rows.push_back({static_cast<double>(i), static_cast<double>(j), r.multipliers(i, j)});
  art.table("multipliers", {"spike", "direction", "c"}, rows);
  rows.clear();
  for (std::size_t i = 0; i < r.history.size(); ++i) rows.push_back({static_cast<double>(i), r.history[i]});
  art.table("residual_history", {"iteration", "residual"}, rows);
  if (c.dump_fields) {
    art.field("ansatz", model.component(model.ansatz(config), 0));
    art.field("phi", r.phi.front());
    art.field("solution", model.component(r.state, 0));
  }
  std::cout << "||phi||_* = " << r.star_norm << "  max|c| = " << r.multipliers.cwiseAbs().maxCoeff()
            << "  iterations = " << r.newton_iterations << '\n';
}

void run_energy(const RunConfig& c, Artifacts& art) {
  const GroundState gs = ground_state_of(c);
  const Grid grid = grid_of(c);
  const Configuration config = configuration_of(c);
  const Potential v = potential_of(c);
  const ScalarModel model(grid, v, c.delta, gs.nonlinearity(),
                          make_grid_consistent_bump(gs, grid.spacing(), default_bump_reach(grid)));
  const ReducedEnergy e = reduced_energy(model, config);
  const double predicted = predicted_energy(config, v, c.delta, gs);
  art.summary()["points"] = point_json(config);
  art.put("reduced_energy", e.value, e.breakdown.roundoff);
  art.put("quadratic_part", e.breakdown.quadratic_part, e.breakdown.roundoff);
  art.put("potential_part", e.breakdown.potential_part, e.breakdown.roundoff);
  art.put("nonlinear_part", e.breakdown.nonlinear_part, e.breakdown.roundoff);
  // The expansion drops terms of higher order in the interactions.
  art.put("predicted", predicted, std::abs(e.value - predicted));
  std::cout << "M(Q) = " << e.value << "  predicted = " << predicted << '\n';
}

void run_maximize(const RunConfig& c, Artifacts& art) {
  const GroundState gs = ground_state_of(c);
  const Grid grid = grid_of(c);
  const Potential v = potential_of(c);
  const ScalarModel model(grid, v, c.delta, gs.nonlinearity(),
                          make_grid_consistent_bump(gs, grid.spacing(), default_bump_reach(grid)));
  MaximizeOptions o = maximize_options_of(c);
  o.delta = c.delta;
  o.eta_bar = v.eta_bar;
  const MaximizerRecord r = maximize_reduced_energy(model, c.k, o);
  art.summary()["k"] = c.k;
  record_json(art, r, grid.spacing());
  art.summary()["interior"] = interior_check(r, c.rho);
  art.table("configuration", point_header(c.dim), point_rows(r.config));
  if (c.dump_fields) {
    const PolishResult p = polish_solution(model, r, o.newton);
    art.put("polished_residual", p.report.residual, o.newton.tolerance);
    art.field("solution", model.component(p.state, 0));
  }
  std::cout << "C_" << c.k << " = " << r.value << " (+- " << r.roundoff << ")\n";
}

void run_ledger(const RunConfig& c, Artifacts& art) {
  if (!c.potential) throw InvalidArgument("ledger needs --potential");
  const GroundState gs = ground_state_of(c);
  const Grid grid = grid_of(c);
  const EnergyLedger l = build_ledger(c.k_max, parse_potential(*c.potential), c.delta, gs, grid, maximize_options_of(c));
  art.put("bump_energy", l.bump_energy, l.bump_energy_spread);
  json entries = json::array();
  std::vector<std::vector<double>> rows;
  for (const LedgerEntry& e : l.entries) {
    entries.push_back({{"k", e.k},
                       {"value", e.record.value},
                       {"value_tol", e.record.roundoff},
                       {"increment", e.increment},
                       {"increment_tol", e.noise_floor},
                       {"interior", e.interior},
                       {"points", point_json(e.record.config)}});
    rows.push_back({static_cast<double>(e.k), e.record.value, e.increment, e.noise_floor});
  }
  art.summary()["entries"] = entries;
  art.summary()["accepted"] = l.accepted;
  art.summary()["supremum_not_attained"] = l.supremum_not_attained;
  if (!l.failure.empty()) art.summary()["failure"] = l.failure;
  art.table("ledger", {"k", "C_k", "increment", "noise_floor"}, rows);
  for (const LedgerEntry& e : l.entries)
    std::cout << "k = " << e.k << "  C_k = " << e.record.value << "  increment = " << e.increment
              << "  noise = " << e.noise_floor << '\n';
  std::cout << (l.accepted ? "ledger accepted" : "ledger rejected: " + l.failure) << '\n';
}

void run_system(const RunConfig& c, Artifacts& art) {
  const CouplingParams p = synchronized_amplitudes(c.mu1, c.mu2, c.beta, c.beta_star);
  art.summary()["mu1"] = c.mu1;
  art.summary()["mu2"] = c.mu2;
  art.summary()["beta"] = c.beta;
  art.summary()["admissible"] = p.admissible;
  if (!p.reason.empty()) art.summary()["reason"] = p.reason;
  if (!(p.alpha > 0.0)) throw InvalidArgument("no synchronized solution: " + p.reason);
  const double eps = std::numeric_limits<double>::epsilon();
  art.put("alpha", p.alpha, 4 * eps * p.alpha);
  art.put("gamma", p.gamma, 4 * eps * p.gamma);
  art.put("interaction_factor", interaction_factor(p), 16 * eps);
  if (c.p != 3.0) throw InvalidArgument("the coupled system is cubic; use --p 3");
  const GroundState gs = ground_state_of(c);
  const CoupledSpectrum s = coupled_spectrum(p, gs, c.modes);
  art.summary()["positive_count"] = s.positive_count;
  art.summary()["kernel_dim"] = s.kernel_dim;
  art.summary()["nondegenerate"] = s.nondegenerate;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) rows.push_back({static_cast<double>(i), s.eigenvalues[i]});
  art.table("spectrum", {"index", "eigenvalue"}, rows);
  if (!p.admissible) {
    std::cout << "coupling not admissible (" << p.reason << "); spectrum only\n";
    return;
  }
  const Grid grid = grid_of(c);
  const CoupledRun run =
      coupled_reduce_and_maximize(c.k, parse_potential(c.potential_a), parse_potential(c.potential_b), c.delta, p, gs,
                                  grid, maximize_options_of(c));
  art.summary()["k"] = c.k;
  record_json(art, run.record, grid.spacing());
  art.put("residual_u", run.residual_u, NewtonOptions{}.tolerance);
  art.put("residual_v", run.residual_v, NewtonOptions{}.tolerance);
  art.put("symmetry_gap", run.symmetry_gap, NewtonOptions{}.tolerance);
  art.summary()["local_maxima"] = run.polish.n_local_maxima;
  art.table("configuration", point_header(c.dim), point_rows(run.record.config));
  if (c.dump_fields) {
    art.field("u", run.solution.u);
    art.field("v", run.solution.v);
  }
  std::cout << "alpha = " << p.alpha << "  gamma = " << p.gamma << "  C_" << c.k << " = " << run.record.value
            << "  residual = " << std::max(run.residual_u, run.residual_v) << '\n';
}

int run_verify(const RunConfig& c, Artifacts& art) {
  VerifyOptions o;
  o.suite = c.suite;
  o.jobs = c.jobs;
  o.seed = c.seed;
  o.restarts = c.restarts;
  suite_criteria(c.suite);
  const std::vector<CriterionResult> results = run_acceptance(o);
  std::cout << format_table(results);
  json list = json::array();
  bool all = true;
  for (const CriterionResult& r : results) {
    list.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    all = all && r.pass;
  }
  art.summary()["suite"] = c.suite;
  art.summary()["criteria"] = list;
  art.summary()["all_pass"] = all;
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-spike solutions of nonlinear Schroedinger equations with slowly decaying potentials"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value file; command-line flags override it");
  RunConfig c;
  app.add_option("--dim", c.dim, "Space dimension")->check(CLI::Range(1, 3));
  app.add_option("--p", c.p, "Leading power of f(u) = u^p - a u^q");
  app.add_option("--q", c.q, "Subtracted power");
  app.add_option("--a", c.a, "Coefficient of the subtracted power")->check(CLI::NonNegativeNumber);
  app.add_option("--potential", c.potential, "Potential spec, e.g. algebraic:m=2,amplitude=1,eta_bar=0.25");
  app.add_option("--delta", c.delta, "Potential strength")->check(CLI::NonNegativeNumber);
  app.add_option("--rho", c.rho, "Minimal spike separation")->check(CLI::PositiveNumber);
  app.add_option("--eta", c.eta, "Weighted-norm rate");
  app.add_option("--half-width", c.half_width, "Grid half width L")->check(CLI::PositiveNumber);
  app.add_option("--spacing", c.spacing, "Grid spacing h")->check(CLI::Range(1e-4, 0.25));
  app.add_option("--points", c.points, "Spike centres x[,y[,z]];...");
  app.add_option("--k", c.k, "Number of spikes")->check(CLI::PositiveNumber);
  app.add_option("--k-max", c.k_max, "Largest k of the ledger")->check(CLI::Range(2, 16));
  app.add_option("--restarts", c.restarts, "Random restarts per maximisation")->check(CLI::Range(1, 1000));
  app.add_option("--modes", c.modes, "Eigenvalues to report")->check(CLI::Range(1, 1000));
  app.add_option("--seed", c.seed, "Seed of the restart sampling");
  app.add_option("--jobs", c.jobs, "Worker threads")->check(CLI::Range(1, 256));
  app.add_option("--out", c.out, "Output directory");
  app.add_flag("--dump-fields", c.dump_fields, "Write fields/*.bin and .json");
  app.add_option("--mu1", c.mu1, "System self-coupling of u")->check(CLI::PositiveNumber);
  app.add_option("--mu2", c.mu2, "System self-coupling of v")->check(CLI::PositiveNumber);
  app.add_option("--beta", c.beta, "System cross coupling");
  app.add_option("--beta-star", c.beta_star, "Bound of the admissible negative couplings");
  app.add_option("--potential-a", c.potential_a, "Potential of the u equation");
  app.add_option("--potential-b", c.potential_b, "Potential of the v equation");
  app.add_option("--suite", c.suite, "Acceptance suite: scalar-1d, system-1d or all");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"ground-state", "Radial ground state, energy and decay"},
      {"spectrum", "Spectrum of the linearized operator"},
      {"reduce", "Projected correction for fixed spike centres"},
      {"energy", "Reduced energy M(Q) for fixed spike centres"},
      {"maximize", "Maximise M over configurations of k spikes"},
      {"ledger", "Energy ledger C_1, ..., C_kmax"},
      {"system", "Coupled cubic system"},
      {"verify", "Run the acceptance suite"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Artifacts art(c.out);
    art.summary()["subcommand"] = command;
    art.summary()["seed"] = c.seed;
    int status = 0;
    if (command == "ground-state") run_ground_state(c, art);
    else if (command == "spectrum") run_spectrum(c, art);
    else if (command == "reduce") run_reduce(c, art);
    else if (command == "energy") run_energy(c, art);
    else if (command == "maximize") run_maximize(c, art);
    else if (command == "ledger") run_ledger(c, art);
    else if (command == "system") run_system(c, art);
    else status = run_verify(c, art);
    art.finish();
    return status;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const NumericalFailure& e) {
    json err{{"error", "numerical_failure"}, {"message", e.what()}, {"history", e.history()}};
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
