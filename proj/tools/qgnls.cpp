#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qgnls/bifurcation.hpp"
#include "qgnls/cones.hpp"
#include "qgnls/error.hpp"
#include "qgnls/flow.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/graph.hpp"
#include "qgnls/invariance_lab.hpp"
#include "qgnls/minmax.hpp"
#include "qgnls/serialize.hpp"
#include "qgnls/spectrum.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qgnls;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitRegime = 4;
constexpr double kTrajectoryKick = 0.1;  // relative H1 size of the start perturbation

struct RegimeRefusal {
  std::string inequality;
};

struct Common {
  std::string graph_path;
  std::string out_dir = "out";
  int cells = 0;
  double h = 0.025;
  std::string mass_scheme = "blended";
  int quad_order = 5;
};

struct PhysOpts {
  double p = 7.0;
  int nev = 8;
  double eig_tol = 1e-10;
  std::uint64_t eig_seed = kDefaultSeed;
  int k_samples = 100;
  std::uint64_t k_seed = 7;
  double k_safety = 1.5;
};

MassScheme parse_scheme(const std::string& s) {
  if (s == "blended") return MassScheme::Blended;
  if (s == "consistent") return MassScheme::Consistent;
  throw InvalidArgument("unknown mass scheme '" + s + "' (blended, consistent)");
}

Discretization make_discretization(const Common& c, const MetricGraph& g) {
  const auto scheme = parse_scheme(c.mass_scheme);
  if (c.cells > 0) return assemble_uniform(g, c.cells, c.quad_order, scheme);
  if (!(c.h > 0.0)) throw InvalidArgument("--cell-size must be positive");
  return assemble_by_size(g, c.h, c.quad_order, scheme);
}

json discretization_config(const Common& c, const MetricGraph& g) {
  return {{"graph", g.to_json()},
          {"graph_hash", hex64(graph_hash(g))},
          {"cells", c.cells},
          {"cell_size", c.h},
          {"mass_scheme", c.mass_scheme},
          {"quad_order", c.quad_order}};
}

json phys_config(const PhysOpts& o) {
  return {{"p", o.p},
          {"eigenpairs", o.nev},
          {"eigen_tol", o.eig_tol},
          {"eigen_seed", o.eig_seed},
          {"K_samples", o.k_samples},
          {"K_seed", o.k_seed},
          {"K_safety", o.k_safety}};
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidArgument("output directory '" + dir + "' is not writable");
  return fs::path(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, dump(j)); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact(path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception&) {
    throw MissingArtifact(path.string());
  }
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

struct Setup {
  MetricGraph graph;
  Discretization d;
  SpectralData spec;
};

Setup load_setup(const Common& c, const PhysOpts& o, int min_eigs) {
  if (c.graph_path.empty()) throw InvalidArgument("--graph is required");
  auto g = load_graph(c.graph_path);
  auto d = make_discretization(c, g);
  auto spec = eigenpairs(d, std::max(o.nev, min_eigs), o.eig_tol, o.eig_seed);
  return {std::move(g), std::move(d), std::move(spec)};
}

ThresholdReport thresholds_for(const Setup& s, const PhysOpts& o, double mu, const std::vector<int>& ks,
                               const KEstimate& kest) {
  auto thr = compute_thresholds({o.p, mu, s.graph.total_length()}, kest.K, s.spec, ks);
  thr.k_provenance = kest;
  return thr;
}

// ----------------------------------------------------------------------------

int run_spectrum(const Common& c, const PhysOpts& o) {
  const auto s = load_setup(c, o, 2);
  json config = discretization_config(c, s.graph);
  config["subcommand"] = "spectrum";
  config["eigenpairs"] = o.nev;
  config["eigen_tol"] = o.eig_tol;
  config["eigen_seed"] = o.eig_seed;
  const auto out = prepare_out(c.out_dir);
  write_json(out / "spectrum.json", artifact("spectrum", config, to_json(s.spec)));
  std::cout << "k lambda_k\n";
  for (int k = 1; k <= s.spec.count(); ++k) std::cout << k << ' ' << format_double(s.spec.lambda(k)) << '\n';
  return kExitOk;
}

int run_thresholds(const Common& c, const PhysOpts& o, double mu, std::vector<int> ks) {
  ks = sorted_unique(ks.empty() ? std::vector<int>{2} : ks);
  const auto s = load_setup(c, o, ks.back());
  const auto kest = estimate_K(s.d, o.p, o.k_samples, o.k_seed, o.k_safety);
  const auto thr = thresholds_for(s, o, mu, ks, kest);
  json config = discretization_config(c, s.graph);
  config.update(phys_config(o));
  config["subcommand"] = "thresholds";
  config["mu"] = mu;
  config["k"] = ks;
  const auto out = prepare_out(c.out_dir);
  write_json(out / "thresholds.json", artifact("thresholds", config, to_json(thr)));
  std::cout << "K " << format_double(thr.K) << "\nrho_star " << format_double(thr.rho_star) << "\nM2 "
            << format_double(thr.M2) << "\nmu1 " << format_double(thr.mu1) << "\nmu_tilde "
            << format_double(thr.mu_tilde.value) << "\nmu_j " << format_double(thr.mu_j) << '\n';
  return kExitOk;
}

// Names the first violated threshold inequality, if any.
std::optional<std::string> regime_violation(const ThresholdReport& thr, double mu) {
  auto check = [&](const std::string& name, double value) -> std::optional<std::string> {
    if (mu < value) return std::nullopt;
    std::ostringstream os;
    os << "mu < " << name << " violated: mu = " << format_double(mu) << " >= " << name << " = "
       << format_double(value);
    return os.str();
  };
  if (auto v = check("mu1", thr.mu1)) return v;
  for (const auto& t : thr.indices) {
    const auto k = std::to_string(t.k);
    if (auto v = check("mu_hat_" + k, t.mu_hat.value)) return v;
    if (auto v = check("mu_bar_" + k, t.mu_bar.value)) return v;
    if (auto v = check("mu_star_" + k, t.mu_star_used)) return v;
  }
  if (auto v = check("mu_tilde", thr.mu_tilde.value)) return v;
  return std::nullopt;
}

struct SolveOpts {
  std::string mu = "auto";
  std::vector<int> ks;
  bool strict = false;
  int grid_density = 16;
  int multistart = 3;
  std::uint64_t seed = 5;
  double residual_tol = 1e-10;
};

FlowParams solver_flow(const ThresholdReport& thr, double p, double mu, double nu) {
  FlowParams fp;
  fp.p = p;
  fp.mu = mu;
  fp.enforce_barrier = true;
  fp.rho_star = thr.rho_star;
  fp.m2 = thr.M2;
  fp.nu = nu;
  return fp;
}

int run_solve(const Common& c, const PhysOpts& o, const SolveOpts& so) {
  const auto ks = sorted_unique(so.ks.empty() ? std::vector<int>{2} : so.ks);
  const auto s = load_setup(c, o, ks.back());
  const auto kest = estimate_K(s.d, o.p, o.k_samples, o.k_seed, o.k_safety);

  double mu = 0.0;
  if (so.mu == "auto") {
    mu = 0.5 * thresholds_for(s, o, 1.0, ks, kest).mu_j;
  } else {
    try {
      std::size_t pos = 0;
      mu = std::stod(so.mu, &pos);
      if (pos != so.mu.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw InvalidArgument("--mu must be a positive number or 'auto'");
    }
  }
  if (!(mu > 0.0)) throw InvalidArgument("--mu must be positive");
  const auto thr = thresholds_for(s, o, mu, ks, kest);
  const auto violation = regime_violation(thr, mu);
  if (violation && so.strict) throw RegimeRefusal{*violation};
  if (violation) std::cerr << "warning: outside the proven regime: " << *violation << '\n';

  double nu = default_nu_cap(mu);
  json separation = json::array();
  for (int k : ks) {
    const auto sep = separation_delta(s.d, s.spec, mu, thr.rho_star, k);
    nu = std::min(nu, choose_nu(sep, default_nu_cap(mu)));
    auto js = to_json(sep);
    js["k"] = k;
    separation.push_back(js);
  }
  const auto fp = solver_flow(thr, o.p, mu, nu);
  SignChangingOptions sco;
  sco.multistart = so.multistart;
  sco.seed = so.seed;
  sco.residual_tol = so.residual_tol;
  const auto ladder = solve_ladder(s.d, s.spec, thr, ks, fp, nu, so.grid_density, sco);

  json config = discretization_config(c, s.graph);
  config.update(phys_config(o));
  config["subcommand"] = "solve";
  config["mu"] = so.mu == "auto" ? json("auto") : json(mu);
  config["k"] = ks;
  config["strict"] = so.strict;
  config["grid_density"] = so.grid_density;
  config["multistart"] = so.multistart;
  config["seed"] = so.seed;
  config["residual_tol"] = so.residual_tol;

  json payload = to_json(ladder);
  payload["mu"] = mu;
  payload["nu"] = nu;
  payload["in_regime"] = !violation.has_value();
  if (violation) payload["regime_violation"] = *violation;
  payload["separation"] = separation;
  payload["thresholds"] = to_json(thr);
  payload["arc_coordinate"] = vec_to_json(s.d.interpolate([](std::size_t, double x) { return x; }));
  payload["dof_edge"] = vec_to_json(s.d.interpolate([](std::size_t e, double) { return static_cast<double>(e); }));

  const auto out = prepare_out(c.out_dir);
  write_json(out / "ladder.json", artifact("ladder", config, payload));

  // Descent trajectory from a seeded perturbation of the energy-maximal cap point of the
  // first index; the maximiser itself is nearly critical for small mu.
  const int k0 = ks.front();
  const auto cap = build_cap(s.spec, k0, mu, so.grid_density);
  const auto level = level_estimates(s.d, cap, thr, o.p);
  const Vec top = cap.field(level.argmax);
  Vec noise(top.size());
  std::mt19937_64 rng(so.seed);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = normal(rng);
  noise -= (s.d.m_dot(noise, top) / mu) * top;
  const Vec start = top + (kTrajectoryKick * s.d.h1_norm(top) / s.d.h1_norm(noise)) * noise;
  FlowParams tf = fp;
  tf.deflation = s.spec.leading(k0);
  const auto traj = descend(s.d, start, tf);
  json tconfig = config;
  tconfig["trajectory_index"] = k0;
  tconfig["trajectory_kick"] = kTrajectoryKick;
  write_json(out / "trajectory.json", artifact("trajectory", tconfig, to_json(traj)));
  std::ostringstream tcsv;
  write_trajectory_csv(tcsv, traj, mu);
  write_text(out / "trajectory.csv", tcsv.str());

  std::cout << "mu " << format_double(mu) << "\nnu " << format_double(nu) << '\n';
  for (const auto& r : ladder.solutions)
    std::cout << r.label << ": E = " << format_double(r.energy) << ", lambda = " << format_double(r.pde_lambda)
              << ", residual = " << format_double(r.residual) << ", sign changes = " << r.sign_changes << '\n';
  return kExitOk;
}

struct BifurcateOpts {
  int k = 2;
  std::string mu_start = "auto";
  int points = 8;
  double ratio = 0.5;
  double tol = 0.05;
};

int run_bifurcate(const Common& c, const PhysOpts& o, const BifurcateOpts& bo) {
  const auto s = load_setup(c, o, bo.k);
  double mu0 = 0.0;
  json provenance;
  if (bo.mu_start == "auto") {
    const auto kest = estimate_K(s.d, o.p, o.k_samples, o.k_seed, o.k_safety);
    mu0 = 0.5 * thresholds_for(s, o, 1.0, {bo.k}, kest).at(bo.k).mu_check;
    provenance = to_json(kest);
  } else {
    try {
      mu0 = std::stod(bo.mu_start);
    } catch (const std::exception&) {
      throw InvalidArgument("--mu-start must be a positive number or 'auto'");
    }
  }
  FlowParams fp;
  fp.p = o.p;
  const auto grid = geometric_grid(mu0, bo.points, bo.ratio);
  const auto branch = sweep(s.d, s.spec, bo.k, grid, fp);
  const auto verdict = bifurcation_verdict(branch, s.spec.lambda(bo.k), bo.tol, bo.k);

  json config = discretization_config(c, s.graph);
  config.update(phys_config(o));
  config["subcommand"] = "bifurcate";
  config["k"] = bo.k;
  config["mu_start"] = bo.mu_start == "auto" ? json("auto") : json(mu0);
  config["points"] = bo.points;
  config["ratio"] = bo.ratio;
  config["tol"] = bo.tol;

  json points = json::array();
  for (const auto& b : branch) points.push_back(to_json(b));
  json payload{{"k", bo.k},
               {"lambda_k", s.spec.lambda(bo.k)},
               {"mu_start", mu0},
               {"points", points},
               {"verdict", to_json(verdict)}};
  if (!provenance.is_null()) payload["K_estimate"] = provenance;

  const auto out = prepare_out(c.out_dir);
  const auto stem = "branch_k" + std::to_string(bo.k);
  write_json(out / (stem + ".json"), artifact("branch", config, payload));
  std::ostringstream csv;
  write_branch_csv(csv, branch);
  write_text(out / (stem + ".csv"), csv.str());

  std::cout << "verdict " << (verdict.pass ? "PASS" : "FAIL") << " (" << verdict.diagnostic << ")\n"
            << "final |-lambda - lambda_k| = " << format_double(verdict.deviation.back()) << '\n';
  return kExitOk;
}

struct LabOpts {
  std::string scenario = "all";
  int starts = 100;
  int samples = 10000;
  std::uint64_t seed = 17;
  double tolerance = 1e-8;
};

LabScenario make_scenario(const std::string& name) {
  if (name == "orthant") return orthant_scenario();
  if (name == "quarter_circle") return quarter_circle_scenario();
  if (name == "halfspaces") return halfspace_scenario();
  if (name == "cone_neighbourhood") return cone_neighbourhood_scenario();
  if (name == "leaky_orthant") return leaky_orthant_scenario();
  if (name == "shifted_ball") return shifted_ball_scenario();
  if (name == "polar_cap") return polar_cap_scenario();
  throw InvalidArgument("unknown scenario '" + name + "'");
}

json lab_report(const LabScenario& sc, const LabOpts& lo) {
  json j;
  j["scenario"] = scenario_spec(sc);
  std::mt19937_64 rng(lo.seed);
  const Vec u = sc.sample_start(rng);
  try {
    j["limit_check"] = to_json(limit_check(sc, u, default_s_grid()));
  } catch (const Error& e) {
    j["limit_check"] = {{"error", e.name()}, {"message", e.what()}};
  }
  j["flow_invariance"] = to_json(flow_invariance_check(sc, lo.starts, lo.tolerance, lo.seed));
  j["oracles"] = {to_json(convexity_check(sc, lo.samples)), to_json(scaling_check(sc, lo.samples)),
                  to_json(g_membership_check(sc, std::min(lo.samples, 2000)))};
  return j;
}

int run_lab(const Common& c, const LabOpts& lo) {
  const std::vector<std::string> all{"orthant", "quarter_circle", "halfspaces", "cone_neighbourhood",
                                     "leaky_orthant", "shifted_ball", "polar_cap"};
  std::vector<std::string> names = lo.scenario == "all" ? all : std::vector<std::string>{lo.scenario};
  json reports = json::array();
  for (const auto& n : names) {
    const auto sc = make_scenario(n);
    reports.push_back(lab_report(sc, lo));
    const auto& r = reports.back();
    std::cout << n << ": flow max violation " << format_double(r["flow_invariance"]["max_violation"].get<double>())
              << (r["limit_check"].contains("decays")
                      ? std::string(", limit decays ") + (r["limit_check"]["decays"].get<bool>() ? "yes" : "no")
                      : std::string())
              << '\n';
  }
  json config{{"subcommand", "lab"},
              {"scenario", lo.scenario},
              {"starts", lo.starts},
              {"samples", lo.samples},
              {"seed", lo.seed},
              {"tolerance", lo.tolerance}};
  const auto out = prepare_out(c.out_dir);
  write_json(out / "lab.json", artifact("lab", config, {{"reports", reports}}));
  return kExitOk;
}

int run_plots(const std::string& from, const std::string& out_dir) {
  const fs::path src(from);
  if (!fs::is_directory(src)) throw MissingArtifact(from);
  const auto out = prepare_out(out_dir);
  int written = 0;

  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(src)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  for (const auto& path : entries) {
    const auto name = path.filename().string();
    if (name.rfind("branch_k", 0) == 0 && path.extension() == ".json") {
      const auto j = read_json(path);
      const auto& r = j.at("result");
      std::ostringstream os;
      os << "# bifurcation diagram, branch k = " << r.at("k").get<int>()
         << ", target lambda_k = " << format_double(r.at("lambda_k").get<double>()) << "\n# mu -lambda\n";
      for (const auto& p : r.at("points"))
        os << format_double(p.at("mu").get<double>()) << ' ' << format_double(-p.at("pde_lambda").get<double>())
           << '\n';
      write_text(out / (path.stem().string() + ".dat"), os.str());
      ++written;
    }
  }
  if (fs::exists(src / "ladder.json")) {
    const auto j = read_json(src / "ladder.json");
    std::vector<std::pair<int, double>> rows;
    for (const auto& s : j.at("result").at("solutions"))
      rows.emplace_back(s.at("k").get<int>(), s.at("energy").get<double>());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    std::ostringstream os;
    os << "# energy ladder, sorted by energy (k = 1 is the positive solution)\n# k energy\n";
    for (const auto& [k, e] : rows) os << k << ' ' << format_double(e) << '\n';
    write_text(out / "ladder.dat", os.str());
    ++written;
  }
  if (fs::exists(src / "trajectory.json")) {
    const auto j = read_json(src / "trajectory.json");
    std::ostringstream os;
    os << "# descent trajectory\n# t energy\n";
    for (const auto& s : j.at("result").at("states"))
      os << format_double(s.at("t").get<double>()) << ' ' << format_double(s.at("energy").get<double>()) << '\n';
    write_text(out / "trajectory.dat", os.str());
    ++written;
  }
  if (written == 0) throw MissingArtifact((src / "{branch_k*,ladder,trajectory}.json").string());
  std::cout << written << " plot files written to " << out.string() << '\n';
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c, bool with_graph = true) {
  if (with_graph) {
    sub->add_option("--graph", c.graph_path, "graph description (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--cells", c.cells, "cells per edge (0: use --cell-size)")->check(CLI::NonNegativeNumber);
    sub->add_option("--cell-size", c.h, "target cell size when --cells is 0")->check(CLI::PositiveNumber);
    sub->add_option("--mass-scheme", c.mass_scheme, "blended or consistent")
        ->check(CLI::IsMember({"blended", "consistent"}));
    sub->add_option("--quad-order", c.quad_order, "Gauss-Legendre points per cell")->check(CLI::Range(1, 20));
  }
  sub->add_option("--out", c.out_dir, "output directory");
}

void add_phys(CLI::App* sub, PhysOpts& o) {
  sub->add_option("--p", o.p, "nonlinearity exponent (p > 6)")
      ->check(CLI::Validator([](std::string& s) { return std::stod(s) > 6.0 ? "" : "p must exceed 6"; }, "P>6"));
  sub->add_option("--eigenpairs", o.nev, "number of eigenpairs")->check(CLI::Range(2, 200));
  sub->add_option("--eigen-tol", o.eig_tol, "eigen residual tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--eigen-seed", o.eig_seed, "eigensolver seed");
  sub->add_option("--k-samples", o.k_samples, "samples for the K estimate")->check(CLI::Range(1, 1000000));
  sub->add_option("--k-seed", o.k_seed, "seed for the K estimate");
  sub->add_option("--k-safety", o.k_safety, "safety factor for K")->check(CLI::Range(1.0, 100.0));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalized bound states of the supercritical NLS on compact metric graphs"};
  app.set_version_flag("--version", library_version());
  app.require_subcommand(1);

  Common common;
  PhysOpts phys;

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalue table of the Kirchhoff Laplacian");
  add_common(spectrum, common);
  spectrum->add_option("-k,--count", phys.nev, "number of eigenpairs")->check(CLI::Range(1, 500));
  spectrum->add_option("--tol", phys.eig_tol, "eigen residual tolerance")->check(CLI::PositiveNumber);
  spectrum->add_option("--seed", phys.eig_seed, "eigensolver seed");

  double thr_mu = 1.0;
  std::vector<int> thr_k;
  auto* thresholds = app.add_subcommand("thresholds", "mass thresholds and barrier levels");
  add_common(thresholds, common);
  add_phys(thresholds, phys);
  thresholds->add_option("--mu", thr_mu, "mass")->check(CLI::PositiveNumber);
  thresholds->add_option("--k", thr_k, "indices k")->delimiter(',');

  SolveOpts solve_opts;
  auto* solve = app.add_subcommand("solve", "positive and sign-changing solutions");
  add_common(solve, common);
  add_phys(solve, phys);
  solve->add_option("--mu", solve_opts.mu, "mass, or 'auto' for half the combined threshold");
  solve->add_option("--k", solve_opts.ks, "indices k")->delimiter(',');
  solve->add_flag("--strict", solve_opts.strict, "refuse masses above the thresholds (exit 4)");
  solve->add_option("--grid-density", solve_opts.grid_density, "cap samples per angle")->check(CLI::Range(8, 256));
  solve->add_option("--multistart", solve_opts.multistart, "perturbed starts per sample")->check(CLI::Range(0, 64));
  solve->add_option("--seed", solve_opts.seed, "multistart seed");
  solve->add_option("--residual-tol", solve_opts.residual_tol, "Newton residual tolerance")
      ->check(CLI::PositiveNumber);

  BifurcateOpts bif_opts;
  auto* bifurcate = app.add_subcommand("bifurcate", "continue a branch toward mu = 0");
  add_common(bifurcate, common);
  add_phys(bifurcate, phys);
  bifurcate->add_option("--k", bif_opts.k, "branch index")->check(CLI::Range(2, 200));
  bifurcate->add_option("--mu-start", bif_opts.mu_start, "first mass, or 'auto'");
  bifurcate->add_option("--points", bif_opts.points, "grid points")->check(CLI::Range(4, 200));
  bifurcate->add_option("--ratio", bif_opts.ratio, "geometric ratio")->check(CLI::Range(1e-6, 0.999999));
  bifurcate->add_option("--tol", bif_opts.tol, "verdict tolerance")->check(CLI::PositiveNumber);

  LabOpts lab_opts;
  auto* lab = app.add_subcommand("lab", "finite-dimensional invariance lab");
  add_common(lab, common, false);
  lab->add_option("--scenario", lab_opts.scenario, "scenario name or 'all'")
      ->check(CLI::IsMember({"all", "orthant", "quarter_circle", "halfspaces", "cone_neighbourhood", "leaky_orthant",
                             "shifted_ball", "polar_cap"}));
  lab->add_option("--starts", lab_opts.starts, "flow starts")->check(CLI::Range(1, 100000));
  lab->add_option("--samples", lab_opts.samples, "oracle samples")->check(CLI::Range(1, 10000000));
  lab->add_option("--seed", lab_opts.seed, "seed");
  lab->add_option("--tolerance", lab_opts.tolerance, "flow violation tolerance")->check(CLI::PositiveNumber);

  std::string plots_from;
  auto* plots = app.add_subcommand("plots", "gnuplot-ready .dat files from earlier artifacts");
  plots->add_option("--from", plots_from, "directory with artifacts")->required();
  add_common(plots, common, false);
  plots->get_option("--out")->description("output directory (default: the --from directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*spectrum) return run_spectrum(common, phys);
    if (*thresholds) return run_thresholds(common, phys, thr_mu, thr_k);
    if (*solve) return run_solve(common, phys, solve_opts);
    if (*bifurcate) return run_bifurcate(common, phys, bif_opts);
    if (*lab) return run_lab(common, lab_opts);
    // Without --out the .dat files land next to the artifacts they were read from.
    if (*plots) return run_plots(plots_from, plots->count("--out") > 0 ? common.out_dir : plots_from);
  } catch (const RegimeRefusal& r) {
    std::cerr << "refused (--strict): " << r.inequality << '\n';
    return kExitRegime;
  } catch (const ConfigError& e) {
    std::cerr << "config error [" << e.name() << "]: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure [" << e.name() << "]: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
