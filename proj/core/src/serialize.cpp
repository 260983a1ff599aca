#include "qgnls/serialize.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace qgnls {

using nlohmann::json;

std::string library_version() { return QGNLS_VERSION; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

std::string config_hash(const json& config) { return hex64(fnv1a64(config.dump())); }

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

Vec vec_from_json(const json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json to_json(const SpectralData& s, bool with_functions) {
  json j;
  json table = json::array();
  for (int k = 1; k <= s.count(); ++k) table.push_back({{"k", k}, {"lambda", number(s.lambda(k))}});
  j["eigenvalues"] = table;
  j["iterations"] = s.iterations;
  j["max_residual"] = number(s.max_residual);
  j["orthogonality_error"] = number(s.orthogonality_error);
  j["seed"] = s.seed;
  j["tol"] = number(s.tol);
  json gaps = json::array();
  for (int k : spectral_gap_indices(s)) gaps.push_back(k);
  j["admissible_indices"] = gaps;
  if (with_functions) {
    json f = json::array();
    for (int k = 1; k <= s.count(); ++k) f.push_back(vec_to_json(s.phi(k)));
    j["eigenfunctions"] = f;
  }
  return j;
}

json to_json(const KEstimate& k) {
  return {{"K", number(k.K)},
          {"max_gn_quotient", number(k.max_gn_quotient)},
          {"max_mass_gn_quotient", number(k.max_mass_gn_quotient)},
          {"safety_factor", number(k.safety_factor)},
          {"n_samples", k.n_samples},
          {"skipped", k.skipped},
          {"seed", k.seed}};
}

json to_json(const RootResult& r) {
  return {{"equation", r.equation},
          {"value", number(r.value)},
          {"residual", number(r.residual)},
          {"iterations", r.iterations},
          {"monotone", r.monotone}};
}

json to_json(const IndexThresholds& t) {
  json j{{"k", t.k},
         {"lambda_k", number(t.lambda_k)},
         {"lambda_km1", number(t.lambda_km1)},
         {"mu_hat", to_json(t.mu_hat)},
         {"mu_bar", to_json(t.mu_bar)},
         {"mu_star", to_json(t.mu_star)},
         {"mu_star_used", number(t.mu_star_used)},
         {"mu_check", number(t.mu_check)}};
  if (t.mu_star_pair) j["mu_star_pair"] = to_json(*t.mu_star_pair);
  return j;
}

json to_json(const ThresholdReport& r) {
  json j{{"p", number(r.params.p)},
         {"mu", number(r.params.mu)},
         {"ell", number(r.params.ell)},
         {"K", number(r.K)},
         {"b", number(r.b)},
         {"rho_star", number(r.rho_star)},
         {"M1", number(r.M1)},
         {"M2", number(r.M2)},
         {"M1_floor", number(r.M1_floor)},
         {"mu1", number(r.mu1)},
         {"mu_tilde", to_json(r.mu_tilde)},
         {"mu_j", number(r.mu_j)},
         {"caveat", r.caveat}};
  if (r.k_provenance) j["K_estimate"] = to_json(*r.k_provenance);
  json idx = json::array();
  for (const auto& t : r.indices) idx.push_back(to_json(t));
  j["indices"] = idx;
  return j;
}

json to_json(const ConeReport& c) {
  return {{"dist_plus", number(c.dist_plus)},
          {"dist_minus", number(c.dist_minus)},
          {"nu", number(c.nu)},
          {"class", to_string(c.classification)}};
}

json to_json(const SeparationEstimate& s) {
  return {{"delta", number(s.delta)},
          {"samples", s.samples},
          {"modes_used", s.modes_used},
          {"empty_set", s.empty_set},
          {"dist_plus_at_min", number(s.dist_plus_at_min)},
          {"dist_minus_at_min", number(s.dist_minus_at_min)}};
}

json to_json(const TrajectoryState& s) {
  return {{"t", number(s.t)},
          {"energy", number(s.energy)},
          {"mass", number(s.mass)},
          {"grad_norm", number(s.h1_norm_grad)},
          {"lambda_u", number(s.lambda_u)},
          {"kinetic", number(s.kinetic)},
          {"cone", to_string(s.cone)},
          {"dist_plus", number(s.dist_plus)},
          {"dist_minus", number(s.dist_minus)},
          {"h", number(s.h)},
          {"y", number(s.y)}};
}

json to_json(const Trajectory& t) {
  json states = json::array();
  for (const auto& s : t.states) states.push_back(to_json(s));
  return {{"reason", to_string(t.reason)},
          {"steps", t.steps},
          {"rejected_steps", t.rejected_steps},
          {"min_lambda_u", number(t.min_lambda_u)},
          {"max_lambda_u", number(t.max_lambda_u)},
          {"final_grad_norm", number(t.final_grad_norm)},
          {"states", states}};
}

json to_json(const AuditReport& a) {
  return {{"applicable", a.applicable},
          {"exited", a.exited},
          {"exit_time", number(a.exit_time)},
          {"exit_index", a.exit_index},
          {"in_regime", a.in_regime},
          {"violation", a.violation},
          {"g_checks", a.g_checks},
          {"g_failures", a.g_failures},
          {"worst_g_ratio", number(a.worst_g_ratio)},
          {"g_ok_at_exit", a.g_ok_at_exit},
          {"note", a.note}};
}

json to_json(const LevelReport& l, bool with_energies) {
  json j{{"k", l.k},
         {"c_lower_bar", number(l.c_lower_bar)},
         {"c_underbar", number(l.c_underbar)},
         {"sup_Q", number(l.sup_Q)},
         {"M2", number(l.m2)},
         {"half_lambda_mu", number(l.half_lambda_mu)},
         {"cap_in_ball", l.cap_in_ball},
         {"regime_ok", l.regime_ok},
         {"separation_ok", l.separation_ok},
         {"argmax", l.argmax},
         {"cap_samples", l.energies.size()}};
  if (with_energies) {
    json e = json::array();
    for (double x : l.energies) e.push_back(number(x));
    j["energies"] = e;
  }
  return j;
}

json to_json(const SolutionRecord& s, bool with_field) {
  json j{{"kind", s.kind},
         {"k", s.k},
         {"label", s.label},
         {"p", number(s.p)},
         {"mu", number(s.mu)},
         {"energy", number(s.energy)},
         {"pde_lambda", number(s.pde_lambda)},
         {"tested_lambda", number(s.tested_lambda)},
         {"lambda_u", number(s.lambda_u)},
         {"residual", number(s.residual)},
         {"mass_error", number(s.mass_error)},
         {"kinetic", number(s.kinetic)},
         {"p_integral", number(s.p_integral)},
         {"h1_norm", number(s.h1_norm)},
         {"max_flux", number(s.max_flux)},
         {"nodal_min", number(s.nodal_min)},
         {"nodal_max", number(s.nodal_max)},
         {"sign_changing", s.sign_changing},
         {"sign_changes", s.sign_changes},
         {"cone", to_json(s.cone)},
         {"bracket_low", number(s.bracket_low)},
         {"bracket_high", number(s.bracket_high)},
         {"in_bracket", s.in_bracket},
         {"starts_tried", s.starts_tried},
         {"starts_converged", s.starts_converged}};
  if (with_field) j["u"] = vec_to_json(s.u);
  return j;
}

json to_json(const Ladder& l, bool with_fields) {
  json sols = json::array();
  for (const auto& s : l.solutions) sols.push_back(to_json(s, with_fields));
  json mirrors = json::array();
  for (const auto& s : l.mirrors) mirrors.push_back(to_json(s, false));
  json levels = json::array();
  for (const auto& x : l.levels) levels.push_back(to_json(x));
  return {{"solutions", sols},
          {"mirrors", mirrors},
          {"levels", levels},
          {"ordering_ok", l.ordering_ok},
          {"min_pairwise_distance", number(l.min_pairwise_distance)}};
}

json to_json(const BranchPoint& b, bool with_field) {
  json j{{"mu", number(b.mu)},
         {"pde_lambda", number(b.pde_lambda)},
         {"lambda_u", number(b.lambda_u)},
         {"energy", number(b.energy)},
         {"energy_ratio", number(b.energy_ratio)},
         {"kinetic_ratio", number(b.kinetic_ratio)},
         {"p_norm_ratio", number(b.p_norm_ratio)},
         {"h1_norm", number(b.h1_norm)},
         {"residual", number(b.residual)},
         {"phi_overlap", number(b.phi_overlap)},
         {"sign_changing", b.sign_changing},
         {"cone", to_string(b.cone)},
         {"newton_iterations", b.newton_iterations},
         {"used_descent", b.used_descent}};
  if (with_field) j["u"] = vec_to_json(b.u);
  return j;
}

namespace {
json doubles(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}
json ints(const std::vector<int>& v) {
  json a = json::array();
  for (int x : v) a.push_back(x);
  return a;
}
}  // namespace

json to_json(const BifurcationVerdict& v) {
  return {{"k", v.k},
          {"target", number(v.target)},
          {"tol", number(v.tol)},
          {"mu", doubles(v.mu)},
          {"deviation", doubles(v.deviation)},
          {"h1_norm", doubles(v.h1_norm)},
          {"energy_deviation", doubles(v.energy_deviation)},
          {"kinetic_deviation", doubles(v.kinetic_deviation)},
          {"p_norm_drop", number(v.p_norm_drop)},
          {"deviation_decreasing", v.deviation_decreasing},
          {"final_deviation_ok", v.final_deviation_ok},
          {"h1_decreasing", v.h1_decreasing},
          {"h1_bound_ok", v.h1_bound_ok},
          {"energy_ok", v.energy_ok},
          {"kinetic_ok", v.kinetic_ok},
          {"p_norm_ok", v.p_norm_ok},
          {"cone_clean", v.cone_clean},
          {"verdict", v.pass ? "PASS" : "FAIL"},
          {"diagnostic", v.diagnostic}};
}

json to_json(const LimitCheckReport& r) {
  json m = json::array();
  for (const auto& s : r.method) m.push_back(s);
  return {{"scenario", r.scenario},
          {"s", doubles(r.s)},
          {"entries", doubles(r.entries)},
          {"method", m},
          {"slope", number(r.slope)},
          {"C", number(r.C)},
          {"final_entry", number(r.final_entry)},
          {"tangency_error", number(r.tangency_error)},
          {"decays", r.decays}};
}

json to_json(const FlowInvarianceReport& r) {
  return {{"scenario", r.scenario},
          {"starts", r.starts},
          {"T", number(r.T)},
          {"h", number(r.h)},
          {"tolerance", number(r.tolerance)},
          {"max_violation", number(r.max_violation)},
          {"max_violation_half", number(r.max_violation_half)},
          {"richardson_ratio", number(r.richardson_ratio)},
          {"max_tangency_error", number(r.max_tangency_error)},
          {"max_mass_error", number(r.max_mass_error)},
          {"violating_starts", ints(r.violating_starts)},
          {"flagged_starts", ints(r.flagged_starts)},
          {"pass", r.pass}};
}

json to_json(const OracleReport& r) {
  return {{"check", r.check}, {"samples", r.samples}, {"violations", r.violations}, {"worst", number(r.worst)}};
}

json to_json(const GConeReport& r) {
  return {{"sign", r.sign},
          {"nu", number(r.nu)},
          {"samples", r.samples},
          {"checks", r.checks},
          {"failures", r.failures},
          {"negative_lambda_u", r.negative_lambda},
          {"worst_ratio", number(r.worst_ratio)},
          {"in_regime", r.in_regime},
          {"pass", r.pass}};
}

json scenario_spec(const LabScenario& sc) {
  json S = json::array(), M = json::array();
  for (int i = 0; i < sc.n; ++i) {
    S.push_back(vec_to_json(sc.S_lab.row(i).transpose()));
    M.push_back(vec_to_json(sc.M_lab.row(i).transpose()));
  }
  json w = json::array();
  for (const auto& s : sc.warnings) w.push_back(s);
  json j{{"name", sc.name},
         {"n", sc.n},
         {"mu", number(sc.mu)},
         {"T", number(sc.T)},
         {"h", number(sc.h)},
         {"scaling_by_construction", sc.scaling_by_construction},
         {"S_lab", S},
         {"M_lab", M},
         {"warnings", w}};
  j["hash"] = config_hash(j);
  return j;
}

json artifact(std::string_view kind, const json& config, json payload) {
  return {{"schema", std::string(kSchemaVersion)},
          {"kind", std::string(kind)},
          {"library_version", library_version()},
          {"config", config},
          {"config_hash", config_hash(config)},
          {"result", std::move(payload)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_branch_csv(std::ostream& os, const std::vector<BranchPoint>& branch) {
  os << "mu,pde_lambda,energy_ratio,kinetic_ratio,p_norm_ratio,h1_norm\n";
  for (const auto& b : branch) {
    os << format_double(b.mu) << ',' << format_double(b.pde_lambda) << ',' << format_double(b.energy_ratio) << ','
       << format_double(b.kinetic_ratio) << ',' << format_double(b.p_norm_ratio) << ',' << format_double(b.h1_norm)
       << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double mu) {
  os << "t,E,mass_err,grad_norm,lambda_u,kinetic,cone_class\n";
  for (const auto& st : traj.states) {
    os << format_double(st.t) << ',' << format_double(st.energy) << ',' << format_double(st.mass - mu) << ','
       << format_double(st.h1_norm_grad) << ',' << format_double(st.lambda_u) << ',' << format_double(st.kinetic)
       << ',' << to_string(st.cone) << '\n';
  }
}

}  // namespace qgnls
