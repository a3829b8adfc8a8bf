#pragma once

// Batch front end: configuration (JSON file and/or flags, flags win),
// dispatch to the library, CSV/JSON writers.
//
// Exit codes: 0 success, 2 validation error, 3 solver failure, 1 anything
// unexpected. Errors go to the error stream as one line "error[CODE]: msg".

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "serrin/fem.hpp"
#include "serrin/geometry.hpp"
#include "serrin/mesh.hpp"
#include "serrin/radial.hpp"
#include "serrin/rigidity.hpp"
#include "serrin/verify.hpp"

namespace serrin::cli {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline const std::set<std::string>& commands() {
  static const std::set<std::string> names{"radial", "identities", "solve", "verify", "scan", "descent"};
  return names;
}

struct RunConfig {
  std::string command;
  int K = 0;
  int n = 2;
  double R = 1.0;
  std::vector<FourierMode> coeffs;
  int level = 3;
  double tol = 1e-10;
  double delta = default_cap_margin;
  std::string out_dir = ".";
  int eps_k = 3;
  std::vector<double> eps{0.0, 0.05, 0.1, 0.2};
  int max_iters = 30;
  double fd_step = 1e-3;
  int max_mode = 4;

  Curvature curvature() const { return curvature_from_int(K); }
  bool uses_mesh() const { return command != "radial" && command != "identities"; }

  StarDomain domain() const { return StarDomain{curvature(), R, coeffs, delta}; }
};

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// "k:a" or "k:a:b" entries separated by commas, e.g. "3:0.15,2:0.05:-0.01".
inline std::vector<FourierMode> parse_coeffs(const std::string& text) {
  std::vector<FourierMode> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> parts;
    std::stringstream fields(item);
    std::string part;
    while (std::getline(fields, part, ':')) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError("coeffs: expected 'k:a' or 'k:a:b', got '" + item + "'");
    try {
      std::size_t used = 0;
      FourierMode m;
      m.k = std::stoi(parts[0], &used);
      if (used != parts[0].size()) throw std::invalid_argument("k");
      m.a = std::stod(parts[1], &used);
      if (used != parts[1].size()) throw std::invalid_argument("a");
      if (parts.size() == 3) {
        m.b = std::stod(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("b");
      }
      if (m.k < 0) throw ConfigError("coeffs: mode k must be >= 0");
      out.push_back(m);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("coeffs: cannot parse '" + item + "'");
    }
  }
  return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(key + ": cannot parse '" + item + "'");
    }
  }
  return out;
}

namespace detail {

template <class T>
T json_get(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key + ": wrong type in config file");
  }
}

inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "command") cfg.command = json_get<std::string>(value, key);
    else if (key == "K") cfg.K = json_get<int>(value, key);
    else if (key == "n") cfg.n = json_get<int>(value, key);
    else if (key == "R") cfg.R = json_get<double>(value, key);
    else if (key == "coeffs") cfg.coeffs = parse_coeffs(json_get<std::string>(value, key));
    else if (key == "level") cfg.level = json_get<int>(value, key);
    else if (key == "tol") cfg.tol = json_get<double>(value, key);
    else if (key == "delta") cfg.delta = json_get<double>(value, key);
    else if (key == "out_dir") cfg.out_dir = json_get<std::string>(value, key);
    else if (key == "eps_k") cfg.eps_k = json_get<int>(value, key);
    else if (key == "eps") cfg.eps = json_get<std::vector<double>>(value, key);
    else if (key == "max_iters") cfg.max_iters = json_get<int>(value, key);
    else if (key == "fd_step") cfg.fd_step = json_get<double>(value, key);
    else if (key == "max_mode") cfg.max_mode = json_get<int>(value, key);
    else throw ConfigError(key + ": unknown configuration key");
  }
}

} // namespace detail

inline void validate(const RunConfig& cfg) {
  if (!commands().count(cfg.command)) throw ConfigError("command: unknown command '" + cfg.command + "'");
  if (cfg.K < -1 || cfg.K > 1) throw ConfigError("K: K must be -1, 0, or 1");
  if (cfg.n < 2) throw ConfigError("n: dimension must be >= 2");
  if (cfg.uses_mesh() && cfg.n != 2) throw ConfigError("n: the mesh solver supports n = 2 only");
  if (!(cfg.R > 0.0) || !std::isfinite(cfg.R)) throw ConfigError("R: radius must be > 0");
  if (cfg.level < 0 || cfg.level > 7) throw ConfigError("level: must be in [0, 7]");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol: must be > 0");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("delta: must be in (0, 1)");
  if (cfg.eps_k < 2) throw ConfigError("eps_k: perturbation mode must be >= 2");
  if (cfg.eps.empty()) throw ConfigError("eps: list must not be empty");
  for (std::size_t i = 1; i < cfg.eps.size(); ++i)
    if (!(cfg.eps[i] > cfg.eps[i - 1])) throw ConfigError("eps: values must be strictly increasing");
  if (cfg.max_iters < 0) throw ConfigError("max_iters: must be >= 0");
  if (!(cfg.fd_step > 0.0)) throw ConfigError("fd_step: must be > 0");
  if (cfg.max_mode < 2) throw ConfigError("max_mode: must be >= 2");

  const Curvature K = cfg.curvature();
  try {
    if (!cfg.uses_mesh()) {
      RadialSolution(SpaceForm(K, cfg.n), cfg.R, cfg.delta);
    } else if (cfg.command == "scan") {
      for (double e : cfg.eps) StarDomain{K, cfg.R, {{cfg.eps_k, e, 0.0}}, cfg.delta}.validate();
    } else {
      cfg.domain().validate();
      if (cfg.command == "descent")
        for (const auto& m : cfg.coeffs)
          if (m.k < 2 && (m.a != 0.0 || m.b != 0.0)) throw ConfigError("coeffs: descent modes must have k >= 2");
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("R: ") + e.what());
  } catch (const MeshError& e) {
    throw ConfigError(std::string(cfg.coeffs.empty() && cfg.command != "scan" ? "R: " : "coeffs: ") + e.what());
  }
}

struct HelpRequested {
  std::string text;
};

/// Flags override values from --config. Throws ConfigError or HelpRequested.
inline RunConfig parse_config(int argc, const char* const* argv) {
  CLI::App app{"Torsion-type overdetermined problems in space forms"};
  app.allow_windows_style_options(false);
  std::string command, config_path, coeffs, eps;
  RunConfig flags;
  app.add_option("command", command, "radial | identities | solve | verify | scan | descent");
  auto* config = app.add_option("--config", config_path, "JSON configuration file");
  auto* oK = app.add_option("--K", flags.K, "curvature: -1, 0 or 1");
  auto* on = app.add_option("--n", flags.n, "dimension");
  auto* oR = app.add_option("--R", flags.R, "geodesic radius (mean radius a0 for star domains)");
  auto* ocoeffs = app.add_option("--coeffs", coeffs, "Fourier modes 'k:a[:b],...' relative to R");
  auto* olevel = app.add_option("--level", flags.level, "mesh refinement level");
  auto* otol = app.add_option("--tol", flags.tol, "CG relative residual tolerance");
  auto* odelta = app.add_option("--delta", flags.delta, "hemisphere cap margin");
  auto* oout = app.add_option("--out-dir", flags.out_dir, "output directory");
  auto* oepsk = app.add_option("--eps-k", flags.eps_k, "scan: perturbation mode k");
  auto* oeps = app.add_option("--eps", eps, "scan: comma separated eps list");
  auto* oiters = app.add_option("--max-iters", flags.max_iters, "descent: iteration limit");
  auto* ofd = app.add_option("--fd-step", flags.fd_step, "descent: finite-difference step");
  auto* omodes = app.add_option("--max-mode", flags.max_mode, "descent: highest Fourier mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string("flags: ") + e.what());
  }

  RunConfig cfg;
  if (config->count()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("config: cannot open '" + config_path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    detail::apply_json(cfg, j);
  }
  if (!command.empty()) cfg.command = command;
  if (oK->count()) cfg.K = flags.K;
  if (on->count()) cfg.n = flags.n;
  if (oR->count()) cfg.R = flags.R;
  if (ocoeffs->count()) cfg.coeffs = parse_coeffs(coeffs);
  if (olevel->count()) cfg.level = flags.level;
  if (otol->count()) cfg.tol = flags.tol;
  if (odelta->count()) cfg.delta = flags.delta;
  if (oout->count()) cfg.out_dir = flags.out_dir;
  if (oepsk->count()) cfg.eps_k = flags.eps_k;
  if (oeps->count()) cfg.eps = parse_list("eps", eps);
  if (oiters->count()) cfg.max_iters = flags.max_iters;
  if (ofd->count()) cfg.fd_step = flags.fd_step;
  if (omodes->count()) cfg.max_mode = flags.max_mode;
  if (cfg.command.empty()) throw ConfigError("command: missing subcommand");
  validate(cfg);
  return cfg;
}

// --- writers -----------------------------------------------------------------------

inline void write_field_csv(std::ostream& os, const SolvedProblem& sol, const Field& P) {
  os << "x,y,v,P,grad_norm_g\n";
  for (std::size_t i = 0; i < sol.mesh.nodes.size(); ++i) {
    const Point& x = sol.mesh.nodes[i];
    const double g = std::hypot(sol.gradients[i][0], sol.gradients[i][1]) / conformal_factor(sol.mesh.K(), x);
    os << format_double(x[0]) << ',' << format_double(x[1]) << ',' << format_double(sol.v[i]) << ','
       << format_double(P[i]) << ',' << format_double(g) << '\n';
  }
}

inline void write_boundary_csv(std::ostream& os, const SolvedProblem& sol, const Field& P) {
  os << "theta,rho,grad_norm_g,P\n";
  const std::vector<double> trace = boundary_gradient_trace(sol.gradients, sol.mesh);
  for (std::size_t i = 0; i < sol.mesh.boundary.size(); ++i) {
    const BoundaryNode& b = sol.mesh.boundary[i];
    os << format_double(b.theta) << ',' << format_double(sol.mesh.domain.rho(b.theta)) << ','
       << format_double(trace[i]) << ',' << format_double(P[b.node]) << '\n';
  }
}

inline nlohmann::ordered_json report_json(const VerifyReport& rep) {
  nlohmann::ordered_json j;
  j["c_mean"] = rep.c_mean;
  j["c_std"] = rep.c_std;
  j["P_boundary_max"] = rep.P_boundary_max;
  j["P_interior_max"] = rep.P_interior_max;
  j["P_min"] = rep.P_min;
  j["pohozaev_lhs"] = rep.pohozaev_lhs;
  j["pohozaev_rhs"] = rep.pohozaev_rhs;
  j["pohozaev_relative_residual"] = rep.pohozaev_relative_residual;
  j["linf_error"] = rep.linf_error ? nlohmann::ordered_json(*rep.linf_error) : nlohmann::ordered_json(nullptr);
  j["l2_error"] = rep.l2_error ? nlohmann::ordered_json(*rep.l2_error) : nlohmann::ordered_json(nullptr);
  return j;
}

inline void write_scan_csv(std::ostream& os, const ScanResult& scan) {
  os << "eps,c_mean,c_std,P_range,poho_residual\n";
  for (const auto& r : scan.rows)
    os << format_double(r.eps) << ',' << format_double(r.c_mean) << ',' << format_double(r.c_std) << ','
       << format_double(r.P_range) << ',' << format_double(r.poho_residual) << '\n';
}

inline void write_descent_csv(std::ostream& os, const std::vector<DescentState>& trajectory) {
  os << "iter,J,coeff_norm\n";
  for (const auto& s : trajectory)
    os << s.iteration << ',' << format_double(s.J) << ',' << format_double(s.coeff_norm) << '\n';
}

// --- commands ------------------------------------------------------------------------

namespace detail {

inline std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  const auto path = std::filesystem::path(cfg.out_dir) / name;
  std::ofstream os(path);
  if (!os) throw ConfigError("out_dir: cannot write '" + path.string() + "'");
  return os;
}

inline void kv(std::ostream& out, const std::string& key, double value) {
  out << key << " = " << format_double(value) << '\n';
}

inline int cmd_radial(const RunConfig& cfg, std::ostream& out) {
  const RadialSolution sol(SpaceForm(cfg.curvature(), cfg.n), cfg.R, cfg.delta);
  const PohozaevCheck poho = pohozaev_ball_check(cfg.curvature(), cfg.n, cfg.R, 512, cfg.delta);
  out << "K = " << cfg.K << "\nn = " << cfg.n << '\n';
  kv(out, "R", cfg.R);
  kv(out, "v0", sol.v0());
  kv(out, "c", sol.c());
  kv(out, "poho_lhs", poho.lhs);
  kv(out, "poho_rhs", poho.rhs);
  kv(out, "poho_residual", poho.relative_residual);
  return 0;
}

inline int cmd_identities(const RunConfig& cfg, std::ostream& out) {
  const Curvature K = cfg.curvature();
  const RadialSolution sol(SpaceForm(K, cfg.n), cfg.R, cfg.delta);
  constexpr int samples = 200;
  const IdentityResiduals ids = identity_suite_radial(sol, samples);
  const double pde = radial_pde_residual(sol, samples);
  const double hess = hessian_proportionality_residual(sol, samples);
  const double pconst = p_constancy_residual(sol, samples);
  const double obata = obata_ode_solve(K, cfg.n, sol.v0(), cfg.R, 1e-3).sup_error_vs_closed_form();
  const double coarse = obata_ode_solve(K, cfg.n, sol.v0(), cfg.R, 0.1).sup_error_vs_closed_form();
  const double fine = obata_ode_solve(K, cfg.n, sol.v0(), cfg.R, 0.05).sup_error_vs_closed_form();
  const EigenCheck eig = hemisphere_eigen_residual(cfg.n, samples);

  kv(out, "pde_residual", pde);
  kv(out, "hessian_residual", hess);
  kv(out, "p_constancy_residual", pconst);
  kv(out, "bochner_residual", ids.bochner);
  kv(out, "divergence_expansion_residual", ids.divergence_expansion);
  kv(out, "pohozaev_identity_residual", ids.pohozaev);
  kv(out, "obata_sup_error", obata);
  kv(out, "obata_order", std::log2(coarse / fine));
  kv(out, "hemisphere_eigen_residual", eig.residual);
  const bool ok = std::max({pde, hess, pconst, ids.max(), eig.residual}) <= 1e-10 && obata <= 1e-8 && eig.positive;
  out << "status = " << (ok ? "pass" : "fail") << '\n';
  return 0;
}

inline SolvedProblem solve_config(const RunConfig& cfg) {
  return solve_torsion(build_level_mesh(cfg.domain(), cfg.level), cfg.tol);
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SolvedProblem sol = solve_config(cfg);
  const MeshQuality quality = mesh_quality(sol.mesh);
  if (quality.needs_warning())
    err << "warning: mesh minimum angle " << format_double(quality.min_angle_deg) << " deg is below "
        << MeshQuality::min_angle_warning_deg << " deg\n";
  const Field P = p_function(sol.v, sol.gradients, sol.mesh);
  {
    auto os = open_output(cfg, "field.csv");
    write_field_csv(os, sol, P);
  }
  {
    auto os = open_output(cfg, "boundary.csv");
    write_boundary_csv(os, sol, P);
  }
  {
    auto os = open_output(cfg, "mesh.txt");
    write_mesh(os, sol.mesh);
  }
  const BoundaryStats stats = boundary_gradient_stats(sol.gradients, sol.mesh);
  out << "nodes = " << sol.mesh.num_nodes() << "\ntriangles = " << sol.mesh.num_triangles()
      << "\ncg_iterations = " << sol.stats.iterations << '\n';
  kv(out, "c_mean", stats.mean);
  kv(out, "c_std", stats.std);
  return 0;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const VerifyReport rep = verify(solve_config(cfg));
  const std::string text = report_json(rep).dump(2) + "\n";
  auto os = open_output(cfg, "report.json");
  os << text;
  out << text;
  return 0;
}

inline int cmd_scan(const RunConfig& cfg, std::ostream& out) {
  ScanConfig sc;
  sc.level = cfg.level;
  sc.tol = cfg.tol;
  sc.cap_margin = cfg.delta;
  const ScanResult scan = perturbation_scan(cfg.curvature(), cfg.R, cfg.eps_k, cfg.eps, sc);
  std::ostringstream csv;
  write_scan_csv(csv, scan);
  auto os = open_output(cfg, "scan.csv");
  os << csv.str();
  out << csv.str();
  for (const auto& r : scan.rows)
    if (r.failed) throw SolverError("scan row eps=" + format_double(r.eps) + " failed: " + r.error, 0, 0.0);
  return 0;
}

inline int cmd_descent(const RunConfig& cfg, std::ostream& out) {
  DescentConfig dc;
  dc.level = cfg.level;
  dc.tol = cfg.tol;
  dc.max_iters = cfg.max_iters;
  dc.fd_step = cfg.fd_step;
  dc.max_mode = cfg.max_mode;
  const auto trajectory = shape_descent(cfg.domain(), dc);
  std::ostringstream csv;
  write_descent_csv(csv, trajectory);
  auto os = open_output(cfg, "descent.csv");
  os << csv.str();
  out << csv.str();
  return 0;
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_config(argc, argv);
    if (cfg.command == "radial") return detail::cmd_radial(cfg, out);
    if (cfg.command == "identities") return detail::cmd_identities(cfg, out);
    if (cfg.command == "solve") return detail::cmd_solve(cfg, out, err);
    if (cfg.command == "verify") return detail::cmd_verify(cfg, out);
    if (cfg.command == "scan") return detail::cmd_scan(cfg, out);
    return detail::cmd_descent(cfg, out);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const ConfigError& e) {
    err << "error[E_CONFIG]: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error[E_DOMAIN]: " << e.what() << '\n';
    return 2;
  } catch (const MeshError& e) {
    err << "error[E_DOMAIN]: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    err << "error[E_SOLVER]: " << e.what() << '\n';
    return 3;
  } catch (const AssemblyError& e) {
    err << "error[E_SOLVER]: " << e.what() << '\n';
    return 3;
  } catch (const LineSearchError& e) {
    err << "error[E_SOLVER]: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error[E_INTERNAL]: " << e.what() << '\n';
    return 1;
  }
}

} // namespace serrin::cli
