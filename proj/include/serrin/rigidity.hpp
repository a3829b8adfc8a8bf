#pragma once

// Numerical probes of the rigidity statement: away from geodesic balls the
// boundary gradient is not constant, and minimizing its variance over
// star-shaped domains drives the shape back to a ball.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "serrin/fem.hpp"
#include "serrin/mesh.hpp"
#include "serrin/verify.hpp"

namespace serrin {

class LineSearchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ScanRow {
  double eps = 0.0;
  double c_mean = std::numeric_limits<double>::quiet_NaN();
  double c_std = std::numeric_limits<double>::quiet_NaN();
  double P_range = std::numeric_limits<double>::quiet_NaN();
  double poho_residual = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string error;
};

struct ScanResult {
  Curvature K = Curvature::Flat;
  double R = 1.0;
  int mode = 3;
  std::vector<ScanRow> rows;
};

struct ScanConfig {
  int level = 3;
  double tol = 1e-10;
  double cap_margin = default_cap_margin;
  MeshResolution resolution{};
};

/// rho(theta) = R (1 + eps cos k theta) for each eps; mesh, solve, verify.
/// A row whose mesh or solve fails is kept and marked failed.
inline ScanResult perturbation_scan(Curvature K, double R, int k, const std::vector<double>& eps,
                                    const ScanConfig& cfg = {}) {
  if (k < 2) throw DomainError("perturbation mode k must be >= 2");
  for (std::size_t i = 1; i < eps.size(); ++i)
    if (!(eps[i] > eps[i - 1])) throw DomainError("eps values must be strictly increasing");

  ScanResult out{K, R, k, {}};
  for (double e : eps) {
    ScanRow row;
    row.eps = e;
    try {
      StarDomain domain{K, R, {{k, e, 0.0}}, cfg.cap_margin};
      const SolvedProblem sol = solve_torsion(build_level_mesh(domain, cfg.level, cfg.resolution), cfg.tol);
      const VerifyReport rep = verify(sol);
      row.c_mean = rep.c_mean;
      row.c_std = rep.c_std;
      row.P_range = rep.P_range();
      row.poho_residual = rep.pohozaev_relative_residual;
    } catch (const std::exception& ex) {
      row.failed = true;
      row.error = ex.what();
    }
    out.rows.push_back(row);
  }
  return out;
}

/// Boundary-length weighted population variance of |grad_g v| on the boundary.
inline double gradient_variance(const StarDomain& domain, int level, double tol = 1e-10,
                                MeshResolution resolution = {}) {
  const SolvedProblem sol = solve_torsion(build_level_mesh(domain, level, resolution), tol);
  const BoundaryStats stats = boundary_gradient_stats(sol.gradients, sol.mesh);
  return stats.std * stats.std;
}

struct DescentState {
  int iteration = 0;
  double J = 0.0;
  double coeff_norm = 0.0;  // sum |a_k| + |b_k|
  double step = 0.0;        // accepted step length (0 at the start)
  double grad_norm = 0.0;
  std::vector<FourierMode> modes;
};

struct DescentConfig {
  int level = 3;
  int max_iters = 30;
  double fd_step = 1e-3;
  double grad_tol = 1e-6;
  int max_halvings = 30;
  int max_mode = 4;
  double tol = 1e-10;
  MeshResolution resolution{};
};

/// Gradient descent on J = variance of the boundary gradient over the
/// Fourier coefficients (a_k, b_k), k = 2..max_mode, of a star domain with
/// fixed mean radius. Central-difference gradient; each iteration starts
/// from the step 2J/|grad J|^2 (exact for J quadratic and vanishing at the
/// minimum) and halves until J decreases.
inline std::vector<DescentState> shape_descent(const StarDomain& initial, const DescentConfig& cfg = {}) {
  int max_mode = cfg.max_mode;
  for (const auto& m : initial.modes) {
    if (m.k < 2 && (m.a != 0.0 || m.b != 0.0))
      throw DomainError("descent modes must satisfy k >= 2 (k = 0, 1 are degenerate directions)");
    max_mode = std::max(max_mode, m.k);
  }
  if (max_mode < 2) throw DomainError("descent needs max_mode >= 2");
  initial.validate();

  const int count = max_mode - 1;
  std::vector<double> x(2 * count, 0.0);
  for (const auto& m : initial.modes)
    if (m.k >= 2) {
      x[2 * (m.k - 2)] += m.a;
      x[2 * (m.k - 2) + 1] += m.b;
    }
  auto domain_of = [&](const std::vector<double>& c) {
    StarDomain d{initial.K, initial.a0, {}, initial.cap_margin};
    for (int k = 2; k <= max_mode; ++k) d.modes.push_back({k, c[2 * (k - 2)], c[2 * (k - 2) + 1]});
    return d;
  };
  auto objective = [&](const std::vector<double>& c) {
    return gradient_variance(domain_of(c), cfg.level, cfg.tol, cfg.resolution);
  };
  auto admissible = [&](const std::vector<double>& c) {
    try {
      domain_of(c).validate();
      return true;
    } catch (const MeshError&) {
      return false;
    }
  };
  auto record = [&](int it, double J, double step, double gnorm) {
    const StarDomain d = domain_of(x);
    return DescentState{it, J, d.coefficient_norm(), step, gnorm, d.modes};
  };

  double J = objective(x);
  std::vector<DescentState> trajectory{record(0, J, 0.0, 0.0)};
  for (int it = 1; it <= cfg.max_iters; ++it) {
    std::vector<double> g(x.size());
    double g2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::vector<double> xp = x, xm = x;
      xp[i] += cfg.fd_step;
      xm[i] -= cfg.fd_step;
      g[i] = (objective(xp) - objective(xm)) / (2.0 * cfg.fd_step);
      g2 += g[i] * g[i];
    }
    const double gnorm = std::sqrt(g2);
    trajectory.back().grad_norm = gnorm;
    if (gnorm <= cfg.grad_tol) break;

    double t = 2.0 * J / g2;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h, t *= 0.5) {
      std::vector<double> trial = x;
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] -= t * g[i];
      if (!admissible(trial)) continue;
      const double Jt = objective(trial);
      if (Jt < J) {
        x = std::move(trial);
        J = Jt;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw LineSearchError("line search failed after " + std::to_string(cfg.max_halvings) + " halvings at iteration " +
                            std::to_string(it));
    trajectory.push_back(record(it, J, t, 0.0));
  }
  return trajectory;
}

} // namespace serrin
