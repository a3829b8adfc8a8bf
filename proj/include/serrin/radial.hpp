#pragma once

// Closed-form torsion-type solutions on geodesic balls and the 1-D checks
// built on them. Everything here is analytic; it serves as the oracle for
// the 2-D finite-element solver.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "serrin/geometry.hpp"
#include "serrin/quadrature.hpp"

namespace serrin {

inline constexpr double default_cap_margin = 1e-2;

/// Area of the unit sphere S^{n-1} in R^n.
inline double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Solution of  Lap v + nKv = -1,  v = 0 on the boundary of B_R:
///   v(r) = (H(R) - H(r)) / (n h'(R)),   c = |v'(R)| = h(R) / (n h'(R)).
class RadialSolution {
public:
  RadialSolution(SpaceForm space, double R, double cap_margin = default_cap_margin)
      : space_(space), R_(R) {
    if (!(R > 0.0)) throw DomainError("ball radius R must be > 0");
    if (space.K == Curvature::Spherical && !(R < half_pi - cap_margin))
      throw DomainError("ball radius exceeds the hemisphere cap pi/2 - delta");
    const ProfileValues p = profile_eval(space.K, R);
    scale_ = 1.0 / (space.n * p.dh);
    HR_ = p.H;
    c_ = p.h * scale_;
  }

  const SpaceForm& space() const { return space_; }
  Curvature K() const { return space_.K; }
  int n() const { return space_.n; }
  double R() const { return R_; }
  double c() const { return c_; }
  double v0() const { return HR_ * scale_; }

  double v(double r) const { return (HR_ - profile_eval(space_.K, r).H) * scale_; }
  double dv(double r) const { return -profile_eval(space_.K, r).h * scale_; }
  double d2v(double r) const { return -profile_eval(space_.K, r).dh * scale_; }
  double d3v(double r) const { return -profile_eval(space_.K, r).ddh * scale_; }

  /// Radial Laplace-Beltrami of v: v'' + (n-1)(h'/h) v'. Requires r > 0.
  double laplacian(double r) const {
    const ProfileValues p = profile_eval(space_.K, r);
    return -p.dh * scale_ + (space_.n - 1) * (p.dh / p.h) * (-p.h * scale_);
  }

  /// P(v) = |grad v|^2 + (2/n) v + K v^2.
  double p_function(double r) const {
    const double a = v(r), b = dv(r);
    return b * b + 2.0 / space_.n * a + space_.k() * a * a;
  }

private:
  SpaceForm space_;
  double R_;
  double scale_;  // 1 / (n h'(R))
  double HR_;
  double c_;
};

inline RadialSolution radial_solution(Curvature K, int n, double R,
                                      double cap_margin = default_cap_margin) {
  return RadialSolution(SpaceForm(K, n), R, cap_margin);
}

namespace detail {
// Samples r_i = R i / samples, i = 1..samples. The pole is skipped.
template <class F>
double max_over_samples(double R, int samples, F&& f) {
  double worst = 0.0;
  for (int i = 1; i <= samples; ++i) worst = std::max(worst, std::abs(f(R * i / samples)));
  return worst;
}
} // namespace detail

inline double radial_pde_residual(const RadialSolution& sol, int samples) {
  const double nK = sol.n() * to_int(sol.K());
  return detail::max_over_samples(sol.R(), samples, [&](double r) {
    return sol.laplacian(r) + nK * sol.v(r) + 1.0;
  });
}

/// Hessian of a radial function: radial part v'', tangential part (h'/h) v'.
/// Both must equal -(1/n + K v).
inline double hessian_proportionality_residual(const RadialSolution& sol, int samples) {
  const double n = sol.n(), K = to_int(sol.K());
  return detail::max_over_samples(sol.R(), samples, [&](double r) {
    const ProfileValues p = profile_eval(sol.K(), r);
    const double target = -(1.0 / n + K * sol.v(r));
    return std::max(std::abs(sol.d2v(r) - target), std::abs(p.dh / p.h * sol.dv(r) - target));
  });
}

/// Max over samples of |P(v) - c^2|.
inline double p_constancy_residual(const RadialSolution& sol, int samples) {
  const double c2 = sol.c() * sol.c();
  double worst = std::abs(sol.p_function(0.0) - c2);
  return std::max(worst, detail::max_over_samples(sol.R(), samples, [&](double r) {
    return sol.p_function(r) - c2;
  }));
}

struct IdentityResiduals {
  double bochner = 0.0;
  double divergence_expansion = 0.0;
  double pohozaev = 0.0;
  double max() const { return std::max({bochner, divergence_expansion, pohozaev}); }
};

/// Pointwise identities specialised to radial fields, using
/// div(W(r) d_r) = W' + (n-1)(h'/h) W and Lap w = w'' + (n-1)(h'/h) w':
///   Bochner:   1/2 Lap(v'^2) = |Hess v|^2 + (Lap v)' v' + (n-1) K v'^2
///   expansion: div(h' v grad v) = h' v'^2 + h' v Lap v + h'' v v'
///   Pohozaev:  div(v'^2/2 X - h v' grad v) = (n-2)/2 h' v'^2 - h v' Lap v,
///              X = h d_r.
inline IdentityResiduals identity_suite_radial(const RadialSolution& sol, int samples) {
  const double n = sol.n(), K = to_int(sol.K());
  IdentityResiduals out;
  for (int i = 1; i <= samples; ++i) {
    const double r = sol.R() * i / samples;
    const ProfileValues p = profile_eval(sol.K(), r);
    const double g = p.dh / p.h;
    const double v = sol.v(r), v1 = sol.dv(r), v2 = sol.d2v(r), v3 = sol.d3v(r);
    const double lap = v2 + (n - 1) * g * v1;
    // (Lap v)' from the analytic derivatives, with (h'/h)' = (h'' h - h'^2)/h^2
    const double dg = (p.ddh * p.h - p.dh * p.dh) / (p.h * p.h);
    const double dlap = v3 + (n - 1) * (dg * v1 + g * v2);

    {
      // w = v'^2
      const double w1 = 2.0 * v1 * v2;
      const double w2 = 2.0 * v2 * v2 + 2.0 * v1 * v3;
      const double lhs = 0.5 * (w2 + (n - 1) * g * w1);
      const double hess2 = v2 * v2 + (n - 1) * (g * v1) * (g * v1);
      const double rhs = hess2 + dlap * v1 + (n - 1) * K * v1 * v1;
      out.bochner = std::max(out.bochner, std::abs(lhs - rhs));
    }
    {
      const double W = p.dh * v * v1;
      const double dW = p.ddh * v * v1 + p.dh * v1 * v1 + p.dh * v * v2;
      const double lhs = dW + (n - 1) * g * W;
      const double rhs = p.dh * v1 * v1 + p.dh * v * lap + p.ddh * v * v1;
      out.divergence_expansion = std::max(out.divergence_expansion, std::abs(lhs - rhs));
    }
    {
      // radial component: v'^2/2 h - h v' v' = -h v'^2 / 2
      const double W = -0.5 * p.h * v1 * v1;
      const double dW = -0.5 * p.dh * v1 * v1 - p.h * v1 * v2;
      const double lhs = dW + (n - 1) * g * W;
      const double rhs = 0.5 * (n - 2) * p.dh * v1 * v1 - p.h * v1 * lap;
      out.pohozaev = std::max(out.pohozaev, std::abs(lhs - rhs));
    }
  }
  return out;
}

// --- Obata ODE along a geodesic from the maximum point -------------------------

/// f(s) = a h'(s) - H(s)/n, the solution of f'' = -1/n - K f, f(0) = a,
/// f'(0) = 0. Valid for all s (no hemisphere restriction on the ODE).
inline double obata_closed_form(Curvature K, int n, double a, double s) {
  switch (K) {
  case Curvature::Flat: return a - 0.5 * s * s / n;
  case Curvature::Hyperbolic: return a * std::cosh(s) - (std::cosh(s) - 1.0) / n;
  case Curvature::Spherical: return a * std::cos(s) - (1.0 - std::cos(s)) / n;
  }
  return 0.0;
}

struct ObataTrajectory {
  Curvature K;
  int n;
  double a;
  double step;
  std::vector<double> s;
  std::vector<double> f;
  std::vector<double> df;

  double sup_error_vs_closed_form() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      worst = std::max(worst, std::abs(f[i] - obata_closed_form(K, n, a, s[i])));
    return worst;
  }

  /// Central second-difference residual of f'' + 1/n + K f at interior samples.
  double max_ode_residual() const {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      const double f2 = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (step * step);
      worst = std::max(worst, std::abs(f2 + 1.0 / n + to_int(K) * f[i]));
    }
    return worst;
  }
};

/// Classical fourth-order Runge-Kutta on (f, f'). The step is shrunk so
/// that an integer number of steps lands exactly on s_max.
inline ObataTrajectory obata_ode_solve(Curvature K, int n, double a, double s_max, double step) {
  if (!(a > 0.0)) throw DomainError("initial maximum a must be > 0");
  if (!(step > 0.0)) throw DomainError("step must be > 0");
  if (!(s_max >= 0.0)) throw DomainError("s_max must be >= 0");
  const long steps = std::max(1L, static_cast<long>(std::ceil(s_max / step - 1e-9)));
  const double dt = s_max > 0.0 ? s_max / steps : step;
  const double k = to_int(K), inv_n = 1.0 / n;

  ObataTrajectory out{K, n, a, dt, {}, {}, {}};
  out.s.reserve(steps + 1);
  out.f.reserve(steps + 1);
  out.df.reserve(steps + 1);
  double f = a, g = 0.0;
  out.s.push_back(0.0);
  out.f.push_back(f);
  out.df.push_back(g);
  if (s_max == 0.0) return out;

  auto accel = [&](double y) { return -inv_n - k * y; };
  for (long i = 0; i < steps; ++i) {
    const double k1f = g, k1g = accel(f);
    const double k2f = g + 0.5 * dt * k1g, k2g = accel(f + 0.5 * dt * k1f);
    const double k3f = g + 0.5 * dt * k2g, k3g = accel(f + 0.5 * dt * k2f);
    const double k4f = g + dt * k3g, k4g = accel(f + dt * k3f);
    f += dt / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
    g += dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    out.s.push_back((i + 1) * dt);
    out.f.push_back(f);
    out.df.push_back(g);
  }
  return out;
}

// --- hemisphere eigenfunction ---------------------------------------------------

struct EigenCheck {
  double residual;       // max |phi'' + (n-1) cot(r) phi' + n phi| on (0, pi/2)
  bool positive;         // phi > 0 on [0, pi/2)
  double boundary_value; // phi(pi/2)
};

/// First Dirichlet eigenfunction phi = cos r of the hemisphere, eigenvalue n.
inline EigenCheck hemisphere_eigen_residual(int n, int samples) {
  if (n < 2) throw DomainError("dimension n must be >= 2");
  EigenCheck out{0.0, std::cos(0.0) > 0.0, std::cos(half_pi)};
  for (int i = 1; i <= samples; ++i) {
    const double r = half_pi * i / (samples + 1);
    const double phi = std::cos(r), dphi = -std::sin(r), d2phi = -std::cos(r);
    const double res = d2phi + (n - 1) * (std::cos(r) / std::sin(r)) * dphi + n * phi;
    out.residual = std::max(out.residual, std::abs(res));
    out.positive = out.positive && phi > 0.0;
  }
  return out;
}

// --- integral Pohozaev equality on a ball ---------------------------------------

struct PohozaevCheck {
  double lhs;
  double rhs;
  double relative_residual;
};

/// c^2 int h'  =  (1 + 2/n) (int h' v - K int h v v_r)  over B_R, by 1-D
/// composite Gauss-Legendre with volume element |S^{n-1}| h^{n-1} dr.
inline PohozaevCheck pohozaev_ball_check(Curvature K, int n, double R, int quadrature_points = 512,
                                         double cap_margin = default_cap_margin) {
  if (quadrature_points < 16) throw DomainError("quadrature_points must be >= 16");
  const RadialSolution sol(SpaceForm(K, n), R, cap_margin);
  const double area = unit_sphere_area(n), k = to_int(K);
  auto vol = [&](double r) { return area * std::pow(profile_eval(K, r).h, n - 1); };
  const double I1 = composite_gauss([&](double r) { return profile_eval(K, r).dh * vol(r); }, 0.0, R,
                                    quadrature_points);
  const double I2 = composite_gauss(
      [&](double r) { return profile_eval(K, r).dh * sol.v(r) * vol(r); }, 0.0, R, quadrature_points);
  const double I3 = composite_gauss(
      [&](double r) { return profile_eval(K, r).h * sol.v(r) * sol.dv(r) * vol(r); }, 0.0, R,
      quadrature_points);
  PohozaevCheck out;
  out.lhs = sol.c() * sol.c() * I1;
  out.rhs = (1.0 + 2.0 / n) * (I2 - k * I3);
  out.relative_residual = std::abs(out.lhs - out.rhs) / std::max(std::abs(out.lhs), std::abs(out.rhs));
  return out;
}

} // namespace serrin
