#pragma once

// Post-processing of a solved field: boundary gradient statistics, the
// P-function and its maximum principle, the integral Pohozaev equality and
// the comparison against the radial closed form on balls.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "serrin/fem.hpp"
#include "serrin/geometry.hpp"
#include "serrin/mesh.hpp"
#include "serrin/radial.hpp"

namespace serrin {

class MismatchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Geodesic distance of a chart point from the origin.
inline double geodesic_radius_of(Curvature K, const Point& x) {
  return geodesic_radius(K, std::hypot(x[0], x[1]));
}

/// Nodal P = lambda^-2 |grad v|^2_model + (2/n) v + K v^2.
inline Field p_function(const Field& v, const std::vector<Point>& gradients, const TriMesh& mesh, int n = 2) {
  const double k = to_int(mesh.K());
  Field P;
  P.values.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double lam = conformal_factor(mesh.K(), mesh.nodes[i]);
    const double g2 = (gradients[i][0] * gradients[i][0] + gradients[i][1] * gradients[i][1]) / (lam * lam);
    P[i] = g2 + 2.0 / n * v[i] + k * v[i] * v[i];
  }
  return P;
}

struct MaxPrincipleReport {
  double interior_max;
  double boundary_max;
  double margin;    // interior_max - boundary_max
  double core_max;  // max over interior nodes with r <= core_fraction * rho(theta)
  double min;
};

inline MaxPrincipleReport max_principle_report(const Field& P, const TriMesh& mesh, double core_fraction = 0.8) {
  constexpr double lowest = std::numeric_limits<double>::lowest();
  MaxPrincipleReport out{lowest, lowest, 0.0, lowest, std::numeric_limits<double>::max()};
  for (std::size_t i = 0; i < P.size(); ++i) {
    out.min = std::min(out.min, P[i]);
    if (mesh.is_boundary(static_cast<int>(i))) {
      out.boundary_max = std::max(out.boundary_max, P[i]);
      continue;
    }
    out.interior_max = std::max(out.interior_max, P[i]);
    const Point& x = mesh.nodes[i];
    const double r = geodesic_radius_of(mesh.K(), x);
    if (r <= core_fraction * mesh.domain.rho(std::atan2(x[1], x[0]))) out.core_max = std::max(out.core_max, P[i]);
  }
  out.margin = out.interior_max - out.boundary_max;
  return out;
}

struct BoundaryStats {
  double mean;
  double std;  // population standard deviation, boundary-length weighted
};

inline BoundaryStats weighted_stats(const std::vector<double>& values, const std::vector<double>& weights) {
  double wsum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    wsum += weights[i];
    mean += weights[i] * values[i];
  }
  mean /= wsum;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) var += weights[i] * (values[i] - mean) * (values[i] - mean);
  return {mean, std::sqrt(var / wsum)};
}

inline BoundaryStats boundary_gradient_stats(const std::vector<Point>& gradients, const TriMesh& mesh) {
  return weighted_stats(boundary_gradient_trace(gradients, mesh), boundary_weights(mesh));
}

struct PohozaevIntegrals {
  double lhs;  // c^2 I1
  double rhs;  // (1 + 2/n)(I2 - K I3)
  double relative_residual;
  double I1, I2, I3;
};

/// I1 = int h' dA_g, I2 = int h' v dA_g, I3 = int h v v_r dA_g with
/// dA_g = lambda^2 dx and v_r = lambda^-1 (grad v . x/|x|), each by the
/// three-point edge-midpoint rule; v and grad v are interpolated linearly
/// from the nodal values.
inline PohozaevIntegrals pohozaev_integrals_2d(const Field& v, const std::vector<Point>& gradients,
                                               const TriMesh& mesh, double c, int n = 2) {
  const Curvature K = mesh.K();
  double I1 = 0.0, I2 = 0.0, I3 = 0.0;
  for (const auto& t : mesh.triangles) {
    const double w = signed_area(mesh, t) / 3.0;
    for (int e = 0; e < 3; ++e) {
      const int i = t[e], j = t[(e + 1) % 3];
      const Point x = detail::midpoint(mesh.nodes[i], mesh.nodes[j]);
      const double s = std::hypot(x[0], x[1]);
      const double lam = conformal_factor_radial(K, s);
      const ProfileValues p = profile_eval(K, geodesic_radius(K, s));
      const double vm = 0.5 * (v[i] + v[j]);
      const double gx = 0.5 * (gradients[i][0] + gradients[j][0]);
      const double gy = 0.5 * (gradients[i][1] + gradients[j][1]);
      const double vr = s > 0.0 ? (gx * x[0] + gy * x[1]) / (s * lam) : 0.0;
      const double dA = w * lam * lam;
      I1 += p.dh * dA;
      I2 += p.dh * vm * dA;
      I3 += p.h * vm * vr * dA;
    }
  }
  PohozaevIntegrals out;
  out.I1 = I1;
  out.I2 = I2;
  out.I3 = I3;
  out.lhs = c * c * I1;
  out.rhs = (1.0 + 2.0 / n) * (I2 - to_int(K) * I3);
  out.relative_residual = std::abs(out.lhs - out.rhs) / std::max(std::abs(out.lhs), std::abs(out.rhs));
  return out;
}

struct RadialComparison {
  double linf;
  double l2;  // Riemannian L2 norm of the P1 interpolant of the nodal error
};

inline RadialComparison compare_to_radial(const Field& v, const TriMesh& mesh, int n, double R) {
  const StarDomain& d = mesh.domain;
  if (!(std::abs(d.a0 - R) <= 1e-12))
    throw MismatchError("compare_to_radial: domain radius does not match R");
  for (int i = 0; i < 1024; ++i)
    if (std::abs(d.rho(two_pi * i / 1024) - R) > 1e-12)
      throw MismatchError("compare_to_radial: domain is not a geodesic ball");
  const RadialSolution exact(SpaceForm(mesh.K(), n), R, d.cap_margin);

  std::vector<double> err(v.size());
  RadialComparison out{0.0, 0.0};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = std::min(geodesic_radius_of(mesh.K(), mesh.nodes[i]), R);
    err[i] = v[i] - exact.v(r);
    out.linf = std::max(out.linf, std::abs(err[i]));
  }
  double sum = 0.0;
  for (const auto& t : mesh.triangles) {
    const double w = signed_area(mesh, t) / 3.0;
    for (int e = 0; e < 3; ++e) {
      const int i = t[e], j = t[(e + 1) % 3];
      const double lam = conformal_factor(mesh.K(), detail::midpoint(mesh.nodes[i], mesh.nodes[j]));
      const double em = 0.5 * (err[i] + err[j]);
      sum += w * lam * lam * em * em;
    }
  }
  out.l2 = std::sqrt(sum);
  return out;
}

struct VerifyReport {
  double c_mean = 0.0;
  double c_std = 0.0;
  double P_boundary_max = 0.0;
  double P_interior_max = 0.0;
  double P_min = 0.0;
  double pohozaev_lhs = 0.0;
  double pohozaev_rhs = 0.0;
  double pohozaev_relative_residual = 0.0;
  std::optional<double> linf_error;  // balls only
  std::optional<double> l2_error;

  double P_range() const { return std::max(P_boundary_max, P_interior_max) - P_min; }
};

inline VerifyReport verify(const SolvedProblem& problem, int n = 2) {
  const TriMesh& mesh = problem.mesh;
  VerifyReport rep;
  const BoundaryStats stats = boundary_gradient_stats(problem.gradients, mesh);
  rep.c_mean = stats.mean;
  rep.c_std = stats.std;
  const Field P = p_function(problem.v, problem.gradients, mesh, n);
  const MaxPrincipleReport mp = max_principle_report(P, mesh);
  rep.P_boundary_max = mp.boundary_max;
  rep.P_interior_max = mp.interior_max;
  rep.P_min = mp.min;
  const PohozaevIntegrals poho = pohozaev_integrals_2d(problem.v, problem.gradients, mesh, stats.mean, n);
  rep.pohozaev_lhs = poho.lhs;
  rep.pohozaev_rhs = poho.rhs;
  rep.pohozaev_relative_residual = poho.relative_residual;
  if (mesh.domain.is_ball()) {
    const RadialComparison cmp = compare_to_radial(problem.v, mesh, n, mesh.domain.a0);
    rep.linf_error = cmp.linf;
    rep.l2_error = cmp.l2;
  }
  return rep;
}

} // namespace serrin
