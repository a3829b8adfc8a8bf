#pragma once

// Warped-product profiles of the three normalized space forms and the
// planar conformal charts used by the 2-D solver.
//
//   K =  0 : h(r) = r,       chart = Euclidean plane
//   K = -1 : h(r) = sinh r,  chart = Poincare disk,  lambda = 2/(1-|x|^2)
//   K = +1 : h(r) = sin r,   chart = stereographic image of the upper
//                            hemisphere (unit disk), lambda = 2/(1+|x|^2)

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace serrin {

class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

enum class Curvature : int { Hyperbolic = -1, Flat = 0, Spherical = 1 };

inline int to_int(Curvature K) { return static_cast<int>(K); }

inline Curvature curvature_from_int(int value) {
  switch (value) {
  case -1: return Curvature::Hyperbolic;
  case 0: return Curvature::Flat;
  case 1: return Curvature::Spherical;
  default: throw DomainError("K must be -1, 0, or 1");
  }
}

inline constexpr double half_pi = std::numbers::pi / 2.0;

struct SpaceForm {
  Curvature K = Curvature::Flat;
  int n = 2;

  SpaceForm() = default;
  SpaceForm(Curvature curvature, int dim) : K(curvature), n(dim) {
    if (n < 2) throw DomainError("dimension n must be >= 2");
  }
  double k() const { return to_int(K); }
};

/// Values of the warping profile at one radius.
struct ProfileValues {
  double h;    // h(r)
  double dh;   // h'(r)
  double ddh;  // h''(r) = -K h(r)
  double H;    // int_0^r h
};

/// Closed-form profile; throws DomainError for r < 0 or, on the sphere,
/// for r >= pi/2.
inline ProfileValues profile_eval(Curvature K, double r) {
  if (!(r >= 0.0)) throw DomainError("profile radius must be >= 0");
  switch (K) {
  case Curvature::Flat:
    return {r, 1.0, 0.0, 0.5 * r * r};
  case Curvature::Hyperbolic: {
    const double s = std::sinh(r);
    // cosh r - 1 = 2 sinh^2(r/2), accurate near the pole
    const double sh = std::sinh(0.5 * r);
    return {s, std::cosh(r), s, 2.0 * sh * sh};
  }
  case Curvature::Spherical: {
    if (r >= half_pi) throw DomainError("spherical radius must be < pi/2");
    const double s = std::sin(r);
    const double sh = std::sin(0.5 * r);
    return {s, std::cos(r), -s, 2.0 * sh * sh};
  }
  }
  throw DomainError("invalid curvature");
}

// --- conformal disk models (n = 2) -----------------------------------------

inline double conformal_factor_radial(Curvature K, double s) {
  switch (K) {
  case Curvature::Flat: return 1.0;
  case Curvature::Hyperbolic:
    if (!(s < 1.0)) throw DomainError("point outside the Poincare disk");
    return 2.0 / (1.0 - s * s);
  case Curvature::Spherical:
    if (!(s <= 1.0)) throw DomainError("point outside the hemisphere chart");
    return 2.0 / (1.0 + s * s);
  }
  throw DomainError("invalid curvature");
}

/// lambda(x): the metric is lambda^2 times the Euclidean one. For K != 0
/// the chart is the unit disk; the equator |x| = 1 of the hemisphere is
/// accepted, everything beyond it is not.
inline double conformal_factor(Curvature K, std::array<double, 2> x) {
  return conformal_factor_radial(K, std::hypot(x[0], x[1]));
}

/// Geodesic distance from the origin of a point at model radius s.
inline double geodesic_radius(Curvature K, double s) {
  if (!(s >= 0.0)) throw DomainError("model radius must be >= 0");
  switch (K) {
  case Curvature::Flat: return s;
  case Curvature::Hyperbolic:
    if (!(s < 1.0)) throw DomainError("model radius must be < 1");
    return 2.0 * std::atanh(s);
  case Curvature::Spherical:
    if (!(s < 1.0)) throw DomainError("model radius must be < 1");
    return 2.0 * std::atan(s);
  }
  throw DomainError("invalid curvature");
}

inline double model_radius(Curvature K, double r) {
  if (!(r >= 0.0)) throw DomainError("geodesic radius must be >= 0");
  switch (K) {
  case Curvature::Flat: return r;
  case Curvature::Hyperbolic: return std::tanh(0.5 * r);
  case Curvature::Spherical:
    if (!(r < half_pi)) throw DomainError("spherical radius must be < pi/2");
    return std::tan(0.5 * r);
  }
  throw DomainError("invalid curvature");
}

/// ds/dr along a radial ray, i.e. 1/lambda(s(r)).
inline double model_radius_derivative(Curvature K, double r) {
  const double s = model_radius(K, r);
  switch (K) {
  case Curvature::Flat: return 1.0;
  case Curvature::Hyperbolic: return 0.5 * (1.0 - s * s);
  case Curvature::Spherical: return 0.5 * (1.0 + s * s);
  }
  throw DomainError("invalid curvature");
}

} // namespace serrin
