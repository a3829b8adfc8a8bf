#pragma once

// Structured polar triangulations of star-shaped geodesic domains in the
// 2-D conformal charts.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "serrin/geometry.hpp"
#include "serrin/radial.hpp"

namespace serrin {

using Point = std::array<double, 2>;
using Triangle = std::array<int, 3>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

class MeshError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct FourierMode {
  int k = 0;
  double a = 0.0;  // cos coefficient
  double b = 0.0;  // sin coefficient
};

/// rho(theta) = a0 (1 + sum_k a_k cos k theta + b_k sin k theta), geodesic units.
struct StarDomain {
  Curvature K = Curvature::Flat;
  double a0 = 1.0;
  std::vector<FourierMode> modes;
  double cap_margin = default_cap_margin;

  static StarDomain ball(Curvature K, double R, double cap_margin = default_cap_margin) {
    return StarDomain{K, R, {}, cap_margin};
  }

  double rho(double theta) const {
    double sum = 1.0;
    for (const auto& m : modes) sum += m.a * std::cos(m.k * theta) + m.b * std::sin(m.k * theta);
    return a0 * sum;
  }

  double drho(double theta) const {
    double sum = 0.0;
    for (const auto& m : modes) sum += m.k * (-m.a * std::sin(m.k * theta) + m.b * std::cos(m.k * theta));
    return a0 * sum;
  }

  bool is_ball() const {
    return std::all_of(modes.begin(), modes.end(),
                       [](const FourierMode& m) { return m.a == 0.0 && m.b == 0.0; });
  }

  double coefficient_norm() const {
    double sum = 0.0;
    for (const auto& m : modes) sum += std::abs(m.a) + std::abs(m.b);
    return sum;
  }

  /// Throws MeshError when rho <= 0 somewhere or, on the sphere, when
  /// max rho exceeds pi/2 - cap_margin.
  void validate(int samples = 4096) const {
    if (!(a0 > 0.0)) throw MeshError("invalid domain: a0 must be > 0");
    for (const auto& m : modes)
      if (m.k < 0) throw MeshError("invalid domain: negative Fourier mode");
    double lo = rho(0.0), hi = lo;
    for (int i = 1; i < samples; ++i) {
      const double value = rho(two_pi * i / samples);
      lo = std::min(lo, value);
      hi = std::max(hi, value);
    }
    if (!(lo > 0.0)) throw MeshError("invalid domain: rho must be positive");
    if (K == Curvature::Spherical && !(hi <= half_pi - cap_margin))
      throw MeshError("invalid domain: rho exceeds the hemisphere cap pi/2 - delta");
  }

  /// Model-chart point on the boundary curve at angle theta.
  Point boundary_point(double theta) const {
    const double s = model_radius(K, rho(theta));
    return {s * std::cos(theta), s * std::sin(theta)};
  }

  /// Outward unit normal (model chart) of the boundary curve at theta. The
  /// chart is conformal, so this is also the geodesic normal direction.
  Point outward_normal(double theta) const {
    const double r = rho(theta);
    const double s = model_radius(K, r);
    const double ds = model_radius_derivative(K, r) * drho(theta);
    const double c = std::cos(theta), sn = std::sin(theta);
    const double tx = ds * c - s * sn, ty = ds * sn + s * c;
    const double len = std::hypot(tx, ty);
    return {ty / len, -tx / len};
  }
};

struct BoundaryNode {
  int node;
  double theta;
  Point normal;
};

struct TriMesh {
  StarDomain domain;
  std::vector<Point> nodes;
  std::vector<Triangle> triangles;
  std::vector<char> boundary_flag;
  std::vector<BoundaryNode> boundary;  // sorted by theta
  double h_mesh = 0.0;                 // longest model edge
  // (t, theta) with geodesic radius t * rho(theta); empty for meshes not
  // built by build_star_mesh, which then refine by straight midpoints
  std::vector<Point> polar;

  Curvature K() const { return domain.K; }
  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  bool is_boundary(int i) const { return boundary_flag[i] != 0; }
};

inline double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

inline double signed_area(const TriMesh& mesh, const Triangle& t) {
  return signed_area(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
}

namespace detail {

inline double wrap_angle(double theta) {
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  return t;
}

inline double longest_edge(const std::vector<Point>& nodes, const std::vector<Triangle>& tris) {
  double h = 0.0;
  for (const auto& t : tris)
    for (int e = 0; e < 3; ++e) {
      const Point& p = nodes[t[e]];
      const Point& q = nodes[t[(e + 1) % 3]];
      h = std::max(h, std::hypot(p[0] - q[0], p[1] - q[1]));
    }
  return h;
}

inline void finalize_boundary(TriMesh& mesh) {
  std::sort(mesh.boundary.begin(), mesh.boundary.end(),
            [](const BoundaryNode& x, const BoundaryNode& y) { return x.theta < y.theta; });
  for (auto& b : mesh.boundary) b.normal = mesh.domain.outward_normal(b.theta);
  mesh.h_mesh = longest_edge(mesh.nodes, mesh.triangles);
}

inline Point polar_point(const StarDomain& domain, double t, double theta) {
  if (t == 0.0) return {0.0, 0.0};
  const double r = t == 1.0 ? domain.rho(theta) : t * domain.rho(theta);
  const double s = model_radius(domain.K, r);
  return {s * std::cos(theta), s * std::sin(theta)};
}

inline Point midpoint_of(const Point& p, const Point& q) { return {0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])}; }

/// Angle halfway along the shorter arc from a to b.
inline double mid_angle(double a, double b) {
  double d = b - a;
  if (d > std::numbers::pi) d -= two_pi;
  if (d < -std::numbers::pi) d += two_pi;
  return wrap_angle(a + 0.5 * d);
}

inline std::uint64_t edge_key(int i, int j) {
  const auto lo = static_cast<std::uint64_t>(std::min(i, j));
  const auto hi = static_cast<std::uint64_t>(std::max(i, j));
  return (hi << 32) | lo;
}

} // namespace detail

/// Pole node, `rings` rings graded uniformly in geodesic radius up to
/// rho(theta), `sectors` nodes per ring.
inline TriMesh build_star_mesh(const StarDomain& domain, int rings, int sectors) {
  if (rings < 2) throw MeshError("invalid mesh: rings must be >= 2");
  if (sectors < 8) throw MeshError("invalid mesh: sectors must be >= 8");
  domain.validate();

  TriMesh mesh;
  mesh.domain = domain;
  mesh.nodes.reserve(1 + static_cast<std::size_t>(rings) * sectors);
  mesh.nodes.push_back({0.0, 0.0});
  mesh.polar.push_back({0.0, 0.0});
  for (int j = 1; j <= rings; ++j)
    for (int i = 0; i < sectors; ++i) {
      const double theta = two_pi * i / sectors;
      const double t = j == rings ? 1.0 : static_cast<double>(j) / rings;
      mesh.nodes.push_back(detail::polar_point(domain, t, theta));
      mesh.polar.push_back({t, theta});
    }
  auto id = [&](int ring, int sector) { return 1 + (ring - 1) * sectors + (sector % sectors); };

  for (int i = 0; i < sectors; ++i) mesh.triangles.push_back({0, id(1, i), id(1, i + 1)});
  for (int j = 1; j < rings; ++j)
    for (int i = 0; i < sectors; ++i) {
      const int a = id(j, i), b = id(j + 1, i), c = id(j + 1, i + 1), d = id(j, i + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }

  mesh.boundary_flag.assign(mesh.nodes.size(), 0);
  for (int i = 0; i < sectors; ++i) {
    const int node = id(rings, i);
    mesh.boundary_flag[node] = 1;
    mesh.boundary.push_back({node, two_pi * i / sectors, {}});
  }
  detail::finalize_boundary(mesh);
  return mesh;
}

/// Regular 4-way subdivision. On star meshes midpoints are taken in the
/// (t, theta) parameters, so boundary midpoints land on the curve and the
/// result is the polar mesh of twice the resolution.
inline TriMesh refine(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, int> edge_count;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) ++edge_count[detail::edge_key(t[e], t[(e + 1) % 3])];

  const bool polar = mesh.polar.size() == mesh.nodes.size();
  TriMesh out;
  out.domain = mesh.domain;
  out.nodes = mesh.nodes;
  out.polar = mesh.polar;
  out.boundary_flag = mesh.boundary_flag;
  out.boundary = mesh.boundary;
  out.triangles.reserve(4 * mesh.triangles.size());

  std::unordered_map<std::uint64_t, int> midpoint;
  auto mid = [&](int i, int j) {
    const auto key = detail::edge_key(i, j);
    if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
    const int index = static_cast<int>(out.nodes.size());
    const bool on_boundary = edge_count[key] == 1;
    if (polar) {
      const Point& p = mesh.polar[i];
      const Point& q = mesh.polar[j];
      // the pole carries no angle
      const double theta = p[0] == 0.0 ? q[1] : (q[0] == 0.0 ? p[1] : detail::mid_angle(p[1], q[1]));
      const double t = on_boundary ? 1.0 : 0.5 * (p[0] + q[0]);
      out.nodes.push_back(detail::polar_point(out.domain, t, theta));
      out.polar.push_back({t, theta});
      if (on_boundary) out.boundary.push_back({index, theta, {}});
    } else {
      const Point& p = mesh.nodes[i];
      const Point& q = mesh.nodes[j];
      out.nodes.push_back(detail::midpoint_of(p, q));
      if (on_boundary) {
        const double theta = detail::mid_angle(std::atan2(p[1], p[0]), std::atan2(q[1], q[0]));
        out.nodes.back() = out.domain.boundary_point(theta);
        out.boundary.push_back({index, theta, {}});
      }
    }
    out.boundary_flag.push_back(on_boundary ? 1 : 0);
    midpoint.emplace(key, index);
    return index;
  };

  for (const auto& t : mesh.triangles) {
    const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({ab, t[1], bc});
    out.triangles.push_back({ca, bc, t[2]});
    out.triangles.push_back({ab, bc, ca});
  }
  detail::finalize_boundary(out);
  return out;
}

/// Base resolution refined `level` times.
struct MeshResolution {
  int base_rings = 8;
  int base_sectors = 16;
};

inline TriMesh build_level_mesh(const StarDomain& domain, int level, MeshResolution res = {}) {
  if (level < 0) throw MeshError("invalid mesh: level must be >= 0");
  TriMesh mesh = build_star_mesh(domain, res.base_rings, res.base_sectors);
  for (int i = 0; i < level; ++i) mesh = refine(mesh);
  return mesh;
}

struct MeshQuality {
  double min_angle_deg;
  double max_aspect_ratio;  // circumradius / (2 inradius); 1 for equilateral
  double h_max;

  bool needs_warning() const { return min_angle_deg < min_angle_warning_deg; }
  static constexpr double min_angle_warning_deg = 10.0;
};

inline MeshQuality mesh_quality(const TriMesh& mesh) {
  MeshQuality q{180.0, 1.0, 0.0};
  for (const auto& t : mesh.triangles) {
    std::array<double, 3> len;
    for (int e = 0; e < 3; ++e) {
      const Point& p = mesh.nodes[t[(e + 1) % 3]];
      const Point& r = mesh.nodes[t[(e + 2) % 3]];
      len[e] = std::hypot(p[0] - r[0], p[1] - r[1]);  // opposite vertex e
    }
    const double area = std::abs(signed_area(mesh, t));
    for (int e = 0; e < 3; ++e) {
      const double b = len[(e + 1) % 3], c = len[(e + 2) % 3];
      const double cosine = std::clamp((b * b + c * c - len[e] * len[e]) / (2.0 * b * c), -1.0, 1.0);
      q.min_angle_deg = std::min(q.min_angle_deg, std::acos(cosine) * 180.0 / std::numbers::pi);
    }
    const double perimeter = len[0] + len[1] + len[2];
    const double inradius = 2.0 * area / perimeter;
    const double circumradius = len[0] * len[1] * len[2] / (4.0 * area);
    q.max_aspect_ratio = std::max(q.max_aspect_ratio, circumradius / (2.0 * inradius));
    q.h_max = std::max(q.h_max, *std::max_element(len.begin(), len.end()));
  }
  return q;
}

/// Structural check: positive orientation, boundary nodes on the curve,
/// connected triangle adjacency. Returns an empty string when valid.
inline std::string mesh_defect(const TriMesh& mesh, double boundary_tol = 1e-12) {
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i)
    if (!(signed_area(mesh, mesh.triangles[i]) > 0.0))
      return "triangle " + std::to_string(i) + " has non-positive area";
  for (const auto& b : mesh.boundary) {
    const Point& p = mesh.nodes[b.node];
    const double r = geodesic_radius(mesh.K(), std::hypot(p[0], p[1]));
    if (std::abs(r - mesh.domain.rho(b.theta)) > boundary_tol)
      return "boundary node " + std::to_string(b.node) + " is off the boundary curve";
  }
  // triangle adjacency through shared edges
  std::unordered_map<std::uint64_t, std::vector<int>> by_edge;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i)
    for (int e = 0; e < 3; ++e)
      by_edge[detail::edge_key(mesh.triangles[i][e], mesh.triangles[i][(e + 1) % 3])].push_back(
          static_cast<int>(i));
  std::vector<char> seen(mesh.triangles.size(), 0);
  std::queue<int> todo;
  if (!mesh.triangles.empty()) {
    todo.push(0);
    seen[0] = 1;
  }
  std::size_t visited = 0;
  while (!todo.empty()) {
    const int t = todo.front();
    todo.pop();
    ++visited;
    for (int e = 0; e < 3; ++e)
      for (int other : by_edge[detail::edge_key(mesh.triangles[t][e], mesh.triangles[t][(e + 1) % 3])])
        if (!seen[other]) {
          seen[other] = 1;
          todo.push(other);
        }
  }
  if (visited != mesh.triangles.size()) return "triangle adjacency graph is disconnected";
  return {};
}

inline double model_area(const TriMesh& mesh) {
  double sum = 0.0;
  for (const auto& t : mesh.triangles) sum += signed_area(mesh, t);
  return sum;
}

/// Shoelace area of the boundary polygon (nodes in angular order).
inline double boundary_polygon_area(const TriMesh& mesh) {
  double sum = 0.0;
  const std::size_t m = mesh.boundary.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point& p = mesh.nodes[mesh.boundary[i].node];
    const Point& q = mesh.nodes[mesh.boundary[(i + 1) % m].node];
    sum += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * sum;
}

/// sum_T (mean of lambda^2 at the edge midpoints) * |T|
inline double riemannian_area(const TriMesh& mesh) {
  double sum = 0.0;
  for (const auto& t : mesh.triangles) {
    double w = 0.0;
    for (int e = 0; e < 3; ++e) {
      const Point& p = mesh.nodes[t[e]];
      const Point& q = mesh.nodes[t[(e + 1) % 3]];
      const double lam = conformal_factor(mesh.K(), {0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])});
      w += lam * lam;
    }
    sum += w / 3.0 * signed_area(mesh, t);
  }
  return sum;
}

/// Plain-text export: "N T", N lines "x y flag", T lines "i j k".
inline void write_mesh(std::ostream& os, const TriMesh& mesh) {
  char buf[128];
  os << mesh.nodes.size() << ' ' << mesh.triangles.size() << '\n';
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %d\n", mesh.nodes[i][0], mesh.nodes[i][1],
                  static_cast<int>(mesh.boundary_flag[i]));
    os << buf;
  }
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

} // namespace serrin
