#pragma once

// P1 finite elements for  Lap_g v + nKv = -1,  v = 0 on the boundary.
// In a 2-D conformal chart Lap_g = lambda^-2 Lap, so the weak form is
//   int grad v . grad w dx - nK int lambda^2 v w dx = int lambda^2 w dx.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "serrin/geometry.hpp"
#include "serrin/mesh.hpp"

namespace serrin {

class AssemblyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what + " (iterations " + std::to_string(iterations) + ", relative residual " +
                           std::to_string(residual) + ")"),
        iterations_(iterations), residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

private:
  int iterations_;
  double residual_;
};

/// Compressed-row matrix over interior nodes plus right-hand side.
struct SparseSystem {
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;
  std::vector<double> rhs;
  std::vector<int> dof_of_node;   // -1 on Dirichlet nodes
  std::vector<int> node_of_dof;
  std::size_t num_nodes = 0;

  std::size_t size() const { return rhs.size(); }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    const std::size_t n = size();
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) sum += val[k] * x[col[k]];
      y[i] = sum;
    }
  }

  double entry(int i, int j) const {
    const auto first = col.begin() + row_ptr[i], last = col.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? val[it - col.begin()] : 0.0;
  }

  /// max |A - A^T|
  double max_asymmetry() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        worst = std::max(worst, std::abs(val[k] - entry(col[k], static_cast<int>(i))));
    return worst;
  }
};

/// Nodal values on a mesh.
struct Field {
  std::vector<double> values;

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::size_t size() const { return values.size(); }
};

namespace detail {

struct TriangleGeometry {
  double area;
  std::array<Point, 3> grad;  // gradients of the barycentric basis functions
};

inline TriangleGeometry triangle_geometry(const TriMesh& mesh, const Triangle& t) {
  const Point& p0 = mesh.nodes[t[0]];
  const Point& p1 = mesh.nodes[t[1]];
  const Point& p2 = mesh.nodes[t[2]];
  const double area = signed_area(p0, p1, p2);
  if (!(area > 0.0)) throw AssemblyError("degenerate or inverted triangle in assembly");
  const double s = 1.0 / (2.0 * area);
  return {area,
          {Point{(p1[1] - p2[1]) * s, (p2[0] - p1[0]) * s}, Point{(p2[1] - p0[1]) * s, (p0[0] - p2[0]) * s},
           Point{(p0[1] - p1[1]) * s, (p1[0] - p0[0]) * s}}};
}

inline Point midpoint(const Point& p, const Point& q) { return {0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])}; }

struct Triplet {
  int row;
  int col;
  double value;
};

} // namespace detail

/// Stiffness minus nK times the lambda^2-weighted mass matrix, both over
/// interior nodes; lambda^2 is sampled at the three edge midpoints.
inline SparseSystem assemble(const TriMesh& mesh, int n = 2) {
  if (n != 2) throw AssemblyError("the mesh solver supports n = 2 only");
  const Curvature K = mesh.K();
  const double nK = n * to_int(K);

  SparseSystem sys;
  sys.num_nodes = mesh.nodes.size();
  sys.dof_of_node.assign(sys.num_nodes, -1);
  for (std::size_t i = 0; i < sys.num_nodes; ++i)
    if (!mesh.is_boundary(static_cast<int>(i))) {
      sys.dof_of_node[i] = static_cast<int>(sys.node_of_dof.size());
      sys.node_of_dof.push_back(static_cast<int>(i));
    }
  const std::size_t ndof = sys.node_of_dof.size();
  sys.rhs.assign(ndof, 0.0);

  std::vector<detail::Triplet> triplets;
  triplets.reserve(9 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const auto geo = detail::triangle_geometry(mesh, t);
    // weight at midpoint of the edge opposite vertex e
    std::array<double, 3> w;
    for (int e = 0; e < 3; ++e) {
      const double lam =
          conformal_factor(K, detail::midpoint(mesh.nodes[t[(e + 1) % 3]], mesh.nodes[t[(e + 2) % 3]]));
      w[e] = lam * lam;
    }
    const double q = geo.area / 3.0;
    for (int a = 0; a < 3; ++a) {
      const int row = sys.dof_of_node[t[a]];
      if (row < 0) continue;
      // basis a is 1/2 at the midpoints of the two edges through vertex a
      sys.rhs[row] += q * 0.5 * (w[(a + 1) % 3] + w[(a + 2) % 3]);
      for (int b = 0; b < 3; ++b) {
        const int column = sys.dof_of_node[t[b]];
        if (column < 0) continue;
        const double stiff = geo.area * (geo.grad[a][0] * geo.grad[b][0] + geo.grad[a][1] * geo.grad[b][1]);
        const double mass = a == b ? q * 0.25 * (w[(a + 1) % 3] + w[(a + 2) % 3]) : q * 0.25 * w[3 - a - b];
        triplets.push_back({row, column, stiff - nK * mass});
      }
    }
  }

  std::stable_sort(triplets.begin(), triplets.end(), [](const auto& x, const auto& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  sys.row_ptr.assign(ndof + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    std::size_t m = k;
    double sum = 0.0;
    while (m < triplets.size() && triplets[m].row == triplets[k].row && triplets[m].col == triplets[k].col)
      sum += triplets[m++].value;
    sys.col.push_back(triplets[k].col);
    sys.val.push_back(sum);
    ++sys.row_ptr[triplets[k].row + 1];
    k = m;
  }
  std::partial_sum(sys.row_ptr.begin(), sys.row_ptr.end(), sys.row_ptr.begin());
  return sys;
}

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

inline constexpr int default_max_iterations = 20000;

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
/// Throws SolverError on a non-positive curvature direction (indefinite
/// system) or when max_iter is exhausted.
inline Field solve(const SparseSystem& sys, double tol, int max_iter = default_max_iterations,
                   SolveStats* stats = nullptr) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve: tol must be > 0");
  const std::size_t n = sys.size();
  Field out;
  out.values.assign(sys.num_nodes, 0.0);

  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sys.entry(static_cast<int>(i), static_cast<int>(i));
    if (!(d > 0.0)) throw SolverError("non-positive diagonal: system is indefinite", 0, 1.0);
    inv_diag[i] = 1.0 / d;
  }

  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };

  const double bnorm = std::sqrt(dot(sys.rhs, sys.rhs));
  if (stats) *stats = {};
  if (bnorm == 0.0) return out;

  std::vector<double> x(n, 0.0), r = sys.rhs, z(n), p(n), Ap(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  double rel = 1.0;
  int it = 0;
  while (true) {
    if (it >= max_iter) throw SolverError("conjugate gradients did not converge", it, rel);
    sys.multiply(p, Ap);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) throw SolverError("conjugate gradients breakdown: system is indefinite", it, rel);
    const double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    ++it;
    rel = std::sqrt(dot(r, r)) / bnorm;
    if (!std::isfinite(rel)) throw SolverError("conjugate gradients produced non-finite residual", it, rel);
    if (rel <= tol) break;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (stats) *stats = {it, rel};
  for (std::size_t i = 0; i < n; ++i) out.values[sys.node_of_dof[i]] = x[i];
  return out;
}

namespace detail {

/// Solves the symmetric positive system A x = b (Gaussian elimination with
/// partial pivoting). Returns false on a singular matrix.
template <std::size_t N>
bool solve_small(std::array<std::array<double, N>, N> A, std::array<double, N>& b) {
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < N; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (!(std::abs(A[piv][c]) > 1e-14)) return false;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < N; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < N; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = N; c-- > 0;) {
    for (std::size_t k = c + 1; k < N; ++k) b[c] -= A[c][k] * b[k];
    b[c] /= A[c][c];
  }
  return true;
}

} // namespace detail

/// Per-triangle P1 gradients averaged to the nodes with area weights.
///
/// Boundary nodes only have interior-side triangles and the plain average
/// there is first order. Instead, every edge of the two-ring triangle patch
/// contributes its difference quotient (v_j - v_i)/|e|, which is the exact
/// directional derivative at the edge midpoint for quadratics; a local
/// model g(x) = g0 + H (x - x_b) with symmetric H is fitted to those samples
/// by least squares and g0 is taken as the boundary gradient.
inline std::vector<Point> recover_gradient(const Field& field, const TriMesh& mesh) {
  if (field.size() != mesh.nodes.size()) throw std::invalid_argument("recover_gradient: field/mesh size mismatch");
  std::vector<Point> grad(mesh.nodes.size(), Point{0.0, 0.0});
  std::vector<double> weight(mesh.nodes.size(), 0.0);
  for (const auto& t : mesh.triangles) {
    const auto geo = detail::triangle_geometry(mesh, t);
    Point g{0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
      g[0] += field[t[a]] * geo.grad[a][0];
      g[1] += field[t[a]] * geo.grad[a][1];
    }
    for (int a = 0; a < 3; ++a) {
      grad[t[a]][0] += geo.area * g[0];
      grad[t[a]][1] += geo.area * g[1];
      weight[t[a]] += geo.area;
    }
  }
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (weight[i] > 0.0) {
      grad[i][0] /= weight[i];
      grad[i][1] /= weight[i];
    }
  if (mesh.boundary.empty()) return grad;

  std::vector<std::vector<int>> incident(mesh.nodes.size());
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k)
    for (int a = 0; a < 3; ++a) incident[mesh.triangles[k][a]].push_back(static_cast<int>(k));

  std::vector<int> patch;
  std::vector<std::uint64_t> edges;
  for (const auto& b : mesh.boundary) {
    patch.clear();
    for (int k : incident[b.node])
      for (int a = 0; a < 3; ++a)
        for (int m : incident[mesh.triangles[k][a]]) patch.push_back(m);
    edges.clear();
    for (int k : patch)
      for (int e = 0; e < 3; ++e) edges.push_back(detail::edge_key(mesh.triangles[k][e], mesh.triangles[k][(e + 1) % 3]));
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    const Point& xb = mesh.nodes[b.node];
    double scale = 0.0;
    for (auto key : edges) {
      const Point& p = mesh.nodes[key & 0xffffffffu];
      const Point& q = mesh.nodes[key >> 32];
      scale = std::max(scale, std::hypot(p[0] - q[0], p[1] - q[1]));
    }
    // unknowns: g0x, g0y, Hxx, Hxy, Hyy (offsets scaled by the patch size)
    std::array<std::array<double, 5>, 5> M{};
    std::array<double, 5> rhs{};
    for (auto key : edges) {
      const int i = static_cast<int>(key & 0xffffffffu), j = static_cast<int>(key >> 32);
      const Point& p = mesh.nodes[i];
      const Point& q = mesh.nodes[j];
      const double len = std::hypot(q[0] - p[0], q[1] - p[1]);
      const double tx = (q[0] - p[0]) / len, ty = (q[1] - p[1]) / len;
      const double dx = (0.5 * (p[0] + q[0]) - xb[0]) / scale, dy = (0.5 * (p[1] + q[1]) - xb[1]) / scale;
      const std::array<double, 5> row{tx, ty, tx * dx, tx * dy + ty * dx, ty * dy};
      const double value = (field[j] - field[i]) / len;
      for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) M[r][c] += row[r] * row[c];
        rhs[r] += row[r] * value;
      }
    }
    if (detail::solve_small(M, rhs)) grad[b.node] = {rhs[0], rhs[1]};
  }
  return grad;
}

/// lambda^-1 |grad v|_model at every boundary node, in mesh.boundary order.
inline std::vector<double> boundary_gradient_trace(const std::vector<Point>& gradients, const TriMesh& mesh) {
  std::vector<double> out;
  out.reserve(mesh.boundary.size());
  for (const auto& b : mesh.boundary) {
    const double lam = conformal_factor(mesh.K(), mesh.nodes[b.node]);
    out.push_back(std::hypot(gradients[b.node][0], gradients[b.node][1]) / lam);
  }
  return out;
}

inline std::vector<double> boundary_gradient_trace(const Field& field, const TriMesh& mesh) {
  return boundary_gradient_trace(recover_gradient(field, mesh), mesh);
}

/// Riemannian boundary length attached to each boundary node: half of each
/// adjacent segment, segment length lambda(midpoint) * |p - q|.
inline std::vector<double> boundary_weights(const TriMesh& mesh) {
  const std::size_t m = mesh.boundary.size();
  std::vector<double> w(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const Point& p = mesh.nodes[mesh.boundary[i].node];
    const Point& q = mesh.nodes[mesh.boundary[(i + 1) % m].node];
    const double len = conformal_factor(mesh.K(), detail::midpoint(p, q)) * std::hypot(p[0] - q[0], p[1] - q[1]);
    w[i] += 0.5 * len;
    w[(i + 1) % m] += 0.5 * len;
  }
  return w;
}

/// Mesh, solution and recovered gradients bundled for post-processing.
struct SolvedProblem {
  TriMesh mesh;
  Field v;
  std::vector<Point> gradients;
  SolveStats stats;
};

inline SolvedProblem solve_torsion(TriMesh mesh, double tol = 1e-10, int max_iter = default_max_iterations) {
  SolvedProblem out;
  SparseSystem sys = assemble(mesh, 2);
  out.v = solve(sys, tol, max_iter, &out.stats);
  out.gradients = recover_gradient(out.v, mesh);
  out.mesh = std::move(mesh);
  return out;
}

} // namespace serrin
