#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "serrin/radial.hpp"
#include "serrin/verify.hpp"

using namespace serrin;

namespace {

double ball_radius(Curvature K) { return K == Curvature::Spherical ? std::numbers::pi / 4 : 1.0; }

SolvedProblem solve_ball(Curvature K, int level) {
  return solve_torsion(build_level_mesh(StarDomain::ball(K, ball_radius(K)), level));
}

SolvedProblem solve_perturbed(Curvature K, double eps, int level = 3) {
  return solve_torsion(build_level_mesh(StarDomain{K, ball_radius(K), {{3, eps, 0.0}}, default_cap_margin}, level));
}

double max_p_deviation(const SolvedProblem& sol, double c) {
  const Field P = p_function(sol.v, sol.gradients, sol.mesh);
  double worst = 0.0;
  for (double p : P.values) worst = std::max(worst, std::abs(p - c * c));
  return worst;
}

// exact radial field sampled at the mesh nodes
Field sampled_radial(const TriMesh& mesh, const RadialSolution& exact) {
  Field v;
  for (const auto& x : mesh.nodes) v.values.push_back(exact.v(std::min(geodesic_radius_of(mesh.K(), x), exact.R())));
  return v;
}

} // namespace

TEST(PFunction, ConstantOnFlatUnitBall) {
  const SolvedProblem sol = solve_ball(Curvature::Flat, 3);
  EXPECT_LE(max_p_deviation(sol, 0.5), 5e-3);
}

TEST(PFunction, ConstantOnBallsDecreasingUnderRefinement) {
  for (Curvature K : {Curvature::Hyperbolic, Curvature::Flat, Curvature::Spherical}) {
    const double c = RadialSolution(SpaceForm(K, 2), ball_radius(K)).c();
    const double d3 = max_p_deviation(solve_ball(K, 3), c);
    const double d4 = max_p_deviation(solve_ball(K, 4), c);
    EXPECT_LE(d3, 5e-3) << "K=" << to_int(K);
    EXPECT_LT(d4, d3) << "K=" << to_int(K);
  }
}

TEST(PFunction, ZeroField) {
  const TriMesh mesh = build_level_mesh(StarDomain::ball(Curvature::Hyperbolic, 1.0), 1);
  const Field zero{std::vector<double>(mesh.num_nodes(), 0.0)};
  for (double p : p_function(zero, recover_gradient(zero, mesh), mesh).values) EXPECT_EQ(p, 0.0);
}

TEST(PFunction, FormulaAtANode) {
  const TriMesh mesh = build_level_mesh(StarDomain::ball(Curvature::Spherical, 1.0), 0);
  Field v{std::vector<double>(mesh.num_nodes(), 0.0)};
  std::vector<Point> g(mesh.num_nodes(), Point{0.0, 0.0});
  const int i = 7;
  v[i] = 0.3;
  g[i] = {0.2, -0.1};
  const double lam = conformal_factor(Curvature::Spherical, mesh.nodes[i]);
  const double expected = (0.04 + 0.01) / (lam * lam) + 0.3 + 0.09;
  EXPECT_NEAR(p_function(v, g, mesh)[i], expected, 1e-15);
}

TEST(PFunction, PerturbedDomainIsNotConstant) {
  const SolvedProblem ball = solve_ball(Curvature::Flat, 3);
  const SolvedProblem bumped = solve_perturbed(Curvature::Flat, 0.2);
  const auto range = [](const SolvedProblem& s) {
    const Field P = p_function(s.v, s.gradients, s.mesh);
    const auto [lo, hi] = std::minmax_element(P.values.begin(), P.values.end());
    return *hi - *lo;
  };
  EXPECT_GT(range(bumped), 10.0 * max_p_deviation(ball, 0.5));
}

TEST(MaxPrinciple, BallMarginIsSmall) {
  const SolvedProblem sol = solve_ball(Curvature::Flat, 3);
  const MaxPrincipleReport mp = max_principle_report(p_function(sol.v, sol.gradients, sol.mesh), sol.mesh);
  EXPECT_LE(std::abs(mp.margin), 5e-3);
  EXPECT_EQ(mp.margin, mp.interior_max - mp.boundary_max);
}

TEST(MaxPrinciple, ConstantFieldHasZeroMargin) {
  const TriMesh mesh = build_level_mesh(StarDomain::ball(Curvature::Flat, 1.0), 1);
  const Field P{std::vector<double>(mesh.num_nodes(), 0.7)};
  const MaxPrincipleReport mp = max_principle_report(P, mesh);
  EXPECT_EQ(mp.margin, 0.0);
  EXPECT_EQ(mp.min, 0.7);
}

TEST(MaxPrinciple, PerturbedDomainsAllCurvatures) {
  for (Curvature K : {Curvature::Hyperbolic, Curvature::Flat, Curvature::Spherical}) {
    const SolvedProblem sol = solve_perturbed(K, 0.2);
    const MaxPrincipleReport mp = max_principle_report(p_function(sol.v, sol.gradients, sol.mesh), sol.mesh);
    EXPECT_LE(mp.margin, 5e-3) << "K=" << to_int(K);
    EXPECT_LT(mp.core_max, mp.boundary_max - 1e-3) << "K=" << to_int(K);
  }
}

TEST(Pohozaev, FlatUnitBallApproachesQuarterPi) {
  const SolvedProblem s3 = solve_ball(Curvature::Flat, 3);
  const SolvedProblem s4 = solve_ball(Curvature::Flat, 4);
  const auto c3 = boundary_gradient_stats(s3.gradients, s3.mesh).mean;
  const auto c4 = boundary_gradient_stats(s4.gradients, s4.mesh).mean;
  const PohozaevIntegrals p3 = pohozaev_integrals_2d(s3.v, s3.gradients, s3.mesh, c3);
  const PohozaevIntegrals p4 = pohozaev_integrals_2d(s4.v, s4.gradients, s4.mesh, c4);
  EXPECT_LE(p3.relative_residual, 1e-2);
  EXPECT_LE(p4.relative_residual, 3e-3);
  EXPECT_NEAR(p3.lhs, std::numbers::pi / 4, 1e-2);
  EXPECT_NEAR(p3.rhs, std::numbers::pi / 4, 1e-2);
}

TEST(Pohozaev, CurvedBallsMatchOneDimensionalQuadrature) {
  for (Curvature K : {Curvature::Hyperbolic, Curvature::Spherical}) {
    const double R = ball_radius(K);
    const SolvedProblem sol = solve_ball(K, 3);
    const double c = boundary_gradient_stats(sol.gradients, sol.mesh).mean;
    const PohozaevIntegrals p = pohozaev_integrals_2d(sol.v, sol.gradients, sol.mesh, c);
    const PohozaevCheck ref = pohozaev_ball_check(K, 2, R);
    EXPECT_LE(p.relative_residual, 1e-2) << "K=" << to_int(K);
    EXPECT_NEAR(p.lhs / ref.lhs, 1.0, 1e-2);
    EXPECT_NEAR(p.rhs / ref.rhs, 1.0, 1e-2);
  }
}

TEST(Pohozaev, ExactRadialFieldGivesAccurateIntegrals) {
  const RadialSolution exact(SpaceForm(Curvature::Hyperbolic, 2), 1.0);
  const TriMesh mesh = build_level_mesh(StarDomain::ball(Curvature::Hyperbolic, 1.0), 4);
  const Field v = sampled_radial(mesh, exact);
  std::vector<Point> grads;
  for (const auto& x : mesh.nodes) {
    const double s = std::hypot(x[0], x[1]);
    const double r = std::min(geodesic_radius(Curvature::Hyperbolic, s), 1.0);
    const double scale = s > 0.0 ? exact.dv(r) * conformal_factor_radial(Curvature::Hyperbolic, s) / s : 0.0;
    grads.push_back({scale * x[0], scale * x[1]});
  }
  const PohozaevIntegrals p = pohozaev_integrals_2d(v, grads, mesh, exact.c());
  EXPECT_LE(p.relative_residual, 1e-3);
}

TEST(Compare, ExactSampleHasZeroError) {
  for (Curvature K : {Curvature::Hyperbolic, Curvature::Flat, Curvature::Spherical}) {
    const double R = ball_radius(K);
    const TriMesh mesh = build_level_mesh(StarDomain::ball(K, R), 2);
    const RadialComparison cmp = compare_to_radial(sampled_radial(mesh, RadialSolution(SpaceForm(K, 2), R)), mesh, 2, R);
    EXPECT_EQ(cmp.linf, 0.0);
    EXPECT_EQ(cmp.l2, 0.0);
  }
}

TEST(Compare, RejectsNonBallAndWrongRadius) {
  const TriMesh bumped = build_level_mesh(StarDomain{Curvature::Flat, 1.0, {{3, 0.1, 0.0}}, default_cap_margin}, 1);
  const Field v{std::vector<double>(bumped.num_nodes(), 0.0)};
  EXPECT_THROW(compare_to_radial(v, bumped, 2, 1.0), MismatchError);
  const TriMesh ball = build_level_mesh(StarDomain::ball(Curvature::Flat, 1.0), 1);
  EXPECT_THROW(compare_to_radial(Field{std::vector<double>(ball.num_nodes(), 0.0)}, ball, 2, 0.9), MismatchError);
}

TEST(Compare, FlatLevelThreeAndRefinementGain) {
  const SolvedProblem s3 = solve_ball(Curvature::Flat, 3);
  const SolvedProblem s4 = solve_ball(Curvature::Flat, 4);
  const RadialComparison e3 = compare_to_radial(s3.v, s3.mesh, 2, 1.0);
  const RadialComparison e4 = compare_to_radial(s4.v, s4.mesh, 2, 1.0);
  EXPECT_LE(e3.linf, 5e-4);
  EXPECT_LE(e4.linf, e3.linf / 3.0);
  EXPECT_LE(e4.l2, e3.l2 / 3.0);
}

TEST(Report, BallsSatisfyEqualityCase) {
  for (Curvature K : {Curvature::Hyperbolic, Curvature::Flat, Curvature::Spherical}) {
    const double R = ball_radius(K);
    const double c = RadialSolution(SpaceForm(K, 2), R).c();
    const VerifyReport rep = verify(solve_ball(K, 3));
    EXPECT_NEAR(rep.c_mean, c, 5e-3) << "K=" << to_int(K);
    EXPECT_LE(rep.c_std, 5e-3);
    EXPECT_LE(rep.P_interior_max - rep.P_boundary_max, 5e-3);
    EXPECT_LE(rep.pohozaev_relative_residual, 1e-2);
    ASSERT_TRUE(rep.linf_error.has_value());
    ASSERT_TRUE(rep.l2_error.has_value());
    EXPECT_TRUE(std::isfinite(rep.P_range()));
  }
}

TEST(Report, PohozaevResidualShrinksOnBalls) {
  for (Curvature K : {Curvature::Hyperbolic, Curvature::Flat, Curvature::Spherical}) {
    const double r3 = verify(solve_ball(K, 3)).pohozaev_relative_residual;
    const double r4 = verify(solve_ball(K, 4)).pohozaev_relative_residual;
    EXPECT_LT(r4, r3) << "K=" << to_int(K);
  }
}

TEST(Report, NonBallHasNoRadialError) {
  const VerifyReport rep = verify(solve_perturbed(Curvature::Flat, 0.1, 2));
  EXPECT_FALSE(rep.linf_error.has_value());
  EXPECT_GT(rep.c_std, 1e-2);
}

TEST(Stats, WeightedPopulationStatistics) {
  const BoundaryStats s = weighted_stats({1.0, 3.0}, {1.0, 3.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(0.75));
}
