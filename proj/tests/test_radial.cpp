#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "serrin/radial.hpp"

using namespace serrin;

namespace {

constexpr double pi = std::numbers::pi;

// Adaptive Simpson, used as an oracle independent of the Gauss-Legendre path.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double adaptive(const std::function<double(double)>& f, double a, double b) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, 1e-13 * std::max(std::abs(whole), 1e-3), 30);
}

// Independent closed forms (no use of profile_eval).
struct Oracle {
  std::function<double(double)> h, dh, H;
};
Oracle oracle(int K) {
  if (K == 0) return {[](double r) { return r; }, [](double) { return 1.0; }, [](double r) { return r * r / 2; }};
  if (K == 1)
    return {[](double r) { return std::sin(r); }, [](double r) { return std::cos(r); },
            [](double r) { return 1 - std::cos(r); }};
  return {[](double r) { return std::sinh(r); }, [](double r) { return std::cosh(r); },
          [](double r) { return std::cosh(r) - 1; }};
}

} // namespace

TEST(RadialSolution, FlatUnitDisk) {
  const auto sol = radial_solution(Curvature::Flat, 2, 1.0);
  EXPECT_DOUBLE_EQ(sol.c(), 0.5);
  EXPECT_DOUBLE_EQ(sol.v0(), 0.25);
  for (double r : {0.0, 0.3, 0.7, 1.0}) EXPECT_NEAR(sol.v(r), (1 - r * r) / 4, 1e-16);
}

TEST(RadialSolution, SphericalQuarterPi) {
  EXPECT_NEAR(radial_solution(Curvature::Spherical, 2, pi / 4).c(), 0.5, 1e-15);
}

TEST(RadialSolution, HyperbolicUnitRadius) {
  // tanh(1)/2 and (cosh 1 - 1)/(2 cosh 1), 30-digit reference evaluation
  const auto sol = radial_solution(Curvature::Hyperbolic, 2, 1.0);
  EXPECT_NEAR(sol.c(), 0.38079707797788244, 1e-15);
  EXPECT_NEAR(sol.v0(), 0.17597286316805730, 1e-15);
}

TEST(RadialSolution, BoundaryAndPoleConditions) {
  for (int K : {-1, 0, 1})
    for (int n : {2, 3, 6}) {
      const auto sol = radial_solution(curvature_from_int(K), n, 0.9);
      EXPECT_NEAR(sol.v(sol.R()), 0.0, 1e-16);
      EXPECT_EQ(sol.dv(0.0), 0.0);
      EXPECT_NEAR(std::abs(sol.dv(sol.R())), sol.c(), 1e-16);
      for (int i = 0; i < 50; ++i) EXPECT_GT(sol.v(sol.R() * i / 50.0), 0.0);
    }
}

TEST(RadialSolution, DomainErrors) {
  EXPECT_THROW(radial_solution(Curvature::Flat, 2, 0.0), DomainError);
  EXPECT_THROW(radial_solution(Curvature::Flat, 1, 1.0), DomainError);
  EXPECT_THROW(radial_solution(Curvature::Spherical, 2, half_pi - 0.005), DomainError);
  EXPECT_NO_THROW(radial_solution(Curvature::Spherical, 2, half_pi - 0.005, 1e-3));
}

TEST(RadialSolution, MatchesIndependentClosedForm) {
  for (int K : {-1, 0, 1}) {
    const Oracle o = oracle(K);
    const int n = 4;
    const double R = 1.2;
    const auto sol = radial_solution(curvature_from_int(K), n, R);
    for (double r : {0.0, 0.4, 0.8, 1.2}) {
      EXPECT_NEAR(sol.v(r), (o.H(R) - o.H(r)) / (n * o.dh(R)), 1e-14);
      EXPECT_NEAR(sol.dv(r), -o.h(r) / (n * o.dh(R)), 1e-14);
    }
    EXPECT_NEAR(sol.c(), o.h(R) / (n * o.dh(R)), 1e-14);
  }
}

TEST(RadialResiduals, PdeExamples) {
  EXPECT_LE(radial_pde_residual(radial_solution(Curvature::Flat, 2, 1.0), 100), 1e-15);
  EXPECT_LE(radial_pde_residual(radial_solution(Curvature::Spherical, 3, 1.0), 100), 1e-12);
  EXPECT_LE(radial_pde_residual(radial_solution(Curvature::Hyperbolic, 5, 2.0), 100), 1e-12);
}

TEST(RadialResiduals, HessianExamples) {
  EXPECT_LE(hessian_proportionality_residual(radial_solution(Curvature::Flat, 2, 1.0), 100), 1e-15);
  EXPECT_LE(hessian_proportionality_residual(radial_solution(Curvature::Spherical, 2, pi / 4), 50), 1e-12);
  EXPECT_LE(hessian_proportionality_residual(radial_solution(Curvature::Hyperbolic, 4, 1.5), 50), 1e-12);
}

TEST(RadialResiduals, IdentitySuiteExamples) {
  EXPECT_LE(identity_suite_radial(radial_solution(Curvature::Flat, 2, 1.0), 100).max(), 1e-12);
  EXPECT_LE(identity_suite_radial(radial_solution(Curvature::Spherical, 2, 0.5), 100).max(), 1e-11);
}

TEST(RadialProperties, RandomSolutions) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> kdist(-1, 1), ndist(2, 7);
  for (int trial = 0; trial < 100; ++trial) {
    const int K = kdist(rng), n = ndist(rng);
    const double Rmax = K == 1 ? half_pi - default_cap_margin - 1e-9 : 2.5;
    const double R = std::uniform_real_distribution<double>(0.05, Rmax)(rng);
    const auto sol = radial_solution(curvature_from_int(K), n, R);
    ASSERT_LE(radial_pde_residual(sol, 100), 1e-11) << K << ' ' << n << ' ' << R;
    ASSERT_LE(hessian_proportionality_residual(sol, 100), 1e-11);
    ASSERT_LE(identity_suite_radial(sol, 100).max(), 1e-10);
    ASSERT_LE(p_constancy_residual(sol, 100), 1e-12);
  }
}

TEST(Obata, ClosedFormExamples) {
  EXPECT_NEAR(obata_closed_form(Curvature::Spherical, 2, 0.25, pi / 3), -0.125, 1e-15);
  for (double s : {0.0, 0.5, 1.7}) EXPECT_NEAR(obata_closed_form(Curvature::Flat, 2, 1.0, s), 1 - s * s / 4, 1e-15);
  const auto tr = obata_ode_solve(Curvature::Hyperbolic, 3, 1.0 / 3.0, 0.0, 1e-3);
  ASSERT_EQ(tr.f.size(), 1u);
  EXPECT_EQ(tr.f[0], 1.0 / 3.0);
  EXPECT_EQ(tr.df[0], 0.0);
}

TEST(Obata, Rk4MatchesClosedForm) {
  const auto tr = obata_ode_solve(Curvature::Spherical, 2, 0.25, pi / 3, 1e-3);
  EXPECT_NEAR(tr.f.back(), -0.125, 1e-12);
  EXPECT_NEAR(tr.s.back(), pi / 3, 1e-15);
  for (int K : {-1, 0, 1}) {
    const auto t = obata_ode_solve(curvature_from_int(K), 3, 0.4, 2.0, 1e-3);
    EXPECT_LE(t.sup_error_vs_closed_form(), 1e-8);
    EXPECT_LE(t.max_ode_residual(), 1e-5);
  }
}

TEST(Obata, FourthOrderConvergence) {
  for (int K : {-1, 0, 1}) {
    const auto coarse = obata_ode_solve(curvature_from_int(K), 2, 0.3, 2.0, 0.1).sup_error_vs_closed_form();
    const auto fine = obata_ode_solve(curvature_from_int(K), 2, 0.3, 2.0, 0.05).sup_error_vs_closed_form();
    if (K == 0) {
      // quadratic closed form: RK4 is exact
      EXPECT_LE(coarse, 1e-14);
      continue;
    }
    EXPECT_NEAR(coarse / fine, 16.0, 2.0);
  }
}

TEST(Obata, ClosedFormSatisfiesInitialConditions) {
  const double a = 0.3, step = 1e-6;
  for (int K : {-1, 0, 1}) {
    const Curvature c = curvature_from_int(K);
    EXPECT_EQ(obata_closed_form(c, 2, a, 0.0), a);
    const double slope = (obata_closed_form(c, 2, a, step) - obata_closed_form(c, 2, a, -step)) / (2 * step);
    EXPECT_NEAR(slope, 0.0, 1e-9);
  }
}

TEST(Obata, DomainErrors) {
  EXPECT_THROW(obata_ode_solve(Curvature::Flat, 2, 0.0, 1.0, 0.1), DomainError);
  EXPECT_THROW(obata_ode_solve(Curvature::Flat, 2, 1.0, 1.0, 0.0), DomainError);
}

TEST(Hemisphere, EigenfunctionResidual) {
  for (int n = 2; n <= 7; ++n) {
    const auto e = hemisphere_eigen_residual(n, 100);
    EXPECT_LE(e.residual, 1e-12) << n;
    EXPECT_TRUE(e.positive);
    EXPECT_LE(std::abs(e.boundary_value), 1e-15);
  }
}

TEST(PohozaevBall, FlatUnitDiskIsQuarterPi) {
  const auto p = pohozaev_ball_check(Curvature::Flat, 2, 1.0);
  EXPECT_NEAR(p.lhs, pi / 4, 1e-14);
  EXPECT_NEAR(p.rhs, pi / 4, 1e-14);
  EXPECT_LE(p.relative_residual, 1e-14);
}

TEST(PohozaevBall, AgreesWithAdaptiveOracle) {
  struct Case {
    int K, n;
    double R;
  };
  for (const Case c : {Case{1, 2, pi / 4}, Case{-1, 3, 1.0}, Case{1, 5, 1.2}, Case{-1, 7, 2.0}, Case{0, 4, 0.7}}) {
    const Oracle o = oracle(c.K);
    const double area = 2 * std::pow(pi, c.n / 2.0) / std::tgamma(c.n / 2.0);
    const double scale = 1.0 / (c.n * o.dh(c.R));
    auto v = [&](double r) { return (o.H(c.R) - o.H(r)) * scale; };
    auto vr = [&](double r) { return -o.h(r) * scale; };
    auto w = [&](double r) { return area * std::pow(o.h(r), c.n - 1); };
    const double cc = o.h(c.R) * scale;
    const double lhs = cc * cc * adaptive([&](double r) { return o.dh(r) * w(r); }, 0, c.R);
    const double rhs = (1 + 2.0 / c.n) * (adaptive([&](double r) { return o.dh(r) * v(r) * w(r); }, 0, c.R) -
                                          c.K * adaptive([&](double r) { return o.h(r) * v(r) * vr(r) * w(r); }, 0, c.R));
    const auto p = pohozaev_ball_check(curvature_from_int(c.K), c.n, c.R, 512);
    EXPECT_LE(p.relative_residual, 1e-10);
    EXPECT_NEAR(p.lhs, lhs, 1e-11 * std::abs(lhs));
    EXPECT_NEAR(p.rhs, rhs, 1e-11 * std::abs(rhs));
  }
}

TEST(PohozaevBall, ReferenceValues) {
  // both sides from a 30-digit tanh-sinh quadrature
  EXPECT_NEAR(pohozaev_ball_check(Curvature::Spherical, 2, pi / 4).lhs, 0.39269908169872415, 1e-14);
  EXPECT_NEAR(pohozaev_ball_check(Curvature::Hyperbolic, 3, 1.0).lhs, 0.43815722486176805, 1e-14);
}

TEST(PohozaevBall, RejectsTooFewPoints) {
  EXPECT_THROW(pohozaev_ball_check(Curvature::Flat, 2, 1.0, 8), DomainError);
}

TEST(Quadrature, GaussLegendreIntegratesPolynomials) {
  const auto rule = gauss_legendre(16);
  double sum = 0.0;
  for (int i = 0; i < 16; ++i) sum += rule.weights[i];
  EXPECT_NEAR(sum, 2.0, 1e-14);
  // degree 31 exact
  EXPECT_NEAR(composite_gauss([](double x) { return std::pow(x, 30); }, 0.0, 1.0, 16), 1.0 / 31.0, 1e-14);
}
