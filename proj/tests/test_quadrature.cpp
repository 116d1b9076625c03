#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "nlcurv/admissibility.hpp"
#include "nlcurv/quadrature.hpp"
#include "oracles.hpp"

using namespace nlcurv;

namespace {

Kernel family1(int d) { return Kernel::make_builtin(Family::fractional_two_exponent, d, {}); }

// cylinder integral of the unit circle at (1,0) for the unscaled kernel, chart radius r < 1
double circle_cylinder_oracle(double r) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const auto outer = [](double z) {
    const double f = z * z / (1.0 + std::sqrt(1.0 - z * z));
    const auto k = [z](double t) { return std::pow(z * z + t * t, -1.25); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(k, -f, f, 15, 1e-13);
  };
  // below z0 the integrand is z^{-1/2} to leading order
  const double z0 = 1e-12;
  return 2.0 * (ts.integrate(outer, z0, r, 1e-12) + 2.0 * std::sqrt(z0));
}

}  // namespace

TEST(Cylinder, FlatChartIsZero) {
  const auto h = make_halfspace(make_vec(0, 1));
  const GraphChart c = graph_chart(h, make_vec(0.3, 0.0), 0.5);
  EXPECT_EQ(symmetrized_cylinder_integral(family1(2), c, {}), 0.0);
}

TEST(Cylinder, UnitCircleMatchesNestedOracle) {
  const auto s = make_ball(make_vec(0, 0), 1.0);
  const GraphChart c = graph_chart(s, make_vec(1, 0), 0.5);
  const double v = symmetrized_cylinder_integral(family1(2), c, {});
  const double o = circle_cylinder_oracle(0.5);
  EXPECT_GT(v, 0.0);
  EXPECT_NEAR(v, o, 1e-5 * o);
}

TEST(Cylinder, ComplementFlipsSign) {
  const auto s = make_ellipsoid(make_vec(0, 0), make_vec(2, 1));
  const auto sc = make_complement(s);
  const Vec x = make_vec(2 * std::cos(0.3), std::sin(0.3));
  const Kernel k = family1(2).rescaled(0.25);
  const GraphChart c = graph_chart(s, x, 0.3);
  const GraphChart cc = graph_chart(sc, x, 0.3);
  const double v = symmetrized_cylinder_integral(k, c, {});
  EXPECT_NEAR(symmetrized_cylinder_integral(k, cc, {}), -v, 1e-6 * std::abs(v));
}

TEST(Farfield, HalfspaceCancels) {
  const auto h = make_halfspace(make_vec(0.6, -0.8), 0.2);
  const Vec x = make_vec(0.6 * 0.2, -0.8 * 0.2);
  for (double eps : {1.0, 0.125}) {
    const double f = farfield_integral(family1(2).rescaled(eps), h, x, 0.5, {});
    EXPECT_NEAR(f, 0.0, 1e-12);
  }
}

TEST(Farfield, UnitBallMatchesExactMinusCylinder) {
  const auto s = make_ball(make_vec(0, 0), 1.0);
  const Kernel k = family1(2);
  const double f = farfield_integral(k, s, make_vec(1, 0), 0.5, {});
  const double expected = circle_cylinder_oracle(0.5) - oracle::ball_curvature(1.0, 1.0, 2);
  EXPECT_LT(f, 0.0);
  EXPECT_NEAR(f, expected, 1e-6 * std::abs(expected));
  EXPECT_LE(std::abs(f), k.tail_mass(0.5));
}

TEST(Farfield, BoundedByTailMass) {
  const auto s = make_ellipsoid(make_vec(0.1, 0.2, 0.0), make_vec(1.5, 1.0, 0.7));
  const Kernel k = family1(3).rescaled(0.5);
  const Vec x = project_to_boundary(*s, make_vec(1.0, 1.0, 0.3));
  const double r = 0.2;
  const double f = farfield_integral(k, s, x, r, {});
  EXPECT_LE(std::abs(f), k.tail_mass(r));
}

TEST(Hyperplane, SecondMomentIsEight) {
  QuadratureBudget b;
  const auto w = [](const Vec& z) { return z.squaredNorm(); };
  for (double a : {0.0, 0.4, 1.3}) {
    const Vec e = make_vec(std::cos(a), std::sin(a));
    EXPECT_NEAR(hyperplane_integral(family1(2), e, w, b), 8.0, 1e-6 * 8.0);
  }
}

TEST(Hyperplane, OddWeightVanishes) {
  const auto w = [](const Vec& z) { return z(0) * z.squaredNorm() / (1.0 + z.squaredNorm()); };
  EXPECT_NEAR(hyperplane_integral(family1(2), make_vec(0.6, 0.8), w, {}), 0.0, 1e-12);
  EXPECT_NEAR(hyperplane_integral(family1(3), make_vec(0.0, 0.6, 0.8), w, {}), 0.0, 1e-12);
}

TEST(Hyperplane, RejectsFastGrowingWeight) {
  const auto w = [](const Vec& z) { return std::pow(z.norm(), 3.0); };
  EXPECT_THROW(hyperplane_integral(family1(2), make_vec(0, 1), w, {}), InvalidWeight);
}

TEST(Hyperplane, SecondMomentBelowA0Estimate) {
  const auto rep = validate_admissibility(family1(2), AdmissibilityConfig::defaults(2));
  const auto w = [](const Vec& z) { return z.squaredNorm(); };
  EXPECT_LE(hyperplane_integral(family1(2), make_vec(0, 1), w, {}), rep.a0_estimate);
}

TEST(Tail, RemainderBelowFractionalEnvelope) {
  // int_{|y|>r} K <= |S^{d-1}| m r^{-(1+s)} / (1+s) for r >= 1
  for (int d : {2, 3})
    for (const Kernel& k : {family1(d), Kernel::make_builtin(Family::fractional_exp_tail, d, {})})
      for (double r : {1.0, 3.0, 40.0}) {
        const double env = sphere_area(d) * k.m() * std::pow(r, -1.5) / 1.5;
        EXPECT_LE(k.tail_mass(r), env * (1 + 1e-12));
      }
  const Kernel k = family1(2);
  const double rc = cutoff_radius(k, 0.5, 1e-6);
  EXPECT_LE(k.tail_mass(rc), 1e-6);
}

TEST(Budget, RejectsInvalidSettings) {
  QuadratureBudget b;
  b.rel_tol = 0.0;
  EXPECT_THROW(b.validate(), InvalidParameter);
  b = {};
  b.max_depth = 0;
  EXPECT_THROW(b.validate(), InvalidParameter);
}

TEST(Budget, ExhaustionCarriesIterates) {
  QuadratureBudget b;
  b.rel_tol = 1e-15;
  b.max_depth = 1;
  const auto s = make_ball(make_vec(0, 0), 1.0);
  const GraphChart c = graph_chart(s, make_vec(1, 0), 0.5);
  try {
    symmetrized_cylinder_integral(family1(2), c, b);
    FAIL() << "expected budget exhaustion";
  } catch (const BudgetExceeded& e) {
    EXPECT_GT(e.last(), 0.0);
    EXPECT_GT(e.previous(), 0.0);
  }
}
