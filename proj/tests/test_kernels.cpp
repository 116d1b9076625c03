#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "nlcurv/admissibility.hpp"
#include "nlcurv/kernels.hpp"

using namespace nlcurv;

namespace {

Kernel family1(int d) { return Kernel::make_builtin(Family::fractional_two_exponent, d, {}); }
Kernel family2(int d) { return Kernel::make_builtin(Family::fractional_exp_tail, d, {0.5, 1.0, 0.5, 1.0}); }

// int_u^inf K0(r) r dr for the default two-exponent kernel in the plane, plus the
// matching quantity for r|K0'(r)|.
double tail_2d(double u, bool grad) {
  const double in = grad ? 2.5 : 1.0, out = grad ? 3.5 : 1.0;
  if (u >= 1.0) return out * std::pow(u, -1.5) / 1.5;
  return in * (std::pow(u, -0.5) - 1.0) / 0.5 + out / 1.5;
}

// Paraboloid mass in the plane for a radial kernel via the polar boundary r(alpha).
double paraboloid_oracle_2d(double lambda, bool grad) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const auto f = [&](double a) {
    const double c = std::cos(a);
    if (c <= 0.0) return 0.0;
    return tail_2d(2.0 * std::sin(a) / (lambda * c * c), grad);
  };
  // rmin(alpha) = 1 at sin(a) = lambda cos^2(a) / 2
  const double s = (std::sqrt(1.0 + lambda * lambda) - 1.0) / lambda;
  const double kink = std::asin(s);
  return 4.0 * (ts.integrate(f, 0.0, kink) + ts.integrate(f, kink, std::numbers::pi / 2));
}

}  // namespace

TEST(Kernel, PointValues) {
  const Kernel k = family1(2);
  EXPECT_NEAR(k.value(make_vec(2.0, 0.0)), std::pow(2.0, -3.5), 1e-15);
  EXPECT_NEAR(k.value(make_vec(0.0, 0.5)), std::pow(0.5, -2.5), 1e-13);
  EXPECT_DOUBLE_EQ(k.value(make_vec(0.3, -0.4)), k.value(make_vec(-0.3, 0.4)));
  const Kernel k3 = family1(3);
  EXPECT_NEAR(k3.value(make_vec(0.0, 2.0, 0.0)), std::pow(2.0, -4.5), 1e-15);
}

TEST(Kernel, TailMassClosedForm) {
  const Kernel k = family1(2);
  EXPECT_NEAR(k.tail_mass(2.0), 2 * std::numbers::pi / 1.5 * std::pow(2.0, -1.5), 1e-12);
  EXPECT_NEAR(k.tail_mass(1.0), 2 * std::numbers::pi / 1.5, 1e-12);
  EXPECT_NEAR(k.tail_mass(0.25), 2 * std::numbers::pi * tail_2d(0.25, false), 1e-11);
}

TEST(Kernel, TailMassMatchesRayIntegration) {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (int d : {2, 3}) {
    const Kernel k = family2(d);
    const double omega = d == 2 ? 2 * std::numbers::pi : 4 * std::numbers::pi;
    for (double r : {1e-3, 0.3, 1.0, 4.0}) {
      const double oracle =
          omega * ts.integrate([&](double t) { return std::exp(-t) * std::pow(t, -1.0 - 0.5); }, r,
                               std::numeric_limits<double>::infinity());
      EXPECT_NEAR(k.tail_mass(r), oracle, 1e-9 * oracle) << "d=" << d << " r=" << r;
    }
  }
}

TEST(Kernel, RescalingPreservesMassOutsideScaledBall) {
  const Kernel k = family1(3);
  const Kernel ke = k.rescaled(0.125);
  EXPECT_DOUBLE_EQ(ke.scale(), 0.125);
  for (double r : {0.05, 0.5, 3.0}) EXPECT_NEAR(ke.tail_mass(0.125 * r), k.tail_mass(r), 1e-10 * k.tail_mass(r));
  const Vec y = make_vec(0.3, 0.1, -0.2);
  EXPECT_NEAR(ke.value(0.125 * y), std::pow(0.125, -3) * k.value(y), 1e-9 * ke.value(0.125 * y));
}

TEST(Kernel, GradientMatchesFiniteDifference) {
  const Kernel k = family2(2).modulated(make_vec(0.6, 0.8), 0.7);
  const Vec y = make_vec(0.4, -0.9);
  const Vec g = k.gradient(y);
  for (int i = 0; i < 2; ++i) {
    Vec e = Vec::Zero(2);
    e(i) = 1e-6;
    EXPECT_NEAR(g(i), (k.value(y + e) - k.value(y - e)) / 2e-6, 1e-6);
  }
}

TEST(Kernel, RotationMovesAnisotropyAxis) {
  const Kernel k = family1(2).modulated(make_vec(1.0, 0.0), 1.0);
  Mat r(2, 2);
  r << 0, -1, 1, 0;
  const Kernel kr = k.rotated(r);
  const Vec y = make_vec(0.7, 0.2);
  EXPECT_NEAR(kr.value(r * y), k.value(y), 1e-13);
  EXPECT_NEAR(k.tail_mass(1.0), family1(2).tail_mass(1.0) * 1.5, 1e-10);
}

TEST(Kernel, RejectsInvalidParameters) {
  EXPECT_THROW(Kernel::make_builtin(Family::fractional_two_exponent, 4, {}), InvalidParameter);
  EXPECT_THROW(Kernel::make_builtin(Family::fractional_two_exponent, 2, {1.2, 1, 0.5, 1}), InvalidParameter);
  EXPECT_THROW(Kernel::make_builtin(Family::fractional_exp_tail, 2, {0.5, -1, 0.5, 1}), InvalidParameter);
  EXPECT_THROW(family1(2).rescaled(0.0), InvalidParameter);
}

TEST(Paraboloid, MassMatchesPolarOracle) {
  const Kernel k = family1(2);
  for (double lambda : {0.0625, 0.5, 1.0, 8.0}) {
    const double oracle = paraboloid_oracle_2d(lambda, false);
    const auto got = paraboloid_integral(k, make_vec(0.0, 1.0), lambda, false, 1e-8);
    EXPECT_TRUE(got.converged);
    EXPECT_NEAR(got.value, oracle, 1e-6 * oracle) << lambda;
    const double goracle = paraboloid_oracle_2d(lambda, true);
    const auto ggot = paraboloid_integral(k, make_vec(0.0, 1.0), lambda, true, 1e-8);
    EXPECT_NEAR(ggot.value, goracle, 1e-6 * goracle) << lambda;
  }
}

TEST(Paraboloid, SmallLambdaQuotientApproachesSecondMoment) {
  // trace of the second-moment matrix in the plane is 2 * int r^3 K0 dr over the half-line pair = 8
  const Kernel k = family1(2);
  const double lambda = std::ldexp(1.0, -10);
  const double q = paraboloid_integral(k, make_vec(1.0, 0.0), lambda, false, 1e-9).value / lambda;
  EXPECT_NEAR(q, paraboloid_oracle_2d(lambda, false) / lambda, 1e-6);
  EXPECT_LT(q, 8.0);
  EXPECT_GT(q, 7.9);
}

TEST(Extrapolation, RecoversGeometricLimit) {
  std::vector<double> v;
  for (int k = 0; k < 8; ++k) v.push_back(3.0 - 2.0 * std::pow(0.5, 0.5 * k));
  const auto [limit, unc] = extrapolate_halving(v);
  EXPECT_NEAR(limit, 3.0, 1e-12);
  EXPECT_LT(unc, 1e-12);
}

TEST(Admissibility, BuiltinFamiliesPass) {
  for (int d : {2, 3})
    for (const Kernel& k : {family1(d), family2(d)}) {
      auto cfg = AdmissibilityConfig::defaults(d);
      const auto rep = validate_admissibility(k, cfg);
      EXPECT_TRUE(rep.pass()) << rep.to_text();
      if (d == 2 && k.family() == Family::fractional_two_exponent) {
        EXPECT_GE(rep.a0_estimate, 8.0);
        EXPECT_LT(rep.a0_estimate, 8.1);
      }
    }
}

TEST(Admissibility, SlowTailFailsFractionalDomination) {
  CustomProfile p;
  p.value = [](double r) { return r <= 1.0 ? std::pow(r, -2.5) : std::pow(r, -3.0); };
  p.derivative = [](double r) { return r <= 1.0 ? -2.5 * std::pow(r, -3.5) : -3.0 * std::pow(r, -4.0); };
  p.near_exponent = 0.5;
  p.near_constant = 1.0;
  p.breakpoints = {1.0};
  const Kernel k = Kernel::custom_radial(2, "slow_tail", p, 0.5, 1.0);
  const auto rep = validate_admissibility(k, AdmissibilityConfig::defaults(2));
  EXPECT_FALSE(rep.pass());
  ASSERT_NE(rep.verdict("fractional_domination"), nullptr);
  EXPECT_FALSE(rep.verdict("fractional_domination")->pass);
  EXPECT_TRUE(rep.verdict("evenness")->pass);
}
