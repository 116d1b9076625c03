#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlcurv/geometry.hpp"

using namespace nlcurv;

namespace {

Mat rotation2(double a) {
  Mat r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

}  // namespace

TEST(BoundaryData, Circle) {
  const auto s = make_ball(make_vec(0, 0), 1.0);
  const auto bd = normal_and_curvature_data(*s, make_vec(1, 0));
  EXPECT_NEAR((bd.normal - make_vec(1, 0)).norm(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(bd.grad_norm, 2.0);
  EXPECT_NEAR((bd.hessian + 2.0 * Mat::Identity(2, 2)).norm(), 0.0, 1e-15);
}

TEST(BoundaryData, HalfspaceAndEllipse) {
  const Vec e = make_vec(0.6, 0.8);
  const auto h = make_halfspace(e);
  const auto bd = normal_and_curvature_data(*h, make_vec(0, 0));
  EXPECT_NEAR((bd.normal - e).norm(), 0.0, 1e-15);
  EXPECT_EQ(bd.hessian.norm(), 0.0);

  const auto el = make_ellipsoid(make_vec(0, 0), make_vec(2, 1));
  const auto be = normal_and_curvature_data(*el, make_vec(2, 0));
  EXPECT_NEAR((be.normal - make_vec(1, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(be.grad_norm, 1.0, 1e-15);
  EXPECT_NEAR(be.hessian(0, 0), -0.5, 1e-15);
  EXPECT_NEAR(be.hessian(1, 1), -2.0, 1e-15);
}

TEST(BoundaryData, RejectsDegenerateAndOffBoundary) {
  const auto s = make_ball(make_vec(0, 0), 1.0);
  EXPECT_THROW(normal_and_curvature_data(*s, make_vec(0.5, 0)), InvalidParameter);
  const auto flat = make_grid_surface(make_vec(-2, -2), 0.5, {9, 9}, std::vector<double>(81, 0.0), 0.0, 3.0);
  EXPECT_THROW(normal_and_curvature_data(*flat, make_vec(0, 0)), DegenerateGradient);
}

TEST(Projection, LandsOnEllipse) {
  const auto el = make_ellipsoid(make_vec(0.3, -0.2), make_vec(2, 1));
  const Vec p = project_to_boundary(*el, make_vec(1.0, 1.0));
  EXPECT_LE(std::abs(el->phi(p)), 1e-12);
}

TEST(Chart, CircleClosedForm) {
  const auto s = make_ball(make_vec(0, 0), 1.0);
  const GraphChart c = graph_chart(s, make_vec(1, 0), 0.5);
  const Vec z = Vec::Constant(1, 0.3);
  // the frame direction may be either tangent; f is even for the circle
  EXPECT_NEAR(c.f(z), 1.0 - std::sqrt(1.0 - 0.09), 1e-14);
  EXPECT_NEAR(c.hess_f0()(0, 0), 1.0, 1e-12);
  EXPECT_EQ(c.f(Vec::Zero(1)), 0.0);
}

TEST(Chart, HalfspaceIsFlat) {
  const auto h = make_halfspace(make_vec(0, 1), 0.5);
  const GraphChart c = graph_chart(h, make_vec(3, 0.5), 0.5);
  for (double z : {-0.4, 0.1, 0.45}) EXPECT_NEAR(c.f(Vec::Constant(1, z)), 0.0, 1e-15);
  EXPECT_EQ(c.sup_hess(), 0.0);
}

TEST(Chart, EllipseConsistencyTangencyAndHessian) {
  const auto el = make_transformed(make_ellipsoid(make_vec(0, 0), make_vec(2, 1)), rotation2(0.4), make_vec(0.2, 0.1));
  std::mt19937_64 rng(7);
  for (const Vec& p0 : ellipse_boundary_points(make_vec(0, 0), 2, 1, 9)) {
    const Vec x = rotation2(0.4) * p0 + make_vec(0.2, 0.1);
    const GraphChart c = graph_chart(el, x);
    std::uniform_real_distribution<double> uz(-c.radius(), c.radius());
    for (int i = 0; i < 1000; ++i) {
      const Vec z = Vec::Constant(1, uz(rng));
      const double fz = c.f(z);
      EXPECT_LE(std::abs(el->phi(c.point(z, fz))), 1e-10);
      EXPECT_LE(std::abs(fz), c.sup_hess() * z.squaredNorm() / 2 * (1 + 1e-6) + 1e-15);
    }
    const double hs = 1e-3;
    const auto fv = [&](double zz) { return c.f(Vec::Constant(1, zz)); };
    EXPECT_LE(std::abs(-fv(2 * hs) + 8 * fv(hs) - 8 * fv(-hs) + fv(-2 * hs)) / (12 * hs), 1e-10);
    for (double zv : {0.0, 0.3 * c.radius(), -0.7 * c.radius()}) {
      const double q = 1e-4;
      const double fd = (c.f(Vec::Constant(1, zv + q)) - 2 * c.f(Vec::Constant(1, zv)) + c.f(Vec::Constant(1, zv - q))) / (q * q);
      const double an = c.hess_f(Vec::Constant(1, zv))(0, 0);
      EXPECT_NEAR(fd, an, 1e-5 * std::max(1.0, std::abs(an)));
      EXPECT_NEAR(c.grad_f(Vec::Constant(1, zv))(0),
                  (c.f(Vec::Constant(1, zv + q)) - c.f(Vec::Constant(1, zv - q))) / (2 * q), 1e-7);
    }
  }
}

TEST(Chart, SphereHessianAndModulus) {
  const auto s = make_ellipsoid(make_vec(0, 0, 0), make_vec(1.5, 1, 0.8));
  const Vec x = project_to_boundary(*s, make_vec(0.9, 0.5, 0.4));
  const GraphChart c = graph_chart(s, x);
  const double q = 1e-4;
  const Vec z0 = make_vec(0.05, -0.03);
  const Mat h = c.hess_f(z0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Vec ei = Vec::Zero(2), ej = Vec::Zero(2);
      ei(i) = q;
      ej(j) = q;
      const double fd = (c.f(z0 + ei + ej) - c.f(z0 + ei - ej) - c.f(z0 - ei + ej) + c.f(z0 - ei - ej)) / (4 * q * q);
      EXPECT_NEAR(fd, h(i, j), 1e-5 * std::max(1.0, std::abs(h(i, j))));
    }
  EXPECT_EQ(c.modulus(0.0), 0.0);
  EXPECT_LE(c.modulus(0.1 * c.radius()), c.modulus(c.radius()));
  EXPECT_GT(c.modulus(c.radius()), 0.0);
}

TEST(Chart, OversizedRadiusIsRejected) {
  const auto s = make_ball(make_vec(0, 0), 1.0);
  EXPECT_THROW(GraphChart(s, make_vec(1, 0), 1.5), ChartRadiusTooLarge);
  EXPECT_NO_THROW(graph_chart(s, make_vec(1, 0), 1.5, true));
}

TEST(Paraboloid, Membership) {
  const Vec e = make_vec(0, 1);
  EXPECT_TRUE(paraboloid_membership(e, 0.3, make_vec(2, 0)));
  EXPECT_FALSE(paraboloid_membership(e, 1e6, e));
  EXPECT_TRUE(paraboloid_membership(e, 2.0, make_vec(1, 1)));
  EXPECT_FALSE(paraboloid_membership(e, 1.9, make_vec(1, 1)));
}

TEST(GridSurface, ReproducesQuadraticExactly) {
  const double h = 0.1;
  const int n = 41;
  std::vector<double> v;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = -2 + i * h, y = -2 + j * h;
      v.push_back(1 - x * x - y * y);
    }
  const auto g = make_grid_surface(make_vec(-2, -2), h, {n, n}, v, -3.0, 1.0);
  const Vec p = make_vec(0.73, -0.41);
  EXPECT_NEAR(g->phi(p), 1 - p.squaredNorm(), 1e-13);
  EXPECT_NEAR((g->gradient(p) + 2 * p).norm(), 0.0, 1e-12);
  EXPECT_NEAR((g->hessian(p) + 2 * Mat::Identity(2, 2)).norm(), 0.0, 1e-10);
  EXPECT_EQ(g->phi(make_vec(5, 5)), -3.0);
}
