#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "nlcurv/levelset.hpp"
#include "oracles.hpp"

using namespace nlcurv;

namespace {

Kernel family1() { return Kernel::make_builtin(Family::fractional_two_exponent, 2, {}); }

GridFunction circle(int n = 64, double R = 1.0) { return clamped_circle(n, 1.5, make_vec(0, 0), R, 0.25); }

bool interior(const GridFunction& g, int i, int j, int margin) {
  return i >= margin && j >= margin && i < g.n - margin && j < g.n - margin;
}

}  // namespace

TEST(Grid, ValidationAndLipschitz) {
  GridFunction g = circle();
  EXPECT_NO_THROW(g.validate());
  // axis differences of the distance are at most h, attained along the axes up to sampling
  EXPECT_LE(g.lipschitz(), 1.0 + 1e-12);
  EXPECT_GT(g.lipschitz(), 0.999);
  g.at(1, 5) = 0.3;
  EXPECT_THROW(g.validate(), DomainTooSmall);
  g.at(1, 5) = NAN;
  EXPECT_THROW(g.validate(), InvalidParameter);
  FlowConfig cfg(family1());
  cfg.cfl = 1.5;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  cfg.cfl = 0.5;
  cfg.theta = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
}

TEST(Local, AffineDataUnchanged) {
  const GridFunction g = GridFunction::from_function(32, 1.0, 0.0, [](double x, double y) { return 0.3 * x - 0.7 * y + 2.0; });
  for (LocalScheme s : {LocalScheme::median, LocalScheme::central}) {
    const LocalOperator op(family1(), g.h, 1e-3, s);
    const GridFunction out = step_local(g, op, local_time_step(op, 0.9));
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i)
        if (interior(g, i, j, 4)) EXPECT_NEAR(out(i, j), g(i, j), 1e-13);
  }
}

TEST(Local, ConstantShiftCommutes) {
  const GridFunction g = circle();
  GridFunction shifted = g;
  for (double& v : shifted.u) v += 0.37;
  shifted.c_out += 0.37;
  const LocalOperator op(family1(), g.h, 1e-3, LocalScheme::median);
  const double dt = local_time_step(op, 0.9);
  const GridFunction a = step_local(g, op, dt), b = step_local(shifted, op, dt);
  for (std::size_t k = 0; k < a.u.size(); ++k) EXPECT_NEAR(b.u[k] - a.u[k], 0.37, 1e-14);
}

TEST(Local, QuadraticConsistency) {
  // u = |y - x0|^2 / 2 has D2u = I, so tr(M D2u) = tr M = 8
  const Vec x0 = make_vec(0.1, -0.2);
  const GridFunction g = GridFunction::from_function(
      48, 1.0, 0.0, [&](double x, double y) { return 0.5 * ((x - x0(0)) * (x - x0(0)) + (y - x0(1)) * (y - x0(1))); });
  const LocalOperator central(family1(), g.h, 1e-3, LocalScheme::central);
  const LocalOperator wide(family1(), g.h, 1e-3, LocalScheme::median);
  double worst = 0.0;
  for (int j = 4; j < g.n - 4; ++j)
    for (int i = 4; i < g.n - 4; ++i) {
      EXPECT_NEAR(central.apply(g, i, j), 8.0, 1e-9);
      worst = std::max(worst, std::abs(wide.apply(g, i, j) - 8.0));
    }
  // the wide stencil leaks into the normal direction by at most the angular gap squared
  EXPECT_LT(worst, 8.0 * 0.1);
}

TEST(Local, ShrinkingCircle) {
  const GridFunction u0 = circle(128);
  FlowConfig cfg(family1());
  cfg.T = 0.01;
  const Trajectory tr = evolve(u0, cfg);
  const double r = mean_front_radius(extract_front(tr.snapshots.back()), make_vec(0, 0));
  EXPECT_NEAR(r, std::sqrt(1.0 - 16.0 * 0.01), 2e-3);
}

TEST(Local, CflViolationRejected) {
  const GridFunction g = circle();
  const LocalOperator op(family1(), g.h, 1e-3, LocalScheme::median);
  EXPECT_THROW(step_local(g, op, 2.0 / op.max_diagonal()), CflViolation);
  EXPECT_THROW(step_local(g, family1(), 1.0), CflViolation);
}

TEST(Nonlocal, HalfspaceLevelsStay) {
  const GridFunction g = GridFunction::from_function(64, 1.0, 0.0, [](double x, double y) { return -(0.6 * x + 0.8 * y); });
  FlowConfig cfg(family1());
  cfg.eps = 1.0 / 16;
  cfg.cutoff_radius = 0.4;
  cfg.tail = false;  // c_out means nothing for unbounded data; windows below stay on the grid
  const NonlocalOperator op(cfg, g.n, g.L);
  const NonlocalOperator::Rates r = op.rates(g);
  const double dt = r.dt_max;
  const int margin = static_cast<int>(std::ceil(0.4 / g.h)) + 4;
  int checked = 0;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      if (interior(g, i, j, margin)) {
        EXPECT_LE(std::abs(dt * r.rate[GridFunction::index(g.n, i, j)]), 1e-6 * dt);
        ++checked;
      }
  EXPECT_GT(checked, 50);
}

TEST(Nonlocal, FrontCurvatureNearTheBallValue) {
  const GridFunction u0 = circle(128);
  FlowConfig cfg(family1());
  cfg.eps = 1.0 / 16;
  const NonlocalOperator op(cfg, u0.n, u0.L);
  const NonlocalOperator::Rates r = op.rates(u0);
  int count = 0;
  for (int j = 0; j < u0.n; ++j)
    for (int i = 0; i < u0.n; ++i) {
      const double v = u0(i, j);
      if (std::abs(v) >= u0.h) continue;
      // {u >= v} is the disc of radius 1 - v
      const double rad = 1.0 - v;
      const double exact = oracle::ball_curvature(1.0, cfg.eps / rad, 2) / rad;
      EXPECT_NEAR(r.curvature[GridFunction::index(u0.n, i, j)], exact, 0.05 * exact);
      ++count;
    }
  EXPECT_GT(count, 100);
}

TEST(Comparison, RandomOrderedPairsOneStep) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const Kernel k = family1();
  FlowConfig cfg(k);
  cfg.eps = 0.25;
  const NonlocalOperator nl(cfg, 8, 1.0);
  const LocalOperator loc(k, 2.0 / 7, 1e-3, LocalScheme::median);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    // c_out is the lowest level, as for clamped data; some nodes sit on it
    GridFunction a = GridFunction::zeros(8, 1.0, -0.5), b = a;
    for (std::size_t q = 0; q < a.u.size(); ++q) {
      a.u[q] = u01(rng) < 0.2 ? -0.5 : u01(rng) - 0.5;
      b.u[q] = a.u[q] + (u01(rng) < 0.3 ? 0.0 : 0.2 * u01(rng));
    }
    const double dt = std::min(nl.rates(a).dt_max, nl.rates(b).dt_max);
    const GridFunction na = step_nonlocal(a, nl, dt), nb = step_nonlocal(b, nl, dt);
    const double dl = local_time_step(loc, 0.9);
    const GridFunction la = step_local(a, loc, dl), lb = step_local(b, loc, dl);
    for (std::size_t q = 0; q < a.u.size(); ++q) {
      if (na.u[q] > nb.u[q] + 1e-10) ++violations;
      if (la.u[q] > lb.u[q] + 1e-10) ++violations;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(Comparison, NestedCirclesStayOrdered) {
  const GridFunction small = circle(64, 0.7), large = circle(64, 1.0);
  for (double eps : {0.0, 0.125}) {
    FlowConfig cfg(family1());
    cfg.eps = eps;
    cfg.T = 0.01;
    cfg.snapshot_every = 0.0025;
    const Trajectory a = evolve(small, cfg), b = evolve(large, cfg);
    ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
    double worst = -INFINITY;
    for (std::size_t s = 0; s < a.snapshots.size(); ++s)
      for (std::size_t q = 0; q < a.snapshots[s].u.size(); ++q)
        worst = std::max(worst, a.snapshots[s].u[q] - b.snapshots[s].u[q]);
    EXPECT_LE(worst, 1e-10) << "eps = " << eps;
  }
}

TEST(Evolve, ZeroTimeAndConstantBand) {
  const GridFunction u0 = circle();
  FlowConfig cfg(family1());
  EXPECT_EQ(evolve(u0, cfg).snapshots.size(), 1u);
  for (double eps : {0.0, 0.125}) {
    cfg.eps = eps;
    cfg.T = 0.01;
    cfg.snapshot_every = 0.005;
    const Trajectory tr = evolve(u0, cfg);
    EXPECT_EQ(tr.snapshots.size(), 3u);
    EXPECT_DOUBLE_EQ(tr.snapshots.back().t, 0.01);
    for (const GridFunction& g : tr.snapshots) EXPECT_NO_THROW(g.validate());
  }
}

TEST(Evolve, TranslationByOneCell) {
  const GridFunction u0 = circle(64);
  GridFunction moved = u0;
  for (int j = 0; j < u0.n; ++j)
    for (int i = 0; i < u0.n; ++i) moved.at(i, j) = u0(i - 1, j);
  for (double eps : {0.0, 0.125}) {
    FlowConfig cfg(family1());
    cfg.eps = eps;
    cfg.T = 0.004;
    const GridFunction a = evolve(u0, cfg).snapshots.back(), b = evolve(moved, cfg).snapshots.back();
    double worst = 0.0;
    for (int j = 0; j < a.n; ++j)
      for (int i = 0; i + 1 < a.n; ++i) worst = std::max(worst, std::abs(b(i + 1, j) - a(i, j)));
    EXPECT_LE(worst, 1e-12) << "eps = " << eps;
  }
}

TEST(Evolve, SupersolutionBarrier) {
  const GridFunction u0 = circle(64);
  const double a = u0.lipschitz();
  for (double eps : {0.0, 0.125}) {
    FlowConfig cfg(family1());
    cfg.eps = eps;
    cfg.T = 0.01;
    cfg.snapshot_every = 0.0025;
    const Trajectory tr = evolve(u0, cfg);
    for (double eta : {0.1, 0.2}) {
      // barrier above u0 from the node nearest (0.5, 0.3); c = 8 bounds rho H_eps(B_rho)
      const int ix = static_cast<int>(std::lround((0.5 + u0.L) / u0.h)), jx = static_cast<int>(std::lround((0.3 + u0.L) / u0.h));
      const double speed = a * 8.0 / eta;
      double worst = -INFINITY;
      for (const GridFunction& g : tr.snapshots)
        for (int j = 0; j < g.n; ++j)
          for (int i = 0; i < g.n; ++i) {
            const double r = g.h * std::hypot(i - ix, j - jx);
            const double phi = speed * g.t + a * std::sqrt(r * r + eta * eta) + u0(ix, jx);
            worst = std::max(worst, g(i, j) - phi);
          }
      EXPECT_LE(worst, 1e-12) << "eps = " << eps << " eta = " << eta;
    }
  }
}

TEST(Apriori, ConstantCircleAndInjectedViolation) {
  const GridFunction flat = GridFunction::zeros(32, 1.0, 0.5);
  GridFunction flat_data = flat;
  for (double& v : flat_data.u) v = 0.5;
  FlowConfig cfg(family1());
  cfg.T = 0.01;
  cfg.snapshot_every = 0.005;
  const AprioriReport c = check_apriori(evolve(flat_data, cfg), flat_data);
  EXPECT_TRUE(c.lipschitz_ok);
  EXPECT_TRUE(c.hoelder_ok);
  EXPECT_EQ(c.hoelder_constant, 0.0);

  const GridFunction u0 = circle(64);
  cfg.eps = 1.0 / 16;
  Trajectory tr = evolve(u0, cfg);
  const AprioriReport r = check_apriori(tr, u0);
  EXPECT_TRUE(r.lipschitz_ok);
  EXPECT_TRUE(r.hoelder_ok);
  EXPECT_TRUE(std::isfinite(r.hoelder_constant));
  EXPECT_GT(r.hoelder_constant, 0.0);
  for (double& v : tr.snapshots.back().u) v *= 2.0;
  EXPECT_FALSE(check_apriori(tr, u0).lipschitz_ok);
}

TEST(Io, BinaryRoundTripAndCsv) {
  GridFunction g = circle(32);
  g.t = 0.125;
  const auto dir = std::filesystem::temp_directory_path();
  const std::string bin = (dir / "nlcurv_grid_test.bin").string();
  write_binary(g, bin);
  EXPECT_EQ(std::filesystem::file_size(bin), 8u * (5 + 32 * 32));
  const GridFunction back = read_binary(bin);
  EXPECT_EQ(back.n, g.n);
  EXPECT_EQ(back.h, g.h);
  EXPECT_EQ(back.t, g.t);
  EXPECT_EQ(back.c_out, g.c_out);
  EXPECT_EQ(back.u, g.u);
  const std::string csv = (dir / "nlcurv_grid_test.csv").string();
  write_csv(g, csv);
  std::ifstream f(csv);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "x,y,u");
  std::filesystem::remove(bin);
  std::filesystem::remove(csv);
}

TEST(Io, FrontOfACircle) {
  const GridFunction g = circle(128, 0.8);
  const auto lines = extract_front(g);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ((lines[0].front() - lines[0].back()).norm(), 0.0);
  for (const Vec& p : lines[0]) EXPECT_NEAR(p.norm(), 0.8, 2e-3);
  EXPECT_NEAR(mean_front_radius(lines, make_vec(0, 0)), 0.8, 1e-3);
  const GridFunction two = GridFunction::from_function(64, 1.5, -0.25, [](double x, double y) {
    return std::clamp(std::max(0.4 - std::hypot(x - 0.6, y), 0.4 - std::hypot(x + 0.6, y)), -0.25, 0.25);
  });
  EXPECT_EQ(extract_front(two).size(), 2u);
}
