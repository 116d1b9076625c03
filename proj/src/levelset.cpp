#include "nlcurv/levelset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>

#include <tbb/blocked_range.h>
#include <tbb/combinable.h>
#include <tbb/parallel_for.h>

#include "nlcurv/curvature.hpp"
#include "nlcurv/geometry.hpp"
#include "nlcurv/numerics.hpp"

namespace nlcurv {

namespace {

constexpr int kBand = 3;

template <class F>
void for_rows(int n, F&& body) {
  tbb::parallel_for(tbb::blocked_range<int>(0, n), [&](const tbb::blocked_range<int>& r) {
    for (int j = r.begin(); j < r.end(); ++j) body(j);
  });
}

Vec central_gradient(const GridFunction& g, int i, int j) {
  return make_vec((g(i + 1, j) - g(i - 1, j)) / (2.0 * g.h), (g(i, j + 1) - g(i, j - 1)) / (2.0 * g.h));
}

// C^2 blend, 0 below a and 1 above b
double blend(double r, double a, double b) {
  if (r <= a) return 0.0;
  if (r >= b) return 1.0;
  const double x = (r - a) / (b - a);
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

}  // namespace

GridFunction GridFunction::zeros(int n, double L, double c_out) {
  if (n < 2 * kBand + 2) throw InvalidParameter("grid needs more nodes");
  if (!(L > 0.0)) throw InvalidParameter("domain half-width must be positive");
  GridFunction g;
  g.n = n;
  g.L = L;
  g.h = 2.0 * L / (n - 1);
  g.c_out = c_out;
  g.u.assign(static_cast<std::size_t>(n) * n, 0.0);
  return g;
}

void GridFunction::validate() const {
  if (d != 2) throw Unsupported("grid functions are two-dimensional");
  if (u.size() != static_cast<std::size_t>(n) * n) throw InvalidParameter("grid size mismatch");
  if (!std::isfinite(c_out)) throw InvalidParameter("c_out must be finite");
  for (double v : u)
    if (!std::isfinite(v)) throw InvalidParameter("grid values must be finite");
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const bool band = i < kBand || j < kBand || i >= n - kBand || j >= n - kBand;
      if (band && u[index(n, i, j)] != c_out) throw DomainTooSmall("support reaches the padding band");
    }
}

double GridFunction::lipschitz() const {
  double lip = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double v = u[index(n, i, j)];
      if (i + 1 < n) lip = std::max(lip, std::abs(u[index(n, i + 1, j)] - v));
      if (j + 1 < n) lip = std::max(lip, std::abs(u[index(n, i, j + 1)] - v));
    }
  return lip / h;
}

double GridFunction::max_value() const { return *std::max_element(u.begin(), u.end()); }

GridFunction clamped_circle(int n, double L, const Vec& center, double R, double c0) {
  if (!(R > 0.0 && c0 > 0.0)) throw InvalidParameter("radius and clamp level must be positive");
  return GridFunction::from_function(n, L, -c0, [&](double x, double y) {
    return std::clamp(R - std::hypot(x - center(0), y - center(1)), -c0, c0);
  });
}

void FlowConfig::validate() const {
  if (kernel.dimension() != 2) throw Unsupported("level-set solvers are two-dimensional");
  if (!(T >= 0.0) || !std::isfinite(T)) throw InvalidParameter("final time must be nonnegative");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidParameter("CFL factor must lie in (0, 1]");
  if (!(theta > 0.0)) throw InvalidParameter("theta must be positive");
  if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidParameter("eps must lie in [0, 1]");
  if (!(snapshot_every >= 0.0)) throw InvalidParameter("snapshot cadence must be nonnegative");
  if (!(ramp_width >= 0.0)) throw InvalidParameter("ramp width must be nonnegative");
  if (!(near_inner > 0.0 && near_outer > near_inner)) throw InvalidParameter("need 0 < near_inner < near_outer");
  if (!(cutoff_radius >= 0.0)) throw InvalidParameter("cutoff radius must be nonnegative");
  if (!(median_radius >= 0.0)) throw InvalidParameter("median radius must be nonnegative");
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw InvalidParameter("fixed step must be nonnegative");
}

// ---------------------------------------------------------------------------------------------
// local operator

double default_median_radius(double h) { return std::max(h, 0.6 * std::sqrt(h)); }

namespace {

std::vector<double> anisotropy_table(const Kernel& k, double q) {
  const int size = 256;
  std::vector<double> t(size);
  for (int a = 0; a < size; ++a) {
    const double phi = std::numbers::pi * a / size;
    t[a] = q * k.angular(make_vec(-std::sin(phi), std::cos(phi)));
  }
  return t;
}

}  // namespace

LocalOperator::LocalOperator(const Kernel& k, double h, double theta, LocalScheme scheme, double radius)
    : h_(h), theta_(theta), radius_(radius), scheme_(scheme) {
  if (k.dimension() != 2) throw Unsupported("level-set solvers are two-dimensional");
  if (!(h > 0.0 && theta > 0.0)) throw InvalidParameter("need h > 0 and theta > 0");
  // M_K(e) = g(v) q v (x) v with g the angular factor; q from one direction
  const double q = anisotropy_matrix(k, make_vec(1.0, 0.0), {}).matrix.trace() / k.angular(make_vec(0.0, 1.0));
  table_ = anisotropy_table(k, q);
  build_stencil();
}

LocalOperator LocalOperator::truncated(const Kernel& k, double eps, double inner, double outer, double h,
                                       double theta, LocalScheme scheme, double radius) {
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidParameter("eps must lie in (0, 1]");
  LocalOperator op;
  op.h_ = h;
  op.theta_ = theta;
  op.radius_ = radius;
  op.scheme_ = scheme;
  const Kernel ke = k.rescaled(eps);
  // (2/eps) int_0^outer K0_eps(t) (1 - psi(t)) t^2 dt, head closed by the near power law
  const double p = ke.near_exponent();
  const double t0 = 1e-8 * inner;
  const auto f = [&](double t) { return ke.scaled_profile(t) * (1.0 - blend(t, inner, outer)) * t * t; };
  std::vector<double> breaks{inner};
  for (double b : ke.breakpoints())
    if (b > t0 && b < outer) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  const double body = numerics::adaptive(f, t0, outer, breaks, 1e-10, 0.0, 40).value;
  const double head = ke.near_constant() * std::pow(t0, 1.0 - p) / (1.0 - p);
  op.table_ = anisotropy_table(k, 2.0 * (body + head) / eps);
  op.build_stencil();
  return op;
}

void LocalOperator::build_stencil() {
  mean_ = std::accumulate(table_.begin(), table_.end(), 0.0) / table_.size();
  max_ = *std::max_element(table_.begin(), table_.end());
  const double h2 = h_ * h_;
  if (scheme_ == LocalScheme::central) {
    max_diag_ = 2.0 * std::max(max_, mean_) / h2;
    return;
  }
  if (radius_ == 0.0) radius_ = default_median_radius(h_);
  if (!(radius_ > 0.0)) throw InvalidParameter("median radius must be positive");
  max_diag_ = max_ > 0.0 ? 2.0 * max_ / (radius_ * radius_) : 0.0;
  // tap along w at radius rho sqrt(m(e) / max m), e the normal to w; Med - u ~ (r^2 / 2) u_ww
  const int half = 32;
  taps_.resize(2 * half);
  for (int k = 0; k < half; ++k) {
    const double a = std::numbers::pi * k / half;
    const double w0 = std::cos(a), w1 = std::sin(a);
    const double r = max_ > 0.0 ? radius_ * std::sqrt(m(make_vec(w1, -w0)) / max_) : 0.0;
    const double ox = r * w0 / h_, oy = r * w1 / h_;
    const auto tap = [](double x, double y) {
      const double fx = std::floor(x), fy = std::floor(y);
      return Tap{static_cast<int>(fx), static_cast<int>(fy), x - fx, y - fy};
    };
    taps_[k] = tap(ox, oy);
    taps_[k + half] = tap(-ox, -oy);
  }
}

double LocalOperator::m(const Vec& e) const {
  double phi = std::atan2(e(1), e(0));
  if (phi < 0.0) phi += std::numbers::pi;
  const double x = phi / std::numbers::pi * table_.size();
  const int a = static_cast<int>(std::floor(x)) % static_cast<int>(table_.size());
  const int b = (a + 1) % static_cast<int>(table_.size());
  const double f = x - std::floor(x);
  return (1.0 - f) * table_[a] + f * table_[b];
}

double LocalOperator::median(const GridFunction& g, int i, int j) const {
  const int count = static_cast<int>(taps_.size());
  std::array<double, 64> s{}, sorted{};
  for (int k = 0; k < count; ++k) {
    const Tap& t = taps_[k];
    const int a = i + t.di, b = j + t.dj;
    s[k] = (1.0 - t.fy) * ((1.0 - t.fx) * g(a, b) + t.fx * g(a + 1, b)) +
           t.fy * ((1.0 - t.fx) * g(a, b + 1) + t.fx * g(a + 1, b + 1));
  }
  // angular measure of {s > lam} (strict) and {s >= lam}, s linear between neighbouring taps;
  // the two differ where a run of taps is flat at lam
  const auto measure = [&](double lam, bool strict) {
    double mu = 0.0;
    for (int k = 0; k < count; ++k) {
      const double x = s[k], y = s[(k + 1) % count];
      const double lo = std::min(x, y), hi = std::max(x, y);
      if (lo > lam || (!strict && lo == lam && hi == lam)) mu += 1.0;
      else if (hi > lam) mu += (hi - std::max(lam, lo)) / (hi - lo);
    }
    return mu;
  };
  std::copy(s.begin(), s.begin() + count, sorted.begin());
  std::sort(sorted.begin(), sorted.begin() + count);
  const double target = 0.5 * count;
  // inf {lam : measure(lam) <= target}; first sorted value whose strict measure is within target
  int lo = -1, hi = count - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (measure(sorted[mid], true) <= target) hi = mid;
    else lo = mid;
  }
  const double at = measure(sorted[hi], false);
  if (at > target || lo < 0) return sorted[hi];
  const double before = measure(sorted[lo], true);
  if (sorted[hi] == sorted[lo]) return sorted[hi];
  return sorted[lo] + (before - target) / (before - at) * (sorted[hi] - sorted[lo]);
}

double LocalOperator::apply(const GridFunction& g, int i, int j) const {
  const double c = g(i, j);
  if (scheme_ == LocalScheme::median) return max_diag_ == 0.0 ? 0.0 : max_diag_ * (median(g, i, j) - c);
  const double h2 = h_ * h_;
  const Vec p = central_gradient(g, i, j);
  const double np = p.norm();
  if (np < theta_ * h_) return 0.5 * mean_ * (g(i + 1, j) + g(i - 1, j) + g(i, j + 1) + g(i, j - 1) - 4.0 * c) / h2;
  const Vec e = p / np;
  const double vx = -e(1), vy = e(0);
  const double uxx = (g(i + 1, j) - 2.0 * c + g(i - 1, j)) / h2;
  const double uyy = (g(i, j + 1) - 2.0 * c + g(i, j - 1)) / h2;
  const double uxy = (g(i + 1, j + 1) - g(i + 1, j - 1) - g(i - 1, j + 1) + g(i - 1, j - 1)) / (4.0 * h2);
  return m(e) * (vx * vx * uxx + 2.0 * vx * vy * uxy + vy * vy * uyy);
}

double LocalOperator::diagonal(const GridFunction& g, int i, int j) const {
  if (scheme_ == LocalScheme::median) return max_diag_;
  const Vec p = central_gradient(g, i, j);
  const double np = p.norm();
  return 2.0 * (np < theta_ * h_ ? mean_ : m(p / np)) / (h_ * h_);
}

double local_time_step(const LocalOperator& op, double cfl) {
  return op.max_diagonal() > 0.0 ? cfl / op.max_diagonal() : std::numeric_limits<double>::infinity();
}

GridFunction step_local(const GridFunction& u, const LocalOperator& op, double dt) {
  if (!(dt >= 0.0)) throw InvalidParameter("time step must be nonnegative");
  if (dt * op.max_diagonal() > 1.0 + 1e-12) throw CflViolation("time step exceeds the CFL bound");
  GridFunction out = u;
  for_rows(u.n, [&](int j) {
    for (int i = 0; i < u.n; ++i) out.at(i, j) = u(i, j) + dt * op.apply(u, i, j);
  });
  out.t = u.t + dt;
  return out;
}

GridFunction step_local(const GridFunction& u, const Kernel& k, double dt, double theta, LocalScheme scheme) {
  const LocalOperator op(k, u.h, theta, scheme);
  if (dt > local_time_step(op, 1.0) * (1.0 + 1e-12)) throw CflViolation("time step exceeds the CFL bound");
  return step_local(u, op, dt);
}

// ---------------------------------------------------------------------------------------------
// nonlocal operator

NonlocalOperator::NonlocalOperator(const FlowConfig& cfg, int n, double L)
    : eps_(cfg.eps),
      h_(2.0 * L / (n - 1)),
      theta_(cfg.theta),
      cfl_(cfg.cfl),
      near_(LocalOperator::truncated(cfg.kernel, cfg.eps, cfg.near_inner * 2.0 * L / (n - 1),
                                     cfg.near_outer * 2.0 * L / (n - 1), 2.0 * L / (n - 1), cfg.theta, cfg.scheme,
                                     cfg.median_radius)) {
  cfg.validate();
  if (!(eps_ > 0.0)) throw InvalidParameter("nonlocal flow needs eps > 0");
  ramp_ = cfg.ramp_width * h_;
  cutoff_ = cfg.cutoff_radius > 0.0 ? cfg.cutoff_radius : 2.0 * std::sqrt(2.0) * L;
  reach_ = static_cast<int>(std::floor(cutoff_ / h_));
  const Kernel ke = cfg.kernel.rescaled(eps_);
  const double inner = cfg.near_inner * h_, outer = cfg.near_outer * h_;
  const int side = 2 * reach_ + 1;
  weight_.assign(static_cast<std::size_t>(side) * side, 0.0);
  numerics::Accumulator acc;
  for (int dj = -reach_; dj <= reach_; ++dj)
    for (int di = -reach_; di <= reach_; ++di) {
      const double r = h_ * std::hypot(di, dj);
      if (r <= inner || r > cutoff_) continue;
      const double w = ke.value(make_vec(di * h_, dj * h_)) * blend(r, inner, outer) * h_ * h_ / eps_;
      weight_[static_cast<std::size_t>(dj + reach_) * side + (di + reach_)] = w;
      acc.add(w);
    }
  if (cfg.tail) acc.add(ke.tail_mass(cutoff_) / eps_);
  total_ = acc.value();
}

double NonlocalOperator::chi(double diff) const {
  if (ramp_ > 0.0) return std::clamp(diff / ramp_, -1.0, 1.0);
  return diff >= 0.0 ? 1.0 : -1.0;
}

double NonlocalOperator::chi_slope(double diff) const {
  if (ramp_ > 0.0) return std::abs(diff) < ramp_ ? 1.0 / ramp_ : 0.0;
  return 0.0;
}

NonlocalOperator::Rates NonlocalOperator::rates(const GridFunction& u) const {
  const int n = u.n;
  if (std::abs(u.h - h_) > 1e-12 * h_) throw InvalidParameter("grid spacing differs from the operator's");
  struct Node {
    int i, j;
    double v;
  };
  std::vector<Node> support;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (u(i, j) != u.c_out) support.push_back({i, j, u(i, j)});
  // plateau nodes whose whole stencil sits on the plateau do not move
  const int box = static_cast<int>(std::ceil(near_.radius() / h_)) + 2;
  std::vector<char> active(u.u.size(), 0);
  for (const Node& y : support)
    for (int j = std::max(0, y.j - box); j <= std::min(n - 1, y.j + box); ++j)
      for (int i = std::max(0, y.i - box); i <= std::min(n - 1, y.i + box); ++i) active[GridFunction::index(n, i, j)] = 1;
  Rates out;
  out.rate.assign(u.u.size(), 0.0);
  out.curvature.assign(u.u.size(), std::numeric_limits<double>::quiet_NaN());
  const int side = 2 * reach_ + 1;
  tbb::combinable<double> sup_far([] { return 0.0; }), sup_diag([] { return 0.0; });

  for_rows(n, [&](int j) {
    for (int i = 0; i < n; ++i) {
      if (!active[GridFunction::index(n, i, j)]) continue;
      const double ux = u(i, j);
      const double dmx = (ux - u(i - 1, j)) / h_, dpx = (u(i + 1, j) - ux) / h_;
      const double dmy = (ux - u(i, j - 1)) / h_, dpy = (u(i, j + 1) - ux) / h_;
      const std::size_t idx = GridFunction::index(n, i, j);
      if (dmx == 0.0 && dpx == 0.0 && dmy == 0.0 && dpy == 0.0) {
        // both Godunov branches vanish; the far field cannot act
        out.rate[idx] = near_.apply(u, i, j);
        sup_diag.local() = std::max(sup_diag.local(), near_.diagonal(u, i, j));
        continue;
      }
      // the padding level lies outside every superlevel set, its own included
      const double chi_out = -1.0;
      double s = chi_out * total_, slope = 0.0;
      for (const Node& y : support) {
        const int di = y.i - i, dj = y.j - j;
        if (std::abs(di) > reach_ || std::abs(dj) > reach_) continue;
        const double w = weight_[static_cast<std::size_t>(dj + reach_) * side + (di + reach_)];
        if (w == 0.0) continue;
        const double diff = y.v - ux;
        s += w * (chi(diff) - chi_out);
        slope += w * chi_slope(diff);
      }
      const double far = -s;
      // Godunov gradient for u_t + far |grad u| = 0
      double ax, bx, ay, by;
      if (far > 0.0) {
        ax = std::max(dmx, 0.0), bx = std::min(dpx, 0.0), ay = std::max(dmy, 0.0), by = std::min(dpy, 0.0);
      } else {
        ax = std::min(dmx, 0.0), bx = std::max(dpx, 0.0), ay = std::min(dmy, 0.0), by = std::max(dpy, 0.0);
      }
      const double grad = std::sqrt(ax * ax + bx * bx + ay * ay + by * by);
      const double near = near_.apply(u, i, j);
      out.rate[idx] = near - far * grad;
      const double np = central_gradient(u, i, j).norm();
      if (np >= theta_ * h_) out.curvature[idx] = far - near / np;
      double dgrad = 0.0;
      if (grad > 0.0) dgrad = (std::abs(ax) + std::abs(bx) + std::abs(ay) + std::abs(by)) / (h_ * grad);
      const double diag = near_.diagonal(u, i, j) + std::abs(far) * dgrad + grad * slope;
      sup_far.local() = std::max(sup_far.local(), std::abs(far));
      sup_diag.local() = std::max(sup_diag.local(), diag);
    }
  });
  const double fmax = sup_far.combine([](double a, double b) { return std::max(a, b); });
  const double dmax = sup_diag.combine([](double a, double b) { return std::max(a, b); });
  out.dt_max = cfl_ * eps_ / (fmax + 1.0);
  if (dmax > 0.0) out.dt_max = std::min(out.dt_max, cfl_ / dmax);
  return out;
}

double NonlocalOperator::stable_step(double lip) const {
  // |far| <= total, the Godunov gradient <= 2 Lip_h, its derivative <= 2 / h, chi' <= 1 / ramp
  double diag = near_.max_diagonal() + 2.0 * total_ / h_;
  if (ramp_ > 0.0) diag += 2.0 * lip * total_ / ramp_;
  return cfl_ * std::min(eps_ / (total_ + 1.0), 1.0 / diag);
}

GridFunction step_nonlocal(const GridFunction& u, const NonlocalOperator& op, double dt) {
  if (!(dt >= 0.0)) throw InvalidParameter("time step must be nonnegative");
  const NonlocalOperator::Rates r = op.rates(u);
  if (dt > r.dt_max * (1.0 + 1e-12)) throw CflViolation("time step exceeds the nonlocal CFL bound");
  GridFunction out = u;
  for (std::size_t k = 0; k < out.u.size(); ++k) out.u[k] += dt * r.rate[k];
  out.t = u.t + dt;
  return out;
}

GridFunction step_nonlocal(const GridFunction& u, const Kernel& k, double eps, double dt) {
  FlowConfig cfg(k);
  cfg.eps = eps;
  return step_nonlocal(u, NonlocalOperator(cfg, u.n, u.L), dt);
}

// ---------------------------------------------------------------------------------------------
// evolution

double stable_time_step(const GridFunction& u0, const FlowConfig& cfg) {
  cfg.validate();
  if (cfg.eps == 0.0)
    return local_time_step(LocalOperator(cfg.kernel, u0.h, cfg.theta, cfg.scheme, cfg.median_radius), cfg.cfl);
  return NonlocalOperator(cfg, u0.n, u0.L).stable_step(u0.lipschitz());
}

Trajectory evolve(const GridFunction& u0, const FlowConfig& cfg) {
  cfg.validate();
  u0.validate();
  Trajectory tr;
  tr.snapshots.push_back(u0);
  tr.lipschitz.push_back(u0.lipschitz());
  tr.max_lipschitz = tr.lipschitz.back();
  tr.modulus.push_back(0.0);
  if (cfg.T == 0.0) return tr;

  std::optional<LocalOperator> local;
  std::optional<NonlocalOperator> nonlocal;
  if (cfg.eps == 0.0)
    local.emplace(cfg.kernel, u0.h, cfg.theta, cfg.scheme, cfg.median_radius);
  else
    nonlocal.emplace(cfg, u0.n, u0.L);
  const double step = cfg.dt > 0.0 ? cfg.dt : stable_time_step(u0, cfg);

  GridFunction u = u0;
  u.t = 0.0;
  int taken = 0;
  const auto schedule = [&] {
    if (cfg.snapshot_every <= 0.0) return cfg.T;
    const double t = (taken + 1) * cfg.snapshot_every;
    return t >= cfg.T * (1.0 - 1e-12) ? cfg.T : t;
  };
  double next = schedule();
  while (u.t < cfg.T) {
    const double room = next - u.t;
    const double dt = std::min(step, room);
    u = local ? step_local(u, *local, dt) : step_nonlocal(u, *nonlocal, dt);
    if (dt == room) u.t = next;
    ++tr.steps;
    tr.max_lipschitz = std::max(tr.max_lipschitz, u.lipschitz());
    tr.step_times.push_back(u.t);
    tr.step_max.push_back(u.max_value());
    if (u.t >= next) {
      tr.snapshots.push_back(u);
      tr.lipschitz.push_back(u.lipschitz());
      double sup = 0.0;
      for (std::size_t k = 0; k < u.u.size(); ++k) sup = std::max(sup, std::abs(u.u[k] - u0.u[k]));
      tr.modulus.push_back(sup);
      ++taken;
      next = schedule();
    }
  }
  return tr;
}

AprioriReport check_apriori(const Trajectory& traj, const GridFunction& u0, double tol) {
  if (traj.snapshots.empty()) throw InvalidParameter("empty trajectory");
  AprioriReport rep;
  const double lip0 = u0.lipschitz();
  rep.lipschitz_ok = true;
  for (const GridFunction& g : traj.snapshots) {
    const double lip = g.lipschitz();
    rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, lip0 > 0.0 ? lip / lip0 : (lip > 0.0 ? INFINITY : 1.0));
    if (lip > lip0 * (1.0 + tol) + 1e-14) rep.lipschitz_ok = false;
  }
  const auto sup_diff = [](const GridFunction& a, const GridFunction& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.u.size(); ++k) s = std::max(s, std::abs(a.u[k] - b.u[k]));
    return s;
  };
  // fit on the differences to the initial datum
  double c = 0.0;
  for (const GridFunction& g : traj.snapshots) {
    if (g.t <= 0.0) continue;
    const double d = sup_diff(g, u0);
    if (d == 0.0) continue;
    if (lip0 == 0.0) {
      c = INFINITY;
      continue;
    }
    c = std::max(c, (d / lip0) * (d / lip0) / (g.t - u0.t));
  }
  rep.hoelder_constant = c;
  rep.hoelder_ok = std::isfinite(c);
  for (std::size_t a = 0; a < traj.snapshots.size() && rep.hoelder_ok; ++a)
    for (std::size_t b = a + 1; b < traj.snapshots.size(); ++b) {
      const GridFunction& x = traj.snapshots[a];
      const GridFunction& y = traj.snapshots[b];
      const double bound = lip0 * std::sqrt(c * std::abs(y.t - x.t)) * (1.0 + tol) + 1e-14;
      if (sup_diff(x, y) > bound) {
        rep.hoelder_ok = false;
        break;
      }
    }
  return rep;
}

// ---------------------------------------------------------------------------------------------
// io

GridFunction resample(const GridFunction& g, int n) {
  if (n == g.n) return g;
  // the surface grid runs with the last axis fastest
  std::vector<double> values(g.u.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) values[static_cast<std::size_t>(i) * g.n + j] = g(i, j);
  const SurfacePtr s = make_grid_surface(make_vec(-g.L, -g.L), g.h, {g.n, g.n}, std::move(values), g.c_out,
                                         std::sqrt(2.0) * g.L);
  GridFunction out = GridFunction::from_function(n, g.L, g.c_out, [&](double x, double y) { return s->phi(make_vec(x, y)); });
  out.t = g.t;
  return out;
}

double sup_distance(const GridFunction& a, const GridFunction& b) {
  if (std::abs(a.L - b.L) > 1e-12 * a.L) throw InvalidParameter("grids cover different squares");
  const GridFunction c = resample(b, a.n);
  double s = 0.0;
  for (std::size_t k = 0; k < a.u.size(); ++k) s = std::max(s, std::abs(a.u[k] - c.u[k]));
  return s;
}

void write_csv(const GridFunction& g, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path);
  f.precision(17);
  f << "x,y,u\n";
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) f << g.coord(i) << ',' << g.coord(j) << ',' << g(i, j) << '\n';
}

namespace {

template <class T>
void put(std::ofstream& f, T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    f.write(bytes.data(), bytes.size());
  } else {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
}

template <class T>
T get(std::ifstream& f) {
  std::array<char, sizeof(T)> bytes;
  if (!f.read(bytes.data(), bytes.size())) throw Error("truncated grid file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace

void write_binary(const GridFunction& g, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  put<std::int64_t>(f, g.d);
  put(f, g.h);
  put(f, g.L);
  put(f, g.c_out);
  put(f, g.t);
  for (double v : g.u) put(f, v);
}

GridFunction read_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  const auto d = get<std::int64_t>(f);
  if (d != 2) throw Unsupported("only two-dimensional grids are stored");
  const double h = get<double>(f), L = get<double>(f), c_out = get<double>(f), t = get<double>(f);
  const int n = static_cast<int>(std::lround(2.0 * L / h)) + 1;
  GridFunction g = GridFunction::zeros(n, L, c_out);
  g.h = h;
  g.t = t;
  for (double& v : g.u) v = get<double>(f);
  return g;
}

std::vector<std::vector<Vec>> extract_front(const GridFunction& g, double level) {
  const int n = g.n;
  // crossing points keyed by edge: 2 * node for the edge to the right, 2 * node + 1 upward
  std::map<long, Vec> points;
  std::map<long, std::vector<long>> links;
  const auto edge_point = [&](long id) {
    auto it = points.find(id);
    if (it != points.end()) return;
    const long node = id / 2;
    const int i = static_cast<int>(node % n), j = static_cast<int>(node / n);
    const int i2 = id % 2 == 0 ? i + 1 : i, j2 = id % 2 == 0 ? j : j + 1;
    const double a = g(i, j) - level, b = g(i2, j2) - level;
    const double s = a / (a - b);
    points[id] = make_vec(g.coord(i) + s * (g.coord(i2) - g.coord(i)), g.coord(j) + s * (g.coord(j2) - g.coord(j)));
  };
  const auto link = [&](long a, long b) {
    edge_point(a);
    edge_point(b);
    links[a].push_back(b);
    links[b].push_back(a);
  };
  for (int j = 0; j + 1 < n; ++j)
    for (int i = 0; i + 1 < n; ++i) {
      const double v0 = g(i, j) - level, v1 = g(i + 1, j) - level, v2 = g(i + 1, j + 1) - level,
                   v3 = g(i, j + 1) - level;
      const int mask = (v0 >= 0) | (v1 >= 0) << 1 | (v2 >= 0) << 2 | (v3 >= 0) << 3;
      if (mask == 0 || mask == 15) continue;
      const long base = static_cast<long>(j) * n + i;
      const long bottom = 2 * base, left = 2 * base + 1, top = 2 * (base + n), right = 2 * (base + 1) + 1;
      switch (mask) {
        case 1: case 14: link(left, bottom); break;
        case 2: case 13: link(bottom, right); break;
        case 3: case 12: link(left, right); break;
        case 4: case 11: link(right, top); break;
        case 6: case 9: link(bottom, top); break;
        case 7: case 8: link(left, top); break;
        case 5: case 10: {
          const bool centre = 0.25 * (v0 + v1 + v2 + v3) >= 0.0;
          if ((mask == 5) == centre) {
            link(left, top);
            link(bottom, right);
          } else {
            link(left, bottom);
            link(right, top);
          }
          break;
        }
      }
    }
  std::vector<std::vector<Vec>> lines;
  std::map<long, bool> used;
  const auto walk = [&](long start) {
    std::vector<Vec> line{points[start]};
    used[start] = true;
    long cur = start;
    while (true) {
      long next = -1;
      for (long c : links[cur])
        if (!used[c]) {
          next = c;
          break;
        }
      if (next < 0) {
        for (long c : links[cur])
          if (c == start && line.size() > 2) line.push_back(points[start]);
        break;
      }
      used[next] = true;
      line.push_back(points[next]);
      cur = next;
    }
    lines.push_back(std::move(line));
  };
  for (const auto& [id, nb] : links)
    if (nb.size() == 1 && !used[id]) walk(id);
  for (const auto& [id, nb] : links)
    if (!used[id]) walk(id);
  return lines;
}

void write_front_csv(const std::vector<std::vector<Vec>>& lines, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path);
  f.precision(17);
  f << "polyline,x,y\n";
  for (std::size_t k = 0; k < lines.size(); ++k)
    for (const Vec& p : lines[k]) f << k << ',' << p(0) << ',' << p(1) << '\n';
}

double mean_front_radius(const std::vector<std::vector<Vec>>& lines, const Vec& center) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& line : lines)
    for (const Vec& p : line) {
      sum += (p - center).norm();
      ++count;
    }
  if (count == 0) throw InvalidParameter("empty front");
  return sum / count;
}

}  // namespace nlcurv
