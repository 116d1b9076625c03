#pragma once

#include <string>
#include <vector>

#include "nlcurv/common.hpp"
#include "nlcurv/kernels.hpp"

namespace nlcurv {

/// Node values on the square [-L, L]^2 with n nodes per axis (spacing h = 2L/(n-1)).
/// Row-major: value(i, j) sits at (-L + i h, -L + j h). Off-grid values are c_out.
struct GridFunction {
  int d = 2;
  int n = 0;
  double h = 0.0;
  double L = 0.0;
  double c_out = 0.0;
  double t = 0.0;
  std::vector<double> u;

  static GridFunction zeros(int n, double L, double c_out);
  template <class F>
  static GridFunction from_function(int n, double L, double c_out, F&& f) {
    GridFunction g = zeros(n, L, c_out);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) g.u[index(g.n, i, j)] = f(g.coord(i), g.coord(j));
    return g;
  }

  static std::size_t index(int n, int i, int j) { return static_cast<std::size_t>(j) * n + i; }
  double coord(int i) const { return -L + i * h; }
  double operator()(int i, int j) const {
    return (i < 0 || j < 0 || i >= n || j >= n) ? c_out : u[index(n, i, j)];
  }
  double& at(int i, int j) { return u[index(n, i, j)]; }

  /// Finite values and a constant band of width >= 3h along the boundary.
  void validate() const;
  /// max over axis-neighbour pairs |u_i - u_j| / h.
  double lipschitz() const;
  double max_value() const;
};

/// clamp(R - |y - c|, -c0, c0) with c_out = -c0.
GridFunction clamped_circle(int n, double L, const Vec& center, double R, double c0);

enum class LocalScheme {
  median,   // u + lambda (Med_rho u - u) over a fixed anisotropic circle; monotone
  central,  // tr(M D2_h u) with the central 9-point Hessian; not monotone
};

/// Stencil radius of the median scheme when none is given: max(h, 0.6 sqrt(h)).
double default_median_radius(double h);

struct FlowConfig {
  explicit FlowConfig(Kernel k) : kernel(std::move(k)) {}
  Kernel kernel;
  double eps = 0.0;  // 0 selects the local problem
  double T = 0.0;
  double cfl = 0.9;
  double theta = 1e-3;
  double snapshot_every = 0.0;  // 0: initial and final only
  LocalScheme scheme = LocalScheme::median;
  double median_radius = 0.0;   // 0: default_median_radius(h)
  double dt = 0.0;              // fixed step; 0 takes stable_time_step
  bool tail = true;             // analytic far-field tail at c_out's level
  double ramp_width = 0.5;      // cells; 0 gives the plain nodal sign with ties inside
  double near_inner = 2.0;      // cells; near/far blend of the nonlocal kernel
  double near_outer = 5.0;
  double cutoff_radius = 0.0;   // 0: domain diagonal
  void validate() const;
};

/// Angular table of M_K(e) = m(e) v (x) v in d = 2 (v = e rotated by 90 degrees) and the
/// stencil used to apply it.
class LocalOperator {
 public:
  /// Full anisotropy of k. radius 0 picks default_median_radius(h).
  LocalOperator(const Kernel& k, double h, double theta, LocalScheme scheme = LocalScheme::median,
                double radius = 0.0);
  /// Anisotropy of (1/eps) K_eps (1 - psi), psi the smooth blend from inner to outer (absolute radii).
  static LocalOperator truncated(const Kernel& k, double eps, double inner, double outer, double h, double theta,
                                 LocalScheme scheme = LocalScheme::median, double radius = 0.0);

  double m(const Vec& e) const;
  double mean_m() const { return mean_; }
  double max_m() const { return max_; }
  /// Approximates tr(M(p/|p|) D2 u) at node (i, j). The central scheme falls back to the
  /// isotropic mean below |p| < theta h.
  double apply(const GridFunction& g, int i, int j) const;
  /// Coefficient of u(i, j) lost per unit time; the update is monotone while dt * this <= 1.
  double diagonal(const GridFunction& g, int i, int j) const;
  double max_diagonal() const { return max_diag_; }
  LocalScheme scheme() const { return scheme_; }
  double radius() const { return radius_; }
  /// Continuous median of {u(x + r_k w_k)} with linear interpolation in the angle.
  double median(const GridFunction& g, int i, int j) const;

 private:
  LocalOperator() = default;
  void build_stencil();
  struct Tap {
    int di, dj;
    double fx, fy;
  };
  std::vector<double> table_;  // m at angles k pi / table size, k = 0..size-1
  double mean_ = 0.0, max_ = 0.0, max_diag_ = 0.0;
  double h_ = 1.0, theta_ = 1e-3, radius_ = 0.0;
  LocalScheme scheme_ = LocalScheme::median;
  std::vector<Tap> taps_;  // equally spaced angles around the full circle
};

GridFunction step_local(const GridFunction& u, const LocalOperator& op, double dt);
GridFunction step_local(const GridFunction& u, const Kernel& k, double dt, double theta = 1e-3,
                        LocalScheme scheme = LocalScheme::median);
/// cfl over the largest diagonal coefficient: cfl h^2 / (2 max m) for the central scheme,
/// cfl rho^2 / (2 max m) for the median scheme.
double local_time_step(const LocalOperator& op, double cfl);

/// Precomputed far-field weights, near-field anisotropy and tail for one (kernel, eps, grid).
class NonlocalOperator {
 public:
  NonlocalOperator(const FlowConfig& cfg, int n, double L);
  double eps() const { return eps_; }
  double cutoff_radius() const { return cutoff_; }
  const LocalOperator& near() const { return near_; }

  struct Rates {
    std::vector<double> rate;       // du/dt
    std::vector<double> curvature;  // H_eps estimate, NaN where |p| < theta h
    double dt_max = 0.0;            // min of the eps-CFL bound and the monotonicity bound
  };
  Rates rates(const GridFunction& u) const;
  /// Step that stays within dt_max for every grid function with Lip_h <= lip.
  double stable_step(double lip) const;

 private:
  double chi(double diff) const;
  double chi_slope(double diff) const;
  double eps_, h_, theta_, cfl_, ramp_, cutoff_;
  int reach_ = 0;  // cutoff in cells
  std::vector<double> weight_;  // (2 reach + 1)^2 table, 0 inside the inner blend radius
  double total_ = 0.0;          // sum of weights plus the analytic tail beyond the cutoff
  LocalOperator near_;
};

GridFunction step_nonlocal(const GridFunction& u, const NonlocalOperator& op, double dt);
GridFunction step_nonlocal(const GridFunction& u, const Kernel& k, double eps, double dt);

struct Trajectory {
  std::vector<GridFunction> snapshots;
  std::vector<double> lipschitz;        // Lip_h per snapshot
  double max_lipschitz = 0.0;           // running max over all steps
  std::vector<double> step_times;       // time after each step
  std::vector<double> step_max;         // max u after each step
  std::vector<double> modulus;          // sup |u(t_k) - u_0| per snapshot
  int steps = 0;
};

/// Fixed step used by evolve unless cfg.dt is set. Lip_h does not grow under either monotone
/// scheme, so the bound from u0 holds for the whole run.
double stable_time_step(const GridFunction& u0, const FlowConfig& cfg);
Trajectory evolve(const GridFunction& u0, const FlowConfig& cfg);

struct AprioriReport {
  bool lipschitz_ok = false;
  bool hoelder_ok = false;
  double hoelder_constant = 0.0;
  double max_lipschitz_ratio = 0.0;
};

/// Lip_h(u(t)) <= Lip_h(u0)(1 + tol); c fitted from |u(t) - u0| <= Lip_h(u0) sqrt(c t) and
/// checked on every snapshot pair.
AprioriReport check_apriori(const Trajectory& traj, const GridFunction& u0, double tol = 1e-9);

/// Catmull-Rom interpolation of g at the nodes of an n x n grid on the same square.
GridFunction resample(const GridFunction& g, int n);
/// sup |a - b| over a's nodes, b resampled when the grids differ.
double sup_distance(const GridFunction& a, const GridFunction& b);

void write_csv(const GridFunction& g, const std::string& path);
void write_binary(const GridFunction& g, const std::string& path);
GridFunction read_binary(const std::string& path);

/// Polylines of {u = level} by marching squares with linear interpolation along cell edges.
std::vector<std::vector<Vec>> extract_front(const GridFunction& g, double level = 0.0);
void write_front_csv(const std::vector<std::vector<Vec>>& lines, const std::string& path);
/// Mean distance of the front vertices from a centre.
double mean_front_radius(const std::vector<std::vector<Vec>>& lines, const Vec& center);

}  // namespace nlcurv
