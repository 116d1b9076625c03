#include "nlcurv/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>

namespace nlcurv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string vec_str(const Vec& v) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
  os << ')';
  return os.str();
}

class Ball final : public ImplicitSurface {
 public:
  Ball(Vec c, double r) : c_(std::move(c)), r_(r) {}
  int dimension() const override { return static_cast<int>(c_.size()); }
  double phi(const Vec& x) const override { return r_ * r_ - (x - c_).squaredNorm(); }
  Vec gradient(const Vec& x) const override { return -2.0 * (x - c_); }
  Mat hessian(const Vec&) const override { return -2.0 * Mat::Identity(c_.size(), c_.size()); }
  double bounding_radius() const override { return c_.norm() + r_; }
  std::string name() const override {
    std::ostringstream os;
    os << "ball" << vec_str(c_) << "r" << r_;
    return os.str();
  }

 private:
  Vec c_;
  double r_;
};

class Ellipsoid final : public ImplicitSurface {
 public:
  Ellipsoid(Vec c, Vec a) : c_(std::move(c)), inv2_(a.size()), amax_(a.maxCoeff()), a_(std::move(a)) {
    for (int i = 0; i < a_.size(); ++i) inv2_(i) = 1.0 / (a_(i) * a_(i));
  }
  int dimension() const override { return static_cast<int>(c_.size()); }
  double phi(const Vec& x) const override { return 1.0 - (x - c_).cwiseProduct(x - c_).dot(inv2_); }
  Vec gradient(const Vec& x) const override { return -2.0 * (x - c_).cwiseProduct(inv2_); }
  Mat hessian(const Vec&) const override { return Mat((-2.0 * inv2_).asDiagonal()); }
  double bounding_radius() const override { return c_.norm() + amax_; }
  std::string name() const override { return "ellipsoid" + vec_str(c_) + "a" + vec_str(a_); }

 private:
  Vec c_, inv2_;
  double amax_;
  Vec a_;
};

class Halfspace final : public ImplicitSurface {
 public:
  Halfspace(Vec e, double offset) : e_(std::move(e)), offset_(offset) {}
  int dimension() const override { return static_cast<int>(e_.size()); }
  double phi(const Vec& x) const override { return offset_ - x.dot(e_); }
  Vec gradient(const Vec&) const override { return -e_; }
  Mat hessian(const Vec&) const override { return Mat::Zero(e_.size(), e_.size()); }
  double bounding_radius() const override { return kInf; }
  std::string name() const override {
    std::ostringstream os;
    os << "halfspace" << vec_str(e_) << "o" << offset_;
    return os.str();
  }

 private:
  Vec e_;
  double offset_;
};

class Transformed final : public ImplicitSurface {
 public:
  Transformed(SurfacePtr base, Mat r, Vec shift) : base_(std::move(base)), r_(std::move(r)), shift_(std::move(shift)) {}
  int dimension() const override { return base_->dimension(); }
  double phi(const Vec& x) const override { return base_->phi(local(x)); }
  Vec gradient(const Vec& x) const override { return r_ * base_->gradient(local(x)); }
  Mat hessian(const Vec& x) const override { return r_ * base_->hessian(local(x)) * r_.transpose(); }
  double bounding_radius() const override { return base_->bounding_radius() + shift_.norm(); }
  std::string name() const override { return "moved-" + base_->name() + "+" + vec_str(shift_); }

 private:
  Vec local(const Vec& x) const { return r_.transpose() * (x - shift_); }
  SurfacePtr base_;
  Mat r_;
  Vec shift_;
};

class Complement final : public ImplicitSurface {
 public:
  explicit Complement(SurfacePtr base) : base_(std::move(base)) {}
  int dimension() const override { return base_->dimension(); }
  double phi(const Vec& x) const override { return -base_->phi(x); }
  Vec gradient(const Vec& x) const override { return -base_->gradient(x); }
  Mat hessian(const Vec& x) const override { return -base_->hessian(x); }
  double bounding_radius() const override { return base_->bounding_radius(); }
  std::string name() const override { return "complement-" + base_->name(); }

 private:
  SurfacePtr base_;
};

// Catmull-Rom weights on [0,1] for nodes -1, 0, 1, 2 and their first two derivatives.
void catmull_rom(double t, std::array<double, 4>& w, std::array<double, 4>& dw, std::array<double, 4>& ddw) {
  const double t2 = t * t, t3 = t2 * t;
  w = {0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t), 0.5 * (t3 - t2)};
  dw = {0.5 * (-3 * t2 + 4 * t - 1), 0.5 * (9 * t2 - 10 * t), 0.5 * (-9 * t2 + 8 * t + 1), 0.5 * (3 * t2 - 2 * t)};
  ddw = {0.5 * (-6 * t + 4), 0.5 * (18 * t - 10), 0.5 * (-18 * t + 8), 0.5 * (6 * t - 2)};
}

class GridSurface final : public ImplicitSurface {
 public:
  GridSurface(Vec lo, double h, std::vector<int> dims, std::vector<double> values, double c_out, double bound)
      : lo_(std::move(lo)), h_(h), dims_(std::move(dims)), values_(std::move(values)), c_out_(c_out), bound_(bound) {}

  int dimension() const override { return static_cast<int>(lo_.size()); }
  double phi(const Vec& x) const override {
    double v;
    eval(x, &v, nullptr, nullptr);
    return v;
  }
  Vec gradient(const Vec& x) const override {
    double v;
    Vec g;
    eval(x, &v, &g, nullptr);
    return g;
  }
  Mat hessian(const Vec& x) const override {
    double v;
    Vec g;
    Mat hm;
    eval(x, &v, &g, &hm);
    return hm;
  }
  double bounding_radius() const override { return bound_; }
  std::string name() const override { return "grid"; }

 private:
  double node(const std::array<int, 3>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dimension(); ++a) {
      if (idx[a] < 0 || idx[a] >= dims_[a]) return c_out_;
      flat = flat * dims_[a] + idx[a];
    }
    return values_[flat];
  }

  void eval(const Vec& x, double* v, Vec* g, Mat* hm) const {
    const int d = dimension();
    std::array<int, 3> base{};
    std::array<std::array<double, 4>, 3> w{}, dw{}, ddw{};
    for (int a = 0; a < d; ++a) {
      const double s = (x(a) - lo_(a)) / h_;
      const double fl = std::floor(s);
      base[a] = static_cast<int>(fl);
      catmull_rom(s - fl, w[a], dw[a], ddw[a]);
    }
    *v = 0.0;
    if (g) *g = Vec::Zero(d);
    if (hm) *hm = Mat::Zero(d, d);
    std::array<int, 3> o{};
    const int count = d == 2 ? 16 : 64;
    for (int c = 0; c < count; ++c) {
      int rest = c;
      for (int a = d - 1; a >= 0; --a) {
        o[a] = rest % 4;
        rest /= 4;
      }
      std::array<int, 3> idx{};
      for (int a = 0; a < d; ++a) idx[a] = base[a] - 1 + o[a];
      const double u = node(idx);
      double prod = 1.0;
      for (int a = 0; a < d; ++a) prod *= w[a][o[a]];
      *v += prod * u;
      if (g)
        for (int a = 0; a < d; ++a) {
          double p = dw[a][o[a]] / h_;
          for (int b = 0; b < d; ++b)
            if (b != a) p *= w[b][o[b]];
          (*g)(a) += p * u;
        }
      if (hm)
        for (int a = 0; a < d; ++a)
          for (int b = a; b < d; ++b) {
            double p = 1.0;
            for (int c2 = 0; c2 < d; ++c2) {
              if (a == b && c2 == a) p *= ddw[c2][o[c2]] / (h_ * h_);
              else if (c2 == a || c2 == b) p *= dw[c2][o[c2]] / h_;
              else p *= w[c2][o[c2]];
            }
            (*hm)(a, b) += p * u;
            if (a != b) (*hm)(b, a) += p * u;
          }
    }
  }

  Vec lo_;
  double h_;
  std::vector<int> dims_;
  std::vector<double> values_;
  double c_out_;
  double bound_;
};

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1) return std::abs(a(0, 0));
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Chart-disk sample points in frame coordinates: a dyadic radial ladder along a few directions.
std::vector<Vec> disk_samples(int dm1, double radius, std::vector<double>& ladder) {
  ladder.clear();
  for (int k = 24; k >= 0; --k) ladder.push_back(radius * std::ldexp(1.0, -k) * (k == 0 ? 0.999 : 1.0));
  std::vector<Vec> dirs;
  if (dm1 == 1) {
    dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  } else {
    for (int j = 0; j < 12; ++j) {
      const double a = 2.0 * std::numbers::pi * j / 12.0;
      dirs.push_back(make_vec(std::cos(a), std::sin(a)));
    }
  }
  std::vector<Vec> pts;
  for (double r : ladder)
    for (int q = 1; q <= 4; ++q)
      for (const Vec& w : dirs) pts.push_back(0.25 * q * r * w);
  return pts;
}

}  // namespace

SurfacePtr make_ball(const Vec& center, double radius) {
  if (!(radius > 0.0)) throw InvalidParameter("ball radius must be positive");
  if (center.size() < 2 || center.size() > 3) throw InvalidParameter("dimension must be 2 or 3");
  return std::make_shared<Ball>(center, radius);
}

SurfacePtr make_ellipsoid(const Vec& center, const Vec& semiaxes) {
  if (center.size() != semiaxes.size() || center.size() < 2 || center.size() > 3)
    throw InvalidParameter("ellipsoid center and semiaxes must agree in dimension 2 or 3");
  if (!(semiaxes.minCoeff() > 0.0)) throw InvalidParameter("semiaxes must be positive");
  return std::make_shared<Ellipsoid>(center, semiaxes);
}

SurfacePtr make_halfspace(const Vec& normal, double offset) {
  if (normal.size() < 2 || normal.size() > 3) throw InvalidParameter("dimension must be 2 or 3");
  if (std::abs(normal.norm() - 1.0) > 1e-12) throw InvalidParameter("halfspace normal must be a unit vector");
  return std::make_shared<Halfspace>(normal, offset);
}

SurfacePtr make_transformed(SurfacePtr base, const Mat& rotation, const Vec& shift) {
  const int d = base->dimension();
  if (rotation.rows() != d || rotation.cols() != d || shift.size() != d)
    throw InvalidParameter("transform dimension mismatch");
  if ((rotation.transpose() * rotation - Mat::Identity(d, d)).norm() > 1e-12)
    throw InvalidParameter("rotation must be orthogonal");
  return std::make_shared<Transformed>(std::move(base), rotation, shift);
}

SurfacePtr make_complement(SurfacePtr base) { return std::make_shared<Complement>(std::move(base)); }

SurfacePtr make_grid_surface(const Vec& lo, double h, std::vector<int> dims, std::vector<double> values,
                             double c_out, double bounding_radius) {
  const int d = static_cast<int>(lo.size());
  if (d < 2 || d > 3 || static_cast<int>(dims.size()) != d) throw InvalidParameter("grid dimension must be 2 or 3");
  if (!(h > 0.0)) throw InvalidParameter("grid spacing must be positive");
  std::size_t n = 1;
  for (int m : dims) {
    if (m < 4) throw InvalidParameter("grid needs at least 4 nodes per axis");
    n *= m;
  }
  if (values.size() != n) throw InvalidParameter("grid value count does not match dims");
  return std::make_shared<GridSurface>(lo, h, std::move(dims), std::move(values), c_out, bounding_radius);
}

BoundaryData normal_and_curvature_data(const ImplicitSurface& s, const Vec& x, double boundary_tol) {
  if (x.size() != s.dimension()) throw InvalidParameter("point dimension mismatch");
  const double v = s.phi(x);
  if (!(std::abs(v) <= boundary_tol)) throw InvalidParameter("point is not on the boundary: phi = " + std::to_string(v));
  const Vec g = s.gradient(x);
  const double n = g.norm();
  if (!(n >= kDegenerateGradient)) throw DegenerateGradient("|grad phi| below 1e-12 at a boundary point");
  return {-g / n, n, s.hessian(x)};
}

Vec project_to_boundary(const ImplicitSurface& s, const Vec& y, double tol, int max_iter) {
  Vec x = y;
  for (int i = 0; i < max_iter; ++i) {
    const double v = s.phi(x);
    if (std::abs(v) <= tol) return x;
    const Vec g = s.gradient(x);
    const double g2 = g.squaredNorm();
    if (!(g2 > kDegenerateGradient * kDegenerateGradient)) throw DegenerateGradient("projection hit a critical point");
    x -= (v / g2) * g;
  }
  if (std::abs(s.phi(x)) <= std::sqrt(tol)) return x;
  throw Error("boundary projection did not converge");
}

GraphChart::GraphChart(SurfacePtr surface, const Vec& base, double radius)
    : surface_(std::move(surface)), base_(base), radius_(radius) {
  if (!(radius > 0.0)) throw InvalidParameter("chart radius must be positive");
  const BoundaryData bd = normal_and_curvature_data(*surface_, base);
  normal_ = bd.normal;
  frame_ = nlcurv::tangent_frame(normal_);
  const int dm1 = dimension() - 1;
  // re-anchor on the exact zero along the normal so that f(0) = 0
  base_ = base_ - root(Vec::Zero(dm1)) * normal_;

  // every sampled t-line must cross the boundary exactly once inside the cylinder
  std::vector<double> ladder;
  const std::vector<Vec> samples = disk_samples(dm1, radius_, ladder);
  for (std::size_t i = 0; i < samples.size(); i += 7) {
    int changes = 0;
    double prev = surface_->phi(point(samples[i], -radius_));
    for (int j = 1; j <= 64; ++j) {
      const double cur = surface_->phi(point(samples[i], -radius_ + 2.0 * radius_ * j / 64.0));
      if ((cur >= 0.0) != (prev >= 0.0)) ++changes;
      prev = cur;
    }
    if (changes != 1) throw ChartRadiusTooLarge("boundary is not a single graph over the chart disk");
  }

  hess0_ = hess_f(Vec::Zero(dm1));
  sup_hess_ = spectral_norm(hess0_);
  std::vector<double> dev(ladder.size(), 0.0);
  for (const Vec& z : samples) {
    const Mat hz = hess_f(z);
    sup_hess_ = std::max(sup_hess_, spectral_norm(hz));
    const double dz = spectral_norm(hz - hess0_);
    for (std::size_t k = 0; k < ladder.size(); ++k)
      if (z.norm() <= ladder[k]) dev[k] = std::max(dev[k], dz);
  }
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const double env = k ? std::max(dev[k], modulus_ladder_.back().second) : dev[k];
    modulus_ladder_.emplace_back(ladder[k], env);
  }
}

double GraphChart::root(const Vec& z) const {
  const auto F = [&](double t) { return surface_->phi(point(z, t)); };
  const double lo = F(-radius_), hi = F(radius_);
  if (!(lo < 0.0 && hi > 0.0)) throw ChartRadiusTooLarge("no boundary crossing on a chart line");
  const double f0 = F(0.0);
  if (f0 == 0.0) return 0.0;
  boost::uintmax_t iters = 200;
  const auto tol = [](double a, double b) { return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a)); };
  const auto r = f0 < 0.0 ? boost::math::tools::toms748_solve(F, 0.0, radius_, f0, hi, tol, iters)
                          : boost::math::tools::toms748_solve(F, -radius_, 0.0, lo, f0, tol, iters);
  return 0.5 * (r.first + r.second);
}

double GraphChart::f(const Vec& z) const {
  if (z.size() != dimension() - 1) throw InvalidParameter("chart coordinate has wrong dimension");
  if (z.norm() > radius_) throw ChartRadiusTooLarge("chart coordinate outside the chart disk");
  return root(z);
}

Vec GraphChart::grad_f(const Vec& z) const {
  const double t = f(z);
  const Vec g = surface_->gradient(point(z, t));
  const double ft = -g.dot(normal_);
  return -(frame_.transpose() * g) / ft;
}

Mat GraphChart::hess_f(const Vec& z) const {
  const double t = f(z);
  const Vec y = point(z, t);
  const Vec g = surface_->gradient(y);
  const Mat h = surface_->hessian(y);
  const double ft = -g.dot(normal_);
  if (!(std::abs(ft) > kDegenerateGradient)) throw ChartRadiusTooLarge("boundary turns vertical inside the chart");
  const Vec fz = -(frame_.transpose() * g) / ft;
  const Mat fzz = frame_.transpose() * h * frame_;
  const Vec fzt = -(frame_.transpose() * h * normal_);
  const double ftt = normal_.dot(h * normal_);
  Mat out = fzz + fzt * fz.transpose() + fz * fzt.transpose() + ftt * fz * fz.transpose();
  return -out / ft;
}

double GraphChart::modulus(double delta) const {
  if (!(delta >= 0.0)) throw InvalidParameter("modulus radius must be nonnegative");
  if (delta == 0.0) return 0.0;
  for (const auto& [r, w] : modulus_ladder_)
    if (delta <= r) return w;
  return modulus_ladder_.back().second;
}

double default_chart_radius(const ImplicitSurface& s, const Vec& x) {
  const BoundaryData bd = normal_and_curvature_data(s, x);
  const Mat frame = tangent_frame(bd.normal);
  const double k = spectral_norm(-(frame.transpose() * bd.hessian * frame) / bd.grad_norm);
  const double r = std::min(s.bounding_radius() / 4.0, k > 0.0 ? 0.8 / k : kInf);
  return std::isfinite(r) ? r : 1.0;
}

GraphChart graph_chart(SurfacePtr s, const Vec& x, double radius, bool auto_shrink) {
  double r = radius > 0.0 ? radius : default_chart_radius(*s, x);
  for (int attempt = 0;; ++attempt) {
    try {
      return GraphChart(s, x, r);
    } catch (const ChartRadiusTooLarge&) {
      if (!auto_shrink || attempt >= 30) throw;
      r *= 0.5;
    }
  }
}

bool paraboloid_membership(const Vec& e, double lambda, const Vec& y) {
  const double c = y.dot(e);
  return std::abs(c) <= 0.5 * lambda * (y - c * e).squaredNorm();
}

std::vector<Vec> ellipse_boundary_points(const Vec& center, double a, double b, int n) {
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    pts.push_back(center + make_vec(a * std::cos(t), b * std::sin(t)));
  }
  return pts;
}

}  // namespace nlcurv
