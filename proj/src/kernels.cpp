#include "nlcurv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "nlcurv/numerics.hpp"

namespace nlcurv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_common(int d, double s, double m) {
  if (d < 2 || d > 3) throw InvalidParameter("kernel dimension must be 2 or 3");
  if (!(s > 0.0 && s < 1.0)) throw InvalidParameter("tail exponent s must lie in (0,1)");
  if (!(m > 0.0)) throw InvalidParameter("tail constant m must be positive");
}

// Upper incomplete gamma Gamma(a, x) for a in (-1, 0): the recurrence through Gamma(a+1, x) for
// small x, the Lentz continued fraction otherwise (the recurrence cancels badly for large x).
double upper_gamma_negative(double a, double x) {
  if (x < 1.0) return (boost::math::tgamma(a + 1.0, x) - std::pow(x, a) * std::exp(-x)) / a;
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x)) * h;
}

std::string builtin_name(Family family, int d, const KernelParams& p) {
  const std::string head = family == Family::fractional_two_exponent ? "frac2" : "fracexp";
  return head + "-d" + std::to_string(d) + "-s" + std::to_string(p.s).substr(0, 5) + "-sig" +
         std::to_string(p.sigma).substr(0, 5);
}

}  // namespace

Kernel Kernel::make_builtin(Family family, int d, const KernelParams& params) {
  check_common(d, params.s, params.m);
  if (!(params.mu > 0.0)) throw InvalidParameter("near-field constant mu must be positive");
  if (family == Family::fractional_two_exponent && !(params.sigma > 0.0 && params.sigma < 1.0))
    throw InvalidParameter("near-field exponent sigma must lie in (0,1)");
  if (family == Family::custom_radial) throw InvalidParameter("custom kernels are built with custom_radial()");
  Kernel k;
  k.family_ = family;
  k.d_ = d;
  k.params_ = params;
  if (family == Family::fractional_exp_tail) k.params_.sigma = params.s;
  k.name_ = builtin_name(family, d, k.params_);
  k.axis_ = Vec::Zero(d);
  k.axis_(0) = 1.0;
  return k;
}

Kernel Kernel::custom_radial(int d, std::string name, CustomProfile profile, double s, double m) {
  check_common(d, s, m);
  if (!profile.value || !profile.derivative) throw InvalidParameter("custom profile needs value and derivative");
  Kernel k;
  k.family_ = Family::custom_radial;
  k.d_ = d;
  k.params_ = KernelParams{s, m, profile.near_exponent, profile.near_constant};
  k.custom_ = std::make_shared<const CustomProfile>(std::move(profile));
  k.name_ = std::move(name);
  k.axis_ = Vec::Zero(d);
  k.axis_(0) = 1.0;
  return k;
}

double Kernel::profile(double r) const {
  const KernelParams& p = params_;
  switch (family_) {
    case Family::fractional_two_exponent:
      return r <= 1.0 ? p.mu * std::pow(r, -(d_ + p.sigma)) : p.m * std::pow(r, -(d_ + 1.0 + p.s));
    case Family::fractional_exp_tail:
      return p.mu * std::exp(-p.m * r) * std::pow(r, -(d_ + p.s));
    case Family::custom_radial:
      return custom_->value(r);
  }
  return 0.0;
}

double Kernel::profile_derivative(double r) const {
  const KernelParams& p = params_;
  switch (family_) {
    case Family::fractional_two_exponent:
      return r <= 1.0 ? -(d_ + p.sigma) * p.mu * std::pow(r, -(d_ + p.sigma) - 1.0)
                      : -(d_ + 1.0 + p.s) * p.m * std::pow(r, -(d_ + 2.0 + p.s));
    case Family::fractional_exp_tail:
      return -p.mu * std::exp(-p.m * r) * std::pow(r, -(d_ + p.s)) * (p.m + (d_ + p.s) / r);
    case Family::custom_radial:
      return custom_->derivative(r);
  }
  return 0.0;
}

std::optional<double> Kernel::profile_tail_closed(double r) const {
  const KernelParams& p = params_;
  switch (family_) {
    case Family::fractional_two_exponent: {
      const double outer = p.m / (1.0 + p.s);
      if (r >= 1.0) return outer * std::pow(r, -(1.0 + p.s));
      return p.mu * (std::pow(r, -p.sigma) - 1.0) / p.sigma + outer;
    }
    case Family::fractional_exp_tail: {
      // mu * m^s * Gamma(-s, m r)
      return p.mu * std::pow(p.m, p.s) * upper_gamma_negative(-p.s, p.m * r);
    }
    case Family::custom_radial:
      return std::nullopt;
  }
  return std::nullopt;
}

double Kernel::profile_tail(double r) const {
  if (r == kInf) return 0.0;
  if (auto closed = profile_tail_closed(r)) return *closed;
  // radial-shell quadrature of K0 rho^{d-1}, closed beyond the last shell by the fitted power law
  const auto f = [this](double rho) { return profile(rho) * std::pow(rho, d_ - 1); };
  const double hi = r * 0x1p40;
  std::vector<double> breaks;
  for (double b = 2.0 * r; b < hi; b *= 2.0) breaks.push_back(b);
  if (custom_)
    for (double b : custom_->breakpoints) breaks.push_back(b);
  const numerics::Integral body = numerics::adaptive(f, r, hi, breaks, 1e-10);
  const double p = numerics::power_exponent(0.5 * hi, f(0.5 * hi), hi, f(hi));
  double closure = 0.0;
  if (std::isfinite(p) && p < -1.0) closure = numerics::power_tail(f(hi), hi, p);
  return body.value + closure;
}

double Kernel::m() const {
  double base = params_.m;
  if (family_ == Family::fractional_exp_tail) {
    // sup over r >= 1 of mu r e^{-m r}
    const double r_star = std::max(1.0, 1.0 / params_.m);
    base = params_.mu * r_star * std::exp(-params_.m * r_star);
  }
  return base * (1.0 + amplitude_) * std::pow(scale_, 1.0 + params_.s);
}

double Kernel::angular(const Vec& w) const {
  if (amplitude_ == 0.0) return 1.0;
  const double c = w.dot(axis_);
  return 1.0 + amplitude_ * c * c;
}

double Kernel::scaled_profile(double r) const {
  if (scale_ == 1.0) return profile(r);
  return std::pow(scale_, -d_) * profile(r / scale_);
}

double Kernel::profile_derivative_scaled(double r) const {
  if (scale_ == 1.0) return profile_derivative(r);
  return std::pow(scale_, -d_ - 1) * profile_derivative(r / scale_);
}

double Kernel::value(const Vec& y) const {
  const double r = y.norm();
  if (r == 0.0) return kInf;
  return value_polar(r, y / r);
}

Vec Kernel::gradient(const Vec& y) const {
  const double r = y.norm();
  const Vec w = y / r;
  const double k0 = scaled_profile(r);
  Vec g = profile_derivative_scaled(r) * angular(w) * w;
  if (amplitude_ != 0.0) {
    const double c = w.dot(axis_);
    g += k0 * (2.0 * amplitude_ * c / r) * (axis_ - c * w);
  }
  return g;
}

double Kernel::ray_mass(const Vec& w, double a, double b) const {
  if (!(b > a)) return 0.0;
  const double ta = profile_tail(a / scale_);
  const double tb = b == kInf ? 0.0 : profile_tail(b / scale_);
  return angular(w) * (ta - tb);
}

double Kernel::tail_mass(double r) const {
  if (!(r > 0.0)) throw InvalidParameter("tail_mass needs r > 0");
  return sphere_area(d_) * angular_mean() * profile_tail(r / scale_);
}

std::optional<double> Kernel::tail_mass_closed_form(double r) const {
  if (!(r > 0.0)) throw InvalidParameter("tail_mass needs r > 0");
  auto t = profile_tail_closed(r / scale_);
  if (!t) return std::nullopt;
  return sphere_area(d_) * angular_mean() * *t;
}

double Kernel::tail_envelope(double r) const { return m() * std::pow(r, -(d_ + 1.0 + params_.s)); }

double Kernel::near_exponent() const { return params_.sigma; }

double Kernel::near_constant() const {
  // eps^-d mu (r/eps)^-(d+sigma) = mu eps^sigma r^-(d+sigma)
  return params_.mu * std::pow(scale_, params_.sigma);
}

std::vector<double> Kernel::breakpoints() const {
  std::vector<double> out;
  if (family_ == Family::fractional_two_exponent) out.push_back(scale_);
  if (custom_)
    for (double b : custom_->breakpoints) out.push_back(b * scale_);
  return out;
}

std::optional<std::pair<double, double>> Kernel::exact_power_tail() const {
  if (family_ == Family::fractional_two_exponent) return std::pair{scale_, d_ + 1.0 + params_.s};
  return std::nullopt;
}

Kernel Kernel::rescaled(double eps) const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidParameter("rescale needs eps > 0");
  Kernel k = *this;
  k.scale_ = scale_ * eps;
  return k;
}

Kernel Kernel::rotated(const Mat& rotation) const {
  if (rotation.rows() != d_ || rotation.cols() != d_) throw InvalidParameter("rotation has wrong size");
  Kernel k = *this;
  k.axis_ = rotation * axis_;
  return k;
}

Kernel Kernel::modulated(const Vec& direction, double amplitude) const {
  if (direction.size() != d_ || !(amplitude >= 0.0)) throw InvalidParameter("bad modulation");
  if (amplitude_ != 0.0) throw InvalidParameter("kernel is already modulated");
  Kernel k = *this;
  k.axis_ = direction.normalized();
  k.amplitude_ = amplitude;
  k.name_ += "-aniso";
  return k;
}

}  // namespace nlcurv
