#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlcurv/common.hpp"

namespace nlcurv {

enum class Family {
  fractional_two_exponent,  // mu|y|^-(d+sigma) on the unit ball, m|y|^-(d+1+s) outside
  fractional_exp_tail,      // mu e^{-m|y|} |y|^-(d+s)
  custom_radial,
};

struct KernelParams {
  double s = 0.5;
  double m = 1.0;
  double sigma = 0.5;
  double mu = 1.0;
};

/// Radial profile K0 supplied by the caller. Power-law asymptotics are required because the
/// quadrature closes its innermost shell with them.
struct CustomProfile {
  std::function<double(double)> value;       // K0(r)
  std::function<double(double)> derivative;  // K0'(r)
  double near_exponent = 0.5;                // K0(r) ~ near_constant * r^-(d+near_exponent), r -> 0
  double near_constant = 1.0;
  std::vector<double> breakpoints;           // radii where K0 is not smooth
};

/// Even, nonnegative interaction kernel of the form
///     K(y) = eps^-d * g(y/|y|) * K0(|y|/eps),   g(w) = 1 + a (w.v)^2,
/// i.e. a radial profile with an optional even angular modulation and a mass-preserving scale.
/// Immutable; copies share the profile.
class Kernel {
 public:
  static Kernel make_builtin(Family family, int d, const KernelParams& params);
  /// Caller-defined radial kernel; s and m are the declared fractional tail bound
  /// K <= m |y|^-(d+1+s) on |y| >= 1 (not verified here, see validate_admissibility).
  static Kernel custom_radial(int d, std::string name, CustomProfile profile, double s, double m);

  int dimension() const { return d_; }
  Family family() const { return family_; }
  const std::string& name() const { return name_; }
  const KernelParams& params() const { return params_; }
  double scale() const { return scale_; }
  bool is_radial() const { return amplitude_ == 0.0; }

  /// Declared tail exponent s and tail constant of this kernel, K <= m |y|^-(d+1+s) on |y| >= 1.
  double s() const { return params_.s; }
  double m() const;

  double value(const Vec& y) const;
  Vec gradient(const Vec& y) const;

  /// K(y) for y = r*w with |w| = 1 (skips the normalisation).
  double value_polar(double r, const Vec& w) const { return angular(w) * scaled_profile(r); }
  double angular(const Vec& w) const;
  double scaled_profile(double r) const;

  /// Integral of K(r w) r^{d-1} dr over [a, b] along the unit direction w; b may be +inf.
  double ray_mass(const Vec& w, double a, double b) const;
  /// Integral of K over |y| > r.
  double tail_mass(double r) const;
  /// Same, when an analytic form exists (closed form or special function).
  std::optional<double> tail_mass_closed_form(double r) const;
  /// Upper envelope m_eff |y|^-(d+1+s) of the kernel, valid for |y| >= scale.
  double tail_envelope(double r) const;

  /// K0 asymptotics near the origin for the scaled kernel: K(r w) ~ C g(w) r^-(d+p).
  double near_exponent() const;
  double near_constant() const;
  /// Radii (scaled) where the profile has a kink.
  std::vector<double> breakpoints() const;
  /// Profile with an exact power law beyond a radius: returns {radius, exponent q} with K0 ~ r^-q.
  std::optional<std::pair<double, double>> exact_power_tail() const;

  /// Scaled radial profile and its derivative, K0_eps(r) = eps^-d K0(r/eps).
  double profile_derivative_scaled(double r) const;

  Kernel rescaled(double eps) const;
  /// K o R^T for an orthogonal matrix R.
  Kernel rotated(const Mat& rotation) const;
  /// Multiplies by the even angular factor 1 + amplitude (w.v)^2.
  Kernel modulated(const Vec& direction, double amplitude) const;

  /// Angular average of g over S^{d-1}.
  double angular_mean() const { return 1.0 + amplitude_ / d_; }

 private:
  Kernel() = default;

  double profile(double r) const;             // unscaled K0
  double profile_derivative(double r) const;  // unscaled K0'
  double profile_tail(double r) const;        // unscaled int_r^inf K0 rho^{d-1}
  std::optional<double> profile_tail_closed(double r) const;

  Family family_ = Family::fractional_two_exponent;
  int d_ = 2;
  std::string name_;
  KernelParams params_;
  std::shared_ptr<const CustomProfile> custom_;
  double scale_ = 1.0;
  Vec axis_;
  double amplitude_ = 0.0;
};

}  // namespace nlcurv
