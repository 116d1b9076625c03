#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace nlcurv {

// Points and matrices live in R^2 or R^3; the fixed upper bound keeps them off the heap.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline Vec make_vec(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}
inline Vec make_vec(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

/// Surface area of the unit sphere S^{d-1} in R^d.
inline double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  }
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class DegenerateGradient : public Error {
 public:
  using Error::Error;
};

class ChartRadiusTooLarge : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

class InvalidWeight : public Error {
 public:
  using Error::Error;
};

class OutOfRegime : public Error {
 public:
  using Error::Error;
};

class CflViolation : public Error {
 public:
  using Error::Error;
};

class DomainTooSmall : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Quadrature failed to converge; carries the last two refinement iterates.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, double previous, double last)
      : Error(what + " (last iterates " + std::to_string(previous) + ", " + std::to_string(last) + ")"),
        previous_(previous),
        last_(last) {}
  double previous() const { return previous_; }
  double last() const { return last_; }

 private:
  double previous_;
  double last_;
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw InvalidParameter(msg);
}

/// Orthonormal basis of e-perp, built by Gram-Schmidt from the standard basis with the
/// axis most parallel to e left out. Columns are the tangent vectors.
inline Mat tangent_frame(const Vec& e) {
  const int d = static_cast<int>(e.size());
  int skip = 0;
  e.cwiseAbs().maxCoeff(&skip);
  Mat frame(d, d - 1);
  int col = 0;
  for (int axis = 0; axis < d; ++axis) {
    if (axis == skip) continue;
    Vec v = Vec::Zero(d);
    v(axis) = 1.0;
    v -= v.dot(e) * e;
    for (int k = 0; k < col; ++k) v -= v.dot(frame.col(k)) * frame.col(k);
    frame.col(col++) = v.normalized();
  }
  return frame;
}

}  // namespace nlcurv
