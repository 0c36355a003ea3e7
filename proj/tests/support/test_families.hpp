#pragma once

#include <cmath>
#include <functional>

#include "balkwise/model.hpp"

namespace balkwise::testing {

/// Two-parameter Weibull service values, theta = (shape, scale):
/// F(r) = 1 - exp(-(r / scale)^shape). Test-only; exercises the n > 1 paths.
class WeibullFamily final : public ValueFamily {
 public:
  WeibullFamily(double shape_lo = 0.3, double shape_hi = 5.0,
                double scale_lo = 0.5, double scale_hi = 200.0)
      : ValueFamily(ParamSpace(Eigen::Vector2d(shape_lo, scale_lo),
                               Eigen::Vector2d(shape_hi, scale_hi))) {}

  std::string name() const override { return "weibull"; }

  double cdf(double r, const Vector& t) const override {
    if (r <= 0.0) return 0.0;
    return -std::expm1(-z(r, t));
  }
  double survival(double r, const Vector& t) const override {
    if (r <= 0.0) return 1.0;
    return std::exp(-z(r, t));
  }
  Vector grad_cdf(double r, const Vector& t) const override {
    Vector g = Vector::Zero(2);
    if (r <= 0.0) return g;
    const double zz = z(r, t);
    const double s = std::exp(-zz);
    const double lr = std::log(r / t[1]);
    g[0] = s * zz * lr;
    g[1] = -s * t[0] * zz / t[1];
    return g;
  }
  Matrix hess_cdf(double r, const Vector& t) const override {
    Matrix h = Matrix::Zero(2, 2);
    if (r <= 0.0) return h;
    const double k = t[0];
    const double sc = t[1];
    const double zz = z(r, t);
    const double s = std::exp(-zz);
    const double lr = std::log(r / sc);
    const Eigen::Vector2d dz(zz * lr, -k * zz / sc);
    Matrix d2z(2, 2);
    d2z(0, 0) = zz * lr * lr;
    d2z(0, 1) = d2z(1, 0) = -zz * (k * lr + 1.0) / sc;
    d2z(1, 1) = k * (k + 1.0) * zz / (sc * sc);
    return s * (d2z - dz * dz.transpose());
  }
  double quantile(double u, const Vector& t) const override {
    return t[1] * std::pow(-std::log1p(-u), 1.0 / t[0]);
  }

 private:
  static double z(double r, const Vector& t) { return std::pow(r / t[1], t[0]); }
};

/// Central finite-difference gradient of a scalar function of theta.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x, double rel_step = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    Vector lo = x, hi = x;
    lo[j] -= h;
    hi[j] += h;
    g[j] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

/// Central finite-difference Jacobian of a vector function of theta.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f,
                          const Vector& x, double rel_step = 1e-6) {
  const Vector f0 = f(x);
  Matrix jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    Vector lo = x, hi = x;
    lo[j] -= h;
    hi[j] += h;
    jac.col(j) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return jac;
}

/// max |a - b| / max(scale, max |b|).
inline double rel_error(const Matrix& a, const Matrix& b, double scale = 1e-12) {
  return (a - b).cwiseAbs().maxCoeff() /
         std::max(scale, b.cwiseAbs().maxCoeff());
}

}  // namespace balkwise::testing
