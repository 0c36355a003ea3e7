#include "balkwise/optimize.hpp"

#include <cmath>
#include <limits>

namespace balkwise {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;  // 1 / golden ratio

double finite_or_neg_inf(double v) {
  return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
}

}  // namespace

ScalarOptimum golden_section_maximize(const std::function<double(double)>& f,
                                      double lo, double hi, double x_tol) {
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = finite_or_neg_inf(f(c));
  double fd = finite_or_neg_inf(f(d));
  while (b - a > x_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = finite_or_neg_inf(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = finite_or_neg_inf(f(d));
    }
  }
  ScalarOptimum best{fc >= fd ? c : d, std::max(fc, fd), lo, hi};
  // The end points are candidates too: maxima on the boundary of the
  // bracket are reached only in the limit otherwise.
  for (double x : {lo, hi}) {
    const double v = finite_or_neg_inf(f(x));
    if (v > best.value) {
      best.x = x;
      best.value = v;
    }
  }
  return best;
}

ScalarOptimum grid_golden_maximize(const std::function<double(double)>& f,
                                   double lo, double hi, int grid_points,
                                   double x_tol) {
  if (!(lo < hi)) throw ValidationError("search interval must have lo < hi");
  if (grid_points < 3) throw ValidationError("grid needs at least 3 points");
  const double step = (hi - lo) / (grid_points - 1);
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double x = i + 1 == grid_points ? hi : lo + i * step;
    const double v = finite_or_neg_inf(f(x));
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  const double a = lo + std::max(best - 1, 0) * step;
  const double b = best + 1 >= grid_points ? hi : lo + (best + 1) * step;
  ScalarOptimum refined = golden_section_maximize(f, a, b, x_tol);
  refined.bracket_lo = a;
  refined.bracket_hi = b;
  if (refined.value < best_value) {
    refined.x = best + 1 == grid_points ? hi : lo + best * step;
    refined.value = best_value;
  }
  return refined;
}

BoxOptimum projected_bfgs_maximize(
    const std::function<ValueGrad(const Vector&)>& f, const ParamSpace& box,
    const Vector& start, const BoxOptions& opts) {
  const int n = box.dim();
  const Vector width = box.width();
  Vector x = box.project(start);
  ValueGrad cur = f(x);
  if (!std::isfinite(cur.value)) {
    throw NumericalError("objective is not finite at the starting point");
  }

  // Inverse-Hessian approximation of -f; first step moves ~10% of the box.
  Matrix inv_hess = Matrix::Identity(n, n) *
                    (0.1 * width.minCoeff() / std::max(cur.grad.norm(), 1e-300));
  bool scaled = false;

  BoxOptimum out;
  for (int it = 0; it < opts.max_iterations; ++it) {
    out.iterations = it + 1;
    // Coordinates pinned at a bound with the gradient pointing outwards.
    Eigen::Array<bool, Eigen::Dynamic, 1> free(n);
    for (int j = 0; j < n; ++j) {
      const bool at_lo = x[j] <= box.lower()[j] && cur.grad[j] < 0.0;
      const bool at_hi = x[j] >= box.upper()[j] && cur.grad[j] > 0.0;
      free[j] = !(at_lo || at_hi);
    }
    Vector pgrad = Vector::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (free[j]) pgrad[j] = cur.grad[j];
    }
    if (pgrad.cwiseAbs().maxCoeff() <= opts.grad_tol) {
      out.converged = true;
      break;
    }

    Vector dir = inv_hess * pgrad;
    for (int j = 0; j < n; ++j) {
      if (!free[j]) dir[j] = 0.0;
    }
    if (dir.dot(pgrad) <= 0.0) {
      inv_hess = Matrix::Identity(n, n) *
                 (0.1 * width.minCoeff() / std::max(pgrad.norm(), 1e-300));
      scaled = false;
      dir = inv_hess * pgrad;
    }

    double alpha = 1.0;
    Vector x_new;
    ValueGrad next;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
      x_new = box.project(x + alpha * dir);
      next = f(x_new);
      if (std::isfinite(next.value) &&
          next.value >= cur.value + 1e-4 * cur.grad.dot(x_new - x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.converged = true;  // no ascent possible at working precision
      break;
    }

    const Vector s = x_new - x;
    const Vector y = cur.grad - next.grad;  // gradient change of -f
    x = x_new;
    cur = next;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        inv_hess = Matrix::Identity(n, n) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Matrix eye = Matrix::Identity(n, n);
      inv_hess = (eye - rho * s * y.transpose()) * inv_hess *
                     (eye - rho * y * s.transpose()) +
                 rho * s * s.transpose();
    }
    if ((s.cwiseAbs().array() <= opts.x_tol * width.array()).all()) {
      out.converged = true;
      break;
    }
  }
  out.x = x;
  out.value = cur.value;
  return out;
}

}  // namespace balkwise
