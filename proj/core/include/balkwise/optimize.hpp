#pragma once

#include <functional>

#include "balkwise/model.hpp"

namespace balkwise {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
  double bracket_lo = 0.0;  ///< grid neighbours of the winning grid point
  double bracket_hi = 0.0;
};

/// Maximizes f on [lo, hi]: evaluates `grid_points` equispaced points, then
/// refines by golden-section search between the neighbours of the best one.
/// Non-finite values of f are treated as -infinity.
ScalarOptimum grid_golden_maximize(const std::function<double(double)>& f,
                                   double lo, double hi, int grid_points,
                                   double x_tol);

/// Golden-section maximization of f on [lo, hi], assuming unimodality there.
ScalarOptimum golden_section_maximize(const std::function<double(double)>& f,
                                      double lo, double hi, double x_tol);

/// Value and gradient of an objective to maximize.
struct ValueGrad {
  double value;
  Vector grad;
};

struct BoxOptions {
  int max_iterations = 500;
  double grad_tol = 1e-10;  ///< on the projected gradient
  double x_tol = 1e-12;     ///< relative to the box width
};

struct BoxOptimum {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Projected BFGS ascent over the box: BFGS directions on the free
/// coordinates, coordinates pinned at a bound by the gradient held fixed,
/// Armijo backtracking along the projected path.
BoxOptimum projected_bfgs_maximize(
    const std::function<ValueGrad(const Vector&)>& f, const ParamSpace& box,
    const Vector& start, const BoxOptions& opts = {});

}  // namespace balkwise
