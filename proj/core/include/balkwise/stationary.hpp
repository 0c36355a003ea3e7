#pragma once

#include <vector>

#include "balkwise/model.hpp"
#include "balkwise/optimize.hpp"

namespace balkwise {

/// Which stationary law of the queue length.
enum class Weighting {
  time,  ///< continuous-time occupancy, proportional to xi_q
  jump,  ///< occupancy at transition epochs, xi_q x total exit rate
};

const char* to_string(Weighting w);
Weighting weighting_from_string(const std::string& name);

struct StationaryDist {
  std::vector<double> probs;  ///< states 0..qstar, sums to one
  int qstar = 0;
  double tail_bound = 0.0;  ///< bound on the (relative) mass beyond qstar
  Weighting weighting = Weighting::time;
};

inline constexpr double kDefaultTailEps = 1e-12;

/// xi_0 = 1, xi_q = xi_{q-1} lambda_{q-1} / mu.
std::vector<double> xi_products(const Vector& theta, const ModelConfig& cfg,
                                const ValueFamily& fam, int qmax);

/// Stationary law truncated at the first state q* where lambda_q* / mu < 1/2
/// and the geometric tail bound drops below eps. Throws NumericalError
/// ("truncation failed") past one million states.
StationaryDist stationary_distribution(const Vector& theta,
                                       const ModelConfig& cfg,
                                       const ValueFamily& fam,
                                       double eps = kDefaultTailEps,
                                       Weighting weighting = Weighting::time);

/// Long-run revenue per unit time at `price` (cfg's own price is ignored).
double expected_revenue(double price, const Vector& theta,
                        const ModelConfig& cfg, const ValueFamily& fam,
                        double eps = kDefaultTailEps);

/// Per-state integrand of the asymptotic information:
/// mu lambda F' F'^T / ((1 - F)(mu + lambda (1 - F))^2) at r(q). Zero when
/// F(r(q)) is 0 or 1.
Matrix sigma_summand(int q, const Vector& theta, const ModelConfig& cfg,
                     const ValueFamily& fam);

struct SigmaResult {
  Matrix sigma;
  bool invertible = false;
};

/// Stationary expectation of sigma_summand.
///
/// Jump weighting is the ergodic limit of observed_information: state 0 is
/// left out because the chain leaves it deterministically and those steps
/// never enter the score. Time weighting applies the integrand at every
/// state including 0, which is how the closed-form curves of asymptotic std
/// against price are drawn.
SigmaResult theoretical_sigma(const Vector& theta, const ModelConfig& cfg,
                              const ValueFamily& fam,
                              double eps = kDefaultTailEps,
                              Weighting weighting = Weighting::jump);

/// sqrt(diag(Sigma^-1)) at `price`. Throws NumericalError if Sigma is
/// singular.
Vector asymptotic_std(double price, const Vector& theta, const ModelConfig& cfg,
                      const ValueFamily& fam, double eps = kDefaultTailEps,
                      Weighting weighting = Weighting::time);

/// Smallest price at which an empty queue attracts fewer than 1e-6 lambda
/// joining customers per unit time; the upper end of price searches.
double price_upper_bound(const Vector& theta, const ModelConfig& cfg,
                         const ValueFamily& fam);

struct PriceSearch {
  double lo = 0.01;
  double hi = 0.0;  ///< <= 0: use price_upper_bound
  int grid_points = 256;
  double x_tol = 1e-7;
};

/// argmax over price of expected_revenue.
ScalarOptimum revenue_maximizing_price(const Vector& theta,
                                       const ModelConfig& cfg,
                                       const ValueFamily& fam,
                                       const PriceSearch& search = {});

/// argmin over price of the first coordinate of asymptotic_std; `value`
/// holds the minimal std.
ScalarOptimum std_minimizing_price(const Vector& theta, const ModelConfig& cfg,
                                   const ValueFamily& fam,
                                   Weighting weighting = Weighting::time,
                                   const PriceSearch& search = {});

}  // namespace balkwise
