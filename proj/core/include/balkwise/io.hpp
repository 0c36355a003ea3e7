#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "balkwise/inference.hpp"
#include "balkwise/pricing.hpp"
#include "balkwise/stationary.hpp"

namespace balkwise {

/// One (price, value) point of a revenue or std curve.
struct CurvePoint {
  double price = 0.0;
  double value = 0.0;
};

/// Header `price,<value_name>`, e.g. `price,revenue` or `price,std`.
void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve,
                     const std::string& value_name);

/// Keys: theta_hat, loglik, score_norm, boundary, effective_n, total_k,
/// sigma_plugin (row-major nested arrays), std_err.
std::string fit_to_json(const FitResult& fit, int indent = 2);

/// Header `iter,k_i,theta_i,theta_pooled,price_next,delta,revenue,time`.
/// Vector parameters are written as `a;b;...` inside one field.
void write_trace_csv(std::ostream& os, const PricingTrace& trace);

std::string trace_to_json(const PricingTrace& trace, int indent = 2);

/// Header `state,prob`.
void write_stationary_csv(std::ostream& os, const StationaryDist& dist);

/// `a;b;...` with round-trip precision.
std::string join_vector(const Vector& v);

}  // namespace balkwise
