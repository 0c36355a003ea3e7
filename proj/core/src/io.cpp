#include "balkwise/io.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace balkwise {

namespace {

using nlohmann::json;

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // JSON has no NaN; singular fits report null.
    out.push_back(std::isfinite(v[i]) ? json(v[i]) : json(nullptr));
  }
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out.push_back(vector_json(m.row(r).transpose()));
  }
  return out;
}

json number_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string join_vector(const Vector& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ';';
    os << v[i];
  }
  return os.str();
}

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve,
                     const std::string& value_name) {
  os << "price," << value_name << '\n';
  os << std::setprecision(17);
  for (const auto& pt : curve) os << pt.price << ',' << pt.value << '\n';
}

std::string fit_to_json(const FitResult& fit, int indent) {
  json j;
  j["theta_hat"] = vector_json(fit.theta_hat);
  j["loglik"] = number_json(fit.loglik);
  j["score_norm"] = number_json(fit.score_norm);
  j["boundary"] = fit.boundary;
  j["effective_n"] = fit.effective_n;
  j["total_k"] = fit.total_k;
  j["sigma_plugin"] = matrix_json(fit.sigma_plugin);
  j["std_err"] = vector_json(fit.std_err);
  return j.dump(indent);
}

void write_trace_csv(std::ostream& os, const PricingTrace& trace) {
  os << "iter,k_i,theta_i,theta_pooled,price_next,delta,revenue,time\n";
  os << std::setprecision(17);
  for (const auto& r : trace.records) {
    os << r.index << ',' << r.k << ',' << join_vector(r.theta) << ','
       << join_vector(r.theta_pooled) << ',' << r.price_next << ',' << r.delta
       << ',' << r.revenue << ',' << r.time << '\n';
  }
}

std::string trace_to_json(const PricingTrace& trace, int indent) {
  json j;
  j["final_price"] = trace.final_price;
  j["stopped_reason"] = to_string(trace.stopped_reason);
  j["total_observations"] = trace.total_observations;
  json records = json::array();
  for (const auto& r : trace.records) {
    records.push_back({{"iter", r.index},
                       {"price", r.price},
                       {"k_min", r.k_min},
                       {"k_i", r.k},
                       {"theta_i", vector_json(r.theta)},
                       {"theta_pooled", vector_json(r.theta_pooled)},
                       {"price_next", r.price_next},
                       {"delta", number_json(r.delta)},
                       {"revenue", r.revenue},
                       {"time", r.time},
                       {"boundary_retries", r.boundary_retries}});
  }
  j["records"] = std::move(records);
  return j.dump(indent);
}

void write_stationary_csv(std::ostream& os, const StationaryDist& dist) {
  os << "state,prob\n";
  os << std::setprecision(17);
  for (int q = 0; q <= dist.qstar; ++q) os << q << ',' << dist.probs[q] << '\n';
}

}  // namespace balkwise
