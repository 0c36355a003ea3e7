#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "balkwise/inference.hpp"
#include "balkwise/simulator.hpp"
#include "balkwise/stationary.hpp"

namespace balkwise {

/// Growth rule for the minimum sample size of the next iteration.
enum class Schedule {
  increment,   ///< k + 1
  doubling,    ///< 2k
  multiplier,  ///< ceil(m k), m > 1
};

const char* to_string(Schedule s);
Schedule schedule_from_string(const std::string& name);

struct PricingConfig {
  double p1 = 15.0;
  std::int64_t k1_min = 2;
  Schedule schedule = Schedule::increment;
  double multiplier = 2.0;  ///< used by Schedule::multiplier
  double tol = 0.01;
  int max_iterations = 1000;
  PriceSearch price_bounds;
  /// No new iteration starts once this many observations have been used;
  /// the last iteration may overshoot. Boundary retries after the first
  /// iteration also end the run, keeping the last price, once they reach it.
  std::optional<std::int64_t> observation_budget;
  /// An iteration gives up after retry_factor * k_min extra observations
  /// without an interior estimate.
  int retry_factor = 10;
  FitOptions fit;

  void validate() const;
};

std::int64_t next_k_min(const PricingConfig& pcfg, std::int64_t k_used);

struct IterationRecord {
  int index = 0;
  double price = 0.0;        ///< price posted while collecting
  std::int64_t k_min = 0;
  std::int64_t k = 0;        ///< observations actually used
  Vector theta;              ///< this iteration's estimate
  Vector theta_pooled;       ///< sample-size weighted over iterations 1..i
  double price_next = 0.0;
  double delta = 0.0;
  double revenue = 0.0;      ///< collected during the iteration
  double time = 0.0;         ///< elapsed during the iteration
  int boundary_retries = 0;
};

enum class StopReason { tolerance, max_iterations, budget };

const char* to_string(StopReason r);

struct PricingTrace {
  std::vector<IterationRecord> records;
  double final_price = 0.0;
  StopReason stopped_reason = StopReason::max_iterations;
  std::int64_t total_observations = 0;
};

/// Sample-size weighted mean of the per-iteration estimates.
Vector pooled_theta(const std::vector<IterationRecord>& records);

/// |pi/t - predicted| / (pi/t); +infinity when nothing was collected.
double delta_metric(double revenue, double time, double predicted_revenue_rate);

/// Relative gap between the record's realized revenue rate and the model's
/// stationary revenue at `price` under `theta_pooled`.
double delta_metric(const IterationRecord& record, const Vector& theta_pooled,
                    double price, const ModelConfig& cfg,
                    const ValueFamily& fam);

/// Iterative estimate-then-reprice loop. Each iteration collects k_min
/// observations at the current price, fits the MLE (adding one observation
/// at a time while the estimate sits on the boundary), pools the estimates,
/// moves to the revenue-maximizing price under the pooled estimate, and
/// stops once the realized revenue rate agrees with the model within tol.
PricingTrace run_pricing(const ModelConfig& base, const ValueFamily& fam,
                         ObservationSource& source, const PricingConfig& pcfg);

/// Evaluation mode: observations come from a simulated queue under theta0
/// that opens empty.
PricingTrace run_pricing(const ModelConfig& base, const ValueFamily& fam,
                         const Vector& theta0, const PricingConfig& pcfg,
                         std::uint64_t seed);

/// Evaluation of a finished trace against the true parameter.
struct TraceMetrics {
  int iterations = 0;
  std::int64_t total_observations = 0;
  double optimal_price = 0.0;
  double optimal_revenue = 0.0;
  double final_fraction = 0.0;       ///< Pi(p_final) / Pi(p*)
  double cumulative_fraction = 0.0;  ///< sum t_i Pi(p_i) / sum t_i Pi(p*)
  double lost_revenue = 0.0;         ///< sum t_i (Pi(p*) - Pi(p_i; theta_i))
  double final_price_error = 0.0;    ///< p_final - p*
};

TraceMetrics trace_metrics(const PricingTrace& trace, const Vector& theta0,
                           const ModelConfig& base, const ValueFamily& fam);

/// Deployment mode: transitions read from CSV rows `state,up,hold` (the
/// pre-transition state, the up flag, the holding time). The posted price is
/// not part of the stream.
class StreamObservationSource final : public ObservationSource {
 public:
  explicit StreamObservationSource(std::istream& in);

  Transition next(const ModelConfig& cfg) override;
  int state() const override { return state_; }

 private:
  std::istream* in_;
  int state_ = 0;
  std::size_t line_ = 0;
};

}  // namespace balkwise
