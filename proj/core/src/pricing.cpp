#include "balkwise/pricing.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

namespace balkwise {

const char* to_string(Schedule s) {
  switch (s) {
    case Schedule::increment: return "increment";
    case Schedule::doubling: return "doubling";
    case Schedule::multiplier: return "multiplier";
  }
  return "?";
}

Schedule schedule_from_string(const std::string& name) {
  if (name == "increment") return Schedule::increment;
  if (name == "doubling") return Schedule::doubling;
  if (name == "multiplier") return Schedule::multiplier;
  throw ValidationError("schedule must be increment, doubling or multiplier, got '" +
                        name + "'");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::budget: return "budget";
  }
  return "?";
}

void PricingConfig::validate() const {
  if (!(p1 >= 0.0) || !std::isfinite(p1)) throw ValidationError("p1 must be >= 0");
  if (k1_min < 1) throw ValidationError("k1_min must be >= 1");
  if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
  if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (schedule == Schedule::multiplier && !(multiplier > 1.0)) {
    throw ValidationError("schedule multiplier must be > 1");
  }
  if (observation_budget && *observation_budget < 1) {
    throw ValidationError("observation budget must be >= 1");
  }
  if (retry_factor < 1) throw ValidationError("retry_factor must be >= 1");
}

std::int64_t next_k_min(const PricingConfig& pcfg, std::int64_t k_used) {
  switch (pcfg.schedule) {
    case Schedule::increment: return k_used + 1;
    case Schedule::doubling: return 2 * k_used;
    case Schedule::multiplier:
      return std::max<std::int64_t>(
          k_used + 1, static_cast<std::int64_t>(std::ceil(pcfg.multiplier * k_used)));
  }
  return k_used + 1;
}

Vector pooled_theta(const std::vector<IterationRecord>& records) {
  if (records.empty()) throw ValidationError("pooling needs at least one record");
  Vector sum = Vector::Zero(records.front().theta.size());
  double weight = 0.0;
  for (const auto& r : records) {
    sum += static_cast<double>(r.k) * r.theta;
    weight += static_cast<double>(r.k);
  }
  return sum / weight;
}

double delta_metric(double revenue, double time, double predicted_revenue_rate) {
  if (!(revenue > 0.0) || !(time > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  const double realized = revenue / time;
  return std::abs(realized - predicted_revenue_rate) / realized;
}

double delta_metric(const IterationRecord& record, const Vector& theta_pooled,
                    double price, const ModelConfig& cfg,
                    const ValueFamily& fam) {
  if (!(record.revenue > 0.0)) return std::numeric_limits<double>::infinity();
  return delta_metric(record.revenue, record.time,
                      expected_revenue(price, theta_pooled, cfg, fam));
}

namespace {

void add_transition(TransitionCounts& counts, const Transition& t) {
  if (t.from + 1 >= static_cast<int>(counts.up.size())) {
    counts.up.resize(t.from + 2, 0);
    counts.down.resize(t.from + 2, 0);
  }
  (t.up ? counts.up : counts.down)[t.from] += 1;
  ++counts.total_k;
}

/// Fit, or nothing when the data cannot support an interior estimate yet.
std::optional<FitResult> try_fit(const TransitionCounts& counts,
                                 const ModelConfig& cfg, const ValueFamily& fam,
                                 const FitOptions& opts) {
  try {
    FitResult fit = fit_mle(counts, cfg, fam, opts);
    if (fit.boundary) return std::nullopt;
    return fit;
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace

PricingTrace run_pricing(const ModelConfig& base, const ValueFamily& fam,
                         ObservationSource& source, const PricingConfig& pcfg) {
  pcfg.validate();
  PricingTrace trace;
  double price = pcfg.p1;
  std::int64_t k_min = pcfg.k1_min;

  for (int i = 1; i <= pcfg.max_iterations; ++i) {
    if (pcfg.observation_budget && trace.total_observations >= *pcfg.observation_budget) {
      trace.stopped_reason = StopReason::budget;
      return trace;
    }
    const ModelConfig cfg = base.with_price(price);
    IterationRecord rec;
    rec.index = i;
    rec.price = price;
    rec.k_min = k_min;

    TransitionCounts counts;
    auto collect = [&] {
      const Transition t = source.next(cfg);
      add_transition(counts, t);
      rec.time += t.hold;
      if (t.up) rec.revenue += price;
    };
    for (std::int64_t j = 0; j < k_min; ++j) collect();

    std::optional<FitResult> fit = try_fit(counts, cfg, fam, pcfg.fit);
    const std::int64_t retry_cap = pcfg.retry_factor * k_min;
    while (!fit) {
      if (i > 1 && pcfg.observation_budget &&
          trace.total_observations + counts.total_k >= *pcfg.observation_budget) {
        // Budget spent without an interior fit: keep the last price.
        trace.total_observations += counts.total_k;
        trace.stopped_reason = StopReason::budget;
        return trace;
      }
      if (rec.boundary_retries >= retry_cap) {
        std::ostringstream msg;
        msg << "iteration " << i << ": no interior estimate after "
            << rec.boundary_retries << " extra observations";
        throw NumericalError(msg.str());
      }
      collect();
      ++rec.boundary_retries;
      fit = try_fit(counts, cfg, fam, pcfg.fit);
    }
    rec.k = counts.total_k;
    rec.theta = fit->theta_hat;

    trace.records.push_back(rec);
    IterationRecord& cur = trace.records.back();
    cur.theta_pooled = pooled_theta(trace.records);
    cur.price_next =
        revenue_maximizing_price(cur.theta_pooled, base, fam, pcfg.price_bounds).x;
    cur.delta = delta_metric(cur, cur.theta_pooled, price, base, fam);

    trace.total_observations += cur.k;
    trace.final_price = cur.price_next;
    price = cur.price_next;
    if (cur.delta < pcfg.tol) {
      trace.stopped_reason = StopReason::tolerance;
      return trace;
    }
    k_min = next_k_min(pcfg, cur.k);
  }
  trace.stopped_reason = StopReason::max_iterations;
  return trace;
}

PricingTrace run_pricing(const ModelConfig& base, const ValueFamily& fam,
                         const Vector& theta0, const PricingConfig& pcfg,
                         std::uint64_t seed) {
  SimulatedQueue queue(fam, theta0, seed, 0);
  return run_pricing(base, fam, queue, pcfg);
}

TraceMetrics trace_metrics(const PricingTrace& trace, const Vector& theta0,
                           const ModelConfig& base, const ValueFamily& fam) {
  if (trace.records.empty()) throw ValidationError("trace has no iterations");
  TraceMetrics m;
  m.iterations = static_cast<int>(trace.records.size());
  m.total_observations = trace.total_observations;
  const ScalarOptimum best = revenue_maximizing_price(theta0, base, fam);
  m.optimal_price = best.x;
  m.optimal_revenue = best.value;
  m.final_fraction = expected_revenue(trace.final_price, theta0, base, fam) / best.value;
  m.final_price_error = trace.final_price - best.x;

  double earned = 0.0;
  double possible = 0.0;
  for (const auto& r : trace.records) {
    earned += r.time * expected_revenue(r.price, theta0, base, fam);
    possible += r.time * best.value;
    m.lost_revenue += r.time * (best.value - expected_revenue(r.price, r.theta, base, fam));
  }
  m.cumulative_fraction = possible > 0.0 ? earned / possible : 0.0;
  return m;
}

StreamObservationSource::StreamObservationSource(std::istream& in) : in_(&in) {}

Transition StreamObservationSource::next(const ModelConfig&) {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("state", 0) == 0) continue;  // header
    std::istringstream fields(line);
    std::string state, up, hold;
    std::getline(fields, state, ',');
    std::getline(fields, up, ',');
    std::getline(fields, hold, ',');
    try {
      Transition t;
      t.from = std::stoi(state);
      t.up = std::stoi(up) != 0;
      t.hold = std::stod(hold);
      if (t.from < 0 || !(t.hold >= 0.0) || (t.from == 0 && !t.up)) {
        throw std::invalid_argument("bad transition");
      }
      state_ = t.from + (t.up ? 1 : -1);
      return t;
    } catch (const std::exception&) {
      throw ValidationError("malformed observation on line " + std::to_string(line_));
    }
  }
  throw Error("observation stream ended");
}

}  // namespace balkwise
