#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "balkwise/model.hpp"
#include "balkwise/rng.hpp"

namespace balkwise {

/// An observed trajectory of the jump chain. Balking customers never appear.
struct QueuePath {
  std::vector<int> states;           ///< Q_0..Q_k
  std::vector<std::uint8_t> ups;     ///< Y_1..Y_k
  std::vector<double> holds;         ///< holding time before transition i
  std::vector<std::uint8_t> informative;  ///< i in the effective sample
  double price = 0.0;
  double revenue = 0.0;     ///< price x number of joins
  double total_time = 0.0;  ///< sum of holds

  std::size_t steps() const { return ups.size(); }
  bool empty() const { return ups.empty(); }
};

struct SimOptions {
  std::size_t steps = 1;
  std::uint64_t seed = 0;
  /// Start here; when unset, start empty and discard `warmup_steps`
  /// transitions so that Q_0 is approximately stationary.
  std::optional<int> initial_state;
  std::size_t warmup_steps = 1000;
};

/// One transition of the observable queue.
struct Transition {
  int from = 0;
  bool up = true;
  double hold = 0.0;
};

/// Anything that yields observed transitions at a posted price: the
/// simulator in evaluation mode, recorded or live data in deployment mode.
class ObservationSource {
 public:
  virtual ~ObservationSource() = default;
  virtual Transition next(const ModelConfig& cfg) = 0;
  virtual int state() const = 0;
};

/// Thinned birth-death simulation of the observable queue: state-dependent
/// joining rates, exponential holding times.
class SimulatedQueue final : public ObservationSource {
 public:
  /// `fam` must outlive the queue.
  SimulatedQueue(const ValueFamily& fam, Vector theta0, std::uint64_t seed,
                 int initial_state = 0);

  Transition next(const ModelConfig& cfg) override;
  int state() const override { return state_; }

 private:
  double rate_at(int q, const ModelConfig& cfg);

  const ValueFamily* fam_;
  Vector theta0_;
  Rng rng_;
  int state_;
  // Joining rates for the price they were computed at.
  double cached_price_ = -1.0;
  double cached_lambda_ = -1.0;
  double cached_cost_ = -1.0;
  double cached_mu_ = -1.0;
  std::vector<double> rates_;
};

/// Simulates `opts.steps` observable transitions under theta0 using the
/// thinned chain. Deterministic in (cfg, theta0, opts).
QueuePath simulate_path(const ModelConfig& cfg, const ValueFamily& fam,
                        const Vector& theta0, const SimOptions& opts);

/// Same law as simulate_path, but simulates every Poisson(lambda) arrival,
/// draws its service value and applies the joining rule; balkers are dropped
/// from the record. Kept as an independent check of the thinning.
QueuePath simulate_full_arrivals(const ModelConfig& cfg,
                                 const ValueFamily& fam, const Vector& theta0,
                                 const SimOptions& opts);

/// True if a customer with service value `value` joins a queue of length q.
bool joins(double value, int q, const ModelConfig& cfg);

struct PathStats {
  std::size_t up_count = 0;
  std::size_t down_count = 0;
  std::size_t effective_n = 0;
  std::vector<double> jump_occupancy;  ///< fraction of steps leaving q
  std::vector<double> time_occupancy;  ///< fraction of time spent at q
  double revenue_rate = 0.0;
};

PathStats path_stats(const QueuePath& path);

/// Recomputes the effective-sample mask under theta.
void mark_informative(QueuePath& path, const Vector& theta,
                      const ModelConfig& cfg, const ValueFamily& fam);

/// Appends a transition and keeps revenue, time and mask consistent. The
/// mask entry is the caller's (q > 0 when unknown).
void append_transition(QueuePath& path, const Transition& t,
                       bool informative);

/// CSV with header `step,state,up,hold`; row 0 holds Q_0 with empty fields.
void write_path_csv(std::ostream& os, const QueuePath& path);

/// Inverse of write_path_csv. Revenue uses `price`; the mask is set to
/// q > 0 (call mark_informative for families with bounded support).
QueuePath read_path_csv(std::istream& is, double price);

/// Total-variation distance between two occupancy vectors (missing entries
/// count as zero).
double total_variation(const std::vector<double>& a,
                       const std::vector<double>& b);

}  // namespace balkwise
