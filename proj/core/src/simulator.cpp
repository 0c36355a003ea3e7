#include "balkwise/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace balkwise {

namespace {

void require_can_leave_empty(const ModelConfig& cfg, const ValueFamily& fam,
                             const Vector& theta0) {
  if (joining_rate(0, theta0, cfg, fam) <= 0.0) {
    throw SimulationError(
        "absorbing empty state: no customer ever joins an empty queue");
  }
}

void start_path(QueuePath& path, int q0, double price, std::size_t steps) {
  path.states.reserve(steps + 1);
  path.ups.reserve(steps);
  path.holds.reserve(steps);
  path.informative.reserve(steps);
  path.states.push_back(q0);
  path.price = price;
}

}  // namespace

SimulatedQueue::SimulatedQueue(const ValueFamily& fam, Vector theta0,
                               std::uint64_t seed, int initial_state)
    : fam_(&fam), theta0_(std::move(theta0)), rng_(seed),
      state_(initial_state) {
  fam.param_space().require(theta0_);
  if (initial_state < 0) {
    throw ValidationError("initial queue length must be non-negative");
  }
}

double SimulatedQueue::rate_at(int q, const ModelConfig& cfg) {
  if (cfg.price() != cached_price_ || cfg.lambda() != cached_lambda_ ||
      cfg.cost() != cached_cost_ || cfg.mu() != cached_mu_) {
    rates_.clear();
    cached_price_ = cfg.price();
    cached_lambda_ = cfg.lambda();
    cached_cost_ = cfg.cost();
    cached_mu_ = cfg.mu();
    if (cfg.lambda() * fam_->survival(offered_reward(0, cfg), theta0_) <= 0.0) {
      throw SimulationError(
          "absorbing empty state: no customer ever joins an empty queue");
    }
  }
  while (static_cast<int>(rates_.size()) <= q) {
    const int s = static_cast<int>(rates_.size());
    rates_.push_back(cfg.lambda() * fam_->survival(offered_reward(s, cfg), theta0_));
  }
  return rates_[q];
}

Transition SimulatedQueue::next(const ModelConfig& cfg) {
  Transition t;
  t.from = state_;
  const double join = rate_at(state_, cfg);
  if (state_ == 0) {
    t.hold = rng_.exponential(join);
    t.up = true;
  } else {
    const double total = join + cfg.mu();
    t.hold = rng_.exponential(total);
    t.up = rng_.uniform() * total < join;
  }
  state_ += t.up ? 1 : -1;
  return t;
}

void append_transition(QueuePath& path, const Transition& t,
                       bool informative) {
  if (path.states.empty()) path.states.push_back(t.from);
  path.states.push_back(t.from + (t.up ? 1 : -1));
  path.ups.push_back(t.up ? 1 : 0);
  path.holds.push_back(t.hold);
  path.informative.push_back(informative ? 1 : 0);
  path.total_time += t.hold;
  if (t.up) path.revenue += path.price;
}

QueuePath simulate_path(const ModelConfig& cfg, const ValueFamily& fam,
                        const Vector& theta0, const SimOptions& opts) {
  if (opts.steps < 1) throw ValidationError("steps must be >= 1");
  require_can_leave_empty(cfg, fam, theta0);

  SimulatedQueue queue(fam, theta0, opts.seed, opts.initial_state.value_or(0));
  if (!opts.initial_state) {
    for (std::size_t i = 0; i < opts.warmup_steps; ++i) queue.next(cfg);
  }

  QueuePath path;
  start_path(path, queue.state(), cfg.price(), opts.steps);
  std::vector<std::int8_t> informative_cache;
  for (std::size_t i = 0; i < opts.steps; ++i) {
    const Transition t = queue.next(cfg);
    while (static_cast<int>(informative_cache.size()) <= t.from) {
      const int q = static_cast<int>(informative_cache.size());
      informative_cache.push_back(is_informative(q, theta0, cfg, fam) ? 1 : 0);
    }
    append_transition(path, t, informative_cache[t.from] != 0);
  }
  return path;
}

bool joins(double value, int q, const ModelConfig& cfg) {
  return value - cfg.price() >= (q + 1) * cfg.cost() / cfg.mu();
}

QueuePath simulate_full_arrivals(const ModelConfig& cfg,
                                 const ValueFamily& fam, const Vector& theta0,
                                 const SimOptions& opts) {
  if (opts.steps < 1) throw ValidationError("steps must be >= 1");
  require_can_leave_empty(cfg, fam, theta0);
  if (opts.initial_state && *opts.initial_state < 0) {
    throw ValidationError("initial queue length must be non-negative");
  }

  Rng rng(opts.seed);
  int q = opts.initial_state.value_or(0);
  const std::size_t warmup = opts.initial_state ? 0 : opts.warmup_steps;

  QueuePath path;
  double clock = 0.0;
  std::size_t recorded = 0;
  while (recorded < warmup + opts.steps) {
    const double total = cfg.lambda() + (q > 0 ? cfg.mu() : 0.0);
    clock += rng.exponential(total);
    bool up;
    if (rng.uniform() * total < cfg.lambda()) {
      const double value = fam.quantile(rng.uniform(), theta0);
      if (!joins(value, q, cfg)) continue;  // balker: invisible
      up = true;
    } else {
      up = false;
    }
    if (recorded == warmup) start_path(path, q, cfg.price(), opts.steps);
    if (recorded >= warmup) {
      append_transition(path, Transition{q, up, clock},
                        is_informative(q, theta0, cfg, fam));
    }
    clock = 0.0;
    q += up ? 1 : -1;
    ++recorded;
  }
  return path;
}

PathStats path_stats(const QueuePath& path) {
  if (path.empty()) throw ValidationError("path has no transitions");
  PathStats s;
  int max_state = 0;
  for (int q : path.states) max_state = std::max(max_state, q);
  s.jump_occupancy.assign(max_state + 1, 0.0);
  s.time_occupancy.assign(max_state + 1, 0.0);
  const std::size_t k = path.steps();
  for (std::size_t i = 0; i < k; ++i) {
    const int from = path.states[i];
    if (path.ups[i]) {
      ++s.up_count;
    } else {
      ++s.down_count;
    }
    if (path.informative[i]) ++s.effective_n;
    s.jump_occupancy[from] += 1.0;
    s.time_occupancy[from] += path.holds[i];
  }
  for (auto& v : s.jump_occupancy) v /= static_cast<double>(k);
  if (path.total_time > 0.0) {
    for (auto& v : s.time_occupancy) v /= path.total_time;
    s.revenue_rate = path.revenue / path.total_time;
  }
  return s;
}

void mark_informative(QueuePath& path, const Vector& theta,
                      const ModelConfig& cfg, const ValueFamily& fam) {
  fam.param_space().require(theta);
  for (std::size_t i = 0; i < path.steps(); ++i) {
    path.informative[i] = is_informative(path.states[i], theta, cfg, fam) ? 1 : 0;
  }
}

void write_path_csv(std::ostream& os, const QueuePath& path) {
  os << "step,state,up,hold\n";
  if (path.states.empty()) return;
  os << "0," << path.states[0] << ",,\n";
  os.precision(17);
  for (std::size_t i = 0; i < path.steps(); ++i) {
    os << (i + 1) << ',' << path.states[i + 1] << ','
       << static_cast<int>(path.ups[i]) << ',' << path.holds[i] << '\n';
  }
}

QueuePath read_path_csv(std::istream& is, double price) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("empty path CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "step,state,up,hold") {
    throw ValidationError("path CSV must start with header step,state,up,hold");
  }
  QueuePath path;
  path.price = price;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string step, state, up, hold;
    std::getline(fields, step, ',');
    std::getline(fields, state, ',');
    std::getline(fields, up, ',');
    std::getline(fields, hold, ',');
    const auto where = " (row " + std::to_string(row + 1) + ")";
    try {
      const int q = std::stoi(state);
      if (q < 0) throw ValidationError("negative queue length" + where);
      if (row == 0) {
        path.states.push_back(q);
      } else {
        const int prev = path.states.back();
        const bool is_up = std::stoi(up) != 0;
        if (q - prev != (is_up ? 1 : -1)) {
          throw ValidationError("state does not match up flag" + where);
        }
        const double h = std::stod(hold);
        if (!(h >= 0.0)) throw ValidationError("negative holding time" + where);
        append_transition(path, Transition{prev, is_up, h}, prev > 0);
      }
    } catch (const std::invalid_argument&) {
      throw ValidationError("malformed path CSV" + where);
    } catch (const std::out_of_range&) {
      throw ValidationError("value out of range in path CSV" + where);
    }
    ++row;
  }
  if (path.states.empty()) throw ValidationError("path CSV has no rows");
  return path;
}

double total_variation(const std::vector<double>& a,
                       const std::vector<double>& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    sum += std::abs(x - y);
  }
  return 0.5 * sum;
}

}  // namespace balkwise
