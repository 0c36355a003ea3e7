#include "balkwise/simulator.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "balkwise/stationary.hpp"

namespace balkwise {
namespace {

const ModelConfig kAnchor(1.0, 1.0, 1.0, 15.0);

SimOptions opts(std::size_t steps, std::uint64_t seed, std::optional<int> q0 = 0) {
  SimOptions o;
  o.steps = steps;
  o.seed = seed;
  o.initial_state = q0;
  return o;
}

TEST(Rng, DeterministicAndSplittable) {
  Rng a(7), b(7), c(8);
  EXPECT_EQ(a.bits(), b.bits());
  EXPECT_NE(Rng(7).bits(), c.bits());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(3, 9), derive_seed(3, 9));
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(SimulatePath, StructuralInvariants) {
  const ExponentialFamily fam;
  const QueuePath path = simulate_path(kAnchor, fam, scalar_theta(0.02), opts(5000, 11));
  ASSERT_EQ(path.steps(), 5000u);
  ASSERT_EQ(path.states.size(), 5001u);
  EXPECT_EQ(path.states[0], 0);
  double time = 0.0;
  int joins = 0;
  for (std::size_t i = 0; i < path.steps(); ++i) {
    EXPECT_GE(path.states[i], 0);
    EXPECT_EQ(path.states[i + 1] - path.states[i], path.ups[i] ? 1 : -1);
    if (path.states[i] == 0) EXPECT_EQ(path.ups[i], 1);
    EXPECT_GT(path.holds[i], 0.0);
    EXPECT_EQ(path.informative[i] != 0, path.states[i] > 0);
    time += path.holds[i];
    joins += path.ups[i];
  }
  EXPECT_NEAR(path.total_time, time, 1e-9 * time);
  EXPECT_DOUBLE_EQ(path.revenue, 15.0 * joins);
}

TEST(SimulatePath, DeterministicPerSeed) {
  const ExponentialFamily fam;
  const auto a = simulate_path(kAnchor, fam, scalar_theta(0.02), opts(2000, 5, std::nullopt));
  const auto b = simulate_path(kAnchor, fam, scalar_theta(0.02), opts(2000, 5, std::nullopt));
  const auto c = simulate_path(kAnchor, fam, scalar_theta(0.02), opts(2000, 6, std::nullopt));
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.holds, b.holds);
  EXPECT_NE(a.holds, c.holds);
}

TEST(SimulatePath, AbsorbingEmptyStateIsAnError) {
  // theta = 1 and price 200: nobody's value clears the price.
  const ExponentialFamily fam;
  const ModelConfig cfg(1.0, 1.0, 1.0, 2000.0);
  EXPECT_THROW(simulate_path(cfg, fam, scalar_theta(1.0), opts(10, 1)), SimulationError);
  EXPECT_THROW(simulate_full_arrivals(cfg, fam, scalar_theta(1.0), opts(10, 1)),
               SimulationError);
}

TEST(SimulatePath, ValidatesInputs) {
  const ExponentialFamily fam;
  EXPECT_THROW(simulate_path(kAnchor, fam, scalar_theta(0.02), opts(0, 1)), ValidationError);
  EXPECT_THROW(simulate_path(kAnchor, fam, scalar_theta(0.02), opts(5, 1, -1)),
               ValidationError);
  EXPECT_THROW(simulate_path(kAnchor, fam, scalar_theta(3.0), opts(5, 1)), DomainError);
}

TEST(SimulatedQueue, FollowsPriceChanges) {
  const ExponentialFamily fam;
  SimulatedQueue queue(fam, scalar_theta(0.02), 3);
  for (int i = 0; i < 100; ++i) queue.next(kAnchor);
  const int before = queue.state();
  const Transition t = queue.next(kAnchor.with_price(1.0));
  EXPECT_EQ(t.from, before);
  EXPECT_EQ(queue.state(), before + (t.up ? 1 : -1));
}

TEST(Joins, ThresholdRule) {
  EXPECT_TRUE(joins(16.0, 0, kAnchor));
  EXPECT_FALSE(joins(15.99, 0, kAnchor));
  EXPECT_FALSE(joins(16.5, 1, kAnchor));
}

TEST(PathCsv, HeaderAndRoundTrip) {
  const ExponentialFamily fam;
  const QueuePath path = simulate_path(kAnchor, fam, scalar_theta(0.05), opts(300, 2, 3));
  std::ostringstream os;
  write_path_csv(os, path);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "step,state,up,hold");
  EXPECT_NE(text.find("\n0,3,,\n"), std::string::npos);

  std::istringstream is(text);
  const QueuePath back = read_path_csv(is, 15.0);
  EXPECT_EQ(back.states, path.states);
  EXPECT_EQ(back.ups, path.ups);
  EXPECT_EQ(back.holds, path.holds);
  EXPECT_DOUBLE_EQ(back.revenue, path.revenue);
}

TEST(PathCsv, RejectsMalformedInput) {
  auto read = [](const std::string& s) {
    std::istringstream is(s);
    return read_path_csv(is, 0.0);
  };
  EXPECT_THROW(read(""), ValidationError);
  EXPECT_THROW(read("state,up\n"), ValidationError);
  EXPECT_THROW(read("step,state,up,hold\n0,0,,\n1,2,1,0.5\n"), ValidationError);
  EXPECT_THROW(read("step,state,up,hold\n0,0,,\n1,1,1,-0.5\n"), ValidationError);
  EXPECT_THROW(read("step,state,up,hold\n0,x,,\n"), ValidationError);
  EXPECT_NO_THROW(read("step,state,up,hold\n0,0,,\n1,1,1,0.5\n2,0,0,0.25\n"));
}

TEST(PathStats, CountsAndOccupancies) {
  QueuePath path;
  path.price = 2.0;
  append_transition(path, Transition{0, true, 1.0}, false);
  append_transition(path, Transition{1, true, 2.0}, true);
  append_transition(path, Transition{2, false, 1.0}, true);
  append_transition(path, Transition{1, false, 4.0}, true);
  const PathStats s = path_stats(path);
  EXPECT_EQ(s.up_count, 2u);
  EXPECT_EQ(s.down_count, 2u);
  EXPECT_EQ(s.effective_n, 3u);
  EXPECT_DOUBLE_EQ(s.jump_occupancy[1], 0.5);
  EXPECT_DOUBLE_EQ(s.time_occupancy[1], 0.75);
  EXPECT_DOUBLE_EQ(s.revenue_rate, 4.0 / 8.0);
  EXPECT_THROW(path_stats(QueuePath{}), ValidationError);
}

TEST(TotalVariation, Basics) {
  EXPECT_DOUBLE_EQ(total_variation({0.5, 0.5}, {0.5, 0.5}), 0.0);
  EXPECT_DOUBLE_EQ(total_variation({1.0}, {0.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(total_variation({0.6, 0.4}, {0.5, 0.3, 0.2}), 0.2);
}

// Thinned and per-customer simulators describe the same process.
TEST(SimulateFullArrivals, MatchesThinnedOccupancy) {
  const ExponentialFamily fam;
  const Vector th = scalar_theta(0.08);
  const ModelConfig cfg = kAnchor.with_price(5.0);
  const auto a = path_stats(simulate_path(cfg, fam, th, opts(50000, 1, std::nullopt)));
  const auto b = path_stats(simulate_full_arrivals(cfg, fam, th, opts(50000, 2, std::nullopt)));
  EXPECT_LT(total_variation(a.jump_occupancy, b.jump_occupancy), 0.03);
  EXPECT_LT(total_variation(a.time_occupancy, b.time_occupancy), 0.03);
}

}  // namespace
}  // namespace balkwise
