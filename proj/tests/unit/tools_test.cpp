#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "balkwise/cli/app.hpp"
#include "balkwise/cli/config.hpp"
#include "balkwise/cli/experiments.hpp"
#include "balkwise/cli/parallel.hpp"
#include "balkwise/cli/stats.hpp"
#include "balkwise/inference.hpp"
#include "balkwise/rng.hpp"

namespace balkwise::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> normal_sample(Rng& rng, int n) {
  std::vector<double> x(n);
  for (double& v : x) v = normal_quantile(0.5 * 0x1.0p-53 + rng.uniform() * (1.0 - 0x1.0p-53));
  return x;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

TEST(Stats, MeanSdMedian) {
  EXPECT_DOUBLE_EQ(mean({1, 2, 3, 4}), 2.5);
  EXPECT_NEAR(stddev({1, 2, 3, 4}), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(median({5, 1, 3}), 3.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
}

TEST(JarqueBera, NormalSamplesRarelyRejected) {
  Rng rng(3);
  int rejected = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    if (jarque_bera(normal_sample(rng, 2000)).reject) ++rejected;
  }
  // Nominal level 5%.
  EXPECT_LE(rejected, trials * 6 / 100);
}

TEST(JarqueBera, SkewedSamplesRejected) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(500);
    for (double& v : x) v = rng.exponential(1.0);
    const NormalityTest r = jarque_bera(x);
    EXPECT_TRUE(r.reject);
    EXPECT_GT(r.skewness, 1.0);
  }
}

TEST(JarqueBera, KnownStatistic) {
  // Symmetric two-point sample: skewness 0, kurtosis 1.
  std::vector<double> x;
  for (int i = 0; i < 30; ++i) x.push_back(i % 2 ? 1.0 : -1.0);
  const NormalityTest r = jarque_bera(x);
  EXPECT_NEAR(r.skewness, 0.0, 1e-15);
  EXPECT_NEAR(r.kurtosis, 1.0, 1e-12);
  EXPECT_NEAR(r.statistic, 30.0 / 6.0 * 4.0 / 4.0, 1e-12);
}

TEST(JarqueBera, Errors) {
  EXPECT_THROW(jarque_bera(std::vector<double>(10, 1.0)), ValidationError);
  EXPECT_THROW(jarque_bera(std::vector<double>(30, 2.0)), NumericalError);
}

TEST(Parallel, IndexOrderAndErrors) {
  const auto out = parallel_map(100, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map(10,
                            [](std::size_t i) -> int {
                              if (i == 7) throw NumericalError("boom");
                              return 0;
                            }),
               NumericalError);
}

TEST(Parallel, ThreadCap) {
  setenv("BALKWISE_THREADS", "1", 1);
  EXPECT_EQ(worker_count(), 1u);
  unsetenv("BALKWISE_THREADS");
  EXPECT_GE(worker_count(), 1u);
}

TEST(Config, DefaultsAndRoundTrip) {
  const ExperimentConfig c = config_from_json({{"experiment", "revenue"}, {"theta0", 0.02}});
  EXPECT_DOUBLE_EQ(c.price, 15.0);
  EXPECT_EQ(c.family.name, "exponential");
  EXPECT_NO_THROW(c.validate());
  const ExperimentConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(Config, UnknownKeysAndBadValuesRejected) {
  EXPECT_THROW(config_from_json({{"experimnt", "fit"}}), ValidationError);
  EXPECT_THROW(config_from_json({{"model", {{"lamda", 1.0}}}}), ValidationError);
  EXPECT_THROW(config_from_json({{"experiment", "revenue"}, {"model", {{"mu", -1.0}}}}).validate(),
               ValidationError);
  EXPECT_THROW(config_from_json({{"experiment", "normality"}}).validate(), ValidationError);
  EXPECT_THROW(config_from_json({{"experiment", "nope"}}).validate(), ValidationError);
  EXPECT_THROW(config_from_json({{"experiment", "consistency"}, {"theta0", 5.0}}).validate(),
               ValidationError);
}

TEST(Config, Overrides) {
  json doc = json::object();
  apply_override(doc, "model.price=20");
  apply_override(doc, "pricing.schedule=doubling");
  apply_override(doc, "k=[100,1000]");
  EXPECT_EQ(doc["model"]["price"], 20);
  EXPECT_EQ(doc["pricing"]["schedule"], "doubling");
  EXPECT_EQ(doc["k"].size(), 2u);
  EXPECT_THROW(apply_override(doc, "novalue"), ValidationError);
}

TEST(Config, PricingTableDefaults) {
  const ExperimentConfig c = config_from_json({{"experiment", "pricing-tables"}, {"theta0", 0.02}});
  EXPECT_EQ(c.cells.size(), 16u);
  ASSERT_TRUE(c.pricing.observation_budget.has_value());
  EXPECT_EQ(*c.pricing.observation_budget, kTableBudget);
  EXPECT_DOUBLE_EQ(c.pricing.price_bounds.hi, 250.0);
  const ExperimentConfig own = config_from_json(
      {{"experiment", "pricing-tables"}, {"pricing", {{"budget", 900}, {"price_hi", 300}}}});
  EXPECT_EQ(*own.pricing.observation_budget, 900);
  EXPECT_DOUBLE_EQ(own.pricing.price_bounds.hi, 300.0);
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "balkwise");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("balkwise_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"price-opt", "--theta0", "0.02"}).code, kSuccess);
  EXPECT_EQ(run({}).code, kValidationError);
  EXPECT_EQ(run({"simulate", "--bogus"}).code, kValidationError);
  EXPECT_EQ(run({"fit", "--path", path("missing.csv")}).code, kValidationError);
  EXPECT_EQ(run({"revenue", "--theta0", "0.02", "--set", "model.mu=-1"}).code, kValidationError);
  EXPECT_EQ(run({"experiment", "nope", "--theta0", "0.02"}).code, kValidationError);
  EXPECT_EQ(run({"simulate", "--format", "xml", "--theta0", "0.02"}).code, kValidationError);
  EXPECT_EQ(run({"--help"}).code, kSuccess);

  // A stream that ends before the first fit is a runtime failure.
  std::ofstream(path("short.csv")) << "state,up,hold\n0,1,0.5\n1,0,0.5\n";
  const CliRun r = run({"autoprice", "--stream", path("short.csv")});
  EXPECT_EQ(r.code, kRuntimeError);
  EXPECT_NE(r.err.find("observation stream ended"), std::string::npos);

  std::ofstream(path("bad.json")) << "{ \"experiment\": ";
  EXPECT_EQ(run({"revenue", "--config", path("bad.json")}).code, kValidationError);
}

TEST_F(CliTest, SimulateThenFit) {
  const CliRun sim = run({"simulate", "--theta0", "0.02", "--k", "3000", "--seed", "4",
                          "--out", path("sim")});
  ASSERT_EQ(sim.code, kSuccess) << sim.err;
  const CliRun fit = run({"fit", "--path", path("sim/path.csv")});
  ASSERT_EQ(fit.code, kSuccess) << fit.err;
  const json j = json::parse(fit.out);
  EXPECT_FALSE(j["boundary"].get<bool>());
  EXPECT_NEAR(j["theta_hat"][0].get<double>(), 0.02, 0.01);
  EXPECT_EQ(j["total_k"], 3000);
}

TEST_F(CliTest, ConfigFileAndStdoutFormats) {
  std::ofstream(path("cfg.json")) << R"({
    // comments are allowed
    "model": {"lambda": 1, "mu": 1, "cost": 1},
    "theta_list": [0.02, 0.08]
  })";
  const CliRun csv = run({"price-opt", "--config", path("cfg.json"), "--format", "csv"});
  ASSERT_EQ(csv.code, kSuccess) << csv.err;
  EXPECT_EQ(first_line(csv.out), "theta,revenue_price,max_revenue,std_price,min_std,weighting");
  const CliRun st = run({"stationary", "--theta0", "0.02"});
  ASSERT_EQ(st.code, kSuccess);
  EXPECT_EQ(first_line(st.out), "state,prob");
  const CliRun svg = run({"revenue", "--theta0", "0.02", "--format", "svg"});
  ASSERT_EQ(svg.code, kSuccess);
  EXPECT_NE(svg.out.find("<svg"), std::string::npos);
}

TEST_F(CliTest, AutopriceFromStream) {
  // Record a simulated path as an observation stream and price from it.
  ASSERT_EQ(run({"simulate", "--theta0", "0.02", "--k", "20000", "--price", "40", "--out",
                 path("sim")})
                .code,
            kSuccess);
  // The path CSV holds post-states; the stream wants the pre-state of each step.
  std::string line;
  std::ifstream again(path("sim/path.csv"));
  std::ofstream fixed(path("stream.csv"));
  fixed << "state,up,hold\n";
  std::getline(again, line);
  std::getline(again, line);
  int prev = std::stoi(line.substr(line.find(',') + 1));
  while (std::getline(again, line)) {
    std::stringstream f(line);
    std::string step, state, up, hold;
    std::getline(f, step, ',');
    std::getline(f, state, ',');
    std::getline(f, up, ',');
    std::getline(f, hold, ',');
    fixed << prev << ',' << up << ',' << hold << '\n';
    prev = std::stoi(state);
  }
  fixed.close();
  const CliRun r = run({"autoprice", "--stream", path("stream.csv"), "--set",
                        "pricing.k1_min=500", "--set", "pricing.max_iterations=3"});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  EXPECT_EQ(first_line(r.out), "iter,k_i,theta_i,theta_pooled,price_next,delta,revenue,time");
}

ExperimentConfig small(const std::string& name) {
  json doc{{"experiment", name},       {"theta0", 0.02}, {"k", {500, 2000}},
           {"replications", 25},       {"seed", 77},     {"price_grid", {{"lo", 5}, {"hi", 150}, {"points", 30}}},
           {"empirical_prices", {40}}, {"empirical_replications", 20}};
  if (name == "pricing-tables") {
    doc.erase("k");
    doc["cells"] = {{{"schedule", "doubling"}, {"k1_min", 100}, {"p1", 100}}};
  }
  ExperimentConfig c = config_from_json(doc);
  c.validate();
  return c;
}

template <typename F>
std::string csv_of(F write) {
  std::ostringstream os;
  write(os);
  return os.str();
}

TEST(Experiments, DeterministicAndSchemas) {
  const auto a = exp_consistency(small("consistency"));
  const auto b = exp_consistency(small("consistency"));
  const std::string fa = csv_of([&](std::ostream& os) { write_fits_csv(os, a.rows); });
  EXPECT_EQ(fa, csv_of([&](std::ostream& os) { write_fits_csv(os, b.rows); }));
  EXPECT_EQ(first_line(fa), "k,replication,theta_hat,boundary,score_at_hat,score_at_true");
  EXPECT_EQ(first_line(csv_of([&](std::ostream& os) { write_consistency_summary_csv(os, a.summary); })),
            "k,used,excluded,median_abs_error");
  EXPECT_EQ(first_line(csv_of([&](std::ostream& os) { write_loglik_curves_csv(os, a.curves); })),
            "k,theta,loglik,theta_hat");

  const auto sc = exp_score_convergence(small("score-convergence"));
  ASSERT_EQ(sc.summary.size(), 2u);
  EXPECT_LT(sc.summary[1].sd_at_true, sc.summary[0].sd_at_true);

  const auto sv = exp_std_vs_price(small("std-vs-price"));
  EXPECT_EQ(first_line(csv_of([&](std::ostream& os) { write_std_curves_csv(os, sv); })),
            "theta,price,std_time,std_jump");
  ASSERT_EQ(sv.front().empirical.size(), 2u);

  const auto rv = exp_revenue_vs_price(small("revenue-vs-price"));
  EXPECT_NEAR(rv.front().argmax.x, 50.79, 0.05);

  const auto pt = exp_pricing_tables(small("pricing-tables"));
  const std::string table = csv_of([&](std::ostream& os) { write_pricing_table_csv(os, pt); });
  EXPECT_NE(table.find("\"Iterations\""), std::string::npos);
  EXPECT_NE(table.find("\"Final stationary fraction of max revenue\""), std::string::npos);
  EXPECT_EQ(table, csv_of([&](std::ostream& os) {
              write_pricing_table_csv(os, exp_pricing_tables(small("pricing-tables")));
            }));
}

TEST(Experiments, ThreadCountDoesNotChangeResults) {
  setenv("BALKWISE_THREADS", "1", 1);
  const auto one = exp_consistency(small("consistency"));
  setenv("BALKWISE_THREADS", "4", 1);
  const auto four = exp_consistency(small("consistency"));
  unsetenv("BALKWISE_THREADS");
  EXPECT_EQ(csv_of([&](std::ostream& os) { write_fits_csv(os, one.rows); }),
            csv_of([&](std::ostream& os) { write_fits_csv(os, four.rows); }));
}

}  // namespace
}  // namespace balkwise::cli
