#include "balkwise/io.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"

namespace balkwise {
namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

TEST(CurveCsv, Headers) {
  std::ostringstream a, b;
  write_curve_csv(a, {{1.0, 2.0}, {3.0, 4.5}}, "revenue");
  write_curve_csv(b, {}, "std");
  EXPECT_EQ(a.str(), "price,revenue\n1,2\n3,4.5\n");
  EXPECT_EQ(b.str(), "price,std\n");
}

TEST(FitJson, Keys) {
  FitResult fit;
  fit.theta_hat = scalar_theta(0.5);
  fit.sigma_plugin = Matrix::Constant(1, 1, 2.0);
  fit.std_err = scalar_theta(NAN);
  const auto j = nlohmann::json::parse(fit_to_json(fit));
  for (const char* key : {"theta_hat", "loglik", "score_norm", "boundary", "effective_n",
                          "total_k", "sigma_plugin", "std_err"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_DOUBLE_EQ(j["theta_hat"][0].get<double>(), 0.5);
  EXPECT_TRUE(j["std_err"][0].is_null());
  EXPECT_DOUBLE_EQ(j["sigma_plugin"][0][0].get<double>(), 2.0);
}

TEST(TraceCsv, HeaderAndRows) {
  PricingTrace t;
  IterationRecord r;
  r.index = 1;
  r.k = 4;
  r.theta = Eigen::Vector2d(1.0, 2.0);
  r.theta_pooled = r.theta;
  r.price_next = 12.5;
  r.delta = 0.25;
  r.revenue = 30.0;
  r.time = 6.0;
  t.records.push_back(r);
  std::ostringstream os;
  write_trace_csv(os, t);
  EXPECT_EQ(first_line(os.str()), "iter,k_i,theta_i,theta_pooled,price_next,delta,revenue,time");
  EXPECT_NE(os.str().find("1,4,1;2,1;2,12.5,0.25,30,6"), std::string::npos);
  const auto j = nlohmann::json::parse(trace_to_json(t));
  EXPECT_EQ(j["records"].size(), 1u);
  EXPECT_EQ(j["stopped_reason"], "max_iterations");
}

TEST(StationaryCsv, Header) {
  StationaryDist d;
  d.probs = {0.75, 0.25};
  d.qstar = 1;
  std::ostringstream os;
  write_stationary_csv(os, d);
  EXPECT_EQ(os.str(), "state,prob\n0,0.75\n1,0.25\n");
}

}  // namespace
}  // namespace balkwise
