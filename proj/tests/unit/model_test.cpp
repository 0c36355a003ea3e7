#include "balkwise/model.hpp"
#include "balkwise/rng.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "test_families.hpp"

namespace balkwise {
namespace {

using testing::fd_gradient;
using testing::fd_jacobian;
using testing::rel_error;
using testing::WeibullFamily;

const ModelConfig kAnchor(1.0, 1.0, 1.0, 15.0);

TEST(ModelConfig, RejectsInvalidInputs) {
  EXPECT_THROW(ModelConfig(0.0, 1.0, 1.0, 0.0), ValidationError);
  EXPECT_THROW(ModelConfig(1.0, -1.0, 1.0, 0.0), ValidationError);
  EXPECT_THROW(ModelConfig(1.0, 1.0, 0.0, 0.0), ValidationError);
  EXPECT_THROW(ModelConfig(1.0, 1.0, 1.0, -0.5), ValidationError);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(ModelConfig(nan, 1.0, 1.0, 0.0), ValidationError);
  EXPECT_NO_THROW(ModelConfig(1.0, 1.0, 1.0, 0.0));
}

TEST(ParamSpace, ContainsProjectRequire) {
  const ParamSpace box(scalar_theta(0.01), scalar_theta(5.0));
  EXPECT_TRUE(box.contains(scalar_theta(0.01)));
  EXPECT_FALSE(box.contains(scalar_theta(5.1)));
  EXPECT_DOUBLE_EQ(box.project(scalar_theta(9.0))[0], 5.0);
  EXPECT_THROW(box.require(scalar_theta(0.0)), DomainError);
  EXPECT_THROW(box.require(Vector::Constant(2, 1.0)), DomainError);
  EXPECT_THROW(ParamSpace(scalar_theta(1.0), scalar_theta(1.0)), ValidationError);
}

TEST(OfferedReward, LinearInQueueLength) {
  const ModelConfig cfg(2.0, 4.0, 3.0, 10.0);
  EXPECT_DOUBLE_EQ(offered_reward(0, cfg), 10.75);
  EXPECT_DOUBLE_EQ(offered_reward(3, cfg), 13.0);
}

TEST(JoiningRate, ExponentialAnchor) {
  const ExponentialFamily fam;
  EXPECT_NEAR(joining_rate(0, scalar_theta(0.02), kAnchor, fam), std::exp(-0.32), 1e-15);
  EXPECT_NEAR(joining_rate(0, scalar_theta(0.02), kAnchor, fam), 0.72615, 1e-5);
}

TEST(UpProbability, AnchorValues) {
  const ExponentialFamily fam;
  const Vector th = scalar_theta(0.02);
  EXPECT_DOUBLE_EQ(up_probability(0, th, kAnchor, fam), 1.0);
  const double e = std::exp(-0.34);
  EXPECT_NEAR(up_probability(1, th, kAnchor, fam), e / (1.0 + e), 1e-15);
  EXPECT_NEAR(up_prob_grad(1, th, kAnchor, fam)[0], -17.0 * e / ((1.0 + e) * (1.0 + e)), 1e-13);
  // Published roundings of the same expressions.
  EXPECT_NEAR(up_probability(1, th, kAnchor, fam), 0.41582, 2e-5);
  EXPECT_NEAR(up_prob_grad(1, th, kAnchor, fam)[0], -4.1300, 1e-3);
  EXPECT_EQ(up_prob_grad(0, th, kAnchor, fam)[0], 0.0);
}

TEST(UpProbability, ChecksDomain) {
  const ExponentialFamily fam;
  EXPECT_THROW(up_probability(1, scalar_theta(2.0), kAnchor, fam), DomainError);
  EXPECT_THROW(joining_rate(-1, scalar_theta(0.5), kAnchor, fam), ValidationError);
}

TEST(ExponentialFamily, CdfDerivativesMatchFiniteDifferences) {
  const ExponentialFamily fam(1e-3, 5.0);
  for (double r : {0.5, 3.0, 17.0, 120.0}) {
    for (double th : {0.01, 0.08, 0.9}) {
      const Vector t = scalar_theta(th);
      const auto f = [&](const Vector& x) { return -fam.survival(r, x); };
      const auto g = [&](const Vector& x) { return fam.grad_cdf(r, x); };
      EXPECT_LT(rel_error(fam.grad_cdf(r, t), fd_gradient(f, t)), 1e-6) << r << " " << th;
      EXPECT_LT(rel_error(fam.hess_cdf(r, t), fd_jacobian(g, t)), 1e-6) << r << " " << th;
      EXPECT_NEAR(fam.cdf(r, t) + fam.survival(r, t), 1.0, 1e-15);
    }
  }
  EXPECT_EQ(fam.cdf(-1.0, scalar_theta(0.5)), 0.0);
}

TEST(ExponentialFamily, QuantileInvertsCdf) {
  const ExponentialFamily fam;
  const Vector t = scalar_theta(0.3);
  for (double u : {0.0, 0.1, 0.5, 0.99}) {
    EXPECT_NEAR(fam.cdf(fam.quantile(u, t), t), u, 1e-12);
  }
}

TEST(WeibullFamily, CdfDerivativesMatchFiniteDifferences) {
  const WeibullFamily fam;
  for (double r : {2.0, 16.0, 40.0}) {
    const Vector t = Eigen::Vector2d(1.7, 25.0);
    const auto f = [&](const Vector& x) { return fam.cdf(r, x); };
    const auto g = [&](const Vector& x) { return fam.grad_cdf(r, x); };
    EXPECT_LT(rel_error(fam.grad_cdf(r, t), fd_gradient(f, t)), 1e-6);
    EXPECT_LT(rel_error(fam.hess_cdf(r, t), fd_jacobian(g, t)), 1e-6);
  }
}

// Property: for random configurations and states the analytic derivatives of
// the up probability agree with finite differences.
TEST(UpProbability, DerivativesMatchFiniteDifferencesRandomized) {
  Rng rng(20240601);
  const WeibullFamily weib;
  const ExponentialFamily expo(1e-3, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const ModelConfig cfg(0.2 + 3.0 * rng.uniform(), 0.2 + 3.0 * rng.uniform(),
                          0.1 + 2.0 * rng.uniform(), 20.0 * rng.uniform());
    const int q = 1 + static_cast<int>(rng.uniform() * 15);
    const bool two = trial % 2 == 0;
    const ValueFamily& fam = two ? static_cast<const ValueFamily&>(weib) : expo;
    Vector t = two ? Vector(Eigen::Vector2d(0.5 + 3.0 * rng.uniform(),
                                            5.0 + 40.0 * rng.uniform()))
                   : scalar_theta(0.01 + 0.3 * rng.uniform());
    const auto p = [&](const Vector& x) { return up_probability(q, x, cfg, fam); };
    const auto dp = [&](const Vector& x) { return up_prob_grad(q, x, cfg, fam); };
    EXPECT_LT(rel_error(up_prob_grad(q, t, cfg, fam), fd_gradient(p, t), 1e-8), 1e-5);
    EXPECT_LT(rel_error(up_prob_hess(q, t, cfg, fam), fd_jacobian(dp, t), 1e-8), 1e-5);
  }
}

TEST(JumpTerms, AgreesWithCheckedFunctions) {
  const ExponentialFamily fam;
  const Vector t = scalar_theta(0.05);
  for (int q = 0; q < 10; ++q) {
    const JumpTerms jt = jump_terms(q, t, kAnchor, fam);
    EXPECT_EQ(jt.informative, is_informative(q, t, kAnchor, fam));
    EXPECT_NEAR(jt.up, up_probability(q, t, kAnchor, fam), 1e-15);
    EXPECT_NEAR(jt.up + jt.down, 1.0, 1e-15);
    EXPECT_NEAR(jt.grad[0], up_prob_grad(q, t, kAnchor, fam)[0], 1e-15);
  }
  EXPECT_FALSE(is_informative(0, t, kAnchor, fam));
}

}  // namespace
}  // namespace balkwise
