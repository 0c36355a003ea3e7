#include "balkwise/model.hpp"

#include <cmath>
#include <sstream>

namespace balkwise {

ModelConfig::ModelConfig(double lambda, double mu, double cost, double price)
    : lambda_(lambda), mu_(mu), cost_(cost), price_(price) {
  // Negated comparisons so that NaN is rejected too.
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("arrival rate lambda must be positive and finite");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ValidationError("service rate mu must be positive and finite");
  }
  if (!(cost > 0.0) || !std::isfinite(cost)) {
    throw ValidationError("waiting cost C must be positive and finite");
  }
  if (!(price >= 0.0) || !std::isfinite(price)) {
    throw ValidationError("price must be non-negative and finite");
  }
}

ParamSpace::ParamSpace(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0) {
    throw ValidationError("parameter space must have dimension >= 1");
  }
  if (lower_.size() != upper_.size()) {
    throw ValidationError("parameter bounds have different dimensions");
  }
  for (Eigen::Index j = 0; j < lower_.size(); ++j) {
    if (!(lower_[j] < upper_[j]) || !std::isfinite(lower_[j]) ||
        !std::isfinite(upper_[j])) {
      std::ostringstream msg;
      msg << "parameter bounds must satisfy lower < upper (coordinate " << j
          << ": [" << lower_[j] << ", " << upper_[j] << "])";
      throw ValidationError(msg.str());
    }
  }
}

bool ParamSpace::contains(const Vector& theta) const {
  if (theta.size() != lower_.size()) return false;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (!(theta[j] >= lower_[j] && theta[j] <= upper_[j])) return false;
  }
  return true;
}

Vector ParamSpace::project(const Vector& theta) const {
  return theta.cwiseMax(lower_).cwiseMin(upper_);
}

void ParamSpace::require(const Vector& theta) const {
  if (contains(theta)) return;
  std::ostringstream msg;
  msg << "parameter (";
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    msg << (j ? ", " : "") << theta[j];
  }
  msg << ") is outside the parameter space";
  throw DomainError(msg.str());
}

ExponentialFamily::ExponentialFamily(double lower, double upper)
    : ValueFamily(ParamSpace(scalar_theta(lower), scalar_theta(upper))) {
  if (!(lower > 0.0)) {
    throw ValidationError("exponential rate bounds must be positive");
  }
}

double ExponentialFamily::cdf(double r, const Vector& theta) const {
  if (r <= 0.0) return 0.0;
  return -std::expm1(-theta[0] * r);
}

double ExponentialFamily::survival(double r, const Vector& theta) const {
  if (r <= 0.0) return 1.0;
  return std::exp(-theta[0] * r);
}

Vector ExponentialFamily::grad_cdf(double r, const Vector& theta) const {
  if (r <= 0.0) return Vector::Zero(1);
  return scalar_theta(r * std::exp(-theta[0] * r));
}

Matrix ExponentialFamily::hess_cdf(double r, const Vector& theta) const {
  Matrix h = Matrix::Zero(1, 1);
  if (r > 0.0) h(0, 0) = -r * r * std::exp(-theta[0] * r);
  return h;
}

double ExponentialFamily::quantile(double u, const Vector& theta) const {
  return -std::log1p(-u) / theta[0];
}

namespace {

void require_state(int q) {
  if (q < 0) throw ValidationError("queue length must be non-negative");
}

}  // namespace

double offered_reward(int q, const ModelConfig& cfg) {
  return cfg.price() + (q + 1) * cfg.cost() / cfg.mu();
}

double joining_rate(int q, const Vector& theta, const ModelConfig& cfg,
                    const ValueFamily& fam) {
  require_state(q);
  fam.param_space().require(theta);
  return cfg.lambda() * fam.survival(offered_reward(q, cfg), theta);
}

JumpTerms jump_terms(int q, const Vector& theta, const ModelConfig& cfg,
                     const ValueFamily& fam, bool with_hessian) {
  const int n = fam.dim();
  JumpTerms t;
  t.grad = Vector::Zero(n);
  if (with_hessian) t.hess = Matrix::Zero(n, n);
  if (q <= 0) return t;

  const double r = offered_reward(q, cfg);
  const double surv = fam.survival(r, theta);
  const double lam = cfg.lambda();
  const double mu = cfg.mu();
  const double rate = lam * surv;
  const double denom = mu + rate;

  t.up = rate / denom;
  t.down = mu / denom;
  t.informative = surv > 0.0 && surv < 1.0;

  const Vector dF = fam.grad_cdf(r, theta);
  t.grad = (-mu * lam / (denom * denom)) * dF;
  if (with_hessian) {
    const Matrix d2F = fam.hess_cdf(r, theta);
    t.hess = (-mu * lam / (denom * denom * denom)) *
             (d2F * denom + 2.0 * lam * dF * dF.transpose());
  }
  return t;
}

double up_probability(int q, const Vector& theta, const ModelConfig& cfg,
                      const ValueFamily& fam) {
  require_state(q);
  fam.param_space().require(theta);
  if (q == 0) return 1.0;
  const double rate = joining_rate(q, theta, cfg, fam);
  return rate / (rate + cfg.mu());
}

Vector up_prob_grad(int q, const Vector& theta, const ModelConfig& cfg,
                    const ValueFamily& fam) {
  require_state(q);
  fam.param_space().require(theta);
  return jump_terms(q, theta, cfg, fam, false).grad;
}

Matrix up_prob_hess(int q, const Vector& theta, const ModelConfig& cfg,
                    const ValueFamily& fam) {
  require_state(q);
  fam.param_space().require(theta);
  return jump_terms(q, theta, cfg, fam, true).hess;
}

bool is_informative(int q, const Vector& theta, const ModelConfig& cfg,
                    const ValueFamily& fam) {
  if (q <= 0) return false;
  const double surv = fam.survival(offered_reward(q, cfg), theta);
  return surv > 0.0 && surv < 1.0;
}

}  // namespace balkwise
