#pragma once

#include <memory>
#include <string>

#include "balkwise/common.hpp"

namespace balkwise {

/// Economic environment of the queue: arrival rate, service rate, waiting
/// cost per unit time and admission price.
class ModelConfig {
 public:
  ModelConfig(double lambda, double mu, double cost, double price);

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  double cost() const { return cost_; }
  double price() const { return price_; }

  ModelConfig with_price(double price) const {
    return ModelConfig(lambda_, mu_, cost_, price);
  }

 private:
  double lambda_;
  double mu_;
  double cost_;
  double price_;
};

/// Compact box of admissible parameters.
class ParamSpace {
 public:
  ParamSpace(Vector lower, Vector upper);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Vector width() const { return upper_ - lower_; }
  Vector center() const { return 0.5 * (lower_ + upper_); }

  bool contains(const Vector& theta) const;
  Vector project(const Vector& theta) const;

  /// Throws DomainError unless theta lies in the box.
  void require(const Vector& theta) const;

 private:
  Vector lower_;
  Vector upper_;
};

/// Parametric distribution F(r; theta) of the customers' service value.
///
/// Implementations must be immutable after construction; a single instance
/// is shared by concurrent simulation workers. Every method may assume
/// theta has the family's dimension; range checks against the box are the
/// caller's job (see ParamSpace::require).
class ValueFamily {
 public:
  explicit ValueFamily(ParamSpace space) : space_(std::move(space)) {}
  virtual ~ValueFamily() = default;

  int dim() const { return space_.dim(); }
  const ParamSpace& param_space() const { return space_; }

  virtual std::string name() const = 0;

  /// F(r; theta). Defined as 0 for r < 0.
  virtual double cdf(double r, const Vector& theta) const = 0;

  /// 1 - F(r; theta). Override when the complement can be evaluated
  /// without cancellation.
  virtual double survival(double r, const Vector& theta) const {
    return 1.0 - cdf(r, theta);
  }

  /// dF/dtheta_j at r.
  virtual Vector grad_cdf(double r, const Vector& theta) const = 0;

  /// d2F/dtheta_j dtheta_l at r.
  virtual Matrix hess_cdf(double r, const Vector& theta) const = 0;

  /// Inverse cdf, used to draw service values for the per-customer
  /// simulator. u is in [0, 1).
  virtual double quantile(double u, const Vector& theta) const = 0;

 private:
  ParamSpace space_;
};

/// R ~ Exponential(theta): F(r) = 1 - exp(-theta r) for r >= 0.
class ExponentialFamily final : public ValueFamily {
 public:
  ExponentialFamily(double lower = 1e-3, double upper = 1.0);

  std::string name() const override { return "exponential"; }
  double cdf(double r, const Vector& theta) const override;
  double survival(double r, const Vector& theta) const override;
  Vector grad_cdf(double r, const Vector& theta) const override;
  Matrix hess_cdf(double r, const Vector& theta) const override;
  double quantile(double u, const Vector& theta) const override;
};

/// Convenience for the one-parameter families.
inline Vector scalar_theta(double value) { return Vector::Constant(1, value); }

/// r(q) = p + (q + 1) C / mu: the smallest service value for which joining a
/// queue of length q is worthwhile.
double offered_reward(int q, const ModelConfig& cfg);

/// Effective (joining) arrival rate at queue length q.
double joining_rate(int q, const Vector& theta, const ModelConfig& cfg,
                    const ValueFamily& fam);

/// Probability that the jump chain moves up from q.
double up_probability(int q, const Vector& theta, const ModelConfig& cfg,
                      const ValueFamily& fam);

/// Gradient of up_probability in theta. Zero at q = 0, where the chain moves
/// up with probability one regardless of theta.
Vector up_prob_grad(int q, const Vector& theta, const ModelConfig& cfg,
                    const ValueFamily& fam);

/// Hessian of up_probability in theta. Zero at q = 0.
Matrix up_prob_hess(int q, const Vector& theta, const ModelConfig& cfg,
                    const ValueFamily& fam);

/// True iff transitions out of q carry information about theta: q > 0 and
/// F(r(q)) strictly inside (0, 1).
bool is_informative(int q, const Vector& theta, const ModelConfig& cfg,
                    const ValueFamily& fam);

/// Everything the likelihood needs about one pre-transition state, evaluated
/// with a single pass over F and its derivatives. Unchecked: theta must
/// already be in the box.
struct JumpTerms {
  bool informative = false;
  double up = 1.0;    ///< p(q)
  double down = 0.0;  ///< 1 - p(q), evaluated without cancellation
  Vector grad;      ///< dp/dtheta
  Matrix hess;      ///< d2p/dtheta2
};

JumpTerms jump_terms(int q, const Vector& theta, const ModelConfig& cfg,
                     const ValueFamily& fam, bool with_hessian = true);

}  // namespace balkwise
