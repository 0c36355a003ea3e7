#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "balkwise/model.hpp"
#include "balkwise/simulator.hpp"

namespace balkwise {

/// Up and down moves tallied by pre-transition state. The likelihood of the
/// jump chain depends on a path only through these counts, so every
/// evaluation below costs O(number of visited states) rather than O(k).
struct TransitionCounts {
  std::vector<std::int64_t> up;
  std::vector<std::int64_t> down;
  std::int64_t total_k = 0;

  int max_state() const { return static_cast<int>(up.size()) - 1; }
};

TransitionCounts count_transitions(const QueuePath& path);

/// Log-likelihood of theta over the effective sample, Bernoulli form. The
/// theta-free constants are left out, so values are comparable only for a
/// fixed path. -infinity if the path is impossible under theta.
double log_likelihood(const TransitionCounts& counts, const Vector& theta,
                      const ModelConfig& cfg, const ValueFamily& fam);
double log_likelihood(const QueuePath& path, const Vector& theta,
                      const ModelConfig& cfg, const ValueFamily& fam);

/// Score Psi_k(theta): gradient of the log-likelihood divided by the full
/// sample size k (not by |M|).
Vector score(const TransitionCounts& counts, const Vector& theta,
             const ModelConfig& cfg, const ValueFamily& fam);
Vector score(const QueuePath& path, const Vector& theta,
             const ModelConfig& cfg, const ValueFamily& fam);

/// Observed information -dPsi_k/dtheta (same 1/k normalization).
Matrix observed_information(const TransitionCounts& counts,
                            const Vector& theta, const ModelConfig& cfg,
                            const ValueFamily& fam);
Matrix observed_information(const QueuePath& path, const Vector& theta,
                            const ModelConfig& cfg, const ValueFamily& fam);

/// Outer-product-of-scores information (1/k) sum psi psi^T. Cross-check for
/// observed_information; both converge to the same limit at the truth.
Matrix outer_product_information(const TransitionCounts& counts,
                                 const Vector& theta, const ModelConfig& cfg,
                                 const ValueFamily& fam);

/// Number of transitions in the effective sample under theta.
std::int64_t effective_sample_size(const TransitionCounts& counts,
                                   const Vector& theta, const ModelConfig& cfg,
                                   const ValueFamily& fam);

struct FitResult {
  Vector theta_hat;
  double loglik = 0.0;
  double score_norm = 0.0;
  bool boundary = false;
  std::int64_t effective_n = 0;
  std::int64_t total_k = 0;
  Matrix sigma_plugin;  ///< observed information at theta_hat
  Vector std_err;       ///< sqrt(diag(sigma_plugin^-1) / k); NaN if singular
};

struct FitOptions {
  std::optional<Vector> init;
  int starts = 5;             ///< multi-start count when dim > 1
  std::uint64_t seed = 0x5eed;  ///< draws the random starts
  int grid_points = 64;       ///< bracket scan when dim == 1
  double x_tol = 1e-10;
  double boundary_tol = 1e-6;  ///< relative to the box width
};

/// Maximum-likelihood estimate over the parameter box.
///
/// One parameter: grid scan of the box, golden-section search inside the
/// best bracket, then Newton steps on the score. Several parameters:
/// projected BFGS from the box center, the user's init and random interior
/// starts, followed by Newton polishing on the free coordinates. The
/// estimate is flagged `boundary` when any coordinate lies within
/// boundary_tol * width of a bound, and also when all informative
/// transitions are up-steps or all are down-steps (no interior maximizer).
///
/// Throws NumericalError("no informative transitions") when the effective
/// sample is empty.
FitResult fit_mle(const TransitionCounts& counts, const ModelConfig& cfg,
                  const ValueFamily& fam, const FitOptions& opts = {});
FitResult fit_mle(const QueuePath& path, const ModelConfig& cfg,
                  const ValueFamily& fam, const FitOptions& opts = {});

struct Interval {
  double lo;
  double hi;
};

/// Wald intervals theta_hat_j +- z std_err_j at the given coverage level.
std::vector<Interval> confidence_interval(const FitResult& fit, double level);

/// Inverse of the standard normal cdf.
double normal_quantile(double p);

}  // namespace balkwise
