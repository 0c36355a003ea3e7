#include "balkwise/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "balkwise/optimize.hpp"

namespace balkwise {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool visited(const TransitionCounts& c, int q) {
  return c.up[q] + c.down[q] > 0;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool near_boundary(const Vector& theta, const ParamSpace& box, double tol) {
  const Vector slack = tol * box.width();
  for (int j = 0; j < box.dim(); ++j) {
    if (theta[j] - box.lower()[j] <= slack[j] ||
        box.upper()[j] - theta[j] <= slack[j]) {
      return true;
    }
  }
  return false;
}

/// True when every informative transition moves the same way. The likelihood
/// is then monotone in each F(r(q)) and its supremum lies on the edge of the
/// family, even if a saturated score looks flat somewhere inside the box.
bool one_sided(const TransitionCounts& c, const Vector& theta, const ModelConfig& cfg,
               const ValueFamily& fam) {
  std::int64_t ups = 0, downs = 0;
  for (int q = 1; q <= c.max_state(); ++q) {
    if (!visited(c, q) || !is_informative(q, theta, cfg, fam)) continue;
    ups += c.up[q];
    downs += c.down[q];
  }
  return ups == 0 || downs == 0;
}

}  // namespace

TransitionCounts count_transitions(const QueuePath& path) {
  TransitionCounts c;
  int max_state = 0;
  for (int q : path.states) max_state = std::max(max_state, q);
  c.up.assign(max_state + 1, 0);
  c.down.assign(max_state + 1, 0);
  for (std::size_t i = 0; i < path.steps(); ++i) {
    if (path.ups[i]) {
      ++c.up[path.states[i]];
    } else {
      ++c.down[path.states[i]];
    }
  }
  c.total_k = static_cast<std::int64_t>(path.steps());
  return c;
}

double log_likelihood(const TransitionCounts& counts, const Vector& theta,
                      const ModelConfig& cfg, const ValueFamily& fam) {
  fam.param_space().require(theta);
  double ll = 0.0;
  for (int q = 1; q <= counts.max_state(); ++q) {
    if (!visited(counts, q)) continue;
    const JumpTerms t = jump_terms(q, theta, cfg, fam, false);
    if (!t.informative) {
      // Deterministic under theta; contributes nothing unless the observed
      // move is impossible.
      if (t.up == 0.0 && counts.up[q] > 0) return kNegInf;
      continue;
    }
    if (counts.up[q] > 0) ll += counts.up[q] * std::log(t.up);
    if (counts.down[q] > 0) ll += counts.down[q] * std::log(t.down);
  }
  return std::isnan(ll) ? kNegInf : ll;
}

double log_likelihood(const QueuePath& path, const Vector& theta,
                      const ModelConfig& cfg, const ValueFamily& fam) {
  return log_likelihood(count_transitions(path), theta, cfg, fam);
}

Vector score(const TransitionCounts& counts, const Vector& theta,
             const ModelConfig& cfg, const ValueFamily& fam) {
  fam.param_space().require(theta);
  Vector s = Vector::Zero(fam.dim());
  if (counts.total_k == 0) return s;
  for (int q = 1; q <= counts.max_state(); ++q) {
    if (!visited(counts, q)) continue;
    const JumpTerms t = jump_terms(q, theta, cfg, fam, false);
    if (!t.informative) continue;
    s += (counts.up[q] / t.up - counts.down[q] / t.down) * t.grad;
  }
  return s / static_cast<double>(counts.total_k);
}

Vector score(const QueuePath& path, const Vector& theta,
             const ModelConfig& cfg, const ValueFamily& fam) {
  return score(count_transitions(path), theta, cfg, fam);
}

Matrix observed_information(const TransitionCounts& counts,
                            const Vector& theta, const ModelConfig& cfg,
                            const ValueFamily& fam) {
  fam.param_space().require(theta);
  const int n = fam.dim();
  Matrix info = Matrix::Zero(n, n);
  if (counts.total_k == 0) return info;
  for (int q = 1; q <= counts.max_state(); ++q) {
    if (!visited(counts, q)) continue;
    const JumpTerms t = jump_terms(q, theta, cfg, fam, true);
    if (!t.informative) continue;
    const Matrix gg = t.grad * t.grad.transpose();
    // d/dtheta of  Y p'/p - (1 - Y) p'/(1 - p)
    const Matrix d_up = t.hess / t.up - gg / (t.up * t.up);
    const Matrix d_down = t.hess / t.down + gg / (t.down * t.down);
    info -= static_cast<double>(counts.up[q]) * d_up -
            static_cast<double>(counts.down[q]) * d_down;
  }
  return symmetrize(info / static_cast<double>(counts.total_k));
}

Matrix observed_information(const QueuePath& path, const Vector& theta,
                            const ModelConfig& cfg, const ValueFamily& fam) {
  return observed_information(count_transitions(path), theta, cfg, fam);
}

Matrix outer_product_information(const TransitionCounts& counts,
                                 const Vector& theta, const ModelConfig& cfg,
                                 const ValueFamily& fam) {
  fam.param_space().require(theta);
  const int n = fam.dim();
  Matrix info = Matrix::Zero(n, n);
  if (counts.total_k == 0) return info;
  for (int q = 1; q <= counts.max_state(); ++q) {
    if (!visited(counts, q)) continue;
    const JumpTerms t = jump_terms(q, theta, cfg, fam, false);
    if (!t.informative) continue;
    const Matrix gg = t.grad * t.grad.transpose();
    info += (counts.up[q] / (t.up * t.up) + counts.down[q] / (t.down * t.down)) * gg;
  }
  return info / static_cast<double>(counts.total_k);
}

std::int64_t effective_sample_size(const TransitionCounts& counts,
                                   const Vector& theta, const ModelConfig& cfg,
                                   const ValueFamily& fam) {
  std::int64_t m = 0;
  for (int q = 1; q <= counts.max_state(); ++q) {
    if (visited(counts, q) && is_informative(q, theta, cfg, fam)) {
      m += counts.up[q] + counts.down[q];
    }
  }
  return m;
}

namespace {

Vector fit_scalar(const TransitionCounts& counts, const ModelConfig& cfg,
                  const ValueFamily& fam, const FitOptions& opts) {
  const ParamSpace& box = fam.param_space();
  const double lo = box.lower()[0];
  const double hi = box.upper()[0];
  auto ll = [&](double x) {
    return log_likelihood(counts, scalar_theta(x), cfg, fam);
  };
  const ScalarOptimum opt =
      grid_golden_maximize(ll, lo, hi, opts.grid_points, opts.x_tol * (hi - lo));

  // Newton on the score, kept inside the winning bracket.
  double x = opt.x;
  double s = score(counts, scalar_theta(x), cfg, fam)[0];
  for (int it = 0; it < 30 && s != 0.0; ++it) {
    const double info = observed_information(counts, scalar_theta(x), cfg, fam)(0, 0);
    if (!(info > 0.0)) break;
    const double cand = x + s / info;
    if (!(cand >= opt.bracket_lo && cand <= opt.bracket_hi)) break;
    const double s_cand = score(counts, scalar_theta(cand), cfg, fam)[0];
    if (!(std::abs(s_cand) < std::abs(s))) break;
    x = cand;
    s = s_cand;
  }
  return scalar_theta(x);
}

Vector newton_polish(const TransitionCounts& counts, const ModelConfig& cfg,
                     const ValueFamily& fam, Vector theta, double tol) {
  const ParamSpace& box = fam.param_space();
  const int n = box.dim();
  for (int it = 0; it < 30; ++it) {
    const Vector s = score(counts, theta, cfg, fam);
    std::vector<int> free;
    for (int j = 0; j < n; ++j) {
      const double slack = tol * box.width()[j];
      const bool pinned = (theta[j] - box.lower()[j] <= slack && s[j] < 0.0) ||
                          (box.upper()[j] - theta[j] <= slack && s[j] > 0.0);
      if (!pinned) free.push_back(j);
    }
    if (free.empty()) break;
    const Matrix info = observed_information(counts, theta, cfg, fam);
    const int m = static_cast<int>(free.size());
    Matrix info_ff(m, m);
    Vector s_f(m);
    for (int a = 0; a < m; ++a) {
      s_f[a] = s[free[a]];
      for (int b = 0; b < m; ++b) info_ff(a, b) = info(free[a], free[b]);
    }
    const Eigen::LDLT<Matrix> ldlt(info_ff);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    const Vector step_f = ldlt.solve(s_f);
    Vector cand = theta;
    for (int a = 0; a < m; ++a) cand[free[a]] += step_f[a];
    cand = box.project(cand);
    const Vector s_cand = score(counts, cand, cfg, fam);
    double norm_cand = 0.0;
    for (int j : free) norm_cand += s_cand[j] * s_cand[j];
    if (!(norm_cand < s_f.squaredNorm())) break;
    if (log_likelihood(counts, cand, cfg, fam) <
        log_likelihood(counts, theta, cfg, fam) - 1e-9) {
      break;
    }
    theta = cand;
  }
  return theta;
}

Vector fit_multi(const TransitionCounts& counts, const ModelConfig& cfg,
                 const ValueFamily& fam, const FitOptions& opts) {
  const ParamSpace& box = fam.param_space();
  const double k = static_cast<double>(counts.total_k);
  std::vector<Vector> starts{box.center()};
  if (opts.init) starts.push_back(box.project(*opts.init));
  Rng rng(opts.seed);
  while (static_cast<int>(starts.size()) < std::max(opts.starts, 1)) {
    Vector u(box.dim());
    for (int j = 0; j < box.dim(); ++j) u[j] = 0.05 + 0.9 * rng.uniform();
    starts.push_back(box.lower() + u.cwiseProduct(box.width()));
  }

  auto objective = [&](const Vector& th) {
    return ValueGrad{log_likelihood(counts, th, cfg, fam) / k,
                     score(counts, th, cfg, fam)};
  };
  BoxOptions bopts;
  bopts.x_tol = opts.x_tol;
  Vector best;
  double best_value = kNegInf;
  for (const Vector& start : starts) {
    if (!std::isfinite(log_likelihood(counts, start, cfg, fam))) continue;
    const BoxOptimum o = projected_bfgs_maximize(objective, box, start, bopts);
    if (o.value > best_value) {
      best_value = o.value;
      best = o.x;
    }
  }
  if (best.size() == 0) {
    throw NumericalError("log-likelihood is not finite at any starting point");
  }
  return newton_polish(counts, cfg, fam, best, opts.boundary_tol);
}

}  // namespace

FitResult fit_mle(const TransitionCounts& counts, const ModelConfig& cfg,
                  const ValueFamily& fam, const FitOptions& opts) {
  const ParamSpace& box = fam.param_space();
  if (counts.total_k == 0 ||
      effective_sample_size(counts, box.center(), cfg, fam) == 0) {
    throw NumericalError("no informative transitions");
  }

  FitResult fit;
  fit.theta_hat = fam.dim() == 1 ? fit_scalar(counts, cfg, fam, opts)
                                 : fit_multi(counts, cfg, fam, opts);
  fit.loglik = log_likelihood(counts, fit.theta_hat, cfg, fam);
  fit.score_norm = score(counts, fit.theta_hat, cfg, fam).norm();
  fit.boundary = near_boundary(fit.theta_hat, box, opts.boundary_tol) ||
                 one_sided(counts, fit.theta_hat, cfg, fam);
  fit.effective_n = effective_sample_size(counts, fit.theta_hat, cfg, fam);
  fit.total_k = counts.total_k;
  fit.sigma_plugin = observed_information(counts, fit.theta_hat, cfg, fam);

  const int n = fam.dim();
  fit.std_err = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  const Eigen::FullPivLU<Matrix> lu(fit.sigma_plugin);
  if (lu.isInvertible()) {
    const Matrix inv = lu.inverse();
    for (int j = 0; j < n; ++j) {
      if (inv(j, j) > 0.0) {
        fit.std_err[j] = std::sqrt(inv(j, j) / static_cast<double>(fit.total_k));
      }
    }
  }
  return fit;
}

FitResult fit_mle(const QueuePath& path, const ModelConfig& cfg,
                  const ValueFamily& fam, const FitOptions& opts) {
  if (path.empty()) throw ValidationError("path has no transitions");
  return fit_mle(count_transitions(path), cfg, fam, opts);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("normal quantile needs a probability in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::vector<Interval> confidence_interval(const FitResult& fit, double level) {
  if (!(level >= 0.0 && level < 1.0)) {
    throw ValidationError("confidence level must be in [0, 1)");
  }
  if (fit.boundary) {
    throw ValidationError("confidence interval needs an interior estimate");
  }
  if (!fit.std_err.allFinite()) throw NumericalError("information singular");
  const double z = normal_quantile(0.5 * (1.0 + level));
  std::vector<Interval> out;
  for (Eigen::Index j = 0; j < fit.theta_hat.size(); ++j) {
    out.push_back({fit.theta_hat[j] - z * fit.std_err[j],
                   fit.theta_hat[j] + z * fit.std_err[j]});
  }
  return out;
}

}  // namespace balkwise
