#include "balkwise/stationary.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace balkwise {

namespace {

constexpr int kMaxStates = 1'000'000;

}  // namespace

const char* to_string(Weighting w) {
  return w == Weighting::time ? "time" : "jump";
}

Weighting weighting_from_string(const std::string& name) {
  if (name == "time") return Weighting::time;
  if (name == "jump") return Weighting::jump;
  throw ValidationError("weighting must be 'time' or 'jump', got '" + name + "'");
}

std::vector<double> xi_products(const Vector& theta, const ModelConfig& cfg,
                                const ValueFamily& fam, int qmax) {
  fam.param_space().require(theta);
  if (qmax < 0) throw ValidationError("qmax must be non-negative");
  std::vector<double> xi(qmax + 1);
  xi[0] = 1.0;
  for (int q = 1; q <= qmax; ++q) {
    const double rate = cfg.lambda() * fam.survival(offered_reward(q - 1, cfg), theta);
    xi[q] = xi[q - 1] * rate / cfg.mu();
  }
  return xi;
}

StationaryDist stationary_distribution(const Vector& theta,
                                       const ModelConfig& cfg,
                                       const ValueFamily& fam, double eps,
                                       Weighting weighting) {
  fam.param_space().require(theta);
  if (!(eps > 0.0 && eps < 1.0)) {
    throw ValidationError("tail tolerance must be in (0, 1)");
  }
  const double lam = cfg.lambda();
  const double mu = cfg.mu();

  StationaryDist out;
  out.weighting = weighting;
  double xi = 1.0;
  double time_mass = 0.0;
  double jump_mass = 0.0;
  for (int q = 0; q < kMaxStates; ++q) {
    const double rate = lam * fam.survival(offered_reward(q, cfg), theta);
    if (q == 0 && !(rate > 0.0)) {
      throw ValidationError(
          "no customer joins an empty queue; the stationary law is degenerate");
    }
    const double exit_rate = rate + (q > 0 ? mu : 0.0);
    time_mass += xi;
    jump_mass += xi * exit_rate;
    out.probs.push_back(weighting == Weighting::time ? xi : xi * exit_rate);

    const double ratio = rate / mu;
    if (ratio < 0.5 && xi < eps * time_mass) {
      // xi_{q+m} <= xi_q ratio^m because the joining rates do not increase.
      const double geometric = ratio / (1.0 - ratio);
      const double bound = weighting == Weighting::time
                               ? xi * geometric / time_mass
                               : xi * exit_rate * geometric / jump_mass;
      if (bound <= eps) {
        out.qstar = q;
        out.tail_bound = bound;
        const double total = weighting == Weighting::time ? time_mass : jump_mass;
        for (double& p : out.probs) p /= total;
        return out;
      }
    }
    xi *= ratio;
  }
  throw NumericalError(
      "truncation failed: stationary mass not captured within 10^6 states");
}

double expected_revenue(double price, const Vector& theta,
                        const ModelConfig& cfg, const ValueFamily& fam,
                        double eps) {
  const ModelConfig at = cfg.with_price(price);
  if (price == 0.0) return 0.0;
  const StationaryDist dist = stationary_distribution(theta, at, fam, eps, Weighting::time);
  double flow = 0.0;
  for (int q = 0; q <= dist.qstar; ++q) {
    flow += dist.probs[q] * at.lambda() * fam.survival(offered_reward(q, at), theta);
  }
  return price * flow;
}

Matrix sigma_summand(int q, const Vector& theta, const ModelConfig& cfg,
                     const ValueFamily& fam) {
  const int n = fam.dim();
  const double r = offered_reward(q, cfg);
  const double surv = fam.survival(r, theta);
  if (!(surv > 0.0 && surv < 1.0)) return Matrix::Zero(n, n);
  const Vector dF = fam.grad_cdf(r, theta);
  const double denom = cfg.mu() + cfg.lambda() * surv;
  return (cfg.mu() * cfg.lambda() / (surv * denom * denom)) * (dF * dF.transpose());
}

SigmaResult theoretical_sigma(const Vector& theta, const ModelConfig& cfg,
                              const ValueFamily& fam, double eps,
                              Weighting weighting) {
  const StationaryDist dist = stationary_distribution(theta, cfg, fam, eps, weighting);
  const int n = fam.dim();
  SigmaResult out;
  out.sigma = Matrix::Zero(n, n);
  const int first = weighting == Weighting::jump ? 1 : 0;
  for (int q = first; q <= dist.qstar; ++q) {
    out.sigma += dist.probs[q] * sigma_summand(q, theta, cfg, fam);
  }
  const Eigen::FullPivLU<Matrix> lu(out.sigma);
  out.invertible = lu.isInvertible();
  return out;
}

Vector asymptotic_std(double price, const Vector& theta, const ModelConfig& cfg,
                      const ValueFamily& fam, double eps, Weighting weighting) {
  const SigmaResult s = theoretical_sigma(theta, cfg.with_price(price), fam, eps, weighting);
  if (!s.invertible) throw NumericalError("information singular");
  const Matrix inv = s.sigma.inverse();
  Vector sd(fam.dim());
  for (int j = 0; j < fam.dim(); ++j) sd[j] = std::sqrt(inv(j, j));
  return sd;
}

double price_upper_bound(const Vector& theta, const ModelConfig& cfg,
                         const ValueFamily& fam) {
  fam.param_space().require(theta);
  auto negligible = [&](double p) {
    return fam.survival(offered_reward(0, cfg.with_price(p)), theta) < 1e-6;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (!negligible(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) {
      throw NumericalError("no price makes the empty-queue joining rate negligible");
    }
  }
  for (int i = 0; i < 200 && hi - lo > 1e-9 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (negligible(mid) ? hi : lo) = mid;
  }
  return hi;
}

namespace {

double search_hi(const PriceSearch& search, const Vector& theta,
                 const ModelConfig& cfg, const ValueFamily& fam) {
  const double hi = search.hi > 0.0 ? search.hi : price_upper_bound(theta, cfg, fam);
  if (!(hi > search.lo)) {
    throw ValidationError("price search interval is empty");
  }
  return hi;
}

}  // namespace

ScalarOptimum revenue_maximizing_price(const Vector& theta,
                                       const ModelConfig& cfg,
                                       const ValueFamily& fam,
                                       const PriceSearch& search) {
  const double hi = search_hi(search, theta, cfg, fam);
  return grid_golden_maximize(
      [&](double p) { return expected_revenue(p, theta, cfg, fam); }, search.lo,
      hi, search.grid_points, search.x_tol);
}

ScalarOptimum std_minimizing_price(const Vector& theta, const ModelConfig& cfg,
                                   const ValueFamily& fam, Weighting weighting,
                                   const PriceSearch& search) {
  const double hi = search_hi(search, theta, cfg, fam);
  auto neg_std = [&](double p) {
    try {
      return -asymptotic_std(p, theta, cfg, fam, kDefaultTailEps, weighting)[0];
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  ScalarOptimum o = grid_golden_maximize(neg_std, search.lo, hi, search.grid_points,
                                         search.x_tol);
  o.value = -o.value;
  return o;
}

}  // namespace balkwise
