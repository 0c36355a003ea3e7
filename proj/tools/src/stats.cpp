#include "balkwise/cli/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "balkwise/common.hpp"

namespace balkwise::cli {

double mean(const std::vector<double>& x) {
  if (x.empty()) throw ValidationError("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(const std::vector<double>& x) {
  if (x.size() < 2) throw ValidationError("standard deviation needs two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double median(std::vector<double> x) {
  if (x.empty()) throw ValidationError("median of an empty sample");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + mid, x.end());
  if (x.size() % 2) return x[mid];
  const double hi = x[mid];
  const double lo = *std::max_element(x.begin(), x.begin() + mid);
  return 0.5 * (lo + hi);
}

NormalityTest jarque_bera(const std::vector<double>& sample) {
  const std::size_t n = sample.size();
  if (n < 20) throw ValidationError("normality test needs at least 20 values");
  const double m = mean(sample);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : sample) {
    const double d = v - m;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0) || m2 <= 1e-300) {
    throw NumericalError("normality test on a sample with zero variance");
  }
  NormalityTest t;
  t.skewness = m3 / std::pow(m2, 1.5);
  t.kurtosis = m4 / (m2 * m2);
  const double ex = t.kurtosis - 3.0;
  t.statistic = static_cast<double>(n) / 6.0 * (t.skewness * t.skewness + ex * ex / 4.0);
  t.reject = t.statistic > 5.991464547107979;
  return t;
}

}  // namespace balkwise::cli
