#pragma once

#include <vector>

namespace balkwise::cli {

double mean(const std::vector<double>& x);
/// Sample standard deviation (n - 1 denominator).
double stddev(const std::vector<double>& x);
double median(std::vector<double> x);

struct NormalityTest {
  double statistic = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  ///< not excess
  bool reject = false;    ///< at the 5% level
};

/// Moments-based test: JB = n/6 (skew^2 + (kurt - 3)^2 / 4), rejected when
/// JB > 5.99 (chi-square, 2 dof, 95%). Needs n >= 20 and positive variance.
NormalityTest jarque_bera(const std::vector<double>& sample);

}  // namespace balkwise::cli
