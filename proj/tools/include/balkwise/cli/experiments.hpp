#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "balkwise/cli/config.hpp"
#include "balkwise/cli/stats.hpp"
#include "balkwise/inference.hpp"
#include "balkwise/io.hpp"
#include "balkwise/pricing.hpp"

namespace balkwise::cli {

/// Seed of replication `rep` of the `stream`-th batch (e.g. the k index).
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t rep);

/// Simulates one path per the config's initial-state policy.
QueuePath simulate_for(const ExperimentConfig& cfg, const ModelConfig& model,
                       const ValueFamily& fam, const Vector& theta0, std::size_t k,
                       std::uint64_t seed);

/// One replication's fit; `ok` is false when no interior estimate exists.
struct ReplicationFit {
  std::int64_t k = 0;
  int replication = 0;
  bool ok = false;
  bool boundary = false;
  Vector theta_hat;
  double score_at_hat = 0.0;   ///< first coordinate of Psi_k(theta_hat)
  double score_at_true = 0.0;  ///< first coordinate of Psi_k(theta0)
};

// --- score convergence ----------------------------------------------------

struct ScoreSummary {
  std::int64_t k = 0;
  int used = 0;
  double sd_at_hat = 0.0;
  double sd_at_true = 0.0;
  double mean_at_true = 0.0;
  double max_abs_at_hat = 0.0;  ///< over interior fits
};

struct ScoreConvergence {
  std::vector<ReplicationFit> rows;
  std::vector<ScoreSummary> summary;
};

ScoreConvergence exp_score_convergence(const ExperimentConfig& cfg);

// --- consistency -------------------------------------------------------------

struct ConsistencySummary {
  std::int64_t k = 0;
  int used = 0;
  int excluded = 0;
  double median_abs_error = 0.0;
};

struct LoglikCurve {
  std::int64_t k = 0;
  double theta_hat = 0.0;
  std::vector<double> theta;
  std::vector<double> loglik;
};

struct Consistency {
  std::vector<ReplicationFit> rows;
  std::vector<ConsistencySummary> summary;
  std::vector<LoglikCurve> curves;  ///< one fixed path per k
};

Consistency exp_consistency(const ExperimentConfig& cfg);

// --- normality ---------------------------------------------------------------

struct NormalityBatch {
  std::int64_t k = 0;
  std::vector<double> errors;        ///< sqrt(k) (theta_hat - theta0), first coordinate
  std::vector<double> standardized;  ///< errors / theoretical std
  int excluded = 0;                  ///< boundary or failed fits
  double theoretical_std = 0.0;      ///< jump weighting
  double mean_error = 0.0;
  double mean_standardized = 0.0;
  double sd_standardized = 0.0;
  NormalityTest test;
};

std::vector<NormalityBatch> exp_normality(const ExperimentConfig& cfg);

// --- std and revenue against price -----------------------------------------

struct StdPoint {
  double price = 0.0;
  double std_time = 0.0;  ///< NaN when the point failed
  double std_jump = 0.0;
};

struct EmpiricalStdPoint {
  double price = 0.0;
  std::int64_t k = 0;
  double std_empirical = 0.0;
  double std_theory = 0.0;  ///< configured weighting
  int used = 0;
  int excluded = 0;
};

struct StdCurve {
  Vector theta;
  std::vector<StdPoint> points;
  ScalarOptimum argmin;  ///< configured weighting
  std::vector<EmpiricalStdPoint> empirical;
  std::vector<std::string> skipped;  ///< per-price failure notes
};

std::vector<StdCurve> exp_std_vs_price(const ExperimentConfig& cfg);

struct RevenueCurve {
  Vector theta;
  std::vector<CurvePoint> points;
  ScalarOptimum argmax;
  std::vector<std::string> skipped;
};

std::vector<RevenueCurve> exp_revenue_vs_price(const ExperimentConfig& cfg);

// --- pricing tables -------------------------------------------------------

struct CellSummary {
  PricingCell cell;
  int runs = 0;
  int failures = 0;
  bool flagged = false;  ///< more than 5% of runs failed
  double iterations = 0.0;
  double total_observations = 0.0;
  double final_fraction = 0.0;
  double cumulative_fraction = 0.0;
  double lost_revenue = 0.0;
  double mean_abs_price_error = 0.0;
  double std_abs_price_error = 0.0;
  double mean_price_error = 0.0;  ///< signed
  double se_iterations = 0.0;
  double se_final_fraction = 0.0;
  std::vector<TraceMetrics> runs_metrics;
};

std::vector<CellSummary> exp_pricing_tables(const ExperimentConfig& cfg);

// --- CSV emission -----------------------------------------------------------

void write_fits_csv(std::ostream& os, const std::vector<ReplicationFit>& rows);
void write_score_summary_csv(std::ostream& os, const std::vector<ScoreSummary>& rows);
void write_consistency_summary_csv(std::ostream& os, const std::vector<ConsistencySummary>& rows);
void write_loglik_curves_csv(std::ostream& os, const std::vector<LoglikCurve>& curves);
void write_normality_errors_csv(std::ostream& os, const std::vector<NormalityBatch>& batches);
void write_normality_summary_csv(std::ostream& os, const std::vector<NormalityBatch>& batches);
void write_std_curves_csv(std::ostream& os, const std::vector<StdCurve>& curves);
void write_empirical_std_csv(std::ostream& os, const std::vector<StdCurve>& curves);
/// Rows are the table's metric labels, one column per cell.
void write_pricing_table_csv(std::ostream& os, const std::vector<CellSummary>& cells);

}  // namespace balkwise::cli
