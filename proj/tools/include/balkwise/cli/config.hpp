#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "balkwise/model.hpp"
#include "balkwise/pricing.hpp"
#include "balkwise/stationary.hpp"
#include "json.hpp"

namespace balkwise::cli {

struct FamilySpec {
  std::string name = "exponential";
  Vector lower = scalar_theta(1e-3);
  Vector upper = scalar_theta(1.0);
};

/// Builds the named family with its parameter box. Only "exponential" ships with the
/// tool.
std::unique_ptr<ValueFamily> make_family(const FamilySpec& spec);

struct PriceGrid {
  double lo = 1.0;
  double hi = 250.0;
  int points = 250;

  std::vector<double> values() const;
};

/// One (schedule, k1_min, p1) cell of the pricing tables.
struct PricingCell {
  Schedule schedule = Schedule::increment;
  std::int64_t k1_min = 2;
  double p1 = 15.0;
};

struct ExperimentConfig {
  std::string experiment;
  double lambda = 1.0;
  double mu = 1.0;
  double cost = 1.0;
  double price = 15.0;
  FamilySpec family;
  std::optional<Vector> theta0;
  /// Parameters for the curve experiments; defaults to {theta0}.
  std::vector<Vector> theta_list;
  std::vector<std::int64_t> k_list;
  int replications = 100;
  std::uint64_t seed = 1;
  PriceGrid price_grid;
  /// Empirical overlay of std-vs-price: prices and replications per price.
  std::vector<double> empirical_prices;
  int empirical_replications = 500;
  /// Log-likelihood curves of the consistency experiment.
  PriceGrid loglik_grid{0.001, 0.1, 200};
  std::optional<int> initial_state;
  std::size_t warmup_steps = 1000;
  Weighting weighting = Weighting::time;
  PricingConfig pricing;
  std::vector<PricingCell> cells;
  std::optional<std::string> path;    ///< fit: path CSV
  std::optional<std::string> stream;  ///< autoprice: observation CSV
  std::string output_dir;

  ModelConfig model() const { return ModelConfig(lambda, mu, cost, price); }
  Vector require_theta0() const;
  std::vector<Vector> curve_thetas() const;

  /// Checks everything the chosen experiment needs; throws ValidationError
  /// naming the offending field.
  void validate() const;
};

/// The experiments and subcommands the config can describe.
const std::vector<std::string>& experiment_names();

/// Observation budget of the pricing tables when the config leaves it unset.
inline constexpr std::int64_t kTableBudget = 1500;

/// Both schedules crossed with k1_min in {2, 100} and p1 in {1, 15, 100, 250}.
std::vector<PricingCell> table_cells();

/// Parses a config document. Unknown keys are errors.
ExperimentConfig config_from_json(const nlohmann::json& doc);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Applies `dotted.key=value` to a config document. The value is read as
/// JSON when it parses, otherwise as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Reads a JSON config file; ValidationError on I/O or syntax problems.
nlohmann::json load_config_file(const std::string& path);

}  // namespace balkwise::cli
