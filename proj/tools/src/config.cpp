#include "balkwise/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace balkwise::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ValidationError("config field '" + field + "': " + what);
}

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where, "must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(where.empty() ? key : where + "." + key, "unknown key (expected one of: " + list + ")");
    }
  }
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number");
  return j.get<double>();
}

std::int64_t get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(field, "must be an integer");
  return j.get<std::int64_t>();
}

Vector get_vector(const json& j, const std::string& field) {
  if (j.is_number()) return scalar_theta(j.get<double>());
  if (!j.is_array() || j.empty()) fail(field, "must be a number or a non-empty array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = get_number(j[i], field);
  return v;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

PriceGrid get_grid(const json& j, const std::string& field, PriceGrid grid) {
  check_keys(j, field, {"lo", "hi", "points"});
  if (j.contains("lo")) grid.lo = get_number(j["lo"], field + ".lo");
  if (j.contains("hi")) grid.hi = get_number(j["hi"], field + ".hi");
  if (j.contains("points")) grid.points = static_cast<int>(get_int(j["points"], field + ".points"));
  return grid;
}

void check_grid(const PriceGrid& g, const std::string& field) {
  if (!(g.lo >= 0.0) || !(g.hi > g.lo) || !std::isfinite(g.hi)) {
    fail(field, "needs 0 <= lo < hi");
  }
  if (g.points < 2) fail(field + ".points", "must be >= 2");
}

}  // namespace

std::unique_ptr<ValueFamily> make_family(const FamilySpec& spec) {
  if (spec.name == "exponential") {
    if (spec.lower.size() != 1 || spec.upper.size() != 1) {
      fail("family", "exponential has one parameter");
    }
    return std::make_unique<ExponentialFamily>(spec.lower[0], spec.upper[0]);
  }
  fail("family.name", "unknown family '" + spec.name + "' (available: exponential)");
}

std::vector<double> PriceGrid::values() const {
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) v[i] = lo + (hi - lo) * i / (points - 1);
  return v;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "score-convergence", "consistency", "normality",     "std-vs-price",
      "revenue-vs-price",  "pricing-tables", "simulate",   "fit",
      "stationary",        "revenue",     "price-opt",     "autoprice"};
  return names;
}

Vector ExperimentConfig::require_theta0() const {
  if (!theta0) fail("theta0", "required for " + experiment);
  return *theta0;
}

std::vector<Vector> ExperimentConfig::curve_thetas() const {
  if (!theta_list.empty()) return theta_list;
  return {require_theta0()};
}

void ExperimentConfig::validate() const {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    fail("experiment", "unknown experiment '" + experiment + "'");
  }
  (void)model();  // rate and price checks
  const auto fam = make_family(family);
  if (replications < 1) fail("replications", "must be >= 1");
  if (initial_state && *initial_state < 0) fail("initial_state", "must be >= 0");

  auto check_theta = [&](const Vector& th, const std::string& field) {
    if (th.size() != fam->dim()) {
      fail(field, "has dimension " + std::to_string(th.size()) + ", family needs " +
                      std::to_string(fam->dim()));
    }
    if (!fam->param_space().contains(th)) fail(field, "lies outside the family's box");
  };
  if (theta0) check_theta(*theta0, "theta0");
  for (std::size_t i = 0; i < theta_list.size(); ++i) {
    check_theta(theta_list[i], "theta_list[" + std::to_string(i) + "]");
  }
  for (auto k : k_list) {
    if (k < 1) fail("k", "every entry must be >= 1");
  }

  const bool simulates = experiment == "simulate" || experiment == "score-convergence" ||
                         experiment == "consistency" || experiment == "normality" ||
                         experiment == "pricing-tables" ||
                         (experiment == "autoprice" && !stream) ||
                         (experiment == "std-vs-price" && !empirical_prices.empty());
  if (simulates) require_theta0();
  const bool needs_k = experiment == "simulate" || experiment == "score-convergence" ||
                       experiment == "consistency" || experiment == "normality" ||
                       (experiment == "std-vs-price" && !empirical_prices.empty());
  if (needs_k && k_list.empty()) fail("k", "required for " + experiment);
  if (experiment == "simulate" && k_list.size() != 1) fail("k", "simulate takes a single k");
  if (experiment == "normality" && replications < 20) {
    fail("replications", "normality needs at least 20 replications");
  }
  if (experiment == "fit" && !path) fail("path", "fit needs a path CSV");
  if (experiment == "stationary" || experiment == "revenue" || experiment == "price-opt" ||
      experiment == "std-vs-price" || experiment == "revenue-vs-price") {
    (void)curve_thetas();
  }
  if (experiment == "revenue" || experiment == "std-vs-price" ||
      experiment == "revenue-vs-price") {
    check_grid(price_grid, "price_grid");
  }
  if (experiment == "consistency") check_grid(loglik_grid, "loglik_grid");
  if (experiment == "std-vs-price" && empirical_replications < 2) {
    fail("empirical_replications", "must be >= 2");
  }
  for (double p : empirical_prices) {
    if (!(p >= 0.0) || !std::isfinite(p)) fail("empirical_prices", "prices must be >= 0");
  }
  if (experiment == "autoprice" || experiment == "pricing-tables") {
    try {
      pricing.validate();
    } catch (const ValidationError& e) {
      fail("pricing", e.what());
    }
  }
  if (experiment == "pricing-tables" && cells.empty()) {
    fail("cells", "pricing-tables needs at least one cell");
  }
  for (const auto& c : cells) {
    if (c.k1_min < 1) fail("cells.k1_min", "must be >= 1");
    if (!(c.p1 >= 0.0)) fail("cells.p1", "must be >= 0");
  }
}

std::vector<PricingCell> table_cells() {
  std::vector<PricingCell> cells;
  for (Schedule s : {Schedule::increment, Schedule::doubling}) {
    for (std::int64_t k1 : {2, 100}) {
      for (double p1 : {1.0, 15.0, 100.0, 250.0}) cells.push_back({s, k1, p1});
    }
  }
  return cells;
}

ExperimentConfig config_from_json(const json& doc) {
  check_keys(doc, "",
             {"experiment", "model", "family", "theta0", "theta_list", "k", "replications",
              "seed", "price_grid", "empirical_prices", "empirical_replications",
              "loglik_grid", "initial_state", "warmup_steps", "weighting", "pricing", "cells",
              "path", "stream", "output"});
  ExperimentConfig c;
  if (doc.contains("experiment")) {
    if (!doc["experiment"].is_string()) fail("experiment", "must be a string");
    c.experiment = doc["experiment"].get<std::string>();
  }
  if (doc.contains("model")) {
    const json& m = doc["model"];
    check_keys(m, "model", {"lambda", "mu", "cost", "price"});
    if (m.contains("lambda")) c.lambda = get_number(m["lambda"], "model.lambda");
    if (m.contains("mu")) c.mu = get_number(m["mu"], "model.mu");
    if (m.contains("cost")) c.cost = get_number(m["cost"], "model.cost");
    if (m.contains("price")) c.price = get_number(m["price"], "model.price");
  }
  if (doc.contains("family")) {
    const json& f = doc["family"];
    check_keys(f, "family", {"name", "lower", "upper"});
    if (f.contains("name")) c.family.name = f["name"].get<std::string>();
    if (f.contains("lower")) c.family.lower = get_vector(f["lower"], "family.lower");
    if (f.contains("upper")) c.family.upper = get_vector(f["upper"], "family.upper");
  }
  if (doc.contains("theta0") && !doc["theta0"].is_null()) {
    c.theta0 = get_vector(doc["theta0"], "theta0");
  }
  if (doc.contains("theta_list")) {
    if (!doc["theta_list"].is_array()) fail("theta_list", "must be an array");
    for (const auto& t : doc["theta_list"]) c.theta_list.push_back(get_vector(t, "theta_list"));
  }
  if (doc.contains("k")) {
    const json& k = doc["k"];
    if (k.is_array()) {
      for (const auto& v : k) c.k_list.push_back(get_int(v, "k"));
    } else {
      c.k_list.push_back(get_int(k, "k"));
    }
  }
  if (doc.contains("replications")) {
    c.replications = static_cast<int>(get_int(doc["replications"], "replications"));
  }
  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      fail("seed", "must be a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("price_grid")) c.price_grid = get_grid(doc["price_grid"], "price_grid", c.price_grid);
  if (doc.contains("loglik_grid")) {
    c.loglik_grid = get_grid(doc["loglik_grid"], "loglik_grid", c.loglik_grid);
  }
  if (doc.contains("empirical_prices")) {
    if (!doc["empirical_prices"].is_array()) fail("empirical_prices", "must be an array");
    for (const auto& p : doc["empirical_prices"]) {
      c.empirical_prices.push_back(get_number(p, "empirical_prices"));
    }
  }
  if (doc.contains("empirical_replications")) {
    c.empirical_replications =
        static_cast<int>(get_int(doc["empirical_replications"], "empirical_replications"));
  }
  if (doc.contains("initial_state") && !doc["initial_state"].is_null()) {
    c.initial_state = static_cast<int>(get_int(doc["initial_state"], "initial_state"));
  }
  if (doc.contains("warmup_steps")) {
    const auto w = get_int(doc["warmup_steps"], "warmup_steps");
    if (w < 0) fail("warmup_steps", "must be >= 0");
    c.warmup_steps = static_cast<std::size_t>(w);
  }
  if (doc.contains("weighting")) {
    try {
      c.weighting = weighting_from_string(doc["weighting"].get<std::string>());
    } catch (const std::exception& e) {
      fail("weighting", e.what());
    }
  }
  if (doc.contains("pricing")) {
    const json& p = doc["pricing"];
    check_keys(p, "pricing",
               {"p1", "k1_min", "schedule", "multiplier", "tol", "max_iterations", "budget",
                "retry_factor", "price_lo", "price_hi"});
    auto& pc = c.pricing;
    if (p.contains("p1")) pc.p1 = get_number(p["p1"], "pricing.p1");
    if (p.contains("k1_min")) pc.k1_min = get_int(p["k1_min"], "pricing.k1_min");
    if (p.contains("schedule")) {
      try {
        pc.schedule = schedule_from_string(p["schedule"].get<std::string>());
      } catch (const std::exception& e) {
        fail("pricing.schedule", e.what());
      }
    }
    if (p.contains("multiplier")) pc.multiplier = get_number(p["multiplier"], "pricing.multiplier");
    if (p.contains("tol")) {
      pc.tol = p["tol"].is_string() && p["tol"] == "inf"
                   ? std::numeric_limits<double>::infinity()
                   : get_number(p["tol"], "pricing.tol");
    }
    if (p.contains("max_iterations")) {
      pc.max_iterations = static_cast<int>(get_int(p["max_iterations"], "pricing.max_iterations"));
    }
    if (p.contains("budget") && !p["budget"].is_null()) {
      pc.observation_budget = get_int(p["budget"], "pricing.budget");
    }
    if (p.contains("retry_factor")) {
      pc.retry_factor = static_cast<int>(get_int(p["retry_factor"], "pricing.retry_factor"));
    }
    if (p.contains("price_lo")) pc.price_bounds.lo = get_number(p["price_lo"], "pricing.price_lo");
    if (p.contains("price_hi")) pc.price_bounds.hi = get_number(p["price_hi"], "pricing.price_hi");
  }
  if (doc.contains("cells")) {
    if (!doc["cells"].is_array()) fail("cells", "must be an array");
    for (const auto& cell : doc["cells"]) {
      check_keys(cell, "cells[]", {"schedule", "k1_min", "p1"});
      PricingCell pc;
      if (cell.contains("schedule")) {
        try {
          pc.schedule = schedule_from_string(cell["schedule"].get<std::string>());
        } catch (const std::exception& e) {
          fail("cells.schedule", e.what());
        }
      }
      if (cell.contains("k1_min")) pc.k1_min = get_int(cell["k1_min"], "cells.k1_min");
      if (cell.contains("p1")) pc.p1 = get_number(cell["p1"], "cells.p1");
      c.cells.push_back(pc);
    }
  }
  if (c.experiment == "pricing-tables") {
    if (c.cells.empty()) c.cells = table_cells();
    const bool has_pricing = doc.contains("pricing");
    if (!has_pricing || !doc["pricing"].contains("budget")) {
      c.pricing.observation_budget = kTableBudget;
    }
    // Prices are searched over the plotted price range unless set explicitly.
    if (!has_pricing || !doc["pricing"].contains("price_lo")) {
      c.pricing.price_bounds.lo = c.price_grid.lo;
    }
    if (!has_pricing || !doc["pricing"].contains("price_hi")) {
      c.pricing.price_bounds.hi = c.price_grid.hi;
    }
    // Boundary retries may use up the whole budget before a run is given up.
    if (!has_pricing || !doc["pricing"].contains("retry_factor")) {
      c.pricing.retry_factor = static_cast<int>(c.pricing.observation_budget.value_or(kTableBudget));
    }
  }
  if (doc.contains("path")) c.path = doc["path"].get<std::string>();
  if (doc.contains("stream")) c.stream = doc["stream"].get<std::string>();
  if (doc.contains("output")) c.output_dir = doc["output"].get<std::string>();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["model"] = {{"lambda", c.lambda}, {"mu", c.mu}, {"cost", c.cost}, {"price", c.price}};
  j["family"] = {{"name", c.family.name},
                 {"lower", vector_json(c.family.lower)},
                 {"upper", vector_json(c.family.upper)}};
  if (c.theta0) j["theta0"] = vector_json(*c.theta0);
  if (!c.theta_list.empty()) {
    j["theta_list"] = json::array();
    for (const auto& t : c.theta_list) j["theta_list"].push_back(vector_json(t));
  }
  j["k"] = c.k_list;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["price_grid"] = {{"lo", c.price_grid.lo}, {"hi", c.price_grid.hi}, {"points", c.price_grid.points}};
  j["loglik_grid"] = {{"lo", c.loglik_grid.lo}, {"hi", c.loglik_grid.hi}, {"points", c.loglik_grid.points}};
  j["empirical_prices"] = c.empirical_prices;
  j["empirical_replications"] = c.empirical_replications;
  j["initial_state"] = c.initial_state ? json(*c.initial_state) : json(nullptr);
  j["warmup_steps"] = c.warmup_steps;
  j["weighting"] = to_string(c.weighting);
  const auto& p = c.pricing;
  j["pricing"] = {{"p1", p.p1},
                  {"k1_min", p.k1_min},
                  {"schedule", to_string(p.schedule)},
                  {"multiplier", p.multiplier},
                  {"tol", std::isinf(p.tol) ? json("inf") : json(p.tol)},
                  {"max_iterations", p.max_iterations},
                  {"budget", p.observation_budget ? json(*p.observation_budget) : json(nullptr)},
                  {"retry_factor", p.retry_factor},
                  {"price_lo", p.price_bounds.lo},
                  {"price_hi", p.price_bounds.hi}};
  j["cells"] = json::array();
  for (const auto& cell : c.cells) {
    j["cells"].push_back(
        {{"schedule", to_string(cell.schedule)}, {"k1_min", cell.k1_min}, {"p1", cell.p1}});
  }
  if (c.path) j["path"] = *c.path;
  if (c.stream) j["stream"] = *c.stream;
  j["output"] = c.output_dir;
  return j;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("override '" + assignment + "' must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    json& next = (*node)[path[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ValidationError("override '" + key + "' walks into a non-object");
    node = &next;
  }
  (*node)[path.back()] = value;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  json doc = json::parse(in, nullptr, false, true);
  if (doc.is_discarded()) throw ValidationError("config file '" + path + "' is not valid JSON");
  return doc;
}

}  // namespace balkwise::cli
