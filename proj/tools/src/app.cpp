#include "balkwise/cli/app.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "balkwise/cli/config.hpp"
#include "balkwise/cli/experiments.hpp"
#include "balkwise/cli/svg.hpp"
#include "balkwise/io.hpp"

namespace balkwise::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> replications;
  std::string format;
  std::vector<std::string> sets;
  std::optional<double> price;
  std::vector<double> theta0;
  std::vector<std::int64_t> k;
  std::string path;
  std::string stream;
  std::string experiment_name;
};

/// Where results go: files in an output directory, or stdout.
class Sink {
 public:
  Sink(std::string dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }

  bool to_files() const { return !dir_.empty(); }

  /// Primary output: a file when an output directory is set, else stdout.
  void primary(const std::string& name, const std::function<void(std::ostream&)>& write) {
    if (to_files()) {
      file(name, write);
    } else {
      write(out_);
    }
  }

  void file(const std::string& name, const std::function<void(std::ostream&)>& write) {
    const fs::path p = fs::path(dir_.empty() ? "." : dir_) / name;
    std::ofstream f(p);
    if (!f) throw Error("cannot write " + p.string());
    write(f);
    if (!f) throw Error("error while writing " + p.string());
    written_.push_back(p.string());
  }

  void report() const {
    for (const auto& w : written_) out_ << "wrote " << w << '\n';
  }

  std::ostream& out() { return out_; }

 private:
  std::string dir_;
  std::ostream& out_;
  std::vector<std::string> written_;
};

std::string resolve_format(const std::string& requested, const std::string& fallback) {
  const std::string f = requested.empty() ? fallback : requested;
  if (f != "csv" && f != "json" && f != "svg") {
    throw ValidationError("--format must be csv, json or svg");
  }
  return f;
}

std::string tag(const Vector& theta) {
  std::ostringstream os;
  os << "theta_" << join_vector(theta);
  return os.str();
}

void run_simulate(const ExperimentConfig& cfg, const std::string& format, Sink& sink) {
  const auto fam = make_family(cfg.family);
  const QueuePath path = simulate_for(cfg, cfg.model(), *fam, cfg.require_theta0(),
                                      static_cast<std::size_t>(cfg.k_list.front()), cfg.seed);
  if (format == "csv") {
    sink.primary("path.csv", [&](std::ostream& os) { write_path_csv(os, path); });
  } else if (format == "json") {
    const PathStats s = path_stats(path);
    const json j{{"steps", path.steps()},       {"up_count", s.up_count},
                 {"down_count", s.down_count},  {"effective_n", s.effective_n},
                 {"total_time", path.total_time}, {"revenue", path.revenue},
                 {"revenue_rate", s.revenue_rate}, {"time_occupancy", s.time_occupancy},
                 {"jump_occupancy", s.jump_occupancy}};
    sink.primary("path.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  } else {
    Series s{"queue length", {}, {}};
    for (std::size_t i = 0; i < path.states.size(); ++i) {
      s.x.push_back(static_cast<double>(i));
      s.y.push_back(path.states[i]);
    }
    sink.primary("path.svg", [&](std::ostream& os) {
      write_line_plot(os, {s}, {"Simulated queue", "step", "queue length"});
    });
  }
}

void run_fit(const ExperimentConfig& cfg, const std::string& format, Sink& sink) {
  const auto fam = make_family(cfg.family);
  std::ifstream in(*cfg.path);
  if (!in) throw ValidationError("cannot open path file '" + *cfg.path + "'");
  QueuePath path = read_path_csv(in, cfg.price);
  const FitResult fit = fit_mle(path, cfg.model(), *fam);
  if (format == "csv") {
    sink.primary("fit.csv", [&](std::ostream& os) {
      os << "theta_hat,loglik,score_norm,boundary,effective_n,total_k,std_err\n"
         << std::setprecision(17) << join_vector(fit.theta_hat) << ',' << fit.loglik << ','
         << fit.score_norm << ',' << (fit.boundary ? 1 : 0) << ',' << fit.effective_n << ','
         << fit.total_k << ',' << join_vector(fit.std_err) << '\n';
    });
  } else {
    sink.primary("fit.json", [&](std::ostream& os) { os << fit_to_json(fit) << '\n'; });
  }
}

void run_stationary(const ExperimentConfig& cfg, const std::string& format, Sink& sink) {
  const auto fam = make_family(cfg.family);
  for (const Vector& theta : cfg.curve_thetas()) {
    const auto d = stationary_distribution(theta, cfg.model(), *fam, kDefaultTailEps, cfg.weighting);
    const std::string base = "stationary_" + tag(theta);
    if (format == "csv") {
      sink.primary(base + ".csv", [&](std::ostream& os) { write_stationary_csv(os, d); });
    } else if (format == "json") {
      const json j{{"theta", join_vector(theta)}, {"weighting", to_string(d.weighting)},
                   {"qstar", d.qstar},            {"tail_bound", d.tail_bound},
                   {"probs", d.probs}};
      sink.primary(base + ".json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    } else {
      Series s{to_string(d.weighting), {}, d.probs};
      for (int q = 0; q <= d.qstar; ++q) s.x.push_back(q);
      sink.primary(base + ".svg", [&](std::ostream& os) {
        write_line_plot(os, {s}, {"Stationary distribution", "queue length", "probability"});
      });
    }
  }
}

void run_revenue(const ExperimentConfig& cfg, const std::string& format, Sink& sink) {
  auto curves = exp_revenue_vs_price(cfg);
  for (const auto& c : curves) {
    const std::string base = "revenue_" + tag(c.theta);
    if (format == "csv") {
      sink.primary(base + ".csv", [&](std::ostream& os) { write_curve_csv(os, c.points, "revenue"); });
    } else if (format == "json") {
      json pts = json::array();
      for (const auto& p : c.points) pts.push_back({{"price", p.price}, {"revenue", p.value}});
      const json j{{"theta", join_vector(c.theta)}, {"argmax_price", c.argmax.x},
                   {"max_revenue", c.argmax.value}, {"curve", pts}};
      sink.primary(base + ".json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    } else {
      Series s{"theta " + join_vector(c.theta), {}, {}};
      for (const auto& p : c.points) {
        s.x.push_back(p.price);
        s.y.push_back(p.value);
      }
      sink.primary(base + ".svg", [&](std::ostream& os) {
        write_line_plot(os, {s}, {"Stationary revenue", "price", "revenue per unit time"});
      });
    }
  }
}

void run_price_opt(const ExperimentConfig& cfg, const std::string& format, Sink& sink) {
  const auto fam = make_family(cfg.family);
  json rows = json::array();
  std::ostringstream csv;
  csv << std::setprecision(17)
      << "theta,revenue_price,max_revenue,std_price,min_std,weighting\n";
  for (const Vector& theta : cfg.curve_thetas()) {
    const ScalarOptimum rev = revenue_maximizing_price(theta, cfg.model(), *fam);
    const ScalarOptimum sd = std_minimizing_price(theta, cfg.model(), *fam, cfg.weighting);
    rows.push_back({{"theta", join_vector(theta)},
                    {"revenue_price", rev.x},
                    {"max_revenue", rev.value},
                    {"std_price", sd.x},
                    {"min_std", sd.value},
                    {"weighting", to_string(cfg.weighting)}});
    csv << join_vector(theta) << ',' << rev.x << ',' << rev.value << ',' << sd.x << ','
        << sd.value << ',' << to_string(cfg.weighting) << '\n';
  }
  if (format == "csv") {
    sink.primary("price_opt.csv", [&](std::ostream& os) { os << csv.str(); });
  } else {
    sink.primary("price_opt.json", [&](std::ostream& os) { os << rows.dump(2) << '\n'; });
  }
}

void run_autoprice(const ExperimentConfig& cfg, const std::string& format, Sink& sink) {
  const auto fam = make_family(cfg.family);
  PricingTrace trace;
  if (cfg.stream) {
    std::ifstream in(*cfg.stream);
    if (!in) throw ValidationError("cannot open observation stream '" + *cfg.stream + "'");
    StreamObservationSource source(in);
    trace = run_pricing(cfg.model(), *fam, source, cfg.pricing);
  } else {
    trace = run_pricing(cfg.model(), *fam, cfg.require_theta0(), cfg.pricing, cfg.seed);
  }
  if (format == "csv") {
    sink.primary("trace.csv", [&](std::ostream& os) { write_trace_csv(os, trace); });
  } else if (format == "json") {
    json j = json::parse(trace_to_json(trace));
    if (cfg.theta0 && !cfg.stream) {
      const TraceMetrics m = trace_metrics(trace, *cfg.theta0, cfg.model(), *fam);
      j["metrics"] = {{"optimal_price", m.optimal_price},
                      {"final_fraction", m.final_fraction},
                      {"cumulative_fraction", m.cumulative_fraction},
                      {"lost_revenue", m.lost_revenue},
                      {"final_price_error", m.final_price_error}};
    }
    sink.primary("trace.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  } else {
    Series s{"posted price", {}, {}};
    std::int64_t used = 0;
    for (const auto& r : trace.records) {
      used += r.k;
      s.x.push_back(static_cast<double>(used));
      s.y.push_back(r.price_next);
    }
    sink.primary("trace.svg", [&](std::ostream& os) {
      write_line_plot(os, {s}, {"Price learning", "observations used", "next price"});
    });
  }
}

void run_experiment(const ExperimentConfig& cfg, const std::string& format, Sink& sink) {
  const bool svg = format == "svg";
  const std::string& name = cfg.experiment;
  if (name == "score-convergence") {
    const auto r = exp_score_convergence(cfg);
    sink.file("score_convergence.csv", [&](std::ostream& os) { write_fits_csv(os, r.rows); });
    sink.file("score_summary.csv", [&](std::ostream& os) { write_score_summary_csv(os, r.summary); });
    if (svg) {
      Series hat{"score at estimate", {}, {}, true}, truth{"score at truth", {}, {}, true};
      for (const auto& row : r.rows) {
        truth.x.push_back(std::log10(static_cast<double>(row.k)));
        truth.y.push_back(row.score_at_true);
        if (!row.ok) continue;
        hat.x.push_back(std::log10(static_cast<double>(row.k)));
        hat.y.push_back(row.score_at_hat);
      }
      sink.file("score_convergence.svg", [&](std::ostream& os) {
        write_line_plot(os, {truth, hat}, {"Score convergence", "log10 k", "score"});
      });
    }
  } else if (name == "consistency") {
    const auto r = exp_consistency(cfg);
    sink.file("consistency.csv", [&](std::ostream& os) { write_fits_csv(os, r.rows); });
    sink.file("consistency_summary.csv",
              [&](std::ostream& os) { write_consistency_summary_csv(os, r.summary); });
    sink.file("loglik_curves.csv", [&](std::ostream& os) { write_loglik_curves_csv(os, r.curves); });
    if (svg) {
      Series est{"estimate", {}, {}, true};
      for (const auto& row : r.rows) {
        if (!row.ok) continue;
        est.x.push_back(std::log10(static_cast<double>(row.k)));
        est.y.push_back(row.theta_hat[0]);
      }
      sink.file("consistency.svg", [&](std::ostream& os) {
        write_line_plot(os, {est}, {"Consistency", "log10 k", "estimate"});
      });
      std::vector<Series> curves;
      for (const auto& c : r.curves) {
        // Scaled by k so that curves of different lengths share an axis.
        Series s{"k=" + std::to_string(c.k), c.theta, c.loglik};
        for (double& v : s.y) v /= static_cast<double>(c.k);
        curves.push_back(std::move(s));
      }
      sink.file("loglik_curves.svg", [&](std::ostream& os) {
        write_line_plot(os, curves, {"Log-likelihood / k", "theta", "log-likelihood / k"});
      });
    }
  } else if (name == "normality") {
    const auto r = exp_normality(cfg);
    sink.file("normality_errors.csv", [&](std::ostream& os) { write_normality_errors_csv(os, r); });
    sink.file("normality_summary.csv", [&](std::ostream& os) { write_normality_summary_csv(os, r); });
    if (svg) {
      for (const auto& b : r) {
        sink.file("normality_k" + std::to_string(b.k) + ".svg", [&](std::ostream& os) {
          write_histogram(os, b.standardized, 40,
                          {"Standardized errors, k=" + std::to_string(b.k), "error", "density"});
        });
      }
    }
    for (const auto& b : r) {
      sink.out() << "k=" << b.k << " mean error " << b.mean_error << ", JB " << b.test.statistic
                 << (b.test.reject ? " (normality rejected at 5%)" : " (not rejected at 5%)")
                 << '\n';
    }
  } else if (name == "std-vs-price") {
    const auto r = exp_std_vs_price(cfg);
    sink.file("std_curves.csv", [&](std::ostream& os) { write_std_curves_csv(os, r); });
    for (const auto& c : r) {
      std::vector<CurvePoint> pts;
      for (const auto& p : c.points) {
        const double v = cfg.weighting == Weighting::time ? p.std_time : p.std_jump;
        if (std::isfinite(v)) pts.push_back({p.price, v});
      }
      sink.file("std_" + tag(c.theta) + ".csv",
                [&](std::ostream& os) { write_curve_csv(os, pts, "std"); });
      sink.out() << "theta " << join_vector(c.theta) << ": std minimized at price " << c.argmin.x
                 << " (std " << c.argmin.value << ", " << to_string(cfg.weighting)
                 << " weighting)\n";
      for (const auto& note : c.skipped) sink.out() << "skipped: " << note << '\n';
    }
    if (!cfg.empirical_prices.empty()) {
      sink.file("std_empirical.csv", [&](std::ostream& os) { write_empirical_std_csv(os, r); });
    }
    if (svg) {
      std::vector<Series> series;
      for (const auto& c : r) {
        Series t{"time " + join_vector(c.theta), {}, {}}, j{"jump " + join_vector(c.theta), {}, {}};
        for (const auto& p : c.points) {
          t.x.push_back(p.price);
          t.y.push_back(p.std_time);
          j.x.push_back(p.price);
          j.y.push_back(p.std_jump);
        }
        series.push_back(t);
        series.push_back(j);
        Series e{"empirical " + join_vector(c.theta), {}, {}, true};
        for (const auto& p : c.empirical) {
          e.x.push_back(p.price);
          e.y.push_back(p.std_empirical);
        }
        if (!e.x.empty()) series.push_back(e);
      }
      sink.file("std_vs_price.svg", [&](std::ostream& os) {
        write_line_plot(os, series, {"Asymptotic std against price", "price", "std"});
      });
    }
  } else if (name == "revenue-vs-price") {
    const auto r = exp_revenue_vs_price(cfg);
    std::vector<Series> series;
    for (const auto& c : r) {
      sink.file("revenue_" + tag(c.theta) + ".csv",
                [&](std::ostream& os) { write_curve_csv(os, c.points, "revenue"); });
      sink.out() << "theta " << join_vector(c.theta) << ": revenue maximized at price "
                 << c.argmax.x << " (revenue " << c.argmax.value << ")\n";
      for (const auto& note : c.skipped) sink.out() << "skipped: " << note << '\n';
      Series s{"theta " + join_vector(c.theta), {}, {}};
      for (const auto& p : c.points) {
        s.x.push_back(p.price);
        s.y.push_back(p.value);
      }
      series.push_back(std::move(s));
    }
    if (svg) {
      sink.file("revenue_vs_price.svg", [&](std::ostream& os) {
        write_line_plot(os, series, {"Stationary revenue against price", "price", "revenue"});
      });
    }
  } else if (name == "pricing-tables") {
    const auto r = exp_pricing_tables(cfg);
    sink.file("pricing_table.csv", [&](std::ostream& os) { write_pricing_table_csv(os, r); });
    if (format == "json") {
      json cells = json::array();
      for (const auto& c : r) {
        cells.push_back({{"schedule", to_string(c.cell.schedule)},
                         {"k1_min", c.cell.k1_min},
                         {"p1", c.cell.p1},
                         {"runs", c.runs},
                         {"failures", c.failures},
                         {"iterations", c.iterations},
                         {"total_observations", c.total_observations},
                         {"final_fraction", c.final_fraction},
                         {"cumulative_fraction", c.cumulative_fraction},
                         {"lost_revenue", c.lost_revenue},
                         {"mean_abs_price_error", c.mean_abs_price_error},
                         {"std_abs_price_error", c.std_abs_price_error}});
      }
      sink.file("pricing_table.json", [&](std::ostream& os) { os << cells.dump(2) << '\n'; });
    }
  } else {
    throw ValidationError("unknown experiment '" + name + "'");
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Service-value estimation and pricing for queues with balking customers",
               "balkwise"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "Master seed");
  app.add_option("--out", f.out, "Output directory (default: stdout for single outputs)");
  app.add_option("--replications", f.replications, "Monte-Carlo replications");
  app.add_option("--format", f.format, "csv, json or svg")
      ->check(CLI::IsMember({"csv", "json", "svg"}));
  app.add_option("--set", f.sets, "Config override key.path=value (repeatable)");
  app.add_option("--price", f.price, "Posted price");
  app.add_option("--theta0", f.theta0, "True parameter")->expected(1, -1);
  app.add_option("--k", f.k, "Steps, or a list of step counts")->expected(1, -1);
  app.add_option("--path", f.path, "Path CSV to fit");
  app.add_option("--stream", f.stream, "Observation CSV (state,up,hold) for autoprice");

  app.add_subcommand("simulate", "Simulate a queue path");
  app.add_subcommand("fit", "Fit the MLE to a path CSV");
  app.add_subcommand("stationary", "Stationary queue-length distribution");
  app.add_subcommand("revenue", "Stationary revenue against price");
  app.add_subcommand("price-opt", "Revenue-maximizing and std-minimizing prices");
  app.add_subcommand("autoprice", "Run the iterative pricing loop");
  auto* exp = app.add_subcommand("experiment", "Run a Monte-Carlo experiment");
  exp->add_option("name", f.experiment_name, "Experiment name");

  std::vector<std::string> args(argv + 1, argv + argc);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kSuccess : kValidationError;
  }

  try {
    json doc = f.config.empty() ? json::object() : load_config_file(f.config);
    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "experiment") {
      if (!f.experiment_name.empty()) doc["experiment"] = f.experiment_name;
      if (!doc.contains("experiment")) {
        throw ValidationError("experiment needs a name (argument or config field 'experiment')");
      }
    } else {
      doc["experiment"] = sub;
    }
    if (f.seed) doc["seed"] = *f.seed;
    if (f.replications) doc["replications"] = *f.replications;
    if (!f.out.empty()) doc["output"] = f.out;
    if (f.price) {
      if (!doc.contains("model")) doc["model"] = json::object();
      doc["model"]["price"] = *f.price;
    }
    if (!f.theta0.empty()) doc["theta0"] = f.theta0;
    if (!f.k.empty()) doc["k"] = f.k;
    if (!f.path.empty()) doc["path"] = f.path;
    if (!f.stream.empty()) doc["stream"] = f.stream;
    for (const auto& s : f.sets) apply_override(doc, s);

    const ExperimentConfig cfg = config_from_json(doc);
    cfg.validate();

    Sink sink(cfg.output_dir, out);
    const std::string& name = cfg.experiment;
    if (sub == "experiment") {
      if (name == "simulate" || name == "fit" || name == "stationary" || name == "revenue" ||
          name == "price-opt" || name == "autoprice") {
        throw ValidationError("'" + name + "' is a subcommand, not an experiment");
      }
      Sink files(cfg.output_dir.empty() ? "." : cfg.output_dir, out);
      run_experiment(cfg, resolve_format(f.format, "csv"), files);
      files.report();
      return kSuccess;
    }
    if (name == "simulate") run_simulate(cfg, resolve_format(f.format, "csv"), sink);
    if (name == "fit") run_fit(cfg, resolve_format(f.format, "json"), sink);
    if (name == "stationary") run_stationary(cfg, resolve_format(f.format, "csv"), sink);
    if (name == "revenue") run_revenue(cfg, resolve_format(f.format, "csv"), sink);
    if (name == "price-opt") run_price_opt(cfg, resolve_format(f.format, "json"), sink);
    if (name == "autoprice") run_autoprice(cfg, resolve_format(f.format, "csv"), sink);
    sink.report();
    return kSuccess;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed config: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace balkwise::cli
