#include "balkwise/cli/experiments.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "balkwise/cli/parallel.hpp"

namespace balkwise::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ReplicationFit fit_replication(const ExperimentConfig& cfg, const ModelConfig& model,
                               const ValueFamily& fam, const Vector& theta0, std::int64_t k,
                               int rep, std::uint64_t seed) {
  ReplicationFit out;
  out.k = k;
  out.replication = rep;
  const QueuePath path = simulate_for(cfg, model, fam, theta0, static_cast<std::size_t>(k), seed);
  const TransitionCounts counts = count_transitions(path);
  out.score_at_true = score(counts, theta0, model, fam)[0];
  try {
    const FitResult fit = fit_mle(counts, model, fam);
    out.theta_hat = fit.theta_hat;
    out.boundary = fit.boundary;
    out.ok = !fit.boundary;
    out.score_at_hat = score(counts, fit.theta_hat, model, fam)[0];
  } catch (const NumericalError&) {
    out.theta_hat = Vector::Constant(fam.dim(), kNaN);
    out.score_at_hat = kNaN;
  }
  return out;
}

std::vector<ReplicationFit> fit_batch(const ExperimentConfig& cfg, const ModelConfig& model,
                                      const ValueFamily& fam, const Vector& theta0,
                                      std::int64_t k, int reps, std::uint64_t stream) {
  return parallel_map(static_cast<std::size_t>(reps), [&](std::size_t r) {
    return fit_replication(cfg, model, fam, theta0, k, static_cast<int>(r),
                           replication_seed(cfg.seed, stream, r));
  });
}

std::string theta_label(const Vector& th) { return join_vector(th); }

}  // namespace

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t rep) {
  return derive_seed(derive_seed(seed, stream), rep);
}

QueuePath simulate_for(const ExperimentConfig& cfg, const ModelConfig& model,
                       const ValueFamily& fam, const Vector& theta0, std::size_t k,
                       std::uint64_t seed) {
  SimOptions o;
  o.steps = k;
  o.seed = seed;
  o.initial_state = cfg.initial_state;
  o.warmup_steps = cfg.warmup_steps;
  return simulate_path(model, fam, theta0, o);
}

ScoreConvergence exp_score_convergence(const ExperimentConfig& cfg) {
  const auto fam = make_family(cfg.family);
  const ModelConfig model = cfg.model();
  const Vector theta0 = cfg.require_theta0();
  ScoreConvergence out;
  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
    const auto rows = fit_batch(cfg, model, *fam, theta0, cfg.k_list[ki], cfg.replications, ki);
    ScoreSummary s;
    s.k = cfg.k_list[ki];
    std::vector<double> at_hat, at_true;
    for (const auto& r : rows) {
      at_true.push_back(r.score_at_true);
      if (!r.ok) continue;
      at_hat.push_back(r.score_at_hat);
      s.max_abs_at_hat = std::max(s.max_abs_at_hat, std::abs(r.score_at_hat));
    }
    s.used = static_cast<int>(at_hat.size());
    s.sd_at_hat = at_hat.size() > 1 ? stddev(at_hat) : kNaN;
    s.sd_at_true = at_true.size() > 1 ? stddev(at_true) : kNaN;
    s.mean_at_true = mean(at_true);
    out.summary.push_back(s);
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  }
  return out;
}

Consistency exp_consistency(const ExperimentConfig& cfg) {
  const auto fam = make_family(cfg.family);
  const ModelConfig model = cfg.model();
  const Vector theta0 = cfg.require_theta0();
  Consistency out;
  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
    const std::int64_t k = cfg.k_list[ki];
    const auto rows = fit_batch(cfg, model, *fam, theta0, k, cfg.replications, ki);
    ConsistencySummary s;
    s.k = k;
    std::vector<double> err;
    for (const auto& r : rows) {
      if (r.ok) {
        err.push_back((r.theta_hat - theta0).norm());
      } else {
        ++s.excluded;
      }
    }
    s.used = static_cast<int>(err.size());
    s.median_abs_error = err.empty() ? kNaN : median(err);
    out.summary.push_back(s);
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());

    if (fam->dim() == 1) {
      // The path of replication 0, so the curve's peak is that row's estimate.
      const QueuePath path =
          simulate_for(cfg, model, *fam, theta0, static_cast<std::size_t>(k),
                       replication_seed(cfg.seed, ki, 0));
      const TransitionCounts counts = count_transitions(path);
      LoglikCurve c;
      c.k = k;
      c.theta_hat = rows.front().theta_hat[0];
      for (double th : cfg.loglik_grid.values()) {
        if (!fam->param_space().contains(scalar_theta(th))) continue;
        c.theta.push_back(th);
        c.loglik.push_back(log_likelihood(counts, scalar_theta(th), model, *fam));
      }
      out.curves.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<NormalityBatch> exp_normality(const ExperimentConfig& cfg) {
  const auto fam = make_family(cfg.family);
  const ModelConfig model = cfg.model();
  const Vector theta0 = cfg.require_theta0();
  const double sd =
      asymptotic_std(model.price(), theta0, model, *fam, kDefaultTailEps, Weighting::jump)[0];
  std::vector<NormalityBatch> out;
  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
    NormalityBatch b;
    b.k = cfg.k_list[ki];
    b.theoretical_std = sd;
    const double root_k = std::sqrt(static_cast<double>(b.k));
    for (const auto& r : fit_batch(cfg, model, *fam, theta0, b.k, cfg.replications, ki)) {
      if (!r.ok) {
        ++b.excluded;
        continue;
      }
      const double e = root_k * (r.theta_hat[0] - theta0[0]);
      b.errors.push_back(e);
      b.standardized.push_back(e / sd);
    }
    if (b.errors.size() < 20) {
      throw NumericalError("normality: fewer than 20 interior fits at k=" + std::to_string(b.k));
    }
    b.mean_error = mean(b.errors);
    b.mean_standardized = mean(b.standardized);
    b.sd_standardized = stddev(b.standardized);
    b.test = jarque_bera(b.standardized);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<StdCurve> exp_std_vs_price(const ExperimentConfig& cfg) {
  const auto fam = make_family(cfg.family);
  const ModelConfig model = cfg.model();
  const std::vector<double> grid = cfg.price_grid.values();
  std::vector<StdCurve> out;
  std::uint64_t stream = 0;
  for (const Vector& theta : cfg.curve_thetas()) {
    StdCurve c;
    c.theta = theta;
    c.points = parallel_map(grid.size(), [&](std::size_t i) {
      StdPoint p{grid[i], kNaN, kNaN};
      try {
        p.std_time = asymptotic_std(grid[i], theta, model, *fam, kDefaultTailEps, Weighting::time)[0];
        p.std_jump = asymptotic_std(grid[i], theta, model, *fam, kDefaultTailEps, Weighting::jump)[0];
      } catch (const Error&) {
      }
      return p;
    });
    for (const auto& p : c.points) {
      if (std::isnan(p.std_time) || std::isnan(p.std_jump)) {
        std::ostringstream note;
        note << "theta " << theta_label(theta) << ", price " << p.price << ": std undefined";
        c.skipped.push_back(note.str());
      }
    }
    c.argmin = std_minimizing_price(theta, model, *fam, cfg.weighting);

    for (double price : cfg.empirical_prices) {
      const ModelConfig at = model.with_price(price);
      for (std::int64_t k : cfg.k_list) {
        EmpiricalStdPoint e;
        e.price = price;
        e.k = k;
        try {
          e.std_theory = asymptotic_std(price, theta, model, *fam, kDefaultTailEps, cfg.weighting)[0];
          const auto rows = fit_batch(cfg, at, *fam, theta, k, cfg.empirical_replications, stream++);
          std::vector<double> err;
          for (const auto& r : rows) {
            if (r.ok) {
              err.push_back(std::sqrt(static_cast<double>(k)) * (r.theta_hat[0] - theta[0]));
            } else {
              ++e.excluded;
            }
          }
          e.used = static_cast<int>(err.size());
          e.std_empirical = err.size() > 1 ? stddev(err) : kNaN;
        } catch (const Error& ex) {
          std::ostringstream note;
          note << "theta " << theta_label(theta) << ", price " << price << ", k " << k << ": "
               << ex.what();
          c.skipped.push_back(note.str());
          continue;
        }
        c.empirical.push_back(e);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<RevenueCurve> exp_revenue_vs_price(const ExperimentConfig& cfg) {
  const auto fam = make_family(cfg.family);
  const ModelConfig model = cfg.model();
  const std::vector<double> grid = cfg.price_grid.values();
  std::vector<RevenueCurve> out;
  for (const Vector& theta : cfg.curve_thetas()) {
    RevenueCurve c;
    c.theta = theta;
    const auto values = parallel_map(grid.size(), [&](std::size_t i) {
      try {
        return expected_revenue(grid[i], theta, model, *fam);
      } catch (const Error&) {
        return kNaN;
      }
    });
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (std::isnan(values[i])) {
        std::ostringstream note;
        note << "theta " << theta_label(theta) << ", price " << grid[i] << ": revenue undefined";
        c.skipped.push_back(note.str());
        continue;
      }
      c.points.push_back({grid[i], values[i]});
    }
    c.argmax = revenue_maximizing_price(theta, model, *fam);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CellSummary> exp_pricing_tables(const ExperimentConfig& cfg) {
  const auto fam = make_family(cfg.family);
  const ModelConfig model = cfg.model();
  const Vector theta0 = cfg.require_theta0();
  std::vector<CellSummary> out;
  for (std::size_t ci = 0; ci < cfg.cells.size(); ++ci) {
    CellSummary s;
    s.cell = cfg.cells[ci];
    PricingConfig pc = cfg.pricing;
    pc.schedule = s.cell.schedule;
    pc.k1_min = s.cell.k1_min;
    pc.p1 = s.cell.p1;
    struct Run {
      bool ok = false;
      TraceMetrics m;
    };
    const auto runs = parallel_map(static_cast<std::size_t>(cfg.replications), [&](std::size_t r) {
      Run run;
      try {
        const PricingTrace trace =
            run_pricing(model, *fam, theta0, pc, replication_seed(cfg.seed, ci, r));
        run.m = trace_metrics(trace, theta0, model, *fam);
        run.ok = true;
      } catch (const NumericalError&) {
      } catch (const SimulationError&) {
      }
      return run;
    });
    std::vector<double> iters, obs, fin, cum, lost, abs_err, err;
    for (const auto& r : runs) {
      if (!r.ok) {
        ++s.failures;
        continue;
      }
      s.runs_metrics.push_back(r.m);
      iters.push_back(r.m.iterations);
      obs.push_back(static_cast<double>(r.m.total_observations));
      fin.push_back(r.m.final_fraction);
      cum.push_back(r.m.cumulative_fraction);
      lost.push_back(r.m.lost_revenue);
      abs_err.push_back(std::abs(r.m.final_price_error));
      err.push_back(r.m.final_price_error);
    }
    s.runs = static_cast<int>(runs.size());
    s.flagged = s.failures * 20 > s.runs;
    if (!iters.empty()) {
      s.iterations = mean(iters);
      s.total_observations = mean(obs);
      s.final_fraction = mean(fin);
      s.cumulative_fraction = mean(cum);
      s.lost_revenue = mean(lost);
      s.mean_abs_price_error = mean(abs_err);
      s.mean_price_error = mean(err);
      const double n = static_cast<double>(iters.size());
      if (iters.size() > 1) {
        s.std_abs_price_error = stddev(abs_err);
        s.se_iterations = stddev(iters) / std::sqrt(n);
        s.se_final_fraction = stddev(fin) / std::sqrt(n);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_fits_csv(std::ostream& os, const std::vector<ReplicationFit>& rows) {
  os << "k,replication,theta_hat,boundary,score_at_hat,score_at_true\n" << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.k << ',' << r.replication << ',' << join_vector(r.theta_hat) << ','
       << (r.ok ? 0 : 1) << ',' << r.score_at_hat << ',' << r.score_at_true << '\n';
  }
}

void write_score_summary_csv(std::ostream& os, const std::vector<ScoreSummary>& rows) {
  os << "k,used,sd_score_at_hat,max_abs_score_at_hat,mean_score_at_true,sd_score_at_true\n"
     << std::setprecision(17);
  for (const auto& s : rows) {
    os << s.k << ',' << s.used << ',' << s.sd_at_hat << ',' << s.max_abs_at_hat << ','
       << s.mean_at_true << ',' << s.sd_at_true << '\n';
  }
}

void write_consistency_summary_csv(std::ostream& os,
                                   const std::vector<ConsistencySummary>& rows) {
  os << "k,used,excluded,median_abs_error\n" << std::setprecision(17);
  for (const auto& s : rows) {
    os << s.k << ',' << s.used << ',' << s.excluded << ',' << s.median_abs_error << '\n';
  }
}

void write_loglik_curves_csv(std::ostream& os, const std::vector<LoglikCurve>& curves) {
  os << "k,theta,loglik,theta_hat\n" << std::setprecision(17);
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.theta.size(); ++i) {
      os << c.k << ',' << c.theta[i] << ',' << c.loglik[i] << ',' << c.theta_hat << '\n';
    }
  }
}

void write_normality_errors_csv(std::ostream& os, const std::vector<NormalityBatch>& batches) {
  os << "k,error,standardized\n" << std::setprecision(17);
  for (const auto& b : batches) {
    for (std::size_t i = 0; i < b.errors.size(); ++i) {
      os << b.k << ',' << b.errors[i] << ',' << b.standardized[i] << '\n';
    }
  }
}

void write_normality_summary_csv(std::ostream& os, const std::vector<NormalityBatch>& batches) {
  os << "k,used,excluded,theoretical_std,mean_error,mean_standardized,sd_standardized,"
        "skewness,kurtosis,jb_statistic,reject_5pct\n"
     << std::setprecision(17);
  for (const auto& b : batches) {
    os << b.k << ',' << b.errors.size() << ',' << b.excluded << ',' << b.theoretical_std << ','
       << b.mean_error << ',' << b.mean_standardized << ',' << b.sd_standardized << ','
       << b.test.skewness << ',' << b.test.kurtosis << ',' << b.test.statistic << ','
       << (b.test.reject ? 1 : 0) << '\n';
  }
}

void write_std_curves_csv(std::ostream& os, const std::vector<StdCurve>& curves) {
  os << "theta,price,std_time,std_jump\n" << std::setprecision(17);
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      os << join_vector(c.theta) << ',' << p.price << ',' << p.std_time << ',' << p.std_jump
         << '\n';
    }
  }
}

void write_empirical_std_csv(std::ostream& os, const std::vector<StdCurve>& curves) {
  os << "theta,price,k,std_empirical,std_theory,used,excluded\n" << std::setprecision(17);
  for (const auto& c : curves) {
    for (const auto& e : c.empirical) {
      os << join_vector(c.theta) << ',' << e.price << ',' << e.k << ',' << e.std_empirical << ','
         << e.std_theory << ',' << e.used << ',' << e.excluded << '\n';
    }
  }
}

void write_pricing_table_csv(std::ostream& os, const std::vector<CellSummary>& cells) {
  auto row = [&](const std::string& label, auto get) {
    os << '"' << label << '"';
    for (const auto& c : cells) os << ',' << get(c);
    os << '\n';
  };
  os << std::setprecision(6);
  row("g(k_i)", [](const CellSummary& c) {
    return std::string(c.cell.schedule == Schedule::increment ? "k_i+1"
                       : c.cell.schedule == Schedule::doubling ? "2k_i"
                                                               : "multiplier");
  });
  row("k_1^min", [](const CellSummary& c) { return c.cell.k1_min; });
  row("p_1", [](const CellSummary& c) { return c.cell.p1; });
  row("Iterations", [](const CellSummary& c) { return c.iterations; });
  row("Total number of observations used for learning",
      [](const CellSummary& c) { return c.total_observations; });
  row("Final stationary fraction of max revenue",
      [](const CellSummary& c) { return c.final_fraction; });
  row("Stationary cumulative fraction of max revenue",
      [](const CellSummary& c) { return c.cumulative_fraction; });
  row("Total lost revenue", [](const CellSummary& c) { return c.lost_revenue; });
  row("Mean error of final price", [](const CellSummary& c) { return c.mean_abs_price_error; });
  row("Std of final price error", [](const CellSummary& c) { return c.std_abs_price_error; });
  row("Failed runs", [](const CellSummary& c) { return c.failures; });
  row("Flagged (>5% failed)", [](const CellSummary& c) { return c.flagged ? 1 : 0; });
}

}  // namespace balkwise::cli
