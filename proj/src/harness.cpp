#include "asgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "asgd/abstract.hpp"
#include "asgd/error.hpp"
#include "asgd/trace_io.hpp"

namespace asgd {

AggregateCurve aggregate(const std::string& observable, const std::vector<std::int64_t>& k,
                         const std::vector<std::vector<double>>& series) {
  if (series.empty()) throw ConfigError("aggregate needs at least one series");
  AggregateCurve curve;
  curve.observable = observable;
  curve.k = k;
  curve.m = static_cast<int>(series.size());
  curve.mean.assign(k.size(), 0.0);
  curve.se.assign(k.size(), 0.0);
  for (const auto& s : series) {
    if (s.size() != k.size()) throw DimensionError("series length differs from the k grid");
  }
  const double m = static_cast<double>(series.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    double sum = 0.0;
    for (const auto& s : series) sum += s[i];
    const double mean = sum / m;
    double ss = 0.0;
    for (const auto& s : series) ss += (s[i] - mean) * (s[i] - mean);
    curve.mean[i] = mean;
    curve.se[i] = series.size() > 1 ? std::sqrt(ss / (m - 1.0)) / std::sqrt(m) : 0.0;
  }
  return curve;
}

std::string lyapunov_observable(OptimizerKind kind, const Problem& problem) {
  if (is_gd_kind(kind)) return problem.mu() > 0.0 ? "E_gd_sc" : "E_gd_c";
  return is_strongly_convex_kind(kind) ? "E_sc" : "E_ac_c";
}

namespace {

double observable_value(const TraceRecord& r, const std::string& name) {
  if (name == "f_gap") return r.f_gap;
  if (name == "E_sc") return r.e_sc;
  if (name == "E_ac_c") return r.e_ac_c;
  if (name == "E_gd_c") return r.e_gd_c;
  if (name == "E_gd_sc") return r.e_gd_sc;
  throw ConfigError("unknown observable '" + name + "'");
}

struct SeedOutput {
  Trace trace;
  std::vector<double> f_gap;
  std::vector<double> lyap;
  std::vector<std::int64_t> k;
  std::string error;
  std::int64_t error_step = -1;
};

}  // namespace

MatrixResult run_matrix(const RunConfig& config, const MatrixOptions& options) {
  const Problem problem = build_problem(config.problem);
  const Vec x0 = resolve_x0(config.x0, problem);
  const Schedule schedule = build_schedule(config, problem, x0);
  const double sigma2 = config.noise.kind == NoiseKind::None ? 0.0 : config.noise.sigma2;
  const std::string lyap_name = lyapunov_observable(config.optimizer, problem);

  RunOptions run_options;
  run_options.warmstart = config.warmstart;
  run_options.gd_mode = config.gd_mode;
  run_options.record = config.record;

  const auto m = static_cast<std::size_t>(config.seeds);
  std::vector<SeedOutput> outputs(m);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < m; i = next++) {
      SeedOutput& out = outputs[i];
      try {
        NoisyGradientOracle oracle(problem, sigma2, config.noise.kind,
                                   derive_seed(config.master_seed, i));
        Trace trace = run(config.optimizer, oracle, schedule, x0, config.steps, run_options);
        out.k.reserve(trace.records.size());
        out.f_gap.reserve(trace.records.size());
        out.lyap.reserve(trace.records.size());
        for (const auto& r : trace.records) {
          out.k.push_back(r.k);
          out.f_gap.push_back(r.f_gap);
          out.lyap.push_back(observable_value(r, lyap_name));
        }
        if (options.keep_traces) {
          out.trace = std::move(trace);
        } else {
          out.trace.meta = trace.meta;
        }
      } catch (const DivergenceError& e) {
        out.error = e.what();
        out.error_step = e.step();
      }
    }
  };

  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(m)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < m; ++i) {
    if (!outputs[i].error.empty()) {
      throw DivergenceError(outputs[i].error_step,
                            "run " + std::to_string(i) + " (seed " +
                                std::to_string(derive_seed(config.master_seed, i)) +
                                ") diverged: " + outputs[i].error);
    }
  }

  MatrixResult result;
  result.x0 = x0;
  result.e0 = initial_lyapunov(config.optimizer, problem, x0);
  std::vector<std::vector<double>> f_series;
  std::vector<std::vector<double>> l_series;
  f_series.reserve(m);
  l_series.reserve(m);
  for (auto& out : outputs) {
    if (out.k != outputs.front().k) throw DimensionError("runs recorded different k grids");
    result.metas.push_back(out.trace.meta);
    f_series.push_back(std::move(out.f_gap));
    l_series.push_back(std::move(out.lyap));
    if (options.keep_traces) result.traces.push_back(std::move(out.trace));
  }
  result.f_gap = aggregate("f_gap", outputs.front().k, f_series);
  result.lyapunov = aggregate(lyap_name, outputs.front().k, l_series);
  return result;
}

BoundReport compare_to_bound(const AggregateCurve& curve, const RateBound& bound) {
  BoundReport report;
  report.label = bound.label;
  report.steps = curve.size();
  report.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double excess =
        curve.mean[i] - 2.0 * curve.se[i] - bound(static_cast<double>(curve.k[i]));
    report.worst_excess = std::max(report.worst_excess, excess);
    if (excess <= 0.0) {
      ++report.passed;
    } else {
      report.flagged.push_back(curve.k[i]);
    }
  }
  report.pass_fraction =
      report.steps > 0 ? static_cast<double>(report.passed) / static_cast<double>(report.steps)
                       : 1.0;
  return report;
}

RateFit fit_rate(const AggregateCurve& curve, std::int64_t k_min, std::int64_t k_max) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.k[i] < k_min || curve.k[i] > k_max) continue;
    if (curve.k[i] <= 0) throw ConfigError("fit window must start at k >= 1");
    if (!(curve.mean[i] > 0.0)) {
      throw ConfigError("nonpositive mean at k = " + std::to_string(curve.k[i]));
    }
    xs.push_back(std::log(static_cast<double>(curve.k[i])));
    ys.push_back(std::log(curve.mean[i]));
  }
  if (xs.size() < 2) throw ConfigError("fit window holds fewer than two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  RateFit fit;
  fit.points = xs.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (xs.size() > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - fit.intercept - fit.slope * xs[i];
      sse += r * r;
    }
    fit.stderr_slope = std::sqrt(sse / (n - 2.0) / sxx);
  }
  return fit;
}

RateBound constant_lr_neighborhood_bound(double h, double mu, double sigma2, double e0) {
  const double r = 1.0 - h * std::sqrt(mu);
  const double floor = h * sigma2 / std::sqrt(mu);
  return {"constant_lr_neighborhood", "accelerated constant-step neighborhood",
          [=](double k) {
            const double rk = std::pow(r, k);
            return rk * e0 + (1.0 - rk) * floor;
          }};
}

RateBound sc_scheduled_bound(double mu, double sigma2, double k0) {
  return {"sc_scheduled", "accelerated strongly convex decay",
          [=](double k) { return 4.0 * sigma2 / (mu * (k + k0)); }};
}

RateBound warmstart_sc_bound(const std::vector<TraceMeta>& metas, double e0) {
  if (metas.empty()) throw ConfigError("warm-start bound needs run metadata");
  struct Piece {
    double switch_step;
    double k0;
  };
  std::vector<Piece> pieces;
  pieces.reserve(metas.size());
  for (const auto& m : metas) {
    if (m.switch_step < 0) throw ConfigError("run never switched to the decaying schedule");
    pieces.push_back({static_cast<double>(m.switch_step), m.k0});
  }
  const double mu = metas.front().mu;
  const double sigma2 = metas.front().sigma2;
  const double h = 1.0 / std::sqrt(metas.front().lipschitz);
  const RateBound before = constant_lr_neighborhood_bound(h, mu, sigma2, e0);
  return {"warmstart_sc_scheduled", "accelerated strongly convex decay after warm start",
          [=](double k) {
            double sum = 0.0;
            for (const auto& p : pieces) {
              sum += k < p.switch_step ? before(k)
                                       : 4.0 * sigma2 / (mu * (k - p.switch_step + p.k0));
            }
            return sum / static_cast<double>(pieces.size());
          }};
}

RateBound convex_scheduled_bound(double c, double sigma2, double e0) {
  return {"convex_scheduled", "accelerated convex decay",
          [=](double k) {
            if (k < 1.0) return std::numeric_limits<double>::infinity();
            return (e0 / (16.0 * c * c) + c * c * sigma2 * (1.0 + std::log(k))) / std::sqrt(k);
          }};
}

RateBound sgd_constant_bound(double h, double mu, double cond, double sigma2, double gap0) {
  return {"sgd_constant", "constant-step stochastic gradient descent",
          [=](double k) {
            return std::pow(1.0 - h * mu, k) * gap0 + 0.5 * h * cond * sigma2;
          }};
}

RateBound gd_sc_scheduled_bound(double mu, double cond, double sigma2, double e0) {
  const double a = 2.0 * (cond + 1.0) * sigma2;
  return {"gd_sc_scheduled", "stochastic gradient descent strongly convex decay",
          [=](double k) { return a / (mu * k + a / e0); }};
}

std::string bound_observable(const RunConfig& config, const Problem& problem) {
  switch (config.schedule.kind) {
    case ScheduleKind::Constant:
      return is_gd_kind(config.optimizer) ? "f_gap" : "E_sc";
    case ScheduleKind::StronglyConvexDecay:
      return "E_sc";
    case ScheduleKind::ConvexPower:
    case ScheduleKind::GdConvexPower:
      return "f_gap";
    case ScheduleKind::GdStronglyConvexDecay:
    case ScheduleKind::AbstractDecay:
      return lyapunov_observable(config.optimizer, problem);
  }
  return "f_gap";
}

RateBound bound_for_config(const RunConfig& config, const Problem& problem, const Vec& x0,
                           const std::vector<TraceMeta>& metas) {
  const double sigma2 = config.noise.kind == NoiseKind::None ? 0.0 : config.noise.sigma2;
  const Schedule schedule = build_schedule(config, problem, x0);
  const double mu = problem.mu();
  const double cond = problem.condition_number();
  const bool gd = is_gd_kind(config.optimizer);
  const bool sc = is_strongly_convex_kind(config.optimizer);
  const double dist2 = (x0 - problem.minimizer()).squaredNorm();
  switch (config.schedule.kind) {
    case ScheduleKind::Constant:
      if (gd && mu > 0.0) {
        return sgd_constant_bound(schedule.h(0), mu, cond, sigma2, problem.gap(x0));
      }
      if (sc) {
        return constant_lr_neighborhood_bound(schedule.h(0), mu, sigma2,
                                              initial_lyapunov(config.optimizer, problem, x0));
      }
      break;
    case ScheduleKind::StronglyConvexDecay:
      if (!sc || gd) break;
      if (config.warmstart && sigma2 > 0.0) {
        return warmstart_sc_bound(metas, initial_lyapunov(config.optimizer, problem, x0));
      }
      return sc_scheduled_bound(mu, sigma2, schedule.offset());
    case ScheduleKind::ConvexPower:
      if (gd || sc) break;
      return convex_scheduled_bound(schedule.params().c, sigma2, 2.0 * dist2);
    case ScheduleKind::GdStronglyConvexDecay:
      if (!gd) break;
      return gd_sc_scheduled_bound(mu, cond, sigma2, schedule.params().e0);
    case ScheduleKind::GdConvexPower:
      if (!gd) break;
      return gd_convex_expectation_curve(problem.lipschitz(), schedule.params().c,
                                         schedule.params().exponent, 0.5 * dist2, sigma2);
    case ScheduleKind::AbstractDecay: {
      if (!gd) break;
      ExpectationParams p;
      p.e0 = schedule.params().e0;
      p.sigma2 = sigma2;
      p.r_e = schedule.params().r_e;
      p.l_e = schedule.params().l_e;
      p.g2_bar = schedule.params().g2bar;
      return abstract_expectation_curve(ExpectationCase::RatePositive, p);
    }
  }
  throw ConfigError("no rate bound for optimizer " + to_string(config.optimizer) +
                    " with schedule " + to_string(config.schedule.kind));
}

void write_aggregate_csv(std::ostream& out, const AggregateCurve& curve) {
  out << "k," << curve.observable << "_mean," << curve.observable << "_se,M\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << curve.k[i] << ',' << format_double(curve.mean[i]) << ','
        << format_double(curve.se[i]) << ',' << curve.m << '\n';
  }
}

void write_aggregate_csv(const std::string& path, const AggregateCurve& curve) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_aggregate_csv(out, curve);
}

AggregateCurve read_aggregate_csv(std::istream& in) {
  AggregateCurve curve;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty aggregate CSV");
  const auto comma = line.find(',');
  const auto suffix = line.find("_mean");
  if (comma == std::string::npos || suffix == std::string::npos || suffix < comma) {
    throw ConfigError("bad aggregate CSV header");
  }
  curve.observable = line.substr(comma + 1, suffix - comma - 1);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string k;
    std::string mean;
    std::string se;
    std::string m;
    if (!std::getline(ss, k, ',') || !std::getline(ss, mean, ',') || !std::getline(ss, se, ',') ||
        !std::getline(ss, m, ',')) {
      throw ConfigError("bad aggregate CSV row '" + line + "'");
    }
    curve.k.push_back(std::stoll(k));
    curve.mean.push_back(std::stod(mean));
    curve.se.push_back(std::stod(se));
    curve.m = std::stoi(m);
  }
  return curve;
}

AggregateCurve read_aggregate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_aggregate_csv(in);
}

void write_bound_csv(std::ostream& out, const RateBound& bound,
                     const std::vector<std::int64_t>& k) {
  out << "k," << bound.label << '\n';
  for (const auto step : k) {
    out << step << ',' << format_double(bound(static_cast<double>(step))) << '\n';
  }
}

}  // namespace asgd
