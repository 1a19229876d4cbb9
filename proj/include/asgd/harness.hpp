#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "asgd/config.hpp"
#include "asgd/optimizers.hpp"
#include "asgd/rate_bound.hpp"

namespace asgd {

/// Per-step sample mean and standard error of one observable over M seeds.
struct AggregateCurve {
  std::string observable;
  std::vector<std::int64_t> k;
  std::vector<double> mean;
  std::vector<double> se;
  int m = 0;

  std::size_t size() const { return k.size(); }
};

/// Builds an aggregate from per-seed series sampled on a shared k grid.
/// series[s][i] is the value of seed s at k[i]. SE = sample stddev / sqrt(M), zero for M = 1.
AggregateCurve aggregate(const std::string& observable, const std::vector<std::int64_t>& k,
                         const std::vector<std::vector<double>>& series);

struct MatrixOptions {
  int threads = 1;
  /// Keep full traces in the result (scalars only unless the config records vectors).
  bool keep_traces = false;
};

struct MatrixResult {
  std::vector<TraceMeta> metas;
  std::vector<Trace> traces;
  AggregateCurve f_gap;
  /// E_sc, E_ac_c or the GD Lyapunov value, whichever matches the optimizer.
  AggregateCurve lyapunov;
  Vec x0;
  double e0 = 0.0;
};

/// Lyapunov column that the harness aggregates for a given optimizer.
std::string lyapunov_observable(OptimizerKind kind, const Problem& problem);

/// Runs config.seeds independent runs with seeds derive_seed(master_seed, i).
/// Aggregation is ordered by seed index. Throws DivergenceError naming the
/// first failing seed.
MatrixResult run_matrix(const RunConfig& config, const MatrixOptions& options = {});

struct BoundReport {
  std::string label;
  std::size_t steps = 0;
  std::size_t passed = 0;
  double pass_fraction = 0.0;
  std::vector<std::int64_t> flagged;
  /// max over steps of mean - 2 SE - bound.
  double worst_excess = 0.0;
};

/// One-sided check mean - 2 SE <= bound(k) at every recorded step.
BoundReport compare_to_bound(const AggregateCurve& curve, const RateBound& bound);

struct RateFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least squares of log(mean) on log(k) over k_min <= k <= k_max.
/// Throws ConfigError on a nonpositive mean or fewer than two points in the window.
RateFit fit_rate(const AggregateCurve& curve, std::int64_t k_min, std::int64_t k_max);

// Bound envelopes.

/// r^k e0 + (1 - r^k) h sigma2 / sqrt(mu), r = 1 - h sqrt(mu).
RateBound constant_lr_neighborhood_bound(double h, double mu, double sigma2, double e0);
/// 4 sigma2 / (mu (k + k0)).
RateBound sc_scheduled_bound(double mu, double sigma2, double k0);
/// Mean over seeds of the piecewise bound: the constant-step neighborhood
/// before each seed's switch step and 4 sigma2 / (mu (k - switch + k0)) after.
RateBound warmstart_sc_bound(const std::vector<TraceMeta>& metas, double e0);
/// (e0 / (16 c^2) + c^2 sigma2 (1 + log k)) / sqrt(k) for k >= 1.
RateBound convex_scheduled_bound(double c, double sigma2, double e0);
/// (1 - h mu)^k gap0 + h cond sigma2 / 2.
RateBound sgd_constant_bound(double h, double mu, double cond, double sigma2, double gap0);
/// 2 (cond + 1) sigma2 / (mu k + 2 (cond + 1) sigma2 / e0).
RateBound gd_sc_scheduled_bound(double mu, double cond, double sigma2, double e0);

/// The envelope matching a config's optimizer and schedule, evaluated for
/// the observable that the proposition bounds (see bound_observable).
RateBound bound_for_config(const RunConfig& config, const Problem& problem, const Vec& x0,
                           const std::vector<TraceMeta>& metas);

/// "f_gap" or the Lyapunov column bounded by bound_for_config.
std::string bound_observable(const RunConfig& config, const Problem& problem);

// CSV for aggregates: k,mean,se,M with an observable comment-free header.
void write_aggregate_csv(std::ostream& out, const AggregateCurve& curve);
void write_aggregate_csv(const std::string& path, const AggregateCurve& curve);
AggregateCurve read_aggregate_csv(std::istream& in);
AggregateCurve read_aggregate_csv(const std::string& path);

/// k,bound for each k in the grid.
void write_bound_csv(std::ostream& out, const RateBound& bound,
                     const std::vector<std::int64_t>& k);

}  // namespace asgd
