#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asgd/oracle.hpp"
#include "asgd/problems.hpp"
#include "asgd/schedules.hpp"

namespace asgd {

enum class OptimizerKind {
  Gd,
  PerturbedGd,
  NesterovScConstant,
  NesterovCConstant,
  AsgdScThreeVar,
  AsgdScEliminated,
  AsgdCThreeVar,
  AsgdCEliminated,
};

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

bool is_strongly_convex_kind(OptimizerKind kind);
bool is_gd_kind(OptimizerKind kind);

/// Which Lyapunov analysis bounds the GD step: 1/L (convex) or 2/(L+mu).
enum class GdMode { Convex, StronglyConvex };

struct IterateState {
  Vec x;
  Vec v;
  Vec y;
  std::int64_t k = 0;
  double t = 0.0;
  double h = 0.0;
  Vec last_noise;
};

/// x = v = y = x0, k = 0.
IterateState initial_state(const Vec& x0);

struct Coefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// Eliminated-form coefficients of the strongly convex three-variable method:
/// x_{k+1} = y_k - (alpha/L) g, y_{k+1} = x_{k+1} + beta (x_{k+1} - x_k) + gamma (y_k - x_k).
Coefficients sc_eliminated_coefficients(double h, double h_next, double mu, double lipschitz);

/// Same for the convex method; t and t_next are the accelerated clock at k and k+1.
Coefficients c_eliminated_coefficients(double h, double h_next, double t, double t_next,
                                       double lipschitz);

/// (sqrt(C) - 1) / (sqrt(C) + 1).
double nesterov_sc_momentum(double cond);
/// k / (k + 3).
double nesterov_c_momentum(std::int64_t k);

/// Throws StepCapError when h exceeds cap beyond a 1e-12 relative slack.
void check_step_cap(double h, double cap, const std::string& what);

// Single steps. Each samples the oracle exactly once and returns the state
// at k + 1 with last_noise holding the noise used. The three-variable steps
// read (x, v); the eliminated and Nesterov steps read (x, y) and derive v.

IterateState step_asgd_sc_threevar(const IterateState& s, NoisyGradientOracle& oracle, double h);
IterateState step_asgd_sc_eliminated(const IterateState& s, NoisyGradientOracle& oracle, double h,
                                     double h_next);
IterateState step_asgd_c_threevar(const IterateState& s, NoisyGradientOracle& oracle, double h,
                                  double t);
IterateState step_asgd_c_eliminated(const IterateState& s, NoisyGradientOracle& oracle, double h,
                                    double h_next, double t, double t_next);
IterateState step_gd(const IterateState& s, NoisyGradientOracle& oracle, double h, GdMode mode,
                     bool enforce_cap = true);
IterateState step_nesterov_sc(const IterateState& s, NoisyGradientOracle& oracle);
IterateState step_nesterov_c(const IterateState& s, NoisyGradientOracle& oracle);

/// Recomputes y_{k+1} of the strongly convex eliminated form for a new h_next.
Vec sc_eliminated_momentum(const Vec& x, const Vec& y, const Vec& x_next, double h, double h_next,
                           double mu, double lipschitz);

struct TraceRecord {
  std::int64_t k = 0;
  double h = 0.0;
  double t = 0.0;
  double f_gap = 0.0;
  double e_sc = 0.0;
  double e_ac_c = 0.0;
  double e_gd_c = 0.0;
  double e_gd_sc = 0.0;
  double x_dist = 0.0;
  double v_dist = 0.0;
  double noise_norm = 0.0;
  bool clamped = false;
  // Empty when the record policy drops vectors.
  Vec x;
  Vec v;
  Vec y;
  Vec noise;
};

struct TraceMeta {
  std::string problem;
  std::string optimizer;
  std::string schedule;
  std::uint64_t seed = 0;
  double sigma2 = 0.0;
  double mu = 0.0;
  double lipschitz = 0.0;
  bool warmstart = false;
  std::int64_t switch_step = -1;
  double k0 = 0.0;
  double e_crit = 0.0;
  std::int64_t warmstart_bound = 0;
};

struct Trace {
  TraceMeta meta;
  std::vector<TraceRecord> records;
};

struct RecordPolicy {
  bool vectors = true;
  bool thin = false;
};

/// Every k up to 1000, then about 100 points per decade, and always the last step.
bool keep_record(std::int64_t k, std::int64_t steps);

struct RunOptions {
  bool warmstart = false;
  GdMode gd_mode = GdMode::Convex;
  bool enforce_step_cap = true;
  RecordPolicy record;
};

/// Runs `steps` iterations from x0 (v0 = x0) and records states 0..steps.
///
/// With warmstart on a strongly convex accelerated kind and a
/// StronglyConvexDecay schedule, constant 1/sqrt(L) steps are taken until
/// the Lyapunov value drops to e_crit (or the step bound is reached); the
/// decaying schedule then restarts with e0 measured at the switch.
/// Throws DivergenceError on non-finite iterates.
Trace run(OptimizerKind kind, NoisyGradientOracle& oracle, const Schedule& schedule,
          const Vec& x0, std::int64_t steps, const RunOptions& options = {});

}  // namespace asgd
