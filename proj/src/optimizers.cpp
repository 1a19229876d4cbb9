#include "asgd/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "asgd/error.hpp"

namespace asgd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Gd:
      return "gd";
    case OptimizerKind::PerturbedGd:
      return "perturbed_gd";
    case OptimizerKind::NesterovScConstant:
      return "nesterov_sc";
    case OptimizerKind::NesterovCConstant:
      return "nesterov_c";
    case OptimizerKind::AsgdScThreeVar:
      return "asgd_sc";
    case OptimizerKind::AsgdScEliminated:
      return "asgd_sc_eliminated";
    case OptimizerKind::AsgdCThreeVar:
      return "asgd_c";
    case OptimizerKind::AsgdCEliminated:
      return "asgd_c_eliminated";
  }
  return "unknown";
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  for (auto kind : {OptimizerKind::Gd, OptimizerKind::PerturbedGd,
                    OptimizerKind::NesterovScConstant, OptimizerKind::NesterovCConstant,
                    OptimizerKind::AsgdScThreeVar, OptimizerKind::AsgdScEliminated,
                    OptimizerKind::AsgdCThreeVar, OptimizerKind::AsgdCEliminated}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown optimizer '" + name + "'");
}

bool is_strongly_convex_kind(OptimizerKind kind) {
  return kind == OptimizerKind::NesterovScConstant || kind == OptimizerKind::AsgdScThreeVar ||
         kind == OptimizerKind::AsgdScEliminated;
}

bool is_gd_kind(OptimizerKind kind) {
  return kind == OptimizerKind::Gd || kind == OptimizerKind::PerturbedGd;
}

IterateState initial_state(const Vec& x0) {
  IterateState s;
  s.x = x0;
  s.v = x0;
  s.y = x0;
  s.last_noise = Vec::Zero(x0.size());
  return s;
}

Coefficients sc_eliminated_coefficients(double h, double h_next, double mu, double lipschitz) {
  const double sqrt_mu = std::sqrt(mu);
  const double sqrt_l = std::sqrt(lipschitz);
  const double w_next = w_sc(h_next, mu);
  Coefficients c;
  c.alpha = h * sqrt_l;
  c.beta = w_next * (sqrt_l / sqrt_mu - 1.0);
  c.gamma = w_next * (1.0 - h * sqrt_l) / (h * sqrt_mu);
  return c;
}

Coefficients c_eliminated_coefficients(double h, double h_next, double t, double t_next,
                                       double lipschitz) {
  const double sqrt_l = std::sqrt(lipschitz);
  Coefficients c;
  c.alpha = h * sqrt_l;
  c.beta = (h_next / t_next) * (t * sqrt_l - 2.0);
  c.gamma = (t / t_next) * (h_next / h) * (1.0 - sqrt_l * h);
  return c;
}

double nesterov_sc_momentum(double cond) {
  const double s = std::sqrt(cond);
  return (s - 1.0) / (s + 1.0);
}

double nesterov_c_momentum(std::int64_t k) {
  return static_cast<double>(k) / static_cast<double>(k + 3);
}

void check_step_cap(double h, double cap, const std::string& what) {
  if (h > cap * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": step " << h << " exceeds cap " << cap;
    throw StepCapError(os.str());
  }
}

IterateState step_asgd_sc_threevar(const IterateState& s, NoisyGradientOracle& oracle, double h) {
  const Problem& p = oracle.problem();
  check_step_cap(h, 1.0 / std::sqrt(p.lipschitz()), "asgd_sc");
  if (!(p.mu() > 0.0)) throw ConfigError("asgd_sc needs mu > 0");
  const double w = w_sc(h, p.mu());
  IterateState out;
  out.y = (1.0 - w) * s.x + w * s.v;
  GradientSample g = oracle.sample(out.y);
  out.x = out.y - (h / std::sqrt(p.lipschitz())) * g.g_hat;
  out.v = s.v + w * (s.x - s.v) - (h / std::sqrt(p.mu())) * g.g_hat;
  out.k = s.k + 1;
  out.last_noise = std::move(g.noise);
  return out;
}

Vec sc_eliminated_momentum(const Vec& x, const Vec& y, const Vec& x_next, double h, double h_next,
                           double mu, double lipschitz) {
  const Coefficients c = sc_eliminated_coefficients(h, h_next, mu, lipschitz);
  return x_next + c.beta * (x_next - x) + c.gamma * (y - x);
}

IterateState step_asgd_sc_eliminated(const IterateState& s, NoisyGradientOracle& oracle, double h,
                                     double h_next) {
  const Problem& p = oracle.problem();
  check_step_cap(h, 1.0 / std::sqrt(p.lipschitz()), "asgd_sc_eliminated");
  if (!(p.mu() > 0.0)) throw ConfigError("asgd_sc_eliminated needs mu > 0");
  const Coefficients c = sc_eliminated_coefficients(h, h_next, p.mu(), p.lipschitz());
  GradientSample g = oracle.sample(s.y);
  IterateState out;
  out.x = s.y - (c.alpha / p.lipschitz()) * g.g_hat;
  out.y = out.x + c.beta * (out.x - s.x) + c.gamma * (s.y - s.x);
  out.v = out.x + (out.y - out.x) / w_sc(h_next, p.mu());
  out.k = s.k + 1;
  out.last_noise = std::move(g.noise);
  return out;
}

IterateState step_asgd_c_threevar(const IterateState& s, NoisyGradientOracle& oracle, double h,
                                  double t) {
  const Problem& p = oracle.problem();
  check_step_cap(h, 1.0 / std::sqrt(p.lipschitz()), "asgd_c");
  const double w = 2.0 * h / t;
  IterateState out;
  out.y = (1.0 - w) * s.x + w * s.v;
  GradientSample g = oracle.sample(out.y);
  out.x = out.y - (h / std::sqrt(p.lipschitz())) * g.g_hat;
  out.v = s.v - (0.5 * h * t) * g.g_hat;
  out.k = s.k + 1;
  out.last_noise = std::move(g.noise);
  return out;
}

IterateState step_asgd_c_eliminated(const IterateState& s, NoisyGradientOracle& oracle, double h,
                                    double h_next, double t, double t_next) {
  const Problem& p = oracle.problem();
  check_step_cap(h, 1.0 / std::sqrt(p.lipschitz()), "asgd_c_eliminated");
  const Coefficients c = c_eliminated_coefficients(h, h_next, t, t_next, p.lipschitz());
  GradientSample g = oracle.sample(s.y);
  IterateState out;
  out.x = s.y - (c.alpha / p.lipschitz()) * g.g_hat;
  out.y = out.x + c.beta * (out.x - s.x) + c.gamma * (s.y - s.x);
  out.v = out.x + (out.y - out.x) * (t_next / (2.0 * h_next));
  out.k = s.k + 1;
  out.last_noise = std::move(g.noise);
  return out;
}

IterateState step_gd(const IterateState& s, NoisyGradientOracle& oracle, double h, GdMode mode,
                     bool enforce_cap) {
  const Problem& p = oracle.problem();
  if (enforce_cap) {
    const double cap =
        mode == GdMode::Convex ? 1.0 / p.lipschitz() : 2.0 / (p.lipschitz() + p.mu());
    check_step_cap(h, cap, "gd");
  }
  GradientSample g = oracle.sample(s.x);
  IterateState out;
  out.x = s.x - h * g.g_hat;
  out.v = out.x;
  out.y = out.x;
  out.k = s.k + 1;
  out.last_noise = std::move(g.noise);
  return out;
}

IterateState step_nesterov_sc(const IterateState& s, NoisyGradientOracle& oracle) {
  const Problem& p = oracle.problem();
  if (!(p.mu() > 0.0)) throw ConfigError("nesterov_sc needs mu > 0");
  const double cond = p.condition_number();
  const double beta = nesterov_sc_momentum(cond);
  GradientSample g = oracle.sample(s.y);
  IterateState out;
  out.x = s.y - g.g_hat / p.lipschitz();
  out.y = out.x + beta * (out.x - s.x);
  out.v = out.x + (out.y - out.x) * (1.0 + std::sqrt(cond));
  out.k = s.k + 1;
  out.last_noise = std::move(g.noise);
  return out;
}

IterateState step_nesterov_c(const IterateState& s, NoisyGradientOracle& oracle) {
  const Problem& p = oracle.problem();
  const double beta = nesterov_c_momentum(s.k);
  GradientSample g = oracle.sample(s.y);
  IterateState out;
  out.x = s.y - g.g_hat / p.lipschitz();
  out.y = out.x + beta * (out.x - s.x);
  out.v = out.x + (out.y - out.x) * (0.5 * static_cast<double>(s.k + 3));
  out.k = s.k + 1;
  out.last_noise = std::move(g.noise);
  return out;
}

bool keep_record(std::int64_t k, std::int64_t steps) {
  if (k <= 1000 || k == steps) return true;
  const auto bucket = [](std::int64_t n) {
    return static_cast<std::int64_t>(std::floor(100.0 * std::log10(static_cast<double>(n))));
  };
  return bucket(k) != bucket(k - 1);
}

namespace {

// Resolves h_k, either straight from the schedule or through the warm-start
// switch, and keeps prefix sums for both clocks.
class StepSequence {
 public:
  StepSequence(const Schedule& schedule, double fixed_h, bool warm, const Problem& problem,
               double sigma2)
      : schedule_(schedule), fixed_h_(fixed_h), warm_(warm), problem_(problem), sigma2_(sigma2) {
    prefix_.push_back(0.0);
    if (warm_) {
      e_crit_ = e_crit(sigma2_, problem_.mu(), problem_.lipschitz());
    }
  }

  // Warm-start decision for index k given the Lyapunov value at state k.
  void decide(std::int64_t k, double lyapunov) {
    if (!warm_ || k < static_cast<std::int64_t>(warm_h_.size())) return;
    if (!decay_) {
      if (k == 0) bound_ = warmstart_steps(lyapunov, e_crit_, problem_.mu(), problem_.lipschitz());
      if (lyapunov <= e_crit_ || k >= bound_) {
        switch_step_ = k;
        const double e0 = std::max(lyapunov, std::numeric_limits<double>::min());
        decay_ = Schedule::strongly_convex_decay(problem_.mu(), problem_.condition_number(),
                                                 sigma2_, e0);
      }
    }
    warm_h_.push_back(decay_ ? decay_->h(k - switch_step_) : warm_step());
  }

  bool decided(std::int64_t k) const {
    return !warm_ || k < static_cast<std::int64_t>(warm_h_.size());
  }

  double h(std::int64_t k) const {
    if (fixed_h_ > 0.0) return fixed_h_;
    if (!warm_) return schedule_.h(k);
    if (k < static_cast<std::int64_t>(warm_h_.size())) return warm_h_[k];
    return decay_ ? decay_->h(k - switch_step_) : warm_step();
  }

  // sum_{i < n} h_i
  double prefix(std::int64_t n) {
    while (static_cast<std::int64_t>(prefix_.size()) <= n) {
      const auto i = static_cast<std::int64_t>(prefix_.size()) - 1;
      prefix_.push_back(prefix_.back() + h(i));
    }
    return prefix_[n];
  }

  // Accelerated clock t_k = sum_{i <= k + 1} h_i, k >= -1.
  double accel_t(std::int64_t k) { return prefix(k + 2); }

  std::int64_t switch_step() const { return switch_step_; }
  double k0() const { return decay_ ? decay_->offset() : 0.0; }
  double e_crit_value() const { return e_crit_; }
  std::int64_t bound() const { return bound_; }

 private:
  double warm_step() const { return 1.0 / std::sqrt(problem_.lipschitz()); }

  const Schedule& schedule_;
  double fixed_h_;
  bool warm_;
  const Problem& problem_;
  double sigma2_;
  double e_crit_ = 0.0;
  std::int64_t bound_ = 0;
  std::int64_t switch_step_ = -1;
  std::optional<Schedule> decay_;
  std::vector<double> warm_h_;
  std::vector<double> prefix_;
};

}  // namespace

Trace run(OptimizerKind kind, NoisyGradientOracle& oracle, const Schedule& schedule,
          const Vec& x0, std::int64_t steps, const RunOptions& options) {
  if (steps < 0) throw ConfigError("steps must be nonnegative");
  const Problem& p = oracle.problem();
  if (x0.size() != p.dim()) throw DimensionError("x0 length differs from problem dim");
  const bool sc_kind = is_strongly_convex_kind(kind);
  const bool gd_kind = is_gd_kind(kind);
  if (sc_kind && !(p.mu() > 0.0)) throw ConfigError(to_string(kind) + " needs mu > 0");

  const bool warm = options.warmstart &&
                    (kind == OptimizerKind::AsgdScThreeVar ||
                     kind == OptimizerKind::AsgdScEliminated) &&
                    schedule.kind() == ScheduleKind::StronglyConvexDecay && oracle.sigma2() > 0.0;
  const bool nesterov =
      kind == OptimizerKind::NesterovScConstant || kind == OptimizerKind::NesterovCConstant;
  const double fixed_h = nesterov ? 1.0 / std::sqrt(p.lipschitz()) : 0.0;
  StepSequence seq(schedule, fixed_h, warm, p, oracle.sigma2());

  Trace trace;
  trace.meta.problem = p.name();
  trace.meta.optimizer = to_string(kind);
  trace.meta.schedule = nesterov ? "nesterov_constant" : schedule.describe();
  trace.meta.seed = oracle.seed();
  trace.meta.sigma2 = oracle.sigma2();
  trace.meta.mu = p.mu();
  trace.meta.lipschitz = p.lipschitz();
  trace.meta.warmstart = warm;

  const double mu = p.mu();
  const Vec& xstar = p.minimizer();

  auto e_sc_of = [&](const IterateState& s) {
    return mu > 0.0 ? p.gap(s.x) + 0.5 * mu * (s.v - xstar).squaredNorm() : kNaN;
  };

  IterateState state = initial_state(x0);

  for (std::int64_t k = 0; k <= steps; ++k) {
    if (warm && !seq.decided(k)) seq.decide(k, e_sc_of(state));
    const double h = seq.h(k);

    // Three-variable forms couple y_k from (x_k, v_k) and h_k.
    if (kind == OptimizerKind::AsgdScThreeVar) {
      const double w = w_sc(h, mu);
      state.y = (1.0 - w) * state.x + w * state.v;
    } else if (kind == OptimizerKind::AsgdCThreeVar) {
      const double w = 2.0 * h / seq.accel_t(k);
      state.y = (1.0 - w) * state.x + w * state.v;
    }

    if (!options.record.thin || keep_record(k, steps)) {
      TraceRecord r;
      r.k = k;
      r.h = h;
      r.f_gap = p.gap(state.x);
      r.e_sc = e_sc_of(state);
      r.x_dist = (state.x - xstar).norm();
      r.v_dist = (state.v - xstar).norm();
      if (gd_kind) {
        r.e_ac_c = kNaN;
        r.e_gd_c = seq.prefix(k) * r.f_gap + 0.5 * r.x_dist * r.x_dist;
        r.e_gd_sc = mu > 0.0 ? r.f_gap + 0.5 * mu * r.x_dist * r.x_dist : kNaN;
      } else {
        const double t_prev = k == 0 ? 0.0 : seq.accel_t(k - 1);
        r.e_ac_c = t_prev * t_prev * r.f_gap + 2.0 * r.v_dist * r.v_dist;
        r.e_gd_c = kNaN;
        r.e_gd_sc = kNaN;
      }
      r.clamped = schedule.clamped(k) && !nesterov && !warm;
      if (options.record.vectors) {
        r.x = state.x;
        r.v = state.v;
        r.y = state.y;
      }
      trace.records.push_back(std::move(r));
    }
    if (k == steps) break;

    IterateState next;
    switch (kind) {
      case OptimizerKind::Gd:
      case OptimizerKind::PerturbedGd: {
        if (kind == OptimizerKind::Gd) {
          next = state;
          if (options.enforce_step_cap) {
            const double cap = options.gd_mode == GdMode::Convex
                                   ? 1.0 / p.lipschitz()
                                   : 2.0 / (p.lipschitz() + p.mu());
            check_step_cap(h, cap, "gd");
          }
          next.x = state.x - h * p.gradient(state.x);
          next.v = next.x;
          next.y = next.x;
          next.k = k + 1;
          next.last_noise = Vec::Zero(p.dim());
        } else {
          next = step_gd(state, oracle, h, options.gd_mode, options.enforce_step_cap);
        }
        break;
      }
      case OptimizerKind::NesterovScConstant:
        next = step_nesterov_sc(state, oracle);
        break;
      case OptimizerKind::NesterovCConstant:
        next = step_nesterov_c(state, oracle);
        break;
      case OptimizerKind::AsgdScThreeVar: {
        if (options.enforce_step_cap) {
          next = step_asgd_sc_threevar(state, oracle, h);
        } else {
          // Same update with the cap check bypassed.
          const double w = w_sc(h, mu);
          GradientSample g = oracle.sample(state.y);
          next.x = state.y - (h / std::sqrt(p.lipschitz())) * g.g_hat;
          next.v = state.v + w * (state.x - state.v) - (h / std::sqrt(mu)) * g.g_hat;
          next.y = state.y;
          next.k = k + 1;
          next.last_noise = std::move(g.noise);
        }
        break;
      }
      case OptimizerKind::AsgdScEliminated: {
        if (!options.enforce_step_cap) {
          throw ConfigError("cap bypass is only supported for three-variable forms");
        }
        const double h_guess = seq.h(k + 1);
        next = step_asgd_sc_eliminated(state, oracle, h, h_guess);
        if (warm && !seq.decided(k + 1)) {
          // v_{k+1} does not depend on h_{k+1}; recover it from the gradient step.
          const Vec g_hat = (state.y - next.x) * (std::sqrt(p.lipschitz()) / h);
          const double w = w_sc(h, mu);
          const Vec v_next = state.v + w * (state.x - state.v) - (h / std::sqrt(mu)) * g_hat;
          IterateState probe = next;
          probe.v = v_next;
          seq.decide(k + 1, e_sc_of(probe));
          const double h_next = seq.h(k + 1);
          if (h_next != h_guess) {
            next.y = sc_eliminated_momentum(state.x, state.y, next.x, h, h_next, mu,
                                            p.lipschitz());
            next.v = next.x + (next.y - next.x) / w_sc(h_next, mu);
          }
        }
        break;
      }
      case OptimizerKind::AsgdCThreeVar: {
        if (options.enforce_step_cap) {
          next = step_asgd_c_threevar(state, oracle, h, seq.accel_t(k));
        } else {
          const double t = seq.accel_t(k);
          GradientSample g = oracle.sample(state.y);
          next.x = state.y - (h / std::sqrt(p.lipschitz())) * g.g_hat;
          next.v = state.v - (0.5 * h * t) * g.g_hat;
          next.y = state.y;
          next.k = k + 1;
          next.last_noise = std::move(g.noise);
        }
        break;
      }
      case OptimizerKind::AsgdCEliminated: {
        if (!options.enforce_step_cap) {
          throw ConfigError("cap bypass is only supported for three-variable forms");
        }
        next = step_asgd_c_eliminated(state, oracle, h, seq.h(k + 1), seq.accel_t(k),
                                      seq.accel_t(k + 1));
        break;
      }
    }

    if (!trace.records.empty() && trace.records.back().k == k) {
      trace.records.back().noise_norm = next.last_noise.norm();
      if (options.record.vectors) trace.records.back().noise = next.last_noise;
    }
    next.k = k + 1;
    if (!next.x.allFinite() || !next.v.allFinite() || !next.y.allFinite()) {
      throw DivergenceError(k + 1, to_string(kind) + ": non-finite iterate");
    }
    state = std::move(next);
  }

  // The clock column needs h_{k+1}, known only once the next step is resolved.
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    TraceRecord& r = trace.records[i];
    r.t = gd_kind ? seq.prefix(r.k) : seq.accel_t(r.k);
    if (options.record.vectors && r.noise.size() == 0) r.noise = Vec::Zero(p.dim());
  }

  trace.meta.switch_step = seq.switch_step();
  trace.meta.k0 = seq.k0();
  trace.meta.e_crit = seq.e_crit_value();
  trace.meta.warmstart_bound = seq.bound();
  return trace;
}

}  // namespace asgd
