#include "asgd/ode.hpp"

#include <algorithm>
#include <cmath>

#include "asgd/error.hpp"
#include "asgd/optimizers.hpp"
#include "asgd/oracle.hpp"

namespace asgd {

std::string to_string(OdeSystem system) {
  switch (system) {
    case OdeSystem::FirstOrderSC:
      return "first_order_sc";
    case OdeSystem::FirstOrderC:
      return "first_order_c";
    case OdeSystem::SecondOrderSC:
      return "second_order_sc";
    case OdeSystem::SecondOrderC:
      return "second_order_c";
  }
  return "unknown";
}

OdeSystem ode_system_from_string(const std::string& name) {
  for (auto s : {OdeSystem::FirstOrderSC, OdeSystem::FirstOrderC, OdeSystem::SecondOrderSC,
                 OdeSystem::SecondOrderC}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown ode system '" + name + "'");
}

bool is_convex_system(OdeSystem system) {
  return system == OdeSystem::FirstOrderC || system == OdeSystem::SecondOrderC;
}

void ode_field(OdeSystem system, const Problem& problem, double t, const Vec& x,
               const Vec& second, Vec& dx, Vec& dsecond) {
  const double sqrt_mu = std::sqrt(problem.mu());
  const double inv_sqrt_l = 1.0 / std::sqrt(problem.lipschitz());
  const Vec g = problem.gradient(x);
  switch (system) {
    case OdeSystem::FirstOrderSC:
      dx = sqrt_mu * (second - x) - inv_sqrt_l * g;
      dsecond = sqrt_mu * (x - second) - g / sqrt_mu;
      return;
    case OdeSystem::FirstOrderC:
      dx = (2.0 / t) * (second - x) - inv_sqrt_l * g;
      dsecond = (-0.5 * t) * g;
      return;
    case OdeSystem::SecondOrderSC:
      dx = second;
      dsecond = -2.0 * sqrt_mu * second - g -
                inv_sqrt_l * (problem.hessian_vector(x, second) + sqrt_mu * g);
      return;
    case OdeSystem::SecondOrderC:
      dx = second;
      dsecond = (-3.0 / t) * second - g -
                inv_sqrt_l * (problem.hessian_vector(x, second) + g / t);
      return;
  }
}

Trajectory integrate(OdeSystem system, const Problem& problem, const Vec& x0, const Vec& second0,
                     double t_end, double dt, const IntegrateOptions& options) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const double t0 = options.t0;
  if (!(t_end > t0)) throw ConfigError("t_end must exceed t0");
  if (is_convex_system(system) && !(t0 > 0.0)) {
    throw ConfigError("convex systems need t0 > 0");
  }
  if ((system == OdeSystem::FirstOrderSC || system == OdeSystem::SecondOrderSC) &&
      !(problem.mu() > 0.0)) {
    throw ConfigError("strongly convex systems need mu > 0");
  }
  if ((system == OdeSystem::SecondOrderSC || system == OdeSystem::SecondOrderC) &&
      !options.allow_fd_hessian && !problem.has_exact_hessian()) {
    throw ConfigError("no closed-form Hessian and the finite-difference fallback is disabled");
  }
  if (x0.size() != problem.dim() || second0.size() != problem.dim()) {
    throw DimensionError("initial state length differs from problem dim");
  }
  if (options.sample_every < 1) throw ConfigError("sample_every must be >= 1");

  const auto steps = static_cast<long long>(std::llround((t_end - t0) / dt));
  if (steps < 1) throw ConfigError("t_end - t0 is shorter than one step");

  Trajectory traj;
  traj.system = system;
  Vec x = x0;
  Vec s = second0;
  traj.t.push_back(t0);
  traj.x.push_back(x);
  traj.second.push_back(s);

  Vec k1x, k1s, k2x, k2s, k3x, k3s, k4x, k4s;
  for (long long n = 0; n < steps; ++n) {
    const double t = t0 + static_cast<double>(n) * dt;
    ode_field(system, problem, t, x, s, k1x, k1s);
    ode_field(system, problem, t + 0.5 * dt, x + 0.5 * dt * k1x, s + 0.5 * dt * k1s, k2x, k2s);
    ode_field(system, problem, t + 0.5 * dt, x + 0.5 * dt * k2x, s + 0.5 * dt * k2s, k3x, k3s);
    ode_field(system, problem, t + dt, x + dt * k3x, s + dt * k3s, k4x, k4s);
    x += (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    s += (dt / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
    if (!x.allFinite() || !s.allFinite()) {
      throw DivergenceError(n + 1, to_string(system) + ": non-finite state");
    }
    if ((n + 1) % options.sample_every == 0 || n + 1 == steps) {
      traj.t.push_back(t0 + static_cast<double>(n + 1) * dt);
      traj.x.push_back(x);
      traj.second.push_back(s);
    }
  }
  return traj;
}

Vec matching_velocity(OdeSystem first_order, const Problem& problem, const Vec& x0, const Vec& v0,
                      double t0) {
  const Vec g = problem.gradient(x0);
  const double inv_sqrt_l = 1.0 / std::sqrt(problem.lipschitz());
  switch (first_order) {
    case OdeSystem::FirstOrderSC:
      return std::sqrt(problem.mu()) * (v0 - x0) - inv_sqrt_l * g;
    case OdeSystem::FirstOrderC:
      if (!(t0 > 0.0)) throw ConfigError("convex systems need t0 > 0");
      return (2.0 / t0) * (v0 - x0) - inv_sqrt_l * g;
    default:
      throw ConfigError("matching_velocity takes a first-order system");
  }
}

namespace {

double sc_energy(const Problem& problem, const Vec& x, const Vec& v) {
  return problem.gap(x) + 0.5 * problem.mu() * (v - problem.minimizer()).squaredNorm();
}

double c_energy(const Problem& problem, double t, const Vec& x, const Vec& v) {
  return t * t * problem.gap(x) + 2.0 * (v - problem.minimizer()).squaredNorm();
}

}  // namespace

double verify_continuous_sc_decay(const Trajectory& trajectory, const Problem& problem) {
  if (trajectory.system != OdeSystem::FirstOrderSC) {
    throw ConfigError("continuous SC decay check needs a first_order_sc trajectory");
  }
  if (trajectory.t.empty()) return 0.0;
  const double e0 = sc_energy(problem, trajectory.x[0], trajectory.second[0]);
  if (e0 == 0.0) return 0.0;
  const double sqrt_mu = std::sqrt(problem.mu());
  const double t0 = trajectory.t[0];
  double worst = 0.0;
  for (std::size_t i = 0; i < trajectory.t.size(); ++i) {
    const double e = sc_energy(problem, trajectory.x[i], trajectory.second[i]);
    worst = std::max(worst, e / (std::exp(-sqrt_mu * (trajectory.t[i] - t0)) * e0));
  }
  return worst;
}

double verify_continuous_c_rate(const Trajectory& trajectory, const Problem& problem) {
  if (trajectory.system != OdeSystem::FirstOrderC) {
    throw ConfigError("continuous convex rate check needs a first_order_c trajectory");
  }
  if (trajectory.t.empty()) return 0.0;
  const double scale = 2.0 * (trajectory.second[0] - problem.minimizer()).squaredNorm();
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < trajectory.t.size(); ++i) {
    const double t = trajectory.t[i];
    worst = std::max(worst, t * t * problem.gap(trajectory.x[i]) / scale);
  }
  return worst;
}

double max_lyapunov_increase(const Trajectory& trajectory, const Problem& problem) {
  const bool convex = trajectory.system == OdeSystem::FirstOrderC;
  if (!convex && trajectory.system != OdeSystem::FirstOrderSC) {
    throw ConfigError("Lyapunov monotonicity check needs a first-order trajectory");
  }
  double worst = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < trajectory.t.size(); ++i) {
    const double e = convex ? c_energy(problem, trajectory.t[i], trajectory.x[i], trajectory.second[i])
                            : sc_energy(problem, trajectory.x[i], trajectory.second[i]);
    if (i > 0) worst = std::max(worst, e - prev);
    prev = e;
  }
  return worst;
}

double verify_equivalence_first_second(OdeSystem first_order, const Problem& problem,
                                       const Vec& x0, const Vec& v0, double t_end, double dt,
                                       double t0, bool allow_fd_hessian) {
  OdeSystem second_order;
  if (first_order == OdeSystem::FirstOrderSC) {
    second_order = OdeSystem::SecondOrderSC;
  } else if (first_order == OdeSystem::FirstOrderC) {
    second_order = OdeSystem::SecondOrderC;
  } else {
    throw ConfigError("equivalence check takes a first-order system");
  }
  IntegrateOptions opts;
  opts.t0 = t0;
  opts.allow_fd_hessian = allow_fd_hessian;
  const Trajectory a = integrate(first_order, problem, x0, v0, t_end, dt, opts);
  const Vec xdot0 = matching_velocity(first_order, problem, x0, v0, t0);
  const Trajectory b = integrate(second_order, problem, x0, xdot0, t_end, dt, opts);
  double gap = 0.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) gap = std::max(gap, (a.x[i] - b.x[i]).norm());
  return gap;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope fit needs >= 2 points");
  double mx = 0.0;
  double my = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw ConfigError("slope fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

OrderEstimate verify_euler_consistency(OdeSystem first_order, const Problem& problem,
                                       const Vec& x0, double t_end, double h_bar) {
  const bool convex = first_order == OdeSystem::FirstOrderC;
  if (!convex && first_order != OdeSystem::FirstOrderSC) {
    throw ConfigError("Euler consistency takes a first-order system");
  }
  if (!(h_bar > 0.0) || h_bar > 1.0 / std::sqrt(problem.lipschitz()) * (1.0 + 1e-12)) {
    throw ConfigError("h_bar must lie in (0, 1/sqrt(L)]");
  }
  const double t0 = convex ? 2.0 * h_bar : 0.0;
  if (!(t_end > t0)) throw ConfigError("t_end must exceed the start time");

  IntegrateOptions opts;
  opts.t0 = t0;
  const double ref_dt = h_bar / 64.0;
  const Trajectory ref = integrate(first_order, problem, x0, x0, t_end, ref_dt, opts);
  const Vec& x_ref = ref.x.back();

  OrderEstimate est;
  for (double h : {h_bar, h_bar / 2.0, h_bar / 4.0}) {
    const auto n = static_cast<long long>(std::llround((t_end - t0) / h));
    NoisyGradientOracle oracle(problem, 0.0, NoiseKind::None, 0);
    IterateState s = initial_state(x0);
    for (long long k = 0; k < n; ++k) {
      if (convex) {
        s = step_asgd_c_threevar(s, oracle, h, t0 + static_cast<double>(k) * h);
      } else {
        s = step_asgd_sc_threevar(s, oracle, h);
      }
    }
    est.steps.push_back(h);
    est.errors.push_back((s.x - x_ref).norm());
  }
  est.order = log_log_slope(est.steps, est.errors);
  return est;
}

OrderEstimate rk4_self_convergence(OdeSystem system, const Problem& problem, const Vec& x0,
                                   const Vec& second0, double t_end, double dt, double t0) {
  IntegrateOptions opts;
  opts.t0 = t0;
  opts.sample_every = 1 << 30;
  const Trajectory ref = integrate(system, problem, x0, second0, t_end, dt / 64.0, opts);
  OrderEstimate est;
  for (double h : {dt, dt / 2.0, dt / 4.0}) {
    const Trajectory run = integrate(system, problem, x0, second0, t_end, h, opts);
    est.steps.push_back(h);
    est.errors.push_back((run.x.back() - ref.x.back()).norm() +
                         (run.second.back() - ref.second.back()).norm());
  }
  est.order = log_log_slope(est.steps, est.errors);
  return est;
}

}  // namespace asgd
