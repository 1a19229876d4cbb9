#pragma once

#include <string>
#include <vector>

#include "asgd/problems.hpp"

namespace asgd {

/// FirstOrderSC / FirstOrderC carry (x, v); SecondOrderSC / SecondOrderC
/// carry (x, xdot) and need Hessian-vector products.
enum class OdeSystem { FirstOrderSC, FirstOrderC, SecondOrderSC, SecondOrderC };

std::string to_string(OdeSystem system);
OdeSystem ode_system_from_string(const std::string& name);

bool is_convex_system(OdeSystem system);

struct Trajectory {
  OdeSystem system = OdeSystem::FirstOrderSC;
  std::vector<double> t;
  std::vector<Vec> x;
  /// v for first-order systems, xdot for second-order ones.
  std::vector<Vec> second;
};

struct IntegrateOptions {
  double t0 = 0.0;
  /// Keep every n-th step (the endpoint is always kept).
  int sample_every = 1;
  /// Allow the finite-difference Hessian fallback for second-order systems.
  bool allow_fd_hessian = true;
};

/// Vector field of the stacked state (x, second) at time t.
void ode_field(OdeSystem system, const Problem& problem, double t, const Vec& x,
               const Vec& second, Vec& dx, Vec& dsecond);

/// Classical fixed-step RK4 from t0 to t_end. Convex systems need t0 > 0.
/// Throws DivergenceError on a non-finite state.
Trajectory integrate(OdeSystem system, const Problem& problem, const Vec& x0, const Vec& second0,
                     double t_end, double dt, const IntegrateOptions& options = {});

/// Initial velocity of the second-order system matching first-order data (x0, v0).
Vec matching_velocity(OdeSystem first_order, const Problem& problem, const Vec& x0, const Vec& v0,
                      double t0);

/// max over samples of E(x, v) / (exp(-sqrt(mu) t) E(x0, v0)) with E = f - f* + mu/2 |v - x*|^2.
/// Zero when E(x0, v0) = 0.
double verify_continuous_sc_decay(const Trajectory& trajectory, const Problem& problem);

/// max over samples of t^2 (f(x) - f*) / (2 |v0 - x*|^2). Zero when v0 = x*.
double verify_continuous_c_rate(const Trajectory& trajectory, const Problem& problem);

/// Largest increase of the Lyapunov value between consecutive samples
/// (f - f* + mu/2 |v - x*|^2 for SC, t^2 (f - f*) + 2 |v - x*|^2 for C).
double max_lyapunov_increase(const Trajectory& trajectory, const Problem& problem);

/// Integrates a first-order system and its second-order counterpart from
/// matching data and returns max |x_first(t) - x_second(t)| over samples.
double verify_equivalence_first_second(OdeSystem first_order, const Problem& problem,
                                       const Vec& x0, const Vec& v0, double t_end, double dt,
                                       double t0 = 0.0, bool allow_fd_hessian = true);

struct OrderEstimate {
  std::vector<double> steps;
  std::vector<double> errors;
  double order = 0.0;
};

/// Runs the matching noiseless optimizer with constant h in {h_bar, h_bar/2, h_bar/4}
/// from x0 = v0 and fits the endpoint error against a fine RK4 reference.
/// The convex system uses the clock t_k = 2 h_bar + k h on all three runs.
OrderEstimate verify_euler_consistency(OdeSystem first_order, const Problem& problem,
                                       const Vec& x0, double t_end, double h_bar);

/// Endpoint errors of RK4 at dt, dt/2, dt/4 against a dt/64 reference and the fitted order.
OrderEstimate rk4_self_convergence(OdeSystem system, const Problem& problem, const Vec& x0,
                                   const Vec& second0, double t_end, double dt, double t0 = 0.0);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace asgd
