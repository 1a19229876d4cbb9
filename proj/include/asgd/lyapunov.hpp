#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asgd/optimizers.hpp"
#include "asgd/problems.hpp"

namespace asgd {

enum class LyapunovKind { ScAccel, CAccel, CGd, ScGd };

std::string to_string(LyapunovKind kind);

/// f(x) - f* + mu/2 |v - x*|^2.
double e_sc(const Problem& problem, const Vec& x, const Vec& v);

/// (t - eps)^2 (f(x) - f*) + 2 |v - x*|^2.
double e_ac_c(const Problem& problem, double t, const Vec& x, const Vec& v, double eps = 0.0);

/// CGd: t (f(x) - f*) + 1/2 |x - x*|^2. ScGd: f(x) - f* + mu/2 |x - x*|^2.
double e_gd(const Problem& problem, LyapunovKind kind, double t, const Vec& x);

struct DissipationReport {
  std::vector<double> lhs;
  std::vector<double> bound_rhs;
  std::vector<double> margin;
  std::vector<double> beta_noise;
  double worst_margin = 0.0;
  std::vector<std::int64_t> violated_steps;

  bool passed() const { return violated_steps.empty(); }
};

/// Flipping the sign of the gradient term inside the noise residual gives a
/// residual that no longer bounds the step; used as a negative control.
enum class ResidualSign { Correct, Flipped };

/// E_{k+1} <= (1 - h_k sqrt(mu)) E_k + h_k beta_k along a strongly convex
/// accelerated trace. w_k and y_k are recomputed from (x_k, v_k, h_k).
DissipationReport verify_sc_dissipation(const Trace& trace, const Problem& problem,
                                        ResidualSign sign = ResidualSign::Correct);

/// E_{k+1} <= E_k + h_k beta_k along a convex accelerated trace, with
/// E_k = t_{k-1}^2 (f(x_k) - f*) + 2 |v_k - x*|^2 and E_0 = 2 |v_0 - x*|^2.
DissipationReport verify_c_dissipation(const Trace& trace, const Problem& problem,
                                       ResidualSign sign = ResidualSign::Correct);

/// GD traces: E^c_{k+1} <= E^c_k + h_k beta_k (kind CGd, clock t_k = h_0 + ... + h_{k-1})
/// or E^sc_{k+1} <= (1 - h_k mu) E^sc_k + h_k beta_k (kind ScGd).
DissipationReport verify_gd_dissipation(const Trace& trace, const Problem& problem,
                                        LyapunovKind kind);

/// f(x) + <grad f(y), z - x> + L/2 |z - y|^2 - f(z); nonnegative for convex L-smooth f.
double three_point_inequality_check(const Problem& problem, const Vec& x, const Vec& y,
                                    const Vec& z);

}  // namespace asgd
