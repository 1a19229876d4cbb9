#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "asgd/problems.hpp"
#include "asgd/rate_bound.hpp"

namespace asgd {

/// g(t, z, p) = g1(t, z) + g2(t, z) p with a scalar multiplier g2.
struct AffineField {
  std::string name;
  std::function<Vec(double, const Vec&)> g1;
  std::function<double(double, const Vec&)> g2;
  double g2_bar = 1.0;
  double lipschitz = 0.0;

  Vec operator()(double t, const Vec& z, const Vec& p) const { return g1(t, z) + g2(t, z) * p; }
};

/// A Lyapunov function E(t, z) with decay rate r_e, gradient-gap weight
/// a_e(t) and discrete smoothness constant l_e(t_next).
struct RateLyapunov {
  std::string name;
  std::function<double(double, const Vec&)> value;
  std::function<Vec(double, const Vec&)> grad;
  std::function<double(double, const Vec&)> dt;
  double r_e = 0.0;
  std::function<double(double)> a_e;
  std::function<double(double)> l_e;
};

/// Gradient descent: g = -p.
AffineField gd_field(const Problem& problem);

/// f - f* + mu/2 |z - x*|^2 with r_e = mu, a_e = 1, l_e = L + mu.
RateLyapunov gd_sc_lyapunov(const Problem& problem);

/// t (f - f*) + 1/2 |z - x*|^2 with r_e = 0, a_e(t) = t, l_e(t_next) = L t_next + 1.
RateLyapunov gd_c_lyapunov(const Problem& problem);

/// Returns the named instantiation ("gd_sc" or "gd_c").
RateLyapunov gd_lyapunov(const Problem& problem, const std::string& name);

struct SamplePoint {
  double t = 0.0;
  Vec z;
};

/// Uniform samples in the ball of the given radius around center, with t uniform in [0, t_max].
std::vector<SamplePoint> sample_ball(const Vec& center, double radius, double t_max, int count,
                                     std::uint64_t seed);

struct Certification {
  /// min over samples of rhs - lhs of the dissipation inequality.
  double worst_slack = 0.0;
  /// min over samples of E(t, z).
  double min_value = 0.0;
  bool passed = false;
};

/// Checks dt E + <grad E, g> <= -r_e E - a_e |g|^2 and E >= 0 at each sample,
/// with g = g(t, z, grad f(z)). Passes iff both hold with slack >= -1e-9.
Certification check_rate_lyapunov(const AffineField& field, const RateLyapunov& lyap,
                                  const Problem& problem, const std::vector<SamplePoint>& samples);

/// Max relative error of the analytic grad and dt of E against central differences.
double lyapunov_fd_check(const RateLyapunov& lyap, const std::vector<SamplePoint>& samples);

struct StepBound {
  double lhs = 0.0;
  double rhs = 0.0;
  double beta = 0.0;
  double margin = 0.0;
};

/// Largest h with h <= 2 a_e(t + h) / l_e(t + h); the step cap of one forward-Euler step from t.
double abstract_step_cap(const RateLyapunov& lyap, double t);

/// One perturbed forward-Euler step z_{k+1} = z_k + h g(t_k, z_k, grad f(z_k) + e).
/// lhs = E(t_k + h, z_{k+1}) - E(t_k, z_k); rhs = -h r_e E(t_k, z_k) + h beta with
/// beta = <grad E(t_k + h, z_k), g2 e> + l_e h <g + g2 e / 2, g2 e>.
/// Throws StepCapError when h exceeds abstract_step_cap.
StepBound abstract_step_bound(const AffineField& field, const RateLyapunov& lyap,
                              const Problem& problem, double t, const Vec& z, double h,
                              const Vec& e);

enum class ExpectationCase { RatePositive, RateZeroCase1, RateZeroCase2 };

std::string to_string(ExpectationCase kind);
ExpectationCase expectation_case_from_string(const std::string& name);

struct ExpectationParams {
  double e0 = 1.0;
  double sigma2 = 1.0;
  // RatePositive
  double r_e = 0.0;
  double l_e = 0.0;
  double g2_bar = 1.0;
  // RateZero cases: h_k = c / k^alpha
  double c = 0.0;
  double alpha = 0.75;
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
};

/// RatePositive: 1 / (alpha (k + 1 / (alpha e0))), alpha = r_e^2 / (2 l_e g2_bar^2 sigma2).
/// RateZeroCase1 (alpha in [2/3, 1)) and RateZeroCase2 (alpha in [3/4, 1)) bound
/// E[f(x_k)] - f* for k >= 2; the value at k = 1 is +inf.
RateBound abstract_expectation_curve(ExpectationCase kind, const ExpectationParams& params);

/// Expected-gap bound for SGD with h_k = c / k^alpha <= 1/L on a convex problem,
/// in the form displayed for gradient descent.
RateBound gd_convex_expectation_curve(double lipschitz, double c, double alpha, double e0,
                                      double sigma2);

}  // namespace asgd
