#pragma once

#include <cstdint>
#include <string>

namespace asgd {

enum class ScheduleKind {
  Constant,
  StronglyConvexDecay,
  ConvexPower,
  GdStronglyConvexDecay,
  GdConvexPower,
  AbstractDecay,
};

std::string to_string(ScheduleKind kind);

/// Kind-specific parameters. Only the fields relevant to a kind are read.
struct ScheduleParams {
  double h = 0.0;         // Constant
  double mu = 0.0;        // StronglyConvexDecay, GdStronglyConvexDecay
  double cond = 1.0;      // condition number L / mu
  double sigma2 = 0.0;    // noise variance bound
  double e0 = 0.0;        // initial Lyapunov value
  double c = 0.0;         // ConvexPower, GdConvexPower
  double exponent = 0.75; // ConvexPower, GdConvexPower
  double r_e = 0.0;       // AbstractDecay
  double l_e = 0.0;
  double g2bar = 1.0;
};

/// Learning-rate schedule h_k with the derived clock t_k and weights w_k.
///
/// The clock is the one-step-ahead cumulative sum t_k = h_0 + ... + h_{k+1},
/// defined for k >= -1 (so t_{-1} = h_0). For a constant step this gives
/// t_k = h (k + 2) and w_k = 2 h_k / t_k = 2 / (k + 2).
class Schedule {
 public:
  static Schedule constant(double h, double step_cap);
  /// h_k = 2 / (sqrt(mu) (k + k0)), k0 = max(2 sqrt(cond), 4 sigma2 / (mu e0)).
  static Schedule strongly_convex_decay(double mu, double cond, double sigma2, double e0);
  /// h_k = min(c / (k + 1)^exponent, step_cap); early terms above the cap are clamped.
  static Schedule convex_power(double c, double exponent, double step_cap);
  /// h_k = 2 / (mu (k + 1 / (alpha e0))), alpha = mu / (2 (cond + 1) sigma2).
  static Schedule gd_strongly_convex_decay(double mu, double cond, double sigma2, double e0,
                                           double step_cap);
  /// h_k = c / k^exponent for k >= 1 and h_0 = h_1.
  static Schedule gd_convex_power(double c, double exponent, double step_cap);
  /// h_k = 2 / (r_e (k + 1 / (alpha e0))), alpha = r_e^2 / (2 l_e g2bar^2 sigma2).
  static Schedule abstract_decay(double r_e, double l_e, double g2bar, double sigma2, double e0,
                                 double step_cap);

  ScheduleKind kind() const { return kind_; }
  const ScheduleParams& params() const { return params_; }
  double step_cap() const { return step_cap_; }

  double h(std::int64_t k) const;
  /// Accelerated clock t_k, k >= -1.
  double t(std::int64_t k) const;
  /// Gradient-descent clock h_0 + ... + h_{k-1} (zero at k = 0).
  double gd_time(std::int64_t k) const;
  /// 2 h_k / t_k.
  double w_c(std::int64_t k) const;

  /// True when the ConvexPower formula exceeded the cap at step k.
  bool clamped(std::int64_t k) const;

  /// k0 for StronglyConvexDecay; the offset 1 / (alpha e0) for the GD and
  /// abstract decays; zero otherwise.
  double offset() const { return offset_; }

  std::string describe() const;

 private:
  Schedule(ScheduleKind kind, ScheduleParams params, double step_cap, double offset);
  void validate() const;
  double raw_h(std::int64_t k) const;

  ScheduleKind kind_;
  ScheduleParams params_;
  double step_cap_;
  double offset_;
};

/// w = h sqrt(mu) / (1 + h sqrt(mu)).
double w_sc(double h, double mu);

/// 2 sigma2 / sqrt(mu L).
double e_crit(double sigma2, double mu, double lipschitz);

/// Number of constant 1/sqrt(L) steps needed to bring the Lyapunov value
/// from e0 below e_crit. Returns 0 when already below and 1 when mu == L
/// (the contraction factor is zero and one step suffices).
std::int64_t warmstart_steps(double e0, double e_crit, double mu, double lipschitz);

}  // namespace asgd
