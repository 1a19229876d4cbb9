#include "asgd/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "asgd/error.hpp"

namespace asgd {

namespace {
constexpr double kCapSlack = 1e-12;
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Constant:
      return "constant";
    case ScheduleKind::StronglyConvexDecay:
      return "strongly_convex_decay";
    case ScheduleKind::ConvexPower:
      return "convex_power";
    case ScheduleKind::GdStronglyConvexDecay:
      return "gd_strongly_convex_decay";
    case ScheduleKind::GdConvexPower:
      return "gd_convex_power";
    case ScheduleKind::AbstractDecay:
      return "abstract_decay";
  }
  return "unknown";
}

Schedule::Schedule(ScheduleKind kind, ScheduleParams params, double step_cap, double offset)
    : kind_(kind), params_(params), step_cap_(step_cap), offset_(offset) {
  if (!(step_cap_ > 0.0)) throw ConfigError("step cap must be positive");
  validate();
}

void Schedule::validate() const {
  const double h0 = raw_h(0);
  if (!(h0 > 0.0) || !std::isfinite(h0)) {
    throw ConfigError(to_string(kind_) + ": first step must be positive and finite");
  }
  if (kind_ == ScheduleKind::ConvexPower) return;
  if (h0 > step_cap_ * (1.0 + kCapSlack)) {
    std::ostringstream os;
    os << to_string(kind_) << ": h_0 = " << h0 << " exceeds the step cap " << step_cap_;
    throw ConfigError(os.str());
  }
}

Schedule Schedule::constant(double h, double step_cap) {
  ScheduleParams p;
  p.h = h;
  return Schedule(ScheduleKind::Constant, p, step_cap, 0.0);
}

Schedule Schedule::strongly_convex_decay(double mu, double cond, double sigma2, double e0) {
  if (!(mu > 0.0)) throw ConfigError("strongly_convex_decay needs mu > 0");
  if (!(cond >= 1.0)) throw ConfigError("strongly_convex_decay needs cond >= 1");
  if (!(sigma2 >= 0.0)) throw ConfigError("strongly_convex_decay needs sigma2 >= 0");
  if (!(e0 > 0.0)) throw ConfigError("strongly_convex_decay needs e0 > 0");
  ScheduleParams p;
  p.mu = mu;
  p.cond = cond;
  p.sigma2 = sigma2;
  p.e0 = e0;
  const double k0 = std::max(2.0 * std::sqrt(cond), 4.0 * sigma2 / (mu * e0));
  const double cap = 1.0 / std::sqrt(mu * cond);
  return Schedule(ScheduleKind::StronglyConvexDecay, p, cap, k0);
}

Schedule Schedule::convex_power(double c, double exponent, double step_cap) {
  if (!(c > 0.0)) throw ConfigError("convex_power needs c > 0");
  if (!(exponent >= 2.0 / 3.0 && exponent < 1.0)) {
    throw ConfigError("convex_power exponent must lie in [2/3, 1)");
  }
  ScheduleParams p;
  p.c = c;
  p.exponent = exponent;
  return Schedule(ScheduleKind::ConvexPower, p, step_cap, 0.0);
}

Schedule Schedule::gd_strongly_convex_decay(double mu, double cond, double sigma2, double e0,
                                            double step_cap) {
  if (!(mu > 0.0)) throw ConfigError("gd_strongly_convex_decay needs mu > 0");
  if (!(sigma2 > 0.0)) throw ConfigError("gd_strongly_convex_decay needs sigma2 > 0");
  if (!(e0 > 0.0)) throw ConfigError("gd_strongly_convex_decay needs e0 > 0");
  ScheduleParams p;
  p.mu = mu;
  p.cond = cond;
  p.sigma2 = sigma2;
  p.e0 = e0;
  const double alpha = mu / (2.0 * (cond + 1.0) * sigma2);
  return Schedule(ScheduleKind::GdStronglyConvexDecay, p, step_cap, 1.0 / (alpha * e0));
}

Schedule Schedule::gd_convex_power(double c, double exponent, double step_cap) {
  if (!(c > 0.0)) throw ConfigError("gd_convex_power needs c > 0");
  if (!(exponent >= 2.0 / 3.0 && exponent < 1.0)) {
    throw ConfigError("gd_convex_power exponent must lie in [2/3, 1)");
  }
  ScheduleParams p;
  p.c = c;
  p.exponent = exponent;
  return Schedule(ScheduleKind::GdConvexPower, p, step_cap, 0.0);
}

Schedule Schedule::abstract_decay(double r_e, double l_e, double g2bar, double sigma2, double e0,
                                  double step_cap) {
  if (!(r_e > 0.0 && l_e > 0.0 && g2bar > 0.0 && sigma2 > 0.0 && e0 > 0.0)) {
    throw ConfigError("abstract_decay needs positive r_e, l_e, g2bar, sigma2 and e0");
  }
  ScheduleParams p;
  p.r_e = r_e;
  p.l_e = l_e;
  p.g2bar = g2bar;
  p.sigma2 = sigma2;
  p.e0 = e0;
  const double alpha = r_e * r_e / (2.0 * l_e * g2bar * g2bar * sigma2);
  return Schedule(ScheduleKind::AbstractDecay, p, step_cap, 1.0 / (alpha * e0));
}

double Schedule::raw_h(std::int64_t k) const {
  const double kk = static_cast<double>(k);
  switch (kind_) {
    case ScheduleKind::Constant:
      return params_.h;
    case ScheduleKind::StronglyConvexDecay:
      return 2.0 / (std::sqrt(params_.mu) * (kk + offset_));
    case ScheduleKind::ConvexPower:
      return params_.c / std::pow(kk + 1.0, params_.exponent);
    case ScheduleKind::GdStronglyConvexDecay:
      return 2.0 / (params_.mu * (kk + offset_));
    case ScheduleKind::GdConvexPower:
      return params_.c / std::pow(std::max(kk, 1.0), params_.exponent);
    case ScheduleKind::AbstractDecay:
      return 2.0 / (params_.r_e * (kk + offset_));
  }
  return 0.0;
}

double Schedule::h(std::int64_t k) const {
  if (k < 0) throw ConfigError("step index must be nonnegative");
  const double value = raw_h(k);
  if (kind_ == ScheduleKind::ConvexPower) return std::min(value, step_cap_);
  return value;
}

bool Schedule::clamped(std::int64_t k) const {
  return kind_ == ScheduleKind::ConvexPower && raw_h(k) > step_cap_;
}

double Schedule::t(std::int64_t k) const {
  if (k < -1) throw ConfigError("clock index must be >= -1");
  if (kind_ == ScheduleKind::Constant) return params_.h * static_cast<double>(k + 2);
  double sum = 0.0;
  for (std::int64_t i = 0; i <= k + 1; ++i) sum += h(i);
  return sum;
}

double Schedule::gd_time(std::int64_t k) const {
  if (k < 0) throw ConfigError("clock index must be nonnegative");
  if (kind_ == ScheduleKind::Constant) return params_.h * static_cast<double>(k);
  double sum = 0.0;
  for (std::int64_t i = 0; i < k; ++i) sum += h(i);
  return sum;
}

double Schedule::w_c(std::int64_t k) const { return 2.0 * h(k) / t(k); }

std::string Schedule::describe() const {
  std::ostringstream os;
  os.precision(10);
  os << to_string(kind_);
  switch (kind_) {
    case ScheduleKind::Constant:
      os << "(h=" << params_.h << ")";
      break;
    case ScheduleKind::StronglyConvexDecay:
      os << "(mu=" << params_.mu << ",cond=" << params_.cond << ",sigma2=" << params_.sigma2
         << ",e0=" << params_.e0 << ",k0=" << offset_ << ")";
      break;
    case ScheduleKind::ConvexPower:
    case ScheduleKind::GdConvexPower:
      os << "(c=" << params_.c << ",exponent=" << params_.exponent << ")";
      break;
    case ScheduleKind::GdStronglyConvexDecay:
      os << "(mu=" << params_.mu << ",cond=" << params_.cond << ",sigma2=" << params_.sigma2
         << ",e0=" << params_.e0 << ",offset=" << offset_ << ")";
      break;
    case ScheduleKind::AbstractDecay:
      os << "(r_e=" << params_.r_e << ",l_e=" << params_.l_e << ",g2bar=" << params_.g2bar
         << ",sigma2=" << params_.sigma2 << ",e0=" << params_.e0 << ")";
      break;
  }
  os << " cap=" << step_cap_;
  return os.str();
}

double w_sc(double h, double mu) {
  const double a = h * std::sqrt(mu);
  return a / (1.0 + a);
}

double e_crit(double sigma2, double mu, double lipschitz) {
  return 2.0 * sigma2 / std::sqrt(mu * lipschitz);
}

std::int64_t warmstart_steps(double e0, double e_crit_value, double mu, double lipschitz) {
  if (!(e0 > 0.0)) throw ConfigError("warmstart_steps needs e0 > 0");
  if (!(mu > 0.0 && mu <= lipschitz)) throw ConfigError("warmstart_steps needs 0 < mu <= L");
  if (e0 <= e_crit_value) return 0;
  if (!(e_crit_value > 0.0)) throw ConfigError("warmstart_steps needs e_crit > 0");
  if (mu == lipschitz) return 1;
  const double k = (std::log(e_crit_value) - std::log(2.0 * e0)) /
                   std::log(1.0 - std::sqrt(mu / lipschitz));
  return std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(k)));
}

}  // namespace asgd
