#include "asgd/abstract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "asgd/error.hpp"

namespace asgd {

namespace {
constexpr double kSlackTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

AffineField gd_field(const Problem& problem) {
  AffineField f;
  f.name = "gd";
  const int dim = problem.dim();
  f.g1 = [dim](double, const Vec&) { return Vec::Zero(dim); };
  f.g2 = [](double, const Vec&) { return -1.0; };
  f.g2_bar = 1.0;
  f.lipschitz = problem.lipschitz();
  return f;
}

RateLyapunov gd_sc_lyapunov(const Problem& problem) {
  if (!(problem.mu() > 0.0)) throw ConfigError("gd_sc Lyapunov function needs mu > 0");
  RateLyapunov e;
  e.name = "gd_sc";
  const double mu = problem.mu();
  const double lip = problem.lipschitz();
  e.value = [problem, mu](double, const Vec& z) {
    return problem.gap(z) + 0.5 * mu * (z - problem.minimizer()).squaredNorm();
  };
  e.grad = [problem, mu](double, const Vec& z) {
    return Vec(problem.gradient(z) + mu * (z - problem.minimizer()));
  };
  e.dt = [](double, const Vec&) { return 0.0; };
  e.r_e = mu;
  e.a_e = [](double) { return 1.0; };
  e.l_e = [lip, mu](double) { return lip + mu; };
  return e;
}

RateLyapunov gd_c_lyapunov(const Problem& problem) {
  RateLyapunov e;
  e.name = "gd_c";
  const double lip = problem.lipschitz();
  e.value = [problem](double t, const Vec& z) {
    return t * problem.gap(z) + 0.5 * (z - problem.minimizer()).squaredNorm();
  };
  e.grad = [problem](double t, const Vec& z) {
    return Vec(t * problem.gradient(z) + (z - problem.minimizer()));
  };
  e.dt = [problem](double, const Vec& z) { return problem.gap(z); };
  e.r_e = 0.0;
  e.a_e = [](double t) { return t; };
  e.l_e = [lip](double t_next) { return lip * t_next + 1.0; };
  return e;
}

RateLyapunov gd_lyapunov(const Problem& problem, const std::string& name) {
  if (name == "gd_sc") return gd_sc_lyapunov(problem);
  if (name == "gd_c") return gd_c_lyapunov(problem);
  throw ConfigError("unknown Lyapunov instantiation '" + name + "'");
}

std::vector<SamplePoint> sample_ball(const Vec& center, double radius, double t_max, int count,
                                     std::uint64_t seed) {
  if (count < 0) throw ConfigError("sample count must be nonnegative");
  if (!(radius >= 0.0) || !(t_max >= 0.0)) throw ConfigError("radius and t_max must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto dim = center.size();
  std::vector<SamplePoint> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec d(dim);
    for (Eigen::Index j = 0; j < dim; ++j) d(j) = normal(rng);
    const double n = d.norm();
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(dim));
    SamplePoint p;
    p.z = n > 0.0 ? Vec(center + (r / n) * d) : center;
    p.t = t_max * unit(rng);
    out.push_back(std::move(p));
  }
  return out;
}

Certification check_rate_lyapunov(const AffineField& field, const RateLyapunov& lyap,
                                  const Problem& problem, const std::vector<SamplePoint>& samples) {
  Certification c;
  c.worst_slack = kInf;
  c.min_value = kInf;
  for (const SamplePoint& s : samples) {
    const Vec g = field(s.t, s.z, problem.gradient(s.z));
    const double e = lyap.value(s.t, s.z);
    const double lhs = lyap.dt(s.t, s.z) + lyap.grad(s.t, s.z).dot(g);
    const double rhs = -lyap.r_e * e - lyap.a_e(s.t) * g.squaredNorm();
    c.worst_slack = std::min(c.worst_slack, rhs - lhs);
    c.min_value = std::min(c.min_value, e);
  }
  if (samples.empty()) {
    c.worst_slack = 0.0;
    c.min_value = 0.0;
  }
  c.passed = c.worst_slack >= -kSlackTol && c.min_value >= -kSlackTol;
  return c;
}

double lyapunov_fd_check(const RateLyapunov& lyap, const std::vector<SamplePoint>& samples) {
  double worst = 0.0;
  for (const SamplePoint& s : samples) {
    const double eps = 1e-5 * (1.0 + s.z.norm());
    const Vec grad = lyap.grad(s.t, s.z);
    Vec fd(s.z.size());
    for (Eigen::Index i = 0; i < s.z.size(); ++i) {
      Vec zp = s.z;
      Vec zm = s.z;
      zp(i) += eps;
      zm(i) -= eps;
      fd(i) = (lyap.value(s.t, zp) - lyap.value(s.t, zm)) / (2.0 * eps);
    }
    worst = std::max(worst, (fd - grad).norm() / (1.0 + grad.norm()));
    const double et = 1e-5 * (1.0 + std::abs(s.t));
    const double fd_t = (lyap.value(s.t + et, s.z) - lyap.value(s.t - et, s.z)) / (2.0 * et);
    const double dt = lyap.dt(s.t, s.z);
    worst = std::max(worst, std::abs(fd_t - dt) / (1.0 + std::abs(dt)));
  }
  return worst;
}

double abstract_step_cap(const RateLyapunov& lyap, double t) {
  const auto excess = [&](double h) { return h - 2.0 * lyap.a_e(t + h) / lyap.l_e(t + h); };
  if (excess(0.0) > 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (excess(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return kInf;
  }
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) <= 0.0 ? lo : hi) = mid;
  }
  return lo;
}

StepBound abstract_step_bound(const AffineField& field, const RateLyapunov& lyap,
                              const Problem& problem, double t, const Vec& z, double h,
                              const Vec& e) {
  if (!(h > 0.0)) throw ConfigError("step must be positive");
  const double cap = abstract_step_cap(lyap, t);
  if (h > cap * (1.0 + 1e-12)) {
    throw StepCapError("abstract step " + std::to_string(h) + " exceeds the cap " +
                       std::to_string(cap));
  }
  const double t_next = t + h;
  const Vec grad_f = problem.gradient(z);
  const Vec g = field(t, z, grad_f);
  const Vec g2e = field.g2(t, z) * e;
  const Vec z_next = z + h * (g + g2e);
  const double e_k = lyap.value(t, z);

  StepBound b;
  b.lhs = lyap.value(t_next, z_next) - e_k;
  b.beta = lyap.grad(t_next, z).dot(g2e) + lyap.l_e(t_next) * h * (g + 0.5 * g2e).dot(g2e);
  b.rhs = -h * lyap.r_e * e_k + h * b.beta;
  b.margin = b.rhs - b.lhs;
  return b;
}

std::string to_string(ExpectationCase kind) {
  switch (kind) {
    case ExpectationCase::RatePositive:
      return "rate_positive";
    case ExpectationCase::RateZeroCase1:
      return "rate_zero_case1";
    case ExpectationCase::RateZeroCase2:
      return "rate_zero_case2";
  }
  return "unknown";
}

ExpectationCase expectation_case_from_string(const std::string& name) {
  for (auto k : {ExpectationCase::RatePositive, ExpectationCase::RateZeroCase1,
                 ExpectationCase::RateZeroCase2}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown expectation case '" + name + "'");
}

namespace {

bool near(double a, double b) { return std::abs(a - b) < 1e-12; }

}  // namespace

RateBound abstract_expectation_curve(ExpectationCase kind, const ExpectationParams& p) {
  if (!(p.e0 > 0.0) || !(p.sigma2 > 0.0)) throw ConfigError("e0 and sigma2 must be positive");
  RateBound b;
  b.label = to_string(kind);
  switch (kind) {
    case ExpectationCase::RatePositive: {
      if (!(p.r_e > 0.0 && p.l_e > 0.0 && p.g2_bar > 0.0)) {
        throw ConfigError("rate_positive needs r_e, l_e, g2_bar > 0");
      }
      const double alpha = p.r_e * p.r_e / (2.0 * p.l_e * p.g2_bar * p.g2_bar * p.sigma2);
      const double offset = 1.0 / (alpha * p.e0);
      b.source = "expectation bound, positive rate";
      b.value = [alpha, offset](double k) { return 1.0 / (alpha * (k + offset)); };
      return b;
    }
    case ExpectationCase::RateZeroCase1: {
      const double a = p.alpha;
      if (!(a >= 2.0 / 3.0 - 1e-12 && a < 1.0)) {
        throw ConfigError("rate_zero_case1 needs alpha in [2/3, 1)");
      }
      if (!(p.a1 >= 0.0 && p.a2 >= 0.0 && p.b1 > 0.0 && p.c > 0.0) || p.a3 != 0.0 ||
          p.b2 != 0.0) {
        throw ConfigError("rate_zero_case1 needs a1, a2 >= 0, b1, c > 0 and a3 = b2 = 0");
      }
      b.source = "expectation bound, zero rate, linear weights";
      if (near(a, 2.0 / 3.0)) {
        b.value = [p](double k) {
          const double num = p.e0 / (3.0 * p.c) +
                             (2.0 * p.a1 * p.c / 3.0 +
                              0.5 * p.a2 * p.c * p.c * (1.0 + std::log(k))) *
                                 p.sigma2;
          const double den = p.b1 * (std::cbrt(k) - 1.0);
          return den > 0.0 ? num / den : kInf;
        };
      } else {
        b.value = [p, a](double k) {
          const double num = (1.0 - a) / p.c * p.e0 +
                             (p.a1 * p.c * (1.0 - a) * a / (2.0 * a - 1.0) +
                              p.a2 * p.c * p.c * (3.0 * a - 1.0) / (2.0 * (3.0 * a - 2.0))) *
                                 p.sigma2;
          const double den = p.b1 * (std::pow(k, 1.0 - a) - 1.0);
          return den > 0.0 ? num / den : kInf;
        };
      }
      return b;
    }
    case ExpectationCase::RateZeroCase2: {
      const double a = p.alpha;
      if (!(a >= 0.75 - 1e-12 && a < 1.0)) {
        throw ConfigError("rate_zero_case2 needs alpha in [3/4, 1)");
      }
      if (!(p.a3 > 0.0 && p.b2 > 0.0 && p.c > 0.0) || p.a1 != 0.0 || p.a2 != 0.0 ||
          p.b1 != 0.0) {
        throw ConfigError("rate_zero_case2 needs a3, b2, c > 0 and a1 = a2 = b1 = 0");
      }
      b.source = "expectation bound, zero rate, quadratic weights";
      if (near(a, 0.75)) {
        b.value = [p](double k) {
          const double num = p.e0 / (16.0 * p.c * p.c) +
                             0.5 * p.a3 * p.c * p.c * p.sigma2 * (1.0 + std::log(k));
          const double root = std::pow(k, 0.25) - 1.0;
          const double den = p.b2 * root * root;
          return den > 0.0 ? num / den : kInf;
        };
      } else {
        b.value = [p, a](double k) {
          const double num = (1.0 - a) * (1.0 - a) / (p.c * p.c) * p.e0 +
                             p.a3 * p.c * p.c * (4.0 * a - 2.0) * p.sigma2 / (2.0 * (4.0 * a - 3.0));
          const double root = std::pow(k, 1.0 - a) - 1.0;
          const double den = p.b2 * root * root;
          return den > 0.0 ? num / den : kInf;
        };
      }
      return b;
    }
  }
  throw ConfigError("unknown expectation case");
}

RateBound gd_convex_expectation_curve(double lipschitz, double c, double alpha, double e0,
                                      double sigma2) {
  if (!(alpha >= 2.0 / 3.0 - 1e-12 && alpha < 1.0)) {
    throw ConfigError("gd convex curve needs alpha in [2/3, 1)");
  }
  if (!(c > 0.0) || c > 1.0 / lipschitz * (1.0 + 1e-12)) {
    throw ConfigError("gd convex curve needs 0 < c <= 1/L");
  }
  RateBound b;
  b.label = "gd_convex";
  b.source = "expectation bound for SGD, convex";
  if (near(alpha, 2.0 / 3.0)) {
    b.value = [=](double k) {
      const double num =
          e0 / (3.0 * c) + (3.0 * c + lipschitz * c * c * (1.0 + std::log(k))) * sigma2 / 2.0;
      const double den = std::cbrt(k) - 1.0;
      return den > 0.0 ? num / den : kInf;
    };
  } else {
    b.value = [=](double k) {
      const double num = (1.0 - alpha) / c * e0 +
                         lipschitz * c * c * (3.0 * alpha - 1.0) * sigma2 /
                             (2.0 * (3.0 * alpha - 2.0));
      const double den = std::pow(k, 1.0 - alpha) - 1.0;
      return den > 0.0 ? num / den : kInf;
    };
  }
  return b;
}

}  // namespace asgd
