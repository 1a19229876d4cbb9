#include "asgd/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asgd/error.hpp"
#include "asgd/schedules.hpp"

namespace asgd {

namespace {

constexpr double kRelTol = 1e-9;

void require_full_trace(const Trace& trace, const Problem& problem) {
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const TraceRecord& r = trace.records[i];
    if (r.k != static_cast<std::int64_t>(i)) {
      throw ConfigError("verifier needs an unthinned trace starting at k = 0");
    }
    if (r.x.size() != problem.dim() || r.v.size() != problem.dim()) {
      throw ConfigError("verifier needs iterate vectors in the trace (record: {vectors: true})");
    }
    if (r.noise.size() != problem.dim()) throw ConfigError("trace has no noise record");
  }
}

void push(DissipationReport& report, std::int64_t k, double lhs, double rhs, double beta,
          double reference) {
  const double margin = rhs - lhs;
  report.lhs.push_back(lhs);
  report.bound_rhs.push_back(rhs);
  report.margin.push_back(margin);
  report.beta_noise.push_back(beta);
  if (report.margin.size() == 1 || margin < report.worst_margin) report.worst_margin = margin;
  if (!(margin >= -kRelTol * (1.0 + std::abs(reference)))) report.violated_steps.push_back(k);
}

}  // namespace

std::string to_string(LyapunovKind kind) {
  switch (kind) {
    case LyapunovKind::ScAccel:
      return "sc_accel";
    case LyapunovKind::CAccel:
      return "c_accel";
    case LyapunovKind::CGd:
      return "c_gd";
    case LyapunovKind::ScGd:
      return "sc_gd";
  }
  return "unknown";
}

double e_sc(const Problem& problem, const Vec& x, const Vec& v) {
  if (!(problem.mu() > 0.0)) throw ConfigError("e_sc needs mu > 0");
  return problem.gap(x) + 0.5 * problem.mu() * (v - problem.minimizer()).squaredNorm();
}

double e_ac_c(const Problem& problem, double t, const Vec& x, const Vec& v, double eps) {
  if (!(t >= eps && eps >= 0.0)) throw ConfigError("e_ac_c needs t >= eps >= 0");
  const double s = t - eps;
  return s * s * problem.gap(x) + 2.0 * (v - problem.minimizer()).squaredNorm();
}

double e_gd(const Problem& problem, LyapunovKind kind, double t, const Vec& x) {
  const double dist2 = (x - problem.minimizer()).squaredNorm();
  switch (kind) {
    case LyapunovKind::CGd:
      return t * problem.gap(x) + 0.5 * dist2;
    case LyapunovKind::ScGd:
      if (!(problem.mu() > 0.0)) throw ConfigError("e_gd(sc_gd) needs mu > 0");
      return problem.gap(x) + 0.5 * problem.mu() * dist2;
    default:
      throw ConfigError("e_gd takes c_gd or sc_gd");
  }
}

DissipationReport verify_sc_dissipation(const Trace& trace, const Problem& problem,
                                        ResidualSign sign) {
  require_full_trace(trace, problem);
  const double mu = problem.mu();
  if (!(mu > 0.0)) throw ConfigError("verify_sc_dissipation needs mu > 0");
  const double sqrt_mu = std::sqrt(mu);
  const double inv_sqrt_l = 1.0 / std::sqrt(problem.lipschitz());
  const double g_sign = sign == ResidualSign::Correct ? 1.0 : -1.0;
  const Vec& xstar = problem.minimizer();

  DissipationReport report;
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
    const TraceRecord& r = trace.records[i];
    const TraceRecord& n = trace.records[i + 1];
    const double h = r.h;
    const double w = w_sc(h, mu);
    const Vec y = (1.0 - w) * r.x + w * r.v;
    const Vec g = problem.gradient(y);
    const Vec& e = r.noise;
    const double beta = 2.0 * h * (g + 0.5 * e).dot(e) -
                        (sqrt_mu * (r.x - y + r.v - xstar) + g_sign * inv_sqrt_l * g).dot(e);
    const double e_k = e_sc(problem, r.x, r.v);
    const double e_next = e_sc(problem, n.x, n.v);
    push(report, r.k, e_next, (1.0 - h * sqrt_mu) * e_k + h * beta, beta, e_k);
  }
  return report;
}

DissipationReport verify_c_dissipation(const Trace& trace, const Problem& problem,
                                       ResidualSign sign) {
  require_full_trace(trace, problem);
  const double inv_sqrt_l = 1.0 / std::sqrt(problem.lipschitz());
  const double g_sign = sign == ResidualSign::Correct ? 1.0 : -1.0;
  const Vec& xstar = problem.minimizer();

  DissipationReport report;
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
    const TraceRecord& r = trace.records[i];
    const TraceRecord& n = trace.records[i + 1];
    const double h = r.h;
    const double t = r.t;
    const double t_prev = i == 0 ? 0.0 : trace.records[i - 1].t;
    const double w = 2.0 * h / t;
    const Vec y = (1.0 - w) * r.x + w * r.v;
    const Vec g = problem.gradient(y);
    const Vec& e = r.noise;
    const double beta = -t * (2.0 * (r.v - xstar) + g_sign * (t * inv_sqrt_l) * g).dot(e) +
                        2.0 * h * t * t * (g + 0.5 * e).dot(e);
    const double e_k = e_ac_c(problem, t_prev, r.x, r.v);
    const double e_next = e_ac_c(problem, t, n.x, n.v);
    push(report, r.k, e_next, e_k + h * beta, beta, e_k);
  }
  return report;
}

DissipationReport verify_gd_dissipation(const Trace& trace, const Problem& problem,
                                        LyapunovKind kind) {
  if (kind != LyapunovKind::CGd && kind != LyapunovKind::ScGd) {
    throw ConfigError("verify_gd_dissipation takes c_gd or sc_gd");
  }
  require_full_trace(trace, problem);
  const double mu = problem.mu();
  const double lip = problem.lipschitz();
  const Vec& xstar = problem.minimizer();

  DissipationReport report;
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
    const TraceRecord& r = trace.records[i];
    const TraceRecord& n = trace.records[i + 1];
    const double h = r.h;
    const Vec g = problem.gradient(r.x);
    const Vec& e = r.noise;
    const double quad = (g + 0.5 * e).dot(e);
    double beta = 0.0;
    double rhs = 0.0;
    double e_k = 0.0;
    double e_next = 0.0;
    if (kind == LyapunovKind::CGd) {
      const double t = r.t;
      const double t_next = t + h;
      beta = -(r.x - xstar + t_next * g).dot(e) + h * (lip * t_next + 1.0) * quad;
      e_k = e_gd(problem, kind, t, r.x);
      e_next = e_gd(problem, kind, t_next, n.x);
      rhs = e_k + h * beta;
    } else {
      beta = -(g + mu * (r.x - xstar)).dot(e) + h * (lip + mu) * quad;
      e_k = e_gd(problem, kind, 0.0, r.x);
      e_next = e_gd(problem, kind, 0.0, n.x);
      rhs = (1.0 - h * mu) * e_k + h * beta;
    }
    push(report, r.k, e_next, rhs, beta, e_k);
  }
  return report;
}

double three_point_inequality_check(const Problem& problem, const Vec& x, const Vec& y,
                                    const Vec& z) {
  const double rhs = problem.value(x) + problem.gradient(y).dot(z - x) +
                     0.5 * problem.lipschitz() * (z - y).squaredNorm();
  return rhs - problem.value(z);
}

}  // namespace asgd
