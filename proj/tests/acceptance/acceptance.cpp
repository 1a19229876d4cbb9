// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "asgd/abstract.hpp"
#include "asgd/config.hpp"
#include "asgd/harness.hpp"
#include "asgd/lyapunov.hpp"
#include "asgd/ode.hpp"

using namespace asgd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_threads = 1;

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

Vec vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

Problem quad(std::initializer_list<double> eig) {
  const Vec e = vec(eig);
  return make_quadratic(e, Vec::Zero(e.size()));
}

Problem logsumexp5() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat rows(8, 5);
  Vec offsets(8);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 5; ++j) rows(i, j) = normal(rng);
    offsets(i) = 0.5 * normal(rng);
  }
  return make_logsumexp(rows, offsets, 0.1);
}

double max_x_diff(const Trace& a, const Trace& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    m = std::max(m, (a.records[i].x - b.records[i].x).lpNorm<Eigen::Infinity>());
  }
  return m;
}

Trace run_once(OptimizerKind kind, const Problem& p, const Schedule& s, const Vec& x0,
               std::int64_t steps, double sigma2, std::uint64_t seed,
               const RunOptions& options = {}) {
  NoisyGradientOracle oracle(p, sigma2, sigma2 > 0.0 ? NoiseKind::SphereUniform : NoiseKind::None,
                             seed);
  return run(kind, oracle, s, x0, steps, options);
}

// 1
Outcome nesterov_sc() {
  double worst = 0.0;
  for (double cond : {1.0, 4.0, 100.0}) {
    const Problem p = quad({1.0, cond});
    const Schedule s = Schedule::constant(1.0 / std::sqrt(cond), 1.0 / std::sqrt(cond));
    const Vec x0 = vec({1.0, 1.0});
    const Trace a = run_once(OptimizerKind::AsgdScThreeVar, p, s, x0, 1000, 0.0, 1);
    const Trace b = run_once(OptimizerKind::NesterovScConstant, p, s, x0, 1000, 0.0, 1);
    worst = std::max(worst, max_x_diff(a, b));
  }
  return {worst <= 1e-12, fmt("max |x - x_nesterov| = %.2e over C_f in {1,4,100}", worst)};
}

// 2
Outcome nesterov_c() {
  double worst = 0.0;
  for (double cond : {1.0, 4.0, 100.0}) {
    const Problem p = quad({1.0, cond});
    const Schedule s = Schedule::constant(1.0 / std::sqrt(cond), 1.0 / std::sqrt(cond));
    const Vec x0 = vec({1.0, 1.0});
    const Trace a = run_once(OptimizerKind::AsgdCThreeVar, p, s, x0, 1000, 0.0, 1);
    const Trace b = run_once(OptimizerKind::NesterovCConstant, p, s, x0, 1000, 0.0, 1);
    worst = std::max(worst, max_x_diff(a, b));
  }
  return {worst <= 1e-12, fmt("max |x - x_nesterov| = %.2e", worst)};
}

// 3
Outcome eliminated_forms() {
  const Problem p = quad({1.0, 100.0});
  const Vec x0 = vec({1.0, 1.0});
  const Schedule sc = Schedule::strongly_convex_decay(1.0, 100.0, 1.0, 1.0);
  const Schedule cp = Schedule::convex_power(0.5 / std::sqrt(100.0), 0.75, 0.1);
  double sc_diff = 0.0;
  double c_diff = 0.0;
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    sc_diff = std::max(sc_diff, max_x_diff(run_once(OptimizerKind::AsgdScThreeVar, p, sc, x0, 1000,
                                                    1.0, seed),
                                           run_once(OptimizerKind::AsgdScEliminated, p, sc, x0,
                                                    1000, 1.0, seed)));
    c_diff = std::max(c_diff, max_x_diff(run_once(OptimizerKind::AsgdCThreeVar, p, cp, x0, 1000,
                                                  1.0, seed),
                                         run_once(OptimizerKind::AsgdCEliminated, p, cp, x0, 1000,
                                                  1.0, seed)));
  }
  return {sc_diff <= 1e-10 && c_diff <= 1e-10,
          fmt("strongly convex %.2e, convex %.2e", sc_diff, c_diff)};
}

// 4
Outcome deterministic_dissipation() {
  std::size_t violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  const std::vector<Problem> problems = {quad({1.0, 100.0}), logsumexp5()};
  for (const Problem& p : problems) {
    const Vec x0 = p.minimizer() + Vec::Ones(p.dim());
    const double h = 1.0 / std::sqrt(p.lipschitz());
    const Schedule s = Schedule::constant(h, h);
    const Trace a = run_once(OptimizerKind::AsgdScThreeVar, p, s, x0, 10000, 0.0, 1);
    const Trace b = run_once(OptimizerKind::AsgdCThreeVar, p, s, x0, 10000, 0.0, 1);
    const DissipationReport ra = verify_sc_dissipation(a, p);
    const DissipationReport rb = verify_c_dissipation(b, p);
    violations += ra.violated_steps.size() + rb.violated_steps.size();
    worst = std::min({worst, ra.worst_margin, rb.worst_margin});
  }
  return {violations == 0, fmt("%zu violated steps, worst margin %.2e", violations, worst)};
}

// 5
Outcome stochastic_dissipation() {
  std::size_t violations = 0;
  std::size_t control = 0;
  const std::vector<Problem> problems = {quad({1.0, 4.0}), logsumexp5()};
  for (const Problem& p : problems) {
    const Vec x0 = p.minimizer() + Vec::Ones(p.dim());
    const Schedule sc =
        Schedule::strongly_convex_decay(p.mu(), p.condition_number(), 1.0, e_sc(p, x0, x0));
    const Schedule cp = Schedule::convex_power(0.2, 0.75, 1.0 / std::sqrt(p.lipschitz()));
    for (std::uint64_t i = 0; i < 100; ++i) {
      const std::uint64_t seed = derive_seed(505, i);
      const Trace a = run_once(OptimizerKind::AsgdScThreeVar, p, sc, x0, 1000, 1.0, seed);
      const Trace b = run_once(OptimizerKind::AsgdCThreeVar, p, cp, x0, 1000, 1.0, seed);
      violations += verify_sc_dissipation(a, p).violated_steps.size();
      violations += verify_c_dissipation(b, p).violated_steps.size();
      if (i == 0) {
        control += verify_sc_dissipation(a, p, ResidualSign::Flipped).violated_steps.size();
      }
    }
  }
  return {violations == 0 && control > 0,
          fmt("%zu violations over 2 problems x 2 methods x 100 seeds x 1000 steps "
              "(flipped-residual control: %zu)",
              violations, control)};
}

RunConfig base_config(std::initializer_list<double> eig, std::initializer_list<double> x0) {
  RunConfig cfg;
  cfg.problem.kind = ProblemKind::Quadratic;
  cfg.problem.eigenvalues = vec(eig);
  cfg.problem.shift = Vec::Zero(cfg.problem.eigenvalues.size());
  cfg.noise.kind = NoiseKind::SphereUniform;
  cfg.noise.sigma2 = 1.0;
  cfg.x0.point = vec(x0);
  cfg.seeds = 1000;
  cfg.master_seed = 20240601;
  cfg.record = RecordPolicy{false, true};
  return cfg;
}

MatrixOptions matrix_options() {
  MatrixOptions o;
  o.threads = g_threads;
  return o;
}

// 6
Outcome constant_neighborhood() {
  RunConfig cfg = base_config({1.0, 4.0}, {1.0, 1.0});
  cfg.optimizer = OptimizerKind::AsgdScThreeVar;
  cfg.schedule.kind = ScheduleKind::Constant;
  cfg.schedule.h = "inv_sqrt_l";
  cfg.steps = 1000;
  const MatrixResult r = run_matrix(cfg, matrix_options());
  const Problem p = build_problem(cfg.problem);
  const BoundReport b = compare_to_bound(r.lyapunov, bound_for_config(cfg, p, r.x0, r.metas));
  return {b.pass_fraction >= 0.99,
          fmt("pass fraction %.4f (%zu/%zu), worst excess %.3e", b.pass_fraction, b.passed,
              b.steps, b.worst_excess)};
}

// 7
Outcome sc_scheduled() {
  RunConfig cfg = base_config({1.0, 4.0}, {1.0, 1.0});
  cfg.optimizer = OptimizerKind::AsgdScThreeVar;
  cfg.schedule.kind = ScheduleKind::StronglyConvexDecay;
  cfg.warmstart = true;
  cfg.steps = 10000;
  const MatrixResult r = run_matrix(cfg, matrix_options());
  const Problem p = build_problem(cfg.problem);
  const BoundReport b = compare_to_bound(r.lyapunov, bound_for_config(cfg, p, r.x0, r.metas));
  const RateFit fit = fit_rate(r.lyapunov, 100, 10000);
  std::int64_t switch_min = cfg.steps;
  std::int64_t switch_max = 0;
  for (const auto& m : r.metas) {
    switch_min = std::min(switch_min, m.switch_step);
    switch_max = std::max(switch_max, m.switch_step);
  }
  return {b.pass_fraction >= 0.99 && std::abs(fit.slope + 1.0) <= 0.15,
          fmt("pass fraction %.4f (%zu/%zu), slope %.3f +- %.3f, switch step in [%lld, %lld]",
              b.pass_fraction, b.passed, b.steps, fit.slope, fit.stderr_slope,
              static_cast<long long>(switch_min), static_cast<long long>(switch_max))};
}

// 8
Outcome convex_scheduled() {
  RunConfig cfg = base_config({0.1, 1.0}, {1.0, 1.0});
  cfg.optimizer = OptimizerKind::AsgdCThreeVar;
  cfg.schedule.kind = ScheduleKind::ConvexPower;
  cfg.schedule.c = "inv_sqrt_l";
  cfg.schedule.exponent = 0.75;
  cfg.steps = 10000;
  const MatrixResult r = run_matrix(cfg, matrix_options());
  const Problem p = build_problem(cfg.problem);
  const BoundReport b = compare_to_bound(r.f_gap, bound_for_config(cfg, p, r.x0, r.metas));
  const RateFit fit = fit_rate(r.f_gap, 100, 10000);
  return {b.pass_fraction >= 0.99 && fit.slope > -0.65 && fit.slope < -0.35,
          fmt("pass fraction %.4f (%zu/%zu), slope %.3f +- %.3f", b.pass_fraction, b.passed,
              b.steps, fit.slope, fit.stderr_slope)};
}

// 9
Outcome versus_sgd() {
  RunConfig acc = base_config({1.0, 100.0}, {0.5, 0.1});
  acc.optimizer = OptimizerKind::AsgdScThreeVar;
  acc.schedule.kind = ScheduleKind::StronglyConvexDecay;
  acc.warmstart = true;
  acc.steps = 10000;
  RunConfig sgd = acc;
  sgd.optimizer = OptimizerKind::PerturbedGd;
  sgd.schedule.kind = ScheduleKind::GdStronglyConvexDecay;
  sgd.gd_mode = GdMode::StronglyConvex;
  sgd.warmstart = false;
  const MatrixResult ra = run_matrix(acc, matrix_options());
  const MatrixResult rs = run_matrix(sgd, matrix_options());
  const double a = ra.f_gap.mean.back();
  const double s = rs.f_gap.mean.back();
  return {a < s, fmt("mean f gap at k=10^4: accelerated %.3e (se %.1e), sgd %.3e (se %.1e)", a,
                     ra.f_gap.se.back(), s, rs.f_gap.se.back())};
}

// 10
Outcome continuous_decay() {
  const Problem p = quad({1.0, 4.0});
  const Vec x0 = vec({1.0, 1.0});
  IntegrateOptions o;
  const Trajectory sc = integrate(OdeSystem::FirstOrderSC, p, x0, x0, 10.0, 1e-3, o);
  const double sc_ratio = verify_continuous_sc_decay(sc, p);
  o.t0 = 0.01;
  const Trajectory c = integrate(OdeSystem::FirstOrderC, p, x0, x0, 10.0, 1e-3, o);
  const double c_ratio = verify_continuous_c_rate(c, p);
  return {sc_ratio <= 1.0 + 1e-4 && c_ratio <= 1.0,
          fmt("max E(t)/(e^{-t sqrt(mu)} E0) = %.6f, max gap/(2|v0-x*|^2/t^2) = %.4f", sc_ratio,
              c_ratio)};
}

// 11
Outcome ode_equivalences() {
  const Problem p = quad({1.0, 4.0});
  const Vec x0 = vec({1.0, 1.0});
  const double eq_sc =
      verify_equivalence_first_second(OdeSystem::FirstOrderSC, p, x0, x0, 5.0, 1e-3);
  const double eq_c =
      verify_equivalence_first_second(OdeSystem::FirstOrderC, p, x0, x0, 5.0, 1e-3, 0.01);
  const OrderEstimate euler_sc = verify_euler_consistency(OdeSystem::FirstOrderSC, p, x0, 5.0, 0.01);
  const OrderEstimate euler_c = verify_euler_consistency(OdeSystem::FirstOrderC, p, x0, 5.0, 0.01);
  const OrderEstimate rk4 = rk4_self_convergence(OdeSystem::FirstOrderSC, p, x0, x0, 5.0, 0.1);
  const bool pass = eq_sc <= 1e-6 && eq_c <= 1e-6 && std::abs(euler_sc.order - 1.0) <= 0.2 &&
                    std::abs(euler_c.order - 1.0) <= 0.2 && std::abs(rk4.order - 4.0) <= 0.5;
  return {pass, fmt("first vs second order %.1e / %.1e, Euler order %.3f / %.3f, RK4 order %.3f",
                    eq_sc, eq_c, euler_sc.order, euler_c.order, rk4.order)};
}

bool same_value(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= 1e-12 * std::abs(b);
}

// 12
Outcome abstract_framework() {
  const Problem sc = logsumexp5();
  const Problem cq = quad({0.5, 2.0});
  const auto pts_sc = sample_ball(sc.minimizer(), 2.0, 10.0, 1000, 91);
  const auto pts_c = sample_ball(cq.minimizer(), 2.0, 10.0, 1000, 92);
  const Certification cert_sc =
      check_rate_lyapunov(gd_field(sc), gd_sc_lyapunov(sc), sc, pts_sc);
  const Certification cert_c = check_rate_lyapunov(gd_field(cq), gd_c_lyapunov(cq), cq, pts_c);

  double worst_margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(93);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const Problem* p : {&sc, &cq}) {
    const RateLyapunov lyap = p == &sc ? gd_sc_lyapunov(*p) : gd_c_lyapunov(*p);
    const auto& pts = p == &sc ? pts_sc : pts_c;
    for (const auto& s : pts) {
      const double cap = abstract_step_cap(lyap, s.t);
      Vec e(p->dim());
      for (int i = 0; i < p->dim(); ++i) e(i) = normal(rng);
      for (double frac : {0.25, 1.0}) {
        for (const Vec& noise : {Vec(Vec::Zero(p->dim())), e}) {
          const StepBound b = abstract_step_bound(gd_field(*p), lyap, *p, s.t, s.z, frac * cap, noise);
          worst_margin = std::min(worst_margin, b.margin);
        }
      }
    }
  }

  // Closed forms evaluated directly.
  bool curves = true;
  for (double k : {1.0, 10.0, 100.0}) {
    ExpectationParams pos;
    pos.e0 = 1.0;
    pos.sigma2 = 1.0;
    pos.r_e = 1.0;
    pos.l_e = 2.0;
    pos.g2_bar = 1.0;
    curves &= same_value(abstract_expectation_curve(ExpectationCase::RatePositive, pos)(k),
                         4.0 / (k + 4.0));

    const double e0 = 1.5;
    const double s2 = 0.7;
    const double c = 0.3;
    ExpectationParams z1;
    z1.e0 = e0;
    z1.sigma2 = s2;
    z1.c = c;
    z1.a1 = 0.4;
    z1.a2 = 0.9;
    z1.b1 = 1.2;
    for (double a : {2.0 / 3.0, 0.7}) {
      z1.alpha = a;
      double want;
      if (a == 2.0 / 3.0) {
        want = (e0 / (3 * c) + (2 * z1.a1 * c / 3 + z1.a2 * c * c / 2 * (1 + std::log(k))) * s2) /
               (z1.b1 * (std::pow(k, 1.0 / 3.0) - 1));
      } else {
        want = ((1 - a) / c * e0 +
                (z1.a1 * c * (1 - a) * a / (2 * a - 1) + z1.a2 * c * c * (3 * a - 1) / (2 * (3 * a - 2))) *
                    s2) /
               (z1.b1 * (std::pow(k, 1 - a) - 1));
      }
      if (k == 1.0) want = std::numeric_limits<double>::infinity();
      const double got = abstract_expectation_curve(ExpectationCase::RateZeroCase1, z1)(k);
      curves &= same_value(got, want);
    }

    ExpectationParams z2;
    z2.e0 = e0;
    z2.sigma2 = s2;
    z2.c = c;
    z2.a3 = 0.8;
    z2.b2 = 2.5;
    for (double a : {0.75, 0.85}) {
      z2.alpha = a;
      double want;
      if (a == 0.75) {
        want = (e0 / (16 * c * c) + z2.a3 * c * c * s2 / 2 * (1 + std::log(k))) /
               (z2.b2 * std::pow(std::pow(k, 0.25) - 1, 2));
      } else {
        want = ((1 - a) * (1 - a) / (c * c) * e0 + z2.a3 * c * c * (4 * a - 2) * s2 / (2 * (4 * a - 3))) /
               (z2.b2 * std::pow(std::pow(k, 1 - a) - 1, 2));
      }
      if (k == 1.0) want = std::numeric_limits<double>::infinity();
      const double got = abstract_expectation_curve(ExpectationCase::RateZeroCase2, z2)(k);
      curves &= same_value(got, want);
    }
  }

  const bool pass = cert_sc.passed && cert_c.passed && cert_sc.worst_slack >= -1e-9 &&
                    cert_c.worst_slack >= -1e-9 && worst_margin >= 0.0 && curves;
  return {pass, fmt("slack E^sc %.2e, E^c %.2e; min step margin %.2e; closed forms %s",
                    cert_sc.worst_slack, cert_c.worst_slack, worst_margin,
                    curves ? "match" : "differ")};
}

struct Criterion {
  int id;
  const char* title;
  double time_limit;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  g_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      g_threads = std::max(1, std::atoi(argv[++i]));
    } else {
      only.push_back(std::atoi(argv[i]));
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> criteria = {
      {1, "Nesterov reduction, strongly convex", 1.0, nesterov_sc},
      {2, "Nesterov reduction, convex", 1.0, nesterov_c},
      {3, "eliminated vs three-variable forms", 2.0, eliminated_forms},
      {4, "deterministic dissipation", 5.0, deterministic_dissipation},
      {5, "stochastic per-step inequality", 10.0, stochastic_dissipation},
      {6, "constant-step neighborhood", 30.0, constant_neighborhood},
      {7, "strongly convex scheduled rate", 120.0, sc_scheduled},
      {8, "convex scheduled rate", 120.0, convex_scheduled},
      {9, "acceleration vs SGD baseline", inf, versus_sgd},
      {10, "continuous-time decay", 5.0, continuous_decay},
      {11, "ODE equivalences and orders", inf, ode_equivalences},
      {12, "abstract framework", inf, abstract_framework},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.time_limit;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s criterion %2d %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs, in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
