#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "asgd/abstract.hpp"
#include "asgd/config.hpp"
#include "asgd/error.hpp"
#include "asgd/harness.hpp"
#include "asgd/lyapunov.hpp"
#include "asgd/ode.hpp"
#include "asgd/trace_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  int seeds = 0;
  long long master_seed = -1;
  int threads = 1;
};

asgd::RunConfig load(const Common& c) {
  asgd::RunConfig cfg = asgd::load_config(c.config);
  if (c.seeds > 0) cfg.seeds = c.seeds;
  if (c.master_seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(c.master_seed);
  return cfg;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw asgd::ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

json bound_report_json(const asgd::BoundReport& r) {
  return {{"bound", r.label},
          {"steps", r.steps},
          {"passed", r.passed},
          {"pass_fraction", r.pass_fraction},
          {"worst_excess", r.worst_excess},
          {"flagged", r.flagged}};
}

void print_constants(const asgd::RunConfig& cfg, const asgd::Problem& problem, const asgd::Vec& x0,
                     const asgd::Schedule& schedule) {
  std::printf("problem %s dim=%d mu=%.6g L=%.6g\n", problem.name().c_str(), problem.dim(),
              problem.mu(), problem.lipschitz());
  std::printf("optimizer %s schedule %s\n", asgd::to_string(cfg.optimizer).c_str(),
              schedule.describe().c_str());
  const double sigma2 = cfg.noise.kind == asgd::NoiseKind::None ? 0.0 : cfg.noise.sigma2;
  if (problem.mu() > 0.0 && sigma2 > 0.0) {
    const double e0 = asgd::initial_lyapunov(cfg.optimizer, problem, x0);
    const double ec = asgd::e_crit(sigma2, problem.mu(), problem.lipschitz());
    std::printf("E0=%.6g E_crit=%.6g K=%lld k0=%.6g\n", e0, ec,
                static_cast<long long>(
                    asgd::warmstart_steps(e0, ec, problem.mu(), problem.lipschitz())),
                schedule.offset());
  }
}

int cmd_run(const Common& c, int write_traces, bool check, double min_fraction) {
  asgd::RunConfig cfg = load(c);
  const asgd::Problem problem = asgd::build_problem(cfg.problem);
  const asgd::Vec x0 = asgd::resolve_x0(cfg.x0, problem);
  print_constants(cfg, problem, x0, asgd::build_schedule(cfg, problem, x0));

  asgd::MatrixOptions options;
  options.threads = c.threads;
  options.keep_traces = write_traces > 0;
  const asgd::MatrixResult result = asgd::run_matrix(cfg, options);

  fs::create_directories(c.out);
  asgd::write_aggregate_csv((fs::path(c.out) / "aggregate_f_gap.csv").string(), result.f_gap);
  asgd::write_aggregate_csv(
      (fs::path(c.out) / ("aggregate_" + result.lyapunov.observable + ".csv")).string(),
      result.lyapunov);
  for (int i = 0; i < write_traces && i < static_cast<int>(result.traces.size()); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "trace_%04d.csv", i);
    asgd::write_trace_csv((fs::path(c.out) / name).string(), result.traces[i]);
  }

  json report = {{"name", cfg.name},
                 {"seeds", cfg.seeds},
                 {"master_seed", cfg.master_seed},
                 {"steps", cfg.steps},
                 {"e0", result.e0}};
  bool ok = true;
  try {
    const asgd::RateBound bound = asgd::bound_for_config(cfg, problem, x0, result.metas);
    const std::string obs = asgd::bound_observable(cfg, problem);
    const asgd::AggregateCurve& curve = obs == "f_gap" ? result.f_gap : result.lyapunov;
    const asgd::BoundReport r = asgd::compare_to_bound(curve, bound);
    report["bound_check"] = bound_report_json(r);
    report["bound_check"]["observable"] = obs;
    std::printf("bound %s on %s: pass fraction %.4f (%zu/%zu)\n", r.label.c_str(), obs.c_str(),
                r.pass_fraction, r.passed, r.steps);
    std::ofstream bout(fs::path(c.out) / "bound.csv");
    asgd::write_bound_csv(bout, bound, curve.k);
    if (check) ok = r.pass_fraction >= min_fraction;
  } catch (const asgd::ConfigError& e) {
    report["bound_check"] = nullptr;
    if (check) {
      std::fprintf(stderr, "%s\n", e.what());
      ok = false;
    }
  }
  report["ok"] = ok;
  write_json(fs::path(c.out) / "report.json", report);
  return ok ? 0 : 1;
}

int cmd_verify(const Common& c, const std::string& trace_path, std::string kind) {
  const asgd::RunConfig cfg = load(c);
  const asgd::Problem problem = asgd::build_problem(cfg.problem);
  const asgd::Trace trace = asgd::read_trace_csv(trace_path);
  if (kind.empty()) {
    if (asgd::is_gd_kind(cfg.optimizer)) {
      kind = cfg.gd_mode == asgd::GdMode::Convex ? "gd_c" : "gd_sc";
    } else {
      kind = asgd::is_strongly_convex_kind(cfg.optimizer) ? "sc" : "c";
    }
  }
  asgd::DissipationReport r;
  if (kind == "sc") {
    r = asgd::verify_sc_dissipation(trace, problem);
  } else if (kind == "c") {
    r = asgd::verify_c_dissipation(trace, problem);
  } else if (kind == "gd_c") {
    r = asgd::verify_gd_dissipation(trace, problem, asgd::LyapunovKind::CGd);
  } else if (kind == "gd_sc") {
    r = asgd::verify_gd_dissipation(trace, problem, asgd::LyapunovKind::ScGd);
  } else {
    throw asgd::ConfigError("unknown dissipation kind '" + kind + "'");
  }
  const json report = {{"kind", kind},
                       {"steps", r.lhs.size()},
                       {"worst_margin", r.worst_margin},
                       {"violated_steps", r.violated_steps},
                       {"passed", r.passed()}};
  std::cout << report.dump(2) << '\n';
  return r.passed() ? 0 : 1;
}

int cmd_bounds(const Common& c) {
  asgd::RunConfig cfg = load(c);
  const asgd::Problem problem = asgd::build_problem(cfg.problem);
  const asgd::Vec x0 = asgd::resolve_x0(cfg.x0, problem);
  std::vector<asgd::TraceMeta> metas;
  if (cfg.warmstart) {
    asgd::MatrixOptions options;
    options.threads = c.threads;
    metas = asgd::run_matrix(cfg, options).metas;
  }
  const asgd::RateBound bound = asgd::bound_for_config(cfg, problem, x0, metas);
  std::vector<std::int64_t> grid;
  for (std::int64_t k = 0; k <= cfg.steps; ++k) {
    if (asgd::keep_record(k, cfg.steps)) grid.push_back(k);
  }
  fs::create_directories(c.out);
  std::ofstream out(fs::path(c.out) / "bound.csv");
  asgd::write_bound_csv(out, bound, grid);
  std::printf("%s (%s) -> %s\n", bound.label.c_str(), bound.source.c_str(),
              (fs::path(c.out) / "bound.csv").string().c_str());
  return 0;
}

int cmd_fit(const std::string& path, long long k_min, long long k_max, double lo, double hi) {
  const asgd::AggregateCurve curve = asgd::read_aggregate_csv(path);
  const asgd::RateFit fit = asgd::fit_rate(curve, k_min, k_max);
  const bool ok = fit.slope > lo && fit.slope < hi;
  const json report = {{"observable", curve.observable},
                       {"slope", fit.slope},
                       {"stderr", fit.stderr_slope},
                       {"points", fit.points},
                       {"within", {lo, hi}},
                       {"passed", ok}};
  std::cout << report.dump(2) << '\n';
  return ok ? 0 : 1;
}

int cmd_ode(const Common& c, const std::string& system_name, double dt, double t_end, double t0,
            int sample_every) {
  const asgd::RunConfig cfg = load(c);
  const asgd::Problem problem = asgd::build_problem(cfg.problem);
  const asgd::Vec x0 = asgd::resolve_x0(cfg.x0, problem);
  const asgd::OdeSystem system = asgd::ode_system_from_string(system_name);
  const bool convex = asgd::is_convex_system(system);
  asgd::IntegrateOptions options;
  options.t0 = convex ? t0 : 0.0;
  options.sample_every = sample_every;
  asgd::Vec second = x0;
  if (system == asgd::OdeSystem::SecondOrderSC) {
    second = asgd::matching_velocity(asgd::OdeSystem::FirstOrderSC, problem, x0, x0, options.t0);
  } else if (system == asgd::OdeSystem::SecondOrderC) {
    second = asgd::matching_velocity(asgd::OdeSystem::FirstOrderC, problem, x0, x0, options.t0);
  }
  const asgd::Trajectory traj = asgd::integrate(system, problem, x0, second, t_end, dt, options);

  fs::create_directories(c.out);
  std::ofstream out(fs::path(c.out) / ("ode_" + system_name + ".csv"));
  out << "t,f_gap";
  for (int i = 0; i < problem.dim(); ++i) out << ",x_" << i;
  for (int i = 0; i < problem.dim(); ++i) out << ",s_" << i;
  out << '\n';
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    out << asgd::format_double(traj.t[i]) << ',' << asgd::format_double(problem.gap(traj.x[i]));
    for (int j = 0; j < problem.dim(); ++j) out << ',' << asgd::format_double(traj.x[i](j));
    for (int j = 0; j < problem.dim(); ++j) out << ',' << asgd::format_double(traj.second[i](j));
    out << '\n';
  }

  json report = {{"system", system_name}, {"samples", traj.t.size()}};
  bool ok = true;
  if (system == asgd::OdeSystem::FirstOrderSC) {
    const double ratio = asgd::verify_continuous_sc_decay(traj, problem);
    report["decay_ratio"] = ratio;
    ok = ratio <= 1.0 + 1e-4;
  } else if (system == asgd::OdeSystem::FirstOrderC) {
    const double ratio = asgd::verify_continuous_c_rate(traj, problem);
    report["rate_ratio"] = ratio;
    ok = ratio <= 1.0;
  }
  report["passed"] = ok;
  std::cout << report.dump(2) << '\n';
  return ok ? 0 : 1;
}

int cmd_abstract(const Common& c, const std::string& lyap_name, int samples, double radius,
                 double t_max, long long seed) {
  const asgd::RunConfig cfg = load(c);
  const asgd::Problem problem = asgd::build_problem(cfg.problem);
  const asgd::AffineField field = asgd::gd_field(problem);
  const asgd::RateLyapunov lyap = asgd::gd_lyapunov(problem, lyap_name);
  const auto points = asgd::sample_ball(problem.minimizer(), radius, t_max, samples,
                                        static_cast<std::uint64_t>(seed));
  const asgd::Certification cert = asgd::check_rate_lyapunov(field, lyap, problem, points);
  const double fd = asgd::lyapunov_fd_check(lyap, points);
  const json report = {{"lyapunov", lyap_name},
                       {"samples", samples},
                       {"worst_slack", cert.worst_slack},
                       {"min_value", cert.min_value},
                       {"fd_relative_error", fd},
                       {"passed", cert.passed}};
  std::cout << report.dump(2) << '\n';
  return cert.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accelerated stochastic gradient descent experiments"};
  app.require_subcommand(1);
  Common common;
  const auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", common.config, "YAML run config");
    if (need_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--seeds", common.seeds, "override the number of seeds")
        ->check(CLI::PositiveNumber);
    sub->add_option("--master-seed", common.master_seed, "override the master seed")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", common.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* run = app.add_subcommand("run", "run a seed matrix and write aggregates");
  add_common(run, true);
  int write_traces = 0;
  bool check = false;
  double min_fraction = 0.99;
  run->add_option("--write-traces", write_traces, "write the first N per-seed traces");
  run->add_flag("--check", check, "fail unless the matching bound holds");
  run->add_option("--min-pass-fraction", min_fraction, "required pass fraction for --check");

  auto* verify = app.add_subcommand("verify", "check per-step dissipation along a trace");
  add_common(verify, true);
  std::string trace_path;
  std::string kind;
  verify->add_option("--trace", trace_path, "trace CSV")->required()->check(CLI::ExistingFile);
  verify->add_option("--kind", kind, "sc, c, gd_c or gd_sc (default from optimizer)");

  auto* bounds = app.add_subcommand("bounds", "write the bound curve for a config");
  add_common(bounds, true);

  auto* fit = app.add_subcommand("fit", "fit a log-log rate slope to an aggregate CSV");
  std::string aggregate_path;
  long long k_min = 100;
  long long k_max = 10000;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  fit->add_option("aggregate", aggregate_path, "aggregate CSV")->required()->check(
      CLI::ExistingFile);
  fit->add_option("--k-min", k_min);
  fit->add_option("--k-max", k_max);
  fit->add_option("--min-slope", lo);
  fit->add_option("--max-slope", hi);

  auto* ode = app.add_subcommand("ode", "integrate a continuous-time system with RK4");
  add_common(ode, true);
  std::string system = "first_order_sc";
  double dt = 1e-3;
  double t_end = 10.0;
  double t0 = 0.01;
  int sample_every = 10;
  ode->add_option("--system", system, "first_order_sc, first_order_c, second_order_sc, "
                                      "second_order_c");
  ode->add_option("--dt", dt)->check(CLI::PositiveNumber);
  ode->add_option("--t-end", t_end)->check(CLI::PositiveNumber);
  ode->add_option("--t0", t0, "start time of the convex systems")->check(CLI::PositiveNumber);
  ode->add_option("--sample-every", sample_every)->check(CLI::PositiveNumber);

  auto* abstract = app.add_subcommand("abstract-check", "certify a GD Lyapunov function");
  add_common(abstract, true);
  std::string lyap = "gd_sc";
  int samples = 1000;
  double radius = 1.0;
  double t_max = 10.0;
  long long seed = 0;
  abstract->add_option("--lyapunov", lyap, "gd_sc or gd_c");
  abstract->add_option("--samples", samples)->check(CLI::PositiveNumber);
  abstract->add_option("--radius", radius)->check(CLI::PositiveNumber);
  abstract->add_option("--t-max", t_max)->check(CLI::PositiveNumber);
  abstract->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(common, write_traces, check, min_fraction);
    if (verify->parsed()) return cmd_verify(common, trace_path, kind);
    if (bounds->parsed()) return cmd_bounds(common);
    if (fit->parsed()) return cmd_fit(aggregate_path, k_min, k_max, lo, hi);
    if (ode->parsed()) return cmd_ode(common, system, dt, t_end, t0, sample_every);
    if (abstract->parsed()) return cmd_abstract(common, lyap, samples, radius, t_max, seed);
  } catch (const asgd::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
