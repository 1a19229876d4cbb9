#include "asgd/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "asgd/error.hpp"

namespace asgd {

namespace {

Vec read_vec(const YAML::Node& node, const std::string& what) {
  if (!node || !node.IsSequence()) throw ConfigError(what + " must be a list of numbers");
  Vec v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Eigen::Index>(i)) = node[i].as<double>();
  return v;
}

Mat read_mat(const YAML::Node& node, const std::string& what) {
  if (!node || !node.IsSequence() || node.size() == 0) {
    throw ConfigError(what + " must be a nonempty list of rows");
  }
  const std::size_t cols = node[0].size();
  Mat m(static_cast<Eigen::Index>(node.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].IsSequence() || node[i].size() != cols) {
      throw ConfigError(what + " rows must have equal length");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = node[i][j].as<double>();
    }
  }
  return m;
}

ProblemKind problem_kind_from_string(const std::string& name) {
  for (auto k : {ProblemKind::Quadratic, ProblemKind::LeastSquares, ProblemKind::LogSumExp,
                 ProblemKind::HuberizedAbs}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown problem kind '" + name + "'");
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  for (auto k : {ScheduleKind::Constant, ScheduleKind::StronglyConvexDecay,
                 ScheduleKind::ConvexPower, ScheduleKind::GdStronglyConvexDecay,
                 ScheduleKind::GdConvexPower, ScheduleKind::AbstractDecay}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown schedule kind '" + name + "'");
}

std::string scalar_text(const YAML::Node& node) { return node.as<std::string>(); }

RunConfig from_yaml(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("config must be a mapping");
  RunConfig cfg;
  if (root["name"]) cfg.name = root["name"].as<std::string>();

  const YAML::Node p = root["problem"];
  if (!p || !p.IsMap()) throw ConfigError("config needs a problem table");
  cfg.problem.kind = problem_kind_from_string(p["kind"].as<std::string>("quadratic"));
  switch (cfg.problem.kind) {
    case ProblemKind::Quadratic:
      cfg.problem.eigenvalues = read_vec(p["eigenvalues"], "problem.eigenvalues");
      cfg.problem.shift = p["shift"] ? read_vec(p["shift"], "problem.shift")
                                     : Vec::Zero(cfg.problem.eigenvalues.size());
      break;
    case ProblemKind::LeastSquares:
      cfg.problem.a = read_mat(p["a"], "problem.a");
      cfg.problem.b = read_vec(p["b"], "problem.b");
      break;
    case ProblemKind::LogSumExp:
      cfg.problem.a = read_mat(p["rows"], "problem.rows");
      cfg.problem.offsets = p["offsets"] ? read_vec(p["offsets"], "problem.offsets")
                                         : Vec::Zero(cfg.problem.a.rows());
      cfg.problem.ridge = p["ridge"].as<double>(0.0);
      break;
    case ProblemKind::HuberizedAbs:
      cfg.problem.center = read_vec(p["center"], "problem.center");
      cfg.problem.delta = p["delta"].as<double>(1.0);
      break;
  }

  if (root["optimizer"]) cfg.optimizer = optimizer_kind_from_string(root["optimizer"].as<std::string>());

  if (const YAML::Node s = root["schedule"]) {
    cfg.schedule.kind = schedule_kind_from_string(s["kind"].as<std::string>("constant"));
    if (s["h"]) cfg.schedule.h = scalar_text(s["h"]);
    if (s["c"]) cfg.schedule.c = scalar_text(s["c"]);
    cfg.schedule.exponent = s["exponent"].as<double>(0.75);
    cfg.schedule.e0 = s["e0"].as<double>(0.0);
    cfg.schedule.r_e = s["r_e"].as<double>(0.0);
    cfg.schedule.l_e = s["l_e"].as<double>(0.0);
    cfg.schedule.g2bar = s["g2bar"].as<double>(1.0);
  }

  if (const YAML::Node n = root["noise"]) {
    cfg.noise.kind = noise_kind_from_string(n["kind"].as<std::string>("gaussian"));
    cfg.noise.sigma2 = n["sigma2"].as<double>(0.0);
  }

  if (const YAML::Node x = root["x0"]) {
    if (x.IsSequence()) {
      cfg.x0.point = read_vec(x, "x0");
    } else if (x.IsMap()) {
      cfg.x0.radius = x["radius"].as<double>();
      cfg.x0.seed = x["seed"].as<std::uint64_t>(0);
    } else {
      throw ConfigError("x0 must be a list or a {radius, seed} table");
    }
  } else {
    throw ConfigError("config needs x0");
  }

  cfg.steps = root["steps"].as<std::int64_t>(cfg.steps);
  cfg.seeds = root["seeds"].as<int>(cfg.seeds);
  cfg.master_seed = root["master_seed"].as<std::uint64_t>(cfg.master_seed);
  cfg.warmstart = root["warmstart"].as<bool>(cfg.warmstart);
  if (root["gd_mode"]) {
    const auto mode = root["gd_mode"].as<std::string>();
    if (mode == "convex") {
      cfg.gd_mode = GdMode::Convex;
    } else if (mode == "strongly_convex") {
      cfg.gd_mode = GdMode::StronglyConvex;
    } else {
      throw ConfigError("gd_mode must be convex or strongly_convex");
    }
  }
  if (const YAML::Node r = root["record"]) {
    cfg.record.vectors = r["vectors"].as<bool>(cfg.record.vectors);
    cfg.record.thin = r["thin"].as<bool>(cfg.record.thin);
  }
  if (cfg.steps < 0) throw ConfigError("steps must be nonnegative");
  if (cfg.seeds < 1) throw ConfigError("seeds must be >= 1");
  return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  try {
    return from_yaml(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Problem build_problem(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemKind::Quadratic:
      return make_quadratic(spec.eigenvalues, spec.shift);
    case ProblemKind::LeastSquares:
      return make_least_squares(spec.a, spec.b);
    case ProblemKind::LogSumExp:
      return make_logsumexp(spec.a, spec.offsets, spec.ridge);
    case ProblemKind::HuberizedAbs:
      return make_huberized_abs(spec.center, spec.delta);
  }
  throw ConfigError("unknown problem kind");
}

Vec resolve_x0(const X0Spec& spec, const Problem& problem) {
  if (spec.point.size() > 0) {
    if (spec.point.size() != problem.dim()) throw DimensionError("x0 length differs from dim");
    return spec.point;
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec d(problem.dim());
  double n = 0.0;
  while (n == 0.0) {
    for (int i = 0; i < problem.dim(); ++i) d(i) = normal(rng);
    n = d.norm();
  }
  return problem.minimizer() + (spec.radius / n) * d;
}

double resolve_step(const std::string& rule, const Problem& problem) {
  if (rule == "inv_sqrt_l") return 1.0 / std::sqrt(problem.lipschitz());
  if (rule == "inv_l") return 1.0 / problem.lipschitz();
  if (rule == "two_over_l_plus_mu") return 2.0 / (problem.lipschitz() + problem.mu());
  char* end = nullptr;
  const double value = std::strtod(rule.c_str(), &end);
  if (end == rule.c_str() || *end != '\0') throw ConfigError("bad step value '" + rule + "'");
  return value;
}

double initial_lyapunov(OptimizerKind kind, const Problem& problem, const Vec& x0) {
  const double gap = problem.gap(x0);
  const double dist2 = (x0 - problem.minimizer()).squaredNorm();
  if (is_gd_kind(kind)) {
    if (problem.mu() > 0.0) return gap + 0.5 * problem.mu() * dist2;
    return 0.5 * dist2;
  }
  if (is_strongly_convex_kind(kind)) return gap + 0.5 * problem.mu() * dist2;
  return 2.0 * dist2;
}

Schedule build_schedule(const RunConfig& config, const Problem& problem, const Vec& x0) {
  const ScheduleSpec& s = config.schedule;
  const bool gd = is_gd_kind(config.optimizer);
  double cap = 1.0 / std::sqrt(problem.lipschitz());
  if (gd) {
    cap = config.gd_mode == GdMode::Convex ? 1.0 / problem.lipschitz()
                                           : 2.0 / (problem.lipschitz() + problem.mu());
  }
  const double e0 = s.e0 > 0.0 ? s.e0 : initial_lyapunov(config.optimizer, problem, x0);
  const double sigma2 = config.noise.kind == NoiseKind::None ? 0.0 : config.noise.sigma2;
  switch (s.kind) {
    case ScheduleKind::Constant:
      return Schedule::constant(resolve_step(s.h, problem), cap);
    case ScheduleKind::StronglyConvexDecay:
      return Schedule::strongly_convex_decay(problem.mu(), problem.condition_number(), sigma2,
                                             e0);
    case ScheduleKind::ConvexPower:
      return Schedule::convex_power(resolve_step(s.c, problem), s.exponent, cap);
    case ScheduleKind::GdStronglyConvexDecay:
      return Schedule::gd_strongly_convex_decay(problem.mu(), problem.condition_number(), sigma2,
                                                e0, cap);
    case ScheduleKind::GdConvexPower:
      return Schedule::gd_convex_power(resolve_step(s.c, problem), s.exponent, cap);
    case ScheduleKind::AbstractDecay: {
      const double r_e = s.r_e > 0.0 ? s.r_e : problem.mu();
      const double l_e = s.l_e > 0.0 ? s.l_e : problem.lipschitz() + problem.mu();
      return Schedule::abstract_decay(r_e, l_e, s.g2bar, sigma2, e0, cap);
    }
  }
  throw ConfigError("unknown schedule kind");
}

}  // namespace asgd
