#pragma once

#include <cstdint>
#include <string>

#include "asgd/optimizers.hpp"
#include "asgd/oracle.hpp"
#include "asgd/problems.hpp"
#include "asgd/schedules.hpp"

namespace asgd {

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Quadratic;
  Vec eigenvalues;
  Vec shift;
  Mat a;
  Vec b;
  Vec offsets;
  double ridge = 0.0;
  Vec center;
  double delta = 1.0;
};

/// Step-size fields accept a number or one of the named rules
/// inv_sqrt_l (1/sqrt(L)), inv_l (1/L) and two_over_l_plus_mu (2/(L+mu)).
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::Constant;
  std::string h = "inv_sqrt_l";
  std::string c = "inv_sqrt_l";
  double exponent = 0.75;
  /// Initial Lyapunov value; zero means "measure at x0".
  double e0 = 0.0;
  double r_e = 0.0;
  double l_e = 0.0;
  double g2bar = 1.0;
};

struct NoiseSpec {
  NoiseKind kind = NoiseKind::GaussianIsotropic;
  double sigma2 = 0.0;
};

/// Either an explicit point or x* plus a seeded uniform direction of length radius.
struct X0Spec {
  Vec point;
  double radius = 0.0;
  std::uint64_t seed = 0;
};

struct RunConfig {
  std::string name = "run";
  ProblemSpec problem;
  OptimizerKind optimizer = OptimizerKind::AsgdScThreeVar;
  ScheduleSpec schedule;
  NoiseSpec noise;
  X0Spec x0;
  std::int64_t steps = 1000;
  int seeds = 1;
  std::uint64_t master_seed = 0;
  bool warmstart = false;
  GdMode gd_mode = GdMode::Convex;
  RecordPolicy record{false, true};
};

/// Parses the YAML run-config format documented in the README.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

Problem build_problem(const ProblemSpec& spec);
Vec resolve_x0(const X0Spec& spec, const Problem& problem);

/// Resolves a named step rule or a number against the problem constants.
double resolve_step(const std::string& rule, const Problem& problem);

/// Builds the schedule, filling e0 from x0 when the spec leaves it at zero.
Schedule build_schedule(const RunConfig& config, const Problem& problem, const Vec& x0);

/// Lyapunov value at x0 (v0 = x0) that parameterizes the schedule of the given optimizer.
double initial_lyapunov(OptimizerKind kind, const Problem& problem, const Vec& x0);

}  // namespace asgd
