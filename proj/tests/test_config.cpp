#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "asgd/config.hpp"
#include "asgd/error.hpp"

using namespace asgd;

namespace {

const char* kMinimal = R"(
problem:
  kind: quadratic
  eigenvalues: [1, 4]
x0: [1, 1]
)";

}  // namespace

TEST(ParseConfig, Defaults) {
  const RunConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.problem.kind, ProblemKind::Quadratic);
  EXPECT_EQ(c.problem.shift.size(), 2);
  EXPECT_EQ(c.optimizer, OptimizerKind::AsgdScThreeVar);
  EXPECT_EQ(c.schedule.kind, ScheduleKind::Constant);
  EXPECT_EQ(c.steps, 1000);
  EXPECT_EQ(c.seeds, 1);
  EXPECT_FALSE(c.warmstart);
  EXPECT_FALSE(c.record.vectors);
}

TEST(ParseConfig, FullTable) {
  const RunConfig c = parse_config(R"(
name: full
problem:
  kind: least_squares
  a: [[1, 0], [0, 2], [1, 1]]
  b: [1, 2, 3]
optimizer: perturbed_gd
gd_mode: strongly_convex
schedule:
  kind: gd_convex_power
  c: 0.25
  exponent: 0.6
noise: {kind: sphere, sigma2: 0.5}
x0: {radius: 3, seed: 9}
steps: 20
seeds: 4
master_seed: 77
record: {vectors: true, thin: false}
)");
  EXPECT_EQ(c.name, "full");
  EXPECT_EQ(c.problem.a.rows(), 3);
  EXPECT_EQ(c.optimizer, OptimizerKind::PerturbedGd);
  EXPECT_EQ(c.gd_mode, GdMode::StronglyConvex);
  EXPECT_EQ(c.schedule.c, "0.25");
  EXPECT_DOUBLE_EQ(c.schedule.exponent, 0.6);
  EXPECT_EQ(c.noise.kind, NoiseKind::SphereUniform);
  EXPECT_DOUBLE_EQ(c.x0.radius, 3.0);
  EXPECT_EQ(c.x0.seed, 9u);
  EXPECT_EQ(c.master_seed, 77u);
  EXPECT_TRUE(c.record.vectors);
  EXPECT_FALSE(c.record.thin);
}

TEST(ParseConfig, Rejections) {
  EXPECT_THROW(parse_config("[1, 2]"), ConfigError);
  EXPECT_THROW(parse_config("x0: [1]"), ConfigError);
  EXPECT_THROW(parse_config("problem: {kind: quadratic, eigenvalues: [1]}"), ConfigError);
  EXPECT_THROW(parse_config("problem: {kind: cubic}\nx0: [1]"), ConfigError);
  EXPECT_THROW(parse_config(std::string(kMinimal) + "optimizer: adam\n"), ConfigError);
  EXPECT_THROW(parse_config(std::string(kMinimal) + "seeds: 0\n"), ConfigError);
  EXPECT_THROW(parse_config(std::string(kMinimal) + "steps: -1\n"), ConfigError);
  EXPECT_THROW(parse_config(std::string(kMinimal) + "gd_mode: both\n"), ConfigError);
  EXPECT_THROW(parse_config(std::string(kMinimal) + "noise: {kind: cauchy}\n"), ConfigError);
  EXPECT_THROW(parse_config("problem: {kind: least_squares, a: [[1, 2], [3]], b: [1, 2]}\nx0: [0, 0]"),
               ConfigError);
  EXPECT_THROW(parse_config("problem: [\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST(ResolveX0, PointAndRadius) {
  const RunConfig c = parse_config(kMinimal);
  const Problem p = build_problem(c.problem);
  EXPECT_EQ(resolve_x0(c.x0, p), c.x0.point);

  X0Spec r;
  r.radius = 2.5;
  r.seed = 4;
  const Vec a = resolve_x0(r, p);
  EXPECT_NEAR((a - p.minimizer()).norm(), 2.5, 1e-12);
  EXPECT_EQ(resolve_x0(r, p), a);
  r.seed = 5;
  EXPECT_NE(resolve_x0(r, p), a);

  X0Spec wrong;
  wrong.point = Vec::Zero(3);
  EXPECT_THROW(resolve_x0(wrong, p), DimensionError);
}

TEST(ResolveStep, Rules) {
  const Problem p = build_problem(parse_config(kMinimal).problem);
  EXPECT_DOUBLE_EQ(resolve_step("inv_sqrt_l", p), 0.5);
  EXPECT_DOUBLE_EQ(resolve_step("inv_l", p), 0.25);
  EXPECT_DOUBLE_EQ(resolve_step("two_over_l_plus_mu", p), 0.4);
  EXPECT_DOUBLE_EQ(resolve_step("0.125", p), 0.125);
  EXPECT_THROW(resolve_step("fast", p), ConfigError);
  EXPECT_THROW(resolve_step("0.1x", p), ConfigError);
}

TEST(InitialLyapunov, ByOptimizer) {
  const Problem p = build_problem(parse_config(kMinimal).problem);
  Vec x0(2);
  x0 << 1.0, 1.0;
  // f = (x1^2 + 4 x2^2) / 2 = 2.5, |x0|^2 = 2, mu = 1.
  EXPECT_DOUBLE_EQ(initial_lyapunov(OptimizerKind::AsgdScThreeVar, p, x0), 3.5);
  EXPECT_DOUBLE_EQ(initial_lyapunov(OptimizerKind::AsgdCThreeVar, p, x0), 4.0);
  EXPECT_DOUBLE_EQ(initial_lyapunov(OptimizerKind::PerturbedGd, p, x0), 3.5);
}

TEST(BuildSchedule, KindsAndCaps) {
  RunConfig c = parse_config(std::string(kMinimal) + "noise: {sigma2: 1}\n");
  const Problem p = build_problem(c.problem);
  const Vec x0 = resolve_x0(c.x0, p);

  Schedule s = build_schedule(c, p, x0);
  EXPECT_DOUBLE_EQ(s.h(0), 0.5);
  EXPECT_DOUBLE_EQ(s.step_cap(), 0.5);

  c.schedule.kind = ScheduleKind::StronglyConvexDecay;
  s = build_schedule(c, p, x0);
  // k0 = max(2 sqrt(4), 4 / (1 * 3.5)) = 4.
  EXPECT_DOUBLE_EQ(s.offset(), 4.0);
  EXPECT_DOUBLE_EQ(s.h(0), 0.5);

  c.schedule.e0 = 0.5;
  s = build_schedule(c, p, x0);
  EXPECT_DOUBLE_EQ(s.offset(), 8.0);
  c.schedule.e0 = 0.0;

  c.optimizer = OptimizerKind::PerturbedGd;
  c.schedule.kind = ScheduleKind::Constant;
  c.gd_mode = GdMode::Convex;
  EXPECT_THROW(build_schedule(c, p, x0), ConfigError);
  c.schedule.h = "inv_l";
  EXPECT_DOUBLE_EQ(build_schedule(c, p, x0).step_cap(), 0.25);
  c.gd_mode = GdMode::StronglyConvex;
  EXPECT_DOUBLE_EQ(build_schedule(c, p, x0).step_cap(), 0.4);

  // alpha = mu^2 / (2 (L + mu) sigma2) = 0.1 and h_0 = 2 alpha e0 / mu.
  c.schedule.kind = ScheduleKind::AbstractDecay;
  EXPECT_THROW(build_schedule(c, p, x0), ConfigError);
  c.schedule.e0 = 1.0;
  s = build_schedule(c, p, x0);
  EXPECT_NEAR(s.offset(), 10.0, 1e-12);
  EXPECT_NEAR(s.h(0), 0.2, 1e-15);
}

TEST(SampleConfigs, AllLoadAndBuild) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(ASGD_CONFIG_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    SCOPED_TRACE(entry.path().string());
    const RunConfig c = load_config(entry.path().string());
    const Problem p = build_problem(c.problem);
    const Vec x0 = resolve_x0(c.x0, p);
    EXPECT_EQ(x0.size(), p.dim());
    const Schedule s = build_schedule(c, p, x0);
    EXPECT_GT(s.h(0), 0.0);
    EXPECT_LE(s.h(0), s.step_cap() * (1 + 1e-15));
    ++count;
  }
  EXPECT_GE(count, 4);
}
