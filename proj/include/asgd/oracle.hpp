#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "asgd/problems.hpp"

namespace asgd {

enum class NoiseKind { None, GaussianIsotropic, SphereUniform };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

struct GradientSample {
  Vec g_hat;
  Vec noise;
};

/// Mixes a run index into a master seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index);

/// Perturbed gradient g_hat = grad f + e with E[e] = 0 and E|e|^2 = sigma2.
///
/// GaussianIsotropic draws each coordinate with variance sigma2 / dim;
/// SphereUniform draws e uniformly on the sphere of radius sqrt(sigma2).
/// A replaying oracle returns a recorded noise sequence instead.
/// Not thread-safe: one instance per run.
class NoisyGradientOracle {
 public:
  NoisyGradientOracle(const Problem& problem, double sigma2, NoiseKind kind, std::uint64_t seed);

  /// Feeds a prerecorded noise sequence, one entry per call.
  static NoisyGradientOracle replay(const Problem& problem, std::vector<Vec> noise);

  GradientSample sample(const Vec& point);

  const Problem& problem() const { return problem_; }
  double sigma2() const { return sigma2_; }
  NoiseKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t calls() const { return calls_; }

 private:
  Vec draw_noise();

  Problem problem_;
  double sigma2_;
  NoiseKind kind_;
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  bool replaying_ = false;
  std::vector<Vec> recorded_;
};

}  // namespace asgd
