#include "asgd/oracle.hpp"

#include <cmath>
#include <utility>

#include "asgd/error.hpp"

namespace asgd {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None:
      return "none";
    case NoiseKind::GaussianIsotropic:
      return "gaussian";
    case NoiseKind::SphereUniform:
      return "sphere";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "none") return NoiseKind::None;
  if (name == "gaussian") return NoiseKind::GaussianIsotropic;
  if (name == "sphere") return NoiseKind::SphereUniform;
  throw ConfigError("unknown noise kind '" + name + "'");
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index) {
  std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (run_index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

NoisyGradientOracle::NoisyGradientOracle(const Problem& problem, double sigma2, NoiseKind kind,
                                         std::uint64_t seed)
    : problem_(problem), sigma2_(sigma2), kind_(kind), seed_(seed), rng_(seed) {
  if (!(sigma2 >= 0.0)) throw ConfigError("sigma2 must be nonnegative");
}

NoisyGradientOracle NoisyGradientOracle::replay(const Problem& problem, std::vector<Vec> noise) {
  NoisyGradientOracle oracle(problem, 0.0, NoiseKind::None, 0);
  oracle.replaying_ = true;
  oracle.recorded_ = std::move(noise);
  return oracle;
}

Vec NoisyGradientOracle::draw_noise() {
  const int dim = problem_.dim();
  if (replaying_) {
    if (calls_ >= recorded_.size()) throw Error("replay oracle ran out of recorded noise");
    const Vec& e = recorded_[calls_];
    if (e.size() != dim) throw DimensionError("recorded noise has wrong length");
    return e;
  }
  if (kind_ == NoiseKind::None || sigma2_ == 0.0) return Vec::Zero(dim);
  Vec e(dim);
  for (int i = 0; i < dim; ++i) e(i) = normal_(rng_);
  if (kind_ == NoiseKind::GaussianIsotropic) {
    return e * std::sqrt(sigma2_ / dim);
  }
  double norm = e.norm();
  while (norm == 0.0) {
    for (int i = 0; i < dim; ++i) e(i) = normal_(rng_);
    norm = e.norm();
  }
  return e * (std::sqrt(sigma2_) / norm);
}

GradientSample NoisyGradientOracle::sample(const Vec& point) {
  if (point.size() != problem_.dim()) {
    throw DimensionError("oracle point has length " + std::to_string(point.size()) +
                         ", problem dim is " + std::to_string(problem_.dim()));
  }
  Vec e = draw_noise();
  ++calls_;
  Vec g = problem_.gradient(point) + e;
  return {std::move(g), std::move(e)};
}

}  // namespace asgd
