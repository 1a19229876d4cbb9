#include "asgd/problems.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "asgd/error.hpp"

namespace asgd {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Quadratic:
      return "quadratic";
    case ProblemKind::LeastSquares:
      return "least_squares";
    case ProblemKind::LogSumExp:
      return "logsumexp";
    case ProblemKind::HuberizedAbs:
      return "huberized_abs";
  }
  return "unknown";
}

Problem::Problem(ProblemKind kind, std::string name,
                 std::shared_ptr<const detail::Objective> objective, int dim, double mu,
                 double lipschitz, Vec minimizer, double min_value)
    : kind_(kind),
      name_(std::move(name)),
      objective_(std::move(objective)),
      dim_(dim),
      mu_(mu),
      lipschitz_(lipschitz),
      minimizer_(std::move(minimizer)),
      min_value_(min_value) {
  if (dim_ <= 0) throw ConfigError("problem dimension must be positive");
  if (!(mu_ >= 0.0)) throw ConfigError("mu must be nonnegative");
  if (!(lipschitz_ > 0.0)) throw ConfigError("lipschitz constant must be positive");
  if (mu_ > lipschitz_) throw ConfigError("mu must not exceed the lipschitz constant");
  if (minimizer_.size() != dim_) throw DimensionError("minimizer length differs from dim");
}

double Problem::condition_number() const {
  if (mu_ == 0.0) return std::numeric_limits<double>::infinity();
  return lipschitz_ / mu_;
}

void Problem::check_dim(const Vec& x) const {
  if (x.size() != dim_) {
    throw DimensionError("point has length " + std::to_string(x.size()) + ", problem dim is " +
                         std::to_string(dim_));
  }
}

double Problem::value(const Vec& x) const {
  check_dim(x);
  return objective_->value(x);
}

Vec Problem::gradient(const Vec& x) const {
  check_dim(x);
  return objective_->gradient(x);
}

double Problem::gap(const Vec& x) const {
  check_dim(x);
  double out = 0.0;
  if (objective_->gap(x, minimizer_, out)) return out;
  return objective_->value(x) - min_value_;
}

bool Problem::has_exact_hessian() const {
  Vec probe = Vec::Zero(dim_);
  Vec out;
  return objective_->hessian_vector(probe, probe, out);
}

Vec Problem::hessian_vector(const Vec& x, const Vec& d) const {
  check_dim(x);
  check_dim(d);
  Vec out;
  if (objective_->hessian_vector(x, d, out)) return out;
  return hessian_vector_fd(x, d);
}

Vec Problem::hessian_vector_fd(const Vec& x, const Vec& d) const {
  check_dim(x);
  check_dim(d);
  const double dnorm = d.norm();
  if (dnorm == 0.0) return Vec::Zero(dim_);
  const double eps = 1e-6 * (1.0 + x.norm()) / dnorm;
  return (objective_->gradient(x + eps * d) - objective_->gradient(x)) / eps;
}

namespace {

// expm1(d) - d
double expm1_minus_linear(double d) {
  if (std::abs(d) > 0.5) return std::expm1(d) - d;
  double term = 0.5 * d * d;
  double sum = term;
  for (int n = 3; n < 40 && std::abs(term) > 1e-18 * std::abs(sum); ++n) {
    term *= d / n;
    sum += term;
  }
  return sum;
}

// log1p(s) - s
double log1p_minus_linear(double s) {
  if (std::abs(s) > 0.1) return std::log1p(s) - s;
  double power = s * s;
  double sum = -0.5 * power;
  for (int n = 3; n < 40; ++n) {
    power *= -s;
    const double term = -power / n;
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

class QuadraticObjective final : public detail::Objective {
 public:
  QuadraticObjective(Vec eigenvalues, Vec shift)
      : eigenvalues_(std::move(eigenvalues)), shift_(std::move(shift)) {}

  double value(const Vec& x) const override {
    return 0.5 * (eigenvalues_.array() * (x - shift_).array().square()).sum();
  }
  Vec gradient(const Vec& x) const override {
    return (eigenvalues_.array() * (x - shift_).array()).matrix();
  }
  bool hessian_vector(const Vec&, const Vec& d, Vec& out) const override {
    out = (eigenvalues_.array() * d.array()).matrix();
    return true;
  }

 private:
  Vec eigenvalues_;
  Vec shift_;
};

class LeastSquaresObjective final : public detail::Objective {
 public:
  LeastSquaresObjective(Mat a, Vec b) : a_(std::move(a)), b_(std::move(b)) {}

  double value(const Vec& x) const override { return 0.5 * (a_ * x - b_).squaredNorm(); }
  Vec gradient(const Vec& x) const override { return a_.transpose() * (a_ * x - b_); }
  bool gap(const Vec& x, const Vec& xstar, double& out) const override {
    const Vec dx = x - xstar;
    out = 0.5 * (a_ * dx).squaredNorm() + gradient(xstar).dot(dx);
    return true;
  }
  bool hessian_vector(const Vec&, const Vec& d, Vec& out) const override {
    out = a_.transpose() * (a_ * d);
    return true;
  }

 private:
  Mat a_;
  Vec b_;
};

class LogSumExpObjective final : public detail::Objective {
 public:
  LogSumExpObjective(Mat rows, Vec offsets, double ridge)
      : rows_(std::move(rows)), offsets_(std::move(offsets)), ridge_(ridge) {}

  double value(const Vec& x) const override {
    const Vec z = rows_ * x + offsets_;
    const double m = z.maxCoeff();
    return m + std::log((z.array() - m).exp().sum()) + 0.5 * ridge_ * x.squaredNorm();
  }

  Vec gradient(const Vec& x) const override {
    return rows_.transpose() * softmax(x) + ridge_ * x;
  }

  // With d = A (x - x*), p = softmax at x* and S = sum p_i expm1(d_i):
  // f(x) - f(x*) = <grad f(x*), x - x*> + sum p_i (expm1(d_i) - d_i)
  //               + (log1p(S) - S) + ridge/2 |x - x*|^2.
  bool gap(const Vec& x, const Vec& xstar, double& out) const override {
    const Vec dx = x - xstar;
    const Vec d = rows_ * dx;
    const Vec p = softmax(xstar);
    double s = 0.0;
    double curvature = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      s += p(i) * std::expm1(d(i));
      curvature += p(i) * expm1_minus_linear(d(i));
    }
    out = gradient(xstar).dot(dx) + curvature + log1p_minus_linear(s) +
          0.5 * ridge_ * dx.squaredNorm();
    return true;
  }

  // Closed-form Hessian, used only by the construction-time Newton solve.
  Mat hessian(const Vec& x) const {
    const Vec p = softmax(x);
    Mat weighted = rows_.transpose() * p.asDiagonal() * rows_;
    const Vec ap = rows_.transpose() * p;
    weighted -= ap * ap.transpose();
    weighted.diagonal().array() += ridge_;
    return weighted;
  }

 private:
  Vec softmax(const Vec& x) const {
    const Vec z = rows_ * x + offsets_;
    const double m = z.maxCoeff();
    Vec p = (z.array() - m).exp().matrix();
    return p / p.sum();
  }

  Mat rows_;
  Vec offsets_;
  double ridge_;
};

class HuberizedAbsObjective final : public detail::Objective {
 public:
  HuberizedAbsObjective(Vec center, double delta) : center_(std::move(center)), delta_(delta) {}

  double value(const Vec& x) const override {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double r = std::abs(x(i) - center_(i));
      total += r <= delta_ ? r * r / (2.0 * delta_) : r - 0.5 * delta_;
    }
    return total;
  }

  Vec gradient(const Vec& x) const override {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double r = x(i) - center_(i);
      g(i) = std::abs(r) <= delta_ ? r / delta_ : (r > 0 ? 1.0 : -1.0);
    }
    return g;
  }

 private:
  Vec center_;
  double delta_;
};

// Damped Newton with Armijo backtracking. Returns the minimizer or throws.
Vec newton_presolve(const LogSumExpObjective& obj, int dim) {
  constexpr int kMaxIter = 200;
  constexpr double kTol = 1e-12;
  Vec x = Vec::Zero(dim);
  for (int it = 0; it < kMaxIter; ++it) {
    const Vec g = obj.gradient(x);
    if (g.norm() <= kTol) return x;
    Mat hess = obj.hessian(x);
    Eigen::LDLT<Mat> ldlt(hess);
    Vec step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
        ldlt.vectorD().minCoeff() > 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
      step = -ldlt.solve(g);
    } else {
      hess.diagonal().array() += 1e-8 + g.norm();
      step = -hess.ldlt().solve(g);
    }
    const double f0 = obj.value(x);
    const double slope = g.dot(step);
    double t = 1.0;
    while (t > 1e-16 && obj.value(x + t * step) > f0 + 1e-4 * t * slope) t *= 0.5;
    // Near the optimum the decrease is below rounding; take the full step.
    if (t <= 1e-16) t = 1.0;
    x += t * step;
    if (!x.allFinite()) break;
  }
  const Vec g = obj.gradient(x);
  if (x.allFinite() && g.norm() <= kTol) return x;
  throw ConfigError("logsumexp pre-solve did not reach gradient norm 1e-12");
}

}  // namespace

Problem make_quadratic(const Vec& eigenvalues, const Vec& shift) {
  if (eigenvalues.size() == 0) throw ConfigError("quadratic needs at least one eigenvalue");
  if (shift.size() != eigenvalues.size()) throw DimensionError("shift length differs");
  if ((eigenvalues.array() <= 0.0).any() || !eigenvalues.allFinite()) {
    throw ConfigError("quadratic eigenvalues must be positive");
  }
  auto obj = std::make_shared<QuadraticObjective>(eigenvalues, shift);
  return Problem(ProblemKind::Quadratic, "quadratic", std::move(obj),
                 static_cast<int>(eigenvalues.size()), eigenvalues.minCoeff(),
                 eigenvalues.maxCoeff(), shift, 0.0);
}

Problem make_least_squares(const Mat& a, const Vec& b) {
  if (a.rows() == 0 || a.cols() == 0) throw ConfigError("least squares needs a nonempty matrix");
  if (b.size() != a.rows()) throw DimensionError("rhs length differs from row count");
  Eigen::SelfAdjointEigenSolver<Mat> eig(a.transpose() * a);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 1e-12 * hi)) throw ConfigError("least squares matrix must have full column rank");
  const Vec xstar = a.colPivHouseholderQr().solve(b);
  auto obj = std::make_shared<LeastSquaresObjective>(a, b);
  const double fstar = obj->value(xstar);
  return Problem(ProblemKind::LeastSquares, "least_squares", std::move(obj),
                 static_cast<int>(a.cols()), lo, hi, xstar, fstar);
}

Problem make_logsumexp(const Mat& rows, const Vec& offsets, double ridge) {
  if (rows.rows() == 0 || rows.cols() == 0) throw ConfigError("logsumexp needs nonempty rows");
  if (offsets.size() != rows.rows()) throw DimensionError("offsets length differs from rows");
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
  const int dim = static_cast<int>(rows.cols());
  auto obj = std::make_shared<LogSumExpObjective>(rows, offsets, ridge);
  const Vec xstar = newton_presolve(*obj, dim);
  const double sigma_max = Eigen::JacobiSVD<Mat>(rows).singularValues()(0);
  const double lipschitz = sigma_max * sigma_max + ridge;
  if (!(lipschitz > 0.0)) throw ConfigError("logsumexp has zero curvature");
  const double fstar = obj->value(xstar);
  return Problem(ProblemKind::LogSumExp, "logsumexp", std::move(obj), dim, ridge, lipschitz,
                 xstar, fstar);
}

Problem make_huberized_abs(const Vec& center, double delta) {
  if (center.size() == 0) throw ConfigError("huberized abs needs a nonempty center");
  if (!(delta > 0.0)) throw ConfigError("huber delta must be positive");
  auto obj = std::make_shared<HuberizedAbsObjective>(center, delta);
  return Problem(ProblemKind::HuberizedAbs, "huberized_abs", std::move(obj),
                 static_cast<int>(center.size()), 0.0, 1.0 / delta, center, 0.0);
}

}  // namespace asgd
