#pragma once

#include <memory>
#include <string>

#include <Eigen/Dense>

namespace asgd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ProblemKind { Quadratic, LeastSquares, LogSumExp, HuberizedAbs };

std::string to_string(ProblemKind kind);

namespace detail {

// Value/gradient backend of a Problem. Implementations are immutable.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  // Returns false when no closed-form Hessian exists.
  virtual bool hessian_vector(const Vec& x, const Vec& d, Vec& out) const {
    (void)x;
    (void)d;
    (void)out;
    return false;
  }
  // f(x) - f(xstar) without cancellation. Returns false to fall back to the difference.
  virtual bool gap(const Vec& x, const Vec& xstar, double& out) const {
    (void)x;
    (void)xstar;
    (void)out;
    return false;
  }
};

}  // namespace detail

/// A smooth convex objective together with its analytic metadata: the
/// strong-convexity modulus, a smoothness constant, the minimizer and the
/// optimal value. Immutable and cheap to copy; safe to share across threads.
class Problem {
 public:
  Problem(ProblemKind kind, std::string name, std::shared_ptr<const detail::Objective> objective,
          int dim, double mu, double lipschitz, Vec minimizer, double min_value);

  ProblemKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  double mu() const { return mu_; }
  double lipschitz() const { return lipschitz_; }
  const Vec& minimizer() const { return minimizer_; }
  double min_value() const { return min_value_; }

  /// L / mu; infinite when mu == 0.
  double condition_number() const;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  /// f(x) - f*, evaluated around x* where the objective allows it so that
  /// small gaps keep their relative accuracy.
  double gap(const Vec& x) const;

  bool has_exact_hessian() const;

  /// D^2 f(x) d. Uses the closed form when available, otherwise a forward
  /// difference of the gradient with relative step 1e-6.
  Vec hessian_vector(const Vec& x, const Vec& d) const;

  /// Forward-difference Hessian-vector product regardless of closed forms.
  Vec hessian_vector_fd(const Vec& x, const Vec& d) const;

 private:
  void check_dim(const Vec& x) const;

  ProblemKind kind_;
  std::string name_;
  std::shared_ptr<const detail::Objective> objective_;
  int dim_;
  double mu_;
  double lipschitz_;
  Vec minimizer_;
  double min_value_;
};

/// f(x) = 1/2 sum_i lambda_i (x_i - shift_i)^2.
Problem make_quadratic(const Vec& eigenvalues, const Vec& shift);

/// f(x) = 1/2 |A x - b|^2 with A of full column rank.
Problem make_least_squares(const Mat& a, const Vec& b);

/// f(x) = log sum_i exp(a_i^T x + b_i) + ridge/2 |x|^2. The minimizer is
/// computed at construction by damped Newton to gradient norm <= 1e-12.
Problem make_logsumexp(const Mat& rows, const Vec& offsets, double ridge);

/// f(x) = sum_i huber_delta(x_i - center_i); convex (mu = 0), L = 1/delta.
Problem make_huberized_abs(const Vec& center, double delta);

}  // namespace asgd
