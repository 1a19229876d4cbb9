#pragma once

#include <functional>
#include <string>

namespace asgd {

/// Closed-form upper bound on an expected quantity as a function of the step k.
struct RateBound {
  std::string label;
  std::string source;
  std::function<double(double)> value;

  double operator()(double k) const { return value(k); }
};

}  // namespace asgd
