#pragma once
// Small regression and moment helpers shared by the diagnostics.

#include <cstddef>
#include <vector>

namespace holderlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  std::size_t count = 0;
};

/// Ordinary least squares y = intercept + slope * x. Needs two or more points.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t count = 0;
};

Moments moments(const std::vector<double>& v);

}  // namespace holderlab
