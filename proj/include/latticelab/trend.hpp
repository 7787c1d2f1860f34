#pragma once

#include <span>
#include <vector>

namespace latticelab {

/// Least-squares fit of log y = intercept + exponent * log x.
struct PowerLawFit {
  double exponent = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;  // in log space, one per point
  double r_squared = 0.0;
};

/// Needs at least two points with positive, distinct x and positive y.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace latticelab
