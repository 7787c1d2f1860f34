#include "latticelab/trend.hpp"

#include <cmath>
#include <string>

#include "latticelab/errors.hpp"

namespace latticelab {

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("fit_power_law: x and y differ in length");
  if (x.size() < 2) throw InputError("fit_power_law: needs at least two points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw InputError("fit_power_law: point " + std::to_string(i) + " is not positive and finite");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw InputError("fit_power_law: all x values coincide");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double sse = 0;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = ly[i] - (fit.intercept + fit.exponent * lx[i]);
    sse += fit.residuals[i] * fit.residuals[i];
  }
  fit.r_squared = syy > 0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

}  // namespace latticelab
