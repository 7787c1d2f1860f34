#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latticelab/lattice.hpp"

namespace latticelab {

/// omega(t) = min(cap, coefficient * t^exponent). exponent 1/2 is the
/// square-root modulus, exponent 1 the linear one.
struct ClosedFormModulus {
  double coefficient = 1.0;
  double exponent = 0.5;
  double cap = std::numeric_limits<double>::infinity();

  double operator()(double t) const;
  std::string describe() const;
};

struct ModulusCurve {
  std::vector<double> t;
  std::vector<double> omega;
  std::optional<ClosedFormModulus> closed_form;
  /// Exact omega at an arbitrary threshold, used to refine plain grids.
  std::function<double(double)> sampler;
  /// sup |g| of the underlying function (omega <= 2 * sup_abs).
  double sup_abs = 0.0;

  /// Curve of a closed form evaluated on a grid.
  static ModulusCurve closed(const ClosedFormModulus& form, std::vector<double> grid, double sup_abs);
};

/// Exact omega(t) = max |g(x) - g(y)| over pairs with d(x,y) <= t, at each
/// grid threshold. The curve carries an exact pair-scan sampler.
ModulusCurve modulus_of_continuity(const LatticeElement& g, std::span<const double> grid);

/// Attaches a closed form after checking that the curve's samples do not
/// exceed it (relative tolerance 1e-12).
ModulusCurve with_closed_form(ModulusCurve curve, const ClosedFormModulus& form);

struct ErrorBound {
  double alpha = 0.0;     // sup_t (omega(t) - n t), clamped at 0
  double argmax_t = 0.0;  // where the sup is attained (0 when clamped)
  double t0 = 0.0;        // threshold minimising proof_bound over the grid
  double proof_bound = 0.0;  // max(omega(t0), 2 sup|g| - n t0) >= alpha
  std::string method;     // "grid", "grid+closed-form", "grid+refinement"
};

ErrorBound error_bound(const ModulusCurve& curve, double n);

struct LipschitzResult {
  double constant = 0.0;
  std::size_t a = 0;  // argmax pair (smallest index pair on ties)
  std::size_t b = 0;
};

/// max |f(x) - f(y)| / d(x,y) over all pairs; 0 on a singleton.
LipschitzResult lipschitz_constant(const LatticeElement& f);

struct EnvelopeResult {
  std::size_t n = 0;
  LatticeElement g_n;
  double alpha_n = 0.0;
  double achieved_error = 0.0;  // sup (g - g_n)
  double lipschitz_constant = 0.0;
  std::string alpha_method;  // "pairwise-exact" or the error_bound method
};

/// g_n(x) = min over y of g(y) + n d(x,y), by exhaustive scan.
///
/// alpha_n is exact for the data, max over pairs (|g(x)-g(y)| - n d(x,y))^+,
/// unless a curve is supplied, in which case error_bound(curve, n) is used.
/// Throws InvariantError if g_n > g somewhere, the achieved error exceeds
/// alpha_n + 1e-9 * max(1, sup|g|), or the Lipschitz constant exceeds n + 1e-9.
EnvelopeResult inf_convolution(const LatticeElement& g, std::size_t n, const ModulusCurve* curve = nullptr);

}  // namespace latticelab
