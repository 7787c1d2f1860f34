#include "latticelab/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>

#include "latticelab/parallel.hpp"

namespace latticelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_metric(const LatticeElement& g, const char* op) {
  if (!g.carrier().is_metric()) throw InputError(std::string(op) + ": needs a metric carrier");
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw InputError("modulus grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0) throw InputError("modulus grid entries must be finite and >= 0");
    if (i > 0 && grid[i] < grid[i - 1]) throw InputError("modulus grid must be sorted");
  }
}

double pair_scan_omega(const LatticeElement& g, double t) {
  const auto& sp = g.carrier().space();
  double best = 0.0;
  std::vector<double> scratch;
  for (std::size_t x = 0; x < sp.size(); ++x) {
    auto row = sp.row(x, scratch);
    for (std::size_t y = x + 1; y < sp.size(); ++y)
      if (row[y] <= t) best = std::max(best, std::fabs(g[x] - g[y]));
  }
  return best;
}

struct Candidate {
  double value = 0.0;
  double t = 0.0;
};

// sup over t > 0 of form(t) - n t; +infinity when unbounded.
Candidate closed_form_sup(const ClosedFormModulus& f, double n) {
  const double c = f.coefficient, e = f.exponent;
  if (c <= 0.0) return {0.0, 0.0};
  const double t_cap = std::isfinite(f.cap) ? std::pow(f.cap / c, 1.0 / e) : kInf;
  if (e == 0.0) return {std::min(c, f.cap), 0.0};
  if (e < 1.0) {
    const double t_star = std::pow(c * e / n, 1.0 / (1.0 - e));
    const double t = std::min(t_star, t_cap);
    return {f(t) - n * t, t};
  }
  if (e == 1.0 && c <= n) return {0.0, 0.0};
  if (!std::isfinite(t_cap)) return {kInf, kInf};
  return {f.cap - n * t_cap, t_cap};
}

}  // namespace

double ClosedFormModulus::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  const double v = exponent == 0.5 ? coefficient * std::sqrt(t) : coefficient * std::pow(t, exponent);
  return std::min(cap, v);
}

std::string ClosedFormModulus::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "min(" << cap << ", " << coefficient << " * t^" << exponent << ")";
  return os.str();
}

ModulusCurve ModulusCurve::closed(const ClosedFormModulus& form, std::vector<double> grid, double sup_abs) {
  check_grid(grid);
  ModulusCurve c;
  c.omega.reserve(grid.size());
  for (double t : grid) c.omega.push_back(form(t));
  c.t = std::move(grid);
  c.closed_form = form;
  c.sampler = [form](double t) { return form(t); };
  c.sup_abs = sup_abs;
  return c;
}

ModulusCurve modulus_of_continuity(const LatticeElement& g, std::span<const double> grid) {
  require_metric(g, "modulus_of_continuity");
  check_grid(grid);
  const auto& sp = g.carrier().space();
  const std::size_t n = sp.size(), m = grid.size();
  std::vector<double> bucket(m, 0.0);
  std::mutex merge;
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> local(m, 0.0), scratch;
    for (std::size_t x = lo; x < hi; ++x) {
      auto row = sp.row(x, scratch);
      for (std::size_t y = x + 1; y < n; ++y) {
        auto it = std::lower_bound(grid.begin(), grid.end(), row[y]);
        if (it == grid.end()) continue;
        auto& slot = local[static_cast<std::size_t>(it - grid.begin())];
        slot = std::max(slot, std::fabs(g[x] - g[y]));
      }
    }
    std::lock_guard<std::mutex> lock(merge);
    for (std::size_t j = 0; j < m; ++j) bucket[j] = std::max(bucket[j], local[j]);
  });
  ModulusCurve c;
  c.t.assign(grid.begin(), grid.end());
  c.omega.resize(m);
  double run = 0.0;
  for (std::size_t j = 0; j < m; ++j) c.omega[j] = run = std::max(run, bucket[j]);
  auto keep = std::make_shared<LatticeElement>(g);
  c.sampler = [keep](double t) { return pair_scan_omega(*keep, t); };
  c.sup_abs = g.prefix_sup();
  return c;
}

ModulusCurve with_closed_form(ModulusCurve curve, const ClosedFormModulus& form) {
  for (std::size_t j = 0; j < curve.t.size(); ++j) {
    const double ref = form(curve.t[j]);
    if (curve.omega[j] > ref + 1e-12 * std::max(1.0, ref))
      throw InputError("closed form " + form.describe() + " is exceeded by the curve at t = " +
                       std::to_string(curve.t[j]));
  }
  curve.closed_form = form;
  return curve;
}

ErrorBound error_bound(const ModulusCurve& curve, double n) {
  if (curve.t.empty() || curve.t.size() != curve.omega.size()) throw InputError("error_bound: malformed curve");
  if (!(n > 0.0)) throw InputError("error_bound: n must be positive");
  ErrorBound r;
  Candidate best;
  for (std::size_t j = 0; j < curve.t.size(); ++j) {
    const double v = curve.omega[j] - n * curve.t[j];
    if (v > best.value) best = {v, curve.t[j]};
  }
  r.method = "grid";

  if (curve.closed_form) {
    const auto c = closed_form_sup(*curve.closed_form, n);
    if (std::isinf(c.value)) throw InputError("error_bound: closed form " + curve.closed_form->describe() + " is unbounded");
    if (c.value > best.value) best = c;
    r.method = "grid+closed-form";
  } else if (curve.sampler && curve.t.size() >= 2) {
    // Bisect the intervals around the current maximiser until it stabilises.
    std::vector<std::pair<double, double>> pts;
    for (std::size_t j = 0; j < curve.t.size(); ++j) pts.emplace_back(curve.t[j], curve.omega[j]);
    for (int round = 0; round < 60; ++round) {
      std::size_t j = 0;
      for (std::size_t k = 0; k < pts.size(); ++k)
        if (pts[k].second - n * pts[k].first > pts[j].second - n * pts[j].first) j = k;
      const double before = best.value;
      std::vector<double> mids;
      if (j > 0) mids.push_back(0.5 * (pts[j - 1].first + pts[j].first));
      if (j + 1 < pts.size()) mids.push_back(0.5 * (pts[j].first + pts[j + 1].first));
      for (double t : mids) {
        const double w = curve.sampler(t);
        auto it = std::lower_bound(pts.begin(), pts.end(), std::make_pair(t, -kInf));
        pts.insert(it, {t, w});
        if (w - n * t > best.value) best = {w - n * t, t};
      }
      if (round > 0 && best.value - before < 1e-9) break;
    }
    r.method = "grid+refinement";
  }
  r.alpha = std::max(0.0, best.value);
  r.argmax_t = r.alpha > 0.0 ? best.t : 0.0;

  r.proof_bound = kInf;
  const double two_sup = 2.0 * curve.sup_abs;
  for (std::size_t j = 0; j < curve.t.size(); ++j) {
    if (curve.t[j] <= 0.0) continue;
    const double b = std::max(curve.omega[j], two_sup - n * curve.t[j]);
    if (b < r.proof_bound) {
      r.proof_bound = b;
      r.t0 = curve.t[j];
    }
  }
  if (std::isinf(r.proof_bound)) r.proof_bound = std::max(r.alpha, two_sup);
  return r;
}

LipschitzResult lipschitz_constant(const LatticeElement& f) {
  require_metric(f, "lipschitz_constant");
  const auto& sp = f.carrier().space();
  const std::size_t n = sp.size();
  std::vector<LipschitzResult> per(n);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> scratch;
    for (std::size_t x = lo; x < hi; ++x) {
      auto row = sp.row(x, scratch);
      LipschitzResult r{0.0, x, x};
      for (std::size_t y = x + 1; y < n; ++y) {
        const double q = std::fabs(f[x] - f[y]) / row[y];
        if (q > r.constant) r = {q, x, y};
      }
      per[x] = r;
    }
  });
  LipschitzResult best;
  for (const auto& r : per)
    if (r.constant > best.constant) best = r;
  return best;
}

EnvelopeResult inf_convolution(const LatticeElement& g, std::size_t n, const ModulusCurve* curve) {
  require_metric(g, "inf_convolution");
  if (n < 1) throw InputError("inf_convolution: n must be >= 1");
  const auto& sp = g.carrier().space();
  const std::size_t size = sp.size();
  const double nn = static_cast<double>(n);
  std::vector<double> gn(size), alpha(size, 0.0);
  parallel_for(size, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> scratch;
    for (std::size_t x = lo; x < hi; ++x) {
      auto row = sp.row(x, scratch);
      double best = g[x], gap = 0.0;
      for (std::size_t y = 0; y < size; ++y) {
        const double pen = nn * row[y];
        best = std::min(best, g[y] + pen);
        gap = std::max(gap, std::fabs(g[x] - g[y]) - pen);
      }
      gn[x] = best;
      alpha[x] = gap;
    }
  });

  EnvelopeResult r{n, LatticeElement(g.carrier(), gn), 0.0, 0.0, 0.0, "pairwise-exact"};
  if (curve) {
    const auto eb = error_bound(*curve, nn);
    r.alpha_n = eb.alpha;
    r.alpha_method = eb.method;
  } else {
    r.alpha_n = *std::max_element(alpha.begin(), alpha.end());
  }
  for (std::size_t x = 0; x < size; ++x) {
    if (gn[x] > g[x]) throw InvariantError("inf_convolution: g_n > g at point " + sp.label(x));
    r.achieved_error = std::max(r.achieved_error, g[x] - gn[x]);
  }
  const double scale = std::max(1.0, g.prefix_sup());
  if (r.achieved_error > r.alpha_n + 1e-9 * scale)
    throw InvariantError("inf_convolution: achieved error " + std::to_string(r.achieved_error) +
                         " exceeds alpha_n = " + std::to_string(r.alpha_n));
  r.lipschitz_constant = lipschitz_constant(r.g_n).constant;
  if (r.lipschitz_constant > nn + 1e-9)
    throw InvariantError("inf_convolution: Lipschitz constant " + std::to_string(r.lipschitz_constant) +
                         " exceeds n = " + std::to_string(n));
  return r;
}

}  // namespace latticelab
