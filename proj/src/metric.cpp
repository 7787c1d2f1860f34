#include "latticelab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "latticelab/parallel.hpp"

namespace latticelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTriangleRelTol = 1e-12;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string MetricViolation::describe() const {
  std::ostringstream os;
  auto pair = [&] { os << "(" << i << "," << j << ")"; };
  switch (kind) {
    case Kind::NotSquare:
      os << "matrix is not square: row " << i << " has " << j << " entries, expected " << k;
      break;
    case Kind::NonFinite:
      os << "non-finite entry at ";
      pair();
      break;
    case Kind::Negative:
      os << "negative entry at ";
      pair();
      os << ": " << format_double(lhs);
      break;
    case Kind::NonZeroDiagonal:
      os << "non-zero diagonal at (" << i << "," << i << "): " << format_double(lhs);
      break;
    case Kind::Asymmetric:
      os << "asymmetric at ";
      pair();
      os << ": " << format_double(lhs) << " != " << format_double(rhs);
      break;
    case Kind::ZeroDistance:
      os << "zero distance between distinct points ";
      pair();
      break;
    case Kind::Triangle:
      os << "triangle violation at (" << i << "," << k << ") via " << j << ": " << format_double(lhs)
         << " > " << format_double(rhs);
      break;
  }
  return os.str();
}

void ValidationReport::add(MetricViolation v) {
  ++total;
  if (violations.size() < kMaxRecorded) violations.push_back(v);
}

std::string ValidationReport::summary() const {
  if (ok()) return "valid metric";
  std::ostringstream os;
  os << total << " metric axiom violation" << (total == 1 ? "" : "s");
  for (const auto& v : violations) os << "\n  " << v.describe();
  if (total > violations.size()) os << "\n  ... " << (total - violations.size()) << " more";
  return os.str();
}

MetricValidationError::MetricValidationError(ValidationReport report)
    : InputError(report.summary()), report_(std::move(report)) {}

ValidationReport FiniteMetricSpace::check_matrix(const std::vector<std::vector<double>>& m) {
  ValidationReport rep;
  const std::size_t n = m.size();
  if (n == 0) {
    rep.add({MetricViolation::Kind::NotSquare, 0, 0, 0, 0, 0});
    return rep;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (m[i].size() != n) rep.add({MetricViolation::Kind::NotSquare, i, m[i].size(), n, 0, 0});
  if (!rep.ok()) return rep;

  bool finite = true;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = m[i][j];
      if (!std::isfinite(d)) {
        rep.add({MetricViolation::Kind::NonFinite, i, j, 0, d, 0});
        finite = false;
        continue;
      }
      scale = std::max(scale, std::fabs(d));
      if (i == j) {
        if (d != 0.0) rep.add({MetricViolation::Kind::NonZeroDiagonal, i, i, 0, d, 0});
        continue;
      }
      if (d < 0.0) rep.add({MetricViolation::Kind::Negative, i, j, 0, d, 0});
      if (i < j) {
        if (d != m[j][i] && std::isfinite(m[j][i]))
          rep.add({MetricViolation::Kind::Asymmetric, i, j, 0, d, m[j][i]});
        if (d == 0.0) rep.add({MetricViolation::Kind::ZeroDistance, i, j, 0, 0, 0});
      }
    }
  }
  if (!finite) return rep;

  const double tol = kTriangleRelTol * scale;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      const double lhs = m[i][k];
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        const double rhs = m[i][j] + m[j][k];
        if (lhs > rhs + tol) rep.add({MetricViolation::Kind::Triangle, i, j, k, lhs, rhs});
      }
    }
  return rep;
}

void FiniteMetricSpace::index_labels(std::vector<std::string> labels, std::size_t n) {
  if (labels.empty()) {
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != n)
    throw InputError("expected " + std::to_string(n) + " labels, got " + std::to_string(labels.size()));
  index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!index_.emplace(labels[i], i).second) throw InputError("duplicate label '" + labels[i] + "'");
  labels_ = std::move(labels);
}

FiniteMetricSpace FiniteMetricSpace::from_matrix(const std::vector<std::vector<double>>& matrix,
                                                 std::vector<std::string> labels) {
  auto rep = check_matrix(matrix);
  if (!rep.ok()) throw MetricValidationError(std::move(rep));
  FiniteMetricSpace s;
  const std::size_t n = matrix.size();
  s.index_labels(std::move(labels), n);
  s.dist_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      s.dist_[i * n + j] = matrix[i][j];
      s.diameter_ = std::max(s.diameter_, matrix[i][j]);
    }
  return s;
}

FiniteMetricSpace FiniteMetricSpace::from_coordinates(const std::vector<std::vector<double>>& points,
                                                      std::vector<std::string> labels) {
  if (points.empty()) throw InputError("coordinate list is empty");
  const std::size_t dim = points.front().size();
  if (dim == 0) throw InputError("points must have at least one coordinate");
  FiniteMetricSpace s;
  const std::size_t n = points.size();
  s.dimension_ = dim;
  s.coords_.reserve(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].size() != dim)
      throw InputError("point " + std::to_string(i) + " has " + std::to_string(points[i].size()) +
                       " coordinates, expected " + std::to_string(dim));
    for (double c : points[i]) {
      if (!std::isfinite(c)) throw InputError("non-finite coordinate in point " + std::to_string(i));
      s.coords_.push_back(c);
    }
  }
  s.index_labels(std::move(labels), n);

  // Duplicate points would give a zero off-diagonal distance.
  auto prof = isolation_profile(s);
  if (n > 1 && prof.delta == 0.0) {
    ValidationReport rep;
    const std::size_t i = prof.argmin;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && s.distance(i, j) == 0.0) {
        rep.add({MetricViolation::Kind::ZeroDistance, std::min(i, j), std::max(i, j), 0, 0, 0});
        break;
      }
    throw MetricValidationError(std::move(rep));
  }

  if (dim == 1) {
    auto [lo, hi] = std::minmax_element(s.coords_.begin(), s.coords_.end());
    s.diameter_ = *hi - *lo;
  } else {
    std::vector<double> best(n, 0.0);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        for (std::size_t j = i + 1; j < n; ++j) best[i] = std::max(best[i], s.distance(i, j));
    });
    s.diameter_ = n ? *std::max_element(best.begin(), best.end()) : 0.0;
  }
  return s;
}

FiniteMetricSpace FiniteMetricSpace::on_line(std::span<const double> xs, std::vector<std::string> labels) {
  std::vector<std::vector<double>> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back({x});
  return from_coordinates(pts, std::move(labels));
}

std::optional<std::size_t> FiniteMetricSpace::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FiniteMetricSpace::index_of(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw InputError("unknown label '" + std::string(label) + "'");
}

double FiniteMetricSpace::distance(std::size_t i, std::size_t j) const {
  const std::size_t n = size();
  if (dimension_ == 0) return dist_[i * n + j];
  const double* a = coords_.data() + i * dimension_;
  const double* b = coords_.data() + j * dimension_;
  if (dimension_ == 1) return std::fabs(a[0] - b[0]);
  double s = 0.0;
  for (std::size_t c = 0; c < dimension_; ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return std::sqrt(s);
}

std::span<const double> FiniteMetricSpace::row(std::size_t i, std::vector<double>& scratch) const {
  const std::size_t n = size();
  if (dimension_ == 0) return {dist_.data() + i * n, n};
  scratch.resize(n);
  for (std::size_t j = 0; j < n; ++j) scratch[j] = distance(i, j);
  return scratch;
}

std::span<const double> FiniteMetricSpace::coordinates(std::size_t i) const {
  if (dimension_ == 0) return {};
  return {coords_.data() + i * dimension_, dimension_};
}

const std::vector<std::vector<double>> FiniteMetricSpace::distance_matrix() const {
  const std::size_t n = size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = distance(i, j);
  return m;
}

bool FiniteMetricSpace::operator==(const FiniteMetricSpace& o) const {
  return labels_ == o.labels_ && dimension_ == o.dimension_ && coords_ == o.coords_ && dist_ == o.dist_;
}

double isolation_radius(const FiniteMetricSpace& space, std::size_t x) {
  if (x >= space.size()) throw InputError("point index " + std::to_string(x) + " out of range");
  double r = kInf;
  for (std::size_t y = 0; y < space.size(); ++y)
    if (y != x) r = std::min(r, space.distance(x, y));
  return r;
}

double isolation_radius(const FiniteMetricSpace& space, std::string_view label) {
  return isolation_radius(space, space.index_of(label));
}

IsolationProfile isolation_profile(const FiniteMetricSpace& space) {
  const std::size_t n = space.size();
  IsolationProfile prof;
  prof.radius.assign(n, kInf);
  if (space.dimension() == 1 && n > 1) {
    // Nearest neighbours on the line are adjacent in sorted order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return space.coordinates(a)[0] < space.coordinates(b)[0];
    });
    for (std::size_t r = 0; r + 1 < n; ++r) {
      const std::size_t a = order[r], b = order[r + 1];
      const double d = space.distance(a, b);
      prof.radius[a] = std::min(prof.radius[a], d);
      prof.radius[b] = std::min(prof.radius[b], d);
    }
  } else {
    parallel_for(n, [&](std::size_t b, std::size_t e) {
      std::vector<double> scratch;
      for (std::size_t x = b; x < e; ++x) {
        auto row = space.row(x, scratch);
        double r = kInf;
        for (std::size_t y = 0; y < n; ++y)
          if (y != x) r = std::min(r, row[y]);
        prof.radius[x] = r;
      }
    });
  }
  for (std::size_t x = 0; x < n; ++x)
    if (prof.radius[x] < prof.delta) {
      prof.delta = prof.radius[x];
      prof.argmin = x;
    }
  return prof;
}

double discreteness_constant(const FiniteMetricSpace& space) { return isolation_profile(space).delta; }

std::optional<ClosePair> find_close_pair(const FiniteMetricSpace& space,
                                         std::span<const std::size_t> excluded, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("find_close_pair: eps must be a positive real");
  const std::size_t n = space.size();
  std::vector<char> in_f(n, 0);
  for (std::size_t x : excluded) {
    if (x >= n) throw InputError("excluded point index " + std::to_string(x) + " out of range");
    in_f[x] = 1;
  }
  const auto prof = isolation_profile(space);

  double eta = eps;
  if (!excluded.empty()) {
    eta = kInf;
    for (std::size_t x : excluded) eta = std::min(eta, prof.radius[x]);
  }
  const double theta = std::min(eps, eta) / 4.0;

  std::optional<std::size_t> a;
  for (std::size_t x = 0; x < n; ++x)
    if (!in_f[x] && (!a || prof.radius[x] < prof.radius[*a])) a = x;
  if (!a) return std::nullopt;

  if (prof.radius[*a] < theta) {
    std::vector<double> scratch;
    auto row = space.row(*a, scratch);
    std::optional<std::size_t> b;
    for (std::size_t y = 0; y < n; ++y)
      if (y != *a && !in_f[y] && (!b || row[y] < row[*b])) b = y;
    if (b && row[*b] < eps) return ClosePair{*a, *b, row[*b], theta, ClosePair::Route::IsolationRadius};
  }

  // Finite spaces need not have points below theta; scan every admissible pair.
  std::vector<double> best(n, kInf);
  std::vector<std::size_t> arg(n, 0);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> scratch;
    for (std::size_t x = lo; x < hi; ++x) {
      if (in_f[x]) continue;
      auto row = space.row(x, scratch);
      for (std::size_t y = x + 1; y < n; ++y)
        if (!in_f[y] && row[y] < best[x]) {
          best[x] = row[y];
          arg[x] = y;
        }
    }
  });
  std::optional<std::size_t> bx;
  for (std::size_t x = 0; x < n; ++x)
    if (best[x] < eps && (!bx || best[x] < best[*bx])) bx = x;
  if (!bx) return std::nullopt;
  return ClosePair{*bx, arg[*bx], best[*bx], theta, ClosePair::Route::ExhaustiveScan};
}

double dist_to_set(const FiniteMetricSpace& space, std::size_t x, std::span<const std::size_t> set) {
  if (set.empty()) throw InputError("dist_to_set: the target set is empty");
  if (x >= space.size()) throw InputError("point index " + std::to_string(x) + " out of range");
  double r = kInf;
  for (std::size_t a : set) {
    if (a >= space.size()) throw InputError("set index " + std::to_string(a) + " out of range");
    r = std::min(r, space.distance(x, a));
  }
  return r;
}

}  // namespace latticelab
