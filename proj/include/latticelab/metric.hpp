#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "latticelab/errors.hpp"

namespace latticelab {

/// One failed metric axiom. Indices refer to matrix rows; k is only used
/// for triangle violations, where lhs = d(i,k) and rhs = d(i,j) + d(j,k).
struct MetricViolation {
  enum class Kind { NotSquare, NonFinite, Negative, NonZeroDiagonal, Asymmetric, ZeroDistance, Triangle };
  Kind kind;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;
  double lhs = 0.0;
  double rhs = 0.0;

  std::string describe() const;
};

struct ValidationReport {
  std::vector<MetricViolation> violations;  // capped at kMaxRecorded
  std::size_t total = 0;                    // full count, including unrecorded ones

  static constexpr std::size_t kMaxRecorded = 100;

  bool ok() const { return total == 0; }
  void add(MetricViolation v);
  std::string summary() const;
};

class MetricValidationError : public InputError {
 public:
  explicit MetricValidationError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// A validated finite metric space over labelled points.
///
/// Two storage modes: a dense distance matrix (validated against every
/// axiom, including the triangle inequality at relative tolerance 1e-12 of
/// the largest entry), or Euclidean coordinates in R^k whose distances are
/// computed on demand. Immutable after construction.
class FiniteMetricSpace {
 public:
  static ValidationReport check_matrix(const std::vector<std::vector<double>>& matrix);

  /// Throws MetricValidationError listing every violated axiom.
  static FiniteMetricSpace from_matrix(const std::vector<std::vector<double>>& matrix,
                                       std::vector<std::string> labels = {});
  /// Points in R^k; rejects ragged input, non-finite coordinates and duplicates.
  static FiniteMetricSpace from_coordinates(const std::vector<std::vector<double>>& points,
                                            std::vector<std::string> labels = {});
  static FiniteMetricSpace on_line(std::span<const double> xs, std::vector<std::string> labels = {});

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  std::optional<std::size_t> find(std::string_view label) const;
  /// Throws InputError for unknown labels.
  std::size_t index_of(std::string_view label) const;

  double distance(std::size_t i, std::size_t j) const;
  /// Distances from point i to every point. Returns a view that is valid
  /// until the next call with the same scratch buffer.
  std::span<const double> row(std::size_t i, std::vector<double>& scratch) const;

  bool has_coordinates() const { return dimension_ > 0; }
  std::size_t dimension() const { return dimension_; }
  std::span<const double> coordinates(std::size_t i) const;
  const std::vector<std::vector<double>> distance_matrix() const;

  /// Largest pairwise distance (used as the scale of relative tolerances).
  double diameter() const { return diameter_; }

  bool operator==(const FiniteMetricSpace& other) const;

 private:
  FiniteMetricSpace() = default;
  void index_labels(std::vector<std::string> labels, std::size_t n);

  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dimension_ = 0;
  std::vector<double> coords_;  // size() * dimension_, row-major
  std::vector<double> dist_;    // size() * size(), only in matrix mode
  double diameter_ = 0.0;
};

/// Isolation radius d(x) = min over y != x of d(x,y); +infinity for a singleton.
double isolation_radius(const FiniteMetricSpace& space, std::size_t x);
double isolation_radius(const FiniteMetricSpace& space, std::string_view label);

struct IsolationProfile {
  std::vector<double> radius;  // per point
  double delta = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;  // a point realising delta (smallest index)
};

IsolationProfile isolation_profile(const FiniteMetricSpace& space);

/// Uniform discreteness constant: the minimum isolation radius.
double discreteness_constant(const FiniteMetricSpace& space);

struct ClosePair {
  enum class Route {
    IsolationRadius,  // a minimises d(.) outside F with d(a) < theta, b its nearest point
    ExhaustiveScan,   // fallback: closest pair of X \ F
  };
  std::size_t a = 0;
  std::size_t b = 0;
  double distance = 0.0;
  double theta = 0.0;
  Route route = Route::IsolationRadius;
};

/// Distinct a, b outside `excluded` with d(a,b) < eps, or nothing when no
/// such pair exists. Ties are broken by smallest index.
std::optional<ClosePair> find_close_pair(const FiniteMetricSpace& space,
                                         std::span<const std::size_t> excluded, double eps);

/// min over a in A of d(x, a). Throws InputError for an empty A.
double dist_to_set(const FiniteMetricSpace& space, std::size_t x, std::span<const std::size_t> set);

}  // namespace latticelab
