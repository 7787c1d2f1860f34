#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latticelab/metric.hpp"
#include "latticelab/power_sums.hpp"

namespace latticelab {

/// The domain of a lattice element: a prefix {1..size} of the natural
/// numbers (the rest described by a tail), or the points of a metric space.
class Carrier {
 public:
  enum class Kind { IndexSet, MetricPoints };

  static Carrier index_set(std::size_t size);
  static Carrier metric(std::shared_ptr<const FiniteMetricSpace> space);

  Kind kind() const { return kind_; }
  bool is_metric() const { return kind_ == Kind::MetricPoints; }
  std::size_t size() const { return size_; }
  /// Throws InputError on IndexSet carriers.
  const FiniteMetricSpace& space() const;
  const std::shared_ptr<const FiniteMetricSpace>& space_ptr() const { return space_; }

  bool operator==(const Carrier& other) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::IndexSet;
  std::size_t size_ = 0;
  std::shared_ptr<const FiniteMetricSpace> space_;
};

/// j -> scale * j^(-exponent) for first <= j <= last.
struct TailSegment {
  std::uint64_t first = 1;
  std::uint64_t last = kInfiniteIndex;
  double scale = 0.0;
  double exponent = 0.0;

  double value(std::uint64_t j) const;
  bool operator==(const TailSegment&) const = default;
};

/// Values of an index-set element beyond its stored prefix.
///
/// Stored as contiguous segments covering [1, infinity); only indices past
/// the prefix are ever read. The class of the last (unbounded) segment is
/// the reported kind: scale 0 is Zero, exponent 0 is Constant, anything
/// else is Power. None means the tail is unknown.
class TailDescriptor {
 public:
  enum class Kind { Zero, Constant, Power, None };

  static TailDescriptor zero();
  static TailDescriptor constant(double c);
  static TailDescriptor power(double exponent, double scale = 1.0);
  static TailDescriptor none();
  /// Segments must be contiguous from 1 to kInfiniteIndex with finite scales
  /// and exponents >= 0. Adjacent equal segments are merged.
  static TailDescriptor piecewise(std::vector<TailSegment> segments);
  /// This tail restricted to [1, n] and zero afterwards.
  TailDescriptor truncated(std::uint64_t n) const;

  Kind kind() const;
  bool is_none() const { return none_; }
  const std::vector<TailSegment>& segments() const { return segments_; }
  const TailSegment& final_segment() const { return segments_.back(); }
  /// Throws InputError when the tail is None.
  double value(std::uint64_t j) const;
  /// sup |value(j)| over j >= from; throws when None.
  double sup_abs(std::uint64_t from) const;
  /// Same breakpoints and exponents (scales may differ).
  bool same_shape(const TailDescriptor& other) const;

  bool operator==(const TailDescriptor& other) const;
  std::string describe() const;

 private:
  std::vector<TailSegment> segments_;
  bool none_ = false;
};

TailDescriptor tail_meet(const TailDescriptor& a, const TailDescriptor& b);
TailDescriptor tail_join(const TailDescriptor& a, const TailDescriptor& b);
TailDescriptor tail_abs(const TailDescriptor& a);
TailDescriptor tail_add(const TailDescriptor& a, const TailDescriptor& b, double b_factor = 1.0);
TailDescriptor tail_scale(const TailDescriptor& a, double factor);

/// A real function on a carrier. Index-set elements additionally carry a
/// tail; metric elements always have tail None, which no metric query reads.
class LatticeElement {
 public:
  LatticeElement(Carrier carrier, std::vector<double> values,
                 TailDescriptor tail = TailDescriptor::zero());

  static LatticeElement zeros(const Carrier& carrier);
  /// Constant function; on index sets the tail is Constant(c) too.
  static LatticeElement constant(const Carrier& carrier, double c);

  const Carrier& carrier() const { return carrier_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  const TailDescriptor& tail() const { return tail_; }
  /// 1-based coordinate including the tail (index sets only).
  double at(std::uint64_t j) const;

  double prefix_sup() const;
  /// Includes the tail on index sets; throws InputError when it is None.
  double sup_norm() const;

  bool operator==(const LatticeElement& other) const;

 private:
  Carrier carrier_;
  std::vector<double> values_;
  TailDescriptor tail_;
};

LatticeElement meet(const LatticeElement& a, const LatticeElement& b);
LatticeElement join(const LatticeElement& a, const LatticeElement& b);
LatticeElement abs(const LatticeElement& a);
/// |a| meet u. Rejects u with a negative entry.
LatticeElement truncate(const LatticeElement& a, const LatticeElement& u);
LatticeElement add(const LatticeElement& a, const LatticeElement& b);
LatticeElement subtract(const LatticeElement& a, const LatticeElement& b);
LatticeElement scale(const LatticeElement& a, double factor);
/// Positive part a join 0.
LatticeElement positive_part(const LatticeElement& a);
/// a <= b at every stored coordinate.
bool pointwise_le(const LatticeElement& a, const LatticeElement& b);

/// Sum of |x(j)|^p over lo <= j <= hi (hi may be kInfiniteIndex) on an
/// index-set carrier; +infinity when the tail sum diverges. Throws
/// InputError when the range reaches an undecidable tail.
double lp_mass(const LatticeElement& x, double p, std::uint64_t lo = 1, std::uint64_t hi = kInfiniteIndex);
double lp_norm(const LatticeElement& x, double p);

struct SpaceTag {
  enum class Kind { C0, Lp, Linf, LipB, BoundedFns };
  Kind kind = Kind::Linf;
  double p = 0.0;

  static SpaceTag c0() { return {Kind::C0, 0.0}; }
  static SpaceTag lp(double p);
  static SpaceTag linf() { return {Kind::Linf, 0.0}; }
  static SpaceTag lip_b() { return {Kind::LipB, 0.0}; }
  static SpaceTag bounded_fns() { return {Kind::BoundedFns, 0.0}; }
  /// Accepts c0, lp:<p>, linf, lipb, bounded.
  static SpaceTag parse(std::string_view text);

  bool needs_metric() const { return kind == Kind::LipB || kind == Kind::BoundedFns; }
  std::string name() const;
  bool operator==(const SpaceTag&) const = default;
};

struct Membership {
  enum class Status { Member, NotMember, Undecidable };
  Status status = Status::Undecidable;
  std::string reason;
  std::optional<double> lipschitz_constant;  // LipB only

  bool member() const { return status == Status::Member; }
  bool decided() const { return status != Status::Undecidable; }
};

/// Throws InputError when the tag does not fit the carrier kind.
Membership member_of(const LatticeElement& x, const SpaceTag& tag);

}  // namespace latticelab
