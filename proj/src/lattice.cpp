#include "latticelab/lattice.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "latticelab/envelopes.hpp"

namespace latticelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_carrier(const LatticeElement& a, const LatticeElement& b, const char* op) {
  if (!(a.carrier() == b.carrier()))
    throw InputError(std::string(op) + ": carrier mismatch (" + a.carrier().describe() + " vs " +
                     b.carrier().describe() + ")");
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string index_str(std::uint64_t j) { return j == kInfiniteIndex ? "inf" : std::to_string(j); }

enum class SegClass { Zero, Constant, Power };

SegClass classify(const TailSegment& s) {
  if (s.scale == 0.0) return SegClass::Zero;
  return s.exponent == 0.0 ? SegClass::Constant : SegClass::Power;
}

// Common refinement of two segment lists: pieces [first,last] with the
// covering segment of each side.
struct Piece {
  std::uint64_t first, last;
  const TailSegment* a;
  const TailSegment* b;
};

std::vector<Piece> refine(const std::vector<TailSegment>& a, const std::vector<TailSegment>& b) {
  std::vector<Piece> out;
  std::size_t i = 0, k = 0;
  std::uint64_t pos = 1;
  while (i < a.size() && k < b.size()) {
    const std::uint64_t end = std::min(a[i].last, b[k].last);
    out.push_back({pos, end, &a[i], &b[k]});
    if (end == kInfiniteIndex) break;
    pos = end + 1;
    if (a[i].last == end) ++i;
    if (b[k].last == end) ++k;
  }
  return out;
}

double abs_pow(double v, double p) {
  const double a = std::fabs(v);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

}  // namespace

// ---------------------------------------------------------------- Carrier

Carrier Carrier::index_set(std::size_t size) {
  if (size == 0) throw InputError("index-set carrier must have size >= 1");
  Carrier c;
  c.kind_ = Kind::IndexSet;
  c.size_ = size;
  return c;
}

Carrier Carrier::metric(std::shared_ptr<const FiniteMetricSpace> space) {
  if (!space || space->size() == 0) throw InputError("metric carrier needs a non-empty space");
  Carrier c;
  c.kind_ = Kind::MetricPoints;
  c.size_ = space->size();
  c.space_ = std::move(space);
  return c;
}

const FiniteMetricSpace& Carrier::space() const {
  if (!space_) throw InputError("carrier is an index set, not a metric space");
  return *space_;
}

bool Carrier::operator==(const Carrier& o) const {
  if (kind_ != o.kind_ || size_ != o.size_) return false;
  if (kind_ == Kind::IndexSet) return true;
  return space_ == o.space_ || *space_ == *o.space_;
}

std::string Carrier::describe() const {
  return (kind_ == Kind::IndexSet ? "index set of size " : "metric space of size ") + std::to_string(size_);
}

// ---------------------------------------------------------------- tails

double TailSegment::value(std::uint64_t j) const {
  if (scale == 0.0) return 0.0;
  if (exponent == 0.0) return scale;
  return scale * std::pow(static_cast<double>(j), -exponent);
}

TailDescriptor TailDescriptor::zero() { return piecewise({{1, kInfiniteIndex, 0.0, 0.0}}); }

TailDescriptor TailDescriptor::constant(double c) { return piecewise({{1, kInfiniteIndex, c, 0.0}}); }

TailDescriptor TailDescriptor::power(double exponent, double scale) {
  if (!(exponent > 0.0)) throw InputError("power tail needs a positive exponent");
  return piecewise({{1, kInfiniteIndex, scale, exponent}});
}

TailDescriptor TailDescriptor::none() {
  TailDescriptor t;
  t.none_ = true;
  return t;
}

TailDescriptor TailDescriptor::piecewise(std::vector<TailSegment> segs) {
  if (segs.empty()) throw InputError("tail needs at least one segment");
  std::uint64_t expect = 1;
  for (const auto& s : segs) {
    if (s.first != expect || s.last < s.first)
      throw InputError("tail segments must be contiguous from index 1");
    if (!std::isfinite(s.scale) || !std::isfinite(s.exponent) || s.exponent < 0.0)
      throw InputError("tail segment needs a finite scale and exponent >= 0");
    if (s.last == kInfiniteIndex) {
      if (&s != &segs.back()) throw InputError("tail segment after the unbounded one");
    } else {
      expect = s.last + 1;
    }
  }
  if (segs.back().last != kInfiniteIndex) throw InputError("tail must extend to infinity");

  TailDescriptor t;
  for (auto s : segs) {
    if (s.scale == 0.0) s.exponent = 0.0;
    if (s.scale == 0.0 && std::signbit(s.scale)) s.scale = 0.0;
    if (!t.segments_.empty()) {
      auto& prev = t.segments_.back();
      if (prev.scale == s.scale && prev.exponent == s.exponent) {
        prev.last = s.last;
        continue;
      }
    }
    t.segments_.push_back(s);
  }
  return t;
}

TailDescriptor TailDescriptor::truncated(std::uint64_t n) const {
  if (none_) return none();
  if (n == kInfiniteIndex) return *this;
  std::vector<TailSegment> out;
  for (const auto& s : segments_) {
    if (s.first > n) break;
    auto c = s;
    c.last = std::min(s.last, n);
    out.push_back(c);
  }
  out.push_back({n + 1, kInfiniteIndex, 0.0, 0.0});
  return piecewise(std::move(out));
}

TailDescriptor::Kind TailDescriptor::kind() const {
  if (none_) return Kind::None;
  switch (classify(segments_.back())) {
    case SegClass::Zero: return Kind::Zero;
    case SegClass::Constant: return Kind::Constant;
    default: return Kind::Power;
  }
}

double TailDescriptor::value(std::uint64_t j) const {
  if (none_) throw InputError("tail descriptor is None: coordinate " + std::to_string(j) + " is undecidable");
  auto it = std::lower_bound(segments_.begin(), segments_.end(), j,
                             [](const TailSegment& s, std::uint64_t v) { return s.last < v; });
  return it->value(j);
}

double TailDescriptor::sup_abs(std::uint64_t from) const {
  if (none_) throw InputError("tail descriptor is None: tail supremum is undecidable");
  double best = 0.0;
  for (const auto& s : segments_) {
    if (s.last < from) continue;
    best = std::max(best, std::fabs(s.value(std::max(s.first, from))));
  }
  return best;
}

bool TailDescriptor::same_shape(const TailDescriptor& o) const {
  if (none_ || o.none_ || segments_.size() != o.segments_.size()) return false;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto &a = segments_[i], &b = o.segments_[i];
    if (a.first != b.first || a.last != b.last || a.exponent != b.exponent) return false;
  }
  return true;
}

bool TailDescriptor::operator==(const TailDescriptor& o) const {
  return none_ == o.none_ && segments_ == o.segments_;
}

std::string TailDescriptor::describe() const {
  if (none_) return "None";
  auto seg = [](const TailSegment& s) {
    switch (classify(s)) {
      case SegClass::Zero: return std::string("Zero");
      case SegClass::Constant: return "Constant(" + num(s.scale) + ")";
      default: return "Power(a=" + num(s.exponent) + ", scale=" + num(s.scale) + ")";
    }
  };
  if (segments_.size() == 1) return seg(segments_[0]);
  std::string out;
  for (const auto& s : segments_) {
    if (!out.empty()) out += "; ";
    out += seg(s) + " on [" + index_str(s.first) + "," + index_str(s.last) + "]";
  }
  return out;
}

namespace {

template <class Pick>
TailDescriptor tail_select(const TailDescriptor& a, const TailDescriptor& b, Pick pick) {
  if (a.is_none() || b.is_none() || a.kind() != b.kind() || !a.same_shape(b)) return TailDescriptor::none();
  std::vector<TailSegment> out;
  for (std::size_t i = 0; i < a.segments().size(); ++i) {
    const auto &sa = a.segments()[i], &sb = b.segments()[i];
    if (classify(sa) != classify(sb)) return TailDescriptor::none();
    auto s = sa;
    s.scale = pick(sa.scale, sb.scale);
    out.push_back(s);
  }
  return TailDescriptor::piecewise(std::move(out));
}

}  // namespace

TailDescriptor tail_meet(const TailDescriptor& a, const TailDescriptor& b) {
  return tail_select(a, b, [](double x, double y) { return std::min(x, y); });
}

TailDescriptor tail_join(const TailDescriptor& a, const TailDescriptor& b) {
  return tail_select(a, b, [](double x, double y) { return std::max(x, y); });
}

TailDescriptor tail_abs(const TailDescriptor& a) {
  if (a.is_none()) return a;
  auto segs = a.segments();
  for (auto& s : segs) s.scale = std::fabs(s.scale);
  return TailDescriptor::piecewise(std::move(segs));
}

TailDescriptor tail_add(const TailDescriptor& a, const TailDescriptor& b, double f) {
  if (a.is_none() || b.is_none()) return TailDescriptor::none();
  std::vector<TailSegment> out;
  for (const auto& pc : refine(a.segments(), b.segments())) {
    const double sb = f * pc.b->scale;
    TailSegment s{pc.first, pc.last, 0.0, 0.0};
    if (sb == 0.0) {
      s.scale = pc.a->scale;
      s.exponent = pc.a->exponent;
    } else if (pc.a->scale == 0.0) {
      s.scale = sb;
      s.exponent = pc.b->exponent;
    } else if (pc.a->exponent == pc.b->exponent) {
      s.scale = pc.a->scale + sb;
      s.exponent = pc.a->exponent;
    } else {
      return TailDescriptor::none();
    }
    if (!std::isfinite(s.scale)) return TailDescriptor::none();
    out.push_back(s);
  }
  return TailDescriptor::piecewise(std::move(out));
}

TailDescriptor tail_scale(const TailDescriptor& a, double factor) {
  if (a.is_none()) return a;
  auto segs = a.segments();
  for (auto& s : segs) {
    s.scale *= factor;
    if (!std::isfinite(s.scale)) return TailDescriptor::none();
  }
  return TailDescriptor::piecewise(std::move(segs));
}

// ---------------------------------------------------------------- elements

LatticeElement::LatticeElement(Carrier carrier, std::vector<double> values, TailDescriptor tail)
    : carrier_(std::move(carrier)), values_(std::move(values)), tail_(std::move(tail)) {
  if (values_.size() != carrier_.size())
    throw InputError("element has " + std::to_string(values_.size()) + " values but its carrier has " +
                     std::to_string(carrier_.size()) + " points");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i])) throw InputError("non-finite value at coordinate " + std::to_string(i + 1));
  if (carrier_.is_metric()) tail_ = TailDescriptor::none();
}

LatticeElement LatticeElement::zeros(const Carrier& carrier) {
  return LatticeElement(carrier, std::vector<double>(carrier.size(), 0.0));
}

LatticeElement LatticeElement::constant(const Carrier& carrier, double c) {
  return LatticeElement(carrier, std::vector<double>(carrier.size(), c), TailDescriptor::constant(c));
}

double LatticeElement::at(std::uint64_t j) const {
  if (j == 0) throw InputError("coordinates are 1-based");
  if (j <= values_.size()) return values_[j - 1];
  if (carrier_.is_metric()) throw InputError("coordinate " + std::to_string(j) + " outside the metric carrier");
  return tail_.value(j);
}

double LatticeElement::prefix_sup() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::fabs(v));
  return m;
}

double LatticeElement::sup_norm() const {
  double m = prefix_sup();
  if (!carrier_.is_metric()) m = std::max(m, tail_.sup_abs(values_.size() + 1));
  return m;
}

bool LatticeElement::operator==(const LatticeElement& o) const {
  return carrier_ == o.carrier_ && values_ == o.values_ && tail_ == o.tail_;
}

namespace {

template <class Op>
std::vector<double> zip(const LatticeElement& a, const LatticeElement& b, Op op) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]);
  return out;
}

template <class Op>
std::vector<double> map(const LatticeElement& a, Op op) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i]);
  return out;
}

}  // namespace

LatticeElement meet(const LatticeElement& a, const LatticeElement& b) {
  require_same_carrier(a, b, "meet");
  return LatticeElement(a.carrier(), zip(a, b, [](double x, double y) { return std::min(x, y); }),
                        tail_meet(a.tail(), b.tail()));
}

LatticeElement join(const LatticeElement& a, const LatticeElement& b) {
  require_same_carrier(a, b, "join");
  return LatticeElement(a.carrier(), zip(a, b, [](double x, double y) { return std::max(x, y); }),
                        tail_join(a.tail(), b.tail()));
}

LatticeElement abs(const LatticeElement& a) {
  return LatticeElement(a.carrier(), map(a, [](double x) { return std::fabs(x); }), tail_abs(a.tail()));
}

LatticeElement truncate(const LatticeElement& a, const LatticeElement& u) {
  require_same_carrier(a, u, "truncate");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] < 0.0) throw InputError("truncate: u has a negative entry at coordinate " + std::to_string(i + 1));
  if (!u.tail().is_none())
    for (const auto& s : u.tail().segments())
      if (s.last > u.size() && s.scale < 0.0) throw InputError("truncate: u has a negative tail");
  return meet(abs(a), u);
}

LatticeElement add(const LatticeElement& a, const LatticeElement& b) {
  require_same_carrier(a, b, "add");
  return LatticeElement(a.carrier(), zip(a, b, [](double x, double y) { return x + y; }),
                        tail_add(a.tail(), b.tail()));
}

LatticeElement subtract(const LatticeElement& a, const LatticeElement& b) {
  require_same_carrier(a, b, "subtract");
  return LatticeElement(a.carrier(), zip(a, b, [](double x, double y) { return x - y; }),
                        tail_add(a.tail(), b.tail(), -1.0));
}

LatticeElement scale(const LatticeElement& a, double factor) {
  if (!std::isfinite(factor)) throw InputError("scale: factor must be finite");
  return LatticeElement(a.carrier(), map(a, [&](double x) { return factor * x; }), tail_scale(a.tail(), factor));
}

LatticeElement positive_part(const LatticeElement& a) {
  TailDescriptor t = TailDescriptor::none();
  if (!a.tail().is_none()) {
    auto segs = a.tail().segments();
    for (auto& s : segs) s.scale = std::max(s.scale, 0.0);
    t = TailDescriptor::piecewise(std::move(segs));
  }
  return LatticeElement(a.carrier(), map(a, [](double x) { return std::max(x, 0.0); }), t);
}

bool pointwise_le(const LatticeElement& a, const LatticeElement& b) {
  require_same_carrier(a, b, "pointwise_le");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] <= b[i])) return false;
  return true;
}

double lp_mass(const LatticeElement& x, double p, std::uint64_t lo, std::uint64_t hi) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InputError("lp_mass: p must satisfy 1 <= p < inf");
  if (x.carrier().is_metric()) throw InputError("lp_mass: needs an index-set carrier");
  lo = std::max<std::uint64_t>(lo, 1);
  if (hi < lo) return 0.0;
  const std::uint64_t k = x.size();

  // Neumaier-compensated prefix sum.
  double sum = 0.0, comp = 0.0;
  auto accumulate = [&](double v) {
    const double t = sum + v;
    comp += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  };
  for (std::uint64_t j = lo; j <= std::min(hi, k); ++j) accumulate(abs_pow(x[j - 1], p));
  if (hi <= k) return sum + comp;

  const auto& tail = x.tail();
  if (tail.is_none())
    throw InputError("lp_mass: tail descriptor is None, the mass beyond index " + std::to_string(k) +
                     " is undecidable");
  const std::uint64_t from = std::max(lo, k + 1);
  for (const auto& s : tail.segments()) {
    if (s.last < from || s.first > hi || s.scale == 0.0) continue;
    const double part = abs_pow(s.scale, p) * power_sum(s.exponent * p, std::max(s.first, from), std::min(s.last, hi));
    if (std::isinf(part)) return kInf;
    accumulate(part);
  }
  return sum + comp;
}

double lp_norm(const LatticeElement& x, double p) {
  const double m = lp_mass(x, p);
  return std::isinf(m) ? kInf : std::pow(m, 1.0 / p);
}

// ---------------------------------------------------------------- tags

SpaceTag SpaceTag::lp(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InputError("lp tag requires 1 <= p < inf");
  return {Kind::Lp, p};
}

SpaceTag SpaceTag::parse(std::string_view text) {
  if (text == "c0") return c0();
  if (text == "linf") return linf();
  if (text == "lipb") return lip_b();
  if (text == "bounded") return bounded_fns();
  if (text.substr(0, 3) == "lp:") {
    const auto body = text.substr(3);
    double p = 0.0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), p);
    if (ec != std::errc() || ptr != body.data() + body.size()) throw InputError("bad lp exponent in '" + std::string(text) + "'");
    return lp(p);
  }
  throw InputError("unknown space tag '" + std::string(text) + "' (expected c0, lp:<p>, linf, lipb, bounded)");
}

std::string SpaceTag::name() const {
  switch (kind) {
    case Kind::C0: return "c0";
    case Kind::Lp: return "lp:" + num(p);
    case Kind::Linf: return "linf";
    case Kind::LipB: return "lipb";
    case Kind::BoundedFns: return "bounded";
  }
  return "?";
}

Membership member_of(const LatticeElement& x, const SpaceTag& tag) {
  using S = Membership::Status;
  const bool metric = x.carrier().is_metric();
  if (tag.needs_metric() != metric)
    throw InputError("space tag " + tag.name() + (metric ? " needs an index-set carrier" : " needs a metric carrier"));

  Membership m;
  if (tag.kind == SpaceTag::Kind::BoundedFns) {
    m.status = S::Member;
    m.reason = "finite carrier, sup |x| = " + num(x.prefix_sup());
    return m;
  }
  if (tag.kind == SpaceTag::Kind::LipB) {
    const auto lip = lipschitz_constant(x);
    m.status = S::Member;
    m.lipschitz_constant = lip.constant;
    m.reason = "finite carrier, Lipschitz constant " + num(lip.constant);
    return m;
  }

  const auto& t = x.tail();
  if (t.is_none()) {
    m.status = S::Undecidable;
    m.reason = "tail descriptor is None";
    return m;
  }
  const auto& last = t.final_segment();
  const auto kind = t.kind();
  switch (tag.kind) {
    case SpaceTag::Kind::C0:
      if (kind == TailDescriptor::Kind::Constant) {
        m.status = S::NotMember;
        m.reason = "tail tends to " + num(last.scale) + " != 0";
      } else {
        m.status = S::Member;
        m.reason = kind == TailDescriptor::Kind::Zero ? "tail is eventually zero"
                                                      : "tail decays like j^-" + num(last.exponent);
      }
      break;
    case SpaceTag::Kind::Lp:
      if (kind == TailDescriptor::Kind::Zero) {
        m.status = S::Member;
        m.reason = "tail is eventually zero";
      } else if (kind == TailDescriptor::Kind::Power && last.exponent * tag.p > 1.0) {
        m.status = S::Member;
        m.reason = "a*p = " + num(last.exponent * tag.p) + " > 1";
      } else {
        m.status = S::NotMember;
        m.reason = kind == TailDescriptor::Kind::Constant
                       ? "tail tends to " + num(last.scale) + " != 0"
                       : "a*p = " + num(last.exponent * tag.p) + " <= 1, sum of j^-(a*p) diverges";
      }
      break;
    default:
      m.status = S::Member;
      m.reason = "tail is bounded, sup |x| = " + num(x.sup_norm());
      break;
  }
  return m;
}

}  // namespace latticelab
