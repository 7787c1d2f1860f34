#include "latticelab/family.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace latticelab {

namespace {

constexpr std::uint64_t kDefaultVerify = 10000;
constexpr std::size_t kLogSamples = 48;

double tail_inf(const TailDescriptor& t, std::uint64_t from) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& s : t.segments()) {
    if (s.last < from) continue;
    const std::uint64_t first = std::max(s.first, from);
    if (s.scale >= 0.0) {
      const double end = s.last == kInfiniteIndex ? (s.exponent == 0.0 ? s.scale : 0.0) : s.value(s.last);
      lo = std::min(lo, end);
    } else {
      lo = std::min(lo, s.value(first));
    }
  }
  return lo;
}

double tail_sup(const TailDescriptor& t, std::uint64_t from) {
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : t.segments()) {
    if (s.last < from) continue;
    const std::uint64_t first = std::max(s.first, from);
    if (s.scale >= 0.0) {
      hi = std::max(hi, s.value(first));
    } else {
      const double end = s.last == kInfiniteIndex ? (s.exponent == 0.0 ? s.scale : 0.0) : s.value(s.last);
      hi = std::max(hi, end);
    }
  }
  return hi;
}

std::string nstr(std::uint64_t n) { return std::to_string(n); }

bool element_le(const LatticeElement& a, const LatticeElement& b) {
  if (!pointwise_le(a, b)) return false;
  if (a.carrier().is_metric()) return true;
  return tail_le(a.tail(), b.tail(), a.size() + 1);
}

double diff_sup(const LatticeElement& a, const LatticeElement& b) {
  return subtract(a, b).sup_norm();
}

LatticeElement const_elem(std::size_t size, double c) { return LatticeElement::constant(Carrier::index_set(size), c); }

}  // namespace

std::string to_string(Monotonicity m) {
  switch (m) {
    case Monotonicity::Decreasing: return "decreasing";
    case Monotonicity::Increasing: return "increasing";
    default: return "none";
  }
}

std::string to_string(NormGrowth g) {
  switch (g) {
    case NormGrowth::Bounded: return "bounded";
    case NormGrowth::Unbounded: return "unbounded";
    default: return "undeclared";
  }
}

bool tail_le(const TailDescriptor& a, const TailDescriptor& b, std::uint64_t from) {
  if (a.is_none() || b.is_none()) return false;
  const auto diff = tail_add(b, a, -1.0);
  if (!diff.is_none()) {
    bool ok = true;
    for (const auto& s : diff.segments())
      if (s.last >= from && s.scale < 0.0) ok = false;
    if (ok) return true;
  }
  return tail_sup(a, from) <= tail_inf(b, from);
}

struct SequenceFamily::Memo {
  std::mutex mu;
  std::map<std::uint64_t, LatticeElement> cache;
};

SequenceFamily SequenceFamily::extensional(std::vector<LatticeElement> members, FamilyMetadata meta,
                                           std::string name) {
  if (members.empty()) throw InputError("family has no members");
  SequenceFamily f;
  f.name_ = std::move(name);
  f.carrier_ = members.front().carrier();
  for (std::size_t i = 0; i < members.size(); ++i)
    if (!(members[i].carrier() == f.carrier_))
      throw InputError("member " + nstr(i + 1) + " has carrier " + members[i].carrier().describe() + ", expected " +
                       f.carrier_.describe());
  f.horizon_ = members.size();
  f.members_ = std::move(members);
  f.meta_ = std::move(meta);
  f.verify();
  return f;
}

SequenceFamily SequenceFamily::generator(std::string name, Carrier carrier, Generator gen, std::uint64_t horizon,
                                         FamilyMetadata meta, nlohmann::ordered_json params, bool memoize) {
  if (!gen) throw InputError("generator family needs a generator");
  if (horizon == 0) throw InputError("generator family needs a horizon >= 1");
  SequenceFamily f;
  f.name_ = std::move(name);
  f.carrier_ = std::move(carrier);
  f.gen_ = std::move(gen);
  f.horizon_ = horizon;
  f.meta_ = std::move(meta);
  f.params_ = std::move(params);
  if (memoize) f.memo_ = std::make_shared<Memo>();
  f.verify();
  return f;
}

LatticeElement SequenceFamily::member(std::uint64_t n) const {
  if (n < 1 || n > horizon_)
    throw InputError("member index " + nstr(n) + " outside [1, " + nstr(horizon_) + "] of family " + name_);
  if (!gen_) return members_[n - 1];
  if (memo_) {
    {
      std::lock_guard<std::mutex> lock(memo_->mu);
      auto it = memo_->cache.find(n);
      if (it != memo_->cache.end()) return it->second;
    }
    auto x = gen_(n);
    std::lock_guard<std::mutex> lock(memo_->mu);
    memo_->cache.emplace(n, x);
    return x;
  }
  return gen_(n);
}

SequenceFamily SequenceFamily::with_horizon(std::uint64_t horizon) const {
  if (!gen_) throw InputError("with_horizon: only generator families can change horizon");
  return generator(name_, carrier_, gen_, horizon, meta_, params_, static_cast<bool>(memo_));
}

void SequenceFamily::verify() {
  std::uint64_t dense = std::min<std::uint64_t>(horizon_, meta_.verify_limit ? meta_.verify_limit : kDefaultVerify);
  verified_.clear();
  for (std::uint64_t n = 1; n <= dense; ++n) verified_.push_back(n);
  if (meta_.verify_limit == 0 && horizon_ > dense) {
    const double lo = std::log(static_cast<double>(dense)), hi = std::log(static_cast<double>(horizon_));
    for (std::size_t s = 1; s <= kLogSamples; ++s) {
      auto n = static_cast<std::uint64_t>(std::llround(std::exp(lo + (hi - lo) * s / kLogSamples)));
      n = std::clamp<std::uint64_t>(n, dense + 1, horizon_);
      if (n > verified_.back()) verified_.push_back(n);
    }
    if (verified_.back() != horizon_) verified_.push_back(horizon_);
  }

  const auto& m = meta_;
  if (m.common_bound && !(m.common_bound->carrier() == carrier_))
    throw InputError("common_bound lives on a different carrier");
  if (m.uniform && !(m.uniform->limit.carrier() == carrier_))
    throw InputError("uniform-norm limit lives on a different carrier");

  std::optional<LatticeElement> prev;
  for (std::uint64_t n : verified_) {
    LatticeElement x = member(n);
    if (!(x.carrier() == carrier_))
      throw InputError("member " + nstr(n) + " of " + name_ + " has carrier " + x.carrier().describe());
    if (prev && m.monotone != Monotonicity::None) {
      const bool ok = m.monotone == Monotonicity::Decreasing ? element_le(x, *prev) : element_le(*prev, x);
      if (!ok) throw InputError("declared " + to_string(m.monotone) + " monotonicity fails at member " + nstr(n));
    }
    if (m.common_bound && !element_le(abs(x), *m.common_bound))
      throw InputError("declared common_bound fails at member " + nstr(n));
    if (m.norm_supremum && x.sup_norm() > *m.norm_supremum * (1.0 + 1e-12))
      throw InputError("declared norm supremum fails at member " + nstr(n));
    if (m.uniform) {
      const auto& u = *m.uniform;
      if (u.stationary_from && n >= *u.stationary_from) {
        if (!(x.values() == u.limit.values()))
          throw InputError("declared stationarity fails at member " + nstr(n));
      } else {
        const double bound = n <= u.r.size() ? u.r[n - 1] : u.tail_bound;
        const double d = diff_sup(x, u.limit);
        if (d > bound * (1.0 + 1e-12))
          throw InputError("declared uniform norm bound fails at member " + nstr(n) + ": " + std::to_string(d) +
                           " > " + std::to_string(bound));
      }
    }
    prev = std::move(x);
  }
}

// ---------------------------------------------------------------- named families

SequenceFamily harmonic_truncation(double exponent, std::size_t prefix, std::uint64_t horizon) {
  if (!(exponent > 0.0)) throw InputError("harmonic_truncation: exponent must be positive");
  const Carrier c = Carrier::index_set(prefix);
  std::vector<double> full(prefix);
  for (std::size_t j = 1; j <= prefix; ++j) full[j - 1] = std::pow(static_cast<double>(j), -exponent);
  const auto tail = TailDescriptor::power(exponent);
  auto gen = [c, full, tail](std::uint64_t n) {
    std::vector<double> v(full.size(), 0.0);
    for (std::size_t j = 1; j <= full.size() && j <= n; ++j) v[j - 1] = full[j - 1];
    return LatticeElement(c, std::move(v), tail.truncated(n));
  };
  FamilyMetadata meta;
  meta.monotone = Monotonicity::Increasing;
  meta.common_bound = LatticeElement(c, full, tail);
  meta.norm_growth = NormGrowth::Bounded;
  meta.norm_supremum = 1.0;
  meta.limit_tail = tail;
  meta.dominator_tail = tail;
  nlohmann::ordered_json params = {{"exponent", exponent}, {"prefix", prefix}};
  return SequenceFamily::generator("harmonic", c, gen, horizon, meta, params);
}

SequenceFamily step_family(double height, std::size_t prefix, std::uint64_t horizon) {
  if (!(height > 0.0) || !std::isfinite(height)) throw InputError("step_family: height must be positive");
  const Carrier c = Carrier::index_set(prefix);
  const auto tail = TailDescriptor::constant(height);
  auto gen = [c, height, tail](std::uint64_t n) {
    std::vector<double> v(c.size(), 0.0);
    for (std::size_t k = 1; k <= c.size() && k <= n; ++k) v[k - 1] = height;
    return LatticeElement(c, std::move(v), tail.truncated(n));
  };
  FamilyMetadata meta;
  meta.monotone = Monotonicity::Increasing;
  meta.common_bound = LatticeElement::constant(c, height);
  meta.norm_growth = NormGrowth::Bounded;
  meta.norm_supremum = height;
  meta.limit_tail = tail;
  meta.dominator_tail = tail;
  nlohmann::ordered_json params = {{"height", height}, {"prefix", prefix}};
  return SequenceFamily::generator("step", c, gen, horizon, meta, params);
}

SequenceFamily reciprocal_family(std::size_t size, std::uint64_t horizon) {
  const Carrier c = Carrier::index_set(size);
  auto gen = [size](std::uint64_t n) { return const_elem(size, 1.0 / static_cast<double>(n)); };
  FamilyMetadata meta;
  meta.monotone = Monotonicity::Decreasing;
  meta.common_bound = const_elem(size, 1.0);
  meta.norm_growth = NormGrowth::Bounded;
  meta.norm_supremum = 1.0;
  meta.limit_tail = TailDescriptor::zero();
  meta.dominator_tail = TailDescriptor::constant(1.0);
  return SequenceFamily::generator("reciprocal", c, gen, horizon, meta, {{"size", size}});
}

SequenceFamily alternating_family(std::size_t size, std::uint64_t horizon) {
  const Carrier c = Carrier::index_set(size);
  auto gen = [size](std::uint64_t n) { return const_elem(size, n % 2 ? -1.0 : 1.0); };
  FamilyMetadata meta;
  meta.common_bound = const_elem(size, 1.0);
  meta.norm_growth = NormGrowth::Bounded;
  meta.norm_supremum = 1.0;
  meta.dominator_tail = TailDescriptor::constant(1.0);
  return SequenceFamily::generator("alternating", c, gen, horizon, meta, {{"size", size}});
}

SequenceFamily scaled_unit_family(std::size_t size, std::uint64_t horizon) {
  const Carrier c = Carrier::index_set(size);
  auto gen = [c](std::uint64_t n) {
    std::vector<double> v(c.size(), 0.0);
    auto tail = TailDescriptor::zero();
    const double h = static_cast<double>(n);
    if (n <= c.size()) {
      v[n - 1] = h;
    } else {
      tail = TailDescriptor::piecewise({{1, n - 1, 0.0, 0.0}, {n, n, h, 0.0}, {n + 1, kInfiniteIndex, 0.0, 0.0}});
    }
    return LatticeElement(c, std::move(v), tail);
  };
  FamilyMetadata meta;
  meta.norm_growth = NormGrowth::Unbounded;
  meta.limit_tail = TailDescriptor::zero();
  return SequenceFamily::generator("scaled_unit", c, gen, horizon, meta, {{"size", size}});
}

SequenceFamily affine_approach_family(std::size_t size, std::uint64_t horizon) {
  const Carrier c = Carrier::index_set(size);
  auto gen = [size](std::uint64_t n) { return const_elem(size, 1.0 - 1.0 / static_cast<double>(n)); };
  FamilyMetadata meta;
  meta.monotone = Monotonicity::Increasing;
  meta.common_bound = const_elem(size, 1.0);
  meta.norm_growth = NormGrowth::Bounded;
  meta.norm_supremum = 1.0;
  meta.limit_tail = TailDescriptor::constant(1.0);
  meta.dominator_tail = TailDescriptor::constant(1.0);
  return SequenceFamily::generator("affine_approach", c, gen, horizon, meta, {{"size", size}});
}

SequenceFamily gap_norm_family(std::size_t size, std::uint64_t horizon) {
  const Carrier c = Carrier::index_set(size);
  auto gen = [size](std::uint64_t n) {
    const double k = static_cast<double>(n);
    return const_elem(size, k * (k + 1.0) / 2.0);
  };
  FamilyMetadata meta;
  meta.monotone = Monotonicity::Increasing;
  meta.norm_growth = NormGrowth::Unbounded;
  return SequenceFamily::generator("gap_norm", c, gen, horizon, meta, {{"size", size}});
}

SequenceFamily constant_family(const LatticeElement& x, std::uint64_t horizon) {
  auto gen = [x](std::uint64_t) { return x; };
  FamilyMetadata meta;
  meta.monotone = Monotonicity::Decreasing;
  meta.common_bound = abs(x);
  meta.uniform = UniformNorms{x, {}, 0.0, 1};
  meta.norm_growth = NormGrowth::Bounded;
  if (!x.carrier().is_metric()) {
    meta.limit_tail = x.tail();
    meta.dominator_tail = tail_abs(x.tail());
  }
  return SequenceFamily::generator("constant", x.carrier(), gen, horizon, meta);
}

}  // namespace latticelab
