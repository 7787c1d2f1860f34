#include "latticelab/witnesses.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "latticelab/parallel.hpp"

namespace latticelab {

namespace {

constexpr std::size_t kLogCap = 256;
constexpr std::uint64_t kSearchLimit = std::uint64_t{1} << 62;

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Smallest n in [lo, hi] with pred(n), for pred monotone false -> true.
std::optional<std::uint64_t> gallop(std::uint64_t lo, std::uint64_t hi, const std::function<bool(std::uint64_t)>& pred) {
  if (lo > hi) return std::nullopt;
  if (pred(lo)) return lo;
  std::uint64_t bad = lo, step = 1, probe = lo;
  while (true) {
    if (hi - bad <= step) {
      probe = hi;
      if (!pred(probe)) return std::nullopt;
      break;
    }
    probe = bad + step;
    if (pred(probe)) break;
    bad = probe;
    step *= 2;
  }
  std::uint64_t good = probe;
  while (good - bad > 1) {
    const std::uint64_t mid = bad + (good - bad) / 2;
    if (pred(mid)) good = mid;
    else bad = mid;
  }
  return good;
}

double coord(const LatticeElement& x, std::uint64_t k) { return x.at(k); }

void require_index_set(const SequenceFamily& f, const char* op) {
  if (f.carrier().is_metric()) throw InputError(std::string(op) + ": needs an index-set family");
}

}  // namespace

WitnessConstants WitnessConstants::parse(std::string_view text) {
  WitnessConstants c;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw InputError("bad constant '" + std::string(item) + "' (expected key=value)");
    const auto key = item.substr(0, eq), val = item.substr(eq + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc() || ptr != val.data() + val.size() || !std::isfinite(v))
      throw InputError("bad value for constant '" + std::string(key) + "'");
    if (key == "eps-factor") c.eps_factor = v;
    else if (key == "tail-budget") c.tail_budget = v;
    else if (key == "block-mass") c.block_mass = v;
    else throw InputError("unknown constant '" + std::string(key) + "' (expected eps-factor, tail-budget, block-mass)");
  }
  c.validate();
  return c;
}

void WitnessConstants::validate() const {
  if (!(eps_factor > 2.0))
    throw InputError("eps-factor must exceed 2: the jump estimate needs eps-factor*eps - eps > eps (got " +
                     num(eps_factor) + ")");
  if (!(tail_budget > 0.0)) throw InputError("tail-budget must be positive");
  if (!(block_mass - 2.0 * tail_budget > 1.0))
    throw InputError("block-mass - 2*tail-budget must exceed 1 (got " + num(block_mass) + " - 2*" +
                     num(tail_budget) + ")");
}

// ---------------------------------------------------------------- jumps

JumpWitness extract_big_jump_witness(const SequenceFamily& family, std::vector<std::uint64_t> A, double eps,
                                     std::size_t count, const WitnessConstants& constants, const CheckOptions& opts) {
  require_index_set(family, "extract_big_jump_witness");
  constants.validate();
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("eps must be a positive real");
  if (count == 0) throw InputError("count must be >= 1");
  const std::uint64_t h = effective_horizon(family, opts);
  if (A.empty())
    for (std::uint64_t k = 1; k <= family.carrier().size(); ++k) A.push_back(k);
  std::sort(A.begin(), A.end());
  A.erase(std::unique(A.begin(), A.end()), A.end());
  if (A.front() == 0) throw InputError("coordinates are 1-based");
  const double big = constants.eps_factor * eps;

  const std::size_t na = A.size();
  std::vector<std::uint64_t> first_big(na, 0), last_huge(na, 0);  // 0 = never
  std::vector<double> y(na, 0.0);
  for (std::uint64_t n = 1; n <= h; ++n) {
    const LatticeElement x = family.member(n);
    for (std::size_t a = 0; a < na; ++a) {
      const double v = std::fabs(coord(x, A[a]));
      y[a] = std::max(y[a], v);
      if (v >= eps && first_big[a] == 0) first_big[a] = n;
      if (v > big) last_huge[a] = n;
    }
  }
  std::vector<std::size_t> usable;
  std::vector<std::uint64_t> usable_coords;
  for (std::size_t a = 0; a < na; ++a)
    if (y[a] > big) {
      usable.push_back(a);
      usable_coords.push_back(A[a]);
    }
  if (usable.empty())
    throw DominatingConditionUnmet("dominating condition unmet: no coordinate of A has sup_n |x_n(k)| > " +
                                   num(constants.eps_factor) + "*eps = " + num(big) + " within horizon " +
                                   std::to_string(h));

  JumpWitness w;
  w.eps = eps;
  w.eps_factor = constants.eps_factor;
  w.horizon = h;
  w.caveat = "F_n is evaluated over n < m <= " + std::to_string(h) +
             " (finite horizon); coordinate k_i is paired with the difference x_{n_{i+1}} - x_{n_i}";
  w.indices.push_back(1);
  std::uint64_t k_prev = 0;
  auto in_e = [&](std::size_t a, std::uint64_t n) { return first_big[a] != 0 && first_big[a] <= n; };
  auto in_f = [&](std::size_t a, std::uint64_t n) { return last_huge[a] <= n; };

  while (w.coordinates.size() < count) {
    const std::uint64_t n = w.indices.back();
    JumpStep step;
    step.n = n;
    for (std::size_t a = 0; a < na; ++a) {
      if (in_e(a, n)) ++step.e_size;
      if (in_f(a, n)) ++step.f_size;
    }
    std::optional<std::size_t> pick;
    for (std::size_t a : usable) {
      if (in_e(a, n) && step.e_set.size() < kLogCap) step.e_set.push_back(A[a]);
      if (in_f(a, n) && step.f_set.size() < kLogCap) step.f_set.push_back(A[a]);
      if (!pick && A[a] > k_prev && !in_e(a, n) && !in_f(a, n)) pick = a;
    }
    if (!pick) {
      w.log.push_back(std::move(step));
      HorizonExhausted err("horizon " + std::to_string(h) + " exhausted after " + std::to_string(w.coordinates.size()) +
                               " of " + std::to_string(count) + " jump pairs; " + std::to_string(usable.size()) +
                               " usable coordinate(s)",
                           usable_coords);
      err.partial_jump = w;
      throw err;
    }
    const std::uint64_t k = A[*pick];
    step.chosen = k;
    w.log.push_back(std::move(step));
    const double before = coord(family.member(n), k);
    std::uint64_t next = 0;
    double after = 0.0;
    for (std::uint64_t m = n + 1; m <= h; ++m) {
      after = coord(family.member(m), k);
      if (std::fabs(after) > big) {
        next = m;
        break;
      }
    }
    if (next == 0) throw InvariantError("jump construction: coordinate " + std::to_string(k) + " left F_n but has no large value");
    const double jump = after - before;
    if (!(std::fabs(jump) > eps))
      throw InvariantError("jump construction: |x_" + std::to_string(next) + "(" + std::to_string(k) + ") - x_" +
                           std::to_string(n) + "(" + std::to_string(k) + ")| = " + num(std::fabs(jump)) + " <= eps");
    w.coordinates.push_back(k);
    w.jump_values.push_back(jump);
    w.indices.push_back(next);
    k_prev = k;
  }
  return w;
}

ReplayResult verify_jump_witness(const SequenceFamily& family, const JumpWitness& w) {
  ReplayResult r;
  auto fail = [&](std::size_t i, std::string why) {
    r.ok = false;
    r.failing_index = i;
    r.reason = std::move(why);
    return r;
  };
  const std::size_t c = w.coordinates.size();
  if (c == 0) return fail(0, "witness is empty");
  if (w.indices.size() != c + 1 || w.jump_values.size() != c) return fail(0, "field lengths disagree");
  if (!(w.eps > 0.0)) return fail(0, "eps must be positive");
  for (std::size_t i = 0; i < c; ++i) {
    if (w.indices[i + 1] <= w.indices[i]) return fail(i, "indices not strictly increasing");
    if (i > 0 && w.coordinates[i] <= w.coordinates[i - 1]) return fail(i, "coordinates not strictly increasing");
    if (w.coordinates[i] == 0) return fail(i, "coordinates are 1-based");
  }
  if (w.indices.front() < 1 || w.indices.back() > family.horizon()) return fail(0, "index outside the family horizon");

  std::vector<int> bad(c, 0);
  parallel_for(c, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double jump = coord(family.member(w.indices[i + 1]), w.coordinates[i]) -
                          coord(family.member(w.indices[i]), w.coordinates[i]);
      if (!(std::fabs(jump) > w.eps)) bad[i] = 1;
      else if (jump != w.jump_values[i] || !(std::fabs(w.jump_values[i]) > w.eps)) bad[i] = 2;
    }
  });
  for (std::size_t i = 0; i < c; ++i) {
    if (bad[i] == 1) return fail(i, "|x_{n_{i+1}}(k_i) - x_{n_i}(k_i)| <= eps at pair " + std::to_string(i));
    if (bad[i] == 2) return fail(i, "stored jump value does not match the family at pair " + std::to_string(i));
  }
  return r;
}

// ---------------------------------------------------------------- blocks

BlockWitness extract_lp_block_witness(const SequenceFamily& family, double p, std::size_t count,
                                      const WitnessConstants& constants, const CheckOptions& opts) {
  require_index_set(family, "extract_lp_block_witness");
  constants.validate();
  const SpaceTag tag = SpaceTag::lp(p);
  if (count == 0) throw InputError("count must be >= 1");
  const std::uint64_t h = effective_horizon(family, opts);
  const auto lim = pointwise_limit(family, opts);
  if (!lim.limit) throw InputError("no pointwise limit within the horizon: " + (lim.notes.empty() ? "" : lim.notes.front()));
  const LatticeElement& x = *lim.limit;
  const auto mem = member_of(x, tag);
  if (!mem.decided()) throw InputError("limit membership in " + tag.name() + " is undecidable: " + mem.reason);
  if (mem.member()) throw LimitInLp("limit in ℓ_p (" + tag.name() + "): " + mem.reason + "; no block witness exists");

  const double tail_p = std::pow(constants.tail_budget, p);
  const double mass_p = std::pow(constants.block_mass, p) * (1.0 + 1e-12);
  const bool monotone = family.metadata().monotone != Monotonicity::None;

  BlockWitness w;
  w.p = p;
  w.constants = constants;
  w.horizon = h;
  w.indices.push_back(1);
  std::uint64_t lower = 1;
  auto exhausted = [&](const std::string& what) {
    HorizonExhausted err(what + " after " + std::to_string(w.count()) + " of " + std::to_string(count) + " blocks", {});
    err.partial_block = w;
    throw err;
  };

  while (w.count() < count) {
    const std::uint64_t n = w.indices.back();
    const LatticeElement xn = family.member(n);
    const auto k = gallop(lower, kSearchLimit, [&](std::uint64_t kk) { return lp_mass(xn, p, kk) < tail_p; });
    if (!k) exhausted("no k with ||x_" + std::to_string(n) + " 1_[k,inf)||_p below the tail budget");
    const auto l = gallop(*k + 1, kSearchLimit, [&](std::uint64_t ll) { return lp_mass(x, p, *k, ll - 1) > mass_p; });
    if (!l) exhausted("limit mass on [" + std::to_string(*k) + ", inf) never exceeds the block mass");
    auto small_diff = [&](std::uint64_t m) {
      return lp_mass(subtract(family.member(m), x), p, *k, *l - 1) < tail_p;
    };
    std::optional<std::uint64_t> next;
    if (monotone) {
      next = gallop(n + 1, h, small_diff);
    } else {
      for (std::uint64_t m = n + 1; m <= h && !next; ++m)
        if (small_diff(m)) next = m;
    }
    if (!next) exhausted("horizon " + std::to_string(h) + " exhausted");
    const LatticeElement xm = family.member(*next);
    const double norm = std::pow(lp_mass(subtract(xm, xn), p, *k, *l - 1), 1.0 / p);
    if (!(norm > 1.0))
      throw InvariantError("block construction: difference norm " + num(norm) + " <= 1 on [" + std::to_string(*k) +
                           ", " + std::to_string(*l) + ")");
    w.blocks.emplace_back(*k, *l);
    w.block_norms.push_back(norm);
    w.limit_norms.push_back(std::pow(lp_mass(x, p, *k, *l - 1), 1.0 / p));
    w.indices.push_back(*next);
    lower = *l + 1;
  }
  return w;
}

ReplayResult verify_block_witness(const SequenceFamily& family, const BlockWitness& w) {
  ReplayResult r;
  auto fail = [&](std::size_t i, std::string why) {
    r.ok = false;
    r.failing_index = i;
    r.reason = std::move(why);
    return r;
  };
  const std::size_t c = w.blocks.size();
  if (c == 0) return fail(0, "witness is empty");
  if (w.indices.size() != c + 1 || w.block_norms.size() != c) return fail(0, "field lengths disagree");
  if (!(w.p >= 1.0)) return fail(0, "p must be >= 1");
  for (std::size_t i = 0; i < c; ++i) {
    if (w.indices[i + 1] <= w.indices[i]) return fail(i, "indices not strictly increasing");
    if (w.blocks[i].first < 1 || w.blocks[i].second <= w.blocks[i].first) return fail(i, "empty or malformed block");
    if (i > 0 && w.blocks[i].first <= w.blocks[i - 1].second - 1) return fail(i, "blocks overlap or are out of order");
  }
  if (w.indices.back() > family.horizon()) return fail(0, "index outside the family horizon");

  std::vector<int> bad(c, 0);
  parallel_for(c, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto d = subtract(family.member(w.indices[i + 1]), family.member(w.indices[i]));
      const double norm = std::pow(lp_mass(d, w.p, w.blocks[i].first, w.blocks[i].second - 1), 1.0 / w.p);
      if (!(norm > 1.0)) bad[i] = 1;
      else if (!(w.block_norms[i] > 1.0) || std::fabs(norm - w.block_norms[i]) > 1e-12 * norm) bad[i] = 2;
    }
  });
  for (std::size_t i = 0; i < c; ++i) {
    if (bad[i] == 1) return fail(i, "block " + std::to_string(i) + ": difference norm <= 1");
    if (bad[i] == 2) return fail(i, "block " + std::to_string(i) + ": stored norm does not match the family");
  }
  return r;
}

// ---------------------------------------------------------------- refutation

RefutationCertificate refute_order_boundedness(const JumpWitness& w, const SpaceTag& tag, const SequenceFamily* family) {
  if (w.coordinates.empty()) throw InputError("refute_order_boundedness: empty witness");
  if (tag.kind != SpaceTag::Kind::C0 && tag.kind != SpaceTag::Kind::Lp)
    throw InputError("a jump witness refutes order boundedness in c0 (or l_p), not in " + tag.name());
  const std::size_t c = w.coordinates.size();
  if (w.indices.size() != c + 1 || w.jump_values.size() != c || !(w.eps > 0.0))
    throw InvariantError("malformed jump witness: field lengths or eps");
  for (std::size_t i = 0; i < c; ++i) {
    if (w.indices[i + 1] <= w.indices[i] || (i > 0 && w.coordinates[i] <= w.coordinates[i - 1]))
      throw InvariantError("malformed jump witness: ordering violated at pair " + std::to_string(i));
    if (!(std::fabs(w.jump_values[i]) > w.eps))
      throw InvariantError("malformed jump witness: |jump| <= eps at pair " + std::to_string(i));
  }
  if (family) {
    const auto rep = verify_jump_witness(*family, w);
    if (!rep.ok) throw InvariantError("jump witness does not replay at pair " + std::to_string(rep.failing_index) + ": " + rep.reason);
  }
  RefutationCertificate cert;
  cert.kind = "jump";
  cert.tag = tag;
  cert.count = c;
  cert.lower_bound = w.eps;
  cert.coordinates = w.coordinates;
  cert.statement = "any dominator z of the differences d_i = x_{n_{i+1}} - x_{n_i} has z(k_i) >= |d_i(k_i)| > " +
                   num(w.eps) + " on " + std::to_string(c) + " distinct coordinates; the count grows without bound " +
                   "along the construction, so no z in " + tag.name() + " dominates";
  return cert;
}

RefutationCertificate refute_order_boundedness(const BlockWitness& w, const SpaceTag& tag, const SequenceFamily* family) {
  if (w.blocks.empty()) throw InputError("refute_order_boundedness: empty witness");
  if (tag.kind != SpaceTag::Kind::Lp) throw InputError("a block witness refutes order boundedness in l_p, not in " + tag.name());
  const std::size_t c = w.blocks.size();
  if (w.indices.size() != c + 1 || w.block_norms.size() != c) throw InvariantError("malformed block witness: field lengths");
  double sum = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    if (w.indices[i + 1] <= w.indices[i]) throw InvariantError("malformed block witness: indices at block " + std::to_string(i));
    if (w.blocks[i].second <= w.blocks[i].first || (i > 0 && w.blocks[i].first < w.blocks[i - 1].second))
      throw InvariantError("malformed block witness: blocks not disjoint and increasing at block " + std::to_string(i));
    if (!(w.block_norms[i] > 1.0)) throw InvariantError("malformed block witness: norm <= 1 at block " + std::to_string(i));
    sum += std::pow(w.block_norms[i], w.p);
  }
  if (family) {
    const auto rep = verify_block_witness(*family, w);
    if (!rep.ok) throw InvariantError("block witness does not replay at block " + std::to_string(rep.failing_index) + ": " + rep.reason);
  }
  RefutationCertificate cert;
  cert.kind = "block";
  cert.tag = tag;
  cert.count = c;
  cert.lower_bound = 1.0;
  cert.norm_lower_bound = std::pow(static_cast<double>(c), 1.0 / w.p);
  cert.witnessed_norm = std::pow(sum, 1.0 / w.p);
  cert.statement = "any dominator z of the differences has ||z 1_{I_i}||_p > 1 on " + std::to_string(c) +
                   " disjoint blocks, so ||z||_p >= " + num(cert.norm_lower_bound) + " (witnessed " +
                   num(cert.witnessed_norm) + "); the bound grows without limit with the block count";
  return cert;
}

}  // namespace latticelab
