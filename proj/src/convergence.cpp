#include "latticelab/convergence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "latticelab/envelopes.hpp"
#include "latticelab/parallel.hpp"

namespace latticelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t draw(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  if (hi <= lo) return lo;
  return lo + rng() % (hi - lo + 1);
}

SpaceTag default_tag(const SequenceFamily& f, const CheckOptions& o) {
  if (o.tag) return *o.tag;
  return f.carrier().is_metric() ? SpaceTag::bounded_fns() : SpaceTag::linf();
}

// Largest |value| over tail coordinates j >= from, with the attaining j.
std::pair<double, std::uint64_t> tail_argmax(const TailDescriptor& t, std::uint64_t from) {
  double best = 0.0;
  std::uint64_t arg = 0;
  for (const auto& s : t.segments()) {
    if (s.last < from) continue;
    const std::uint64_t j = std::max(s.first, from);
    const double v = std::fabs(s.value(j));
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  return {best, arg};
}

void stamp(ConvergenceVerdict& v, Mode mode, const CheckOptions& o, std::uint64_t h) {
  v.mode = mode;
  v.tolerance = o.tolerance;
  v.horizon = h;
  v.settle = settle_index(h, o.settle_fraction);
  v.seed = o.seed;
}

void check_options(const CheckOptions& o) {
  if (!(o.tolerance >= 0.0) || !std::isfinite(o.tolerance)) throw InputError("tolerance must be finite and >= 0");
  if (o.horizon == 0) throw InputError("horizon must be >= 1");
  if (!(o.settle_fraction >= 0.0 && o.settle_fraction < 1.0)) throw InputError("settle fraction must be in [0, 1)");
}

std::vector<std::uint64_t> checkpoints(std::uint64_t h, std::uint64_t settle) {
  std::set<std::uint64_t> s{settle, h};
  for (std::uint64_t m = 1; m < h; m *= 2) s.insert(m);
  return {s.begin(), s.end()};
}

LatticeElement regulator_element(const Carrier& c, const std::vector<double>& z, double tail, bool tail_known) {
  if (c.is_metric()) return LatticeElement(c, z);
  return LatticeElement(c, z, tail_known ? TailDescriptor::constant(tail) : TailDescriptor::none());
}

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Order: return "order";
    case Mode::Uo: return "uo";
    case Mode::Buo: return "buo";
    case Mode::BuoCauchy: return "buo-cauchy";
  }
  return "?";
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Holds: return "holds";
    case Outcome::Fails: return "fails";
    case Outcome::Inconclusive: return "inconclusive";
  }
  return "?";
}

double UniformCauchyCertificate::at(std::uint64_t m) const {
  if (eps.empty()) return 0.0;
  if (m == 0) m = 1;
  return m <= eps.size() ? eps[m - 1] : eps.back();
}

std::uint64_t effective_horizon(const SequenceFamily& family, const CheckOptions& opts) {
  return std::min(family.horizon(), opts.horizon);
}

std::uint64_t settle_index(std::uint64_t horizon, double settle_fraction) {
  const auto m = static_cast<std::uint64_t>(std::floor(settle_fraction * static_cast<double>(horizon))) + 1;
  return std::clamp<std::uint64_t>(m, 1, std::max<std::uint64_t>(horizon, 1));
}

std::pair<double, std::uint64_t> sup_with_argmax(const LatticeElement& x) {
  double best = 0.0;
  std::uint64_t arg = 1;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::fabs(x[i]) > best) {
      best = std::fabs(x[i]);
      arg = i + 1;
    }
  if (!x.carrier().is_metric()) {
    if (x.tail().is_none()) throw InputError("element tail is None: supremum undecidable");
    auto [v, j] = tail_argmax(x.tail(), x.size() + 1);
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  return {best, arg};
}

// ---------------------------------------------------------------- limits

LimitReport pointwise_limit(const SequenceFamily& family, const CheckOptions& opts) {
  check_options(opts);
  const std::uint64_t h = effective_horizon(family, opts);
  const std::uint64_t w = std::max<std::uint64_t>(1, std::min<std::uint64_t>(h / 2, 4096));
  LimitReport rep;
  rep.window_first = h - w + 1;
  rep.window_last = h;
  const std::size_t k = family.carrier().size();
  std::vector<double> lo(k, kInf), hi(k, -kInf);
  std::optional<TailDescriptor> common_tail;
  bool tails_agree = true;
  LatticeElement last = family.member(h);
  for (std::uint64_t n = rep.window_first; n <= h; ++n) {
    const LatticeElement x = n == h ? last : family.member(n);
    for (std::size_t i = 0; i < k; ++i) {
      lo[i] = std::min(lo[i], x[i]);
      hi[i] = std::max(hi[i], x[i]);
    }
    if (!common_tail) common_tail = x.tail();
    else if (tails_agree && !(*common_tail == x.tail())) tails_agree = false;
  }
  double worst = 0.0;
  std::uint64_t coord = 0;
  for (std::size_t i = 0; i < k; ++i)
    if (hi[i] - lo[i] > worst) {
      worst = hi[i] - lo[i];
      coord = i + 1;
    }
  if (worst > opts.tolerance) {
    rep.divergence = StuckCoordinate{coord, worst, h, ""};
    rep.notes.push_back("coordinate " + std::to_string(coord) + " oscillates by " + num(worst) + " over members " +
                        std::to_string(rep.window_first) + ".." + std::to_string(h));
    return rep;
  }
  TailDescriptor tail = TailDescriptor::none();
  if (!family.carrier().is_metric()) {
    if (family.metadata().limit_tail) {
      tail = *family.metadata().limit_tail;
      rep.notes.push_back("limit tail taken from the declared metadata");
    } else if (tails_agree && common_tail) {
      tail = *common_tail;
      rep.notes.push_back("limit tail: common tail of the window members");
    } else {
      rep.notes.push_back("window members disagree on their tails; limit tail None");
    }
  }
  rep.limit = LatticeElement(family.carrier(), last.values(), tail);
  return rep;
}

DominatorReport dominating_element(const SequenceFamily& family, const CheckOptions& opts) {
  check_options(opts);
  const std::uint64_t h = effective_horizon(family, opts);
  const auto& meta = family.metadata();
  const bool metric = family.carrier().is_metric();
  std::vector<double> y(family.carrier().size(), 0.0);
  std::optional<TailDescriptor> joined;
  bool join_failed = false;
  for (std::uint64_t n = 1; n <= h; ++n) {
    const LatticeElement x = family.member(n);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(y[i], std::fabs(x[i]));
    if (!metric && !meta.dominator_tail && !join_failed) {
      const auto t = tail_abs(x.tail());
      joined = joined ? tail_join(*joined, t) : t;
      if (joined->is_none()) join_failed = true;
    }
  }
  DominatorReport rep{LatticeElement(family.carrier(), y), std::nullopt,
                      meta.norm_growth == NormGrowth::Unbounded, h};
  if (metric) return rep;
  TailDescriptor tail = TailDescriptor::none();
  if (meta.dominator_tail) {
    tail = *meta.dominator_tail;
  } else if (rep.unbounded_growth) {
    rep.warning = "declared unbounded norm growth: dominator tail None";
  } else if (join_failed || !joined) {
    rep.warning = family.is_generator() ? "generator declares no dominator tail and member tails do not join: tail None"
                                        : "member tails do not join: tail None";
  } else {
    tail = *joined;
  }
  if (rep.unbounded_growth && meta.dominator_tail) rep.warning = "declared unbounded norm growth";
  rep.element = LatticeElement(family.carrier(), y, tail);
  return rep;
}

// ---------------------------------------------------------------- order

ConvergenceVerdict check_order_convergence(const SequenceFamily& family, const LatticeElement& candidate,
                                           const CheckOptions& opts) {
  check_options(opts);
  if (!(candidate.carrier() == family.carrier())) throw InputError("candidate and family live on different carriers");
  const std::uint64_t h = effective_horizon(family, opts);
  ConvergenceVerdict v;
  stamp(v, Mode::Order, opts, h);
  const std::uint64_t ms = v.settle;
  const bool metric = family.carrier().is_metric();
  const std::size_t k = family.carrier().size();

  const auto cps = checkpoints(h, ms);
  OrderCertificate cert;
  cert.settle = ms;
  cert.horizon = h;
  cert.tolerance = opts.tolerance;
  cert.thresholds.assign(cps.begin(), cps.end());
  std::vector<LatticeElement> regs;
  std::vector<double> tails;

  std::vector<double> z(k, 0.0);
  std::vector<std::uint64_t> zarg(k, 0);
  double ztail = 0.0;
  std::uint64_t ztail_arg = 0;
  bool tail_unknown = false;
  std::size_t next = cps.size();
  for (std::uint64_t n = h; n >= 1; --n) {
    const LatticeElement d = subtract(family.member(n), candidate);
    for (std::size_t i = 0; i < k; ++i) {
      const double a = std::fabs(d[i]);
      if (a > z[i]) {
        z[i] = a;
        zarg[i] = n;
      }
    }
    if (!metric) {
      if (d.tail().is_none()) {
        tail_unknown = true;
      } else {
        const double t = d.tail().sup_abs(k + 1);
        if (t > ztail) {
          ztail = t;
          ztail_arg = n;
        }
      }
    }
    if (next > 0 && cps[next - 1] == n) {
      --next;
      regs.push_back(regulator_element(family.carrier(), z, ztail, !tail_unknown));
      tails.push_back(tail_unknown ? kInf : ztail);
    }
    if (n == ms) {
      v.stuck.reset();
      double worst = 0.0;
      std::uint64_t coord = 0;
      for (std::size_t i = 0; i < k; ++i)
        if (z[i] > worst) {
          worst = z[i];
          coord = i + 1;
        }
      if (worst > opts.tolerance) {
        v.outcome = Outcome::Fails;
        v.stuck = StuckCoordinate{coord, worst, zarg[coord - 1], ""};
      } else if (!metric && tail_unknown) {
        v.outcome = Outcome::Inconclusive;
      } else if (!metric && ztail > opts.tolerance) {
        v.outcome = Outcome::Fails;
        const LatticeElement dd = subtract(family.member(ztail_arg), candidate);
        v.stuck = StuckCoordinate{tail_argmax(dd.tail(), k + 1).second, ztail, ztail_arg, ""};
      } else {
        v.outcome = Outcome::Holds;
      }
    }
  }
  std::reverse(regs.begin(), regs.end());
  std::reverse(tails.begin(), tails.end());
  cert.regulators = std::move(regs);
  cert.tail_bounds = std::move(tails);
  v.order_certificate = std::move(cert);
  v.limit = candidate;

  switch (v.outcome) {
    case Outcome::Holds:
      v.summary = "z_m <= tolerance from m = " + std::to_string(ms) + " on (horizon " + std::to_string(h) + ")";
      break;
    case Outcome::Fails:
      v.summary = "coordinate " + std::to_string(v.stuck->coordinate) + " stays " + num(v.stuck->value) +
                  " away from the candidate at member " + std::to_string(v.stuck->member);
      break;
    case Outcome::Inconclusive:
      v.summary = "tail of |x_n - x| is undecidable beyond the stored prefix";
      break;
  }
  if (opts.tag) {
    v.tag = opts.tag;
    const auto mem = member_of(candidate, *opts.tag);
    v.notes.push_back("candidate in " + opts.tag->name() + ": " +
                      (mem.member() ? "yes" : mem.decided() ? "no" : "undecidable") + " (" + mem.reason + ")");
  }
  if (metric) {
    const auto lip = lipschitz_constant(candidate);
    v.notes.push_back("candidate Lipschitz constant on this space: " + num(lip.constant) +
                      " (track it across refinements with verify_escape)");
  }
  return v;
}

std::optional<std::uint64_t> replay_order_certificate(const SequenceFamily& family, const LatticeElement& candidate,
                                                      const OrderCertificate& cert) {
  if (cert.thresholds.size() != cert.regulators.size() || cert.thresholds.empty())
    throw InputError("order certificate: thresholds and regulators differ in length");
  for (std::size_t i = 1; i < cert.regulators.size(); ++i)
    if (!pointwise_le(cert.regulators[i], cert.regulators[i - 1])) return cert.thresholds[i];
  const bool metric = family.carrier().is_metric();
  const std::size_t k = family.carrier().size();
  std::size_t c = 0;
  for (std::uint64_t n = 1; n <= cert.horizon; ++n) {
    while (c + 1 < cert.thresholds.size() && cert.thresholds[c + 1] <= n) ++c;
    if (cert.thresholds[c] > n) continue;
    const LatticeElement d = abs(subtract(family.member(n), candidate));
    if (!pointwise_le(d, cert.regulators[c])) return n;
    if (!metric && !d.tail().is_none() && c < cert.tail_bounds.size() && d.tail().sup_abs(k + 1) > cert.tail_bounds[c])
      return n;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- uo / buo

ConvergenceVerdict check_uo_convergence(const SequenceFamily& family, const LatticeElement& candidate,
                                        const CheckOptions& opts) {
  check_options(opts);
  if (!(candidate.carrier() == family.carrier())) throw InputError("candidate and family live on different carriers");
  const std::uint64_t h = effective_horizon(family, opts);
  ConvergenceVerdict v;
  stamp(v, Mode::Uo, opts, h);
  const std::uint64_t ms = v.settle;
  const bool metric = family.carrier().is_metric();
  const std::size_t k = family.carrier().size();
  const Carrier& c = family.carrier();

  struct Probe {
    std::string name;
    LatticeElement u;
    double tail_sup;  // +inf when unknown
  };
  std::vector<Probe> probes;
  auto add_probe = [&](std::string name, LatticeElement u) {
    const double ts = metric || u.tail().is_none() ? kInf : u.tail().sup_abs(k + 1);
    probes.push_back({std::move(name), std::move(u), ts});
  };
  add_probe("one", LatticeElement::constant(c, 1.0));
  add_probe("dominator", dominating_element(family, opts).element);
  std::mt19937_64 rng(splitmix64(opts.seed ^ 0x756f70726f626573ULL));
  for (int r = 0; r < 5; ++r) {
    std::vector<double> vals(k);
    for (auto& x : vals) x = 0.25 + 0.75 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double tv = 0.25 + 0.75 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    add_probe("random-" + std::to_string(r + 1), LatticeElement(c, std::move(vals), TailDescriptor::constant(tv)));
  }

  const std::size_t np = probes.size();
  std::vector<std::vector<double>> z(np, std::vector<double>(k, 0.0));
  std::vector<std::vector<std::uint64_t>> zarg(np, std::vector<std::uint64_t>(k, 0));
  std::vector<double> ztail(np, 0.0);
  std::vector<std::uint64_t> ztail_arg(np, 0);
  std::vector<char> tail_unknown(np, 0);
  for (std::uint64_t n = ms; n <= h; ++n) {
    const LatticeElement d = subtract(family.member(n), candidate);
    double dtail = 0.0;
    const bool dknown = metric || !d.tail().is_none();
    if (!metric && dknown) dtail = d.tail().sup_abs(k + 1);
    for (std::size_t p = 0; p < np; ++p) {
      const auto& u = probes[p].u;
      for (std::size_t i = 0; i < k; ++i) {
        const double a = std::min(std::fabs(d[i]), u[i]);
        if (a > z[p][i]) {
          z[p][i] = a;
          zarg[p][i] = n;
        }
      }
      if (metric) continue;
      const double tb = std::min(dknown ? dtail : kInf, probes[p].tail_sup);
      if (std::isinf(tb)) {
        tail_unknown[p] = 1;
      } else if (tb > ztail[p]) {
        ztail[p] = tb;
        ztail_arg[p] = n;
      }
    }
  }

  bool any_unknown = false;
  for (std::size_t p = 0; p < np && v.outcome != Outcome::Fails; ++p) {
    for (std::size_t i = 0; i < k; ++i)
      if (z[p][i] > opts.tolerance) {
        v.outcome = Outcome::Fails;
        v.stuck = StuckCoordinate{i + 1, z[p][i], zarg[p][i], probes[p].name};
        break;
      }
    if (v.outcome != Outcome::Fails && !metric && ztail[p] > opts.tolerance) {
      v.outcome = Outcome::Fails;
      v.stuck = StuckCoordinate{0, ztail[p], ztail_arg[p], probes[p].name};
    }
    if (tail_unknown[p]) any_unknown = true;
  }
  if (v.outcome != Outcome::Fails) v.outcome = any_unknown ? Outcome::Inconclusive : Outcome::Holds;
  v.limit = candidate;
  std::string names;
  for (const auto& p : probes) names += (names.empty() ? "" : ", ") + p.name;
  v.notes.push_back("truncation probes u: " + names);
  switch (v.outcome) {
    case Outcome::Holds:
      v.summary = "|x_n - x| meet u <= tolerance from m = " + std::to_string(ms) + " for every probe";
      break;
    case Outcome::Fails:
      v.summary = "probe " + v.stuck->probe + ": |x_n - x| meet u stays " + num(v.stuck->value) +
                  (v.stuck->coordinate ? " at coordinate " + std::to_string(v.stuck->coordinate) : " on the tail");
      break;
    case Outcome::Inconclusive:
      v.summary = "truncated tails are undecidable for some probe";
      break;
  }
  return v;
}

ConvergenceVerdict check_buo_convergence(const SequenceFamily& family, const LatticeElement& candidate,
                                         const CheckOptions& opts) {
  auto uo = check_uo_convergence(family, candidate, opts);
  const auto dom = dominating_element(family, opts);
  const SpaceTag tag = default_tag(family, opts);

  ConvergenceVerdict bounded;
  stamp(bounded, Mode::Buo, opts, uo.horizon);
  bounded.tag = tag;
  bounded.dominator = dom.element;
  if (dom.warning) bounded.notes.push_back(*dom.warning);
  if (dom.unbounded_growth) {
    bounded.outcome = Outcome::Fails;
    bounded.summary = "not order bounded: the family declares unbounded norm growth (y(k) = " +
                      num(dom.element.prefix_sup()) + " on the horizon, no finite sup)";
  } else {
    const auto mem = member_of(dom.element, tag);
    bounded.outcome = mem.member() ? Outcome::Holds : mem.decided() ? Outcome::Fails : Outcome::Inconclusive;
    bounded.summary = "dominating element in " + tag.name() + ": " + mem.reason;
    if (!dom.element.carrier().is_metric() && !dom.element.tail().is_none()) bounded.bound_M = dom.element.sup_norm();
    if (dom.element.carrier().is_metric()) bounded.bound_M = dom.element.prefix_sup();
  }

  ConvergenceVerdict v;
  stamp(v, Mode::Buo, opts, uo.horizon);
  v.tag = tag;
  v.limit = candidate;
  v.dominator = dom.element;
  v.bound_M = bounded.bound_M;
  if (uo.outcome == Outcome::Fails || bounded.outcome == Outcome::Fails) v.outcome = Outcome::Fails;
  else if (uo.outcome == Outcome::Holds && bounded.outcome == Outcome::Holds) v.outcome = Outcome::Holds;
  else v.outcome = Outcome::Inconclusive;
  v.summary = "uo: " + to_string(uo.outcome) + "; order bounded in " + tag.name() + ": " + to_string(bounded.outcome);
  if (uo.stuck) v.stuck = uo.stuck;
  v.parts.push_back(std::move(uo));
  v.parts.push_back(std::move(bounded));
  return v;
}

EquivalenceReport buo_equals_order(const SequenceFamily& family, const LatticeElement& candidate,
                                   const CheckOptions& opts) {
  auto order = check_order_convergence(family, candidate, opts);
  auto buo = check_buo_convergence(family, candidate, opts);
  const auto dom = dominating_element(family, opts);
  const LatticeElement w = positive_part(subtract(abs(candidate), dom.element));
  EquivalenceReport rep{std::move(order), std::move(buo), false, w};
  rep.equal = rep.order.outcome == rep.buo.outcome;
  if (!rep.equal) {
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] > worst) {
        worst = w[i];
        at = i + 1;
      }
    throw InvariantError("order and Buo verdicts disagree (order " + to_string(rep.order.outcome) + ", buo " +
                         to_string(rep.buo.outcome) + "); w = (|x| - y)^+ peaks at " + num(worst) +
                         (at ? " on coordinate " + std::to_string(at) : std::string()));
  }
  return rep;
}

// ---------------------------------------------------------------- Buo-Cauchy

BuoCauchyPolicy BuoCauchyPolicy::parse(std::string_view text) {
  if (text == "certificate") return certificate();
  if (text == "sampled") return sampled();
  if (text.substr(0, 8) == "sampled:") {
    auto p = sampled();
    std::string_view rest = text.substr(8);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw InputError("bad policy option '" + std::string(item) + "'");
      const auto key = item.substr(0, eq), val = item.substr(eq + 1);
      std::size_t n = 0;
      auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), n);
      if (ec != std::errc() || ptr != val.data() + val.size()) throw InputError("bad policy value '" + std::string(val) + "'");
      if (key == "count") p.count = n;
      else if (key == "max_len") p.max_len = n;
      else throw InputError("unknown policy option '" + std::string(key) + "'");
    }
    return p;
  }
  throw InputError("unknown policy '" + std::string(text) + "' (expected certificate or sampled[:count=N,max_len=L])");
}

std::vector<std::vector<std::uint64_t>> sample_subsequences(std::uint64_t h, std::uint64_t ms, std::size_t count,
                                                            std::size_t max_len, std::uint64_t seed) {
  std::vector<std::vector<std::uint64_t>> out;
  const std::size_t len = std::max<std::size_t>(max_len, 3);
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(s + 1)));
    std::vector<std::uint64_t> idx;
    if (h <= 2 || h - ms + 1 < 2) {
      for (std::uint64_t n = 1; n <= h; ++n) idx.push_back(n);
      out.push_back(std::move(idx));
      continue;
    }
    if (s == 0) {
      const std::uint64_t first = h > len ? h - len + 1 : 1;
      for (std::uint64_t n = first; n <= h; ++n) idx.push_back(n);
    } else if (s % 2 == 0) {
      static constexpr std::uint64_t kRatios[] = {1, 2, 4};
      const std::uint64_t ratio = kRatios[rng() % 3];
      std::uint64_t n = draw(rng, 1, ms);
      std::uint64_t gap = draw(rng, 1, 4);
      while (n <= h && idx.size() < len) {
        idx.push_back(n);
        if (gap > h) break;
        n += gap;
        gap = std::min<std::uint64_t>(gap * ratio, h);
      }
    } else {
      std::set<std::uint64_t> pick;
      if (h <= len) {
        for (std::uint64_t n = 1; n <= h; ++n) pick.insert(n);
      } else {
        while (pick.size() < len) pick.insert(draw(rng, 1, h));
      }
      idx.assign(pick.begin(), pick.end());
    }
    const auto reached = std::count_if(idx.begin(), idx.end(), [&](std::uint64_t n) { return n >= ms; });
    if (reached < 2) {
      idx.erase(std::remove_if(idx.begin(), idx.end(), [&](std::uint64_t n) { return n >= ms; }), idx.end());
      if (idx.size() > len - 2) idx.resize(len - 2);
      std::uint64_t a = draw(rng, ms, h), b = draw(rng, ms, h);
      while (a == b) b = draw(rng, ms, h);
      idx.push_back(std::min(a, b));
      idx.push_back(std::max(a, b));
    }
    out.push_back(std::move(idx));
  }
  return out;
}

namespace {

std::optional<SubsequenceFailure> judge_subsequence(const SequenceFamily& family, const std::vector<std::uint64_t>& sub,
                                                    std::uint64_t ms, double tol, bool& undecidable) {
  const std::size_t diffs = sub.size() - 1;
  const auto reached = std::count_if(sub.begin(), sub.end(), [&](std::uint64_t n) { return n >= ms; });
  const bool positional = reached < 2;
  const std::size_t from = positional ? diffs / 2 : 0;
  LatticeElement prev = family.member(sub[from]);
  for (std::size_t k = from; k < diffs; ++k) {
    LatticeElement next = family.member(sub[k + 1]);
    if (positional || sub[k] >= ms) {
      const LatticeElement d = subtract(next, prev);
      double mag;
      std::uint64_t coord;
      if (!d.carrier().is_metric() && d.tail().is_none()) {
        undecidable = true;
        const auto [pm, pc] = sup_with_argmax(LatticeElement(d.carrier(), d.values()));
        mag = pm;
        coord = pc;
      } else {
        std::tie(mag, coord) = sup_with_argmax(d);
      }
      if (mag > tol) return SubsequenceFailure{sub, k, coord, mag, positional};
    }
    prev = std::move(next);
  }
  return std::nullopt;
}

}  // namespace

ConvergenceVerdict check_buo_cauchy(const SequenceFamily& family, const BuoCauchyPolicy& policy,
                                    const CheckOptions& opts) {
  check_options(opts);
  const std::uint64_t h = effective_horizon(family, opts);
  ConvergenceVerdict v;
  stamp(v, Mode::BuoCauchy, opts, h);
  const std::uint64_t ms = v.settle;
  const auto& meta = family.metadata();
  const SpaceTag tag = default_tag(family, opts);
  v.tag = tag;

  if (policy.kind == BuoCauchyPolicy::Kind::Certificate) {
    std::vector<std::string> missing;
    if (meta.uniform) {
      const auto& u = *meta.uniform;
      const std::uint64_t len = u.r.size();
      const std::uint64_t stat = u.stationary_from.value_or(0);
      const std::uint64_t m_end = std::max<std::uint64_t>(len + 1, stat ? stat : 0);
      auto bound = [&](std::uint64_t n) {
        if (stat && n >= stat) return 0.0;
        return n <= len ? u.r[n - 1] : u.tail_bound;
      };
      UniformCauchyCertificate cert;
      cert.stationary_from = u.stationary_from;
      cert.settle = ms;
      cert.tolerance = opts.tolerance;
      cert.eps.assign(m_end, 0.0);
      double eta = bound(m_end);
      cert.eps[m_end - 1] = 2.0 * eta;
      for (std::uint64_t m = m_end - 1; m >= 1; --m) {
        eta = std::max(eta, bound(m));
        cert.eps[m - 1] = 2.0 * eta;
      }
      if (cert.at(ms) <= opts.tolerance) {
        v.outcome = Outcome::Holds;
        v.summary = "uniform Cauchy certificate: eps_m = " + num(cert.at(ms)) + " <= tolerance from m = " +
                    std::to_string(ms);
        v.limit = u.limit;
        v.uniform_certificate = std::move(cert);
        return v;
      }
      missing.push_back("uniform route: eps_m at m = " + std::to_string(ms) + " is " + num(cert.at(ms)) +
                        " > tolerance");
    } else {
      missing.push_back("uniform route: no declared uniform norms");
    }
    if (meta.monotone != Monotonicity::None && meta.common_bound) {
      const auto mem = member_of(*meta.common_bound, tag);
      if (mem.member()) {
        v.outcome = Outcome::Holds;
        v.summary = "monotone (" + to_string(meta.monotone) + ") and dominated by a bound in " + tag.name() +
                    "; subsequence differences are dominated by 2 * bound and vanish coordinatewise";
        v.monotone_certificate = MonotoneBoundCertificate{meta.monotone, *meta.common_bound, tag, mem.reason};
        v.dominator = *meta.common_bound;
        return v;
      }
      missing.push_back("monotone route: bound not in " + tag.name() + " (" + mem.reason + ")");
    } else {
      missing.push_back("monotone route: needs declared monotonicity and a common bound");
    }
    v.outcome = Outcome::Inconclusive;
    v.summary = "no certificate route applies";
    v.notes = std::move(missing);
    return v;
  }

  std::vector<std::vector<std::uint64_t>> subs;
  for (const auto& s : policy.include) {
    if (s.size() < 2) throw InputError("included subsequence needs at least two indices");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 1 || s[i] > h) throw InputError("included subsequence index " + std::to_string(s[i]) + " outside the horizon");
      if (i > 0 && s[i] <= s[i - 1]) throw InputError("included subsequence is not strictly increasing");
    }
    subs.push_back(s);
  }
  for (auto& s : sample_subsequences(h, ms, policy.count, policy.max_len, opts.seed)) subs.push_back(std::move(s));

  std::vector<std::optional<SubsequenceFailure>> results(subs.size());
  std::vector<char> undec(subs.size(), 0);
  parallel_for(subs.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      bool u = false;
      results[i] = judge_subsequence(family, subs[i], ms, opts.tolerance, u);
      undec[i] = u;
    }
  });
  v.sampled = SampledReport{policy.count, policy.max_len, opts.seed, subs.size(), policy.include.size(), ms};
  v.notes.push_back("sampled policy: finite subsequence budget chosen by this tool, not a proof");
  if (std::any_of(undec.begin(), undec.end(), [](char c) { return c; }))
    v.notes.push_back("some differences have undecidable tails; only stored coordinates were judged");
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (results[i]) {
      v.outcome = Outcome::Fails;
      v.failure = results[i];
      v.summary = "subsequence " + std::to_string(i) + ": difference " + std::to_string(results[i]->position) +
                  " has magnitude " + num(results[i]->magnitude) + " at coordinate " +
                  std::to_string(results[i]->coordinate);
      return v;
    }
  v.outcome = Outcome::Inconclusive;
  v.positive = true;
  v.summary = "no counterexample found within budget (" + std::to_string(subs.size()) + " subsequences)";
  return v;
}

std::optional<std::uint64_t> replay_uniform_certificate(const SequenceFamily& family,
                                                        const UniformCauchyCertificate& cert, std::uint64_t upto) {
  for (std::size_t i = 1; i < cert.eps.size(); ++i)
    if (cert.eps[i] > cert.eps[i - 1]) return i + 1;
  upto = std::min(upto, family.horizon());
  if (upto < 2) return std::nullopt;
  LatticeElement prev = family.member(1);
  for (std::uint64_t n = 1; n < upto; ++n) {
    LatticeElement next = family.member(n + 1);
    const double d = subtract(next, prev).sup_norm();
    if (d > cert.at(n) * (1.0 + 1e-12)) return n;
    prev = std::move(next);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- norms

NormBoundReport norm_bound(const SequenceFamily& family, const SpaceTag& norm, const CheckOptions& opts) {
  check_options(opts);
  const std::uint64_t h = effective_horizon(family, opts);
  NormBoundReport rep;
  rep.horizon = h;
  rep.norm = norm.kind == SpaceTag::Kind::Lp ? norm.name() : "linf";
  rep.declared_unbounded = family.metadata().norm_growth == NormGrowth::Unbounded;
  rep.declared_supremum = family.metadata().norm_supremum;
  std::vector<double> norms(h);
  for (std::uint64_t n = 1; n <= h; ++n) {
    const LatticeElement x = family.member(n);
    norms[n - 1] = norm.kind == SpaceTag::Kind::Lp ? lp_norm(x, norm.p) : x.sup_norm();
    if (norms[n - 1] > rep.M) {
      rep.M = norms[n - 1];
      rep.argmax = n;
    }
  }
  rep.gap_subsequence.push_back(1);
  for (std::uint64_t n = 2; n <= h && rep.gap_subsequence.size() < 64; ++n) {
    const double k = static_cast<double>(rep.gap_subsequence.size());
    if (norms[n - 1] >= norms[rep.gap_subsequence.back() - 1] + (k + 1.0)) rep.gap_subsequence.push_back(n);
  }
  return rep;
}

}  // namespace latticelab
