#include "latticelab/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "latticelab/parallel.hpp"

namespace latticelab {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  out.erase(std::remove(out.begin(), out.end(), '-'), out.end());
  out.erase(std::remove(out.begin(), out.end(), '_'), out.end());
  return out;
}

LatticeElement indicator_at_zero_distance(const FiniteMetricSpace& sp, const Carrier& c, std::size_t x0) {
  std::vector<double> v(sp.size(), 0.0);
  for (std::size_t i = 0; i < sp.size(); ++i)
    if (sp.distance(i, x0) == 0.0) v[i] = 1.0;
  return LatticeElement(c, std::move(v));
}

}  // namespace

std::string to_string(RefinementKind k) { return k == RefinementKind::CaseA ? "caseA" : "caseB"; }

RefinementKind parse_refinement_kind(std::string_view text) {
  const auto s = lower(text);
  if (s == "a" || s == "casea") return RefinementKind::CaseA;
  if (s == "b" || s == "caseb") return RefinementKind::CaseB;
  throw InputError("unknown refinement kind '" + std::string(text) + "' (expected caseA or caseB)");
}

RefinementLevel build_refinement(RefinementKind kind, std::uint64_t N, const RefinementParams& params) {
  if (N < 2) throw InputError("build_refinement: N must be >= 2");
  RefinementLevel lvl;
  lvl.kind = kind;
  lvl.N = N;
  if (kind == RefinementKind::CaseA) {
    if (!(params.scale > 0.0) || !std::isfinite(params.scale)) throw InputError("build_refinement: scale must be positive");
    std::vector<double> xs{0.0};
    std::vector<std::string> labels{"0"};
    for (std::uint64_t k = 1; k <= N; ++k) {
      xs.push_back(params.scale / static_cast<double>(k));
      labels.push_back(params.scale == 1.0 ? "1/" + std::to_string(k) : num(params.scale) + "/" + std::to_string(k));
    }
    lvl.space = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::on_line(xs, std::move(labels)));
    lvl.x0 = 0;
    lvl.escape_scale = isolation_radius(*lvl.space, lvl.x0);
    lvl.model = "line {0} u {" + num(params.scale) + "/k : k <= " + std::to_string(N) + "}";
  } else {
    if (!(params.separation >= 1.5) || !std::isfinite(params.separation))
      throw InputError("build_refinement: separation must be >= 1.5 so that pairs stay >= 1 apart");
    std::vector<double> xs;
    std::vector<std::string> labels;
    for (std::uint64_t n = 1; n <= N; ++n) {
      const double a = params.separation * static_cast<double>(n);
      xs.push_back(a);
      xs.push_back(a + 1.0 / static_cast<double>(n + 1));
      labels.push_back("a" + std::to_string(n));
      labels.push_back("b" + std::to_string(n));
    }
    lvl.space = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::on_line(xs, std::move(labels)));
    std::vector<std::size_t> used;
    lvl.escape_scale = std::numeric_limits<double>::infinity();
    for (std::uint64_t n = 1; n <= N; ++n) {
      const std::size_t a = 2 * (n - 1), b = a + 1;
      const double eps = 1.0 / static_cast<double>(n);
      // Existence of a close pair outside the labels used so far.
      if (!find_close_pair(*lvl.space, used, eps))
        throw InvariantError("Case-B construction: no pair closer than 1/" + std::to_string(n) + " outside F");
      const double d = lvl.space->distance(a, b);
      if (!(d < eps) || std::find(used.begin(), used.end(), a) != used.end() ||
          std::find(used.begin(), used.end(), b) != used.end())
        throw InvariantError("Case-B construction: pair " + std::to_string(n) + " violates d < 1/n or reuses a label");
      lvl.pairs.emplace_back(a, b);
      lvl.escape_scale = std::min(lvl.escape_scale, d);
      used.push_back(a);
      used.push_back(b);
    }
    lvl.model = "finite Case-B model";
  }
  lvl.delta = discreteness_constant(*lvl.space);
  return lvl;
}

RefinementLevel refinement_from_space(std::shared_ptr<const FiniteMetricSpace> space, std::string_view x0_label) {
  if (!space || space->size() < 2) throw InputError("refinement_from_space: needs at least two points");
  RefinementLevel lvl;
  lvl.kind = RefinementKind::CaseA;
  lvl.N = space->size() - 1;
  lvl.x0 = space->index_of(x0_label);
  lvl.space = std::move(space);
  lvl.escape_scale = isolation_radius(*lvl.space, lvl.x0);
  lvl.delta = discreteness_constant(*lvl.space);
  lvl.model = "user metric";
  return lvl;
}

RefinementFamily build_refinement_family(RefinementKind kind, const std::vector<std::uint64_t>& Ns,
                                         const RefinementParams& params) {
  RefinementFamily fam;
  fam.kind = kind;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    if (i > 0 && Ns[i] <= Ns[i - 1]) throw InputError("refinement levels must be strictly increasing in N");
    fam.levels.push_back(build_refinement(kind, Ns[i], params));
    if (i > 0 && !(fam.levels[i].escape_scale < fam.levels[i - 1].escape_scale))
      throw InvariantError("refinement family: escape scale does not strictly decrease at N = " + std::to_string(Ns[i]));
  }
  return fam;
}

// ---------------------------------------------------------------- hats

SequenceFamily hat_family(std::shared_ptr<const FiniteMetricSpace> space, std::string_view x0_label,
                          std::uint64_t horizon) {
  if (!space) throw InputError("hat_family: no space");
  if (horizon < 1) throw InputError("hat_family: N must be >= 1");
  const std::size_t x0 = space->index_of(x0_label);
  const Carrier carrier = Carrier::metric(space);
  std::vector<double> dist(space->size());
  for (std::size_t i = 0; i < space->size(); ++i) dist[i] = space->distance(i, x0);

  auto gen = [carrier, dist](std::uint64_t n) {
    const double nn = static_cast<double>(n);
    std::vector<double> v(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) v[i] = std::max(0.0, 1.0 - nn * dist[i]);
    return LatticeElement(carrier, std::move(v));
  };
  FamilyMetadata meta;
  meta.monotone = Monotonicity::Decreasing;
  meta.common_bound = LatticeElement::constant(carrier, 1.0);
  meta.norm_growth = NormGrowth::Bounded;
  meta.norm_supremum = 1.0;
  nlohmann::ordered_json params{{"x0", std::string(x0_label)}};
  auto fam = SequenceFamily::generator("hat", carrier, gen, horizon, std::move(meta), std::move(params));

  const auto& idx = fam.verified_indices();
  std::vector<double> lip(idx.size(), 0.0);
  parallel_for(idx.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto f = fam.member(idx[i]);
      for (double v : f.values())
        if (v < 0.0 || v > 1.0) throw InvariantError("hat member leaves [0, 1]");
      lip[i] = lipschitz_constant(f).constant;
    }
  });
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (lip[i] > static_cast<double>(idx[i]) + 1e-9)
      throw InvariantError("hat member " + std::to_string(idx[i]) + " has Lipschitz constant " + num(lip[i]));
  return fam;
}

SequenceFamily hat_family(const RefinementLevel& level, std::uint64_t horizon) {
  return hat_family(level.space, level.space->label(level.x0), horizon);
}

SequenceFamily running_meet_family(const SequenceFamily& base) {
  struct Cache {
    std::mutex mu;
    std::vector<LatticeElement> y;
  };
  auto cache = std::make_shared<Cache>();
  auto src = std::make_shared<SequenceFamily>(base);
  auto gen = [cache, src](std::uint64_t n) {
    std::lock_guard lock(cache->mu);
    while (cache->y.size() < n) {
      const auto x = src->member(cache->y.size() + 1);
      cache->y.push_back(cache->y.empty() ? x : meet(cache->y.back(), x));
    }
    return cache->y[n - 1];
  };
  FamilyMetadata meta;
  meta.monotone = Monotonicity::Decreasing;
  meta.common_bound = base.metadata().common_bound;
  return SequenceFamily::generator("running-meet(" + base.name() + ")", base.carrier(), gen, base.horizon(),
                                   std::move(meta), {{"base", base.name()}, {"base_params", base.params()}});
}

// ---------------------------------------------------------------- Lip counterexample

LipCounterexample lip_counterexample(const RefinementLevel& level, std::size_t n_max) {
  if (!level.space) throw InputError("lip_counterexample: level has no space");
  if (n_max < 1) throw InputError("lip_counterexample: n_max must be >= 1");
  const auto& sp = *level.space;
  const Carrier carrier = Carrier::metric(level.space);

  std::vector<std::size_t> A;
  if (level.kind == RefinementKind::CaseA) A.push_back(level.x0);
  else
    for (const auto& pr : level.pairs) A.push_back(pr.first);
  if (A.empty()) throw InputError("lip_counterexample: empty set A");
  std::vector<char> in_a(sp.size(), 0);
  for (std::size_t a : A) in_a[a] = 1;

  std::vector<double> dist(sp.size());
  std::vector<std::size_t> nearest(sp.size());
  parallel_for(sp.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t x = lo; x < hi; ++x) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = A.front();
      for (std::size_t a : A) {
        const double d = sp.distance(x, a);
        if (d < best) best = d, arg = a;
      }
      dist[x] = best;
      nearest[x] = arg;
    }
  });
  std::vector<double> gv(sp.size());
  for (std::size_t x = 0; x < sp.size(); ++x) gv[x] = std::min(std::sqrt(dist[x]), 1.0);

  LipCounterexample out{level, {}, {}, {}, {}, {}, LatticeElement(carrier, gv), 0.0, {}, 0,
                        constant_family(LatticeElement(carrier, gv), 1), {}, level.model};
  for (std::size_t a : A) out.A.push_back(sp.label(a));

  // b_n: points outside A with t in (0, 1), one per distinct t, t decreasing.
  std::vector<std::size_t> cand;
  if (level.kind == RefinementKind::CaseB) {
    for (const auto& pr : level.pairs) cand.push_back(pr.second);
  } else {
    for (std::size_t x = 0; x < sp.size(); ++x)
      if (!in_a[x]) cand.push_back(x);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](std::size_t i, std::size_t j) { return dist[i] > dist[j]; });
  for (std::size_t x : cand) {
    const double t = dist[x];
    if (!(t > 0.0) || !(t < 1.0)) continue;
    if (!out.t.empty() && !(t < out.t.back())) continue;
    const std::size_t ap = nearest[x];
    if (!(sp.distance(x, ap) < 2.0 * t)) throw InvariantError("no a' in A with d(b, a') < 2t at " + sp.label(x));
    const double ratio = std::fabs(gv[x] - gv[ap]) / sp.distance(x, ap);
    if (!(ratio > 1.0 / (2.0 * std::sqrt(t))))
      throw InvariantError("blow-up ratio " + num(ratio) + " at " + sp.label(x) + " does not exceed 1/(2 sqrt t)");
    out.b.push_back(sp.label(x));
    out.a_prime.push_back(sp.label(ap));
    out.t.push_back(t);
    out.ratios.push_back(ratio);
  }
  if (out.b.empty()) throw InvariantError("lip_counterexample: no point b with 0 < dist(b, A) < 1");

  out.lipschitz_g = lipschitz_constant(out.g).constant;
  auto envelopes = std::make_shared<std::vector<EnvelopeResult>>();
  std::vector<double> r;
  for (std::size_t n = 1; n <= n_max; ++n) {
    envelopes->push_back(inf_convolution(out.g, n));
    const auto& e = envelopes->back();
    if (!pointwise_le(e.g_n, out.g)) throw InvariantError("g_n > g at n = " + std::to_string(n));
    if (!r.empty() && e.achieved_error > r.back())
      throw InvariantError("||g_n - g|| increases at n = " + std::to_string(n));
    r.push_back(e.achieved_error);
  }

  // From ceil(Lip g) on, g is itself n-Lipschitz, so g_n = g; confirm on the data.
  std::optional<std::uint64_t> stationary;
  const auto first = static_cast<std::uint64_t>(std::max(1.0, std::ceil(out.lipschitz_g)));
  for (std::uint64_t n = first; n < first + 4 && !stationary; ++n) {
    const bool eq = n <= n_max ? (*envelopes)[n - 1].g_n == out.g : inf_convolution(out.g, n).g_n == out.g;
    if (eq) stationary = n;
  }
  if (!stationary) throw InvariantError("g_n does not reach g by n = " + std::to_string(first + 3));
  out.n_star = *stationary;

  const LatticeElement g = out.g;
  const std::uint64_t stat = *stationary;
  auto gen = [envelopes, g, stat](std::uint64_t n) {
    if (n >= stat) return g;
    if (n <= envelopes->size()) return (*envelopes)[n - 1].g_n;
    return inf_convolution(g, n).g_n;
  };
  FamilyMetadata meta;
  meta.monotone = Monotonicity::Increasing;
  meta.common_bound = g;
  meta.norm_growth = NormGrowth::Bounded;
  meta.uniform = UniformNorms{g, r, r.back(), stationary};
  meta.verify_limit = n_max;
  const std::uint64_t horizon = std::max<std::uint64_t>(10000, 2 * (stat + 1));
  nlohmann::ordered_json params{{"kind", to_string(level.kind)}, {"N", level.N}, {"n_max", n_max}, {"model", level.model}};
  if (level.kind == RefinementKind::CaseA) {
    params["x0"] = sp.label(level.x0);
  } else {
    auto pairs = nlohmann::ordered_json::array();
    for (const auto& [a, b] : level.pairs) pairs.push_back({sp.label(a), sp.label(b)});
    params["pairs"] = std::move(pairs);
  }
  out.g_family = SequenceFamily::generator("inf-convolution", carrier, gen, horizon, std::move(meta), params, true);
  out.envelopes = *envelopes;

  CheckOptions opts;
  opts.horizon = horizon;
  const auto v = check_buo_cauchy(out.g_family, BuoCauchyPolicy::certificate(), opts);
  if (v.outcome != Outcome::Holds || !v.uniform_certificate)
    throw InvariantError("g_n family is not certified Buo-Cauchy: " + v.summary);
  out.certificate = *v.uniform_certificate;
  return out;
}

// ---------------------------------------------------------------- escape

EscapeReport verify_escape(const RefinementFamily& family, const SpaceTag& tag, const CheckOptions& opts) {
  if (family.levels.size() < 3) throw InputError("verify_escape: needs at least 3 refinement levels to fit a trend");
  EscapeReport rep;
  rep.kind = "hat";
  rep.tag = tag;
  std::vector<double> scales, deltas, lips;
  bool all_one = true;
  for (const auto& lvl : family.levels) {
    const auto fam = hat_family(lvl, opts.horizon);
    const auto lim = pointwise_limit(fam, opts);
    EscapeLevel e;
    e.N = lvl.N;
    e.escape_scale = lvl.escape_scale;
    e.delta = lvl.delta;
    const auto indicator = indicator_at_zero_distance(*lvl.space, fam.carrier(), lvl.x0);
    e.limit_reached = lim.limit && *lim.limit == indicator;
    if (!e.limit_reached)
      rep.notes.push_back("N = " + std::to_string(lvl.N) + ": pointwise limit not reached within horizon " +
                          std::to_string(opts.horizon) + "; the indicator of {x0} is used");
    const LatticeElement& limit = e.limit_reached ? *lim.limit : indicator;
    const double grid[] = {std::min(e.delta, e.escape_scale), std::max(e.delta, e.escape_scale)};
    const auto curve = modulus_of_continuity(limit, grid);
    e.omega_at_delta = e.delta <= e.escape_scale ? curve.omega[0] : curve.omega[1];
    e.omega_at_escape = e.delta <= e.escape_scale ? curve.omega[1] : curve.omega[0];
    e.lipschitz = lipschitz_constant(limit).constant;
    all_one = all_one && e.omega_at_escape == 1.0;
    scales.push_back(e.escape_scale);
    deltas.push_back(e.delta);
    lips.push_back(e.lipschitz);
    rep.levels.push_back(e);
  }
  rep.fit_escape = fit_power_law(scales, lips);
  rep.fit_delta = fit_power_law(deltas, lips);
  rep.diverges = all_one;
  rep.trend = all_one ? "omega of the limit equals 1 at the escape scale d(x0) on every level: the modulus does not "
                        "vanish as the scale shrinks, so the limit leaves C(X); Lipschitz constant grows with fitted "
                        "exponent " + num(rep.fit_escape->exponent) + " in d(x0)"
                      : "omega of the limit drops below 1 at some level: no escape detected at finite scale";
  return rep;
}

EscapeReport verify_escape(const std::vector<LipCounterexample>& levels, const SpaceTag& tag) {
  if (levels.size() < 3) throw InputError("verify_escape: needs at least 3 refinement levels to fit a trend");
  EscapeReport rep;
  rep.kind = "lip";
  rep.tag = tag;
  std::vector<double> scales, deltas, lips;
  bool increasing = true;
  for (const auto& c : levels) {
    EscapeLevel e;
    e.N = c.level.N;
    e.escape_scale = c.level.escape_scale;
    e.delta = c.level.delta;
    e.lipschitz = c.lipschitz_g;
    if (!lips.empty() && !(e.lipschitz > lips.back())) increasing = false;
    scales.push_back(e.escape_scale);
    deltas.push_back(e.delta);
    lips.push_back(e.lipschitz);
    rep.levels.push_back(e);
  }
  rep.fit_escape = fit_power_law(scales, lips);
  rep.fit_delta = fit_power_law(deltas, lips);
  rep.diverges = increasing && rep.fit_escape->exponent < 0.0;
  rep.trend = std::string(rep.diverges ? "Lipschitz constant diverges along the family" : "no divergence detected") +
              ": Lip(g) ~ scale^" + num(rep.fit_escape->exponent) + " in the escape scale (r^2 = " +
              num(rep.fit_escape->r_squared) + "), ~ delta^" + num(rep.fit_delta->exponent) + " in delta";
  if (levels.front().level.kind == RefinementKind::CaseB) rep.notes.push_back("finite Case-B model");
  return rep;
}

EscapeReport verify_escape(const SequenceFamily& family, const SpaceTag& tag, const CheckOptions& opts) {
  EscapeReport rep;
  rep.kind = "family";
  rep.tag = tag;
  const auto lim = pointwise_limit(family, opts);
  if (!lim.limit) {
    rep.trend = "no pointwise limit within the horizon";
    rep.notes = lim.notes;
    return rep;
  }
  const auto mem = member_of(*lim.limit, tag);
  EscapeLevel e;
  e.N = family.carrier().size();
  if (family.carrier().is_metric()) {
    e.delta = discreteness_constant(family.carrier().space());
    e.lipschitz = lipschitz_constant(*lim.limit).constant;
  }
  rep.levels.push_back(e);
  rep.diverges = mem.decided() && !mem.member();
  rep.trend = mem.member() ? "no escape: the limit lies in " + tag.name() + " (" + mem.reason + ")"
              : mem.decided() ? "the limit leaves " + tag.name() + " (" + mem.reason + ")"
                              : "membership of the limit in " + tag.name() + " is undecidable (" + mem.reason + ")";
  return rep;
}

}  // namespace latticelab
