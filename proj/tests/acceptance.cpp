// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "latticelab/cli.hpp"
#include "latticelab/counterexamples.hpp"
#include "latticelab/io.hpp"
#include "latticelab/witnesses.hpp"
#include "oracles.hpp"

using namespace latticelab;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

oracle::Matrix matrix_of(const FiniteMetricSpace& sp) {
  oracle::Matrix d(sp.size(), std::vector<double>(sp.size()));
  for (std::size_t i = 0; i < sp.size(); ++i)
    for (std::size_t j = 0; j < sp.size(); ++j) d[i][j] = sp.distance(i, j);
  return d;
}

// 1. buo and order agree on random bounded pointwise-convergent families.
Check equivalence() {
  Check r;
  const auto t0 = Clock::now();
  gen::Rng rng(20240501);
  int same = 0, holds = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    const auto fc = gen::convergent_family(rng, rng.integer(3, 50), rng.integer(2, 200));
    try {
      const auto eq = buo_equals_order(fc.family, fc.limit);
      if (eq.equal && eq.order.outcome == eq.buo.outcome) ++same;
      if (eq.order.outcome == Outcome::Holds) ++holds;
    } catch (const InvariantError&) {
    }
  }
  const double secs = seconds_since(t0);
  r.require(same == trials, "disagreement on " + std::to_string(trials - same) + " families");
  r.require(secs < 10.0, fmt("runtime %.2f s >= 10 s", secs));
  if (r.pass)
    r.detail = std::to_string(same) + "/" + std::to_string(trials) + " identical verdicts (" + std::to_string(holds) +
               " converge), " + fmt("%.2f s", secs);
  return r;
}

// 2. inf-convolution of sqrt on {j/m^2}, m = 30.
Check envelope_suite() {
  Check r;
  const auto t0 = Clock::now();
  const std::uint64_t m = 30;
  std::vector<double> t, v;
  std::vector<std::vector<double>> pts;
  for (std::uint64_t j = 0; j <= m * m; ++j) {
    t.push_back(static_cast<double>(j) / static_cast<double>(m * m));
    v.push_back(std::sqrt(t.back()));
    pts.push_back({t.back()});
  }
  auto sp = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::on_line(t));
  const LatticeElement g(Carrier::metric(sp), v);
  const auto curve = with_closed_form(modulus_of_continuity(g, t), ClosedFormModulus{1.0, 0.5});
  const auto d = oracle::matrix_of(pts);
  double worst = 0.0;
  for (std::size_t n = 1; n <= 256; n *= 2) {
    const auto e = inf_convolution(g, n, &curve);
    const std::string at = " at n = " + std::to_string(n);
    r.require(pointwise_le(e.g_n, g), "g_n > g" + at);
    r.require(oracle::lipschitz(e.g_n.values(), d) <= static_cast<double>(n) + 1e-9, "Lipschitz quotient > n + 1e-9" + at);
    r.require(e.achieved_error <= e.alpha_n + 1e-9, "achieved error exceeds alpha_n" + at);
    const double analytic = 1.0 / (4.0 * static_cast<double>(n));
    const double oracle_alpha = oracle::sqrt_alpha(static_cast<double>(n));
    r.require(std::fabs(oracle_alpha - analytic) <= 1e-6 * analytic, "oracle maximisation disagrees with 1/(4n)" + at);
    const double rel = std::fabs(e.alpha_n - analytic) / analytic;
    worst = std::max(worst, rel);
    r.require(rel <= 0.02, fmt("alpha_n off 1/(4n) by %.4f", rel) + at);
  }
  const double secs = seconds_since(t0);
  r.require(secs < 5.0, fmt("runtime %.2f s >= 5 s", secs));
  if (r.pass) r.detail = fmt("n = 1..256, max |alpha_n - 1/(4n)| / (1/(4n)) = %.2e, ", worst) + fmt("%.2f s", secs);
  return r;
}

// 3. hat family on CaseA, N = 100.
Check hat_reproduction() {
  Check r;
  const auto lvl = build_refinement(RefinementKind::CaseA, 100);
  CheckOptions o50;
  o50.horizon = 50;
  const auto cert = check_buo_cauchy(hat_family(lvl, 50), BuoCauchyPolicy::certificate(), o50);
  r.require(cert.outcome == Outcome::Holds && cert.monotone_certificate.has_value(),
            "hat family (n <= 50) not certified: " + cert.summary);

  const auto lim = pointwise_limit(hat_family(lvl, 10000));
  std::vector<double> ind(lvl.space->size(), 0.0);
  ind[lvl.x0] = 1.0;
  r.require(lim.limit && lim.limit->values() == ind, "pointwise limit is not the indicator of {x0}");

  const auto rep = verify_escape(build_refinement_family(RefinementKind::CaseA, {3, 10, 100, 1000}), SpaceTag::bounded_fns());
  std::string omegas, deltas;
  for (const auto& e : rep.levels) {
    r.require(e.omega_at_escape == 1.0, "omega_limit(d(x0)) != 1 at N = " + std::to_string(e.N));
    omegas += (omegas.empty() ? "" : ",") + fmt("%g", e.omega_at_escape);
    deltas += (deltas.empty() ? "" : ",") + fmt("%g", e.omega_at_delta);
  }
  r.require(rep.diverges, "escape not reported");
  if (r.pass)
    r.detail = "monotone+bounded certificate, limit = 1_{x0}, omega_limit(d(x0)) = [" + omegas +
               "] for N = 3,10,100,1000 (at the global delta: [" + deltas + "])";
  return r;
}

// 4. sqrt(dist(., A)) counterexample on CaseA, N in {1e2, 1e3, 1e4}.
Check lip_reproduction() {
  Check r;
  std::vector<LipCounterexample> cs;
  double secs_last = 0.0;
  for (std::uint64_t N : {100, 1000, 10000}) {
    const auto t0 = Clock::now();
    cs.push_back(lip_counterexample(build_refinement(RefinementKind::CaseA, N), 20));
    secs_last = seconds_since(t0);
    const auto& c = cs.back();
    const auto& sp = *c.level.space;
    for (std::size_t i = 0; i < c.b.size(); ++i) {
      const std::size_t b = sp.index_of(c.b[i]), a = sp.index_of(c.a_prime[i]);
      const double ratio = std::sqrt(sp.distance(b, c.level.x0)) / sp.distance(b, a);
      r.require(ratio > 1.0 / (2.0 * std::sqrt(c.t[i])), "blow-up ratio too small at " + c.b[i]);
      r.require(c.ratios[i] > 1.0 / (2.0 * std::sqrt(c.t[i])), "stored ratio too small at " + c.b[i]);
    }
    CheckOptions o;
    o.horizon = c.g_family.horizon();
    const auto v = check_buo_cauchy(c.g_family, BuoCauchyPolicy::certificate(), o);
    r.require(v.outcome == Outcome::Holds && v.uniform_certificate.has_value(),
              "g_n family not certified at N = " + std::to_string(N));
  }
  const auto rep = verify_escape(cs, SpaceTag::lip_b());
  const double slope = rep.fit_escape->exponent;
  r.require(std::fabs(slope + 0.5) <= 0.05, fmt("fitted exponent vs d(x0) = %.4f", slope));
  r.require(secs_last < 60.0, fmt("runtime %.1f s >= 60 s at N = 1e4", secs_last));
  if (r.pass)
    r.detail = fmt("exponent of Lip(g) vs d(x0) = %.4f", slope) + fmt(" (vs the global delta: %.4f), ", rep.fit_delta->exponent) +
               fmt("N = 1e4 in %.1f s", secs_last);
  return r;
}

// 5. big-jump witness on the step family with height 4 eps.
Check jump_witnesses() {
  Check r;
  const double eps = 0.5;
  const auto fam = step_family(4.0 * eps, 64, 1000);
  CheckOptions o;
  o.horizon = 1000;
  const auto w = extract_big_jump_witness(fam, {}, eps, 20, {}, o);
  r.require(w.count() >= 20, "fewer than 20 pairs");
  for (std::size_t i = 0; i < w.count(); ++i) {
    const double jump = oracle::step_value(4.0 * eps, w.indices[i + 1], w.coordinates[i]) -
                        oracle::step_value(4.0 * eps, w.indices[i], w.coordinates[i]);
    r.require(std::fabs(jump) > eps, "pair " + std::to_string(i) + " does not exceed eps");
  }
  const auto cert = refute_order_boundedness(w, SpaceTag::c0(), &fam);
  r.require(cert.lower_bound == eps && cert.coordinates.size() >= 20, "refutation does not cover 20 coordinates at eps");
  const auto dom = dominating_element(fam, o);
  for (std::size_t k = 1; k <= 64; ++k) r.require(dom.element.at(k) == 4.0 * eps, "y(k) != 4 eps at k = " + std::to_string(k));
  if (r.pass) r.detail = std::to_string(w.count()) + " pairs, dominator lower bound eps on " +
                         std::to_string(cert.coordinates.size()) + " coordinates, y = 4 eps";
  return r;
}

// 6. l_p block witnesses on harmonic truncations.
Check block_witnesses() {
  Check r;
  const std::uint64_t H = 1000000000000000000ULL;
  CheckOptions o;
  o.horizon = H;
  std::string info;
  for (double p : {1.0, 2.0}) {
    const auto fam = harmonic_truncation(1.0 / p, 16, H);
    const auto w = extract_lp_block_witness(fam, p, 5, {}, o);
    r.require(w.count() >= 5, "fewer than 5 blocks for p = " + fmt("%g", p));
    for (std::size_t i = 0; i < w.count(); ++i) {
      const auto [k, l] = w.blocks[i];
      if (i > 0) r.require(k >= w.blocks[i - 1].second, "blocks overlap");
      r.require(w.block_norms[i] > 1.0, "difference norm <= 1");
      const long double mass = oracle::power_block(1.0, k, l);
      r.require(mass > std::pow(2.0L, static_cast<long double>(p)), "block mass of the limit <= 2");
    }
    r.require(verify_block_witness(fam, w).ok, "block witness does not replay");
    info += fmt("p = %g: ", p) + std::to_string(w.count()) + " blocks, last ends at " + std::to_string(w.blocks.back().second) + "; ";
  }
  bool refused = false;
  try {
    extract_lp_block_witness(harmonic_truncation(1.0, 16, 1000), 2.0, 5);
  } catch (const LimitInLp& e) {
    refused = std::string(e.what()).find("limit in ℓ_p") != std::string::npos;
  }
  r.require(refused, "convergent tail (a = 1, p = 2) was not refused");
  if (r.pass) r.detail = info + "a = 1, p = 2 refused";
  return r;
}

// 7. discreteness constants and close-pair search.
Check metric_suite() {
  Check r;
  double worst = 0.0;
  for (std::size_t N : {5, 10, 50}) {
    std::vector<double> xs;
    for (std::size_t n = 1; n <= N; ++n) xs.push_back(1.0 / static_cast<double>(n));
    const auto sp = FiniteMetricSpace::on_line(xs);
    const double got = discreteness_constant(sp);
    const double brute = oracle::delta(matrix_of(sp));
    const double closed = 1.0 / (static_cast<double>(N) * static_cast<double>(N - 1));
    r.require(got == brute, "differs from the pair scan at N = " + std::to_string(N));
    // The gap is a difference of two rounded reciprocals, so machine precision
    // means one epsilon at the magnitude of the points, 1/(N-1).
    worst = std::max(worst, std::fabs(got - closed) / (std::numeric_limits<double>::epsilon() / static_cast<double>(N - 1)));
    r.require(std::fabs(got - closed) <= std::numeric_limits<double>::epsilon() / static_cast<double>(N - 1),
              "not 1/(N(N-1)) to machine precision at N = " + std::to_string(N));
  }
  gen::Rng rng(77);
  int none = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = rng.integer(2, 40);
    const auto pts = gen::points(rng, n, rng.integer(1, 3));
    const auto sp = FiniteMetricSpace::from_coordinates(pts);
    const auto d = oracle::matrix_of(pts);
    std::vector<std::size_t> excluded;
    std::vector<char> ex(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (rng.coin(0.3)) excluded.push_back(i), ex[i] = 1;
    const double eps = rng.uniform(0.01, 0.5);
    const auto cp = find_close_pair(sp, excluded, eps);
    if (cp) {
      r.require(cp->a != cp->b && !ex[cp->a] && !ex[cp->b] && cp->distance < eps && cp->distance == sp.distance(cp->a, cp->b),
                "postcondition broken on trial " + std::to_string(trial));
    } else {
      ++none;
      const auto best = oracle::closest_pair_outside(d, ex);
      r.require(!best || d[best->first][best->second] >= eps, "exhaustive scan found a pair missed on trial " + std::to_string(trial));
    }
  }
  if (r.pass) r.detail = "delta = 1/(N(N-1)) for N = 5,10,50 (max error " + fmt("%.2f", worst) + " eps/(N-1)); 100 spaces, " + std::to_string(none) + " none results confirmed";
  return r;
}

// 8. byte-identical reports across two runs of each scenario.
Check determinism() {
  Check r;
  const auto root = fs::temp_directory_path() / "latticelab_acceptance";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> scenarios{
      {"generate", "hat", "--N", "100", "--horizon", "50"},
      {"generate", "lip", "--N", "100"},
      {"generate", "escape", "--levels", "10,20,40", "--of", "lip"},
      {"generate", "step", "--horizon", "300"},
      {"metric", "--refinement", "caseB", "--levels", "5,10,20"},
      {"envelope", "--sqrt-grid", "20"},
  };
  int files = 0;
  auto run = [&](std::vector<std::string> args, const fs::path& dir) {
    args.push_back("--out");
    args.push_back(dir.string());
    std::ostringstream out, err;
    return cli::run(args, out, err);
  };
  auto compare = [&](const fs::path& a, const fs::path& b, const std::string& what) {
    for (const auto& e : fs::directory_iterator(a)) {
      const auto other = b / e.path().filename();
      r.require(fs::exists(other), what + ": " + e.path().filename().string() + " missing on the second run");
      if (fs::exists(other))
        r.require(io::read_text(e.path().string()) == io::read_text(other.string()),
                  what + ": " + e.path().filename().string() + " differs");
      ++files;
    }
  };
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto a = root / ("s" + std::to_string(i) + "a"), b = root / ("s" + std::to_string(i) + "b");
    const int ca = run(scenarios[i], a), cb = run(scenarios[i], b);
    r.require(ca == 0 && cb == 0, scenarios[i][0] + " " + scenarios[i][1] + " exited " + std::to_string(ca));
    if (ca == 0 && cb == 0) compare(a, b, scenarios[i][0] + " " + scenarios[i][1]);
  }
  // Scenarios that consume a generated family, each with a fixed seed.
  const auto step = (root / "s3a" / "family.json").string();
  const std::vector<std::vector<std::string>> consumers{
      {"check", "--family", step, "--mode", "buo-cauchy", "--policy", "sampled", "--seed", "7", "--horizon", "300"},
      {"witness", "jumps", "--family", step, "--count", "20", "--horizon", "300"},
  };
  for (std::size_t i = 0; i < consumers.size(); ++i) {
    const auto a = root / ("c" + std::to_string(i) + "a"), b = root / ("c" + std::to_string(i) + "b");
    const int ca = run(consumers[i], a), cb = run(consumers[i], b);
    r.require(ca == cb, consumers[i][0] + ": exit codes differ");
    compare(a, b, consumers[i][0]);
  }
  fs::remove_all(root);
  if (r.pass) r.detail = std::to_string(files) + " report files byte-identical across two runs";
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"buo/order equivalence on 500 random families", equivalence},
      {"sqrt envelope suite (m = 30, n <= 256)", envelope_suite},
      {"hat family on CaseA (N = 100)", hat_reproduction},
      {"sqrt(dist) counterexample on CaseA (N <= 1e4)", lip_reproduction},
      {"big-jump witnesses on the step family", jump_witnesses},
      {"l_p block witnesses on harmonic truncations", block_witnesses},
      {"metric suite", metric_suite},
      {"determinism of report files", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s [%zu] %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), r.detail.c_str());
    std::fflush(stdout);
    failed += r.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
