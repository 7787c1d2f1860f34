#include <doctest.h>

#include <cmath>

#include "latticelab/counterexamples.hpp"
#include "oracles.hpp"

using namespace latticelab;

namespace {

oracle::Matrix matrix_of(const FiniteMetricSpace& sp) {
  oracle::Matrix d(sp.size(), std::vector<double>(sp.size()));
  for (std::size_t i = 0; i < sp.size(); ++i)
    for (std::size_t j = 0; j < sp.size(); ++j) d[i][j] = sp.distance(i, j);
  return d;
}

}  // namespace

TEST_CASE("refinement kinds parse") {
  CHECK(parse_refinement_kind("caseA") == RefinementKind::CaseA);
  CHECK(parse_refinement_kind("b") == RefinementKind::CaseB);
  CHECK(to_string(RefinementKind::CaseB) == "caseB");
  CHECK_THROWS_AS(parse_refinement_kind("c"), InputError);
  CHECK_THROWS_AS(build_refinement(RefinementKind::CaseA, 1), InputError);
}

TEST_CASE("CaseA level: zero plus reciprocals") {
  const auto lvl = build_refinement(RefinementKind::CaseA, 10);
  CHECK(lvl.space->size() == 11);
  CHECK(lvl.space->label(lvl.x0) == "0");
  CHECK(lvl.escape_scale == doctest::Approx(0.1));
  CHECK(lvl.delta == doctest::Approx(1.0 / 90).epsilon(1e-12));
}

TEST_CASE("CaseB level: pairs closer than 1/n and far from each other") {
  const auto lvl = build_refinement(RefinementKind::CaseB, 12);
  CHECK(lvl.model == "finite Case-B model");
  REQUIRE(lvl.pairs.size() == 12);
  for (std::size_t n = 1; n <= 12; ++n) {
    const auto [a, b] = lvl.pairs[n - 1];
    const double d = lvl.space->distance(a, b);
    CHECK(d < 1.0 / static_cast<double>(n));
    CHECK(d == doctest::Approx(1.0 / static_cast<double>(n + 1)));
  }
  CHECK(lvl.escape_scale == doctest::Approx(1.0 / 13));
  CHECK(lvl.delta == doctest::Approx(oracle::delta(matrix_of(*lvl.space))));
  CHECK_THROWS_AS(build_refinement(RefinementKind::CaseB, 5, RefinementParams{1.0, 1.2}), InputError);
}

TEST_CASE("refinement families need strictly increasing N") {
  const auto fam = build_refinement_family(RefinementKind::CaseA, {5, 10, 20});
  CHECK(fam.levels.size() == 3);
  CHECK_THROWS_AS(build_refinement_family(RefinementKind::CaseA, {10, 5}), InputError);
}

TEST_CASE("hat family values and its pointwise limit") {
  const auto lvl = build_refinement(RefinementKind::CaseA, 20);
  const auto fam = hat_family(lvl, 10000);
  const auto& sp = *lvl.space;
  const std::size_t half = sp.index_of("1/2");
  CHECK(fam.member(1)[half] == 0.5);
  CHECK(fam.member(2)[half] == 0.0);
  CHECK(fam.member(3)[half] == 0.0);
  CHECK(fam.member(7)[lvl.x0] == 1.0);
  for (std::uint64_t n : {1, 5, 30}) {
    const auto f = fam.member(n);
    CHECK(oracle::lipschitz(f.values(), matrix_of(sp)) <= static_cast<double>(n) + 1e-9);
  }
  const auto lim = pointwise_limit(fam);
  REQUIRE(lim.limit);
  for (std::size_t i = 0; i < sp.size(); ++i) CHECK((*lim.limit)[i] == (i == lvl.x0 ? 1.0 : 0.0));
  CHECK_THROWS_AS(hat_family(lvl.space, "nowhere", 10), InputError);
}

TEST_CASE("running meet of the alternating family") {
  const auto y = running_meet_family(alternating_family(3, 50));
  CHECK(y.metadata().monotone == Monotonicity::Decreasing);
  CHECK(y.member(1)[0] == -1.0);
  CHECK(y.member(2)[0] == -1.0);
  CHECK(y.member(40)[2] == -1.0);
}

TEST_CASE("lip counterexample invariants against oracles") {
  for (auto kind : {RefinementKind::CaseA, RefinementKind::CaseB}) {
    const auto lvl = build_refinement(kind, 40);
    const auto c = lip_counterexample(lvl, 20);
    const auto d = matrix_of(*lvl.space);
    CHECK(c.lipschitz_g == doctest::Approx(oracle::lipschitz(c.g.values(), d)).epsilon(1e-12));
    REQUIRE_FALSE(c.t.empty());
    for (std::size_t i = 0; i < c.t.size(); ++i) {
      CHECK(c.t[i] > 0.0);
      CHECK(c.t[i] < 1.0);
      if (i > 0) CHECK(c.t[i] < c.t[i - 1]);
      CHECK(c.ratios[i] == doctest::Approx(1.0 / std::sqrt(c.t[i])).epsilon(1e-12));
      CHECK(c.ratios[i] > 1.0 / (2.0 * std::sqrt(c.t[i])));
    }
    for (std::size_t n = 1; n < c.envelopes.size(); ++n)
      CHECK(c.envelopes[n].achieved_error <= c.envelopes[n - 1].achieved_error);
    CHECK(static_cast<double>(c.n_star) >= std::ceil(c.lipschitz_g) - 1e-9);
    CHECK(c.g_family.member(c.n_star) == c.g);
    CHECK_FALSE(replay_uniform_certificate(c.g_family, c.certificate, 2 * c.n_star));
    if (kind == RefinementKind::CaseB) CHECK(c.model == "finite Case-B model");
  }
}

TEST_CASE("escape along hat refinements") {
  const auto fam = build_refinement_family(RefinementKind::CaseA, {10, 20, 40, 80});
  const auto rep = verify_escape(fam, SpaceTag::bounded_fns());
  CHECK(rep.diverges);
  for (const auto& e : rep.levels) {
    CHECK(e.omega_at_escape == 1.0);
    CHECK(e.limit_reached);
    CHECK(e.lipschitz == doctest::Approx(static_cast<double>(e.N)));
  }
  REQUIRE(rep.fit_escape);
  CHECK(rep.fit_escape->exponent == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK_THROWS_AS(verify_escape(build_refinement_family(RefinementKind::CaseA, {5, 10}), SpaceTag::bounded_fns()),
                  InputError);
}

TEST_CASE("escape along lip counterexamples") {
  std::vector<LipCounterexample> cs;
  for (std::uint64_t N : {25, 100, 400}) cs.push_back(lip_counterexample(build_refinement(RefinementKind::CaseA, N), 10));
  const auto rep = verify_escape(cs, SpaceTag::lip_b());
  CHECK(rep.diverges);
  REQUIRE(rep.fit_escape);
  CHECK(rep.fit_escape->exponent == doctest::Approx(-0.5).epsilon(0.02));
  CHECK(rep.trend.find("diverges") != std::string::npos);
}

TEST_CASE("a constant family shows no escape") {
  const auto lvl = build_refinement(RefinementKind::CaseA, 10);
  const auto fam = constant_family(LatticeElement::constant(Carrier::metric(lvl.space), 1.0), 100);
  const auto rep = verify_escape(fam, SpaceTag::lip_b());
  CHECK_FALSE(rep.diverges);
  CHECK(rep.trend.find("no escape") != std::string::npos);
}
