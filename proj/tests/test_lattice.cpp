#include <doctest.h>

#include <memory>

#include "generators.hpp"
#include "latticelab/lattice.hpp"
#include "oracles.hpp"

using namespace latticelab;

namespace {

LatticeElement idx(std::vector<double> v, TailDescriptor t = TailDescriptor::zero()) {
  const std::size_t n = v.size();
  return LatticeElement(Carrier::index_set(n), std::move(v), std::move(t));
}

}  // namespace

TEST_CASE("power_sum against direct and harmonic-number sums") {
  for (double q : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    long double direct = 0.0L;
    for (std::uint64_t j = 5000; j >= 7; --j) direct += std::pow(static_cast<long double>(j), -static_cast<long double>(q));
    CHECK(power_sum(q, 7, 5000) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-13));
  }
  const double big = power_sum(1.0, 10, 100000000000ULL);
  CHECK(big == doctest::Approx(static_cast<double>(oracle::harmonic(100000000000ULL) - oracle::harmonic(9))).epsilon(1e-12));
  CHECK(std::isinf(power_sum(1.0, 1, kInfiniteIndex)));
  CHECK(power_sum(2.0, 1, kInfiniteIndex) == doctest::Approx(M_PI * M_PI / 6).epsilon(1e-13));
  CHECK(power_sum(2.0, 5, 4) == 0.0);
}

TEST_CASE("lattice operations are pointwise and exact on tails") {
  const auto a = idx({1, -2, 3}, TailDescriptor::power(1.0, 2.0));
  const auto b = idx({0, 1, 4}, TailDescriptor::power(1.0, 1.0));
  CHECK(meet(a, b).values() == std::vector<double>{0, -2, 3});
  CHECK(join(a, b).values() == std::vector<double>{1, 1, 4});
  CHECK(meet(a, b).tail().kind() == TailDescriptor::Kind::Power);
  CHECK(meet(a, b).at(10) == doctest::Approx(0.1));
  CHECK(abs(a).values() == std::vector<double>{1, 2, 3});
  CHECK(subtract(a, b).at(8) == doctest::Approx(1.0 / 8));
  CHECK(add(a, scale(a, -1.0)).tail().kind() == TailDescriptor::Kind::Zero);
  CHECK(positive_part(a).values() == std::vector<double>{1, 0, 3});
  CHECK(truncate(a, LatticeElement::constant(a.carrier(), 1.5)).values() == std::vector<double>{1, 1.5, 1.5});
  CHECK_THROWS_AS(truncate(a, idx({-1, 0, 0})), InputError);
}

TEST_CASE("tails with different shapes meet to None") {
  const auto a = idx({1}, TailDescriptor::power(1.0));
  const auto b = idx({1}, TailDescriptor::power(2.0));
  CHECK(meet(a, b).tail().is_none());
  CHECK(tail_add(TailDescriptor::power(1.0), TailDescriptor::power(2.0)).is_none());
  CHECK(tail_join(TailDescriptor::constant(1.0), TailDescriptor::constant(2.0)) == TailDescriptor::constant(2.0));
}

TEST_CASE("truncated tails are exact piecewise descriptors") {
  const auto t = TailDescriptor::power(0.5).truncated(100);
  CHECK(t.kind() == TailDescriptor::Kind::Zero);
  CHECK(t.value(100) == doctest::Approx(0.1));
  CHECK(t.value(101) == 0.0);
  CHECK(t.sup_abs(50) == doctest::Approx(1.0 / std::sqrt(50.0)));
}

TEST_CASE("lp_mass matches direct summation including the tail") {
  const auto x = idx({2.0, -1.0}, TailDescriptor::power(1.0).truncated(1000));
  long double direct = 4.0L + 1.0L;
  for (std::uint64_t j = 1000; j >= 3; --j) direct += 1.0L / (static_cast<long double>(j) * j);
  CHECK(lp_mass(x, 2.0) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-13));
  const auto h = idx({1.0}, TailDescriptor::power(1.0));
  CHECK(std::isinf(lp_mass(h, 1.0)));
  CHECK(lp_mass(h, 1.0, 1, 10) == doctest::Approx(static_cast<double>(oracle::harmonic(10))).epsilon(1e-14));
  CHECK_THROWS_AS(lp_mass(idx({1}, TailDescriptor::none()), 1.0), InputError);
}

TEST_CASE("membership decisions") {
  CHECK(member_of(idx({1, 2}, TailDescriptor::power(1.0)), SpaceTag::lp(2)).member());
  CHECK_FALSE(member_of(idx({1, 2}, TailDescriptor::power(1.0)), SpaceTag::lp(1)).member());
  CHECK(member_of(idx({1, 2}, TailDescriptor::power(1.0)), SpaceTag::c0()).member());
  CHECK_FALSE(member_of(idx({1}, TailDescriptor::constant(1.0)), SpaceTag::c0()).member());
  CHECK(member_of(idx({1}, TailDescriptor::constant(1.0)), SpaceTag::linf()).member());
  CHECK_FALSE(member_of(idx({1}, TailDescriptor::none()), SpaceTag::c0()).decided());
  CHECK_THROWS_AS(member_of(idx({1}), SpaceTag::lip_b()), InputError);
  const double xs[] = {0.0, 0.5, 1.0};
  auto sp = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::on_line(xs));
  const LatticeElement f(Carrier::metric(sp), {0.0, 1.0, 0.0});
  const auto m = member_of(f, SpaceTag::lip_b());
  CHECK(m.member());
  REQUIRE(m.lipschitz_constant);
  CHECK(*m.lipschitz_constant == 2.0);
  CHECK_THROWS_AS(member_of(f, SpaceTag::c0()), InputError);
}

TEST_CASE("space tags parse and print") {
  CHECK(SpaceTag::parse("lp:2") == SpaceTag::lp(2));
  CHECK(SpaceTag::parse("c0").name() == "c0");
  CHECK(SpaceTag::parse("bounded") == SpaceTag::bounded_fns());
  CHECK_THROWS_AS(SpaceTag::parse("lp:0.5"), InputError);
  CHECK_THROWS_AS(SpaceTag::parse("sobolev"), InputError);
}

TEST_CASE("lattice laws hold on random stored prefixes") {
  gen::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rng.integer(1, 20);
    std::vector<double> va(n), vb(n), vc(n);
    for (std::size_t i = 0; i < n; ++i) va[i] = rng.uniform(-3, 3), vb[i] = rng.uniform(-3, 3), vc[i] = rng.uniform(-3, 3);
    const auto a = idx(va), b = idx(vb), c = idx(vc);
    CHECK(meet(a, b) == meet(b, a));
    CHECK(join(a, meet(a, b)) == a);
    CHECK(meet(a, join(b, c)) == join(meet(a, b), meet(a, c)));
    CHECK(pointwise_le(meet(a, b), join(a, b)));
    CHECK(add(meet(a, b), join(a, b)) == add(a, b));
    CHECK(abs(a) == join(a, scale(a, -1.0)));
  }
}
