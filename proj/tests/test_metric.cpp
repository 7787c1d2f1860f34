#include <doctest.h>

#include "generators.hpp"
#include "latticelab/metric.hpp"
#include "oracles.hpp"

using namespace latticelab;

namespace {

std::vector<double> reciprocals(std::size_t N) {
  std::vector<double> xs;
  for (std::size_t n = 1; n <= N; ++n) xs.push_back(1.0 / static_cast<double>(n));
  return xs;
}

}  // namespace

TEST_CASE("symmetric 3x3 matrix validates") {
  const std::vector<std::vector<double>> m{{0, 1, 2}, {1, 0, 1.5}, {2, 1.5, 0}};
  const auto sp = FiniteMetricSpace::from_matrix(m, {"a", "b", "c"});
  CHECK(sp.size() == 3);
  CHECK(sp.distance(sp.index_of("a"), sp.index_of("c")) == 2.0);
  CHECK(isolation_radius(sp, "c") == 1.5);
  CHECK(discreteness_constant(sp) == 1.0);
}

TEST_CASE("matrix violations are all reported") {
  SUBCASE("asymmetric") {
    const auto rep = FiniteMetricSpace::check_matrix({{0, 1}, {2, 0}});
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].kind == MetricViolation::Kind::Asymmetric);
  }
  SUBCASE("triangle") {
    const auto rep = FiniteMetricSpace::check_matrix({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}});
    REQUIRE_FALSE(rep.ok());
    const auto it = std::find_if(rep.violations.begin(), rep.violations.end(),
                                 [](const auto& v) { return v.kind == MetricViolation::Kind::Triangle; });
    REQUIRE(it != rep.violations.end());
    CHECK(it->describe().find("triangle violation at (0,2) via 1") != std::string::npos);
  }
  SUBCASE("non-square, negative and zero off-diagonal") {
    CHECK_FALSE(FiniteMetricSpace::check_matrix({{0, 1}}).ok());
    CHECK_FALSE(FiniteMetricSpace::check_matrix({{0, -1}, {-1, 0}}).ok());
    CHECK_FALSE(FiniteMetricSpace::check_matrix({{0, 0}, {0, 0}}).ok());
    CHECK_FALSE(FiniteMetricSpace::check_matrix({{1, 1}, {1, 0}}).ok());
  }
  CHECK_THROWS_AS(FiniteMetricSpace::from_matrix({{0, 1}, {2, 0}}), MetricValidationError);
}

TEST_CASE("coordinates reject duplicates and ragged rows") {
  CHECK_THROWS_AS(FiniteMetricSpace::from_coordinates({{0.0}, {0.0}}), InputError);
  CHECK_THROWS_AS(FiniteMetricSpace::from_coordinates({{0.0, 1.0}, {2.0}}), InputError);
  CHECK_THROWS_AS(FiniteMetricSpace::from_coordinates({{0.0}, {1.0}}, {"a", "a"}), InputError);
}

TEST_CASE("singleton isolation radius is infinite") {
  const double x[] = {3.0};
  const auto sp = FiniteMetricSpace::on_line(x);
  CHECK(std::isinf(isolation_radius(sp, std::size_t{0})));
  CHECK(std::isinf(discreteness_constant(sp)));
}

TEST_CASE("reciprocal set has discreteness 1/(N(N-1))") {
  for (std::size_t N : {5, 10, 50}) {
    const auto xs = reciprocals(N);
    const auto sp = FiniteMetricSpace::on_line(xs);
    std::vector<std::vector<double>> pts;
    for (double x : xs) pts.push_back({x});
    const double brute = oracle::delta(oracle::matrix_of(pts));
    const double closed = 1.0 / (static_cast<double>(N) * static_cast<double>(N - 1));
    CHECK(discreteness_constant(sp) == brute);
    CHECK(discreteness_constant(sp) == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("zero plus reciprocals: N = 10 gives 1/90, N = 2 gives 1/2") {
  auto with_zero = [](std::size_t N) {
    auto xs = reciprocals(N);
    xs.insert(xs.begin(), 0.0);
    return FiniteMetricSpace::on_line(xs);
  };
  CHECK(discreteness_constant(with_zero(10)) == doctest::Approx(1.0 / 90).epsilon(1e-12));
  CHECK(discreteness_constant(with_zero(2)) == 0.5);
  CHECK(isolation_radius(with_zero(10), std::size_t{0}) == doctest::Approx(0.1));
}

TEST_CASE("isolation profile matches the pair-scan oracle on random spaces") {
  gen::Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = rng.integer(2, 40), dim = rng.integer(1, 3);
    const auto pts = gen::points(rng, n, dim);
    const auto sp = FiniteMetricSpace::from_coordinates(pts);
    const auto d = oracle::matrix_of(pts);
    const auto prof = isolation_profile(sp);
    const auto radii = oracle::isolation_radii(d);
    for (std::size_t i = 0; i < n; ++i) CHECK(prof.radius[i] == doctest::Approx(radii[i]).epsilon(1e-14));
    CHECK(prof.delta == doctest::Approx(oracle::delta(d)).epsilon(1e-14));
    CHECK(prof.radius[prof.argmin] == prof.delta);
  }
}

TEST_CASE("find_close_pair postconditions with exhaustive confirmation of none") {
  gen::Rng rng(23);
  int found = 0, none = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = rng.integer(2, 30);
    const bool matrix = rng.coin(0.3);
    const auto pts = gen::points(rng, n, rng.integer(1, 3));
    const auto d = matrix ? gen::path_metric(rng, n) : oracle::matrix_of(pts);
    const auto sp = matrix ? FiniteMetricSpace::from_matrix(d) : FiniteMetricSpace::from_coordinates(pts);
    std::vector<std::size_t> excluded;
    std::vector<char> ex(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (rng.coin(0.3)) excluded.push_back(i), ex[i] = 1;
    const double eps = rng.uniform(0.01, 0.6);
    const auto cp = find_close_pair(sp, excluded, eps);
    if (cp) {
      ++found;
      CHECK(cp->a != cp->b);
      CHECK_FALSE(ex[cp->a]);
      CHECK_FALSE(ex[cp->b]);
      CHECK(cp->distance < eps);
      CHECK(cp->distance == sp.distance(cp->a, cp->b));
    } else {
      ++none;
      const auto best = oracle::closest_pair_outside(d, ex);
      if (best) CHECK(d[best->first][best->second] >= eps);
    }
  }
  CHECK(found > 0);
  CHECK(none > 0);
}

TEST_CASE("find_close_pair routes and errors") {
  const double xs[] = {0.0, 1.0, 1.001, 5.0};
  const auto sp = FiniteMetricSpace::on_line(xs);
  const auto cp = find_close_pair(sp, {}, 0.5);
  REQUIRE(cp);
  CHECK(cp->route == ClosePair::Route::IsolationRadius);
  CHECK(((cp->a == 1 && cp->b == 2) || (cp->a == 2 && cp->b == 1)));
  const std::size_t ex[] = {1};
  CHECK_FALSE(find_close_pair(sp, ex, 0.5));
  CHECK_THROWS_AS(find_close_pair(sp, {}, 0.0), InputError);
  CHECK_THROWS_AS(dist_to_set(sp, 0, {}), InputError);
  const std::size_t set[] = {2, 3};
  CHECK(dist_to_set(sp, 0, set) == 1.001);
}
