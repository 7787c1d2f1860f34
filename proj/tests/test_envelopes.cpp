#include <doctest.h>

#include <memory>

#include "generators.hpp"
#include "latticelab/envelopes.hpp"
#include "latticelab/trend.hpp"
#include "oracles.hpp"

using namespace latticelab;

namespace {

struct SqrtGrid {
  std::shared_ptr<const FiniteMetricSpace> space;
  std::vector<double> t;
  LatticeElement g;
};

SqrtGrid sqrt_grid(std::uint64_t m) {
  std::vector<double> t;
  for (std::uint64_t j = 0; j <= m * m; ++j) t.push_back(static_cast<double>(j) / static_cast<double>(m * m));
  auto sp = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::on_line(t));
  std::vector<double> v;
  for (double x : t) v.push_back(std::sqrt(x));
  return {sp, t, LatticeElement(Carrier::metric(sp), v)};
}

}  // namespace

TEST_CASE("inf-convolution agrees with the brute-force oracle on random spaces") {
  gen::Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = rng.integer(2, 25);
    const auto pts = gen::points(rng, n, rng.integer(1, 2));
    auto sp = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_coordinates(pts));
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1, 1);
    const LatticeElement g(Carrier::metric(sp), v);
    const auto d = oracle::matrix_of(pts);
    for (std::size_t k : {1, 3, 10}) {
      const auto e = inf_convolution(g, k);
      const auto ref = oracle::inf_convolution(v, d, static_cast<double>(k));
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(e.g_n[i] == doctest::Approx(ref[i]).epsilon(1e-14));
        CHECK(e.g_n[i] <= g[i]);
      }
      CHECK(e.lipschitz_constant <= static_cast<double>(k) + 1e-9);
      CHECK(e.lipschitz_constant == doctest::Approx(oracle::lipschitz(e.g_n.values(), d)).epsilon(1e-12));
      CHECK(e.achieved_error <= e.alpha_n + 1e-9);
    }
  }
}

TEST_CASE("lipschitz constant of a singleton is zero and of a tent is its slope") {
  const double one[] = {0.0};
  auto s1 = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::on_line(one));
  CHECK(lipschitz_constant(LatticeElement(Carrier::metric(s1), {7.0})).constant == 0.0);
  const double xs[] = {0.0, 0.25, 1.0};
  auto s3 = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::on_line(xs));
  const auto r = lipschitz_constant(LatticeElement(Carrier::metric(s3), {0.0, 1.0, 0.0}));
  CHECK(r.constant == 4.0);
  CHECK(r.a == 0);
  CHECK(r.b == 1);
}

TEST_CASE("modulus of continuity matches pair scan") {
  gen::Rng rng(9);
  const auto pts = gen::points(rng, 30, 2);
  auto sp = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_coordinates(pts));
  std::vector<double> v(30);
  for (auto& x : v) x = rng.uniform(0, 1);
  const LatticeElement g(Carrier::metric(sp), v);
  const auto d = oracle::matrix_of(pts);
  const double grid[] = {0.05, 0.1, 0.3, 1.0, 2.0};
  const auto curve = modulus_of_continuity(g, grid);
  for (std::size_t k = 0; k < 5; ++k) {
    double w = 0.0;
    for (std::size_t i = 0; i < 30; ++i)
      for (std::size_t j = 0; j < 30; ++j)
        if (d[i][j] <= grid[k]) w = std::max(w, std::fabs(v[i] - v[j]));
    CHECK(curve.omega[k] == doctest::Approx(w));
    CHECK(curve.sampler(grid[k]) == doctest::Approx(w));
  }
}

TEST_CASE("square-root envelope: alpha within 2% of 1/(4n) and all invariants") {
  const auto sg = sqrt_grid(30);
  auto curve = with_closed_form(modulus_of_continuity(sg.g, sg.t), ClosedFormModulus{1.0, 0.5});
  const auto d = [&] {
    std::vector<std::vector<double>> pts;
    for (double x : sg.t) pts.push_back({x});
    return oracle::matrix_of(pts);
  }();
  for (std::size_t n = 1; n <= 256; n *= 2) {
    const auto e = inf_convolution(sg.g, n, &curve);
    const double oracle_alpha = oracle::sqrt_alpha(static_cast<double>(n));
    CHECK(oracle_alpha == doctest::Approx(1.0 / (4.0 * n)).epsilon(1e-6));
    CHECK(e.alpha_n == doctest::Approx(oracle_alpha).epsilon(0.02));
    CHECK(e.achieved_error <= e.alpha_n + 1e-9);
    CHECK(pointwise_le(e.g_n, sg.g));
    CHECK(oracle::lipschitz(e.g_n.values(), d) <= static_cast<double>(n) + 1e-9);
  }
}

TEST_CASE("error_bound on a grid without closed form is refined by the sampler") {
  const auto sg = sqrt_grid(10);
  const double grid[] = {0.5, 1.0};
  const auto curve = modulus_of_continuity(sg.g, grid);
  const auto eb = error_bound(curve, 4.0);
  CHECK(eb.alpha >= 0.0);
  CHECK(eb.proof_bound >= eb.alpha);
  CHECK(eb.method == "grid+refinement");
  CHECK_THROWS_AS(with_closed_form(curve, ClosedFormModulus{0.1, 0.5}), InputError);
}

TEST_CASE("power-law fit recovers exponents") {
  const std::vector<double> x{1, 10, 100, 1000};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  const auto fit = fit_power_law(x, y);
  CHECK(fit.exponent == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.exponent == doctest::Approx(oracle::loglog_slope(x, y)).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(fit_power_law(one, one), InputError);
}
