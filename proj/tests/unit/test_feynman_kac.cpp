#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dlet/feynman_kac.hpp"
#include "dlet/rng.hpp"

using namespace dlet;

TEST_CASE("summarize: mean and standard error") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto e = summarize(v.data(), 4, 11);
  CHECK(e.mean == doctest::Approx(2.5));
  // sample variance 5/3
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.n_paths == 4);
  CHECK(e.seed == 11);
  CHECK(summarize(v.data(), 1, 0).std_error == 0.0);
}

TEST_CASE("derived seeds and normal streams are reproducible") {
  static_assert(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  NormalStream a(42), b(42);
  for (int k = 0; k < 10; ++k) CHECK(a.normal() == b.normal());
}

TEST_CASE("normal stream moments") {
  NormalStream rng(5);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double z = rng.normal();
    m1 += z;
    m2 += z * z;
  }
  CHECK(std::abs(m1 / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("estimates do not depend on the thread count") {
  const auto spec = SdeSpec::cev(0.03, 0.3, 1.0);
  auto payoff = [](double x) { return std::max(x - 1.0, 0.0); };
  const auto one = mc_expectation(spec, payoff, 1.0, 1.0, 5000, 64, 99, 1);
  const auto three = mc_expectation(spec, payoff, 1.0, 1.0, 5000, 64, 99, 3);
  CHECK(one.mean == three.mean);
  CHECK(one.std_error == three.std_error);
}

TEST_CASE("Brownian motion: mean and second moment") {
  const auto spec = SdeSpec::cev(0.0, 0.5, 0.0);
  const auto mean = mc_expectation(spec, [](double x) { return x; }, 2.0, 1.0, 20000, 16, 1);
  CHECK(std::abs(mean.mean - 2.0) < 4.0 * mean.std_error);
  const auto sq = mc_expectation(spec, [](double x) { return x * x; }, 0.0, 1.0, 20000, 16, 2);
  CHECK(std::abs(sq.mean - 0.25) < 4.0 * sq.std_error);
}

TEST_CASE("geometric Brownian motion mean") {
  const auto spec = SdeSpec::cev(0.1, 0.2, 1.0);
  const auto e = mc_expectation(spec, [](double x) { return x; }, 1.0, 1.0, 20000, 256, 3);
  CHECK(std::abs(e.mean - std::exp(0.1)) < 4.0 * e.std_error);
}

TEST_CASE("square-root diffusion: mean decay and absorption") {
  const auto spec = cir_preset(0.5, 0.3);
  const auto e = mc_expectation(spec, [](double x) { return x; }, 1.0, 1.0, 20000, 256, 4);
  CHECK(std::abs(e.mean - std::exp(-0.5)) < 4.0 * e.std_error);
  const auto at_zero = mc_expectation(spec, [](double x) { return x; }, 0.0, 1.0, 100, 16, 5);
  CHECK(at_zero.mean == 0.0);
  // Zero volatility is the deterministic decay.
  const auto frozen = mc_expectation(cir_preset(0.5, 0.0), [](double x) { return x; }, 1.0, 1.0, 10, 1000, 6);
  CHECK(frozen.mean == doctest::Approx(std::exp(-0.5)).epsilon(1e-3));
}

TEST_CASE("zero horizon returns the payoff at x0") {
  const auto e = mc_expectation(SdeSpec::cev(0.0, 1.0, 0.0), [](double x) { return 3.0 * x; }, 2.0, 0.0, 10, 4, 0);
  CHECK(e.mean == 6.0);
  CHECK(e.std_error == 0.0);
}

TEST_CASE("invalid inputs") {
  auto id = [](double x) { return x; };
  const auto bm = SdeSpec::cev(0.0, 1.0, 0.0);
  CHECK_THROWS_AS(mc_expectation(bm, id, 0.0, 1.0, 0, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(mc_expectation(bm, id, 0.0, 1.0, 10, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(mc_expectation(bm, id, 0.0, -1.0, 10, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(mc_expectation(SdeSpec{}, id, 0.0, 1.0, 10, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(cir_preset(-1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(SdeSpec::cev(0.0, -1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(SdeSpec::cev(0.0, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(mc_expectation(bm, [](double) { return std::nan(""); }, 0.0, 1.0, 10, 4, 0), std::domain_error);
}
