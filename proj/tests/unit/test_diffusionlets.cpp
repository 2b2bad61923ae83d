#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "dlet/diffusionlets.hpp"

using namespace dlet;

namespace {

double bump(double x) { return std::exp(-0.5 * (x - 8.0) * (x - 8.0)); }

const WaveletBasis& basis4() {
  static const WaveletBasis b = make_basis(4);
  return b;
}

const DiffusionletCache& heat_cache() {
  static const DiffusionletCache c = build_cache(0.0, 1.0, basis4(), 4.0);
  return c;
}

// Trapezoid integral of x^m times one stored surface row.
double row_moment(const GridSolution& s, std::size_t it, int m) {
  double acc = 0.0;
  for (std::size_t j = 0; j < s.nx(); ++j) {
    const double w = (j == 0 || j + 1 == s.nx()) ? 0.5 : 1.0;
    acc += w * std::pow(s.x[j], m) * s.at(it, j);
  }
  return acc * s.dx();
}

std::string temp_path(const std::string& name) { return "dlet_test_" + name + ".bin"; }

}  // namespace

TEST_CASE("cache modes parse") {
  CHECK(parse_cache_mode("fast") == CacheMode::fast);
  CHECK(parse_cache_mode("exact") == CacheMode::exact);
  CHECK(to_string(CacheMode::exact) == "exact");
  CHECK_THROWS_AS(parse_cache_mode("slow"), std::invalid_argument);
}

TEST_CASE("support extent and time scale") {
  const auto [lo, hi] = support_extent(0.0, 1.0, 0.0, 7.0, 1.0);
  CHECK(lo == -6.0);
  CHECK(hi == 13.0);
  const auto [llo, lhi] = support_extent(0.5, 0.5, 0.0, 7.0, 1.0);
  CHECK(llo >= 0.0);
  CHECK(lhi > 7.0 + 3.0 * std::sqrt(7.0));
  const auto& c = heat_cache();
  CHECK(c.time_scale(2) == 16.0);
  auto half = c;
  half.lambda = 0.5;
  CHECK(half.time_scale(2) == doctest::Approx(4.0));
  half.lambda = 1.0;
  CHECK(half.time_scale(3) == 1.0);
}

TEST_CASE("father diffusionlet at lambda = 0 is the Gaussian convolution of phi") {
  // Exact convolution of the piecewise-linear cascade samples.
  const auto& b = basis4();
  const auto samples = b.father.samples();
  const SampledFunction phi{b.father.lo(), b.father.step(), {samples.begin(), samples.end()}};
  double worst = 0.0;
  for (double tau : {0.05, 0.5, 2.0}) {
    for (double x = -4.0; x <= 11.0; x += 0.25) {
      const double exact = closed_form_heat(1.0, phi, tau, x);
      worst = std::max(worst, std::abs(eval_father(heat_cache(), 0, tau, x) - exact));
    }
  }
  CHECK(worst < 5e-4);
}

TEST_CASE("heat flow conserves mass and the vanishing moments") {
  const auto& c = heat_cache();
  for (std::size_t it : {std::size_t{0}, c.father_surface.nt() / 2, c.father_surface.nt() - 1}) {
    CAPTURE(it);
    CHECK(row_moment(c.father_surface, it, 0) == doctest::Approx(1.0).epsilon(1e-6));
    for (int m = 0; m < 4; ++m) CHECK(std::abs(row_moment(c.mother_surface, it, m)) < 1e-5);
  }
}

TEST_CASE("tau = 0 reconstruction equals the wavelet expansion") {
  const auto e = decompose_function(bump, basis4(), 3, 16);
  for (double x = 0.0; x < 16.0; x += 0.37) {
    CHECK(reconstruct(heat_cache(), e, 0.0, x) == doctest::Approx(evaluate_expansion(e, basis4(), x)).epsilon(1e-12));
  }
}

TEST_CASE("reconstruct is linear in the coefficients") {
  const auto e = decompose_function(bump, basis4(), 3, 16);
  auto scaled = e;
  for (double& a : scaled.alpha) a *= -2.0;
  for (auto& row : scaled.beta)
    for (double& v : row) v *= -2.0;
  for (double x : {3.0, 7.5, 12.25}) {
    CHECK(reconstruct(heat_cache(), scaled, 0.2, x) == doctest::Approx(-2.0 * reconstruct(heat_cache(), e, 0.2, x)));
  }
  CHECK(reconstruct(heat_cache(), WaveletExpansion::zeros(4, 3, 16), 0.2, 5.0) == 0.0);
}

TEST_CASE("fast and exact mode agree at lambda = 0") {
  const auto e = decompose_function(bump, basis4(), 2, 16);
  const auto exact = build_cache(0.0, 1.0, basis4(), 4.0, {}, CacheMode::exact, ExactRange::covering(e, {0.25}));
  CHECK(exact.mode == CacheMode::exact);
  CHECK_FALSE(exact.exact_surfaces.empty());
  for (double x = 2.0; x < 14.0; x += 0.5) {
    CHECK(std::abs(reconstruct(exact, e, 0.25, x) - reconstruct(heat_cache(), e, 0.25, x)) < 1e-10);
  }
  CHECK_THROWS_AS(eval_mother(exact, 5, 0, 0.25, 1.0), std::out_of_range);
}

TEST_CASE("exact range covers the periodic copies") {
  const auto e = WaveletExpansion::zeros(2, 2, 4, 3.0);
  const auto r = ExactRange::covering(e, {0.1});
  CHECK(r.father_k_min == 3 - 2);
  CHECK(r.father_k_max == 6);
  REQUIRE(r.mother_k.size() == 2);
  CHECK(r.mother_k[1].first == 6 - 2);
  CHECK(r.mother_k[1].second == 6 + 7);
  CHECK_THROWS_AS(ExactRange::covering(WaveletExpansion::zeros(2, 1, 4, 0.5), {0.1}), std::invalid_argument);
}

TEST_CASE("refinement and translation at lambda = 0") {
  CHECK(refinement_residual(heat_cache(), 0.0).max() < 2e-3);
  CHECK(refinement_residual(heat_cache(), 0.25).max() < 2e-3);
  CHECK_THROWS_AS(refinement_residual(heat_cache(), 2.0), std::out_of_range);
  CHECK(translation_discrepancy(0.0, 1.0, basis4(), 0, 0.25) == 0.0);
  CHECK(translation_discrepancy(0.0, 1.0, basis4(), 3, 0.25) < 2e-3);
}

TEST_CASE("essential support shrinks in level as tau grows") {
  const auto long_horizon = build_cache(0.0, 1.0, basis4(), 64.0);
  int previous = 1 << 30;
  double width = 0.0;
  for (double tau : {0.1, 0.25, 1.0}) {
    const auto es = essential_support(long_horizon, 1e-4, tau);
    CHECK(es.level_bound_found);
    CHECK(es.max_level <= previous);
    CHECK(es.father_interval.length() >= width);
    CHECK(es.k_per_level.size() == es.level_intervals.size());
    previous = es.max_level;
    width = es.father_interval.length();
  }
  CHECK_THROWS_AS(essential_support(heat_cache(), 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(essential_support(heat_cache(), 1e-3, 10.0), std::out_of_range);
}

TEST_CASE("truncation with a vanishing threshold keeps the full sum") {
  const auto e = decompose_function(bump, basis4(), 3, 16);
  for (double x : {4.0, 8.0, 11.5}) {
    const auto t = truncated_reconstruct(heat_cache(), e, 1e-300, 0.25, x);
    CHECK(t.value == doctest::Approx(reconstruct(heat_cache(), e, 0.25, x)).epsilon(1e-12));
  }
  const auto coarse = truncated_reconstruct(heat_cache(), e, 1e-2, 0.25, 8.0);
  const auto fine = truncated_reconstruct(heat_cache(), e, 1e-6, 0.25, 8.0);
  CHECK(coarse.terms_used <= fine.terms_used);
}

TEST_CASE("lambda > 0 caches live on x >= 0") {
  const auto c = build_cache(0.5, 0.5, basis4(), 1.0);
  CHECK(*c.grid.x_lo >= 0.0);
  CHECK(std::abs(eval_father(c, 1, 0.0, 3.0) - basis4().father(2.0)) < 1e-12);
  const double v = eval_father(c, 1, 0.5, 3.0);
  CHECK(std::isfinite(v));
}

TEST_CASE("invalid cache requests") {
  CHECK_THROWS_AS(build_cache(0.0, 0.0, basis4(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_cache(1.5, 1.0, basis4(), 1.0), std::invalid_argument);
  CacheGrid small;
  small.x_lo = 0.0;
  small.x_hi = 7.0;
  try {
    build_cache(0.0, 1.0, basis4(), 1.0, small);
    FAIL("expected a failure");
  } catch (const std::invalid_argument& err) {
    CHECK(std::string(err.what()).find("required") != std::string::npos);
  }
  CHECK_THROWS_AS(build_cache(0.0, 1.0, basis4(), 1.0, {}, CacheMode::exact), std::invalid_argument);
  CHECK_THROWS_AS(eval_mother(heat_cache(), 3, 0, 1.0, 0.0), std::out_of_range);
  CHECK_THROWS_AS(eval_father(heat_cache(), 0, -0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(reconstruct(heat_cache(), WaveletExpansion::zeros(2, 1, 4), 0.1, 1.0), std::invalid_argument);
}

TEST_CASE("cache save and load round trip bit for bit") {
  const auto e = decompose_function(bump, basis4(), 1, 16);
  const auto c = build_cache(0.0, 1.0, basis4(), 1.0, {}, CacheMode::exact, ExactRange::covering(e, {0.5}));
  const auto path = temp_path("roundtrip");
  save_cache(c, path);
  const auto back = load_cache(path);
  std::remove(path.c_str());
  CHECK(back.lambda == c.lambda);
  CHECK(back.sigma == c.sigma);
  CHECK(back.mode == c.mode);
  CHECK(back.basis_order() == 4);
  CHECK(back.grid.resolution == c.grid.resolution);
  CHECK(back.father_surface.values == c.father_surface.values);
  CHECK(back.mother_surface.tau == c.mother_surface.tau);
  CHECK(back.exact_surfaces.size() == c.exact_surfaces.size());
  for (double x : {3.0, 8.0, 13.0}) CHECK(reconstruct(back, e, 0.5, x) == reconstruct(c, e, 0.5, x));
}

TEST_CASE("loading a foreign file fails") {
  CHECK_THROWS(load_cache("does_not_exist.bin"));
  const auto path = temp_path("garbage");
  {
    std::ofstream os(path, std::ios::binary);
    os << "not a cache at all";
  }
  CHECK_THROWS(load_cache(path));
  std::remove(path.c_str());
}
