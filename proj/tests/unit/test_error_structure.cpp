#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dlet/error_structure.hpp"
#include "dlet/rng.hpp"

using namespace dlet;

namespace {

const WaveletBasis& basis4() {
  static const WaveletBasis b = make_basis(4);
  return b;
}

const DiffusionletCache& cache() {
  static const DiffusionletCache c = build_cache(0.0, 1.0, basis4(), 16.0);
  return c;
}

WaveletExpansion random_expansion(std::uint64_t seed) {
  NormalStream rng(seed);
  auto e = WaveletExpansion::zeros(4, 2, 16);
  for (double& a : e.alpha) a = rng.normal();
  for (auto& row : e.beta)
    for (double& b : row) b = rng.normal();
  return e;
}

}  // namespace

TEST_CASE("two isolated coefficients against hand-evaluated wavelets") {
  auto e = WaveletExpansion::zeros(4, 1, 16);
  e.alpha[3] = 2.0;
  e.beta[0][2] = -1.5;
  ErrorStructureSpec spec;
  spec.c = 0.5;
  const auto& b = basis4();
  const double x = 4.5;
  const double expected = 0.5 * 4.0 * std::pow(b.father(x - 3.0), 2) + 0.5 * 2.25 * std::pow(b.mother(x - 2.0), 2);
  CHECK(gamma_terminal(e, spec, b, x) == doctest::Approx(expected).epsilon(1e-14));

  const double tau = 0.3;
  const double phi = eval_father(cache(), 3, tau, x), psi = eval_mother(cache(), 0, 2, tau, x);
  CHECK(gamma_solution(cache(), e, spec, tau, x) == doctest::Approx(0.5 * 4.0 * phi * phi + 0.5 * 2.25 * psi * psi).epsilon(1e-14));
}

TEST_CASE("level decay of the default weights") {
  auto e = WaveletExpansion::zeros(4, 3, 16);
  e.beta[2][20] = 1.0;
  ErrorStructureSpec flat, decaying;
  decaying.eta = 1.0;
  const double x = 5.6;
  CHECK(gamma_terminal(e, decaying, basis4(), x) == doctest::Approx(0.25 * gamma_terminal(e, flat, basis4(), x)));
  CHECK(decaying.gamma_mother(2, 0) == doctest::Approx(0.25));
  CHECK(decaying.gamma_father(7) == 1.0);
}

TEST_CASE("Gamma is nonnegative, scales with c and vanishes with it") {
  const auto e = random_expansion(1);
  ErrorStructureSpec one, three, none;
  three.c = 3.0;
  none.c = 0.0;
  NormalStream rng(2);
  for (int n = 0; n < 20; ++n) {
    const double tau = rng.uniform(), x = 16.0 * rng.uniform();
    const double g = gamma_solution(cache(), e, one, tau, x);
    CHECK(g >= 0.0);
    CHECK(gamma_solution(cache(), e, three, tau, x) == doctest::Approx(3.0 * g));
    CHECK(gamma_solution(cache(), e, none, tau, x) == 0.0);
  }
}

TEST_CASE("zero coefficients carry no variance") {
  auto e = random_expansion(3);
  auto only_alpha = e;
  for (auto& row : only_alpha.beta)
    for (double& b : row) b = 0.0;
  const ErrorStructureSpec spec;
  const double x = 7.3, tau = 0.2;
  const auto v = diffusionlet_values(cache(), only_alpha, tau, x);
  for (const auto& row : v.mother)
    for (double m : row) CHECK(m == 0.0);
  double expected = 0.0;
  for (std::size_t k = 0; k < e.alpha.size(); ++k) expected += e.alpha[k] * e.alpha[k] * v.father[k] * v.father[k];
  CHECK(gamma_solution(cache(), only_alpha, spec, tau, x) == doctest::Approx(expected));
}

TEST_CASE("tau = 0 solution variance equals the terminal variance") {
  const auto e = random_expansion(4);
  const ErrorStructureSpec spec;
  for (double x : {1.0, 6.25, 15.5}) {
    CHECK(gamma_solution(cache(), e, spec, 0.0, x) == doctest::Approx(gamma_terminal(e, spec, basis4(), x)).epsilon(1e-12));
  }
}

TEST_CASE("covariance matrix: diagonal, symmetry and 2x2 minors") {
  const auto e = random_expansion(5);
  ErrorStructureSpec spec;
  spec.eta = 0.5;
  const std::vector<SpacetimePoint> pts{{0.0, 3.0}, {0.1, 3.5}, {0.5, 8.0}, {1.0, 12.0}};
  const auto m = covariance_matrix(cache(), e, spec, pts);
  const std::size_t n = pts.size();
  for (std::size_t r = 0; r < n; ++r) {
    CHECK(m[r * n + r] == gamma_solution(cache(), e, spec, pts[r].tau, pts[r].x));
    for (std::size_t c = 0; c < n; ++c) {
      CHECK(m[r * n + c] == m[c * n + r]);
      CHECK(m[r * n + c] * m[r * n + c] <= m[r * n + r] * m[c * n + c] + 1e-12);
      CHECK(m[r * n + c] == doctest::Approx(covariance_solution(cache(), e, spec, pts[r], pts[c])));
    }
  }
}

TEST_CASE("custom weights and invalid weights") {
  const auto e = random_expansion(6);
  ErrorStructureSpec spec;
  spec.father_weight = [](int k) { return k == 0 ? 1.0 : 0.0; };
  spec.mother_weight = [](int, int) { return 0.0; };
  const auto v = wavelet_values(e, basis4(), 2.0);
  CHECK(gamma_terminal(e, spec, basis4(), 2.0) == doctest::Approx(e.alpha[0] * e.alpha[0] * v.father[0] * v.father[0]));

  ErrorStructureSpec negative;
  negative.mother_weight = [](int, int) { return -1.0; };
  CHECK_THROWS_AS(gamma_terminal(e, negative, basis4(), 2.0), std::domain_error);
  ErrorStructureSpec bad_c;
  bad_c.c = -1.0;
  CHECK_THROWS_AS(bad_c.validate(), std::invalid_argument);
  ErrorStructureSpec bad_eta;
  bad_eta.eta = std::nan("");
  CHECK_THROWS_AS(gamma_terminal(e, bad_eta, basis4(), 2.0), std::invalid_argument);
}

TEST_CASE("sharp samples are reproducible and shaped like the expansion") {
  const auto e = random_expansion(7);
  const auto a = draw_sharp_sample(e, 10), b = draw_sharp_sample(e, 10), c = draw_sharp_sample(e, 11);
  CHECK(a.hat_alpha == b.hat_alpha);
  CHECK(a.hat_beta == b.hat_beta);
  CHECK(a.hat_alpha != c.hat_alpha);
  REQUIRE(a.hat_beta.size() == e.beta.size());
  CHECK(a.hat_beta[1].size() == e.beta[1].size());
  auto wrong = a;
  wrong.hat_beta.pop_back();
  CHECK_THROWS_AS(sharp_field(cache(), e, {}, wrong, 0.1, 3.0), std::invalid_argument);
}

TEST_CASE("sharp field is linear in the draws") {
  const auto e = random_expansion(8);
  const ErrorStructureSpec spec;
  const auto s = draw_sharp_sample(e, 3);
  auto doubled = s;
  for (double& h : doubled.hat_alpha) h *= 2.0;
  for (auto& row : doubled.hat_beta)
    for (double& h : row) h *= 2.0;
  CHECK(sharp_field(cache(), e, spec, doubled, 0.2, 9.0) == doctest::Approx(2.0 * sharp_field(cache(), e, spec, s, 0.2, 9.0)));
}

TEST_CASE("second moment of the sharp field matches Gamma") {
  const auto e = random_expansion(9);
  const ErrorStructureSpec spec;
  const auto m = sharp_second_moment(cache(), e, spec, 0.25, 8.0, 20000, 12, 1);
  const double g = gamma_solution(cache(), e, spec, 0.25, 8.0);
  CHECK(std::abs(m.mean - g) < 4.0 * m.std_error);
  const auto again = sharp_second_moment(cache(), e, spec, 0.25, 8.0, 20000, 12, 3);
  CHECK(again.mean == m.mean);
  CHECK_THROWS_AS(sharp_second_moment(cache(), e, spec, 0.25, 8.0, 0, 12), std::invalid_argument);
}

TEST_CASE("perturbation oracle agrees with Gamma at the terminal time") {
  const auto e = decompose_function([](double x) { return std::exp(-0.5 * (x - 8.0) * (x - 8.0)); }, basis4(), 4, 16);
  const ErrorStructureSpec spec;
  PerturbationParams params;
  params.n_samples = 4000;
  params.seed = 21;
  params.threads = 1;
  const std::vector<double> probes{7.0, 8.0};
  const auto est = perturb_and_solve_mc(e, spec, basis4(), 0.0, 1.0, 0.0, probes, params);
  params.threads = 2;
  const auto again = perturb_and_solve_mc(e, spec, basis4(), 0.0, 1.0, 0.0, probes, params);
  for (std::size_t q = 0; q < probes.size(); ++q) {
    const double g = gamma_terminal(e, spec, basis4(), probes[q]);
    CHECK(std::abs(est[q].mean - g) < 4.0 * est[q].std_error + 0.01 * g);
    CHECK(again[q].mean == est[q].mean);
  }
  params.epsilon = 0.0;
  CHECK_THROWS_AS(perturb_and_solve_mc(e, spec, basis4(), 0.0, 1.0, 0.0, probes, params), std::invalid_argument);
  params.epsilon = 1e-4;
  params.refine_levels = 2;
  CHECK_THROWS_AS(perturb_and_solve_mc(e, spec, basis4(), 0.0, 1.0, 0.0, probes, params), std::invalid_argument);
}

TEST_CASE("OU operators on polynomials") {
  SampledFunction sq{-3.0, 1e-2, std::vector<double>(601)};
  for (std::size_t n = 0; n < sq.values.size(); ++n) sq.values[n] = sq.x_at(n) * sq.x_at(n);
  for (double x : {-1.5, 0.0, 0.7, 2.0}) {
    CHECK(ou_gamma(sq, x) == doctest::Approx(4.0 * x * x).epsilon(1e-8));
    CHECK(ou_generator(sq, x) == doctest::Approx(1.0 - x * x).epsilon(1e-8));
  }
  CHECK_THROWS_AS(ou_gamma(sq, 2.995), std::out_of_range);
  CHECK_THROWS_AS(ou_generator(sq, -3.0), std::out_of_range);
}

TEST_CASE("OU carre du champ from the generator") {
  // Gamma[u] = A[u^2] - 2 u A[u]
  SampledFunction u{-3.0, 1e-2, std::vector<double>(601)}, u2 = u;
  for (std::size_t n = 0; n < u.values.size(); ++n) {
    u.values[n] = std::sin(u.x_at(n));
    u2.values[n] = u.values[n] * u.values[n];
  }
  for (double x : {-1.0, 0.2, 1.9}) {
    const double lhs = ou_gamma(u, x);
    const double rhs = ou_generator(u2, x) - 2.0 * std::sin(x) * ou_generator(u, x);
    CHECK(std::abs(lhs - rhs) < 1e-6);
    CHECK(lhs == doctest::Approx(std::cos(x) * std::cos(x)).epsilon(1e-8));
  }
}
