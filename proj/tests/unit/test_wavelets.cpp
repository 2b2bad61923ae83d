#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dlet/rng.hpp"
#include "dlet/wavelets.hpp"

using namespace dlet;

namespace {

double bump(double x) { return std::exp(-0.5 * (x - 8.0) * (x - 8.0)); }

std::vector<double> flatten(const WaveletExpansion& e) {
  std::vector<double> out(e.alpha);
  for (const auto& row : e.beta) out.insert(out.end(), row.begin(), row.end());
  return out;
}

}  // namespace

TEST_CASE("db2 matches the closed form") {
  const double s3 = std::sqrt(3.0), d = 4.0 * std::numbers::sqrt2;
  const std::vector<double> exact{(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d};
  const auto f = daubechies_filter(2);
  REQUIRE(f.h.size() == 4);
  for (std::size_t n = 0; n < 4; ++n) CHECK(f.h[n] == doctest::Approx(exact[n]).epsilon(1e-15));
}

TEST_CASE("db3 matches published coefficients") {
  const std::vector<double> table{0.3326705529500826,  0.8068915093110925, 0.4598775021184915,
                                  -0.1350110200102546, -0.0854412738820267, 0.0352262918857095};
  const auto f = daubechies_filter(3);
  for (std::size_t n = 0; n < table.size(); ++n) CHECK(std::abs(f.h[n] - table[n]) < 1e-15);
}

TEST_CASE("Haar filter and box father") {
  const auto f = daubechies_filter(1);
  CHECK(f.h[0] == doctest::Approx(std::numbers::sqrt2 / 2));
  CHECK(f.g[1] == doctest::Approx(-std::numbers::sqrt2 / 2));
  const auto basis = make_basis(1, 8);
  CHECK(basis.father(0.25) == doctest::Approx(1.0));
  CHECK(basis.father(0.75) == doctest::Approx(1.0));
  CHECK(basis.mother(0.25) == doctest::Approx(1.0));
  CHECK(basis.mother(0.75) == doctest::Approx(-1.0));
}

TEST_CASE("filter residuals") {
  for (int p = 1; p <= kMaxDaubechiesOrder; ++p) {
    CAPTURE(p);
    const auto r = filter_residuals(daubechies_filter(p));
    CHECK(r.sum < 1e-14);
    CHECK(r.orthonormality < 1e-14);
    CHECK(r.mirror == 0.0);
    // Above p = 8 the literal moment sums are limited by rounding of the
    // coefficients themselves (n^m reaches 19^9).
    CHECK(r.vanishing_moments < (p <= 8 ? 1e-10 : 2e-8));
  }
}

TEST_CASE("unsupported orders throw") {
  CHECK_THROWS_AS(daubechies_filter(0), std::invalid_argument);
  CHECK_THROWS_AS(daubechies_filter(11), std::invalid_argument);
}

TEST_CASE("db2 father first moment") {
  CHECK(father_moment(daubechies_filter(2), 1) == doctest::Approx((3.0 - std::sqrt(3.0)) / 2).epsilon(1e-14));
  CHECK(father_moment(daubechies_filter(4), 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(father_moment(daubechies_filter(2), -1), std::invalid_argument);
}

TEST_CASE("cascade wavelets: integrals, norms and first moment") {
  for (int p : {2, 4, 6}) {
    CAPTURE(p);
    const auto b = make_basis(p);
    CHECK(b.father.moment(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(b.mother.moment(0)) < 1e-6);
    CHECK(b.father.l2_norm() == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(b.mother.l2_norm() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(b.father.moment(1) == doctest::Approx(b.father_mean).epsilon(1e-6));
    CHECK(b.father.lo() == 0.0);
    CHECK(b.father.hi() == doctest::Approx(b.support_length()));
  }
}

TEST_CASE("integer translates: partition of unity and linear reproduction") {
  const auto b = make_basis(4);
  for (double x = 0.0; x < 1.0; x += 0.0625) {
    double ones = 0.0, lin = 0.0;
    for (int k = -8; k <= 8; ++k) {
      ones += b.father(x - k);
      lin += (k + b.father_mean) * b.father(x - k);
    }
    CHECK(ones == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lin == doctest::Approx(x).epsilon(1e-8));
  }
}

TEST_CASE("DyadicFunction interpolates and vanishes outside") {
  const DyadicFunction f({0.0, 1.0, 4.0}, 1, 2.0);
  CHECK(f.step() == 0.5);
  CHECK(f.hi() == 3.0);
  CHECK(f(2.25) == doctest::Approx(0.5));
  CHECK(f(2.75) == doctest::Approx(2.5));
  CHECK(f(1.0) == 0.0);
  CHECK(f(3.5) == 0.0);
  CHECK_THROWS_AS(DyadicFunction({}, 1, 0.0), std::invalid_argument);
}

TEST_CASE("periodic transform is orthogonal") {
  // Columns of the explicit transform matrix, one per unit impulse. Samples
  // carry weight 2^-levels, so the columns have norm 2^{-levels/2}.
  const auto filter = daubechies_filter(3);
  const std::size_t n = 32;
  std::vector<std::vector<double>> columns;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    columns.push_back(flatten(fwt_decompose(e, filter, 3)));
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      double dot = 0.0;
      for (std::size_t r = 0; r < n; ++r) dot += columns[a][r] * columns[b][r];
      worst = std::max(worst, std::abs(8.0 * dot - (a == b ? 1.0 : 0.0)));
    }
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("round trip and energy on random signals") {
  for (int p : {1, 2, 4, 10}) {
    CAPTURE(p);
    const auto filter = daubechies_filter(p);
    NormalStream rng(derive_seed(7, static_cast<std::uint64_t>(p)));
    std::vector<double> s(256);
    double energy = 0.0;
    for (double& v : s) {
      v = rng.normal();
      energy += v * v;
    }
    const auto e = fwt_decompose(s, filter, 4, -3.0);
    CHECK(e.cells == 16);
    CHECK(e.x_lo == -3.0);
    CHECK(e.energy() == doctest::Approx(energy / 16.0).epsilon(1e-12));
    const auto back = fwt_reconstruct(e, filter, s.size());
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(back[k] == doctest::Approx(s[k]).epsilon(1e-12));
  }
}

TEST_CASE("transform is linear") {
  const auto filter = daubechies_filter(4);
  NormalStream rng(3);
  std::vector<double> a(128), b(128), c(128);
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = rng.normal();
    b[k] = rng.normal();
    c[k] = 2.0 * a[k] - 0.5 * b[k];
  }
  const auto fa = flatten(fwt_decompose(a, filter, 3));
  const auto fb = flatten(fwt_decompose(b, filter, 3));
  const auto fc = flatten(fwt_decompose(c, filter, 3));
  for (std::size_t k = 0; k < fc.size(); ++k) CHECK(std::abs(fc[k] - (2.0 * fa[k] - 0.5 * fb[k])) < 1e-12);
}

TEST_CASE("interior details of a low-degree polynomial vanish") {
  const int p = 4, levels = 3, cells = 32;
  const auto basis = make_basis(p);
  auto poly = [](double x) { return 1.0 + x - 0.1 * x * x + 0.01 * x * x * x; };
  const auto e = decompose_function(poly, basis, levels, cells);
  double worst = 0.0;
  for (int i = 0; i < levels; ++i) {
    for (std::size_t k = 0; k < e.beta[static_cast<std::size_t>(i)].size(); ++k) {
      if (static_cast<double>(k) / std::exp2(i) + 2 * p + 1 > cells) continue;
      worst = std::max(worst, std::abs(e.beta[static_cast<std::size_t>(i)][k]));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("sample points sit at the father centre of mass") {
  const auto b = make_basis(2);
  const auto xs = sample_points(b, 2, 3, 1.0);
  REQUIRE(xs.size() == 12);
  CHECK(xs[0] == doctest::Approx(1.0 + b.father_mean / 4));
  CHECK(xs[5] - xs[4] == doctest::Approx(0.25));
  CHECK_THROWS_AS(sample_points(b, -1, 3), std::invalid_argument);
}

TEST_CASE("evaluate_expansion approximates a smooth function") {
  const auto basis = make_basis(4);
  const auto e = decompose_function(bump, basis, 4, 16);
  double worst = 0.0;
  for (double x = 2.0; x <= 14.0; x += 0.01) worst = std::max(worst, std::abs(evaluate_expansion(e, basis, x) - bump(x)));
  CHECK(worst < 1e-5);
}

TEST_CASE("reconstruction to a finer grid samples the same function") {
  const auto basis = make_basis(4);
  const auto e = decompose_function(bump, basis, 3, 16);
  const auto fine = fwt_reconstruct(e, basis.filter, 16u << 6);
  const auto xs = sample_points(basis, 6, 16);
  double worst = 0.0;
  for (std::size_t n = 0; n < xs.size(); ++n) worst = std::max(worst, std::abs(fine[n] - bump(xs[n])));
  CHECK(worst < 1e-3);
}

TEST_CASE("for_each_term visits wrapped copies only") {
  auto e = WaveletExpansion::zeros(3, 2, 8, 0.0);
  CHECK(e.term_count() == 8 + 8 + 16);
  int copies = 0;
  for_each_term(e, 0.5, [&](const ExpansionTerm& t) {
    const int period = t.level < 0 ? 8 : 8 << t.level;
    CHECK((t.k - t.shifted_k) % period == 0);
    CHECK(t.shifted_k <= t.k);
    if (t.shifted_k != t.k) {
      ++copies;
      CHECK(t.shifted_k + 5 > 0);
    }
  });
  CHECK(copies > 0);
}

TEST_CASE("malformed expansions are rejected") {
  auto e = WaveletExpansion::zeros(2, 2, 4);
  e.beta[1].pop_back();
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);
  const auto filter = daubechies_filter(2);
  CHECK_THROWS_AS(fwt_decompose(std::vector<double>(10), filter, 2), std::invalid_argument);
  CHECK_THROWS_AS(fwt_reconstruct(WaveletExpansion::zeros(2, 2, 4), filter, 20), std::invalid_argument);
  CHECK_THROWS_AS(fwt_reconstruct(WaveletExpansion::zeros(3, 2, 4), filter, 16), std::invalid_argument);
  CHECK_THROWS_AS(WaveletExpansion::zeros(2, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(cascade_evaluate(filter, 2), std::invalid_argument);
}
