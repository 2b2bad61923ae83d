#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dlet/diffusionlets.hpp"
#include "dlet/feynman_kac.hpp"
#include "dlet/pde_solver.hpp"
#include "dlet/wavelets.hpp"

namespace dlet {

/// Proportional error structure on independent wavelet coefficients:
/// Gamma[a, a] = gamma * a^2, Gamma[a, b] = 0 for distinct coefficients.
///
/// Weights default to gamma(k) = c and gamma(i, k) = c 2^{-eta i}; the
/// optional functions replace them. k is the stored coefficient index.
struct ErrorStructureSpec {
  double c = 1.0;
  double eta = 0.0;
  std::function<double(int k)> father_weight;
  std::function<double(int i, int k)> mother_weight;

  /// Throws std::invalid_argument for c < 0 or non-finite c, eta.
  void validate() const;
  /// Throws std::domain_error when a weight is negative or not finite.
  [[nodiscard]] double gamma_father(int k) const;
  [[nodiscard]] double gamma_mother(int i, int k) const;
};

/// Per-coefficient basis values at a point, with periodic copies summed:
/// father[k] and mother[i][k], same shape as the expansion. Entries whose
/// coefficient is zero are left at zero.
struct TermValues {
  std::vector<double> father;
  std::vector<std::vector<double>> mother;
};

/// Wavelets phi_{0,k}(x), psi_{i,k}(x).
TermValues wavelet_values(const WaveletExpansion& expansion, const WaveletBasis& basis, double x);
/// Diffusionlets Phi_{0,k}(tau, x), Psi_{i,k}(tau, x).
TermValues diffusionlet_values(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                               double tau, double x);

/// sum gamma * coefficient^2 * a * b over all coefficients.
double gamma_form(const WaveletExpansion& expansion, const ErrorStructureSpec& spec,
                  const TermValues& a, const TermValues& b);

/// Gamma[f(x)] for the expanded terminal condition.
double gamma_terminal(const WaveletExpansion& expansion, const ErrorStructureSpec& spec,
                      const WaveletBasis& basis, double x);

/// Gamma[Q(tau, x)] for the diffusionlet solution.
double gamma_solution(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                      const ErrorStructureSpec& spec, double tau, double x);

struct SpacetimePoint {
  double tau = 0.0;
  double x = 0.0;
};

/// Gamma[Q(p1), Q(p2)].
double covariance_solution(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                           const ErrorStructureSpec& spec, SpacetimePoint p1, SpacetimePoint p2);

/// Covariance matrix over a list of points, row-major n x n.
std::vector<double> covariance_matrix(const DiffusionletCache& cache,
                                      const WaveletExpansion& expansion,
                                      const ErrorStructureSpec& spec,
                                      const std::vector<SpacetimePoint>& points);

/// Gamma[Q] on a (tau, x) grid.
struct VarianceField {
  std::vector<double> tau;
  std::vector<double> x;
  std::vector<double> values;  ///< row-major, values[it * x.size() + ix]

  [[nodiscard]] double at(std::size_t it, std::size_t ix) const { return values[it * x.size() + ix]; }
};

VarianceField variance_field(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                             const ErrorStructureSpec& spec, const std::vector<double>& taus,
                             const std::vector<double>& xs);

/// Standard normal draws hat_alpha[k], hat_beta[i][k]. Draw (i, k) comes
/// from NormalStream(derive_seed(seed, i + 1, k)), with i + 1 = 0 for the
/// father coefficients.
struct SharpSample {
  std::uint64_t seed = 0;
  std::vector<double> hat_alpha;
  std::vector<std::vector<double>> hat_beta;
};

SharpSample draw_sharp_sample(const WaveletExpansion& expansion, std::uint64_t seed);

/// Q^#(tau, x) = sum sqrt(gamma) coefficient * hat * diffusionlet.
/// Throws std::invalid_argument when the sample shape does not match.
double sharp_field(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                   const ErrorStructureSpec& spec, const SharpSample& sample, double tau, double x);

/// Mean of (Q^#(tau, x))^2 over n_draws sharp samples; draw d uses
/// derive_seed(seed, d) as its sample seed.
McEstimate sharp_second_moment(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                               const ErrorStructureSpec& spec, double tau, double x,
                               long long n_draws, std::uint64_t seed, unsigned threads = 0);

struct PerturbationParams {
  double epsilon = 1e-4;
  long long n_samples = 10000;
  std::uint64_t seed = 0;
  int refine_levels = 6;  ///< terminal sampled at spacing 2^-refine_levels
  int nt = 64;            ///< Crank-Nicolson steps per solve
  unsigned threads = 0;
};

/// Variance oracle by direct perturbation.
///
/// Each sample multiplies every coefficient a by 1 + sqrt(epsilon gamma) Z
/// with independent standard normals Z, rebuilds the terminal by the
/// inverse transform on the window and solves the drift-free equation
/// directly (no diffusionlets). Returns, per probe, the mean of
/// (Q_perturbed - Q)^2 / epsilon. At tau = 0 the terminal is evaluated
/// without a solve. Sample s draws from NormalStream(derive_seed(seed, s)).
std::vector<McEstimate> perturb_and_solve_mc(const WaveletExpansion& expansion,
                                             const ErrorStructureSpec& spec,
                                             const WaveletBasis& basis, double lambda,
                                             double sigma, double tau,
                                             const std::vector<double>& probes,
                                             const PerturbationParams& params = {});

/// Ornstein-Uhlenbeck error structure on the real line:
/// Gamma[u] = (u')^2 and A[u] = u''/2 - x u'/2, by fourth-order central
/// differences on the sample spacing. x +- 2 dx must lie in the sampled
/// range (std::out_of_range otherwise).
double ou_gamma(const SampledFunction& u, double x);
double ou_generator(const SampledFunction& u, double x);

}  // namespace dlet
