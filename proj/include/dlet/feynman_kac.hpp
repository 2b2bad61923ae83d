#pragma once

#include <cstdint>
#include <functional>

namespace dlet {

/// dX = mu(t, X) dt + sigma(t, X) dW.
///
/// absorb_at_zero stops a path the first time it reaches x <= 0 and freezes
/// it at 0; the diffusion is then evaluated at max(x, 0) (full truncation).
struct SdeSpec {
  std::function<double(double t, double x)> drift;
  std::function<double(double t, double x)> diffusion;
  bool absorb_at_zero = false;

  /// dX = r X dt + sigma X^lambda dW; absorbed at 0 for lambda in (0, 1].
  static SdeSpec cev(double r, double sigma, double lambda);
};

/// dX = -b X dt + sigma sqrt(X) dW, the square-root diffusion with zero mean
/// level. Requires b >= 0 and sigma >= 0.
SdeSpec cir_preset(double b, double sigma);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;  ///< sample standard deviation / sqrt(n_paths)
  long long n_paths = 0;
  std::uint64_t seed = 0;
};

/// Mean and standard error of samples, accumulated in index order.
McEstimate summarize(const double* samples, long long n, std::uint64_t seed);

/// E[payoff(X_tau) | X_0 = x0] by Euler-Maruyama with n_steps steps.
///
/// Path p draws its normals from NormalStream(derive_seed(seed, p)), and the
/// payoffs are reduced in path order, so the estimate is bit-reproducible
/// and independent of how paths are split across threads.
McEstimate mc_expectation(const SdeSpec& spec, const std::function<double(double)>& payoff,
                          double x0, double tau, long long n_paths, int n_steps,
                          std::uint64_t seed, unsigned threads = 0);

}  // namespace dlet
