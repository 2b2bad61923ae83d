#include "dlet/feynman_kac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlet/parallel.hpp"
#include "dlet/rng.hpp"

namespace dlet {

SdeSpec SdeSpec::cev(double r, double sigma, double lambda) {
  if (sigma < 0.0) throw std::invalid_argument("CEV sigma must be nonnegative");
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("CEV lambda must lie in [0, 1]");
  SdeSpec spec;
  spec.drift = [r](double, double x) { return r * x; };
  if (lambda == 0.0) {
    spec.diffusion = [sigma](double, double) { return sigma; };
  } else {
    spec.diffusion = [sigma, lambda](double, double x) {
      return sigma * std::pow(std::max(x, 0.0), lambda);
    };
    spec.absorb_at_zero = true;
  }
  return spec;
}

SdeSpec cir_preset(double b, double sigma) {
  if (b < 0.0 || sigma < 0.0) throw std::invalid_argument("CIR b and sigma must be nonnegative");
  SdeSpec spec;
  spec.drift = [b](double, double x) { return -b * x; };
  spec.diffusion = [sigma](double, double x) { return sigma * std::sqrt(std::max(x, 0.0)); };
  spec.absorb_at_zero = true;
  return spec;
}

McEstimate summarize(const double* samples, long long n, std::uint64_t seed) {
  McEstimate est;
  est.n_paths = n;
  est.seed = seed;
  if (n <= 0) return est;
  // Welford update in index order.
  double mean = 0.0, m2 = 0.0;
  for (long long k = 0; k < n; ++k) {
    const double delta = samples[k] - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (samples[k] - mean);
  }
  est.mean = mean;
  if (n > 1) {
    const double variance = m2 / static_cast<double>(n - 1);
    est.std_error = std::sqrt(variance / static_cast<double>(n));
  }
  return est;
}

McEstimate mc_expectation(const SdeSpec& spec, const std::function<double(double)>& payoff,
                          double x0, double tau, long long n_paths, int n_steps,
                          std::uint64_t seed, unsigned threads) {
  if (n_paths < 1) throw std::invalid_argument("mc_expectation: n_paths must be >= 1");
  if (n_steps < 1) throw std::invalid_argument("mc_expectation: n_steps must be >= 1");
  if (tau < 0.0) throw std::invalid_argument("mc_expectation: tau must be nonnegative");
  if (!spec.drift || !spec.diffusion) throw std::invalid_argument("mc_expectation: incomplete SDE");

  std::vector<double> values(static_cast<std::size_t>(n_paths));
  const double dt = tau / n_steps;
  const double sqrt_dt = std::sqrt(dt);

  auto run = [&](long long begin, long long end) {
    for (long long p = begin; p < end; ++p) {
      double x = x0;
      if (tau > 0.0) {
        NormalStream rng(derive_seed(seed, static_cast<std::uint64_t>(p)));
        for (int s = 0; s < n_steps; ++s) {
          if (spec.absorb_at_zero && x <= 0.0) {
            x = 0.0;
            break;
          }
          const double t = s * dt;
          const double z = rng.normal();
          const double arg = spec.absorb_at_zero ? std::max(x, 0.0) : x;
          x += spec.drift(t, x) * dt + spec.diffusion(t, arg) * sqrt_dt * z;
        }
        if (spec.absorb_at_zero && x < 0.0) x = 0.0;
      }
      values[static_cast<std::size_t>(p)] = payoff(x);
    }
  };

  parallel_for(n_paths, threads, run);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      throw std::domain_error("payoff is not finite on path " + std::to_string(k));
    }
  }
  return summarize(values.data(), n_paths, seed);
}

}  // namespace dlet
