#include "dlet/error_structure.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dlet/parallel.hpp"
#include "dlet/rng.hpp"

namespace dlet {

void ErrorStructureSpec::validate() const {
  if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("gamma scale c must be finite and >= 0");
  if (!std::isfinite(eta)) throw std::invalid_argument("gamma decay eta must be finite");
}

namespace {

double checked_weight(double w, const std::string& where) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw std::domain_error("gamma weight " + where + " = " + std::to_string(w) +
                            " is negative or not finite");
  }
  return w;
}

TermValues shaped_like(const WaveletExpansion& e) {
  TermValues v;
  v.father.assign(e.alpha.size(), 0.0);
  for (const auto& row : e.beta) v.mother.emplace_back(row.size(), 0.0);
  return v;
}

double& slot(TermValues& v, const ExpansionTerm& t) {
  return t.level < 0 ? v.father[static_cast<std::size_t>(t.k)]
                     : v.mother[static_cast<std::size_t>(t.level)][static_cast<std::size_t>(t.k)];
}

// Calls f(coefficient, gamma, index of (level, k)) over the expansion.
template <class F>
void for_each_coefficient(const WaveletExpansion& e, const ErrorStructureSpec& spec, F&& f) {
  for (std::size_t k = 0; k < e.alpha.size(); ++k) {
    if (e.alpha[k] != 0.0) f(e.alpha[k], spec.gamma_father(static_cast<int>(k)), -1, k);
  }
  for (std::size_t i = 0; i < e.beta.size(); ++i) {
    for (std::size_t k = 0; k < e.beta[i].size(); ++k) {
      if (e.beta[i][k] != 0.0) {
        f(e.beta[i][k], spec.gamma_mother(static_cast<int>(i), static_cast<int>(k)),
          static_cast<int>(i), k);
      }
    }
  }
}

double entry(const TermValues& v, int level, std::size_t k) {
  return level < 0 ? v.father[k] : v.mother[static_cast<std::size_t>(level)][k];
}

}  // namespace

double ErrorStructureSpec::gamma_father(int k) const {
  if (father_weight) return checked_weight(father_weight(k), "gamma(" + std::to_string(k) + ")");
  return checked_weight(c, "gamma(" + std::to_string(k) + ")");
}

double ErrorStructureSpec::gamma_mother(int i, int k) const {
  const std::string where = "gamma(" + std::to_string(i) + ", " + std::to_string(k) + ")";
  if (mother_weight) return checked_weight(mother_weight(i, k), where);
  return checked_weight(c * std::exp2(-eta * i), where);
}

TermValues wavelet_values(const WaveletExpansion& expansion, const WaveletBasis& basis, double x) {
  if (expansion.order != basis.order()) {
    throw std::invalid_argument("expansion order does not match basis order");
  }
  TermValues v = shaped_like(expansion);
  for_each_term(expansion, x, [&](const ExpansionTerm& t) {
    if (t.coefficient == 0.0) return;
    slot(v, t) += t.level < 0 ? basis.father(t.argument)
                              : std::pow(2.0, 0.5 * t.level) * basis.mother(t.argument);
  });
  return v;
}

TermValues diffusionlet_values(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                               double tau, double x) {
  TermValues v = shaped_like(expansion);
  for_each_term(expansion, x, [&](const ExpansionTerm& t) {
    if (t.coefficient == 0.0) return;
    slot(v, t) += term_value(cache, expansion, t, tau, x);
  });
  return v;
}

double gamma_form(const WaveletExpansion& expansion, const ErrorStructureSpec& spec,
                  const TermValues& a, const TermValues& b) {
  double acc = 0.0;
  for_each_coefficient(expansion, spec, [&](double coef, double gamma, int level, std::size_t k) {
    acc += gamma * coef * coef * (entry(a, level, k) * entry(b, level, k));
  });
  return acc;
}

double gamma_terminal(const WaveletExpansion& expansion, const ErrorStructureSpec& spec,
                      const WaveletBasis& basis, double x) {
  spec.validate();
  const auto v = wavelet_values(expansion, basis, x);
  return gamma_form(expansion, spec, v, v);
}

double gamma_solution(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                      const ErrorStructureSpec& spec, double tau, double x) {
  return covariance_solution(cache, expansion, spec, {tau, x}, {tau, x});
}

double covariance_solution(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                           const ErrorStructureSpec& spec, SpacetimePoint p1, SpacetimePoint p2) {
  spec.validate();
  const auto a = diffusionlet_values(cache, expansion, p1.tau, p1.x);
  if (p1.tau == p2.tau && p1.x == p2.x) return gamma_form(expansion, spec, a, a);
  const auto b = diffusionlet_values(cache, expansion, p2.tau, p2.x);
  return gamma_form(expansion, spec, a, b);
}

std::vector<double> covariance_matrix(const DiffusionletCache& cache,
                                      const WaveletExpansion& expansion,
                                      const ErrorStructureSpec& spec,
                                      const std::vector<SpacetimePoint>& points) {
  spec.validate();
  std::vector<TermValues> values;
  values.reserve(points.size());
  for (const auto& p : points) values.push_back(diffusionlet_values(cache, expansion, p.tau, p.x));
  const std::size_t n = points.size();
  std::vector<double> out(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r; c < n; ++c) {
      out[r * n + c] = out[c * n + r] = gamma_form(expansion, spec, values[r], values[c]);
    }
  }
  return out;
}

VarianceField variance_field(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                             const ErrorStructureSpec& spec, const std::vector<double>& taus,
                             const std::vector<double>& xs) {
  spec.validate();
  VarianceField field{taus, xs, std::vector<double>(taus.size() * xs.size())};
  for (std::size_t it = 0; it < taus.size(); ++it) {
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
      const auto v = diffusionlet_values(cache, expansion, taus[it], xs[ix]);
      field.values[it * xs.size() + ix] = gamma_form(expansion, spec, v, v);
    }
  }
  return field;
}

SharpSample draw_sharp_sample(const WaveletExpansion& expansion, std::uint64_t seed) {
  SharpSample s;
  s.seed = seed;
  s.hat_alpha.resize(expansion.alpha.size());
  for (std::size_t k = 0; k < s.hat_alpha.size(); ++k) {
    s.hat_alpha[k] = NormalStream(derive_seed(seed, 0, k)).normal();
  }
  for (std::size_t i = 0; i < expansion.beta.size(); ++i) {
    auto& row = s.hat_beta.emplace_back(expansion.beta[i].size());
    for (std::size_t k = 0; k < row.size(); ++k) {
      row[k] = NormalStream(derive_seed(seed, i + 1, k)).normal();
    }
  }
  return s;
}

namespace {

// sqrt(gamma) * coefficient * value, flattened in father-then-level order.
std::vector<double> sharp_weights(const WaveletExpansion& expansion, const ErrorStructureSpec& spec,
                                  const TermValues& v) {
  std::vector<double> w;
  w.reserve(expansion.term_count());
  for (std::size_t k = 0; k < expansion.alpha.size(); ++k) {
    const double a = expansion.alpha[k];
    w.push_back(a == 0.0 ? 0.0 : std::sqrt(spec.gamma_father(static_cast<int>(k))) * a * v.father[k]);
  }
  for (std::size_t i = 0; i < expansion.beta.size(); ++i) {
    for (std::size_t k = 0; k < expansion.beta[i].size(); ++k) {
      const double b = expansion.beta[i][k];
      w.push_back(b == 0.0 ? 0.0
                           : std::sqrt(spec.gamma_mother(static_cast<int>(i), static_cast<int>(k))) *
                                 b * v.mother[i][k]);
    }
  }
  return w;
}

double sharp_sum(const std::vector<double>& weights, const SharpSample& s) {
  double acc = 0.0;
  std::size_t n = 0;
  for (double h : s.hat_alpha) acc += weights[n++] * h;
  for (const auto& row : s.hat_beta) {
    for (double h : row) acc += weights[n++] * h;
  }
  return acc;
}

void check_sample_shape(const WaveletExpansion& e, const SharpSample& s) {
  bool ok = s.hat_alpha.size() == e.alpha.size() && s.hat_beta.size() == e.beta.size();
  for (std::size_t i = 0; ok && i < e.beta.size(); ++i) ok = s.hat_beta[i].size() == e.beta[i].size();
  if (!ok) throw std::invalid_argument("sharp sample draws do not cover the expansion indices");
}

}  // namespace

double sharp_field(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                   const ErrorStructureSpec& spec, const SharpSample& sample, double tau, double x) {
  spec.validate();
  check_sample_shape(expansion, sample);
  const auto v = diffusionlet_values(cache, expansion, tau, x);
  return sharp_sum(sharp_weights(expansion, spec, v), sample);
}

McEstimate sharp_second_moment(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                               const ErrorStructureSpec& spec, double tau, double x,
                               long long n_draws, std::uint64_t seed, unsigned threads) {
  spec.validate();
  if (n_draws < 1) throw std::invalid_argument("n_draws must be >= 1");
  const auto weights = sharp_weights(expansion, spec, diffusionlet_values(cache, expansion, tau, x));
  std::vector<double> squares(static_cast<std::size_t>(n_draws));
  parallel_for(n_draws, threads, [&](long long b, long long e) {
    for (long long d = b; d < e; ++d) {
      const double v = sharp_sum(weights, draw_sharp_sample(expansion, derive_seed(seed, static_cast<std::uint64_t>(d))));
      squares[static_cast<std::size_t>(d)] = v * v;
    }
  });
  return summarize(squares.data(), n_draws, seed);
}

std::vector<McEstimate> perturb_and_solve_mc(const WaveletExpansion& expansion,
                                             const ErrorStructureSpec& spec,
                                             const WaveletBasis& basis, double lambda,
                                             double sigma, double tau,
                                             const std::vector<double>& probes,
                                             const PerturbationParams& params) {
  spec.validate();
  expansion.validate();
  if (!(params.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (params.n_samples < 2) throw std::invalid_argument("n_samples must be >= 2");
  if (params.refine_levels < expansion.levels) {
    throw std::invalid_argument("refine_levels must be >= expansion levels");
  }
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");

  const double h = std::ldexp(1.0, -params.refine_levels);
  const std::size_t n_window = static_cast<std::size_t>(expansion.cells) << params.refine_levels;
  const double first = expansion.x_lo + basis.father_mean * h;

  // Zero-padded grid through the window's sample points.
  std::size_t pad_lo = 0, pad_hi = 0;
  if (tau > 0.0) {
    const auto [lo, hi] = support_extent(lambda, sigma, expansion.x_lo, expansion.x_hi(), tau);
    pad_lo = static_cast<std::size_t>(std::ceil((first - lo) / h));
    if (lambda > 0.0) pad_lo = std::min(pad_lo, static_cast<std::size_t>(std::floor(first / h)));
    pad_hi = static_cast<std::size_t>(std::ceil((hi - expansion.x_hi()) / h)) + 1;
  }
  const std::size_t nx = pad_lo + n_window + pad_hi;
  PdeSpec pde;
  pde.lambda = lambda;
  pde.sigma = sigma;
  pde.x_lo = first - static_cast<double>(pad_lo) * h;
  pde.x_hi = pde.x_lo + static_cast<double>(nx - 1) * h;
  pde.horizon = tau > 0.0 ? tau : 1.0;
  if (tau > 0.0) pde.validate();

  std::vector<double> nodes(static_cast<std::size_t>(params.nt) + 1);
  for (std::size_t j = 0; j < nodes.size(); ++j) nodes[j] = tau * static_cast<double>(j) / params.nt;
  const std::vector<std::size_t> keep{nodes.size() - 1};

  std::vector<double> gamma_root_alpha(expansion.alpha.size());
  for (std::size_t k = 0; k < gamma_root_alpha.size(); ++k) {
    gamma_root_alpha[k] = std::sqrt(params.epsilon * spec.gamma_father(static_cast<int>(k)));
  }
  std::vector<std::vector<double>> gamma_root_beta;
  for (std::size_t i = 0; i < expansion.beta.size(); ++i) {
    auto& row = gamma_root_beta.emplace_back(expansion.beta[i].size());
    for (std::size_t k = 0; k < row.size(); ++k) {
      row[k] = std::sqrt(params.epsilon * spec.gamma_mother(static_cast<int>(i), static_cast<int>(k)));
    }
  }

  const std::size_t n_probe = probes.size();
  std::vector<double> squares(n_probe * static_cast<std::size_t>(params.n_samples));
  parallel_for(params.n_samples, params.threads, [&](long long b, long long e) {
    WaveletExpansion delta = expansion;
    std::vector<double> terminal(nx, 0.0);
    for (long long s = b; s < e; ++s) {
      // Perturbed minus unperturbed coefficients; the map is linear.
      NormalStream rng(derive_seed(params.seed, static_cast<std::uint64_t>(s)));
      for (std::size_t k = 0; k < delta.alpha.size(); ++k) {
        delta.alpha[k] = expansion.alpha[k] * gamma_root_alpha[k] * rng.normal();
      }
      for (std::size_t i = 0; i < delta.beta.size(); ++i) {
        for (std::size_t k = 0; k < delta.beta[i].size(); ++k) {
          delta.beta[i][k] = expansion.beta[i][k] * gamma_root_beta[i][k] * rng.normal();
        }
      }
      const auto window = fwt_reconstruct(delta, basis.filter, n_window);
      std::copy(window.begin(), window.end(), terminal.begin() + static_cast<std::ptrdiff_t>(pad_lo));
      double* out = squares.data() + static_cast<std::size_t>(s) * n_probe;
      if (tau == 0.0) {
        const SampledFunction f{pde.x_lo, h, terminal};
        for (std::size_t q = 0; q < n_probe; ++q) out[q] = f(probes[q]);
      } else {
        const auto sol = march(pde, terminal, nodes, 0.5, keep);
        const SampledFunction f{pde.x_lo, h, sol.values};
        for (std::size_t q = 0; q < n_probe; ++q) out[q] = f(probes[q]);
      }
      for (std::size_t q = 0; q < n_probe; ++q) out[q] = out[q] * out[q] / params.epsilon;
    }
  });

  std::vector<McEstimate> estimates;
  std::vector<double> column(static_cast<std::size_t>(params.n_samples));
  for (std::size_t q = 0; q < n_probe; ++q) {
    for (std::size_t s = 0; s < column.size(); ++s) column[s] = squares[s * n_probe + q];
    estimates.push_back(summarize(column.data(), params.n_samples, params.seed));
  }
  return estimates;
}

namespace {

struct Derivatives {
  double d1;
  double d2;
};

Derivatives central_differences(const SampledFunction& u, double x) {
  const double h = u.dx;
  if (u.values.size() < 5 || x - 2 * h < u.x0 - 1e-12 * h || x + 2 * h > u.x_end() + 1e-12 * h) {
    throw std::out_of_range("finite-difference stencil at x = " + std::to_string(x) +
                            " leaves the sampled range");
  }
  const double m2 = u(x - 2 * h), m1 = u(x - h), c = u(x), p1 = u(x + h), p2 = u(x + 2 * h);
  return {(m2 - 8 * m1 + 8 * p1 - p2) / (12 * h),
          (-m2 + 16 * m1 - 30 * c + 16 * p1 - p2) / (12 * h * h)};
}

}  // namespace

double ou_gamma(const SampledFunction& u, double x) {
  const double d1 = central_differences(u, x).d1;
  return d1 * d1;
}

double ou_generator(const SampledFunction& u, double x) {
  const auto d = central_differences(u, x);
  return 0.5 * d.d2 - 0.5 * x * d.d1;
}

}  // namespace dlet
