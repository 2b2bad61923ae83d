#include "dlet/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>

#include "dlet/diffusionlets.hpp"
#include "dlet/error_structure.hpp"
#include "dlet/feynman_kac.hpp"
#include "dlet/pde_solver.hpp"
#include "dlet/rng.hpp"
#include "dlet/wavelets.hpp"

namespace dlet {

bool Check::passed() const {
  switch (comparison) {
    case Comparison::at_most: return measured <= tolerance;
    case Comparison::at_least: return measured >= tolerance;
    case Comparison::informational: return true;
  }
  return false;
}

std::string Check::status() const {
  if (comparison == Comparison::informational) return "informational";
  return passed() ? "pass" : "fail";
}

bool SuiteReport::passed() const {
  if (time_limit_s > 0.0 && runtime_s > time_limit_s) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
}

nlohmann::json SuiteReport::to_json(bool include_timing) const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j{{"name", c.name}, {"measured", c.measured}, {"status", c.status()}};
    if (c.comparison != Comparison::informational) {
      j["tolerance"] = c.tolerance;
      j["comparison"] = c.comparison == Comparison::at_most ? "<=" : ">=";
    }
    cs.push_back(std::move(j));
  }
  nlohmann::json out{{"suite", name}, {"status", passed() ? "pass" : "fail"}, {"checks", cs},
                     {"time_limit_s", time_limit_s}};
  if (include_timing) out["runtime_s"] = runtime_s;
  return out;
}

namespace {

using Fn = std::function<double(double)>;

double gaussian_bump(double x) { return std::exp(-0.5 * (x - 8.0) * (x - 8.0)); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double black_scholes_call(double x, double strike, double sigma, double tau) {
  const double s = sigma * std::sqrt(tau);
  const double d1 = (std::log(x / strike) + 0.5 * s * s) / s;
  return x * normal_cdf(d1) - strike * normal_cdf(d1 - s);
}

Check at_most(std::string name, double measured, double tol) {
  return {std::move(name), measured, tol, Comparison::at_most};
}
Check at_least(std::string name, double measured, double tol) {
  return {std::move(name), measured, tol, Comparison::at_least};
}
Check info(std::string name, double measured) {
  return {std::move(name), measured, 0.0, Comparison::informational};
}

std::string num(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

// --- suites -----------------------------------------------------------------

void filters(SuiteReport& r, const SuiteOptions&) {
  for (int p : {1, 2, 3, 4, 6, 8, 10}) {
    const auto res = filter_residuals(daubechies_filter(p));
    r.checks.push_back(at_most("p=" + std::to_string(p) + " sum", res.sum, 1e-10));
    r.checks.push_back(at_most("p=" + std::to_string(p) + " orthonormality", res.orthonormality, 1e-10));
    r.checks.push_back(at_most("p=" + std::to_string(p) + " vanishing moments", res.vanishing_moments, 1e-10));
  }
}

void reconstruction(SuiteReport& r, const SuiteOptions& o) {
  const auto filter = daubechies_filter(4);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    NormalStream rng(derive_seed(o.seed, s));
    std::vector<double> signal(1024);
    for (double& v : signal) v = rng.normal();
    const auto e = fwt_decompose(signal, filter, 4);
    const auto back = fwt_reconstruct(e, filter, signal.size());
    double diff = 0.0, norm = 0.0;
    for (std::size_t n = 0; n < signal.size(); ++n) {
      diff += (back[n] - signal[n]) * (back[n] - signal[n]);
      norm += signal[n] * signal[n];
    }
    worst = std::max(worst, std::sqrt(diff / norm));
  }
  r.checks.push_back(at_most("max relative L2 round-trip error, 100 signals", worst, 1e-10));
}

void heat_oracle(SuiteReport& r, const SuiteOptions&) {
  const GridParams params{1025, 512, 0.5};
  const Fn bump = gaussian_bump;
  for (double tau : {0.1, 0.5, 1.0}) {
    const auto sol = solve_discounted(0.0, 1.0, bump, -4.0, 20.0, tau, params);
    const auto row = sol.row(sol.nt() - 1);
    double diff = 0.0, peak = 0.0;
    for (std::size_t j = 0; j < sol.nx(); ++j) {
      const double exact = closed_form_heat(1.0, bump, tau, sol.x[j]);
      if (std::abs(exact) <= 1e-6) continue;
      diff = std::max(diff, std::abs(row[j] - exact));
      peak = std::max(peak, std::abs(exact));
    }
    r.checks.push_back(at_most("tau=" + num(tau) + " relative Linf vs Gaussian convolution", diff / peak, 1e-3));
  }
}

struct BumpCase {
  WaveletBasis basis = make_basis(4);
  WaveletExpansion expansion = decompose_function(gaussian_bump, basis, 4, 16, 0.0);
};

void diffusionlet(SuiteReport& r, const SuiteOptions&) {
  const BumpCase c;
  const double tau = 0.25;
  const auto fast = build_cache(0.0, 1.0, c.basis, 16.0);
  const auto exact = build_cache(0.0, 1.0, c.basis, 16.0, {}, CacheMode::exact,
                                 ExactRange::covering(c.expansion, {tau}));
  const Fn bump = gaussian_bump;
  const auto direct = solve_discounted(0.0, 1.0, bump, -8.0, 24.0, tau, GridParams{1025, 512, 0.5});

  double d_heat = 0.0, d_direct = 0.0, d_modes = 0.0, peak = 0.0, d_terminal = 0.0;
  for (double x = 2.0; x <= 14.0; x += 1.0 / 32) {
    const double v = reconstruct(fast, c.expansion, tau, x);
    const double heat = closed_form_heat(1.0, bump, tau, x);
    peak = std::max(peak, std::abs(heat));
    d_heat = std::max(d_heat, std::abs(v - heat));
    d_direct = std::max(d_direct, std::abs(v - direct.interpolate(tau, x)));
    d_modes = std::max(d_modes, std::abs(v - reconstruct(exact, c.expansion, tau, x)));
    d_terminal = std::max(d_terminal, std::abs(reconstruct(fast, c.expansion, 0.0, x) -
                                               evaluate_expansion(c.expansion, c.basis, x)));
  }
  r.checks.push_back(at_most("fast reconstruct vs Gaussian convolution, relative Linf", d_heat / peak, 5e-3));
  r.checks.push_back(at_most("fast reconstruct vs direct solve, relative Linf", d_direct / peak, 5e-3));
  r.checks.push_back(at_most("fast vs exact mode, relative Linf", d_modes / peak, 1e-5));
  r.checks.push_back(at_most("tau=0 reconstruct vs evaluate_expansion", d_terminal, 1e-6));
}

void self_similarity(SuiteReport& r, const SuiteOptions&) {
  const auto basis = make_basis(4);
  const Fn phi = [&](double x) { return basis.father(x); };
  struct Case {
    double lambda, sigma, lo, hi;
  };
  const double tau = 0.25;
  for (const Case& k : {Case{0.0, 1.0, -8.0, 16.0}, Case{0.5, 0.5, 0.0, 16.0}, Case{1.0, 0.2, 0.0, 24.0}}) {
    const auto base = solve_discounted(k.lambda, k.sigma, phi, k.lo, k.hi, tau, GridParams{2049, 512, 0.5});
    for (double alpha : {2.0, 4.0}) {
      const Fn g = [&](double x) { return basis.father(alpha * x); };
      const double t = tau / std::pow(alpha, 2.0 - 2.0 * k.lambda);
      const auto d = solve_discounted(k.lambda, k.sigma, g, k.lo / alpha, k.hi / alpha, t, GridParams{1025, 512, 0.5});
      const auto row = d.row(d.nt() - 1);
      std::vector<double> rescaled(d.nx());
      for (std::size_t j = 0; j < d.nx(); ++j) rescaled[j] = base.interpolate(tau, alpha * d.x[j]);
      r.checks.push_back(at_most("lambda=" + num(k.lambda) + " alpha=" + num(alpha) + " relative Linf",
                                 relative_linf(rescaled, row), 2e-3));
    }
  }
}

void refinement(SuiteReport& r, const SuiteOptions&) {
  const auto basis = make_basis(4);
  const auto heat = build_cache(0.0, 1.0, basis, 1.0);
  for (double tau : {0.0, 0.25}) {
    r.checks.push_back(at_most("lambda=0 tau=" + num(tau) + " father residual",
                               refinement_residual(heat, tau).father, 2e-3));
    r.checks.push_back(at_most("lambda=0 tau=" + num(tau) + " mother residual",
                               refinement_residual(heat, tau).mother, 2e-3));
  }
  const auto half = build_cache(0.5, 0.5, basis, 0.5);
  const auto lognormal = build_cache(1.0, 0.2, basis, 0.25);
  r.checks.push_back(info("lambda=0.5 tau=0.25 father residual", refinement_residual(half, 0.25).father));
  r.checks.push_back(info("lambda=0.5 tau=0.25 mother residual", refinement_residual(half, 0.25).mother));
  r.checks.push_back(info("lambda=1 tau=0.25 father residual", refinement_residual(lognormal, 0.25).father));
  r.checks.push_back(info("lambda=1 tau=0.25 mother residual", refinement_residual(lognormal, 0.25).mother));
}

void translation(SuiteReport& r, const SuiteOptions&) {
  const auto basis = make_basis(4);
  r.checks.push_back(at_most("lambda=0 k=2 tau=0.25", translation_discrepancy(0.0, 1.0, basis, 2, 0.25), 2e-3));
  r.checks.push_back(at_most("lambda=0 k=0", translation_discrepancy(0.0, 1.0, basis, 0, 0.25), 0.0));
  r.checks.push_back(info("lambda=0.5 sigma=0.5 k=2 tau=0.25", translation_discrepancy(0.5, 0.5, basis, 2, 0.25)));
  r.checks.push_back(info("lambda=1 sigma=0.2 k=1 tau=0.25", translation_discrepancy(1.0, 0.2, basis, 1, 0.25)));
}

void cev(SuiteReport& r, const SuiteOptions& o) {
  const double sigma = 0.2, x0 = 1.0, tau = 1.0;
  const Fn call = [](double x) { return std::max(x - 1.0, 0.0); };
  const auto pde = solve_discounted(1.0, sigma, call, 0.0, 4.0, tau, GridParams{1025, 512, 0.5});
  const double value = pde.interpolate(tau, x0);
  const auto mc = mc_expectation(SdeSpec::cev(0.0, sigma, 1.0), call, x0, tau, 100000, 512, o.seed, o.threads);
  r.checks.push_back(at_most("lambda=1 call: |PDE - MC| / standard error", std::abs(value - mc.mean) / mc.std_error, 3.0));
  r.checks.push_back(at_most("lambda=1 call: |PDE - Black-Scholes|", std::abs(value - black_scholes_call(x0, 1.0, sigma, tau)), 1e-3));

  PdeSpec spec;
  spec.lambda = 1.0;
  spec.sigma = sigma;
  spec.x_lo = 0.0;
  spec.x_hi = 4.0;
  spec.horizon = tau;
  const GridParams coarse{513, 256, 0.5};
  r.checks.push_back(at_most("consistency gap, r=0", consistency_gap(spec, call, coarse), 1e-12));
  spec.r = 0.05;
  r.checks.push_back(info("consistency gap, lambda=1 r=0.05", consistency_gap(spec, call, coarse)));
  spec.lambda = 0.5;
  r.checks.push_back(info("consistency gap, lambda=0.5 r=0.05", consistency_gap(spec, call, coarse)));
}

void cir(SuiteReport& r, const SuiteOptions& o) {
  const double b = 0.5, sigma = 0.3, x0 = 1.0, tau = 1.0;
  PdeSpec spec;
  spec.drift = [b](double, double x) { return -b * x; };
  spec.diffusion = [sigma](double, double x) { return sigma * std::sqrt(std::max(x, 0.0)); };
  spec.x_lo = 0.0;
  spec.x_hi = 8.0;
  spec.horizon = tau;
  const Fn linear = [](double x) { return x; };
  const auto pde = solve_backward(spec, linear, GridParams{1025, 512, 0.5});
  const double value = pde.interpolate(tau, x0);
  const auto mc = mc_expectation(cir_preset(b, sigma), linear, x0, tau, 100000, 512, o.seed + 1, o.threads);
  r.checks.push_back(at_most("linear payoff: |PDE - MC| / standard error", std::abs(value - mc.mean) / mc.std_error, 3.0));
  r.checks.push_back(at_most("linear payoff: |MC - x e^{-b tau}| / standard error",
                             std::abs(mc.mean - x0 * std::exp(-b * tau)) / mc.std_error, 3.0));
  r.checks.push_back(at_most("linear payoff: |PDE - x e^{-b tau}|", std::abs(value - x0 * std::exp(-b * tau)), 1e-4));
}

const std::vector<double> kProbes{5.0, 7.0, 8.0, 9.5, 11.0};

void variance_mc(SuiteReport& r, const SuiteOptions& o) {
  const BumpCase c;
  const ErrorStructureSpec spec;
  const double tau = 0.25;
  const auto cache = build_cache(0.0, 1.0, c.basis, 16.0);

  PerturbationParams terminal;
  terminal.seed = o.seed;
  terminal.n_samples = 100000;
  terminal.threads = o.threads;
  const auto at_zero = perturb_and_solve_mc(c.expansion, spec, c.basis, 0.0, 1.0, 0.0, kProbes, terminal);
  for (std::size_t q = 0; q < kProbes.size(); ++q) {
    const double g = gamma_terminal(c.expansion, spec, c.basis, kProbes[q]);
    r.checks.push_back(at_most("terminal x=" + num(kProbes[q]) + " relative error", std::abs(at_zero[q].mean / g - 1.0), 0.05));
  }

  PerturbationParams solve;
  solve.seed = o.seed + 1;
  solve.n_samples = 10000;
  solve.threads = o.threads;
  const auto at_tau = perturb_and_solve_mc(c.expansion, spec, c.basis, 0.0, 1.0, tau, kProbes, solve);
  for (std::size_t q = 0; q < kProbes.size(); ++q) {
    const double g = gamma_solution(cache, c.expansion, spec, tau, kProbes[q]);
    r.checks.push_back(at_most("tau=0.25 x=" + num(kProbes[q]) + " relative error", std::abs(at_tau[q].mean / g - 1.0), 0.05));
  }

  PerturbationParams small = terminal;
  small.n_samples = 10000;
  const auto e4 = perturb_and_solve_mc(c.expansion, spec, c.basis, 0.0, 1.0, 0.0, {8.0}, small);
  small.epsilon = 1e-5;
  small.seed = o.seed + 2;
  const auto e5 = perturb_and_solve_mc(c.expansion, spec, c.basis, 0.0, 1.0, 0.0, {8.0}, small);
  const double combined = std::hypot(e4[0].std_error, e5[0].std_error);
  r.checks.push_back(at_most("epsilon 1e-4 vs 1e-5 at x=8, in combined standard errors",
                             std::abs(e4[0].mean - e5[0].mean) / combined, 3.0));
}

void sharp(SuiteReport& r, const SuiteOptions& o) {
  const BumpCase c;
  const ErrorStructureSpec spec;
  const double tau = 0.25;
  const auto cache = build_cache(0.0, 1.0, c.basis, 16.0);
  for (std::size_t q = 0; q < kProbes.size(); ++q) {
    const auto m = sharp_second_moment(cache, c.expansion, spec, tau, kProbes[q], 100000, o.seed + q, o.threads);
    const double g = gamma_solution(cache, c.expansion, spec, tau, kProbes[q]);
    r.checks.push_back(at_most("x=" + num(kProbes[q]) + " |mean(sharp^2) - Gamma| / standard error",
                               std::abs(m.mean - g) / m.std_error, 3.0));
  }
}

void covariance(SuiteReport& r, const SuiteOptions& o) {
  const auto basis = make_basis(4);
  const auto cache = build_cache(0.0, 1.0, basis, 16.0);
  NormalStream rng(derive_seed(o.seed, 9));
  auto e = WaveletExpansion::zeros(4, 3, 16, 0.0);
  for (double& a : e.alpha) a = rng.normal();
  for (auto& row : e.beta) {
    for (double& b : row) b = rng.normal();
  }
  ErrorStructureSpec spec;
  spec.eta = 0.5;

  double diagonal = 0.0, symmetry = 0.0, schwarz = -1e300;
  for (int n = 0; n < 50; ++n) {
    const SpacetimePoint p{0.25 * rng.uniform(), 16.0 * rng.uniform()};
    const SpacetimePoint q{0.25 * rng.uniform(), 16.0 * rng.uniform()};
    const double vp = gamma_solution(cache, e, spec, p.tau, p.x);
    const double vq = gamma_solution(cache, e, spec, q.tau, q.x);
    const double pq = covariance_solution(cache, e, spec, p, q);
    const double qp = covariance_solution(cache, e, spec, q, p);
    diagonal = std::max(diagonal, std::abs(covariance_solution(cache, e, spec, p, p) - vp));
    symmetry = std::max(symmetry, std::abs(pq - qp));
    schwarz = std::max(schwarz, pq * pq - vp * vq);
  }
  r.checks.push_back(at_most("diagonal |cov(P,P) - Gamma(P)|", diagonal, 0.0));
  r.checks.push_back(at_most("symmetry |cov(P,Q) - cov(Q,P)|", symmetry, 0.0));
  r.checks.push_back(at_most("max cov^2 - var(P) var(Q), 50 pairs", schwarz, 1e-12));
}

void truncation(SuiteReport& r, const SuiteOptions&) {
  const BumpCase c;
  const double tau = 0.25, eps = 1e-3;
  const auto cache = build_cache(0.0, 1.0, c.basis, 64.0);
  std::size_t full_terms = 0, kept_terms = 0;
  double error = 0.0;
  for (double x = 0.0; x < 16.0; x += 0.125) {
    for_each_term(c.expansion, x, [&](const ExpansionTerm&) { ++full_terms; });
    const auto t = truncated_reconstruct(cache, c.expansion, eps, tau, x);
    kept_terms += t.terms_used;
    error = std::max(error, std::abs(t.value - reconstruct(cache, c.expansion, tau, x)));
  }
  r.checks.push_back(at_least("term reduction factor", static_cast<double>(full_terms) / static_cast<double>(kept_terms), 4.0));
  r.checks.push_back(at_most("max added error", error, 1e-2));

  int increases = 0, previous = 1 << 30;
  for (double t : {0.1, 0.25, 0.5, 1.0}) {
    const auto es = essential_support(cache, 1e-4, t);
    r.checks.push_back(info("I(1e-4) at tau=" + num(t), es.max_level));
    if (!es.level_bound_found) ++increases;
    if (es.max_level > previous) ++increases;
    previous = es.max_level;
  }
  r.checks.push_back(at_most("increases of I(eps) in tau (or unbounded levels)", increases, 0.0));
}

void ou(SuiteReport& r, const SuiteOptions&) {
  const double h = 1e-2;
  auto sample = [&](const Fn& f) {
    SampledFunction s{-4.0, h, std::vector<double>(801)};
    for (std::size_t n = 0; n < s.values.size(); ++n) s.values[n] = f(s.x_at(n));
    return s;
  };
  const Fn u = [](double x) { return std::exp(-0.25 * x * x) + 0.3 * x; };
  const auto us = sample(u);
  struct Outer {
    std::string name;
    Fn f, d1, d2;
  };
  const std::vector<Outer> outers{
      {"F(y)=y^2", [](double y) { return y * y; }, [](double y) { return 2 * y; }, [](double) { return 2.0; }},
      {"F(y)=sin y", [](double y) { return std::sin(y); }, [](double y) { return std::cos(y); },
       [](double y) { return -std::sin(y); }}};
  for (const auto& F : outers) {
    const auto fu = sample([&](double x) { return F.f(u(x)); });
    double gamma_err = 0.0, generator_err = 0.0;
    for (std::size_t n = 100; n <= 700; n += 5) {
      const double x = us.x_at(n);
      const double y = us.values[n];
      const double g = ou_gamma(us, x);
      gamma_err = std::max(gamma_err, std::abs(ou_gamma(fu, x) - F.d1(y) * F.d1(y) * g));
      generator_err = std::max(generator_err, std::abs(ou_generator(fu, x) - (F.d1(y) * ou_generator(us, x) + 0.5 * F.d2(y) * g)));
    }
    r.checks.push_back(at_most(F.name + " Gamma chain rule", gamma_err, 1e-6));
    r.checks.push_back(at_most(F.name + " generator chain rule", generator_err, 1e-6));
  }
  const auto identity = sample([](double x) { return x; });
  double id_err = 0.0;
  for (double x : {-1.0, 0.0, 0.5, 2.0}) {
    id_err = std::max({id_err, std::abs(ou_gamma(identity, x) - 1.0), std::abs(ou_generator(identity, x) + 0.5 * x)});
  }
  r.checks.push_back(at_most("u(x)=x: Gamma=1, A=-x/2", id_err, 1e-9));
}

struct Suite {
  void (*run)(SuiteReport&, const SuiteOptions&);
  double limit_s;
};

const std::map<std::string, Suite>& registry() {
  static const std::map<std::string, Suite> suites{
      {"filters", {filters, 1.0}},           {"reconstruction", {reconstruction, 5.0}},
      {"heat_oracle", {heat_oracle, 30.0}},  {"diffusionlet", {diffusionlet, 60.0}},
      {"self_similarity", {self_similarity, 60.0}}, {"refinement", {refinement, 30.0}},
      {"translation", {translation, 30.0}},  {"cev", {cev, 60.0}},
      {"cir", {cir, 60.0}},                  {"variance_mc", {variance_mc, 300.0}},
      {"sharp", {sharp, 300.0}},             {"covariance", {covariance, 10.0}},
      {"truncation", {truncation, 60.0}},    {"ou", {ou, 1.0}},
  };
  return suites;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{
      "filters",    "reconstruction", "heat_oracle", "diffusionlet", "self_similarity",
      "refinement", "translation",    "cev",         "cir",          "variance_mc",
      "sharp",      "covariance",     "truncation",  "ou"};
  return names;
}

SuiteReport run_suite(const std::string& name, const SuiteOptions& options) {
  const auto it = registry().find(name);
  if (it == registry().end()) {
    std::string known;
    for (const auto& n : suite_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown suite '" + name + "' (known: " + known + ")");
  }
  SuiteReport report;
  report.name = name;
  report.time_limit_s = it->second.limit_s;
  const auto start = std::chrono::steady_clock::now();
  it->second.run(report, options);
  report.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace dlet
