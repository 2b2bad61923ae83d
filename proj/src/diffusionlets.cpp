#include "dlet/diffusionlets.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "dlet/parallel.hpp"

namespace dlet {
namespace {

double spread(double sigma, double tau_max) { return 6.0 * sigma * std::sqrt(tau_max); }

}  // namespace

std::pair<double, double> support_extent(double lambda, double sigma, double s_lo, double s_hi,
                                         double tau_max) {
  const double m = spread(sigma, tau_max);
  if (lambda == 0.0) return {std::floor(s_lo - m), std::ceil(s_hi + m)};
  double x = std::max(s_hi, 1.0);
  for (int it = 0; it < 1000; ++it) {
    const double next = s_hi + m * std::pow(x, lambda);
    if (!std::isfinite(next) || next > 1e7) break;
    if (std::abs(next - x) < 1e-9) return {0.0, std::ceil(next)};
    x = next;
  }
  throw std::invalid_argument(
      "no finite grid covers the support growth for lambda = " + std::to_string(lambda) +
      ", sigma = " + std::to_string(sigma) + ", tau_max = " + std::to_string(tau_max) +
      " (margin 6 sigma sqrt(tau_max) x^lambda exceeds x); reduce sigma or tau_max");
}

namespace {

std::vector<double> geometric_nodes(double tau_min, double tau_max, int count) {
  if (!(tau_max > 0.0)) throw std::invalid_argument("cache horizon must be positive");
  if (count < 2) throw std::invalid_argument("cache needs at least two time nodes");
  const double first = std::min(tau_min, tau_max / count);
  if (!(first > 0.0)) throw std::invalid_argument("tau_min must be positive");
  std::vector<double> nodes{0.0};
  const double ratio = std::pow(tau_max / first, 1.0 / (count - 1));
  double t = first;
  for (int j = 0; j < count; ++j, t *= ratio) nodes.push_back(t);
  nodes.back() = tau_max;
  return nodes;
}

// Value of a stored surface, using the exact terminal function on row 0.
template <class Terminal>
double surface_value(const GridSolution& s, Terminal&& terminal, double tau, double x) {
  if (tau <= 0.0) return terminal(x);
  auto it = std::upper_bound(s.tau.begin(), s.tau.end(), tau);
  if (it == s.tau.end()) {
    if (tau > s.tau.back()) throw std::out_of_range("tau beyond stored surface");
    return s.interpolate_row(s.tau.size() - 1, x);
  }
  const auto hi = static_cast<std::size_t>(it - s.tau.begin());
  const std::size_t lo = hi - 1;
  const double a = lo == 0 ? terminal(x) : s.interpolate_row(lo, x);
  const double w = (tau - s.tau[lo]) / (s.tau[hi] - s.tau[lo]);
  if (w == 0.0) return a;
  return a + w * (s.interpolate_row(hi, x) - a);
}

// Surface values at every grid node at time tau.
std::vector<double> surface_nodes(const GridSolution& s, const DyadicFunction& terminal, double tau) {
  std::vector<double> out(s.nx());
  for (std::size_t j = 0; j < s.nx(); ++j) {
    out[j] = surface_value(s, terminal, tau, s.x[j]);
  }
  return out;
}

Interval exceedance(const std::vector<double>& values, const std::vector<double>& x, double eps) {
  Interval iv;
  std::size_t first = values.size(), last = 0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (std::abs(values[j]) > eps) {
      first = std::min(first, j);
      last = j;
    }
  }
  if (first == values.size()) return iv;
  iv.empty = false;
  iv.lo = x[first == 0 ? 0 : first - 1];
  iv.hi = x[std::min(last + 1, x.size() - 1)];
  return iv;
}

Interval hull(const Interval& a, const Interval& b) {
  if (a.empty) return b;
  if (b.empty) return a;
  return Interval{std::min(a.lo, b.lo), std::max(a.hi, b.hi), false};
}

bool is_aligned(double v, int resolution) {
  const double scaled = std::ldexp(v, resolution);
  return std::floor(scaled) == scaled;
}

PdeSpec drift_free(double lambda, double sigma, double x_lo, double x_hi, double horizon) {
  PdeSpec spec;
  spec.lambda = lambda;
  spec.sigma = sigma;
  spec.r = 0.0;
  spec.x_lo = x_lo;
  spec.x_hi = x_hi;
  spec.horizon = horizon;
  return spec;
}

std::size_t node_count(double lo, double hi, double dx) {
  return static_cast<std::size_t>(std::llround((hi - lo) / dx)) + 1;
}

}  // namespace

std::string to_string(CacheMode mode) { return mode == CacheMode::fast ? "fast" : "exact"; }

CacheMode parse_cache_mode(const std::string& text) {
  if (text == "fast") return CacheMode::fast;
  if (text == "exact") return CacheMode::exact;
  throw std::invalid_argument("unknown cache mode '" + text + "' (expected fast or exact)");
}

ExactRange ExactRange::covering(const WaveletExpansion& expansion, std::vector<double> taus) {
  if (std::floor(expansion.x_lo) != expansion.x_lo) {
    throw std::invalid_argument("diffusionlet reconstruction needs an integer window start");
  }
  ExactRange r;
  r.taus = std::move(taus);
  const int x0 = static_cast<int>(expansion.x_lo);
  const int span = 2 * expansion.order - 1;
  // Periodic copies reach down to index -(span - 1).
  r.father_k_min = x0 - (span - 1);
  r.father_k_max = x0 + expansion.cells - 1;
  for (int i = 0; i < expansion.levels; ++i) {
    const int base = x0 * (1 << i);
    r.mother_k.emplace_back(base - (span - 1), base + (expansion.cells << i) - 1);
  }
  return r;
}

double DiffusionletCache::time_scale(int level) const {
  return std::pow(2.0, (2.0 - 2.0 * lambda) * level);
}

std::pair<double, double> required_extent(double lambda, double sigma, int order, double tau_max) {
  return support_extent(lambda, sigma, 0.0, 2.0 * order - 1.0, tau_max);
}

DiffusionletCache build_cache(double lambda, double sigma, const WaveletBasis& basis,
                              double tau_max, const CacheGrid& grid, CacheMode mode,
                              const ExactRange& exact) {
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (grid.resolution < 1 || grid.resolution > basis.father.resolution()) {
    throw std::invalid_argument("cache resolution must lie in [1, basis resolution = " +
                                std::to_string(basis.father.resolution()) + "]");
  }
  const auto [need_lo, need_hi] = required_extent(lambda, sigma, basis.order(), tau_max);
  double x_lo = grid.x_lo.value_or(need_lo);
  double x_hi = grid.x_hi.value_or(need_hi);
  if (lambda > 0.0 && x_lo < 0.0) throw std::invalid_argument("lambda > 0 requires x_lo >= 0");
  if (x_lo > need_lo || x_hi < need_hi) {
    throw std::invalid_argument("cache grid [" + std::to_string(x_lo) + ", " +
                                std::to_string(x_hi) + "] too small for support growth; required [" +
                                std::to_string(need_lo) + ", " + std::to_string(need_hi) + "]");
  }
  if (!is_aligned(x_lo, grid.resolution) || !is_aligned(x_hi, grid.resolution)) {
    throw std::invalid_argument("cache extent must be a multiple of 2^-resolution");
  }

  DiffusionletCache cache;
  cache.lambda = lambda;
  cache.sigma = sigma;
  cache.mode = mode;
  cache.grid = grid;
  cache.grid.x_lo = x_lo;
  cache.grid.x_hi = x_hi;
  cache.basis = basis;

  const auto nodes = geometric_nodes(grid.tau_min, tau_max, grid.tau_nodes);
  const PdeSpec spec = drift_free(lambda, sigma, x_lo, x_hi, tau_max);
  const double dx = std::ldexp(1.0, -grid.resolution);
  const auto x = space_grid(spec, static_cast<int>(node_count(x_lo, x_hi, dx)));
  std::vector<double> father(x.size()), mother(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    father[j] = basis.father(x[j]);
    mother[j] = basis.mother(x[j]);
  }
  cache.father_surface = march(spec, father, nodes, grid.theta);
  cache.mother_surface = march(spec, mother, nodes, grid.theta);

  if (mode == CacheMode::exact) {
    if (exact.taus.empty()) throw std::invalid_argument("exact mode needs at least one tau");
    const double tau_needed = *std::max_element(exact.taus.begin(), exact.taus.end());
    auto solve_term = [&](int level, int k) {
      const int l = std::max(level, 0);
      const double a = std::ldexp(1.0, l);
      const double c = cache.time_scale(l);
      const double step = dx / a;
      double lo = (x_lo + k) / a;
      double hi = (x_hi + k) / a;
      if (lambda > 0.0) {
        lo = std::max(lo, 0.0);
        hi = std::max(hi, lo + 4.0 * step);
      }
      const std::size_t nx = node_count(lo, hi, step);
      hi = lo + static_cast<double>(nx - 1) * step;

      std::vector<double> term_nodes;
      for (double t : nodes) {
        term_nodes.push_back(t / c);
        if (term_nodes.size() > 1 && term_nodes.back() >= tau_needed) break;
      }
      if (term_nodes.back() < tau_needed * (1.0 - 1e-12)) {
        throw std::invalid_argument("exact term (" + std::to_string(level) + ", " +
                                    std::to_string(k) + ") needs cache horizon >= " +
                                    std::to_string(tau_needed * c));
      }
      std::vector<std::size_t> keep{0};
      for (double tq : exact.taus) {
        auto it = std::lower_bound(term_nodes.begin(), term_nodes.end(), tq);
        const auto idx = static_cast<std::size_t>(it - term_nodes.begin());
        if (idx > 0) keep.push_back(idx - 1);
        if (idx < term_nodes.size()) keep.push_back(idx);
      }
      std::sort(keep.begin(), keep.end());
      keep.erase(std::unique(keep.begin(), keep.end()), keep.end());

      const PdeSpec term_spec = drift_free(lambda, sigma, lo, hi, term_nodes.back());
      const auto xs = space_grid(term_spec, static_cast<int>(nx));
      std::vector<double> terminal(nx);
      const double amp = level < 0 ? 1.0 : std::pow(2.0, 0.5 * level);
      for (std::size_t j = 0; j < nx; ++j) {
        terminal[j] = level < 0 ? basis.father(xs[j] - k) : amp * basis.mother(a * xs[j] - k);
      }
      return march(term_spec, terminal, term_nodes, grid.theta, keep);
    };
    std::vector<std::pair<int, int>> keys;
    for (int k = exact.father_k_min; k <= exact.father_k_max; ++k) keys.emplace_back(-1, k);
    for (std::size_t i = 0; i < exact.mother_k.size(); ++i) {
      for (int k = exact.mother_k[i].first; k <= exact.mother_k[i].second; ++k) {
        keys.emplace_back(static_cast<int>(i), k);
      }
    }
    std::vector<GridSolution> solved(keys.size());
    parallel_for(static_cast<long long>(keys.size()), 0, [&](long long b, long long e) {
      for (long long n = b; n < e; ++n) {
        const auto [level, k] = keys[static_cast<std::size_t>(n)];
        solved[static_cast<std::size_t>(n)] = solve_term(level, k);
      }
    });
    for (std::size_t n = 0; n < keys.size(); ++n) {
      cache.exact_surfaces.emplace(keys[n], std::move(solved[n]));
    }
  }
  return cache;
}

namespace {

const GridSolution& exact_surface(const DiffusionletCache& cache, int level, int k) {
  auto it = cache.exact_surfaces.find({level, k});
  if (it == cache.exact_surfaces.end()) {
    throw std::out_of_range("exact-mode cache has no solve for level " + std::to_string(level) +
                            ", k = " + std::to_string(k));
  }
  return it->second;
}

double fast_father(const DiffusionletCache& cache, double tau, double y) {
  if (tau > cache.tau_max() * (1.0 + 1e-12)) {
    throw std::out_of_range("father diffusionlet at tau = " + std::to_string(tau) +
                            " needs cache horizon >= " + std::to_string(tau));
  }
  return surface_value(cache.father_surface, cache.basis.father, std::min(tau, cache.tau_max()), y);
}

double fast_mother(const DiffusionletCache& cache, int level, double tau, double y) {
  const double scaled = cache.time_scale(level) * tau;
  if (scaled > cache.tau_max() * (1.0 + 1e-12)) {
    throw std::out_of_range("mother diffusionlet at level " + std::to_string(level) +
                            ", tau = " + std::to_string(tau) + " needs cache horizon >= " +
                            std::to_string(scaled) + " (have " + std::to_string(cache.tau_max()) +
                            ")");
  }
  return std::pow(2.0, 0.5 * level) *
         surface_value(cache.mother_surface, cache.basis.mother, std::min(scaled, cache.tau_max()), y);
}

double exact_father(const DiffusionletCache& cache, int k, double tau, double x) {
  const auto& s = exact_surface(cache, -1, k);
  return surface_value(s, [&](double v) { return cache.basis.father(v - k); }, tau, x);
}

double exact_mother(const DiffusionletCache& cache, int level, int k, double tau, double x) {
  const auto& s = exact_surface(cache, level, k);
  const double a = std::ldexp(1.0, level);
  const double amp = std::pow(2.0, 0.5 * level);
  return surface_value(s, [&](double v) { return amp * cache.basis.mother(a * v - k); }, tau, x);
}

}  // namespace

double eval_father(const DiffusionletCache& cache, int k, double tau, double x) {
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  if (cache.mode == CacheMode::exact) return exact_father(cache, k, tau, x);
  return fast_father(cache, tau, x - k);
}

double eval_mother(const DiffusionletCache& cache, int level, int k, double tau, double x) {
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  if (level < 0) throw std::invalid_argument("mother level must be nonnegative");
  if (cache.mode == CacheMode::exact) return exact_mother(cache, level, k, tau, x);
  return fast_mother(cache, level, tau, std::ldexp(x, level) - k);
}

namespace {

void check_compatible(const DiffusionletCache& cache, const WaveletExpansion& expansion) {
  if (expansion.order != cache.basis_order()) {
    throw std::invalid_argument("expansion order " + std::to_string(expansion.order) +
                                " does not match cache basis order " +
                                std::to_string(cache.basis_order()));
  }
  if (std::floor(expansion.x_lo) != expansion.x_lo) {
    throw std::invalid_argument("diffusionlet reconstruction needs an integer window start");
  }
}

double term_value_unchecked(const DiffusionletCache& cache, int x0, const ExpansionTerm& t,
                            double tau, double x) {
  const bool exact = cache.mode == CacheMode::exact;
  if (t.level < 0) {
    return exact ? exact_father(cache, x0 + t.shifted_k, tau, x) : fast_father(cache, tau, t.argument);
  }
  const int k = x0 * (1 << t.level) + t.shifted_k;
  return exact ? exact_mother(cache, t.level, k, tau, x) : fast_mother(cache, t.level, tau, t.argument);
}

}  // namespace

double term_value(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                  const ExpansionTerm& term, double tau, double x) {
  check_compatible(cache, expansion);
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  return term_value_unchecked(cache, static_cast<int>(expansion.x_lo), term, tau, x);
}

double reconstruct(const DiffusionletCache& cache, const WaveletExpansion& expansion, double tau,
                   double x) {
  check_compatible(cache, expansion);
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  const int x0 = static_cast<int>(expansion.x_lo);
  double acc = 0.0;
  for_each_term(expansion, x, [&](const ExpansionTerm& t) {
    if (t.coefficient != 0.0) acc += t.coefficient * term_value_unchecked(cache, x0, t, tau, x);
  });
  return acc;
}

EssentialSupport essential_support(const DiffusionletCache& cache, double epsilon, double tau,
                                   int max_levels) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (tau < 0.0 || tau > cache.tau_max()) throw std::out_of_range("tau outside cache horizon");
  EssentialSupport es;
  es.epsilon = epsilon;
  es.tau = tau;
  const auto& xs = cache.father_surface.x;
  const auto father = surface_nodes(cache.father_surface, cache.basis.father, tau);
  const auto mother = surface_nodes(cache.mother_surface, cache.basis.mother, tau);
  es.father_interval = exceedance(father, xs, epsilon);
  es.interval = hull(es.father_interval, exceedance(mother, xs, epsilon));
  es.father_k = static_cast<int>(std::ceil(es.father_interval.length()));

  for (int i = 0; i < max_levels; ++i) {
    const double scaled = cache.time_scale(i) * tau;
    if (scaled > cache.tau_max() * (1.0 + 1e-12)) break;
    auto level = surface_nodes(cache.mother_surface, cache.basis.mother,
                               std::min(scaled, cache.tau_max()));
    const double amp = std::pow(2.0, 0.5 * i);
    double peak = 0.0;
    for (double& v : level) {
      v *= amp;
      peak = std::max(peak, std::abs(v));
    }
    es.level_intervals.push_back(exceedance(level, xs, epsilon));
    es.k_per_level.push_back(static_cast<int>(std::ceil(es.level_intervals.back().length())));
    es.max_level = i;
    if (peak <= epsilon) {
      es.level_bound_found = true;
      break;
    }
  }
  return es;
}

TruncatedValue truncated_reconstruct(const DiffusionletCache& cache,
                                     const WaveletExpansion& expansion, double epsilon, double tau,
                                     double x) {
  check_compatible(cache, expansion);
  const auto es = essential_support(cache, epsilon, tau, std::max(expansion.levels, 1));
  const int x0 = static_cast<int>(expansion.x_lo);
  TruncatedValue out;
  for_each_term(expansion, x, [&](const ExpansionTerm& t) {
    if (t.level < 0) {
      if (!es.father_interval.contains(t.argument)) return;
    } else {
      const auto level = static_cast<std::size_t>(t.level);
      if (t.level > es.max_level || level >= es.level_intervals.size()) return;
      if (!es.level_intervals[level].contains(t.argument)) return;
    }
    ++out.terms_used;
    if (t.coefficient != 0.0) out.value += t.coefficient * term_value_unchecked(cache, x0, t, tau, x);
  });
  return out;
}

RefinementResidual refinement_residual(const DiffusionletCache& cache, double tau) {
  const double scaled = cache.time_scale(1) * tau;
  if (tau < 0.0 || scaled > cache.tau_max() * (1.0 + 1e-12)) {
    throw std::out_of_range("refinement residual at tau = " + std::to_string(tau) +
                            " needs cache horizon >= " + std::to_string(scaled));
  }
  const auto& xs = cache.father_surface.x;
  const double dx = cache.father_surface.dx();
  const double span = cache.basis.support_length();
  const double lo = cache.lambda == 0.0 ? (xs.front() + span) / 2.0 : xs.front();
  const double hi = xs.back() / 2.0;
  const auto& h = cache.basis.filter.h;
  const auto& g = cache.basis.filter.g;
  const double root2 = std::sqrt(2.0);
  double father_sq = 0.0, mother_sq = 0.0;
  for (double x : xs) {
    if (x < lo || x > hi) continue;
    double rhs_f = 0.0, rhs_m = 0.0;
    for (std::size_t n = 0; n < h.size(); ++n) {
      const double v = fast_father(cache, scaled, 2.0 * x - static_cast<double>(n));
      rhs_f += h[n] * v;
      rhs_m += g[n] * v;
    }
    const double df = fast_father(cache, tau, x) - root2 * rhs_f;
    const double dm = surface_value(cache.mother_surface, cache.basis.mother, tau, x) - root2 * rhs_m;
    father_sq += df * df;
    mother_sq += dm * dm;
  }
  return {std::sqrt(father_sq * dx), std::sqrt(mother_sq * dx)};
}

double translation_discrepancy(double lambda, double sigma, const WaveletBasis& basis, int k,
                               double tau, const CacheGrid& grid) {
  if (k == 0 || tau == 0.0) return 0.0;
  if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
  const double span = basis.support_length();
  auto [lo, hi] = support_extent(lambda, sigma, std::min(0.0, static_cast<double>(k)),
                             std::max(span, k + span), tau);
  const double dx = std::ldexp(1.0, -grid.resolution);
  const auto nodes = geometric_nodes(std::min(grid.tau_min, tau / 10.0), tau, grid.tau_nodes);
  const PdeSpec spec = drift_free(lambda, sigma, lo, hi, tau);
  const std::size_t nx = node_count(lo, hi, dx);
  const auto xs = space_grid(spec, static_cast<int>(nx));
  std::vector<double> base(nx), shifted(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    base[j] = basis.father(xs[j]);
    shifted[j] = basis.father(xs[j] - k);
  }
  const std::vector<std::size_t> last{nodes.size() - 1};
  const auto sb = march(spec, base, nodes, grid.theta, last);
  const auto sd = march(spec, shifted, nodes, grid.theta, last);
  const auto offset = static_cast<std::ptrdiff_t>(k) << grid.resolution;
  double diff = 0.0, norm = 0.0;
  for (std::size_t j = 0; j < nx; ++j) {
    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(j) - offset;
    const double translated =
        (src >= 0 && src < static_cast<std::ptrdiff_t>(nx)) ? sb.values[static_cast<std::size_t>(src)] : 0.0;
    const double direct = sd.values[j];
    diff += (translated - direct) * (translated - direct);
    norm += direct * direct;
  }
  return norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
}

// --- persistence -------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'D', 'L', 'E', 'T', 'C', 'A', 'C', 'H'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("truncated cache file");
  return v;
}

void put_vector(std::ostream& os, const std::vector<double>& v) {
  put<std::uint64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_vector(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  if (n > (std::uint64_t{1} << 34)) throw std::runtime_error("corrupt cache file (vector size)");
  std::vector<double> v(static_cast<std::size_t>(n));
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw std::runtime_error("truncated cache file");
  return v;
}

void put_surface(std::ostream& os, const GridSolution& s) {
  put_vector(os, s.tau);
  put_vector(os, s.x);
  put_vector(os, s.values);
}

GridSolution get_surface(std::istream& is) {
  GridSolution s;
  s.tau = get_vector(is);
  s.x = get_vector(is);
  s.values = get_vector(is);
  if (s.values.size() != s.tau.size() * s.x.size()) throw std::runtime_error("corrupt cache surface");
  return s;
}

}  // namespace

void save_cache(const DiffusionletCache& cache, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  put<std::int32_t>(os, DiffusionletCache::kFormatVersion);
  put<double>(os, cache.lambda);
  put<double>(os, cache.sigma);
  put<std::int32_t>(os, cache.basis.order());
  put<std::int32_t>(os, cache.basis.father.resolution());
  put<std::int32_t>(os, cache.mode == CacheMode::fast ? 0 : 1);
  put<std::int32_t>(os, cache.grid.resolution);
  put<std::int32_t>(os, cache.grid.tau_nodes);
  put<double>(os, cache.grid.tau_min);
  put<double>(os, cache.grid.theta);
  put<double>(os, cache.grid.x_lo.value_or(cache.father_surface.x.front()));
  put<double>(os, cache.grid.x_hi.value_or(cache.father_surface.x.back()));
  put_surface(os, cache.father_surface);
  put_surface(os, cache.mother_surface);
  put<std::uint64_t>(os, cache.exact_surfaces.size());
  for (const auto& [key, surface] : cache.exact_surfaces) {
    put<std::int32_t>(os, key.first);
    put<std::int32_t>(os, key.second);
    put_surface(os, surface);
  }
  if (!os) throw std::runtime_error("failed writing cache to " + path);
}

DiffusionletCache load_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open cache file " + path);
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path + " is not a diffusionlet cache");
  }
  const auto version = get<std::int32_t>(is);
  if (version != DiffusionletCache::kFormatVersion) {
    throw std::runtime_error("unsupported cache format version " + std::to_string(version));
  }
  DiffusionletCache cache;
  cache.lambda = get<double>(is);
  cache.sigma = get<double>(is);
  const auto order = get<std::int32_t>(is);
  const auto basis_resolution = get<std::int32_t>(is);
  cache.mode = get<std::int32_t>(is) == 0 ? CacheMode::fast : CacheMode::exact;
  cache.grid.resolution = get<std::int32_t>(is);
  cache.grid.tau_nodes = get<std::int32_t>(is);
  cache.grid.tau_min = get<double>(is);
  cache.grid.theta = get<double>(is);
  cache.grid.x_lo = get<double>(is);
  cache.grid.x_hi = get<double>(is);
  cache.basis = make_basis(order, basis_resolution);
  cache.father_surface = get_surface(is);
  cache.mother_surface = get_surface(is);
  const auto n_exact = get<std::uint64_t>(is);
  for (std::uint64_t n = 0; n < n_exact; ++n) {
    const auto level = get<std::int32_t>(is);
    const auto k = get<std::int32_t>(is);
    cache.exact_surfaces.emplace(std::pair{level, k}, get_surface(is));
  }
  return cache;
}

}  // namespace dlet
