#include "dlet/wavelets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/binomial.hpp>

namespace dlet {
namespace detail {
const std::array<std::vector<double>, 10>& daubechies_table();
}

namespace {

constexpr double kCascadeTolerance = 1e-10;
constexpr int kCascadeMaxIterations = 60;

bool is_power_of_two_multiple(std::size_t n, std::size_t base, int& exponent) {
  if (base == 0 || n % base != 0) return false;
  std::size_t q = n / base;
  exponent = 0;
  while (q > 1) {
    if (q % 2 != 0) return false;
    q /= 2;
    ++exponent;
  }
  return q == 1;
}

}  // namespace

double FilterResiduals::max() const {
  return std::max({sum, orthonormality, vanishing_moments, mirror});
}

FilterPair daubechies_filter(int order) {
  if (order < kMinDaubechiesOrder || order > kMaxDaubechiesOrder) {
    throw std::invalid_argument("unsupported Daubechies order " + std::to_string(order) +
                                "; supported orders are " + std::to_string(kMinDaubechiesOrder) +
                                ".." + std::to_string(kMaxDaubechiesOrder));
  }
  FilterPair f;
  f.order = order;
  f.h = detail::daubechies_table()[static_cast<std::size_t>(order - 1)];
  const std::size_t n = f.h.size();
  f.g.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    f.g[k] = (k % 2 == 0 ? 1.0 : -1.0) * f.h[n - 1 - k];
  }
  return f;
}

FilterResiduals filter_residuals(const FilterPair& filter) {
  FilterResiduals r;
  const auto& h = filter.h;
  const std::size_t n = h.size();
  double s = 0.0;
  for (double v : h) s += v;
  r.sum = std::abs(s - std::sqrt(2.0));
  for (std::size_t m = 0; 2 * m < n; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 2 * m < n; ++k) acc += h[k] * h[k + 2 * m];
    r.orthonormality = std::max(r.orthonormality, std::abs(acc - (m == 0 ? 1.0 : 0.0)));
  }
  // Extended accumulation so the residual is that of the stored doubles,
  // not of the summation.
  for (int m = 0; m < filter.order; ++m) {
    long double acc = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
      acc += (k % 2 == 0 ? 1.0L : -1.0L) * std::pow(static_cast<long double>(k), m) * h[k];
    }
    r.vanishing_moments = std::max(r.vanishing_moments, static_cast<double>(std::fabs(acc)));
  }
  if (filter.g.size() != n) {
    r.mirror = INFINITY;
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const double expected = (k % 2 == 0 ? 1.0 : -1.0) * h[n - 1 - k];
      r.mirror = std::max(r.mirror, std::abs(filter.g[k] - expected));
    }
  }
  return r;
}

double father_moment(const FilterPair& filter, int m) {
  if (m < 0) throw std::invalid_argument("moment order must be nonnegative");
  std::vector<double> moments{1.0};
  const double root2 = std::sqrt(2.0);
  for (int q = 1; q <= m; ++q) {
    double acc = 0.0;
    for (int l = 0; l < q; ++l) {
      double hn = 0.0;
      for (std::size_t n = 0; n < filter.h.size(); ++n) {
        hn += filter.h[n] * std::pow(static_cast<double>(n), q - l);
      }
      acc += boost::math::binomial_coefficient<double>(static_cast<unsigned>(q),
                                                       static_cast<unsigned>(l)) *
             moments[static_cast<std::size_t>(l)] * hn;
    }
    const double scale = std::ldexp(root2, -(q + 1));
    moments.push_back(scale * acc / (1.0 - std::ldexp(1.0, -q)));
  }
  return moments.back();
}

// --- DyadicFunction ---------------------------------------------------------

DyadicFunction::DyadicFunction(std::vector<double> samples, int resolution, double lo)
    : samples_(std::move(samples)),
      resolution_(resolution),
      step_(std::ldexp(1.0, -resolution)),
      lo_(lo) {
  if (samples_.empty()) throw std::invalid_argument("DyadicFunction needs at least one sample");
}

double DyadicFunction::hi() const {
  return lo_ + static_cast<double>(samples_.size() - 1) * step_;
}

double DyadicFunction::operator()(double x) const {
  const double t = (x - lo_) / step_;
  if (!(t >= 0.0)) return 0.0;
  const double last = static_cast<double>(samples_.size() - 1);
  if (t >= last) return t == last ? samples_.back() : 0.0;
  const auto n = static_cast<std::size_t>(t);
  const double frac = t - static_cast<double>(n);
  return samples_[n] + frac * (samples_[n + 1] - samples_[n]);
}

double DyadicFunction::moment(int m) const {
  double acc = 0.0;
  const std::size_t n = samples_.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    acc += w * std::pow(x_at(k), m) * samples_[k];
  }
  return acc * step_;
}

double DyadicFunction::l2_norm() const {
  double acc = 0.0;
  const std::size_t n = samples_.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    acc += w * samples_[k] * samples_[k];
  }
  return std::sqrt(acc * step_);
}

// --- cascade ---------------------------------------------------------------

CascadeResult cascade_evaluate(const FilterPair& filter, int resolution) {
  if (resolution < 4) throw std::invalid_argument("cascade resolution must be >= 4");
  if (resolution > 24) throw std::invalid_argument("cascade resolution must be <= 24");
  const std::size_t per_unit = std::size_t{1} << resolution;
  const std::size_t span = filter.h.size() - 1;  // 2p - 1
  const std::size_t count = span * per_unit + 1;
  const double root2 = std::sqrt(2.0);

  std::vector<double> current(count, 0.0);
  std::fill(current.begin(), current.begin() + static_cast<std::ptrdiff_t>(per_unit), 1.0);
  std::vector<double> next(count, 0.0);

  CascadeResult result;
  double previous_update = INFINITY;
  int growth_streak = 0;
  for (int it = 1; it <= kCascadeMaxIterations; ++it) {
    double update = 0.0;
    for (std::size_t m = 0; m < count; ++m) {
      double acc = 0.0;
      for (std::size_t n = 0; n < filter.h.size(); ++n) {
        const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(2 * m) -
                                   static_cast<std::ptrdiff_t>(n * per_unit);
        if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(count)) {
          acc += filter.h[n] * current[static_cast<std::size_t>(idx)];
        }
      }
      next[m] = root2 * acc;
      update = std::max(update, std::abs(next[m] - current[m]));
    }
    current.swap(next);
    result.iterations = it;
    result.last_update = update;
    if (!std::isfinite(update)) growth_streak = 1000;
    growth_streak = update > previous_update ? growth_streak + 1 : 0;
    if (growth_streak >= 5) {
      throw std::runtime_error("cascade iteration diverges for Daubechies filter of order " +
                               std::to_string(filter.order));
    }
    if (update < kCascadeTolerance) break;
    previous_update = update;
  }

  std::vector<double> mother(count, 0.0);
  for (std::size_t m = 0; m < count; ++m) {
    double acc = 0.0;
    for (std::size_t n = 0; n < filter.g.size(); ++n) {
      const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(2 * m) -
                                 static_cast<std::ptrdiff_t>(n * per_unit);
      if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(count)) {
        acc += filter.g[n] * current[static_cast<std::size_t>(idx)];
      }
    }
    mother[m] = root2 * acc;
  }
  result.father = DyadicFunction(std::move(current), resolution, 0.0);
  result.mother = DyadicFunction(std::move(mother), resolution, 0.0);
  return result;
}

WaveletBasis make_basis(int order, int resolution) {
  WaveletBasis basis;
  basis.filter = daubechies_filter(order);
  auto cascade = cascade_evaluate(basis.filter, resolution);
  basis.father = std::move(cascade.father);
  basis.mother = std::move(cascade.mother);
  basis.father_mean = father_moment(basis.filter, 1);
  return basis;
}

// --- expansions ------------------------------------------------------------

WaveletExpansion WaveletExpansion::zeros(int order, int levels, int cells, double x_lo) {
  if (levels < 0) throw std::invalid_argument("levels must be nonnegative");
  if (cells < 1) throw std::invalid_argument("expansion needs at least one cell");
  WaveletExpansion e;
  e.order = order;
  e.levels = levels;
  e.cells = cells;
  e.x_lo = x_lo;
  e.alpha.assign(static_cast<std::size_t>(cells), 0.0);
  e.beta.resize(static_cast<std::size_t>(levels));
  for (int i = 0; i < levels; ++i) {
    e.beta[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(cells) << i, 0.0);
  }
  return e;
}

std::size_t WaveletExpansion::term_count() const {
  std::size_t n = alpha.size();
  for (const auto& row : beta) n += row.size();
  return n;
}

double WaveletExpansion::energy() const {
  double acc = 0.0;
  for (double a : alpha) acc += a * a;
  for (const auto& row : beta)
    for (double b : row) acc += b * b;
  return acc;
}

void WaveletExpansion::validate() const {
  if (levels < 0 || cells < 1) {
    throw std::invalid_argument("expansion has invalid shape: levels=" + std::to_string(levels) +
                                ", cells=" + std::to_string(cells));
  }
  if (alpha.size() != static_cast<std::size_t>(cells)) {
    throw std::invalid_argument("expansion alpha has " + std::to_string(alpha.size()) +
                                " entries, expected " + std::to_string(cells));
  }
  if (beta.size() != static_cast<std::size_t>(levels)) {
    throw std::invalid_argument("expansion has " + std::to_string(beta.size()) +
                                " detail levels, expected " + std::to_string(levels));
  }
  for (int i = 0; i < levels; ++i) {
    const std::size_t want = static_cast<std::size_t>(cells) << i;
    if (beta[static_cast<std::size_t>(i)].size() != want) {
      throw std::invalid_argument("expansion level " + std::to_string(i) + " has " +
                                  std::to_string(beta[static_cast<std::size_t>(i)].size()) +
                                  " entries, expected " + std::to_string(want));
    }
  }
}

std::vector<double> sample_points(const WaveletBasis& basis, int levels, int cells, double x_lo) {
  if (levels < 0 || cells < 1) throw std::invalid_argument("sample_points: invalid levels/cells");
  const std::size_t n = static_cast<std::size_t>(cells) << levels;
  const double dx = std::ldexp(1.0, -levels);
  std::vector<double> xs(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = x_lo + (static_cast<double>(k) + basis.father_mean) * dx;
  }
  return xs;
}

WaveletExpansion fwt_decompose(std::span<const double> samples, const FilterPair& filter,
                               int levels, double x_lo) {
  if (levels < 0) throw std::invalid_argument("fwt_decompose: levels must be nonnegative");
  const std::size_t n = samples.size();
  const std::size_t block = std::size_t{1} << levels;
  if (n == 0 || n % block != 0) {
    throw std::invalid_argument("fwt_decompose: sample count " + std::to_string(n) +
                                " must be a positive multiple of 2^levels = " +
                                std::to_string(block));
  }
  auto e = WaveletExpansion::zeros(filter.order, levels, static_cast<int>(n / block), x_lo);
  const double scale = std::pow(2.0, -0.5 * levels);
  std::vector<double> c(samples.begin(), samples.end());
  for (double& v : c) v *= scale;

  const std::size_t taps = filter.h.size();
  for (int j = levels - 1; j >= 0; --j) {
    const std::size_t len = c.size();
    const std::size_t half = len / 2;
    std::vector<double> approx(half, 0.0);
    auto& detail = e.beta[static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < half; ++k) {
      double a = 0.0;
      double d = 0.0;
      for (std::size_t m = 0; m < taps; ++m) {
        const double v = c[(2 * k + m) % len];
        a += filter.h[m] * v;
        d += filter.g[m] * v;
      }
      approx[k] = a;
      detail[k] = d;
    }
    c.swap(approx);
  }
  e.alpha = std::move(c);
  return e;
}

std::vector<double> fwt_reconstruct(const WaveletExpansion& expansion, const FilterPair& filter,
                                    std::size_t sample_count) {
  expansion.validate();
  if (expansion.order != filter.order) {
    throw std::invalid_argument("fwt_reconstruct: expansion order " +
                                std::to_string(expansion.order) + " does not match filter order " +
                                std::to_string(filter.order));
  }
  int total_levels = 0;
  if (!is_power_of_two_multiple(sample_count, static_cast<std::size_t>(expansion.cells),
                                total_levels) ||
      total_levels < expansion.levels) {
    throw std::invalid_argument("fwt_reconstruct: sample count " + std::to_string(sample_count) +
                                " must equal cells * 2^L with cells = " +
                                std::to_string(expansion.cells) +
                                " and L >= levels = " + std::to_string(expansion.levels));
  }
  const std::size_t taps = filter.h.size();
  std::vector<double> c = expansion.alpha;
  for (int j = 0; j < total_levels; ++j) {
    const std::size_t half = c.size();
    const std::size_t len = 2 * half;
    std::vector<double> finer(len, 0.0);
    const std::vector<double>* detail =
        j < expansion.levels ? &expansion.beta[static_cast<std::size_t>(j)] : nullptr;
    for (std::size_t k = 0; k < half; ++k) {
      const double a = c[k];
      const double d = detail ? (*detail)[k] : 0.0;
      for (std::size_t m = 0; m < taps; ++m) {
        finer[(2 * k + m) % len] += filter.h[m] * a + filter.g[m] * d;
      }
    }
    c.swap(finer);
  }
  const double scale = std::pow(2.0, 0.5 * total_levels);
  for (double& v : c) v *= scale;
  return c;
}

double evaluate_expansion(const WaveletExpansion& expansion, const WaveletBasis& basis, double x) {
  if (expansion.order != basis.order()) {
    throw std::invalid_argument("evaluate_expansion: expansion order does not match basis");
  }
  std::vector<double> level_scale(static_cast<std::size_t>(expansion.levels));
  for (int i = 0; i < expansion.levels; ++i) level_scale[static_cast<std::size_t>(i)] = std::pow(2.0, 0.5 * i);
  const double span = basis.support_length();
  double acc = 0.0;
  for_each_term(expansion, x, [&](const ExpansionTerm& t) {
    if (t.coefficient == 0.0 || t.argument < 0.0 || t.argument > span) return;
    if (t.level < 0) {
      acc += t.coefficient * basis.father(t.argument);
    } else {
      acc += t.coefficient * level_scale[static_cast<std::size_t>(t.level)] * basis.mother(t.argument);
    }
  });
  return acc;
}

}  // namespace dlet
