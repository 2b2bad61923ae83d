#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace dlet {

inline constexpr int kMinDaubechiesOrder = 1;
inline constexpr int kMaxDaubechiesOrder = 10;

/// Orthonormal Daubechies refinement filters.
///
/// Convention: phi(x) = sqrt(2) * sum_n h[n] phi(2x - n) and
/// psi(x) = sqrt(2) * sum_n g[n] phi(2x - n), with sum(h) = sqrt(2) and
/// g[n] = (-1)^n h[2p-1-n]. Filters written with a plain factor 2 in front of
/// the sum use h / sqrt(2).
struct FilterPair {
  int order = 0;
  std::vector<double> h;
  std::vector<double> g;
};

struct FilterResiduals {
  double sum = 0.0;                ///< |sum h - sqrt(2)|
  double orthonormality = 0.0;     ///< max_m |sum h_n h_{n+2m} - delta_m|
  double vanishing_moments = 0.0;  ///< max_{m<p} |sum (-1)^n n^m h_n|
  double mirror = 0.0;             ///< max |g_n - (-1)^n h_{2p-1-n}|

  [[nodiscard]] double max() const;
};

/// Daubechies filter of order p (p vanishing moments, 2p taps).
/// Throws std::invalid_argument outside [1, 10].
FilterPair daubechies_filter(int order);

FilterResiduals filter_residuals(const FilterPair& filter);

/// m-th moment of the father wavelet, int x^m phi(x) dx, from the filter.
double father_moment(const FilterPair& filter, int m);

/// Samples of a compactly supported function at lo + n / 2^J.
///
/// Evaluation interpolates linearly between samples and returns zero outside
/// [lo, hi].
class DyadicFunction {
 public:
  DyadicFunction() = default;
  DyadicFunction(std::vector<double> samples, int resolution, double lo);

  double operator()(double x) const;

  [[nodiscard]] int resolution() const { return resolution_; }
  [[nodiscard]] double step() const { return step_; }
  [[nodiscard]] double lo() const { return lo_; }
  [[nodiscard]] double hi() const;
  [[nodiscard]] std::span<const double> samples() const { return samples_; }
  [[nodiscard]] double x_at(std::size_t n) const { return lo_ + static_cast<double>(n) * step_; }

  /// Trapezoid integral of x^m f(x) over the support.
  [[nodiscard]] double moment(int m) const;
  /// Trapezoid L2 norm.
  [[nodiscard]] double l2_norm() const;

 private:
  std::vector<double> samples_;
  int resolution_ = 0;
  double step_ = 1.0;
  double lo_ = 0.0;
};

struct CascadeResult {
  DyadicFunction father;
  DyadicFunction mother;
  int iterations = 0;
  double last_update = 0.0;
};

/// Father and mother wavelets on the dyadic grid k/2^J over [0, 2p-1].
///
/// The father is the fixed point of the grid refinement operator, iterated
/// from the unit box until the max update falls below 1e-10 (at most 60
/// sweeps). A growing update throws std::runtime_error naming the filter.
CascadeResult cascade_evaluate(const FilterPair& filter, int resolution);

/// Filter plus sampled father/mother wavelets; the unit every other module
/// evaluates wavelets through.
struct WaveletBasis {
  FilterPair filter;
  DyadicFunction father;
  DyadicFunction mother;
  double father_mean = 0.0;  ///< first moment of phi

  [[nodiscard]] int order() const { return filter.order; }
  [[nodiscard]] double support_length() const { return 2.0 * filter.order - 1.0; }
};

WaveletBasis make_basis(int order, int resolution = 10);

/// Wavelet coefficients of a function on the periodic window
/// [x_lo, x_lo + cells).
///
///   f(x) = sum_k alpha_k phi(u - k) + sum_{i<levels} sum_k beta_{i,k} 2^{i/2} psi(2^i u - k)
///
/// with u = x - x_lo, 0 <= k < cells * 2^i. Basis functions whose support
/// crosses the right end of the window also contribute their copies shifted
/// by whole periods, so the sum is exact on the window.
struct WaveletExpansion {
  int order = 0;
  int levels = 0;
  int cells = 0;
  double x_lo = 0.0;
  std::vector<double> alpha;
  std::vector<std::vector<double>> beta;

  static WaveletExpansion zeros(int order, int levels, int cells, double x_lo = 0.0);

  [[nodiscard]] double x_hi() const { return x_lo + cells; }
  [[nodiscard]] std::size_t term_count() const;
  /// Sum of squared coefficients.
  [[nodiscard]] double energy() const;
  /// Throws std::invalid_argument when vector sizes disagree with cells/levels.
  void validate() const;
};

/// Points where fwt_decompose expects its samples:
/// x_lo + (n + father_mean) / 2^levels.
///
/// Sampling at the father wavelet's centre of mass makes the samples
/// third-order accurate estimates of the finest-scale inner products
/// (the second central moment of a Daubechies father vanishes for p >= 2).
std::vector<double> sample_points(const WaveletBasis& basis, int levels, int cells, double x_lo = 0.0);

/// Periodic fast wavelet transform. samples.size() must be divisible by
/// 2^levels; throws std::invalid_argument otherwise.
WaveletExpansion fwt_decompose(std::span<const double> samples, const FilterPair& filter,
                               int levels, double x_lo = 0.0);

/// Inverse transform. sample_count must be cells * 2^L with L >= levels; the
/// extra levels are treated as zero details, giving finer samples of the same
/// function.
std::vector<double> fwt_reconstruct(const WaveletExpansion& expansion, const FilterPair& filter,
                                    std::size_t sample_count);

/// Sample f at sample_points and decompose.
template <class F>
WaveletExpansion decompose_function(F&& f, const WaveletBasis& basis, int levels, int cells,
                                    double x_lo = 0.0) {
  const auto xs = sample_points(basis, levels, cells, x_lo);
  std::vector<double> samples(xs.size());
  for (std::size_t n = 0; n < xs.size(); ++n) samples[n] = f(xs[n]);
  return fwt_decompose(samples, basis.filter, levels, x_lo);
}

/// One term of an expansion at a point: the coefficient and the argument
/// at which the unscaled father (level < 0) or mother wavelet is evaluated.
/// The mother term's value is 2^{level/2} * psi(argument).
struct ExpansionTerm {
  int level;      ///< -1 for the father terms
  int k;          ///< stored index
  int shifted_k;  ///< k minus the whole periods of this copy
  double coefficient;
  double argument;
};

/// Visit every (term, periodic copy) of the expansion at x, including terms
/// whose wavelet vanishes there.
template <class Visitor>
void for_each_term(const WaveletExpansion& e, double x, Visitor&& visit) {
  const double u = x - e.x_lo;
  const double span = 2.0 * e.order - 1.0;
  for (int k = 0; k < e.cells; ++k) {
    for (int m = 0;; ++m) {
      const int shifted = k - m * e.cells;
      if (m > 0 && shifted + span <= 0.0) break;
      visit(ExpansionTerm{-1, k, shifted, e.alpha[static_cast<std::size_t>(k)], u - shifted});
    }
  }
  double scale = 1.0;
  for (int i = 0; i < e.levels; ++i, scale *= 2.0) {
    const auto& row = e.beta[static_cast<std::size_t>(i)];
    const int period = static_cast<int>(row.size());
    for (int k = 0; k < period; ++k) {
      for (int m = 0;; ++m) {
        const int shifted = k - m * period;
        if (m > 0 && shifted + span <= 0.0) break;
        visit(ExpansionTerm{i, k, shifted, row[static_cast<std::size_t>(k)], scale * u - shifted});
      }
    }
  }
}

/// sum_k alpha_k phi_{0,k}(x) + sum_{i,k} beta_{i,k} psi_{i,k}(x) using the
/// basis' dyadic samples.
double evaluate_expansion(const WaveletExpansion& expansion, const WaveletBasis& basis, double x);

}  // namespace dlet
