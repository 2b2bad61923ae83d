#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dlet/pde_solver.hpp"
#include "dlet/wavelets.hpp"

namespace dlet {

enum class CacheMode { fast, exact };

std::string to_string(CacheMode mode);
CacheMode parse_cache_mode(const std::string& text);

/// Discretization of the base diffusionlet solves.
struct CacheGrid {
  int resolution = 5;      ///< x spacing 2^-resolution, aligned with the dyadic wavelet samples
  int tau_nodes = 400;     ///< geometric time nodes after tau = 0
  double tau_min = 1e-5;   ///< first nonzero node
  double theta = 0.5;
  std::optional<double> x_lo;  ///< explicit extent; derived from the support margin when unset
  std::optional<double> x_hi;
};

/// Which (level, k) terminal wavelets exact mode solves individually, and the
/// times it must answer. Level -1 is the father family phi(x - k); level i
/// is 2^{i/2} psi(2^i x - k).
struct ExactRange {
  int father_k_min = 0;
  int father_k_max = -1;
  std::vector<std::pair<int, int>> mother_k;  ///< [k_min, k_max] for levels 0..size-1
  std::vector<double> taus;

  /// Every term (including periodic copies) of the expansion, answered at taus.
  static ExactRange covering(const WaveletExpansion& expansion, std::vector<double> taus);
};

/// Base solutions of the drift-free equation
///   dQ/dtau = sigma^2 x^{2 lambda} / 2 Q_xx
/// with the father and mother wavelets as terminal data, stored on a
/// geometric tau grid. Immutable once built.
struct DiffusionletCache {
  static constexpr int kFormatVersion = 1;

  double lambda = 0.0;
  double sigma = 1.0;
  CacheMode mode = CacheMode::fast;
  CacheGrid grid;
  WaveletBasis basis;
  GridSolution father_surface;
  GridSolution mother_surface;
  /// Exact mode only: key (level, k) as in ExactRange.
  std::map<std::pair<int, int>, GridSolution> exact_surfaces;

  [[nodiscard]] int basis_order() const { return basis.order(); }
  [[nodiscard]] double tau_max() const { return father_surface.tau.back(); }
  /// 2^{(2 - 2 lambda) level}
  [[nodiscard]] double time_scale(int level) const;
};

/// Spatial extent covering the wavelet support [0, 2p-1] plus
/// 6 sigma sqrt(tau_max) |x|^lambda on each side (x >= 0 when lambda > 0).
/// Throws std::invalid_argument when no finite extent satisfies the margin.
std::pair<double, double> required_extent(double lambda, double sigma, int order, double tau_max);

/// Same margin rule for data supported on [s_lo, s_hi].
std::pair<double, double> support_extent(double lambda, double sigma, double s_lo, double s_hi,
                                         double tau_max);

/// Build the cache. Fast mode stores the two base surfaces; exact mode also
/// solves every terminal wavelet listed in `exact`. Throws
/// std::invalid_argument when an explicit extent is smaller than
/// required_extent (the message names the required extent).
DiffusionletCache build_cache(double lambda, double sigma, const WaveletBasis& basis,
                              double tau_max, const CacheGrid& grid = {},
                              CacheMode mode = CacheMode::fast, const ExactRange& exact = {});

/// phi diffusionlet translated by k: Phi(tau, x - k) in fast mode, the
/// dedicated solve in exact mode.
double eval_father(const DiffusionletCache& cache, int k, double tau, double x);

/// 2^{i/2} Psi(2^{(2-2 lambda) i} tau, 2^i x - k) in fast mode; the
/// dedicated solve in exact mode. Throws std::out_of_range when the scaled
/// time exceeds the cache horizon or (exact mode) the term was not solved.
double eval_mother(const DiffusionletCache& cache, int level, int k, double tau, double x);

/// Diffusionlet of one expansion term (coefficient not applied) at (tau, x);
/// `term` comes from for_each_term(expansion, x, ...).
double term_value(const DiffusionletCache& cache, const WaveletExpansion& expansion,
                  const ExpansionTerm& term, double tau, double x);

/// sum_k alpha_k Phi_{0,k}(tau, x) + sum_{i,k} beta_{i,k} Psi_{i,k}(tau, x).
/// The expansion window must start at an integer.
double reconstruct(const DiffusionletCache& cache, const WaveletExpansion& expansion, double tau,
                   double x);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = true;
  [[nodiscard]] bool contains(double v) const { return !empty && v > lo && v < hi; }
  [[nodiscard]] double length() const { return empty ? 0.0 : hi - lo; }
};

/// Region where the diffusionlets exceed epsilon at time tau.
struct EssentialSupport {
  double epsilon = 0.0;
  double tau = 0.0;
  Interval interval;          ///< union of the father and mother regions at tau
  Interval father_interval;   ///< Phi(tau, .) region
  std::vector<Interval> level_intervals;  ///< 2^{i/2} Psi(2^{(2-2l)i} tau, .) region, level i
  std::vector<int> k_per_level;           ///< K_i: translates that can reach a point at level i
  int father_k = 0;                       ///< K for the father terms
  int max_level = 0;                      ///< I(epsilon)
  bool level_bound_found = false;         ///< false when I(epsilon) hit max_levels or the horizon
};

/// Essential support. Levels are scanned up to max_levels or the cache
/// horizon, whichever comes first.
EssentialSupport essential_support(const DiffusionletCache& cache, double epsilon, double tau,
                                   int max_levels = 30);

struct TruncatedValue {
  double value = 0.0;
  std::size_t terms_used = 0;
};

/// reconstruct restricted to terms whose diffusionlet is inside the
/// essential support at x and levels i <= I(epsilon).
TruncatedValue truncated_reconstruct(const DiffusionletCache& cache,
                                     const WaveletExpansion& expansion, double epsilon, double tau,
                                     double x);

struct RefinementResidual {
  double father = 0.0;
  double mother = 0.0;
  [[nodiscard]] double max() const { return father > mother ? father : mother; }
};

/// Grid L2 norm of Phi(tau, x) - sqrt(2) sum h_n Phi(2^{2-2 lambda} tau, 2x - n)
/// and of the analogous mother relation with g.
RefinementResidual refinement_residual(const DiffusionletCache& cache, double tau);

/// Relative L2 distance between the father diffusionlet translated by k and
/// a direct solve whose terminal is phi(x - k), on a common aligned grid.
double translation_discrepancy(double lambda, double sigma, const WaveletBasis& basis, int k,
                               double tau, const CacheGrid& grid = {});

/// Binary bundle: header (magic, format version, lambda, sigma, order, basis
/// resolution, grid, mode) followed by raw surfaces in native byte order.
void save_cache(const DiffusionletCache& cache, const std::string& path);
DiffusionletCache load_cache(const std::string& path);

}  // namespace dlet
