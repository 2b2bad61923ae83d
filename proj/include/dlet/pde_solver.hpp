#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dlet {

/// Values on a uniform grid x0 + n*dx; linear interpolation in between and
/// zero outside the sampled range.
struct SampledFunction {
  double x0 = 0.0;
  double dx = 1.0;
  std::vector<double> values;

  double operator()(double x) const;
  [[nodiscard]] double x_at(std::size_t n) const { return x0 + static_cast<double>(n) * dx; }
  [[nodiscard]] double x_end() const { return x_at(values.size() - 1); }
};

/// Solution surface value[tau_index][x_index] on a uniform x grid.
///
/// Time runs as time-to-maturity tau = T - t, so row 0 (tau = 0) is the
/// terminal condition.
struct GridSolution {
  std::vector<double> tau;
  std::vector<double> x;
  std::vector<double> values;

  [[nodiscard]] std::size_t nx() const { return x.size(); }
  [[nodiscard]] std::size_t nt() const { return tau.size(); }
  [[nodiscard]] double dx() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
  [[nodiscard]] double at(std::size_t it, std::size_t ix) const { return values[it * x.size() + ix]; }
  [[nodiscard]] std::span<const double> row(std::size_t it) const {
    return {values.data() + it * x.size(), x.size()};
  }
  /// Linear interpolation in x along one stored row; zero outside the grid.
  [[nodiscard]] double interpolate_row(std::size_t it, double xq) const;
  /// Bilinear interpolation. Throws std::out_of_range when tau is outside
  /// the stored rows; x outside the grid gives zero.
  [[nodiscard]] double interpolate(double tau_q, double xq) const;
};

/// Coefficient function of calendar time t in [0, T] and space.
using Coefficient = std::function<double(double t, double x)>;

/// dQ/dt + sigma(t,x)^2/2 Q_xx + mu(t,x) Q_x = 0, Q(T, x) = f(x).
///
/// Without explicit coefficient functions the family mu = r x,
/// sigma(x) = sigma * x^lambda is used.
struct PdeSpec {
  double lambda = 0.0;
  double sigma = 1.0;
  double r = 0.0;
  Coefficient drift;
  Coefficient diffusion;
  double x_lo = 0.0;
  double x_hi = 1.0;
  double horizon = 1.0;

  /// Throws std::invalid_argument on an empty domain, nonpositive horizon or
  /// sigma, lambda outside [0,1], or lambda > 0 with x_lo < 0.
  void validate() const;
  [[nodiscard]] double drift_at(double t, double x) const;
  [[nodiscard]] double diffusion_at(double t, double x) const;
};

struct GridParams {
  int nx = 1025;
  int nt = 512;
  double theta = 0.5;  ///< 0 explicit, 0.5 Crank-Nicolson, 1 implicit
};

/// Uniform node positions of the spec's domain.
std::vector<double> space_grid(const PdeSpec& spec, int nx);

/// theta-scheme time march over explicit tau nodes (tau_nodes[0] = 0).
///
/// Keeps every row when keep_rows is empty, otherwise only the listed row
/// indices (ascending). Boundary nodes use Q_xx = 0, so they move only with
/// the drift; a node where the diffusion vanishes is therefore frozen.
GridSolution march(const PdeSpec& spec, std::span<const double> terminal,
                   std::span<const double> tau_nodes, double theta,
                   std::span<const std::size_t> keep_rows = {});

/// Uniform nt-step solve up to spec.horizon. terminal is sampled on
/// space_grid(spec, nx).
GridSolution solve_backward(const PdeSpec& spec, std::span<const double> terminal,
                            const GridParams& params = {});
GridSolution solve_backward(const PdeSpec& spec, const std::function<double(double)>& terminal,
                            const GridParams& params = {});

/// dQ/dt + sigma^2 x^{2 lambda} / 2 Q_xx = 0 (the drift-free form).
GridSolution solve_discounted(double lambda, double sigma, std::span<const double> terminal,
                              double x_lo, double x_hi, double horizon,
                              const GridParams& params = {});
GridSolution solve_discounted(double lambda, double sigma,
                              const std::function<double(double)>& terminal, double x_lo,
                              double x_hi, double horizon, const GridParams& params = {});

/// Multiply row tau by exp(-r tau).
GridSolution undiscount(GridSolution solution, double r);

/// Relative max-norm distance between the drift form (mu = r x) and the
/// discounted form multiplied by exp(-r tau).
double consistency_gap(const PdeSpec& spec, const std::function<double(double)>& terminal,
                       const GridParams& params = {});

/// E[f(x + sigma W_tau)] by adaptive Gauss-Kronrod quadrature over the
/// intersection of [lo, hi] (where f may be nonzero) with x +- 12 sigma sqrt(tau).
double closed_form_heat(double sigma, const std::function<double(double)>& terminal, double tau,
                        double x, double lo = -1e300, double hi = 1e300);

/// Same expectation for the piecewise-linear interpolant of sampled data,
/// integrated exactly segment by segment.
double closed_form_heat(double sigma, const SampledFunction& terminal, double tau, double x);

/// Relative max norm max|a - b| / max|b|.
double relative_linf(std::span<const double> a, std::span<const double> b);

}  // namespace dlet
