#include "dlet/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace dlet {
namespace {

struct Tridiagonal {
  std::vector<double> lower, diag, upper;
  explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
};

// Thomas algorithm; rhs is overwritten with the solution.
void solve_tridiagonal(const Tridiagonal& m, std::vector<double>& rhs, std::vector<double>& scratch) {
  const std::size_t n = rhs.size();
  scratch.resize(n);
  double denom = m.diag[0];
  scratch[0] = m.upper[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = m.diag[i] - m.lower[i] * scratch[i - 1];
    scratch[i] = m.upper[i] / denom;
    rhs[i] = (rhs[i] - m.lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

// Spatial operator L u = sigma^2/2 u_xx + mu u_x at calendar time t.
void assemble(const PdeSpec& spec, const std::vector<double>& x, double dx, double t,
              Tridiagonal& op) {
  const std::size_t n = x.size();
  const double inv_dx2 = 1.0 / (dx * dx);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double s = spec.diffusion_at(t, x[j]);
    const double a = 0.5 * s * s * inv_dx2;
    const double b = spec.drift_at(t, x[j]) / (2.0 * dx);
    op.lower[j] = a - b;
    op.diag[j] = -2.0 * a;
    op.upper[j] = a + b;
  }
  const double mu_lo = spec.drift_at(t, x.front());
  op.lower[0] = 0.0;
  op.diag[0] = -mu_lo / dx;
  op.upper[0] = mu_lo / dx;
  const double mu_hi = spec.drift_at(t, x.back());
  op.lower[n - 1] = -mu_hi / dx;
  op.diag[n - 1] = mu_hi / dx;
  op.upper[n - 1] = 0.0;
}

bool time_dependent(const PdeSpec& spec) { return spec.drift || spec.diffusion; }

void check_terminal(std::span<const double> terminal, std::size_t nx) {
  if (terminal.size() != nx) {
    throw std::invalid_argument("terminal has " + std::to_string(terminal.size()) +
                                " samples but the grid has " + std::to_string(nx) + " nodes");
  }
  for (std::size_t j = 0; j < terminal.size(); ++j) {
    if (!std::isfinite(terminal[j])) {
      throw std::invalid_argument("terminal value at node " + std::to_string(j) + " is not finite");
    }
  }
}

}  // namespace

double SampledFunction::operator()(double x) const {
  if (values.empty()) return 0.0;
  const double t = (x - x0) / dx;
  if (!(t >= 0.0)) return 0.0;
  const double last = static_cast<double>(values.size() - 1);
  if (t >= last) return t == last ? values.back() : 0.0;
  const auto n = static_cast<std::size_t>(t);
  const double frac = t - static_cast<double>(n);
  return values[n] + frac * (values[n + 1] - values[n]);
}

double GridSolution::interpolate_row(std::size_t it, double xq) const {
  const double h = dx();
  const double t = (xq - x.front()) / h;
  if (!(t >= 0.0)) return 0.0;
  const double last = static_cast<double>(x.size() - 1);
  const auto r = row(it);
  if (t >= last) return t == last ? r.back() : 0.0;
  const auto n = static_cast<std::size_t>(t);
  const double frac = t - static_cast<double>(n);
  return r[n] + frac * (r[n + 1] - r[n]);
}

double GridSolution::interpolate(double tau_q, double xq) const {
  if (tau.empty()) throw std::out_of_range("empty solution");
  if (tau_q < tau.front() || tau_q > tau.back()) {
    throw std::out_of_range("tau = " + std::to_string(tau_q) + " outside stored range [" +
                            std::to_string(tau.front()) + ", " + std::to_string(tau.back()) + "]");
  }
  auto it = std::upper_bound(tau.begin(), tau.end(), tau_q);
  if (it == tau.end()) return interpolate_row(tau.size() - 1, xq);
  const std::size_t hi = static_cast<std::size_t>(it - tau.begin());
  const std::size_t lo = hi - 1;
  const double w = (tau_q - tau[lo]) / (tau[hi] - tau[lo]);
  const double a = interpolate_row(lo, xq);
  if (w == 0.0) return a;
  return a + w * (interpolate_row(hi, xq) - a);
}

void PdeSpec::validate() const {
  if (!(x_hi > x_lo)) {
    throw std::invalid_argument("PDE domain has zero or negative width: [" + std::to_string(x_lo) +
                                ", " + std::to_string(x_hi) + "]");
  }
  if (!(horizon > 0.0)) throw std::invalid_argument("PDE horizon must be positive");
  if (!diffusion) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("lambda must lie in [0, 1]");
    if (lambda > 0.0 && x_lo < 0.0) {
      throw std::invalid_argument("lambda > 0 requires a nonnegative domain (x_lo >= 0)");
    }
  }
}

double PdeSpec::drift_at(double t, double x) const { return drift ? drift(t, x) : r * x; }

double PdeSpec::diffusion_at(double t, double x) const {
  if (diffusion) return diffusion(t, x);
  if (lambda == 0.0) return sigma;
  return sigma * std::pow(std::max(x, 0.0), lambda);
}

std::vector<double> space_grid(const PdeSpec& spec, int nx) {
  if (nx < 3) throw std::invalid_argument("nx must be at least 3");
  std::vector<double> x(static_cast<std::size_t>(nx));
  const double dx = (spec.x_hi - spec.x_lo) / (nx - 1);
  for (int j = 0; j < nx; ++j) x[static_cast<std::size_t>(j)] = spec.x_lo + j * dx;
  x.back() = spec.x_hi;
  return x;
}

GridSolution march(const PdeSpec& spec, std::span<const double> terminal,
                   std::span<const double> tau_nodes, double theta,
                   std::span<const std::size_t> keep_rows) {
  spec.validate();
  if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("theta must lie in [0, 1]");
  if (tau_nodes.size() < 2 || tau_nodes.front() != 0.0) {
    throw std::invalid_argument("time grid needs at least two nodes starting at tau = 0");
  }
  for (std::size_t n = 1; n < tau_nodes.size(); ++n) {
    if (!(tau_nodes[n] > tau_nodes[n - 1])) throw std::invalid_argument("time grid must increase");
  }
  const int nx = static_cast<int>(terminal.size());
  GridSolution out;
  out.x = space_grid(spec, nx);
  check_terminal(terminal, out.x.size());
  const double dx = out.x[1] - out.x[0];
  const std::size_t n = out.x.size();

  std::vector<bool> keep(tau_nodes.size(), keep_rows.empty());
  for (std::size_t idx : keep_rows) {
    if (idx >= tau_nodes.size()) throw std::invalid_argument("kept row index beyond time grid");
    keep[idx] = true;
  }
  auto store = [&](std::size_t step, const std::vector<double>& u) {
    if (!keep[step]) return;
    out.tau.push_back(tau_nodes[step]);
    out.values.insert(out.values.end(), u.begin(), u.end());
  };

  std::vector<double> u(terminal.begin(), terminal.end());
  store(0, u);

  const bool varying = time_dependent(spec);
  Tridiagonal op_now(n), op_next(n), lhs(n);
  assemble(spec, out.x, dx, spec.horizon - tau_nodes[0], op_now);
  std::vector<double> rhs(n), scratch;
  for (std::size_t step = 1; step < tau_nodes.size(); ++step) {
    const double dt = tau_nodes[step] - tau_nodes[step - 1];
    if (varying) {
      assemble(spec, out.x, dx, spec.horizon - tau_nodes[step], op_next);
    } else if (step == 1) {
      op_next = op_now;
    }
    const double ex = (1.0 - theta) * dt;
    for (std::size_t j = 0; j < n; ++j) {
      double v = u[j] + ex * op_now.diag[j] * u[j];
      if (j > 0) v += ex * op_now.lower[j] * u[j - 1];
      if (j + 1 < n) v += ex * op_now.upper[j] * u[j + 1];
      rhs[j] = v;
    }
    const double im = theta * dt;
    for (std::size_t j = 0; j < n; ++j) {
      lhs.lower[j] = -im * op_next.lower[j];
      lhs.diag[j] = 1.0 - im * op_next.diag[j];
      lhs.upper[j] = -im * op_next.upper[j];
    }
    solve_tridiagonal(lhs, rhs, scratch);
    u.swap(rhs);
    if (varying) std::swap(op_now, op_next);
    store(step, u);
  }
  return out;
}

GridSolution solve_backward(const PdeSpec& spec, std::span<const double> terminal,
                            const GridParams& params) {
  if (params.nt < 1) throw std::invalid_argument("nt must be at least 1");
  std::vector<double> tau(static_cast<std::size_t>(params.nt) + 1);
  for (int k = 0; k <= params.nt; ++k) tau[static_cast<std::size_t>(k)] = spec.horizon * k / params.nt;
  return march(spec, terminal, tau, params.theta);
}

GridSolution solve_backward(const PdeSpec& spec, const std::function<double(double)>& terminal,
                            const GridParams& params) {
  spec.validate();
  const auto x = space_grid(spec, params.nx);
  std::vector<double> f(x.size());
  std::transform(x.begin(), x.end(), f.begin(), terminal);
  return solve_backward(spec, f, params);
}

namespace {
PdeSpec discounted_spec(double lambda, double sigma, double x_lo, double x_hi, double horizon) {
  PdeSpec spec;
  spec.lambda = lambda;
  spec.sigma = sigma;
  spec.r = 0.0;
  spec.x_lo = x_lo;
  spec.x_hi = x_hi;
  spec.horizon = horizon;
  return spec;
}
}  // namespace

GridSolution solve_discounted(double lambda, double sigma, std::span<const double> terminal,
                              double x_lo, double x_hi, double horizon, const GridParams& params) {
  return solve_backward(discounted_spec(lambda, sigma, x_lo, x_hi, horizon), terminal, params);
}

GridSolution solve_discounted(double lambda, double sigma,
                              const std::function<double(double)>& terminal, double x_lo,
                              double x_hi, double horizon, const GridParams& params) {
  return solve_backward(discounted_spec(lambda, sigma, x_lo, x_hi, horizon), terminal, params);
}

GridSolution undiscount(GridSolution solution, double r) {
  const std::size_t nx = solution.nx();
  for (std::size_t it = 0; it < solution.nt(); ++it) {
    const double factor = std::exp(-r * solution.tau[it]);
    for (std::size_t j = 0; j < nx; ++j) solution.values[it * nx + j] *= factor;
  }
  return solution;
}

double consistency_gap(const PdeSpec& spec, const std::function<double(double)>& terminal,
                       const GridParams& params) {
  const auto full = solve_backward(spec, terminal, params);
  const auto disc = undiscount(
      solve_discounted(spec.lambda, spec.sigma, terminal, spec.x_lo, spec.x_hi, spec.horizon, params),
      spec.r);
  return relative_linf(disc.values, full.values);
}

double relative_linf(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_linf: size mismatch");
  double diff = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff = std::max(diff, std::abs(a[k] - b[k]));
    scale = std::max(scale, std::abs(b[k]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

double closed_form_heat(double sigma, const std::function<double(double)>& terminal, double tau,
                        double x, double lo, double hi) {
  if (tau < 0.0) throw std::invalid_argument("closed_form_heat: tau must be nonnegative");
  if (tau == 0.0) return (x >= lo && x <= hi) ? terminal(x) : 0.0;
  const double s = sigma * std::sqrt(tau);
  const double a = std::max(lo, x - 12.0 * s);
  const double b = std::min(hi, x + 12.0 * s);
  if (!(b > a)) return 0.0;
  const double norm = 1.0 / (s * std::sqrt(2.0 * std::numbers::pi));
  auto integrand = [&](double y) {
    const double z = (y - x) / s;
    return terminal(y) * norm * std::exp(-0.5 * z * z);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, a, b, 25, 1e-13);
}

double closed_form_heat(double sigma, const SampledFunction& terminal, double tau, double x) {
  if (tau < 0.0) throw std::invalid_argument("closed_form_heat: tau must be nonnegative");
  if (tau == 0.0) return terminal(x);
  const double s = sigma * std::sqrt(tau);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const std::size_t n = terminal.values.size();
  if (n < 2) return 0.0;
  // Only segments within 12 standard deviations contribute.
  const double reach = 12.0 * s;
  const auto first = static_cast<std::ptrdiff_t>(std::floor((x - reach - terminal.x0) / terminal.dx));
  const auto last = static_cast<std::ptrdiff_t>(std::ceil((x + reach - terminal.x0) / terminal.dx));
  const std::ptrdiff_t k0 = std::max<std::ptrdiff_t>(first, 0);
  const std::ptrdiff_t k1 = std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(n) - 1);
  double acc = 0.0;
  for (std::ptrdiff_t k = k0; k < k1; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double y0 = terminal.x_at(uk);
    const double y1 = terminal.x_at(uk + 1);
    const double f0 = terminal.values[uk];
    const double f1 = terminal.values[uk + 1];
    const double slope = (f1 - f0) / (y1 - y0);
    // f(y) = f0 + slope (y - y0) = (f0 + slope (x - y0)) + slope s z
    const double level = f0 + slope * (x - y0);
    const double z0 = (y0 - x) / s;
    const double z1 = (y1 - x) / s;
    const double mass = 0.5 * (std::erfc(-z1 * inv_sqrt2) - std::erfc(-z0 * inv_sqrt2));
    const double pdf_diff = inv_sqrt2pi * (std::exp(-0.5 * z0 * z0) - std::exp(-0.5 * z1 * z1));
    acc += level * mass + slope * s * pdf_diff;
  }
  return acc;
}

}  // namespace dlet
