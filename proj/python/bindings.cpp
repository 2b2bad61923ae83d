#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dlet/diffusionlets.hpp"
#include "dlet/error_structure.hpp"
#include "dlet/feynman_kac.hpp"
#include "dlet/pde_solver.hpp"
#include "dlet/serialization.hpp"
#include "dlet/validation.hpp"
#include "dlet/wavelets.hpp"

namespace py = pybind11;
using namespace dlet;

namespace {

using Fn = std::function<double(double)>;
using release = py::call_guard<py::gil_scoped_release>;

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

py::dict interval_dict(const Interval& i) {
  py::dict d;
  d["lo"] = i.lo;
  d["hi"] = i.hi;
  d["empty"] = i.empty;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Diffusionlet PDE solutions and wavelet-based error propagation";
  m.attr("SCHEMA") = kSchemaVersion;

  // wavelets
  py::class_<FilterPair>(m, "FilterPair")
      .def_readonly("order", &FilterPair::order)
      .def_readonly("h", &FilterPair::h)
      .def_readonly("g", &FilterPair::g);
  py::class_<FilterResiduals>(m, "FilterResiduals")
      .def_readonly("sum", &FilterResiduals::sum)
      .def_readonly("orthonormality", &FilterResiduals::orthonormality)
      .def_readonly("vanishing_moments", &FilterResiduals::vanishing_moments)
      .def_readonly("mirror", &FilterResiduals::mirror)
      .def("max", &FilterResiduals::max);
  m.def("daubechies_filter", &daubechies_filter, py::arg("order"));
  m.def("filter_residuals", &filter_residuals, py::arg("filter"));
  m.def("father_moment", &father_moment, py::arg("filter"), py::arg("m"));

  py::class_<WaveletBasis>(m, "WaveletBasis")
      .def_readonly("filter", &WaveletBasis::filter)
      .def_readonly("father_mean", &WaveletBasis::father_mean)
      .def_property_readonly("order", &WaveletBasis::order)
      .def_property_readonly("support_length", &WaveletBasis::support_length)
      .def("father", [](const WaveletBasis& b, double x) { return b.father(x); }, py::arg("x"))
      .def("mother", [](const WaveletBasis& b, double x) { return b.mother(x); }, py::arg("x"))
      .def("father_samples", [](const WaveletBasis& b) { return to_vector(b.father.samples()); })
      .def("mother_samples", [](const WaveletBasis& b) { return to_vector(b.mother.samples()); })
      .def_property_readonly("step", [](const WaveletBasis& b) { return b.father.step(); });
  m.def("make_basis", &make_basis, py::arg("order"), py::arg("resolution") = 10, release());

  py::class_<WaveletExpansion>(m, "WaveletExpansion")
      .def_static("zeros", &WaveletExpansion::zeros, py::arg("order"), py::arg("levels"), py::arg("cells"),
                  py::arg("x_lo") = 0.0)
      .def_readwrite("order", &WaveletExpansion::order)
      .def_readwrite("levels", &WaveletExpansion::levels)
      .def_readwrite("cells", &WaveletExpansion::cells)
      .def_readwrite("x_lo", &WaveletExpansion::x_lo)
      .def_readwrite("alpha", &WaveletExpansion::alpha)
      .def_readwrite("beta", &WaveletExpansion::beta)
      .def_property_readonly("x_hi", &WaveletExpansion::x_hi)
      .def("term_count", &WaveletExpansion::term_count)
      .def("energy", &WaveletExpansion::energy)
      .def("validate", &WaveletExpansion::validate)
      .def("to_json", [](const WaveletExpansion& e) { return expansion_to_json(e).dump(); })
      .def_static("from_json", [](const std::string& text) { return expansion_from_json(nlohmann::json::parse(text)); });

  m.def("sample_points", &sample_points, py::arg("basis"), py::arg("levels"), py::arg("cells"), py::arg("x_lo") = 0.0);
  m.def(
      "fwt_decompose",
      [](const std::vector<double>& samples, const FilterPair& filter, int levels, double x_lo) {
        return fwt_decompose(samples, filter, levels, x_lo);
      },
      py::arg("samples"), py::arg("filter"), py::arg("levels"), py::arg("x_lo") = 0.0);
  m.def("fwt_reconstruct", &fwt_reconstruct, py::arg("expansion"), py::arg("filter"), py::arg("sample_count"));
  m.def(
      "decompose",
      [](const Fn& f, const WaveletBasis& basis, int levels, int cells, double x_lo) {
        return decompose_function(f, basis, levels, cells, x_lo);
      },
      py::arg("f"), py::arg("basis"), py::arg("levels"), py::arg("cells"), py::arg("x_lo") = 0.0);
  m.def("evaluate_expansion", &evaluate_expansion, py::arg("expansion"), py::arg("basis"), py::arg("x"));

  // pde_solver
  py::class_<GridSolution>(m, "GridSolution")
      .def_readonly("tau", &GridSolution::tau)
      .def_readonly("x", &GridSolution::x)
      .def_readonly("values", &GridSolution::values)
      .def_property_readonly("nx", &GridSolution::nx)
      .def_property_readonly("nt", &GridSolution::nt)
      .def("at", &GridSolution::at, py::arg("it"), py::arg("ix"))
      .def("interpolate", &GridSolution::interpolate, py::arg("tau"), py::arg("x"));
  m.def(
      "solve_discounted",
      [](double lambda, double sigma, const Fn& terminal, double x_lo, double x_hi, double horizon, int nx, int nt,
         double theta) { return solve_discounted(lambda, sigma, terminal, x_lo, x_hi, horizon, {nx, nt, theta}); },
      py::arg("lambda_"), py::arg("sigma"), py::arg("terminal"), py::arg("x_lo"), py::arg("x_hi"), py::arg("horizon"),
      py::arg("nx") = 1025, py::arg("nt") = 512, py::arg("theta") = 0.5);
  m.def(
      "closed_form_heat",
      [](double sigma, const Fn& f, double tau, double x, double lo, double hi) {
        return closed_form_heat(sigma, f, tau, x, lo, hi);
      },
      py::arg("sigma"), py::arg("terminal"), py::arg("tau"), py::arg("x"), py::arg("lo") = -1e300,
      py::arg("hi") = 1e300);

  // feynman_kac; Python payoffs run on the calling thread.
  py::class_<McEstimate>(m, "McEstimate")
      .def_readonly("mean", &McEstimate::mean)
      .def_readonly("std_error", &McEstimate::std_error)
      .def_readonly("n_paths", &McEstimate::n_paths)
      .def_readonly("seed", &McEstimate::seed);
  m.def(
      "mc_cev",
      [](const Fn& payoff, double x0, double tau, double r, double sigma, double lambda, long long n_paths,
         int n_steps, std::uint64_t seed) {
        return mc_expectation(SdeSpec::cev(r, sigma, lambda), payoff, x0, tau, n_paths, n_steps, seed, 1);
      },
      py::arg("payoff"), py::arg("x0"), py::arg("tau"), py::arg("r"), py::arg("sigma"), py::arg("lambda_"),
      py::arg("n_paths") = 10000, py::arg("n_steps") = 256, py::arg("seed") = 0);
  m.def(
      "mc_cir",
      [](const Fn& payoff, double x0, double tau, double b, double sigma, long long n_paths, int n_steps,
         std::uint64_t seed) {
        return mc_expectation(cir_preset(b, sigma), payoff, x0, tau, n_paths, n_steps, seed, 1);
      },
      py::arg("payoff"), py::arg("x0"), py::arg("tau"), py::arg("b"), py::arg("sigma"), py::arg("n_paths") = 10000,
      py::arg("n_steps") = 256, py::arg("seed") = 0);

  // diffusionlets
  py::class_<DiffusionletCache>(m, "DiffusionletCache")
      .def_readonly("lambda_", &DiffusionletCache::lambda)
      .def_readonly("sigma", &DiffusionletCache::sigma)
      .def_property_readonly("mode", [](const DiffusionletCache& c) { return to_string(c.mode); })
      .def_property_readonly("tau_max", &DiffusionletCache::tau_max)
      .def_property_readonly("basis_order", &DiffusionletCache::basis_order)
      .def_property_readonly("x_range",
                             [](const DiffusionletCache& c) { return std::make_pair(*c.grid.x_lo, *c.grid.x_hi); })
      .def("time_scale", &DiffusionletCache::time_scale, py::arg("level"));
  m.def(
      "build_cache",
      [](double lambda, double sigma, const WaveletBasis& basis, double tau_max, const std::string& mode,
         const WaveletExpansion* expansion, std::vector<double> taus, int resolution, int tau_nodes) {
        CacheGrid grid;
        grid.resolution = resolution;
        grid.tau_nodes = tau_nodes;
        const CacheMode cm = parse_cache_mode(mode);
        ExactRange range;
        if (cm == CacheMode::exact) {
          if (expansion == nullptr) throw std::invalid_argument("exact mode needs an expansion");
          range = ExactRange::covering(*expansion, std::move(taus));
        }
        py::gil_scoped_release unlocked;
        return build_cache(lambda, sigma, basis, tau_max, grid, cm, range);
      },
      py::arg("lambda_"), py::arg("sigma"), py::arg("basis"), py::arg("tau_max"), py::arg("mode") = "fast",
      py::arg("expansion") = nullptr, py::arg("taus") = std::vector<double>{}, py::arg("resolution") = 5,
      py::arg("tau_nodes") = 400);
  m.def("save_cache", &save_cache, py::arg("cache"), py::arg("path"));
  m.def("load_cache", &load_cache, py::arg("path"));
  m.def("eval_father", &eval_father, py::arg("cache"), py::arg("k"), py::arg("tau"), py::arg("x"));
  m.def("eval_mother", &eval_mother, py::arg("cache"), py::arg("level"), py::arg("k"), py::arg("tau"), py::arg("x"));
  m.def("reconstruct", &reconstruct, py::arg("cache"), py::arg("expansion"), py::arg("tau"), py::arg("x"));
  m.def(
      "truncated_reconstruct",
      [](const DiffusionletCache& c, const WaveletExpansion& e, double eps, double tau, double x) {
        const auto t = truncated_reconstruct(c, e, eps, tau, x);
        return std::make_pair(t.value, t.terms_used);
      },
      py::arg("cache"), py::arg("expansion"), py::arg("epsilon"), py::arg("tau"), py::arg("x"));
  m.def(
      "essential_support",
      [](const DiffusionletCache& c, double eps, double tau) {
        const auto es = essential_support(c, eps, tau);
        py::dict d;
        d["interval"] = interval_dict(es.interval);
        d["father_interval"] = interval_dict(es.father_interval);
        py::list levels;
        for (const auto& i : es.level_intervals) levels.append(interval_dict(i));
        d["level_intervals"] = levels;
        d["k_per_level"] = es.k_per_level;
        d["father_k"] = es.father_k;
        d["max_level"] = es.max_level;
        d["level_bound_found"] = es.level_bound_found;
        return d;
      },
      py::arg("cache"), py::arg("epsilon"), py::arg("tau"));

  // error_structure
  py::class_<ErrorStructureSpec>(m, "ErrorStructureSpec")
      .def(py::init([](double c, double eta) {
             ErrorStructureSpec s;
             s.c = c;
             s.eta = eta;
             s.validate();
             return s;
           }),
           py::arg("c") = 1.0, py::arg("eta") = 0.0)
      .def_readonly("c", &ErrorStructureSpec::c)
      .def_readonly("eta", &ErrorStructureSpec::eta)
      .def("gamma_father", &ErrorStructureSpec::gamma_father, py::arg("k"))
      .def("gamma_mother", &ErrorStructureSpec::gamma_mother, py::arg("i"), py::arg("k"));
  m.def("gamma_terminal", &gamma_terminal, py::arg("expansion"), py::arg("spec"), py::arg("basis"), py::arg("x"));
  m.def("gamma_solution", &gamma_solution, py::arg("cache"), py::arg("expansion"), py::arg("spec"), py::arg("tau"),
        py::arg("x"));
  m.def(
      "covariance_solution",
      [](const DiffusionletCache& c, const WaveletExpansion& e, const ErrorStructureSpec& s,
         std::pair<double, double> p, std::pair<double, double> q) {
        return covariance_solution(c, e, s, {p.first, p.second}, {q.first, q.second});
      },
      py::arg("cache"), py::arg("expansion"), py::arg("spec"), py::arg("p"), py::arg("q"));
  m.def(
      "covariance_matrix",
      [](const DiffusionletCache& c, const WaveletExpansion& e, const ErrorStructureSpec& s,
         const std::vector<std::pair<double, double>>& pts) {
        std::vector<SpacetimePoint> points;
        for (const auto& [tau, x] : pts) points.push_back({tau, x});
        const auto flat = covariance_matrix(c, e, s, points);
        std::vector<std::vector<double>> rows(points.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
          rows[r].assign(flat.begin() + static_cast<std::ptrdiff_t>(r * points.size()),
                         flat.begin() + static_cast<std::ptrdiff_t>((r + 1) * points.size()));
        }
        return rows;
      },
      py::arg("cache"), py::arg("expansion"), py::arg("spec"), py::arg("points"));
  m.def(
      "sharp_second_moment",
      [](const DiffusionletCache& c, const WaveletExpansion& e, const ErrorStructureSpec& s, double tau, double x,
         long long n_draws, std::uint64_t seed) { return sharp_second_moment(c, e, s, tau, x, n_draws, seed); },
      py::arg("cache"), py::arg("expansion"), py::arg("spec"), py::arg("tau"), py::arg("x"), py::arg("n_draws"),
      py::arg("seed") = 0, release());

  // validation
  m.def("suite_names", &suite_names);
  m.def(
      "run_suite_json",
      [](const std::string& name, std::uint64_t seed) {
        SuiteOptions o;
        o.seed = seed;
        SuiteReport r;
        {
          py::gil_scoped_release unlocked;
          r = run_suite(name, o);
        }
        return r.to_json().dump();
      },
      py::arg("name"), py::arg("seed") = SuiteOptions{}.seed);
}
