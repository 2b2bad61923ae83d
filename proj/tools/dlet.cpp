// dlet: command-line front end for the diffusionlet library.
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dlet/diffusionlets.hpp"
#include "dlet/error_structure.hpp"
#include "dlet/pde_solver.hpp"
#include "dlet/serialization.hpp"
#include "dlet/validation.hpp"
#include "dlet/wavelets.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 20240601;
  std::string out = ".";
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value file; flags override its entries");
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--format", c.format, "data format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

/// Terminal condition presets shared by decompose and solve.
struct FunctionPreset {
  std::string name = "gaussian_bump";
  double center = 8.0;
  double width = 1.0;
  double strike = 1.0;
  double left = 0.0;
  double right = 1.0;
  double value = 1.0;

  void add_to(CLI::App* cmd, const std::string& flag) {
    cmd->add_option(flag, name, "gaussian_bump, call_payoff, indicator, constant, linear")
        ->capture_default_str();
    cmd->add_option("--center", center, "bump centre")->capture_default_str();
    cmd->add_option("--width", width, "bump standard deviation")->capture_default_str();
    cmd->add_option("--strike", strike, "call strike K")->capture_default_str();
    cmd->add_option("--left", left, "indicator left end")->capture_default_str();
    cmd->add_option("--right", right, "indicator right end")->capture_default_str();
    cmd->add_option("--value", value, "constant value")->capture_default_str();
  }

  [[nodiscard]] std::function<double(double)> function() const {
    if (name == "gaussian_bump") {
      return [c = center, w = width](double x) { return std::exp(-0.5 * (x - c) * (x - c) / (w * w)); };
    }
    if (name == "call_payoff") return [k = strike](double x) { return std::max(x - k, 0.0); };
    if (name == "indicator") return [lo = left, hi = right](double x) { return x >= lo && x < hi ? 1.0 : 0.0; };
    if (name == "constant") return [v = value](double) { return v; };
    if (name == "linear") return [](double x) { return x; };
    throw std::invalid_argument("unknown function preset '" + name + "'");
  }
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number '" + item + "' in " + what);
    }
  }
  if (out.empty()) throw std::invalid_argument(what + " is empty");
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("point count must be >= 1");
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) xs[static_cast<std::size_t>(j)] = n == 1 ? lo : lo + (hi - lo) * j / (n - 1);
  return xs;
}

/// Resolved option values of a subcommand, numbers kept numeric.
json resolved_config(const CLI::App* cmd) {
  json cfg = json::object();
  for (const CLI::Option* opt : cmd->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::string text;
    if (opt->count() > 0) {
      text = opt->results().back();
    } else {
      text = opt->get_default_str();
    }
    const char* first = text.data();
    const char* last = first + text.size();
    long long i = 0;
    double v = 0.0;
    if (auto r = std::from_chars(first, last, i); !text.empty() && r.ec == std::errc{} && r.ptr == last) {
      cfg[name] = i;
    } else if (auto d = std::from_chars(first, last, v);
               !text.empty() && d.ec == std::errc{} && d.ptr == last && std::isfinite(v)) {
      cfg[name] = v;
    } else {
      cfg[name] = text;
    }
  }
  return cfg;
}

class Run {
 public:
  Run(std::string command, const CLI::App* cmd, const Common& common)
      : command_(std::move(command)), start_(std::chrono::steady_clock::now()), common_(common) {
    meta_ = json{{"schema", dlet::kSchemaVersion}, {"command", command_}, {"config", resolved_config(cmd)}};
    fs::create_directories(common_.out);
  }

  json& meta() { return meta_; }
  [[nodiscard]] bool csv() const { return common_.format == "csv"; }
  [[nodiscard]] fs::path path(const std::string& file) const { return fs::path(common_.out) / file; }

  std::ofstream open(const std::string& file) const {
    std::ofstream os(path(file), std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path(file).string());
    return os;
  }

  void add_output(const std::string& file) { meta_["outputs"].push_back(file); }

  /// Write <command>.json with the run metadata and timing.
  void finish(json timing = json::object()) {
    timing["wall_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    meta_["timing"] = std::move(timing);
    auto os = open(command_ + ".json");
    os << meta_.dump(2) << '\n';
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  Common common_;
  json meta_;
};

dlet::WaveletExpansion read_expansion(const std::string& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open expansion " + file);
  json doc;
  try {
    is >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed JSON in " + file + ": " + e.what());
  }
  return dlet::expansion_from_json(doc.contains("expansion") ? doc.at("expansion") : doc);
}

// --- commands ------------------------------------------------------------------

struct BasisArgs {
  int order = 4;
  int resolution = 10;
};

int cmd_basis(const CLI::App* cmd, const Common& common, const BasisArgs& a) {
  Run run("basis", cmd, common);
  const auto basis = dlet::make_basis(a.order, a.resolution);
  const auto res = dlet::filter_residuals(basis.filter);
  run.meta()["filter"] = {{"h", basis.filter.h}, {"g", basis.filter.g}};
  run.meta()["residuals"] = {{"sum", res.sum},
                             {"orthonormality", res.orthonormality},
                             {"vanishing_moments", res.vanishing_moments},
                             {"mirror", res.mirror}};
  run.meta()["support"] = {0.0, basis.support_length()};
  run.meta()["father_l2_norm"] = basis.father.l2_norm();
  run.meta()["mother_l2_norm"] = basis.mother.l2_norm();
  if (run.csv()) {
    auto f = run.open("father.csv");
    dlet::write_dyadic_csv(f, basis.father);
    auto m = run.open("mother.csv");
    dlet::write_dyadic_csv(m, basis.mother);
    run.add_output("father.csv");
    run.add_output("mother.csv");
  } else {
    auto samples = [](const dlet::DyadicFunction& d) {
      return json{{"lo", d.lo()}, {"step", d.step()},
                  {"values", std::vector<double>(d.samples().begin(), d.samples().end())}};
    };
    run.meta()["father"] = samples(basis.father);
    run.meta()["mother"] = samples(basis.mother);
  }
  run.finish();
  return 0;
}

struct DecomposeArgs {
  FunctionPreset input;
  std::string csv;
  int order = 4;
  int levels = 4;
  int cells = 16;
  double x_lo = 0.0;
};

int cmd_decompose(const CLI::App* cmd, const Common& common, const DecomposeArgs& a) {
  Run run("decompose", cmd, common);
  const auto basis = dlet::make_basis(a.order);
  std::vector<double> samples;
  std::vector<double> xs;
  if (!a.csv.empty()) {
    std::ifstream is(a.csv);
    if (!is) throw std::runtime_error("cannot open " + a.csv);
    for (const auto& [x, v] : dlet::read_xy_csv(is)) {
      xs.push_back(x);
      samples.push_back(v);
    }
  } else {
    xs = dlet::sample_points(basis, a.levels, a.cells, a.x_lo);
    const auto f = a.input.function();
    for (double x : xs) samples.push_back(f(x));
  }
  const auto e = dlet::fwt_decompose(samples, basis.filter, a.levels, a.x_lo);
  const auto back = dlet::fwt_reconstruct(e, basis.filter, samples.size());
  double diff = 0.0, norm = 0.0, pointwise = 0.0;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    diff += (back[n] - samples[n]) * (back[n] - samples[n]);
    norm += samples[n] * samples[n];
  }
  if (a.csv.empty()) {
    for (std::size_t n = 0; n < xs.size(); ++n) {
      pointwise = std::max(pointwise, std::abs(dlet::evaluate_expansion(e, basis, xs[n]) - samples[n]));
    }
  }
  double max_beta = 0.0;
  for (const auto& row : e.beta) {
    for (double b : row) max_beta = std::max(max_beta, std::abs(b));
  }
  run.meta()["expansion"] = dlet::expansion_to_json(e);
  run.meta()["report"] = {{"samples", samples.size()},
                          {"roundtrip_relative_l2", norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff)},
                          {"max_abs_beta", max_beta},
                          {"energy", e.energy()}};
  if (a.csv.empty()) run.meta()["report"]["max_pointwise_error"] = pointwise;
  {
    auto os = run.open("expansion.json");
    os << dlet::expansion_to_json(e).dump(2) << '\n';
    run.add_output("expansion.json");
  }
  run.finish();
  return 0;
}

struct SolveArgs {
  FunctionPreset terminal;
  std::string model = "cev";
  bool discounted = false;
  double b = 0.5;
  double lambda = 0.0;
  double sigma = 1.0;
  double r = 0.0;
  double x_lo = -4.0;
  double x_hi = 20.0;
  double horizon = 1.0;
  int nx = 1025;
  int nt = 512;
  double theta = 0.5;
  int keep_every = 64;
};

int cmd_solve(const CLI::App* cmd, const Common& common, const SolveArgs& a) {
  Run run("solve", cmd, common);
  dlet::PdeSpec spec;
  spec.lambda = a.lambda;
  spec.sigma = a.sigma;
  spec.r = a.discounted ? 0.0 : a.r;
  spec.x_lo = a.x_lo;
  spec.x_hi = a.x_hi;
  spec.horizon = a.horizon;
  if (a.model == "cir") {
    spec.lambda = 0.5;
    spec.drift = [b = a.b](double, double x) { return -b * x; };
    spec.diffusion = [s = a.sigma](double, double x) { return s * std::sqrt(std::max(x, 0.0)); };
  } else if (a.model != "cev") {
    throw std::invalid_argument("unknown model '" + a.model + "' (cev or cir)");
  }
  const auto sol = dlet::solve_backward(spec, a.terminal.function(), dlet::GridParams{a.nx, a.nt, a.theta});
  dlet::GridSolution kept;
  kept.x = sol.x;
  const std::size_t every = static_cast<std::size_t>(std::max(1, a.keep_every));
  for (std::size_t it = 0; it < sol.nt(); ++it) {
    if (it % every != 0 && it + 1 != sol.nt()) continue;
    kept.tau.push_back(sol.tau[it]);
    const auto row = sol.row(it);
    kept.values.insert(kept.values.end(), row.begin(), row.end());
  }
  run.meta()["grid"] = {{"nx", sol.nx()}, {"nt", sol.nt() - 1}, {"rows_written", kept.nt()}};
  if (run.csv()) {
    auto os = run.open("solution.csv");
    dlet::write_grid_csv(os, kept);
    run.add_output("solution.csv");
  } else {
    run.meta()["solution"] = dlet::grid_to_json(kept);
  }
  run.finish();
  return 0;
}

struct CacheArgs {
  double lambda = 0.0;
  double sigma = 1.0;
  int order = 4;
  int basis_resolution = 10;
  int grid_resolution = 5;
  int tau_nodes = 400;
  double tau_min = 1e-5;
  double tau_max = 16.0;
  std::string mode = "fast";
  std::string expansion;
  std::string taus = "0.25";
  std::string file = "cache.bin";
};

int cmd_cache(const CLI::App* cmd, const Common& common, const CacheArgs& a) {
  Run run("cache", cmd, common);
  const auto basis = dlet::make_basis(a.order, a.basis_resolution);
  dlet::CacheGrid grid;
  grid.resolution = a.grid_resolution;
  grid.tau_nodes = a.tau_nodes;
  grid.tau_min = a.tau_min;
  const auto mode = dlet::parse_cache_mode(a.mode);
  dlet::ExactRange range;
  if (mode == dlet::CacheMode::exact) {
    if (a.expansion.empty()) throw std::invalid_argument("exact mode needs --expansion to bound the index ranges");
    range = dlet::ExactRange::covering(read_expansion(a.expansion), parse_list(a.taus, "--taus"));
  }
  const auto cache = dlet::build_cache(a.lambda, a.sigma, basis, a.tau_max, grid, mode, range);
  dlet::save_cache(cache, run.path(a.file).string());
  run.add_output(a.file);
  run.meta()["cache"] = {{"x_extent", {cache.father_surface.x.front(), cache.father_surface.x.back()}},
                         {"nx", cache.father_surface.nx()},
                         {"tau_snapshots", cache.father_surface.nt()},
                         {"tau_max", cache.tau_max()},
                         {"exact_surfaces", cache.exact_surfaces.size()},
                         {"format_version", dlet::DiffusionletCache::kFormatVersion}};
  run.finish();
  return 0;
}

struct QueryArgs {
  std::string cache = "cache.bin";
  std::string expansion = "expansion.json";
  std::string taus = "0,0.25";
  double x_min = 0.0;
  double x_max = 16.0;
  int points = 129;
  double epsilon = 0.0;
  double gamma_c = 1.0;
  double gamma_eta = 0.0;
  std::string pairs;
};

void add_query(CLI::App* cmd, QueryArgs& q) {
  cmd->add_option("--cache", q.cache, "cache bundle from 'dlet cache'")->capture_default_str();
  cmd->add_option("--expansion", q.expansion, "expansion JSON from 'dlet decompose'")->capture_default_str();
  cmd->add_option("--taus", q.taus, "comma-separated times to maturity")->capture_default_str();
  cmd->add_option("--x-min", q.x_min)->capture_default_str();
  cmd->add_option("--x-max", q.x_max)->capture_default_str();
  cmd->add_option("--points", q.points, "x points per time")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_gamma(CLI::App* cmd, QueryArgs& q) {
  cmd->add_option("--gamma-c", q.gamma_c, "weight scale c")->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--gamma-eta", q.gamma_eta, "weight decay: gamma(i,k) = c 2^{-eta i}")->capture_default_str();
}

int cmd_reconstruct(const CLI::App* cmd, const Common& common, const QueryArgs& q) {
  Run run("reconstruct", cmd, common);
  const auto cache = dlet::load_cache(q.cache);
  const auto e = read_expansion(q.expansion);
  const auto taus = parse_list(q.taus, "--taus");
  const auto xs = linspace(q.x_min, q.x_max, q.points);
  dlet::GridSolution out{taus, xs, {}};
  std::size_t terms = 0;
  for (double tau : taus) {
    for (double x : xs) {
      if (q.epsilon > 0.0) {
        const auto t = dlet::truncated_reconstruct(cache, e, q.epsilon, tau, x);
        out.values.push_back(t.value);
        terms += t.terms_used;
      } else {
        out.values.push_back(dlet::reconstruct(cache, e, tau, x));
      }
    }
  }
  if (q.epsilon > 0.0) run.meta()["terms_used"] = terms;
  run.meta()["mode"] = dlet::to_string(cache.mode);
  if (run.csv()) {
    auto os = run.open("reconstruction.csv");
    dlet::write_grid_csv(os, out);
    run.add_output("reconstruction.csv");
  } else {
    run.meta()["reconstruction"] = dlet::grid_to_json(out);
  }
  run.finish();
  return 0;
}

dlet::ErrorStructureSpec gamma_spec(const QueryArgs& q) {
  dlet::ErrorStructureSpec spec;
  spec.c = q.gamma_c;
  spec.eta = q.gamma_eta;
  spec.validate();
  return spec;
}

int cmd_variance(const CLI::App* cmd, const Common& common, const QueryArgs& q) {
  Run run("variance", cmd, common);
  const auto cache = dlet::load_cache(q.cache);
  const auto e = read_expansion(q.expansion);
  const auto field = dlet::variance_field(cache, e, gamma_spec(q), parse_list(q.taus, "--taus"),
                                          linspace(q.x_min, q.x_max, q.points));
  if (run.csv()) {
    auto os = run.open("variance.csv");
    dlet::write_variance_csv(os, field);
    run.add_output("variance.csv");
  } else {
    run.meta()["variance"] = {{"tau", field.tau}, {"x", field.x}, {"values", field.values}};
  }
  run.finish();
  return 0;
}

int cmd_covariance(const CLI::App* cmd, const Common& common, const QueryArgs& q) {
  Run run("covariance", cmd, common);
  const auto cache = dlet::load_cache(q.cache);
  const auto e = read_expansion(q.expansion);
  std::vector<dlet::SpacetimePoint> points;
  if (!q.pairs.empty()) {
    const auto flat = parse_list(q.pairs, "--points-list");
    if (flat.size() % 2 != 0) throw std::invalid_argument("--points-list needs tau,x pairs");
    for (std::size_t n = 0; n < flat.size(); n += 2) points.push_back({flat[n], flat[n + 1]});
  } else {
    for (double tau : parse_list(q.taus, "--taus")) {
      for (double x : linspace(q.x_min, q.x_max, q.points)) points.push_back({tau, x});
    }
  }
  const auto matrix = dlet::covariance_matrix(cache, e, gamma_spec(q), points);
  if (run.csv()) {
    auto os = run.open("covariance.csv");
    dlet::write_covariance_csv(os, points, matrix);
    run.add_output("covariance.csv");
  } else {
    json pts = json::array();
    for (const auto& p : points) pts.push_back({p.tau, p.x});
    run.meta()["covariance"] = {{"points", pts}, {"matrix", matrix}};
  }
  run.finish();
  return 0;
}

int cmd_validate(const CLI::App* cmd, const Common& common, const std::string& suite, unsigned threads) {
  Run run("validate", cmd, common);
  std::vector<std::string> names;
  if (suite == "all") {
    names = dlet::suite_names();
  } else {
    names.push_back(suite);
  }
  dlet::SuiteOptions options;
  options.seed = common.seed;
  options.threads = threads;
  bool ok = true;
  json reports = json::array();
  json runtimes = json::object();
  for (const auto& n : names) {
    const auto report = dlet::run_suite(n, options);
    ok = ok && report.passed();
    reports.push_back(report.to_json(false));
    runtimes[n] = report.runtime_s;
    std::cout << (report.passed() ? "PASS " : "FAIL ") << n << " (" << report.runtime_s << " s)\n";
    for (const auto& c : report.checks) {
      std::cout << "  " << c.status() << "  " << c.name << " = " << c.measured << '\n';
    }
  }
  run.meta()["status"] = ok ? "pass" : "fail";
  run.meta()["suites"] = reports;
  // Runtimes sit next to the wall clock so the report body stays deterministic.
  run.finish(json{{"suites_s", runtimes}});
  return ok ? 0 : 1;
}

/// Splice "key = value" entries of --config into the token list right after
/// the subcommand, so explicit flags (which come later) win.
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args,
                                       std::vector<std::string>& ignored) {
  std::string config;
  for (std::size_t n = 0; n < args.size(); ++n) {
    if (args[n] == "--config" && n + 1 < args.size()) config = args[n + 1];
    if (args[n].rfind("--config=", 0) == 0) config = args[n].substr(9);
  }
  if (config.empty() || args.empty()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args.front());
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::ifstream is(config);
  if (!is) throw std::runtime_error("cannot open config file " + config);
  std::vector<std::string> tokens;
  for (auto [key, value] : dlet::parse_config(is)) {
    std::replace(key.begin(), key.end(), '_', '-');
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      ignored.push_back(key);
      continue;
    }
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1") tokens.push_back("--" + key);
      continue;
    }
    tokens.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + 1, tokens.begin(), tokens.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusionlet PDE solver with wavelet-based uncertainty propagation", "dlet"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;

  auto* basis = app.add_subcommand("basis", "Daubechies filter report and wavelet samples");
  BasisArgs basis_args;
  add_common(basis, common);
  basis->add_option("-p,--order", basis_args.order, "Daubechies order")->check(CLI::Range(1, 10))->capture_default_str();
  basis->add_option("-J,--resolution", basis_args.resolution, "dyadic resolution")->check(CLI::Range(4, 20))->capture_default_str();

  auto* decompose = app.add_subcommand("decompose", "wavelet expansion of a terminal condition");
  DecomposeArgs dec;
  add_common(decompose, common);
  dec.input.add_to(decompose, "--input");
  decompose->add_option("--csv", dec.csv, "CSV samples (x,value) instead of a preset");
  decompose->add_option("-p,--order", dec.order)->check(CLI::Range(1, 10))->capture_default_str();
  decompose->add_option("-I,--levels", dec.levels)->check(CLI::Range(0, 20))->capture_default_str();
  decompose->add_option("--cells", dec.cells, "unit cells in the window")->check(CLI::PositiveNumber)->capture_default_str();
  decompose->add_option("--x-lo", dec.x_lo, "window start")->capture_default_str();

  auto* solve = app.add_subcommand("solve", "finite-difference solve of the backward PDE");
  SolveArgs sol;
  add_common(solve, common);
  sol.terminal.add_to(solve, "--terminal");
  solve->add_option("--model", sol.model, "cev (mu = r x, sigma x^lambda) or cir (-b x, sigma sqrt x)")->capture_default_str();
  solve->add_flag("--discounted", sol.discounted, "drop the drift (r = 0 form)");
  solve->add_option("--lambda", sol.lambda)->capture_default_str();
  solve->add_option("--sigma", sol.sigma)->capture_default_str();
  solve->add_option("--r", sol.r)->capture_default_str();
  solve->add_option("--b", sol.b, "CIR mean reversion")->capture_default_str();
  solve->add_option("--x-lo", sol.x_lo)->capture_default_str();
  solve->add_option("--x-hi", sol.x_hi)->capture_default_str();
  solve->add_option("--horizon", sol.horizon, "time to maturity T")->capture_default_str();
  solve->add_option("--nx", sol.nx)->check(CLI::Range(3, 1 << 22))->capture_default_str();
  solve->add_option("--nt", sol.nt)->check(CLI::Range(1, 1 << 22))->capture_default_str();
  solve->add_option("--theta", sol.theta)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  solve->add_option("--keep-every", sol.keep_every, "write every n-th time row")->capture_default_str();

  auto* cache = app.add_subcommand("cache", "build and store diffusionlet base solutions");
  CacheArgs cac;
  add_common(cache, common);
  cache->add_option("--lambda", cac.lambda)->capture_default_str();
  cache->add_option("--sigma", cac.sigma)->capture_default_str();
  cache->add_option("-p,--order", cac.order)->check(CLI::Range(1, 10))->capture_default_str();
  cache->add_option("--basis-resolution", cac.basis_resolution)->capture_default_str();
  cache->add_option("--grid-resolution", cac.grid_resolution, "x spacing 2^-n")->capture_default_str();
  cache->add_option("--tau-nodes", cac.tau_nodes)->capture_default_str();
  cache->add_option("--tau-min", cac.tau_min)->capture_default_str();
  cache->add_option("--tau-max", cac.tau_max)->capture_default_str();
  cache->add_option("--mode", cac.mode)->check(CLI::IsMember({"fast", "exact"}))->capture_default_str();
  cache->add_option("--expansion", cac.expansion, "expansion whose terms exact mode solves");
  cache->add_option("--taus", cac.taus, "times exact mode must answer")->capture_default_str();
  cache->add_option("--file", cac.file, "bundle name inside --out")->capture_default_str();

  auto* reconstruct = app.add_subcommand("reconstruct", "diffusionlet solution from an expansion");
  QueryArgs rec;
  add_common(reconstruct, common);
  add_query(reconstruct, rec);
  reconstruct->add_option("--epsilon", rec.epsilon, "essential-support threshold (0 = full sum)")->capture_default_str();

  auto* variance = app.add_subcommand("variance", "Gamma variance field of the solution");
  QueryArgs var;
  add_common(variance, common);
  add_query(variance, var);
  add_gamma(variance, var);

  auto* covariance = app.add_subcommand("covariance", "Gamma covariance between solution points");
  QueryArgs cov;
  add_common(covariance, common);
  add_query(covariance, cov);
  add_gamma(covariance, cov);
  covariance->add_option("--points-list", cov.pairs, "tau,x,tau,x,... instead of the taus x grid");

  auto* validate = app.add_subcommand("validate", "run a validation suite");
  std::string suite = "all";
  unsigned threads = 0;
  add_common(validate, common);
  std::vector<std::string> known = dlet::suite_names();
  known.push_back("all");
  validate->add_option("suite,--suite", suite, "suite name or 'all'")->check(CLI::IsMember(known))->capture_default_str();
  validate->add_option("--threads", threads, "Monte Carlo workers (0 = all cores)")->capture_default_str();

  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> ignored;
  try {
    args = expand_config(app, args, ignored);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "dlet: " << e.what() << '\n';
    return 2;
  }
  for (const auto& key : ignored) std::cerr << "dlet: config key '" << key << "' ignored by this command\n";

  try {
    if (*basis) return cmd_basis(basis, common, basis_args);
    if (*decompose) return cmd_decompose(decompose, common, dec);
    if (*solve) return cmd_solve(solve, common, sol);
    if (*cache) return cmd_cache(cache, common, cac);
    if (*reconstruct) return cmd_reconstruct(reconstruct, common, rec);
    if (*variance) return cmd_variance(variance, common, var);
    if (*covariance) return cmd_covariance(covariance, common, cov);
    if (*validate) return cmd_validate(validate, common, suite, threads);
  } catch (const std::exception& e) {
    std::cerr << "dlet: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
