#include "dlet/serialization.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dlet {

using nlohmann::json;

json expansion_to_json(const WaveletExpansion& e) {
  e.validate();
  json alpha = json::array();
  for (std::size_t k = 0; k < e.alpha.size(); ++k) alpha.push_back({k, e.alpha[k]});
  json beta = json::array();
  for (std::size_t i = 0; i < e.beta.size(); ++i) {
    for (std::size_t k = 0; k < e.beta[i].size(); ++k) beta.push_back({i, k, e.beta[i][k]});
  }
  return json{{"schema", kSchemaVersion}, {"order", e.order},   {"levels", e.levels},
              {"cells", e.cells},         {"x_lo", e.x_lo},     {"alpha", std::move(alpha)},
              {"beta", std::move(beta)}};
}

WaveletExpansion expansion_from_json(const json& doc) {
  try {
    if (doc.contains("schema") && doc.at("schema") != kSchemaVersion) {
      throw std::invalid_argument("unsupported schema " + doc.at("schema").dump());
    }
    auto e = WaveletExpansion::zeros(doc.at("order").get<int>(), doc.at("levels").get<int>(),
                                     doc.at("cells").get<int>(), doc.value("x_lo", 0.0));
    for (const auto& row : doc.at("alpha")) {
      const auto k = row.at(0).get<long long>();
      if (k < 0 || k >= static_cast<long long>(e.alpha.size())) {
        throw std::invalid_argument("alpha index " + std::to_string(k) + " outside [0, cells)");
      }
      e.alpha[static_cast<std::size_t>(k)] = row.at(1).get<double>();
    }
    for (const auto& row : doc.at("beta")) {
      const auto i = row.at(0).get<long long>();
      const auto k = row.at(1).get<long long>();
      if (i < 0 || i >= e.levels || k < 0 ||
          k >= static_cast<long long>(e.beta[static_cast<std::size_t>(i)].size())) {
        throw std::invalid_argument("beta index (" + std::to_string(i) + ", " + std::to_string(k) +
                                    ") outside the declared levels/cells");
      }
      e.beta[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = row.at(2).get<double>();
    }
    return e;
  } catch (const json::exception& ex) {
    throw std::invalid_argument(std::string("malformed expansion JSON: ") + ex.what());
  }
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_dyadic_csv(std::ostream& os, const DyadicFunction& f) {
  os << "x,value\n";
  const auto s = f.samples();
  for (std::size_t n = 0; n < s.size(); ++n) {
    os << format_double(f.x_at(n)) << ',' << format_double(s[n]) << '\n';
  }
}

void write_grid_csv(std::ostream& os, const GridSolution& s) {
  os << "tau,x,value\n";
  for (std::size_t it = 0; it < s.nt(); ++it) {
    for (std::size_t ix = 0; ix < s.nx(); ++ix) {
      os << format_double(s.tau[it]) << ',' << format_double(s.x[ix]) << ','
         << format_double(s.at(it, ix)) << '\n';
    }
  }
}

json grid_to_json(const GridSolution& s) {
  return json{{"tau", s.tau}, {"x", s.x}, {"values", s.values}};
}

void write_variance_csv(std::ostream& os, const VarianceField& field) {
  os << "tau,x,variance\n";
  for (std::size_t it = 0; it < field.tau.size(); ++it) {
    for (std::size_t ix = 0; ix < field.x.size(); ++ix) {
      os << format_double(field.tau[it]) << ',' << format_double(field.x[ix]) << ','
         << format_double(field.at(it, ix)) << '\n';
    }
  }
}

void write_covariance_csv(std::ostream& os, const std::vector<SpacetimePoint>& points,
                          const std::vector<double>& matrix) {
  const std::size_t n = points.size();
  if (matrix.size() != n * n) throw std::invalid_argument("covariance matrix size mismatch");
  os << "tau1,x1,tau2,x2,cov\n";
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      os << format_double(points[r].tau) << ',' << format_double(points[r].x) << ','
         << format_double(points[c].tau) << ',' << format_double(points[c].x) << ','
         << format_double(matrix[r * n + c]) << '\n';
    }
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* end = t.data() + t.size();
  const auto res = std::from_chars(t.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

}  // namespace

std::vector<std::pair<double, double>> read_xy_csv(std::istream& is) {
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    double x = 0.0, v = 0.0;
    const bool ok = comma != std::string::npos && parse_number(line.substr(0, comma), x) &&
                    parse_number(line.substr(comma + 1), v);
    if (!ok) {
      if (rows.empty() && number == 1) continue;
      throw std::runtime_error("malformed CSV row " + std::to_string(number) + ": '" + line + "'");
    }
    rows.emplace_back(x, v);
  }
  return rows;
}

std::vector<std::pair<std::string, std::string>> parse_config(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw std::runtime_error("config line " + std::to_string(number) + ": expected key = value");
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

}  // namespace dlet
