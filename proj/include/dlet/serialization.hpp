#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dlet/error_structure.hpp"
#include "dlet/pde_solver.hpp"
#include "dlet/wavelets.hpp"

namespace dlet {

inline constexpr const char* kSchemaVersion = "dlet-1";

/// {"schema", "order", "levels", "cells", "x_lo", "alpha": [[k, v]...],
///  "beta": [[i, k, v]...]}
nlohmann::json expansion_to_json(const WaveletExpansion& expansion);
/// Throws std::invalid_argument on missing fields, a foreign schema or
/// indices outside the declared shape.
WaveletExpansion expansion_from_json(const nlohmann::json& doc);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// CSV "x,value".
void write_dyadic_csv(std::ostream& os, const DyadicFunction& f);
/// CSV "tau,x,value", one row per grid node.
void write_grid_csv(std::ostream& os, const GridSolution& s);
/// {"tau": [...], "x": [...], "values": [...] row-major}
nlohmann::json grid_to_json(const GridSolution& s);
/// CSV "tau,x,variance".
void write_variance_csv(std::ostream& os, const VarianceField& field);
/// CSV "tau1,x1,tau2,x2,cov" for every ordered pair.
void write_covariance_csv(std::ostream& os, const std::vector<SpacetimePoint>& points,
                          const std::vector<double>& matrix);

/// Two-column numeric CSV (x, value). A non-numeric first line is taken
/// as a header. Throws std::runtime_error naming the line on malformed rows.
std::vector<std::pair<double, double>> read_xy_csv(std::istream& is);

/// key = value lines; '#' starts a comment, blank lines are skipped.
/// Entries keep file order. Throws std::runtime_error naming the line.
std::vector<std::pair<std::string, std::string>> parse_config(std::istream& is);

}  // namespace dlet
