#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dlet/serialization.hpp"

using namespace dlet;

TEST_CASE("expansion JSON round trip is exact") {
  auto e = WaveletExpansion::zeros(3, 2, 4, -2.0);
  e.alpha[1] = 0.1;
  e.alpha[3] = -1.0 / 3.0;
  e.beta[1][7] = 1e-300;
  const auto doc = expansion_to_json(e);
  CHECK(doc.at("schema") == "dlet-1");
  const auto back = expansion_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(back.order == 3);
  CHECK(back.x_lo == -2.0);
  CHECK(back.alpha == e.alpha);
  CHECK(back.beta == e.beta);
}

TEST_CASE("expansion JSON rejects foreign or malformed documents") {
  auto doc = expansion_to_json(WaveletExpansion::zeros(2, 1, 2));
  auto foreign = doc;
  foreign["schema"] = "other-2";
  CHECK_THROWS_AS(expansion_from_json(foreign), std::invalid_argument);
  auto outside = doc;
  outside["beta"].push_back({0, 9, 1.0});
  CHECK_THROWS_AS(expansion_from_json(outside), std::invalid_argument);
  auto missing = doc;
  missing.erase("cells");
  CHECK_THROWS_AS(expansion_from_json(missing), std::invalid_argument);
}

TEST_CASE("format_double is shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(format_double(third)) == third);
  const double tiny = std::numeric_limits<double>::denorm_min();
  CHECK(std::strtod(format_double(tiny).c_str(), nullptr) == tiny);
}

TEST_CASE("grid CSV and JSON") {
  const GridSolution s{{0.0, 0.5}, {1.0, 2.0}, {1.0, 2.0, 3.0, 4.0}};
  std::ostringstream os;
  write_grid_csv(os, s);
  CHECK(os.str() == "tau,x,value\n0,1,1\n0,2,2\n0.5,1,3\n0.5,2,4\n");
  const auto j = grid_to_json(s);
  CHECK(j.at("values").size() == 4);
  CHECK(j.at("tau")[1] == 0.5);
}

TEST_CASE("variance and covariance CSV") {
  const VarianceField f{{0.25}, {1.0, 2.0}, {0.5, 0.75}};
  std::ostringstream os;
  write_variance_csv(os, f);
  CHECK(os.str() == "tau,x,variance\n0.25,1,0.5\n0.25,2,0.75\n");
  std::ostringstream cs;
  write_covariance_csv(cs, {{0.0, 1.0}, {0.5, 2.0}}, {1.0, 0.5, 0.5, 2.0});
  CHECK(cs.str() == "tau1,x1,tau2,x2,cov\n0,1,0,1,1\n0,1,0.5,2,0.5\n0.5,2,0,1,0.5\n0.5,2,0.5,2,2\n");
  CHECK_THROWS_AS(write_covariance_csv(cs, {{0.0, 1.0}}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("dyadic CSV") {
  std::ostringstream os;
  write_dyadic_csv(os, DyadicFunction({1.0, 2.0}, 1, 0.0));
  CHECK(os.str() == "x,value\n0,1\n0.5,2\n");
}

TEST_CASE("two-column CSV reader") {
  std::istringstream with_header("x,value\n0,1\n\n0.5, 2\n");
  const auto rows = read_xy_csv(with_header);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].first == 0.5);
  CHECK(rows[1].second == 2.0);
  std::istringstream broken("0,1\n0.5,abc\n");
  CHECK_THROWS_AS(read_xy_csv(broken), std::runtime_error);
}

TEST_CASE("config parser keeps order and strips comments") {
  std::istringstream is("# run\norder = 4\n\nsigma=0.5  # volatility\nout = runs/a\n");
  const auto cfg = parse_config(is);
  REQUIRE(cfg.size() == 3);
  CHECK(cfg[0].first == "order");
  CHECK(cfg[1].second == "0.5");
  CHECK(cfg[2].second == "runs/a");
  std::istringstream bad("order 4\n");
  CHECK_THROWS_AS(parse_config(bad), std::runtime_error);
}
