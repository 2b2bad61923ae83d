#include "doctest.h"

#include <stdexcept>
#include <string>

#include "dlet/validation.hpp"

using namespace dlet;

TEST_CASE("check comparisons") {
  CHECK(Check{"a", 1.0, 1.0, Comparison::at_most}.passed());
  CHECK_FALSE(Check{"a", 1.5, 1.0, Comparison::at_most}.passed());
  CHECK(Check{"a", 4.0, 4.0, Comparison::at_least}.passed());
  CHECK_FALSE(Check{"a", 3.9, 4.0, Comparison::at_least}.passed());
  CHECK(Check{"a", 1e9, 0.0, Comparison::informational}.status() == "informational");
  CHECK(Check{"a", 2.0, 1.0, Comparison::at_most}.status() == "fail");
}

TEST_CASE("a report fails when it runs over its time limit") {
  SuiteReport r{"x", {Check{"a", 0.0, 1.0, Comparison::at_most}}, 2.0, 1.0};
  CHECK_FALSE(r.passed());
  r.runtime_s = 0.5;
  CHECK(r.passed());
  const auto j = r.to_json(false);
  CHECK_FALSE(j.contains("runtime_s"));
  CHECK(j.at("status") == "pass");
  CHECK(j.at("checks")[0].at("comparison") == "<=");
  CHECK(r.to_json().contains("runtime_s"));
}

TEST_CASE("suite registry") {
  CHECK(suite_names().size() == 14);
  try {
    run_suite("nonsense");
    FAIL("expected a failure");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("heat_oracle") != std::string::npos);
  }
}

TEST_CASE("fast suites pass and are deterministic") {
  for (const char* name : {"ou", "covariance", "reconstruction"}) {
    CAPTURE(name);
    const auto a = run_suite(name);
    const auto b = run_suite(name);
    CHECK(a.passed());
    CHECK(a.to_json(false) == b.to_json(false));
  }
}
