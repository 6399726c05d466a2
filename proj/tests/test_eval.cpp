#include "doctest.h"
#include "morphnoise/eval.hpp"

using namespace morphnoise;

TEST_CASE("exact match") {
  const std::vector<std::string> a = {"geht", "lief"};
  CHECK(exact_match(a, a) == doctest::Approx(1.0));
  const std::vector<std::string> b = {"geht", "lauft"};
  CHECK(exact_match(a, b) == doctest::Approx(0.5));
  CHECK_THROWS_AS(exact_match({}, {}), Error);
  const std::vector<std::string> c = {"geht"};
  CHECK_THROWS_AS(exact_match(a, c), Error);

  // comparison happens after NFC
  const std::vector<std::string> composed = {"tr\xC3\xA4gt"};
  const std::vector<std::string> decomposed = {"tra\xCC\x88gt"};
  CHECK(exact_match(composed, decomposed) == doctest::Approx(1.0));

  // joint permutation leaves accuracy unchanged
  const std::vector<std::string> p1 = {"x", "y", "z"};
  const std::vector<std::string> r1 = {"x", "q", "z"};
  const std::vector<std::string> p2 = {"z", "x", "y"};
  const std::vector<std::string> r2 = {"z", "x", "q"};
  CHECK(exact_match(p1, r1) == exact_match(p2, r2));
}

TEST_CASE("aggregate mean and sample stddev") {
  const std::vector<double> two = {0.2, 0.4};
  const Aggregate a = aggregate(two);
  CHECK(a.mean == doctest::Approx(0.3));
  CHECK(a.n == 2);
  REQUIRE(a.stddev.has_value());
  CHECK(*a.stddev == doctest::Approx(0.1414213562).epsilon(1e-6));

  const std::vector<double> one = {0.7};
  const Aggregate s = aggregate(one);
  CHECK(s.mean == doctest::Approx(0.7));
  CHECK_FALSE(s.stddev.has_value());

  const std::vector<double> equal = {0.5, 0.5, 0.5, 0.5, 0.5};
  CHECK(*aggregate(equal).stddev == doctest::Approx(0.0));

  // order invariance
  const std::vector<double> fwd = {0.1, 0.5, 0.9};
  const std::vector<double> rev = {0.9, 0.5, 0.1};
  CHECK(aggregate(fwd).mean == doctest::Approx(aggregate(rev).mean));
}

TEST_CASE("percent change") {
  CHECK(percent_change(40.0, 42.0) == doctest::Approx(5.0));
  CHECK(percent_change(40.0, 40.0) == doctest::Approx(0.0));
  CHECK(percent_change(50.0, 40.0) == doctest::Approx(-20.0));
  CHECK_THROWS_AS(percent_change(0.0, 10.0), Error);
}
