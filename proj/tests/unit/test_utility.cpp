#include <doctest.h>

#include <cmath>

#include "autotune/utility.hpp"

using namespace autotune;

TEST_CASE("identity and ratio") {
  CHECK(UtilitySpec::identity("x").evaluate({{"x", 7.0}}) == 7.0);
  CHECK(UtilitySpec::ratio("throughput", "latency").evaluate({{"throughput", 100}, {"latency", 4}}) ==
        25.0);
  CHECK_THROWS_AS(UtilitySpec::ratio("a", "b").evaluate({{"a", 1}, {"b", 0}}), UtilityError);
}

TEST_CASE("sigmoid is stable") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(1000.0) == 1.0);
  CHECK(sigmoid(-1000.0) == 0.0);
  CHECK(sigmoid(2.0) == doctest::Approx(1.0 - sigmoid(-2.0)));
}

TEST_CASE("gate at the midpoint halves the gated metric") {
  const auto gate = UtilitySpec::threshold_gate("memory", "throughput", 1024);
  CHECK(gate.evaluate({{"memory", 1019}, {"throughput", 80}}) == 40.0);
  CHECK(gate.evaluate({{"memory", 0}, {"throughput", 80}}) == doctest::Approx(80.0));
}

TEST_CASE("weighted sum") {
  const auto ws = UtilitySpec::weighted_sum({{"a", 2.0}, {"b", -0.5}});
  CHECK(ws.evaluate({{"a", 3}, {"b", 4}}) == 4.0);
}

TEST_CASE("missing metrics and non-finite results are errors") {
  CHECK_THROWS_AS(UtilitySpec::identity("x").evaluate({{"y", 1}}), UtilityError);
  CHECK_THROWS_AS(UtilitySpec::identity("x").evaluate({{"x", std::nan("")}}), UtilityError);
  CHECK_THROWS_AS(UtilitySpec::identity("x").check_against({"y"}), UtilityError);
}

TEST_CASE("expressions parse and print back") {
  for (const std::string text :
       {"throughput", "ratio(throughput, latency)", "weighted_sum(a:1, b:-2.5)",
        "gate(memory, throughput, cm=1024, margin=5)", "inverse(runtime)"}) {
    const auto spec = UtilitySpec::parse(text);
    CHECK(UtilitySpec::parse(spec.to_string()).to_string() == spec.to_string());
  }
  CHECK(UtilitySpec::parse("identity(x)").kind() == UtilitySpec::Kind::identity);
  CHECK(UtilitySpec::parse("gate(m, t, cm=10)").referenced_metrics() == std::set<std::string>{"m", "t"});
  CHECK_THROWS_AS(UtilitySpec::parse("ratio(a)"), UtilityError);
  CHECK_THROWS_AS(UtilitySpec::parse("cube(a)"), UtilityError);
  CHECK_THROWS_AS(UtilitySpec::parse("gate(a, b)"), UtilityError);
  CHECK_THROWS_AS(UtilitySpec::parse("a b"), UtilityError);
}

TEST_CASE("minimization inverts positive metrics") {
  const auto runtime = UtilitySpec::identity("runtime");
  const auto oriented = orient_for_maximization(runtime, GoalDirection::minimize, {"runtime"});
  CHECK(oriented.evaluate({{"runtime", 20}}) == doctest::Approx(0.05));
  CHECK(orient_for_maximization(runtime, GoalDirection::maximize, {}).to_string() == "runtime");
  CHECK_THROWS_AS(orient_for_maximization(runtime, GoalDirection::minimize, {}), UtilityError);
  CHECK_THROWS_AS(orient_for_maximization(UtilitySpec::weighted_sum({{"runtime", -1}}),
                                          GoalDirection::minimize, {"runtime"}),
                  UtilityError);
}

TEST_CASE("goal directions parse") {
  CHECK(parse_goal_direction("minimize") == GoalDirection::minimize);
  CHECK_FALSE(parse_goal_direction("sideways").has_value());
}
