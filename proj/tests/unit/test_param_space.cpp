#include <doctest.h>

#include "autotune/param_space.hpp"

using namespace autotune;

namespace {

std::vector<std::pair<double, double>> spans(const std::vector<Interval>& intervals) {
  std::vector<std::pair<double, double>> out;
  for (const auto& i : intervals) out.emplace_back(i.low, i.high);
  return out;
}

}  // namespace

TEST_CASE("numeric range splits evenly") {
  const auto p = Parameter::continuous("x", 0, 12);
  const std::vector<std::pair<double, double>> want{{0, 2}, {2, 4}, {4, 6}, {6, 8}, {8, 10}, {10, 12}};
  CHECK(spans(divide_range(p, 6)) == want);
}

TEST_CASE("boolean splits into false and true halves") {
  const std::vector<std::pair<double, double>> want{{0, 1}, {1, 2}};
  CHECK(spans(divide_range(Parameter::boolean("b"), 2)) == want);
}

TEST_CASE("integer remainder goes to the leftmost intervals") {
  const std::vector<std::pair<double, double>> want{{0, 4}, {4, 7}, {7, 10}};
  CHECK(spans(divide_range(Parameter::integer("n", 0, 10), 3)) == want);
}

TEST_CASE("discrete division beyond cardinality is rejected") {
  CHECK_THROWS_AS(divide_range(Parameter::boolean("b"), 3), SpaceError);
  CHECK_THROWS_AS(divide_range(Parameter::integer("n", 0, 10), 0), SpaceError);
  CHECK(divide_continuous(0, 2, 3).size() == 3);
}

TEST_CASE("interval indices are recorded") {
  const auto parts = divide_range(Parameter::continuous("x", -1, 1), 4, 7);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    CHECK(parts[i].param_index == 7);
    CHECK(parts[i].interval_index == i);
  }
}

TEST_CASE("decode follows the floor rule") {
  CHECK(std::get<bool>(decode(Parameter::boolean("b"), 1.7)) == true);
  CHECK(std::get<bool>(decode(Parameter::boolean("b"), 0.0)) == false);
  CHECK(std::get<bool>(decode(Parameter::boolean("b"), 0.999)) == false);
  const auto cat = Parameter::categorical("c", {"a", "b", "c"});
  CHECK(std::get<std::string>(decode(cat, 2.9)) == "c");
  CHECK(std::get<std::string>(decode(cat, 0.2)) == "a");
  CHECK(std::get<long long>(decode(Parameter::integer("n", -3, 4), -2.5)) == -3);
  CHECK(std::get<double>(decode(Parameter::continuous("x", 0, 1), 0.25)) == 0.25);
  CHECK_THROWS_AS(decode(cat, 3.0), SpaceError);
}

TEST_CASE("encode and decode round trip") {
  const auto cat = Parameter::categorical("c", {"a", "b", "c"});
  CHECK(encode(cat, std::string("b")) == 1.0);
  CHECK(std::get<std::string>(decode(cat, encode(cat, std::string("c")))) == "c");
  CHECK(encode(Parameter::boolean("b"), true) == 1.0);
  CHECK(encode(Parameter::boolean("b"), false) == 0.0);
  const auto n = Parameter::integer("n", 1, 9);
  for (long long v = 1; v < 9; ++v) CHECK(std::get<long long>(decode(n, encode(n, v))) == v);
  CHECK_THROWS_AS(encode(n, 9LL), SpaceError);
  CHECK_THROWS_AS(encode(cat, std::string("z")), SpaceError);
}

TEST_CASE("validate reports range and arity problems") {
  const ParameterSpace space({Parameter::continuous("x", 0, 1), Parameter::integer("n", 0, 10)});
  CHECK(validate(space, ConfigSetting{{0.5, 3.0}}).ok());

  const auto bad = validate(space, ConfigSetting{{1.0, 3.0}});
  REQUIRE_FALSE(bad.ok());
  CHECK(bad.violations[0].param_name == "x");
  CHECK(bad.describe().find("x") != std::string::npos);

  CHECK_THROWS_AS(validate(space, ConfigSetting{{0.1, 0.2, 0.3}}), DimensionMismatch);
}

TEST_CASE("space definitions are checked") {
  CHECK_THROWS_AS(Parameter::continuous("x", 1, 1), SpaceError);
  CHECK_THROWS_AS(Parameter::categorical("c", {}), SpaceError);
  CHECK_THROWS_AS(Parameter::categorical("c", {"a", "a"}), SpaceError);
  CHECK_THROWS_AS(ParameterSpace({}), SpaceError);
  CHECK_THROWS_AS(ParameterSpace({Parameter::boolean("b"), Parameter::boolean("b")}), SpaceError);
}

TEST_CASE("space documents parse with line numbers on errors") {
  const auto space = parse_space(R"(
parameters:
  - {name: rate, kind: float, min: 0.5, max: 2}
  - {name: threads, kind: int, min: 1, max: 64}
  - {name: cache, kind: bool}
  - {name: mode, kind: categorical, categories: [fast, safe]}
)");
  REQUIRE(space.dimension() == 4);
  CHECK(space[1].kind() == ParamKind::integer);
  CHECK(space[3].categories().size() == 2);
  CHECK(space.index_of("cache") == 2);
  CHECK_FALSE(space.index_of("nope").has_value());

  try {
    parse_space("- {name: a, kind: float, min: 0, max: 1}\n- {name: b, kind: weird}\n");
    FAIL("expected an error");
  } catch (const SpaceError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("weird") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_space("- {name: a, kind: float, min: 0}\n"), SpaceError);
}

TEST_CASE("schema hash tracks the definition") {
  const ParameterSpace a({Parameter::continuous("x", 0, 1)});
  const ParameterSpace b({Parameter::continuous("x", 0, 2)});
  CHECK(a.schema_hash() == ParameterSpace({Parameter::continuous("x", 0, 1)}).schema_hash());
  CHECK(a.schema_hash() != b.schema_hash());
}

TEST_CASE("bounds are half open") {
  const ParameterSpace space({Parameter::continuous("x", 0, 2), Parameter::boolean("b")});
  const auto whole = Bounds::whole(space);
  CHECK(whole.volume() == doctest::Approx(4.0));
  CHECK(whole.contains(ConfigSetting{{0.0, 1.5}}));
  CHECK_FALSE(whole.contains(ConfigSetting{{2.0, 1.5}}));
}
