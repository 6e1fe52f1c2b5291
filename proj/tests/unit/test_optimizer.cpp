#include <doctest.h>

#include "autotune/optimizer.hpp"

using namespace autotune;

namespace {

const ParameterSpace kLine({Parameter::continuous("x", 0, 1)});
const ParameterSpace kUnit2({Parameter::continuous("x", 0, 1), Parameter::continuous("y", 0, 1)});

Sample sample(std::vector<double> x, std::optional<double> u, std::size_t index) {
  Sample s;
  s.setting.values = std::move(x);
  s.utility = u;
  s.test_index = index;
  if (!u) s.status = SampleStatus::failed;
  return s;
}

}  // namespace

TEST_CASE("find_best picks the maximum with earliest ties") {
  const std::vector<Sample> a{sample({0.1}, 3, 0), sample({0.2}, 9, 1), sample({0.3}, 7, 2)};
  CHECK(find_best(a).test_index == 1);
  const std::vector<Sample> tie{sample({0.1}, 5, 0), sample({0.2}, 5, 1)};
  CHECK(find_best(tie).test_index == 0);
  const std::vector<Sample> mixed{sample({0.1}, std::nullopt, 0), sample({0.2}, 4, 1)};
  CHECK(find_best(mixed).test_index == 1);
  const std::vector<Sample> none{sample({0.1}, std::nullopt, 0)};
  CHECK_THROWS_AS(find_best(none), OptimizerError);
}

TEST_CASE("bounds reach the nearest sampled neighbours") {
  const std::vector<Sample> s{sample({0.1}, 1, 0), sample({0.35}, 2, 1), sample({0.62}, 9, 2),
                              sample({0.81}, 3, 3)};
  const auto b = compute_bounds(s, s[2], kLine);
  CHECK(b.low[0] == 0.35);
  CHECK(b.high[0] == 0.81);

  const auto edge = compute_bounds(s, s[3], kLine);
  CHECK(edge.low[0] == 0.62);
  CHECK(edge.high[0] == 1.0);
}

TEST_CASE("rbs improves, restarts and stops") {
  OptimizerState state(kUnit2, 40, 10);
  auto d = rbs_start(state);
  CHECK(d.action == Action::sample_whole);
  CHECK(d.batch_size == 10);

  std::vector<Sample> round1;
  for (std::size_t i = 0; i < 10; ++i) round1.push_back(sample({0.1 * i, 0.05 + 0.09 * i}, i == 4 ? 10 : 1, i));
  d = rbs_step(state, round1);
  CHECK(d.action == Action::sample_bounded);
  REQUIRE(d.bounds.has_value());
  CHECK(d.bounds->low[0] == doctest::Approx(0.3));
  CHECK(d.bounds->high[0] == doctest::Approx(0.5));

  std::vector<Sample> round2;
  for (std::size_t i = 0; i < 10; ++i) round2.push_back(sample({0.35 + 0.01 * i, 0.45}, i == 2 ? 12 : 2, 10 + i));
  d = rbs_step(state, round2);
  CHECK(d.action == Action::sample_bounded);
  CHECK(d.reason == DecisionReason::improved);
  CHECK(d.bounds->low[0] == doctest::Approx(0.36));
  CHECK(d.bounds->high[0] == doctest::Approx(0.38));
  CHECK(*state.best_so_far->utility == 12);

  std::vector<Sample> round3;
  for (std::size_t i = 0; i < 10; ++i) round3.push_back(sample({0.37, 0.45}, 9, 20 + i));
  d = rbs_step(state, round3);
  CHECK(d.action == Action::sample_whole);
  CHECK(d.reason == DecisionReason::no_improvement_restart);

  d = rbs_step(state, round3);
  CHECK(d.action == Action::stop);
  CHECK(d.reason == DecisionReason::budget_exhausted);
  CHECK(state.budget_used == 40);
}

TEST_CASE("one round of the whole budget stops") {
  OptimizerState state(kLine, 100, 100);
  rbs_start(state);
  std::vector<Sample> batch;
  for (std::size_t i = 0; i < 100; ++i) batch.push_back(sample({i / 100.0}, static_cast<double>(i), i));
  CHECK(rbs_step(state, batch).action == Action::stop);
}

TEST_CASE("rbs truncates the last batch and rejects oversized ones") {
  OptimizerState state(kLine, 25, 10);
  rbs_start(state);
  std::vector<Sample> batch;
  for (std::size_t i = 0; i < 10; ++i) batch.push_back(sample({i / 10.0}, 1, i));
  rbs_step(state, batch);
  CHECK(rbs_step(state, batch).batch_size == 5);
  CHECK_THROWS_AS(rbs_step(state, batch), OptimizerError);
  CHECK_THROWS_AS(OptimizerState(kLine, 5, 10), OptimizerError);
}

TEST_CASE("rrs exploits the best of its warm-up") {
  RrsState state(kUnit2, 100);
  CHECK(state.warmup() == 10);
  auto d = rrs_start(state);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(d.action == Action::sample_whole);
    d = rrs_step(state, sample({0.05 + 0.09 * i, 0.5}, i == 6 ? 50.0 : static_cast<double>(i), i));
  }
  CHECK(d.action == Action::sample_bounded);
  CHECK(state.center->test_index == 6);
  CHECK(state.volume_fraction == doctest::Approx(0.1));
  CHECK(d.bounds->volume() == doctest::Approx(0.1));
}

TEST_CASE("rrs shrinks on misses and restarts below v") {
  RrsState state(kUnit2, 1000);
  auto d = rrs_start(state);
  for (std::size_t i = 0; i < 10; ++i) d = rrs_step(state, sample({0.5, 0.5}, static_cast<double>(i), i));
  const double start = state.box.volume();
  for (std::size_t i = 0; i < 3; ++i) d = rrs_step(state, sample({0.5, 0.5}, 0.0, 10 + i));
  CHECK(d.reason == DecisionReason::shrunk);
  CHECK(start / state.box.volume() == doctest::Approx(8.0));

  std::size_t index = 13;
  while (d.action == Action::sample_bounded) d = rrs_step(state, sample({0.5, 0.5}, 0.0, index++));
  CHECK(d.action == Action::sample_whole);
  CHECK(d.reason == DecisionReason::no_improvement_restart);
  CHECK(state.volume_fraction < state.params.v);
}

TEST_CASE("rrs recentres on improvement") {
  RrsState state(kUnit2, 1000);
  rrs_start(state);
  for (std::size_t i = 0; i < 10; ++i) rrs_step(state, sample({0.5, 0.5}, static_cast<double>(i), i));
  const auto d = rrs_step(state, sample({0.9, 0.9}, 100.0, 10));
  CHECK(d.reason == DecisionReason::improved);
  CHECK(d.bounds->contains(ConfigSetting{{0.9, 0.9}}));
  CHECK(d.bounds->high[0] == 1.0);
}

TEST_CASE("rrs parameters are validated") {
  CHECK_THROWS_AS(RrsState(kLine, 10, RrsParams{1.5, 0.5, 0.001}), OptimizerError);
  CHECK_THROWS_AS(RrsState(kLine, 10, RrsParams{0.1, 0.0, 0.001}), OptimizerError);
  CHECK_THROWS_AS(RrsState(kLine, 10, RrsParams{0.1, 0.5, 0.2}), OptimizerError);
}

TEST_CASE("baseline counts against the budget and seeds the best") {
  auto opt = make_optimizer(OptimizerKind::rbs, kLine, 11, 5);
  opt->baseline(sample({0.5}, 3.0, 0));
  CHECK(opt->budget_used() == 1);
  CHECK(*opt->best()->utility == 3.0);
  CHECK(opt->start().batch_size == 5);
}
