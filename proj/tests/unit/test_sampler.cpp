#include <doctest.h>

#include <algorithm>
#include <set>

#include "autotune/sampler.hpp"

using namespace autotune;

namespace {

const ParameterSpace kUnit2({Parameter::continuous("x", 0, 1), Parameter::continuous("y", 0, 1)});

void check_stratified(const SampleBatch& batch, std::size_t k) {
  REQUIRE(batch.size() == k);
  for (std::size_t d = 0; d < batch.division.dimension(); ++d) {
    std::vector<std::uint32_t> idx;
    for (const auto& c : batch.cells) idx.push_back(c[d]);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < k; ++i) CHECK(idx[i] == i);
  }
  for (std::size_t r = 0; r < k; ++r) CHECK(batch.division.contains(batch.cells[r], batch.settings[r]));
}

}  // namespace

TEST_CASE("dds represents each interval exactly once") {
  SamplerState state(1);
  check_stratified(dds_sample(kUnit2, 6, state), 6);
}

TEST_CASE("dds with one interval draws from the whole range") {
  const ParameterSpace line({Parameter::continuous("x", 3, 5)});
  SamplerState state(2);
  const auto batch = dds_sample(line, 1, state);
  REQUIRE(batch.size() == 1);
  CHECK(batch.settings[0].values[0] >= 3.0);
  CHECK(batch.settings[0].values[0] < 5.0);
}

TEST_CASE("dds diverges from visited cells") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SamplerState state(seed);
    const auto first = dds_sample(kUnit2, 3, state);
    const auto second = dds_sample(kUnit2, 3, state);
    std::set<Cell> cells(first.cells.begin(), first.cells.end());
    cells.insert(second.cells.begin(), second.cells.end());
    CHECK(cells.size() == 6);
    CHECK(state.visited().size() == 6);
    CHECK(state.base_k() == 3u);
  }
}

TEST_CASE("dds bounded scope stays inside the box") {
  SamplerState state(3);
  const Bounds box{{0.2, 0.5}, {0.3, 0.9}};
  const auto batch = dds_sample_in(box, 5, state);
  check_stratified(batch, 5);
  for (const auto& s : batch.settings) CHECK(box.contains(s));
}

TEST_CASE("grid covers every cell") {
  Rng rng(4);
  const auto batch = grid_sample(kUnit2, 3, rng);
  CHECK(batch.size() == 9);
  CHECK(std::set<Cell>(batch.cells.begin(), batch.cells.end()).size() == 9);
}

TEST_CASE("one-dimensional grid matches dds coverage") {
  const ParameterSpace line({Parameter::continuous("x", 0, 1)});
  Rng rng(5);
  SamplerState state(5);
  const auto grid = grid_sample(line, 5, rng);
  const auto dds = dds_sample(line, 5, state);
  CHECK(std::set<Cell>(grid.cells.begin(), grid.cells.end()) ==
        std::set<Cell>(dds.cells.begin(), dds.cells.end()));
}

TEST_CASE("grid refuses batches beyond the ceiling") {
  std::vector<Parameter> params;
  for (int i = 0; i < 13; ++i) params.push_back(Parameter::continuous("p" + std::to_string(i), 0, 1));
  Rng rng(6);
  CHECK_THROWS_AS(grid_sample(ParameterSpace(params), 10, rng), SamplerError);
}

TEST_CASE("uniform sampling is seeded and covers cells") {
  const ParameterSpace line({Parameter::continuous("x", 0, 1)});
  Rng a(7);
  Rng b(7);
  const auto first = uniform_sample(line, 1000, a, 10);
  CHECK(first.settings == uniform_sample(line, 1000, b, 10).settings);
  std::set<Cell> cells(first.cells.begin(), first.cells.end());
  CHECK(cells.size() == 10);

  Rng c(8);
  const auto one = uniform_sample(kUnit2, 1, c);
  REQUIRE(one.size() == 1);
  CHECK(Bounds::whole(kUnit2).contains(one.settings[0]));
  CHECK_THROWS(uniform_sample(kUnit2, 0, c));
}

TEST_CASE("lhs is stratified, memoryless and reproducible") {
  Rng rng(9);
  check_stratified(lhs_sample(kUnit2, 8, rng), 8);

  Rng again(2024);
  const auto golden = lhs_sample(kUnit2, 2, again);
  Rng replay(2024);
  CHECK(lhs_sample(kUnit2, 2, replay).settings == golden.settings);

  // some seed revisits a cell on the second call
  bool revisited = false;
  for (std::uint64_t seed = 0; seed < 50 && !revisited; ++seed) {
    Rng r(seed);
    const auto a = lhs_sample(kUnit2, 3, r);
    const auto b = lhs_sample(kUnit2, 3, r);
    std::set<Cell> cells(a.cells.begin(), a.cells.end());
    cells.insert(b.cells.begin(), b.cells.end());
    revisited = cells.size() < 6;
  }
  CHECK(revisited);
}

TEST_CASE("discrete parameters with too few values need the fallback") {
  const ParameterSpace space({Parameter::boolean("b"), Parameter::continuous("x", 0, 1)});
  SamplerState strict(10);
  CHECK_THROWS_AS(dds_sample(space, 4, strict), SpaceError);
  SamplerOptions opts;
  opts.continuous_fallback = true;
  SamplerState lenient(10);
  check_stratified(dds_sample(space, 4, lenient, opts), 4);
}

TEST_CASE("sampler kinds parse") {
  CHECK(parse_sampler_kind("lhs") == SamplerKind::lhs);
  CHECK_FALSE(parse_sampler_kind("sobol").has_value());
  for (auto kind : {SamplerKind::dds, SamplerKind::grid, SamplerKind::uniform, SamplerKind::lhs}) {
    CHECK(parse_sampler_kind(to_string(kind)) == kind);
  }
}
