#include <doctest.h>

#include <algorithm>

#include "autotune/diagnostics.hpp"
#include "autotune/executor.hpp"
#include "autotune/landscapes.hpp"

using namespace autotune;

TEST_CASE("registry lookups") {
  const auto ids = list_landscapes();
  for (const char* id : {"step_slab", "bumpy", "smooth_bowl"}) {
    CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
  }
  CHECK(get_landscape("smooth_bowl").analytic_max.has_value());
  try {
    get_landscape("nope");
    FAIL("expected an error");
  } catch (const LandscapeError& e) {
    CHECK(std::string(e.what()).find("smooth_bowl") != std::string::npos);
  }
  CHECK_THROWS_AS(get_landscape("bumpy:dim=x"), LandscapeError);
}

TEST_CASE("step slab is twelve times its base inside the slab") {
  const auto def = get_landscape("step_slab");
  CHECK(def.slab_fraction() == doctest::Approx(0.125));
  CHECK(eval_landscape("step_slab", ConfigSetting{{0.1, 0.5}}).at("throughput") == 100.0);
  CHECK(eval_landscape("step_slab", ConfigSetting{{0.7, 0.5}}).at("throughput") == 1200.0);
  const auto scaled = get_landscape("step_slab:base=50,fraction=0.25");
  CHECK(scaled.slab_fraction() == doctest::Approx(0.25));
  const std::vector<double> inside{scaled.slab_low + 0.01, 0.3};
  CHECK(scaled.evaluate(inside) == 600.0);
}

TEST_CASE("smooth bowl peaks at its maximizer") {
  const auto def = get_landscape("smooth_bowl");
  const auto& max = *def.analytic_max;
  CHECK(def.evaluate(max.point) == doctest::Approx(max.value));
  CHECK(def.evaluate(std::vector<double>{0.0, 0.99}) < max.value);
  CHECK(def.evaluate(std::vector<double>{0.0, 0.99}) >= def.minimum_value());
}

TEST_CASE("analytic maxima agree with a dense grid") {
  for (const char* id : {"smooth_bowl", "step_slab"}) {
    const auto def = get_landscape(id);
    const auto grid = brute_force_optimum(id, 1000);
    CHECK(grid.value == doctest::Approx(def.analytic_max->value).epsilon(1e-4));
  }
  const auto bowl = brute_force_optimum("smooth_bowl", 1000);
  const auto max = get_landscape("smooth_bowl").analytic_max->point;
  for (std::size_t d = 0; d < 2; ++d) CHECK(std::abs(bowl.point[d] - max[d]) <= 1.0 / 1000);
}

TEST_CASE("bumpy peak is its narrowest bump") {
  const auto def = get_landscape("bumpy");
  const auto peak = def.peak_location();
  const auto grid = brute_force_optimum("bumpy", 1000);
  for (std::size_t d = 0; d < 2; ++d) CHECK(std::abs(grid.point[d] - peak[d]) <= 1.0 / 1000);
  const auto tallest = std::max_element(def.bumps.begin(), def.bumps.end(),
                                        [](const Bump& a, const Bump& b) { return a.height < b.height; });
  for (const auto& b : def.bumps) CHECK(b.width >= tallest->width);
}

TEST_CASE("higher dimensions keep the structure") {
  const auto def = get_landscape("bumpy:dim=4");
  CHECK(def.dimension == 4);
  CHECK(def.default_space().dimension() == 4);
  CHECK(get_landscape("smooth_bowl:dim=3").analytic_max->point.size() == 3);
}
