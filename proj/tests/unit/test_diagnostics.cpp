#include <doctest.h>

#include <sstream>

#include "autotune/diagnostics.hpp"
#include "autotune/landscapes.hpp"

using namespace autotune;

namespace {

Bounds unit(std::size_t n) { return Bounds{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)}; }

}  // namespace

TEST_CASE("phi extremes") {
  CHECK(empirical_phi("bumpy", unit(2), 0.0, 64).phi == 0.0);
  CHECK(empirical_phi("bumpy", unit(2), 1e9, 64).phi == 1.0);
  CHECK(empirical_phi("bumpy", Bounds{{0, 0}, {0.5, 0.5}}, 1e9, 64).phi == doctest::Approx(0.25));
}

TEST_CASE("phi over the step slab matches its area") {
  const auto est = empirical_phi("step_slab", unit(2), 100.0, 512);
  CHECK(std::abs(est.phi - 0.875) <= 2.0 / 512);
  CHECK(std::abs(empirical_phi("step_slab", unit(2), 100.0, 1024).phi - est.phi) <= 2.0 / 512);
}

TEST_CASE("phi denominators") {
  const Bounds left{{0, 0}, {0.5, 1}};
  CHECK(empirical_phi("step_slab", left, 100.0, 128).phi == doctest::Approx(0.5));
  CHECK(empirical_phi("step_slab", left, 100.0, 128, PhiDenominator::subspace).phi ==
        doctest::Approx(1.0));
}

TEST_CASE("phi is monotone in y0") {
  double last = 0.0;
  for (double y = 100; y <= 400; y += 20) {
    const double phi = empirical_phi("bumpy", unit(2), y, 100).phi;
    CHECK(phi >= last);
    last = phi;
  }
}

TEST_CASE("grid scans are guarded") {
  CHECK_THROWS_AS(empirical_phi("bumpy:dim=5", unit(5), 0.0, 100), DiagnosticsError);
  CHECK_THROWS_AS(brute_force_optimum("bumpy", 1), DiagnosticsError);
  CHECK_THROWS_AS(empirical_phi("bumpy", unit(3), 0.0, 10), DiagnosticsError);
}

TEST_CASE("brute force finds the slab") {
  const auto best = brute_force_optimum("step_slab", 200);
  CHECK(best.value == 1200.0);
  const auto def = get_landscape("step_slab");
  CHECK(best.point[0] >= def.slab_low);
  CHECK(best.point[0] < def.slab_high);
}

TEST_CASE("strategies parse") {
  CHECK(parse_strategy("uniform+rbs").sampler == SamplerKind::uniform);
  CHECK(parse_strategies("dds+rbs,lhs+rrs").size() == 2);
  CHECK_THROWS_AS(parse_strategy("dds"), DiagnosticsError);
  CHECK_THROWS_AS(parse_strategy("dds+sgd"), DiagnosticsError);
}

TEST_CASE("a single trial gives one row per round") {
  ComparisonConfig config;
  config.strategies = {parse_strategy("dds+rbs")};
  config.landscapes = {"bumpy"};
  config.set_size = 10;
  config.rounds = 1;
  config.trials = 1;
  const auto report = compare_strategies(config);
  std::ostringstream csv;
  report.write_csv(csv);
  std::istringstream lines(csv.str());
  std::string header;
  std::string row;
  std::getline(lines, header);
  CHECK(header == "sampler,optimizer,landscape,seed,round,best_utility,tests_used");
  std::getline(lines, row);
  CHECK(row.rfind("dds,rbs,bumpy,1,1,", 0) == 0);
  CHECK(row.substr(row.rfind(',') + 1) == "10");
  CHECK_FALSE(std::getline(lines, row));
}

TEST_CASE("comparison trajectories and summaries") {
  ComparisonConfig config;
  config.strategies = parse_strategies("dds+rbs,uniform+rbs,grid+rbs,lhs+rbs");
  config.landscapes = {"bumpy"};
  config.set_size = 100;
  config.rounds = 2;
  config.trials = 5;
  const auto report = compare_strategies(config);
  CHECK(report.trials.size() == 20);
  for (const auto& t : report.trials) {
    CHECK(t.best_per_round.size() == 2);
    CHECK(t.best_per_round[1] >= t.best_per_round[0]);
    CHECK(t.tests_per_round == std::vector<std::size_t>{100, 200});
  }
  const auto summary = report.summary();
  CHECK(summary.size() == 8);
  for (const auto& s : summary) CHECK(s.q1 <= s.median);
  const auto oracle = brute_force_optimum("bumpy", 1000).value;
  for (const auto& t : report.trials) CHECK(t.final_best <= oracle + 1e-9);
}

TEST_CASE("quantiles interpolate") {
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({5}, 0.25) == 5);
  CHECK(quantile({4, 1, 3, 2}, 0.0) == 1);
}
