#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "autotune/optimizer.hpp"
#include "autotune/param_space.hpp"
#include "autotune/sampler.hpp"

namespace autotune {

class DiagnosticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest grid a scan may visit (points over the whole space).
inline constexpr double kMaxGridPoints = 1e8;

enum class PhiDenominator {
  whole_space,  // grid points of the whole space (default)
  subspace,     // grid points inside the subspace only
};

struct PhiEstimate {
  Bounds subspace;
  double y0 = 0.0;
  std::size_t grid_resolution = 0;
  double phi = 0.0;
};

/// Fraction of grid points with f(x) <= y0 that fall inside `subspace`.
/// The grid holds cell centers of a regular resolution^n grid over the unit
/// cube. Bounds are in the landscape's default encoded coordinates.
PhiEstimate empirical_phi(const std::string& landscape_id, const Bounds& subspace, double y0,
                          std::size_t grid_resolution,
                          PhiDenominator denominator = PhiDenominator::whole_space);

struct GridOptimum {
  std::vector<double> point;
  double value = 0.0;
};

/// Exhaustive argmax over the cell-center grid; first point wins ties.
GridOptimum brute_force_optimum(const std::string& landscape_id, std::size_t grid_resolution);

struct Strategy {
  SamplerKind sampler = SamplerKind::dds;
  OptimizerKind optimizer = OptimizerKind::rbs;

  std::string name() const;  // "dds+rbs"
};

/// Parses "dds+rbs"; throws DiagnosticsError on unknown names.
Strategy parse_strategy(const std::string& text);
std::vector<Strategy> parse_strategies(const std::string& comma_list);

struct ComparisonConfig {
  std::vector<Strategy> strategies;
  std::vector<std::string> landscapes;
  std::size_t set_size = 100;
  std::size_t rounds = 2;
  std::size_t trials = 50;
  std::uint64_t base_seed = 1;
  double noise = 0.0;
  RrsParams rrs;
};

struct TrialResult {
  Strategy strategy;
  std::string landscape;
  std::uint64_t seed = 0;
  std::vector<double> best_per_round;
  std::vector<std::size_t> tests_per_round;  // cumulative
  double final_best = 0.0;
};

struct RoundSummary {
  Strategy strategy;
  std::string landscape;
  std::size_t round = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

struct ComparisonReport {
  std::vector<TrialResult> trials;

  std::vector<RoundSummary> summary() const;
  /// Median final best of one strategy on one landscape.
  double median_final(const Strategy& strategy, const std::string& landscape) const;
  std::vector<double> finals(const Strategy& strategy, const std::string& landscape) const;
  void write_csv(std::ostream& out) const;
  void write_summary_csv(std::ostream& out) const;
};

/// Seeded trials of every strategy on every landscape. Trial t of every
/// strategy shares the seed base_seed + t. Budget is set_size * rounds.
ComparisonReport compare_strategies(const ComparisonConfig& config);

/// Linear-interpolated quantile, p in [0, 1].
double quantile(std::vector<double> values, double p);

}  // namespace autotune
