#include "autotune/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "autotune/landscapes.hpp"
#include "autotune/numeric_text.hpp"
#include "autotune/tuner.hpp"

namespace autotune {

namespace {

void guard_grid(std::size_t dimension, std::size_t resolution) {
  if (resolution < 2) throw DiagnosticsError("grid resolution must be at least 2");
  const double points = std::pow(static_cast<double>(resolution), static_cast<double>(dimension));
  if (points > kMaxGridPoints) {
    throw DiagnosticsError("grid of " + std::to_string(resolution) + "^" +
                           std::to_string(dimension) + " points is too large to scan");
  }
}

double grid_coord(std::size_t i, std::size_t resolution) {
  return (static_cast<double>(i) + 0.5) / static_cast<double>(resolution);
}

// Grid indices whose centers fall inside [low, high).
std::pair<std::size_t, std::size_t> index_range(double low, double high, std::size_t resolution) {
  std::size_t first = resolution;
  std::size_t last = 0;
  for (std::size_t i = 0; i < resolution; ++i) {
    const double x = grid_coord(i, resolution);
    if (x >= low && x < high) {
      first = std::min(first, i);
      last = i + 1;
    }
  }
  if (first >= last) return {0, 0};
  return {first, last};
}

// Calls fn(point) for every grid point in the per-axis index ranges.
template <typename Fn>
void scan(const std::vector<std::pair<std::size_t, std::size_t>>& ranges, std::size_t resolution,
          Fn&& fn) {
  const std::size_t n = ranges.size();
  for (const auto& [a, b] : ranges) {
    if (a >= b) return;
  }
  std::vector<std::size_t> idx(n);
  std::vector<double> point(n);
  for (std::size_t d = 0; d < n; ++d) {
    idx[d] = ranges[d].first;
    point[d] = grid_coord(idx[d], resolution);
  }
  while (true) {
    fn(std::span<const double>(point));
    std::size_t d = 0;
    for (; d < n; ++d) {
      if (++idx[d] < ranges[d].second) {
        point[d] = grid_coord(idx[d], resolution);
        break;
      }
      idx[d] = ranges[d].first;
      point[d] = grid_coord(idx[d], resolution);
    }
    if (d == n) return;
  }
}

}  // namespace

PhiEstimate empirical_phi(const std::string& landscape_id, const Bounds& subspace, double y0,
                          std::size_t grid_resolution, PhiDenominator denominator) {
  const auto def = get_landscape(landscape_id);
  if (subspace.dimension() != def.dimension) {
    throw DiagnosticsError("subspace has " + std::to_string(subspace.dimension()) +
                           " dimensions but " + def.id + " has " +
                           std::to_string(def.dimension));
  }
  guard_grid(def.dimension, grid_resolution);

  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  double inside = 1.0;
  for (std::size_t d = 0; d < def.dimension; ++d) {
    ranges.push_back(index_range(subspace.low[d], subspace.high[d], grid_resolution));
    inside *= static_cast<double>(ranges.back().second - ranges.back().first);
  }
  std::size_t hits = 0;
  scan(ranges, grid_resolution, [&](std::span<const double> x) {
    if (def.evaluate(x) <= y0) ++hits;
  });

  const double total =
      denominator == PhiDenominator::whole_space
          ? std::pow(static_cast<double>(grid_resolution), static_cast<double>(def.dimension))
          : inside;
  PhiEstimate est{subspace, y0, grid_resolution, 0.0};
  est.phi = total > 0.0 ? static_cast<double>(hits) / total : 0.0;
  return est;
}

GridOptimum brute_force_optimum(const std::string& landscape_id, std::size_t grid_resolution) {
  const auto def = get_landscape(landscape_id);
  guard_grid(def.dimension, grid_resolution);
  std::vector<std::pair<std::size_t, std::size_t>> ranges(def.dimension, {0, grid_resolution});
  GridOptimum best;
  best.value = -std::numeric_limits<double>::infinity();
  scan(ranges, grid_resolution, [&](std::span<const double> x) {
    const double v = def.evaluate(x);
    if (v > best.value) {
      best.value = v;
      best.point.assign(x.begin(), x.end());
    }
  });
  return best;
}

std::string Strategy::name() const { return to_string(sampler) + "+" + to_string(optimizer); }

Strategy parse_strategy(const std::string& text) {
  const auto plus = text.find('+');
  if (plus == std::string::npos) {
    throw DiagnosticsError("strategy '" + text + "' must look like sampler+optimizer");
  }
  const auto sampler = parse_sampler_kind(text.substr(0, plus));
  const auto optimizer = parse_optimizer_kind(text.substr(plus + 1));
  if (!sampler || !optimizer) throw DiagnosticsError("unknown strategy '" + text + "'");
  return {*sampler, *optimizer};
}

std::vector<Strategy> parse_strategies(const std::string& comma_list) {
  std::vector<Strategy> out;
  std::istringstream in(comma_list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(parse_strategy(item));
  }
  if (out.empty()) throw DiagnosticsError("no strategies given");
  return out;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ComparisonReport compare_strategies(const ComparisonConfig& config) {
  if (config.set_size == 0 || config.rounds == 0 || config.trials == 0) {
    throw DiagnosticsError("set size, rounds and trials must be positive");
  }
  ComparisonReport report;
  for (const auto& landscape : config.landscapes) {
    const auto def = get_landscape(landscape);
    for (const auto& strategy : config.strategies) {
      for (std::size_t t = 0; t < config.trials; ++t) {
        SyntheticTarget target{landscape, config.noise, 1};
        TuningJob job{def.default_space(), TargetSpec{target},
                      UtilitySpec::identity(def.metric)};
        job.budget_total = config.set_size * config.rounds;
        job.set_size = config.set_size;
        job.seed = config.base_seed + t;
        job.sampler = strategy.sampler;
        job.optimizer = strategy.optimizer;
        job.rrs = config.rrs;
        const auto result = run_tuning(job);

        TrialResult trial{strategy, landscape, job.seed, best_per_round(result.history), {}, 0.0};
        trial.best_per_round.resize(config.rounds, trial.best_per_round.empty()
                                                       ? std::nan("")
                                                       : trial.best_per_round.back());
        trial.tests_per_round.assign(config.rounds, 0);
        for (const auto& r : result.history) {
          for (std::size_t k = std::max<std::size_t>(r.round, 1) - 1; k < config.rounds; ++k) {
            trial.tests_per_round[k] += 1;
          }
        }
        trial.final_best = result.best ? *result.best->utility : std::nan("");
        report.trials.push_back(std::move(trial));
      }
    }
  }
  return report;
}

std::vector<double> ComparisonReport::finals(const Strategy& strategy,
                                             const std::string& landscape) const {
  std::vector<double> out;
  for (const auto& t : trials) {
    if (t.strategy.name() == strategy.name() && t.landscape == landscape) {
      out.push_back(t.final_best);
    }
  }
  return out;
}

double ComparisonReport::median_final(const Strategy& strategy, const std::string& landscape) const {
  return quantile(finals(strategy, landscape), 0.5);
}

std::vector<RoundSummary> ComparisonReport::summary() const {
  // keyed by (landscape, strategy, round) so output order is stable
  std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<double>> cells;
  std::map<std::string, Strategy> by_name;
  for (const auto& t : trials) {
    by_name[t.strategy.name()] = t.strategy;
    for (std::size_t r = 0; r < t.best_per_round.size(); ++r) {
      cells[{t.landscape, t.strategy.name(), r + 1}].push_back(t.best_per_round[r]);
    }
  }
  std::vector<RoundSummary> out;
  for (const auto& [key, values] : cells) {
    const auto& [landscape, name, round] = key;
    out.push_back({by_name[name], landscape, round, quantile(values, 0.5),
                   quantile(values, 0.25), quantile(values, 0.75)});
  }
  return out;
}

void ComparisonReport::write_csv(std::ostream& out) const {
  out << "sampler,optimizer,landscape,seed,round,best_utility,tests_used\n";
  for (const auto& t : trials) {
    for (std::size_t r = 0; r < t.best_per_round.size(); ++r) {
      out << to_string(t.strategy.sampler) << ',' << to_string(t.strategy.optimizer) << ','
          << t.landscape << ',' << t.seed << ',' << (r + 1) << ','
          << format_number(t.best_per_round[r]) << ',' << t.tests_per_round[r] << '\n';
    }
  }
}

void ComparisonReport::write_summary_csv(std::ostream& out) const {
  out << "sampler,optimizer,landscape,round,median,q1,q3\n";
  for (const auto& s : summary()) {
    out << to_string(s.strategy.sampler) << ',' << to_string(s.strategy.optimizer) << ','
        << s.landscape << ',' << s.round << ',' << format_number(s.median) << ','
        << format_number(s.q1) << ',' << format_number(s.q3) << '\n';
  }
}

}  // namespace autotune
