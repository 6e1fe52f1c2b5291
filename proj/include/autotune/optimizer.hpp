#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "autotune/param_space.hpp"
#include "autotune/utility.hpp"

namespace autotune {

class OptimizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OptimizerKind { rbs, rrs };

std::string to_string(OptimizerKind kind);
std::optional<OptimizerKind> parse_optimizer_kind(const std::string& text);

enum class SampleStatus { ok, failed };

/// A tested setting with its metrics and utility. Failed samples carry no
/// utility and never become the best.
struct Sample {
  ConfigSetting setting;
  MetricVector metrics;
  std::optional<double> utility;
  std::size_t round = 0;
  std::size_t test_index = 0;
  SampleStatus status = SampleStatus::ok;

  bool ok() const { return status == SampleStatus::ok && utility.has_value(); }
};

enum class Action { sample_whole, sample_bounded, stop };
enum class DecisionReason { initial, improved, no_improvement_restart, shrunk, budget_exhausted };

std::string to_string(Action action);
std::string to_string(DecisionReason reason);

struct RoundDecision {
  Action action = Action::sample_whole;
  std::optional<Bounds> bounds;  // set for sample_bounded
  DecisionReason reason = DecisionReason::initial;
  std::size_t batch_size = 0;    // tests requested; 0 for stop
};

/// The ok sample with the largest utility; ties go to the lowest test_index.
/// Throws OptimizerError when no sample is ok.
const Sample& find_best(std::span<const Sample> samples);

/// Per axis, the nearest sampled coordinates strictly below and above the
/// best sample's, falling back to the enclosing box edges.
Bounds compute_bounds(std::span<const Sample> samples, const Sample& best, const Bounds& enclosing);
Bounds compute_bounds(std::span<const Sample> samples, const Sample& best,
                      const ParameterSpace& space);

enum class Scope { whole, bounded };

struct OptimizerState {
  std::optional<Sample> best_so_far;
  std::optional<Sample> given_baseline;
  std::size_t budget_total = 0;
  std::size_t budget_used = 0;
  std::size_t set_size = 0;
  std::size_t rounds_completed = 0;
  Scope current_scope = Scope::whole;
  Bounds whole;
  Bounds current_bounds;
  /// Best point of the current bound-and-search descent.
  std::optional<Sample> incumbent;

  OptimizerState(const ParameterSpace& space, std::size_t budget, std::size_t n);

  std::size_t remaining() const { return budget_total - budget_used; }
};

/// Counts a round-0 baseline test against the budget and seeds best_so_far.
void record_baseline(OptimizerState& state, const Sample& baseline);

/// First decision of a run: a whole-space batch, or stop if no budget is left.
RoundDecision rbs_start(OptimizerState& state);

/// Ingests one round. A whole-space round starts a descent bounded around
/// its best sample; a bounded round that strictly beats the incumbent
/// narrows again around the new best, otherwise the search restarts over the
/// whole space. Stops once the budget is spent; the last batch is truncated
/// to whatever budget remains.
RoundDecision rbs_step(OptimizerState& state, std::span<const Sample> batch);

/// Recursive random search hyper-parameters: q is the exploration quantile
/// and the initial exploitation volume fraction, c the per-miss volume
/// factor, v the volume fraction at which exploitation restarts.
struct RrsParams {
  double q = 0.1;
  double c = 0.5;
  double v = 0.001;
};

struct RrsState {
  enum class Phase { explore, exploit };

  RrsParams params;
  std::optional<Sample> best_so_far;
  std::optional<Sample> given_baseline;
  std::size_t budget_total = 0;
  std::size_t budget_used = 0;
  Phase phase = Phase::explore;
  std::vector<double> exploration_utilities;
  std::vector<Sample> exploration_phase;  // samples of the current exploration phase
  std::optional<Sample> center;
  double volume_fraction = 0.0;
  Bounds whole;
  Bounds box;

  RrsState(const ParameterSpace& space, std::size_t budget, RrsParams p = {});

  std::size_t remaining() const { return budget_total - budget_used; }
  std::size_t warmup() const;
};

void record_baseline(RrsState& state, const Sample& baseline);
RoundDecision rrs_start(RrsState& state);
RoundDecision rrs_step(RrsState& state, const Sample& sample);

/// Box of the given volume fraction centered on `center`, shifted to stay
/// inside `whole`.
Bounds centered_box(const Bounds& whole, const ConfigSetting& center, double volume_fraction);

/// Common face of RBS and RRS for the tuning loop.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual OptimizerKind kind() const = 0;
  virtual void baseline(const Sample& sample) = 0;
  virtual RoundDecision start() = 0;
  virtual RoundDecision ingest(std::span<const Sample> batch) = 0;
  virtual const std::optional<Sample>& best() const = 0;
  virtual std::size_t budget_used() const = 0;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, const ParameterSpace& space,
                                          std::size_t budget, std::size_t set_size,
                                          RrsParams rrs = {});

}  // namespace autotune
