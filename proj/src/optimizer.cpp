#include "autotune/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace autotune {

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::rbs ? "rbs" : "rrs";
}

std::optional<OptimizerKind> parse_optimizer_kind(const std::string& text) {
  if (text == "rbs") return OptimizerKind::rbs;
  if (text == "rrs") return OptimizerKind::rrs;
  return std::nullopt;
}

std::string to_string(Action action) {
  switch (action) {
    case Action::sample_whole: return "sample_whole";
    case Action::sample_bounded: return "sample_bounded";
    case Action::stop: return "stop";
  }
  return "?";
}

std::string to_string(DecisionReason reason) {
  switch (reason) {
    case DecisionReason::initial: return "initial";
    case DecisionReason::improved: return "improved";
    case DecisionReason::no_improvement_restart: return "no_improvement_restart";
    case DecisionReason::shrunk: return "shrunk";
    case DecisionReason::budget_exhausted: return "budget_exhausted";
  }
  return "?";
}

namespace {

bool better(const Sample& a, const Sample& b) {
  if (*a.utility != *b.utility) return *a.utility > *b.utility;
  return a.test_index < b.test_index;
}

const Sample* best_of(std::span<const Sample> samples) {
  const Sample* best = nullptr;
  for (const auto& s : samples) {
    if (!s.ok()) continue;
    if (best == nullptr || better(s, *best)) best = &s;
  }
  return best;
}

// Keeps best_so_far the maximum over every ok sample seen.
void offer_best(std::optional<Sample>& best, const Sample& s) {
  if (!s.ok()) return;
  if (!best || better(s, *best)) best = s;
}

RoundDecision stop_decision() {
  return {Action::stop, std::nullopt, DecisionReason::budget_exhausted, 0};
}

}  // namespace

const Sample& find_best(std::span<const Sample> samples) {
  const Sample* best = best_of(samples);
  if (best == nullptr) throw OptimizerError("no successful test in the round");
  return *best;
}

Bounds compute_bounds(std::span<const Sample> samples, const Sample& best,
                      const Bounds& enclosing) {
  Bounds out = enclosing;
  const std::size_t n = enclosing.dimension();
  for (std::size_t d = 0; d < n; ++d) {
    const double x = best.setting.values[d];
    for (const auto& s : samples) {
      const double v = s.setting.values[d];
      if (v < x && v > out.low[d]) out.low[d] = v;
      if (v > x && v < out.high[d]) out.high[d] = v;
    }
  }
  return out;
}

Bounds compute_bounds(std::span<const Sample> samples, const Sample& best,
                      const ParameterSpace& space) {
  return compute_bounds(samples, best, Bounds::whole(space));
}

OptimizerState::OptimizerState(const ParameterSpace& space, std::size_t budget, std::size_t n)
    : budget_total(budget), set_size(n), whole(Bounds::whole(space)),
      current_bounds(Bounds::whole(space)) {
  if (n == 0) throw OptimizerError("set size must be positive");
  if (n > budget) throw OptimizerError("set size exceeds the budget");
}

void record_baseline(OptimizerState& state, const Sample& baseline) {
  if (state.remaining() == 0) throw OptimizerError("no budget left for the baseline test");
  state.budget_used += 1;
  state.given_baseline = baseline;
  offer_best(state.best_so_far, baseline);
}

RoundDecision rbs_start(OptimizerState& state) {
  if (state.remaining() == 0) return stop_decision();
  state.current_scope = Scope::whole;
  state.current_bounds = state.whole;
  return {Action::sample_whole, std::nullopt, DecisionReason::initial,
          std::min(state.set_size, state.remaining())};
}

RoundDecision rbs_step(OptimizerState& state, std::span<const Sample> batch) {
  if (batch.size() > state.remaining()) {
    throw OptimizerError("batch of " + std::to_string(batch.size()) + " tests exceeds the " +
                         std::to_string(state.remaining()) + " remaining");
  }
  const std::optional<Sample> previous_best = state.best_so_far;
  state.budget_used += batch.size();
  state.rounds_completed += 1;
  for (const auto& s : batch) offer_best(state.best_so_far, s);

  const Sample* round_best = best_of(batch);
  RoundDecision next;
  if (state.current_scope == Scope::whole && round_best != nullptr) {
    // a whole-space round opens a new descent around its best point
    std::vector<Sample> ok;
    for (const auto& s : batch) {
      if (s.ok()) ok.push_back(s);
    }
    state.incumbent = *round_best;
    state.current_bounds = compute_bounds(ok, *round_best, state.whole);
    state.current_scope = Scope::bounded;
    const bool beat = !previous_best || *round_best->utility > *previous_best->utility;
    next = {Action::sample_bounded, state.current_bounds,
            (previous_best && beat) ? DecisionReason::improved : DecisionReason::initial, 0};
  } else if (state.current_scope == Scope::bounded && round_best != nullptr &&
             *round_best->utility > *state.incumbent->utility) {
    std::vector<Sample> pool{*state.incumbent};
    for (const auto& s : batch) {
      if (s.ok()) pool.push_back(s);
    }
    state.current_bounds = compute_bounds(pool, *round_best, state.current_bounds);
    state.incumbent = *round_best;
    next = {Action::sample_bounded, state.current_bounds, DecisionReason::improved, 0};
  } else {
    state.current_scope = Scope::whole;
    state.current_bounds = state.whole;
    state.incumbent.reset();
    next = {Action::sample_whole, std::nullopt, DecisionReason::no_improvement_restart, 0};
  }

  if (state.remaining() == 0) return stop_decision();
  next.batch_size = std::min(state.set_size, state.remaining());
  return next;
}

RrsState::RrsState(const ParameterSpace& space, std::size_t budget, RrsParams p)
    : params(p), budget_total(budget), whole(Bounds::whole(space)), box(Bounds::whole(space)) {
  if (!(p.q > 0.0 && p.q < 1.0)) throw OptimizerError("rrs q must be in (0, 1)");
  if (!(p.c > 0.0 && p.c < 1.0)) throw OptimizerError("rrs c must be in (0, 1)");
  if (!(p.v > 0.0 && p.v < p.q)) throw OptimizerError("rrs v must be in (0, q)");
}

std::size_t RrsState::warmup() const {
  return static_cast<std::size_t>(std::ceil(1.0 / params.q - 1e-9));
}

void record_baseline(RrsState& state, const Sample& baseline) {
  if (state.remaining() == 0) throw OptimizerError("no budget left for the baseline test");
  state.budget_used += 1;
  state.given_baseline = baseline;
  offer_best(state.best_so_far, baseline);
}

Bounds centered_box(const Bounds& whole, const ConfigSetting& center, double volume_fraction) {
  Bounds box = whole;
  const std::size_t n = whole.dimension();
  const double side = std::pow(volume_fraction, 1.0 / static_cast<double>(n));
  for (std::size_t d = 0; d < n; ++d) {
    const double width = (whole.high[d] - whole.low[d]) * std::min(side, 1.0);
    double lo = center.values[d] - width / 2.0;
    lo = std::clamp(lo, whole.low[d], whole.high[d] - width);
    box.low[d] = lo;
    box.high[d] = std::min(lo + width, whole.high[d]);
  }
  return box;
}

namespace {

RoundDecision explore(RrsState& state, DecisionReason reason) {
  state.phase = RrsState::Phase::explore;
  state.center.reset();
  return {Action::sample_whole, std::nullopt, reason, 1};
}

RoundDecision exploit(RrsState& state, DecisionReason reason) {
  state.phase = RrsState::Phase::exploit;
  state.box = centered_box(state.whole, state.center->setting, state.volume_fraction);
  return {Action::sample_bounded, state.box, reason, 1};
}

}  // namespace

RoundDecision rrs_start(RrsState& state) {
  if (state.remaining() == 0) return stop_decision();
  return explore(state, DecisionReason::initial);
}

RoundDecision rrs_step(RrsState& state, const Sample& sample) {
  if (state.remaining() == 0) return stop_decision();
  state.budget_used += 1;
  offer_best(state.best_so_far, sample);

  RoundDecision next;
  if (state.phase == RrsState::Phase::explore) {
    next = explore(state, DecisionReason::initial);
    if (sample.ok()) {
      state.exploration_utilities.push_back(*sample.utility);
      state.exploration_phase.push_back(sample);
      const auto& history = state.exploration_utilities;
      bool promising = false;
      if (history.size() == state.warmup()) {
        promising = true;  // threshold established: exploit the best seed so far
      } else if (history.size() > state.warmup()) {
        const auto above = std::count_if(history.begin(), history.end(),
                                         [&](double u) { return u > *sample.utility; });
        promising = static_cast<double>(above) < state.params.q * static_cast<double>(history.size());
      }
      if (promising) {
        state.center = find_best(state.exploration_phase);
        state.exploration_phase.clear();
        state.volume_fraction = state.params.q;
        next = exploit(state, DecisionReason::improved);
      }
    }
  } else {
    if (sample.ok() && *sample.utility > *state.center->utility) {
      state.center = sample;
      next = exploit(state, DecisionReason::improved);
    } else {
      state.volume_fraction *= state.params.c;
      if (state.volume_fraction < state.params.v) {
        next = explore(state, DecisionReason::no_improvement_restart);
      } else {
        next = exploit(state, DecisionReason::shrunk);
      }
    }
  }
  if (state.remaining() == 0) return stop_decision();
  return next;
}

namespace {

class RbsOptimizer final : public Optimizer {
 public:
  RbsOptimizer(const ParameterSpace& space, std::size_t budget, std::size_t n)
      : state_(space, budget, n) {}

  OptimizerKind kind() const override { return OptimizerKind::rbs; }
  void baseline(const Sample& sample) override { record_baseline(state_, sample); }
  RoundDecision start() override { return rbs_start(state_); }
  RoundDecision ingest(std::span<const Sample> batch) override { return rbs_step(state_, batch); }
  const std::optional<Sample>& best() const override { return state_.best_so_far; }
  std::size_t budget_used() const override { return state_.budget_used; }

 private:
  OptimizerState state_;
};

class RrsOptimizer final : public Optimizer {
 public:
  RrsOptimizer(const ParameterSpace& space, std::size_t budget, RrsParams params)
      : state_(space, budget, params) {}

  OptimizerKind kind() const override { return OptimizerKind::rrs; }
  void baseline(const Sample& sample) override { record_baseline(state_, sample); }
  RoundDecision start() override { return rrs_start(state_); }
  RoundDecision ingest(std::span<const Sample> batch) override {
    if (batch.size() > state_.remaining()) throw OptimizerError("batch exceeds the remaining budget");
    RoundDecision d = stop_decision();
    for (const auto& s : batch) d = rrs_step(state_, s);
    return d;
  }
  const std::optional<Sample>& best() const override { return state_.best_so_far; }
  std::size_t budget_used() const override { return state_.budget_used; }

 private:
  RrsState state_;
};

}  // namespace

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, const ParameterSpace& space,
                                          std::size_t budget, std::size_t set_size,
                                          RrsParams rrs) {
  if (set_size == 0) throw OptimizerError("set size must be positive");
  if (set_size > budget) throw OptimizerError("set size exceeds the budget");
  if (kind == OptimizerKind::rbs) return std::make_unique<RbsOptimizer>(space, budget, set_size);
  return std::make_unique<RrsOptimizer>(space, budget, rrs);
}

}  // namespace autotune
