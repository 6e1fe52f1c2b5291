#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "autotune/param_space.hpp"
#include "autotune/random.hpp"

namespace autotune {

enum class SamplerKind { dds, grid, uniform, lhs };

std::string to_string(SamplerKind kind);
std::optional<SamplerKind> parse_sampler_kind(const std::string& text);

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interval indices, one per dimension, naming one subspace of a division.
using Cell = std::vector<std::uint32_t>;

/// Per-axis interval lists covering a box.
struct Division {
  std::vector<std::vector<Interval>> axes;

  std::size_t dimension() const { return axes.size(); }
  /// Cell containing the point; coordinates outside the box clamp to the edge cells.
  Cell cell_of(const std::vector<double>& point) const;
  bool contains(const Cell& cell, const ConfigSetting& setting) const;
};

struct SamplerOptions {
  /// Largest batch grid_sample may produce.
  std::size_t grid_ceiling = 10000;
  /// When k exceeds a discrete parameter's cardinality, divide its encoded
  /// range into k equal widths instead of rejecting.
  bool continuous_fallback = false;
  /// Swap passes spent steering DDS rows away from visited cells.
  std::size_t repair_passes = 64;
};

/// Whole-space division with k intervals per parameter.
Division divide_space(const ParameterSpace& space, std::size_t k, bool continuous_fallback);
/// Equal-width division of an arbitrary box.
Division divide_bounds(const Bounds& box, std::size_t k);

struct SampleBatch {
  std::vector<ConfigSetting> settings;
  std::vector<Cell> cells;  // indices into `division`
  Division division;
  SamplerKind origin = SamplerKind::dds;

  std::size_t size() const { return settings.size(); }
};

/// Memory of a DDS sampling scope: the base division size and the cells
/// already handed out under it.
class SamplerState {
 public:
  explicit SamplerState(std::uint64_t seed) : rng_(seed) {}

  std::optional<std::size_t> base_k() const { return base_k_; }
  const std::set<Cell>& visited() const { return visited_; }
  Rng& rng() { return rng_; }

  void fix_base_k(std::size_t k) {
    if (!base_k_) base_k_ = k;
  }
  void record(const Cell& cell) { visited_.insert(cell); }
  void reset_memory() {
    base_k_.reset();
    visited_.clear();
  }

 private:
  std::optional<std::size_t> base_k_;
  std::set<Cell> visited_;
  Rng rng_;
};

/// Divide-and-diverge sampling over the whole space. Each parameter's k
/// intervals appear exactly once; rows are steered away from cells visited
/// in earlier calls on the same state.
SampleBatch dds_sample(const ParameterSpace& space, std::size_t k, SamplerState& state,
                       const SamplerOptions& options = {});

/// DDS inside a box; `state` must be scoped to that box.
SampleBatch dds_sample_in(const Bounds& box, std::size_t k, SamplerState& state,
                          const SamplerOptions& options = {});

/// Latin hypercube: the single-call contract of dds_sample, with no memory.
SampleBatch lhs_sample(const ParameterSpace& space, std::size_t k, Rng& rng,
                       const SamplerOptions& options = {});
SampleBatch lhs_sample_in(const Bounds& box, std::size_t k, Rng& rng);

/// k independent uniform draws; cells are computed post hoc against a
/// cell_k division (cell_k = k when zero).
SampleBatch uniform_sample(const ParameterSpace& space, std::size_t k, Rng& rng,
                           std::size_t cell_k = 0);
SampleBatch uniform_sample_in(const Bounds& box, std::size_t k, Rng& rng);

/// One uniform draw in every cell of the full k_per_dim^n Cartesian division.
SampleBatch grid_sample(const ParameterSpace& space, std::size_t k_per_dim, Rng& rng,
                        const SamplerOptions& options = {});
SampleBatch grid_sample_in(const Bounds& box, std::size_t k_per_dim, Rng& rng,
                           const SamplerOptions& options = {});

/// The sampling seam used by the tuner: a batch of k settings either over
/// the whole space or inside a bounded subspace.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual SamplerKind kind() const = 0;
  virtual SampleBatch sample(std::size_t k, const std::optional<Bounds>& scope) = 0;
};

std::unique_ptr<Sampler> make_sampler(SamplerKind kind, const ParameterSpace& space,
                                      std::uint64_t seed, SamplerOptions options = {});

}  // namespace autotune
