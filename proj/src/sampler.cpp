#include "autotune/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace autotune {

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::dds: return "dds";
    case SamplerKind::grid: return "grid";
    case SamplerKind::uniform: return "uniform";
    case SamplerKind::lhs: return "lhs";
  }
  return "?";
}

std::optional<SamplerKind> parse_sampler_kind(const std::string& text) {
  if (text == "dds") return SamplerKind::dds;
  if (text == "grid") return SamplerKind::grid;
  if (text == "uniform") return SamplerKind::uniform;
  if (text == "lhs") return SamplerKind::lhs;
  return std::nullopt;
}

Cell Division::cell_of(const std::vector<double>& point) const {
  Cell cell(axes.size());
  for (std::size_t d = 0; d < axes.size(); ++d) {
    const auto& axis = axes[d];
    // first interval whose upper edge lies above the coordinate
    auto it = std::upper_bound(axis.begin(), axis.end(), point[d],
                               [](double x, const Interval& iv) { return x < iv.high; });
    if (it == axis.end()) it = std::prev(axis.end());
    cell[d] = static_cast<std::uint32_t>(it - axis.begin());
  }
  return cell;
}

bool Division::contains(const Cell& cell, const ConfigSetting& setting) const {
  if (cell.size() != axes.size() || setting.values.size() != axes.size()) return false;
  for (std::size_t d = 0; d < axes.size(); ++d) {
    if (cell[d] >= axes[d].size() || !axes[d][cell[d]].contains(setting.values[d])) return false;
  }
  return true;
}

Division divide_space(const ParameterSpace& space, std::size_t k, bool continuous_fallback) {
  Division div;
  div.axes.reserve(space.dimension());
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const auto& p = space[i];
    const auto card = p.cardinality();
    if (continuous_fallback && card && k > *card) {
      div.axes.push_back(divide_continuous(p.encoded_low(), p.encoded_high(), k, i));
    } else {
      div.axes.push_back(divide_range(p, k, i));
    }
  }
  return div;
}

Division divide_bounds(const Bounds& box, std::size_t k) {
  Division div;
  div.axes.reserve(box.dimension());
  for (std::size_t i = 0; i < box.dimension(); ++i) {
    div.axes.push_back(divide_continuous(box.low[i], box.high[i], k, i));
  }
  return div;
}

namespace {

ConfigSetting draw_in_cell(const Division& div, const Cell& cell, Rng& rng) {
  ConfigSetting s;
  s.values.reserve(cell.size());
  for (std::size_t d = 0; d < cell.size(); ++d) {
    const auto& iv = div.axes[d][cell[d]];
    s.values.push_back(rng.uniform(iv.low, iv.high));
  }
  return s;
}

ConfigSetting draw_in_box(const Bounds& box, Rng& rng) {
  ConfigSetting s;
  s.values.reserve(box.dimension());
  for (std::size_t d = 0; d < box.dimension(); ++d) {
    s.values.push_back(rng.uniform(box.low[d], box.high[d]));
  }
  return s;
}

// Steers the rows of a permutation-aligned batch away from visited base
// cells by swapping interval indices between rows within one axis. Swaps
// keep every axis a permutation, so stratification is never lost.
class CellRepair {
 public:
  CellRepair(std::vector<std::vector<std::uint32_t>>& perms,
             std::vector<std::vector<std::uint32_t>> to_base, const std::set<Cell>& visited)
      : perms_(perms), to_base_(std::move(to_base)), visited_(visited) {
    k_ = perms_.front().size();
    rows_.resize(k_);
    for (std::size_t j = 0; j < k_; ++j) {
      rows_[j] = base_cell(j);
      ++counts_[rows_[j]];
    }
  }

  void run(std::size_t passes, Rng& rng) {
    std::vector<std::size_t> colliding;
    for (std::size_t pass = 0; pass < passes; ++pass) {
      colliding.clear();
      for (std::size_t j = 0; j < k_; ++j) {
        if (collides(j)) colliding.push_back(j);
      }
      if (colliding.empty()) return;
      rng.shuffle(colliding);
      for (auto j : colliding) {
        if (collides(j)) repair_row(j, rng);
      }
    }
  }

 private:
  struct Swap {
    std::size_t axis;
    std::size_t partner;
  };

  Cell base_cell(std::size_t row) const {
    Cell c(perms_.size());
    for (std::size_t d = 0; d < perms_.size(); ++d) c[d] = to_base_[d][perms_[d][row]];
    return c;
  }

  bool collides(std::size_t row) const {
    return visited_.count(rows_[row]) > 0 || counts_.at(rows_[row]) > 1;
  }

  // Contribution of one cell to the batch cost given its multiplicity.
  long cell_cost(const Cell& c, long count) const {
    if (count <= 0) return 0;
    return (visited_.count(c) ? count : 0) + (count - 1);
  }

  void move_cell(const Cell& c, long delta_count, long& cost) {
    auto& n = counts_[c];
    cost -= cell_cost(c, n);
    n += delta_count;
    cost += cell_cost(c, n);
    if (n == 0) counts_.erase(c);
  }

  long apply_swap(const Swap& s, std::size_t row) {
    std::swap(perms_[s.axis][row], perms_[s.axis][s.partner]);
    Cell a = base_cell(row);
    Cell b = base_cell(s.partner);
    long delta = 0;
    move_cell(rows_[row], -1, delta);
    move_cell(rows_[s.partner], -1, delta);
    move_cell(a, +1, delta);
    move_cell(b, +1, delta);
    rows_[row] = std::move(a);
    rows_[s.partner] = std::move(b);
    return delta;
  }

  void repair_row(std::size_t row, Rng& rng) {
    long best = std::numeric_limits<long>::max();
    std::vector<Swap> ties;
    for (std::size_t d = 0; d < perms_.size(); ++d) {
      for (std::size_t partner = 0; partner < k_; ++partner) {
        if (partner == row) continue;
        const Swap s{d, partner};
        const long delta = apply_swap(s, row);
        apply_swap(s, row);  // undo
        if (delta < best) {
          best = delta;
          ties.clear();
        }
        if (delta == best) ties.push_back(s);
      }
    }
    if (ties.empty() || best > 0) return;
    apply_swap(ties[static_cast<std::size_t>(rng.below(ties.size()))], row);
  }

  std::vector<std::vector<std::uint32_t>>& perms_;
  std::vector<std::vector<std::uint32_t>> to_base_;
  const std::set<Cell>& visited_;
  std::size_t k_ = 0;
  std::vector<Cell> rows_;
  std::map<Cell, long> counts_;
};

// Number of cells in a base_k^n division, saturating.
std::size_t cell_count(std::size_t base_k, std::size_t n) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > std::numeric_limits<std::size_t>::max() / base_k) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= base_k;
  }
  return total;
}

// Permutation-aligned batch over `div`. With memory, rows avoid the base
// cells already in `state` and the produced cells are recorded there.
SampleBatch stratified(Division div, std::size_t k, Rng& rng, SamplerState* state,
                       const Division* base, std::size_t repair_passes, SamplerKind origin) {
  const std::size_t n = div.dimension();
  std::vector<std::vector<std::uint32_t>> perms(n, std::vector<std::uint32_t>(k));
  for (auto& perm : perms) {
    for (std::size_t i = 0; i < k; ++i) perm[i] = static_cast<std::uint32_t>(i);
    rng.shuffle(perm);
  }

  if (state != nullptr && base != nullptr && !state->visited().empty() &&
      state->visited().size() < cell_count(base->axes.front().size(), n)) {
    // interval index in `div` -> interval index in the base division
    std::vector<std::vector<std::uint32_t>> to_base(n, std::vector<std::uint32_t>(k));
    for (std::size_t d = 0; d < n; ++d) {
      std::vector<double> probe(n, 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        const auto& iv = div.axes[d][i];
        probe.assign(n, 0.0);
        probe[d] = 0.5 * (iv.low + iv.high);
        to_base[d][i] = base->cell_of(std::vector<double>(probe))[d];
      }
    }
    CellRepair(perms, std::move(to_base), state->visited()).run(repair_passes, rng);
  }

  SampleBatch batch;
  batch.origin = origin;
  batch.settings.reserve(k);
  batch.cells.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    Cell cell(n);
    for (std::size_t d = 0; d < n; ++d) cell[d] = perms[d][j];
    auto setting = draw_in_cell(div, cell, rng);
    if (state != nullptr && base != nullptr) state->record(base->cell_of(setting.values));
    batch.settings.push_back(std::move(setting));
    batch.cells.push_back(std::move(cell));
  }
  batch.division = std::move(div);
  return batch;
}

SampleBatch dds_over(Division div, const std::function<Division(std::size_t)>& divide,
                     std::size_t k, SamplerState& state, const SamplerOptions& options) {
  state.fix_base_k(k);
  const std::size_t base_k = *state.base_k();
  if (base_k == k) {
    const Division base = div;
    return stratified(std::move(div), k, state.rng(), &state, &base, options.repair_passes,
                      SamplerKind::dds);
  }
  const Division base = divide(base_k);
  return stratified(std::move(div), k, state.rng(), &state, &base, options.repair_passes,
                    SamplerKind::dds);
}

std::size_t checked_grid_size(std::size_t k_per_dim, std::size_t n, std::size_t ceiling) {
  const std::size_t total = cell_count(k_per_dim, n);
  if (total > ceiling) {
    throw SamplerError("grid of " + std::to_string(k_per_dim) + "^" + std::to_string(n) +
                       " cells exceeds the batch ceiling of " + std::to_string(ceiling));
  }
  return total;
}

SampleBatch grid_over(Division div, std::size_t k_per_dim, Rng& rng, std::size_t ceiling) {
  const std::size_t n = div.dimension();
  const std::size_t total = checked_grid_size(k_per_dim, n, ceiling);
  SampleBatch batch;
  batch.origin = SamplerKind::grid;
  batch.settings.reserve(total);
  batch.cells.reserve(total);
  Cell cell(n, 0);
  for (std::size_t c = 0; c < total; ++c) {
    batch.settings.push_back(draw_in_cell(div, cell, rng));
    batch.cells.push_back(cell);
    for (std::size_t d = n; d-- > 0;) {
      if (++cell[d] < k_per_dim) break;
      cell[d] = 0;
    }
  }
  batch.division = std::move(div);
  return batch;
}

SampleBatch uniform_over(const Bounds& box, Division cells, std::size_t k, Rng& rng) {
  SampleBatch batch;
  batch.origin = SamplerKind::uniform;
  for (std::size_t j = 0; j < k; ++j) {
    auto s = draw_in_box(box, rng);
    batch.cells.push_back(cells.cell_of(s.values));
    batch.settings.push_back(std::move(s));
  }
  batch.division = std::move(cells);
  return batch;
}

void require_positive(std::size_t k) {
  if (k == 0) throw SamplerError("sample count must be positive");
}

}  // namespace

SampleBatch dds_sample(const ParameterSpace& space, std::size_t k, SamplerState& state,
                       const SamplerOptions& options) {
  require_positive(k);
  auto divide = [&](std::size_t kk) { return divide_space(space, kk, options.continuous_fallback); };
  return dds_over(divide(k), divide, k, state, options);
}

SampleBatch dds_sample_in(const Bounds& box, std::size_t k, SamplerState& state,
                          const SamplerOptions& options) {
  require_positive(k);
  auto divide = [&](std::size_t kk) { return divide_bounds(box, kk); };
  return dds_over(divide(k), divide, k, state, options);
}

SampleBatch lhs_sample(const ParameterSpace& space, std::size_t k, Rng& rng,
                       const SamplerOptions& options) {
  require_positive(k);
  return stratified(divide_space(space, k, options.continuous_fallback), k, rng, nullptr, nullptr,
                    0, SamplerKind::lhs);
}

SampleBatch lhs_sample_in(const Bounds& box, std::size_t k, Rng& rng) {
  require_positive(k);
  return stratified(divide_bounds(box, k), k, rng, nullptr, nullptr, 0, SamplerKind::lhs);
}

SampleBatch uniform_sample(const ParameterSpace& space, std::size_t k, Rng& rng,
                           std::size_t cell_k) {
  require_positive(k);
  if (cell_k == 0) cell_k = k;
  return uniform_over(Bounds::whole(space), divide_space(space, cell_k, true), k, rng);
}

SampleBatch uniform_sample_in(const Bounds& box, std::size_t k, Rng& rng) {
  require_positive(k);
  return uniform_over(box, divide_bounds(box, k), k, rng);
}

SampleBatch grid_sample(const ParameterSpace& space, std::size_t k_per_dim, Rng& rng,
                        const SamplerOptions& options) {
  require_positive(k_per_dim);
  checked_grid_size(k_per_dim, space.dimension(), options.grid_ceiling);
  return grid_over(divide_space(space, k_per_dim, options.continuous_fallback), k_per_dim, rng,
                   options.grid_ceiling);
}

SampleBatch grid_sample_in(const Bounds& box, std::size_t k_per_dim, Rng& rng,
                           const SamplerOptions& options) {
  require_positive(k_per_dim);
  checked_grid_size(k_per_dim, box.dimension(), options.grid_ceiling);
  return grid_over(divide_bounds(box, k_per_dim), k_per_dim, rng, options.grid_ceiling);
}

namespace {

class DdsSampler final : public Sampler {
 public:
  DdsSampler(const ParameterSpace& space, std::uint64_t seed, SamplerOptions options)
      : space_(space), whole_(seed), options_(options) {}

  SamplerKind kind() const override { return SamplerKind::dds; }

  SampleBatch sample(std::size_t k, const std::optional<Bounds>& scope) override {
    if (!scope) return dds_sample(space_, k, whole_, options_);
    if (!scoped_ || scope_ != *scope) {
      scoped_.emplace(whole_.rng().next());
      scope_ = *scope;
    }
    return dds_sample_in(*scope, k, *scoped_, options_);
  }

 private:
  ParameterSpace space_;
  SamplerState whole_;
  std::optional<SamplerState> scoped_;
  Bounds scope_;
  SamplerOptions options_;
};

class LhsSampler final : public Sampler {
 public:
  LhsSampler(const ParameterSpace& space, std::uint64_t seed, SamplerOptions options)
      : space_(space), rng_(seed), options_(options) {}

  SamplerKind kind() const override { return SamplerKind::lhs; }

  SampleBatch sample(std::size_t k, const std::optional<Bounds>& scope) override {
    if (!scope) return lhs_sample(space_, k, rng_, options_);
    return lhs_sample_in(*scope, k, rng_);
  }

 private:
  ParameterSpace space_;
  Rng rng_;
  SamplerOptions options_;
};

class UniformSampler final : public Sampler {
 public:
  UniformSampler(const ParameterSpace& space, std::uint64_t seed)
      : space_(space), rng_(seed) {}

  SamplerKind kind() const override { return SamplerKind::uniform; }

  SampleBatch sample(std::size_t k, const std::optional<Bounds>& scope) override {
    if (!scope) {
      if (base_k_ == 0) base_k_ = k;
      return uniform_sample(space_, k, rng_, base_k_);
    }
    return uniform_sample_in(*scope, k, rng_);
  }

 private:
  ParameterSpace space_;
  Rng rng_;
  std::size_t base_k_ = 0;
};

// Gridding under a batch budget: the largest g with g^n <= k, topped up with
// uniform draws so every round spends the tests it was given.
class GridSampler final : public Sampler {
 public:
  GridSampler(const ParameterSpace& space, std::uint64_t seed, SamplerOptions options)
      : space_(space), rng_(seed), options_(options) {}

  SamplerKind kind() const override { return SamplerKind::grid; }

  SampleBatch sample(std::size_t k, const std::optional<Bounds>& scope) override {
    require_positive(k);
    const std::size_t n = space_.dimension();
    std::size_t g = 1;
    while (cell_count(g + 1, n) <= k) ++g;
    if (!scope && !options_.continuous_fallback) {
      for (const auto& p : space_.parameters()) {
        if (auto card = p.cardinality()) g = std::min(g, *card);
      }
    }
    SamplerOptions opts = options_;
    opts.grid_ceiling = std::max(opts.grid_ceiling, k);
    SampleBatch batch = scope ? grid_sample_in(*scope, g, rng_, opts)
                              : grid_sample(space_, g, rng_, opts);
    const Bounds box = scope ? *scope : Bounds::whole(space_);
    while (batch.size() < k) {
      auto s = draw_in_box(box, rng_);
      batch.cells.push_back(batch.division.cell_of(s.values));
      batch.settings.push_back(std::move(s));
    }
    return batch;
  }

 private:
  ParameterSpace space_;
  Rng rng_;
  SamplerOptions options_;
};

}  // namespace

std::unique_ptr<Sampler> make_sampler(SamplerKind kind, const ParameterSpace& space,
                                      std::uint64_t seed, SamplerOptions options) {
  switch (kind) {
    case SamplerKind::dds: return std::make_unique<DdsSampler>(space, seed, options);
    case SamplerKind::lhs: return std::make_unique<LhsSampler>(space, seed, options);
    case SamplerKind::uniform: return std::make_unique<UniformSampler>(space, seed);
    case SamplerKind::grid: return std::make_unique<GridSampler>(space, seed, options);
  }
  throw SamplerError("unknown sampler kind");
}

}  // namespace autotune
