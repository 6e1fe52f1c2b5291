#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "autotune/executor.hpp"
#include "autotune/optimizer.hpp"
#include "autotune/param_space.hpp"
#include "autotune/sampler.hpp"
#include "autotune/utility.hpp"

namespace autotune {

inline constexpr const char* kToolVersion = "0.1.0";

class JobError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the target cannot produce a single usable test in the first round.
class TuningAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HistoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TuningJob {
  ParameterSpace space;
  TargetSpec target;
  UtilitySpec utility;
  GoalDirection goal = GoalDirection::maximize;
  std::size_t budget_total = 0;
  std::size_t set_size = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;  // false: seed is the built-in default
  std::optional<ConfigSetting> baseline;
  SamplerKind sampler = SamplerKind::dds;
  OptimizerKind optimizer = OptimizerKind::rbs;
  RrsParams rrs;
  std::string history_path;  // empty: keep history in memory only

  /// Throws JobError when set size, budget, baseline or target are unusable.
  void check() const;
};

enum class RecordScope { baseline, whole, bounded };

std::string to_string(RecordScope scope);

struct HistoryRecord {
  std::size_t test_index = 0;
  std::size_t round = 0;
  RecordScope scope = RecordScope::whole;
  Cell cell;
  ConfigSetting encoded;
  std::vector<std::pair<std::string, std::string>> decoded;
  MetricVector metrics;
  std::optional<double> utility;
  std::optional<FailureReason> failure;
  std::optional<Bounds> bounds;  // bounded scope only
  double duration_seconds = 0.0;
  std::string timestamp;

  bool ok() const { return !failure.has_value() && utility.has_value(); }
  Sample to_sample() const;
};

struct HistoryHeader {
  std::string version = kToolVersion;
  std::uint64_t schema_hash = 0;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::size_t set_size = 0;
  std::string sampler;
  std::string optimizer;
  std::string utility;
  std::string space;
};

HistoryHeader make_header(const TuningJob& job);

/// One JSON object per line; the header line comes first.
std::string history_header_line(const HistoryHeader& header);
std::string history_record_line(const HistoryRecord& record);

struct HistoryFile {
  std::optional<HistoryHeader> header;
  std::vector<HistoryRecord> records;
};

/// Parses a history file. Throws HistoryError naming the first bad line.
HistoryFile read_history(const std::string& path);
HistoryFile parse_history(const std::string& text);

struct RunOptions {
  /// Stop after this many completed rounds, as if the process were killed.
  std::optional<std::size_t> stop_after_rounds;
};

struct TuningResult {
  std::optional<Sample> best;
  std::vector<HistoryRecord> history;
  std::size_t rounds = 0;
  bool interrupted = false;

  std::size_t tests_used() const { return history.size(); }
};

/// Closed loop: optional round-0 baseline, then sample -> test -> utility ->
/// optimizer decision until the optimizer stops. Every test counts against
/// the budget, including the baseline and failed tests.
TuningResult run_tuning(const TuningJob& job, const RunOptions& options = {});

/// Continues a run from its history file. The loop is replayed from the
/// start with recorded outcomes standing in for tests already run, so the
/// continued run is identical to one that was never interrupted.
TuningResult resume(const TuningJob& job, const std::string& history_path,
                    const RunOptions& options = {});

/// Best-so-far utility at the end of each round, indexed from round 1.
std::vector<double> best_per_round(const std::vector<HistoryRecord>& history);

/// Parses a YAML job document. Relative paths resolve against base_dir.
TuningJob parse_job(const std::string& text, const std::string& base_dir = ".");
TuningJob load_job(const std::string& path);

}  // namespace autotune
