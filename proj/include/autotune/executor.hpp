#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "autotune/param_space.hpp"
#include "autotune/utility.hpp"

namespace autotune {

class TargetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FailureReason { nonzero_exit, timeout, parse_error, setup_error };

std::string to_string(FailureReason reason);
std::optional<FailureReason> parse_failure_reason(const std::string& text);

struct DeclaredMetric {
  std::string name;
  bool positive = false;
};

/// A real system driven through shell commands.
///
/// Commands run under /bin/sh in their own process group. `{{name}}` in a
/// command expands to the decoded value of parameter `name`. With env
/// rendering every parameter is exported as CONF_<name>; with file rendering
/// `render_path` receives one `<name>=<value>` line per parameter in
/// declaration order. Metrics are `name=number` pairs separated by spaces,
/// read from the final non-empty stdout line or from `results_path`.
struct ProcessTarget {
  enum class Render { env, file };
  enum class MetricsSource { stdout_last_line, results_file };

  std::string setup_command;
  std::string test_command;
  std::string teardown_command;
  Render render = Render::env;
  std::string render_path;
  MetricsSource metrics_source = MetricsSource::stdout_last_line;
  std::string results_path;
  double timeout_seconds = 60.0;
  std::vector<DeclaredMetric> declared_metrics;
  std::size_t repetitions = 1;
  /// Per-test logs are written here when non-empty.
  std::string log_dir;
};

/// A closed-form landscape with optional multiplicative Gaussian noise.
struct SyntheticTarget {
  std::string landscape_id;
  double noise_stddev = 0.0;
  std::size_t repetitions = 1;
};

struct TargetSpec {
  std::variant<ProcessTarget, SyntheticTarget> kind;

  bool is_process() const { return std::holds_alternative<ProcessTarget>(kind); }
  std::vector<DeclaredMetric> declared_metrics() const;
  std::set<std::string> positive_metrics() const;
  /// Synthetic targets may be evaluated concurrently; process targets may not.
  bool allows_concurrent_tests() const { return !is_process(); }
};

/// Checks timeout, metric declarations and command placeholders.
void validate_target(const TargetSpec& target, const ParameterSpace& space);

struct TestOutcome {
  std::optional<FailureReason> failure;  // empty means ok
  MetricVector metrics;                  // complete when ok
  double duration_seconds = 0.0;
  std::string log_ref;
  std::string detail;

  bool ok() const { return !failure.has_value(); }
};

/// Identifies one test so synthetic noise is reproducible per (seed, index).
struct TestContext {
  std::uint64_t seed = 0;
  std::uint64_t test_index = 0;
};

TestOutcome run_test(const TargetSpec& target, const ParameterSpace& space,
                     const ConfigSetting& setting, const TestContext& context = {});

/// Noise-free evaluation of a landscape at a point of its default unit-cube space.
MetricVector eval_landscape(const std::string& landscape_id, const ConfigSetting& point);

/// Parses `a=1 b=2.5` into a metric vector; nullopt on any malformed token.
std::optional<MetricVector> parse_metric_line(const std::string& line);

/// Text a process target sees for each parameter, in declaration order.
std::vector<std::pair<std::string, std::string>> render_setting(const ParameterSpace& space,
                                                                const ConfigSetting& setting);

}  // namespace autotune
