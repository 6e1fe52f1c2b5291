#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace autotune {

/// Named scalar metrics reported by one test, e.g. throughput or latency.
using MetricVector = std::map<std::string, double>;

class UtilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GoalDirection { maximize, minimize };

std::optional<GoalDirection> parse_goal_direction(const std::string& text);

/// Logistic sigmoid 1 / (1 + e^-x), evaluated without overflow.
double sigmoid(double x);

/// Declarative utility expression. Grammar:
///
///   expr  := NAME
///          | identity(NAME)
///          | ratio(NAME, NAME)
///          | weighted_sum(NAME:NUM, NAME:NUM, ...)
///          | gate(NAME, NAME, cm=NUM[, margin=NUM])
///          | inverse(expr)
///
/// gate(m, g, cm=c, margin=s) evaluates g * S(c - m - s); margin defaults to 5.
class UtilitySpec {
 public:
  enum class Kind { identity, ratio, weighted_sum, threshold_gate, inverse };

  static UtilitySpec identity(std::string metric);
  static UtilitySpec ratio(std::string numerator, std::string denominator);
  static UtilitySpec weighted_sum(std::vector<std::pair<std::string, double>> terms);
  static UtilitySpec threshold_gate(std::string metric, std::string gated, double threshold,
                                    double margin = 5.0);
  static UtilitySpec inverse(UtilitySpec inner);

  static UtilitySpec parse(const std::string& text);

  Kind kind() const { return kind_; }
  std::string to_string() const;
  std::set<std::string> referenced_metrics() const;

  /// True when the expression is strictly positive whenever every metric
  /// named in `positive` is strictly positive.
  bool provably_positive(const std::set<std::string>& positive) const;

  /// Throws UtilityError naming any metric missing from `declared`.
  void check_against(const std::set<std::string>& declared) const;

  double evaluate(const MetricVector& metrics) const;

  const UtilitySpec& inner() const { return *inner_; }

 private:
  UtilitySpec() = default;

  Kind kind_ = Kind::identity;
  std::vector<std::string> metrics_;
  std::vector<double> weights_;
  double threshold_ = 0.0;
  double margin_ = 5.0;
  std::shared_ptr<const UtilitySpec> inner_;
};

double evaluate_utility(const UtilitySpec& spec, const MetricVector& metrics);

/// minimize wraps the expression in inverse(); maximize returns it unchanged.
/// Inverse needs a provably positive expression; negation is not offered.
UtilitySpec orient_for_maximization(const UtilitySpec& spec, GoalDirection goal,
                                    const std::set<std::string>& positive_metrics);

}  // namespace autotune
