#include "autotune/utility.hpp"

#include <cctype>
#include <cmath>

#include "autotune/numeric_text.hpp"

namespace autotune {

std::optional<GoalDirection> parse_goal_direction(const std::string& text) {
  if (text == "maximize" || text == "max") return GoalDirection::maximize;
  if (text == "minimize" || text == "min") return GoalDirection::minimize;
  return std::nullopt;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

UtilitySpec UtilitySpec::identity(std::string metric) {
  UtilitySpec s;
  s.kind_ = Kind::identity;
  s.metrics_ = {std::move(metric)};
  return s;
}

UtilitySpec UtilitySpec::ratio(std::string numerator, std::string denominator) {
  UtilitySpec s;
  s.kind_ = Kind::ratio;
  s.metrics_ = {std::move(numerator), std::move(denominator)};
  return s;
}

UtilitySpec UtilitySpec::weighted_sum(std::vector<std::pair<std::string, double>> terms) {
  if (terms.empty()) throw UtilityError("weighted_sum needs at least one term");
  UtilitySpec s;
  s.kind_ = Kind::weighted_sum;
  for (auto& [name, weight] : terms) {
    if (!std::isfinite(weight)) throw UtilityError("weight for '" + name + "' is not finite");
    s.metrics_.push_back(std::move(name));
    s.weights_.push_back(weight);
  }
  return s;
}

UtilitySpec UtilitySpec::threshold_gate(std::string metric, std::string gated, double threshold,
                                        double margin) {
  UtilitySpec s;
  s.kind_ = Kind::threshold_gate;
  s.metrics_ = {std::move(metric), std::move(gated)};
  s.threshold_ = threshold;
  s.margin_ = margin;
  return s;
}

UtilitySpec UtilitySpec::inverse(UtilitySpec inner) {
  UtilitySpec s;
  s.kind_ = Kind::inverse;
  s.inner_ = std::make_shared<const UtilitySpec>(std::move(inner));
  return s;
}

std::string UtilitySpec::to_string() const {
  switch (kind_) {
    case Kind::identity: return metrics_[0];
    case Kind::ratio: return "ratio(" + metrics_[0] + ", " + metrics_[1] + ")";
    case Kind::weighted_sum: {
      std::string out = "weighted_sum(";
      for (std::size_t i = 0; i < metrics_.size(); ++i) {
        if (i) out += ", ";
        out += metrics_[i] + ":" + format_number(weights_[i]);
      }
      return out + ")";
    }
    case Kind::threshold_gate:
      return "gate(" + metrics_[0] + ", " + metrics_[1] + ", cm=" + format_number(threshold_) +
             ", margin=" + format_number(margin_) + ")";
    case Kind::inverse: return "inverse(" + inner_->to_string() + ")";
  }
  return "?";
}

std::set<std::string> UtilitySpec::referenced_metrics() const {
  if (kind_ == Kind::inverse) return inner_->referenced_metrics();
  return {metrics_.begin(), metrics_.end()};
}

bool UtilitySpec::provably_positive(const std::set<std::string>& positive) const {
  auto pos = [&](const std::string& m) { return positive.count(m) > 0; };
  switch (kind_) {
    case Kind::identity: return pos(metrics_[0]);
    case Kind::ratio: return pos(metrics_[0]) && pos(metrics_[1]);
    case Kind::weighted_sum:
      for (std::size_t i = 0; i < metrics_.size(); ++i) {
        if (!(weights_[i] > 0.0) || !pos(metrics_[i])) return false;
      }
      return true;
    case Kind::threshold_gate: return pos(metrics_[1]);
    case Kind::inverse: return inner_->provably_positive(positive);
  }
  return false;
}

void UtilitySpec::check_against(const std::set<std::string>& declared) const {
  for (const auto& m : referenced_metrics()) {
    if (!declared.count(m)) {
      throw UtilityError("utility references undeclared metric '" + m + "'");
    }
  }
}

namespace {

double lookup(const MetricVector& metrics, const std::string& name) {
  auto it = metrics.find(name);
  if (it == metrics.end()) throw UtilityError("metric '" + name + "' is missing");
  return it->second;
}

}  // namespace

double UtilitySpec::evaluate(const MetricVector& metrics) const {
  double result = 0.0;
  switch (kind_) {
    case Kind::identity:
      result = lookup(metrics, metrics_[0]);
      break;
    case Kind::ratio: {
      const double den = lookup(metrics, metrics_[1]);
      if (den == 0.0) throw UtilityError("metric '" + metrics_[1] + "' is zero in a ratio");
      result = lookup(metrics, metrics_[0]) / den;
      break;
    }
    case Kind::weighted_sum:
      for (std::size_t i = 0; i < metrics_.size(); ++i) {
        result += weights_[i] * lookup(metrics, metrics_[i]);
      }
      break;
    case Kind::threshold_gate:
      result = lookup(metrics, metrics_[1]) *
               sigmoid(threshold_ - lookup(metrics, metrics_[0]) - margin_);
      break;
    case Kind::inverse: {
      const double inner = inner_->evaluate(metrics);
      if (inner == 0.0) throw UtilityError("cannot invert a zero utility");
      result = 1.0 / inner;
      break;
    }
  }
  if (!std::isfinite(result)) throw UtilityError("utility '" + to_string() + "' is not finite");
  return result;
}

double evaluate_utility(const UtilitySpec& spec, const MetricVector& metrics) {
  return spec.evaluate(metrics);
}

UtilitySpec orient_for_maximization(const UtilitySpec& spec, GoalDirection goal,
                                    const std::set<std::string>& positive_metrics) {
  if (goal == GoalDirection::maximize) return spec;
  if (!spec.provably_positive(positive_metrics)) {
    throw UtilityError("cannot minimize '" + spec.to_string() +
                       "': minimization takes the inverse, which needs metrics declared "
                       "strictly positive (negation is not supported)");
  }
  return UtilitySpec::inverse(spec);
}

// Recursive-descent parser for the utility grammar.
namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  UtilitySpec parse_all() {
    auto spec = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + text_.substr(pos_) + "'");
    return spec;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw UtilityError("utility expression \"" + text_ + "\" at column " +
                       std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string name() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            text_[pos_] == '.' || text_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return text_.substr(start, pos_ - start);
  }

  double number() {
    const auto token = name();
    const auto v = parse_number(token);
    if (!v || !std::isfinite(*v)) fail("'" + token + "' is not a number");
    return *v;
  }

  UtilitySpec expr() {
    const auto head = name();
    if (!accept('(')) return UtilitySpec::identity(head);
    if (head == "identity") {
      auto m = name();
      expect(')');
      return UtilitySpec::identity(m);
    }
    if (head == "ratio") {
      auto num = name();
      expect(',');
      auto den = name();
      expect(')');
      return UtilitySpec::ratio(num, den);
    }
    if (head == "weighted_sum") {
      std::vector<std::pair<std::string, double>> terms;
      do {
        auto m = name();
        expect(':');
        terms.emplace_back(m, number());
      } while (accept(','));
      expect(')');
      return UtilitySpec::weighted_sum(std::move(terms));
    }
    if (head == "gate") {
      auto metric = name();
      expect(',');
      auto gated = name();
      std::optional<double> cm;
      double margin = 5.0;
      while (accept(',')) {
        const auto key = name();
        expect('=');
        const double v = number();
        if (key == "cm") cm = v;
        else if (key == "margin") margin = v;
        else fail("unknown gate argument '" + key + "'");
      }
      expect(')');
      if (!cm) fail("gate needs cm=<threshold>");
      return UtilitySpec::threshold_gate(metric, gated, *cm, margin);
    }
    if (head == "inverse") {
      auto inner = expr();
      expect(')');
      return UtilitySpec::inverse(std::move(inner));
    }
    fail("unknown function '" + head + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

UtilitySpec UtilitySpec::parse(const std::string& text) { return Parser(text).parse_all(); }

}  // namespace autotune
