#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace autotune {

enum class ParamKind { continuous, integer, boolean, categorical };

std::string to_string(ParamKind kind);
std::optional<ParamKind> parse_param_kind(const std::string& text);

/// Error raised for malformed parameter definitions and illegal divisions.
class SpaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A native (decoded) parameter value.
using NativeValue = std::variant<double, long long, bool, std::string>;

std::string format_native(const NativeValue& value);

/// One tunable parameter. Every kind maps onto a half-open encoded range:
/// numeric kinds use [lower, upper), booleans [0, 2), categoricals [0, c).
class Parameter {
 public:
  static Parameter continuous(std::string name, double lower, double upper);
  static Parameter integer(std::string name, long long lower, long long upper);
  static Parameter boolean(std::string name);
  static Parameter categorical(std::string name, std::vector<std::string> categories);

  const std::string& name() const { return name_; }
  ParamKind kind() const { return kind_; }
  const std::vector<std::string>& categories() const { return categories_; }

  double encoded_low() const { return low_; }
  double encoded_high() const { return high_; }
  bool contains(double encoded) const { return encoded >= low_ && encoded < high_; }

  /// Number of distinct native values, or nullopt for continuous parameters.
  std::optional<std::size_t> cardinality() const;

 private:
  Parameter(std::string name, ParamKind kind, double low, double high,
            std::vector<std::string> categories);

  std::string name_;
  ParamKind kind_;
  double low_;
  double high_;
  std::vector<std::string> categories_;
};

struct Interval {
  std::size_t param_index = 0;
  std::size_t interval_index = 0;
  double low = 0.0;
  double high = 0.0;

  bool contains(double x) const { return x >= low && x < high; }
};

/// Encoded values, one per parameter in declaration order.
struct ConfigSetting {
  std::vector<double> values;

  bool operator==(const ConfigSetting&) const = default;
};

class ParameterSpace {
 public:
  explicit ParameterSpace(std::vector<Parameter> parameters);

  std::size_t dimension() const { return parameters_.size(); }
  const std::vector<Parameter>& parameters() const { return parameters_; }
  const Parameter& operator[](std::size_t i) const { return parameters_[i]; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  /// Stable textual form used for hashing and the history header.
  std::string canonical() const;
  std::uint64_t schema_hash() const;

 private:
  std::vector<Parameter> parameters_;
};

/// Axis-aligned box in encoded space; each axis is the half-open [low, high).
struct Bounds {
  std::vector<double> low;
  std::vector<double> high;

  static Bounds whole(const ParameterSpace& space);

  std::size_t dimension() const { return low.size(); }
  bool contains(const ConfigSetting& setting) const;
  double volume() const;

  bool operator==(const Bounds&) const = default;
};

/// Splits the encoded range into k half-open intervals. Discrete kinds split
/// on integer boundaries with remainder cells assigned leftmost.
std::vector<Interval> divide_range(const Parameter& param, std::size_t k,
                                   std::size_t param_index = 0);

/// Splits [low, high) into k equal-width intervals with no discreteness rule.
std::vector<Interval> divide_continuous(double low, double high, std::size_t k,
                                        std::size_t param_index = 0);

NativeValue decode(const Parameter& param, double encoded);
double encode(const Parameter& param, const NativeValue& value);

std::vector<NativeValue> decode_setting(const ParameterSpace& space,
                                        const ConfigSetting& setting);

struct RangeViolation {
  std::size_t param_index;
  std::string param_name;
  double value;
};

/// Result of validate(): empty violations means the setting is usable.
struct ValidationReport {
  std::vector<RangeViolation> violations;

  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual);
};

/// Throws DimensionMismatch when the setting has the wrong arity.
ValidationReport validate(const ParameterSpace& space, const ConfigSetting& setting);

/// Parses a parameter-space document (YAML). Accepts either a top-level
/// sequence or a map with a `parameters` sequence. Errors cite the line and,
/// when known, the parameter name.
ParameterSpace parse_space(const std::string& text);
ParameterSpace load_space(const std::string& path);

}  // namespace autotune
