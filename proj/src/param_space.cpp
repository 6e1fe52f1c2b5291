#include "autotune/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "autotune/numeric_text.hpp"
#include "yaml_support.hpp"

namespace autotune {

std::string to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::continuous: return "float";
    case ParamKind::integer: return "int";
    case ParamKind::boolean: return "bool";
    case ParamKind::categorical: return "categorical";
  }
  return "?";
}

std::optional<ParamKind> parse_param_kind(const std::string& text) {
  if (text == "float") return ParamKind::continuous;
  if (text == "int") return ParamKind::integer;
  if (text == "bool") return ParamKind::boolean;
  if (text == "categorical") return ParamKind::categorical;
  return std::nullopt;
}

std::string format_native(const NativeValue& value) {
  struct Visitor {
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, value);
}

Parameter::Parameter(std::string name, ParamKind kind, double low, double high,
                     std::vector<std::string> categories)
    : name_(std::move(name)), kind_(kind), low_(low), high_(high),
      categories_(std::move(categories)) {
  if (name_.empty()) throw SpaceError("parameter name must not be empty");
  if (!std::isfinite(low_) || !std::isfinite(high_) || !(low_ < high_)) {
    throw SpaceError("parameter '" + name_ + "': lower bound must be below upper bound");
  }
}

Parameter Parameter::continuous(std::string name, double lower, double upper) {
  return Parameter(std::move(name), ParamKind::continuous, lower, upper, {});
}

Parameter Parameter::integer(std::string name, long long lower, long long upper) {
  return Parameter(std::move(name), ParamKind::integer, static_cast<double>(lower),
                   static_cast<double>(upper), {});
}

Parameter Parameter::boolean(std::string name) {
  return Parameter(std::move(name), ParamKind::boolean, 0.0, 2.0, {});
}

Parameter Parameter::categorical(std::string name, std::vector<std::string> categories) {
  if (categories.empty()) {
    throw SpaceError("parameter '" + name + "': categories must not be empty");
  }
  std::set<std::string> seen;
  for (const auto& label : categories) {
    if (!seen.insert(label).second) {
      throw SpaceError("parameter '" + name + "': duplicate category '" + label + "'");
    }
  }
  const auto count = static_cast<double>(categories.size());
  return Parameter(std::move(name), ParamKind::categorical, 0.0, count, std::move(categories));
}

std::optional<std::size_t> Parameter::cardinality() const {
  if (kind_ == ParamKind::continuous) return std::nullopt;
  return static_cast<std::size_t>(high_ - low_);
}

ParameterSpace::ParameterSpace(std::vector<Parameter> parameters)
    : parameters_(std::move(parameters)) {
  if (parameters_.empty()) throw SpaceError("parameter space needs at least one parameter");
  std::set<std::string> seen;
  for (const auto& p : parameters_) {
    if (!seen.insert(p.name()).second) {
      throw SpaceError("duplicate parameter name '" + p.name() + "'");
    }
  }
}

std::optional<std::size_t> ParameterSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    if (parameters_[i].name() == name) return i;
  }
  return std::nullopt;
}

std::string ParameterSpace::canonical() const {
  std::ostringstream out;
  for (const auto& p : parameters_) {
    out << p.name() << ':' << to_string(p.kind()) << ':';
    if (p.kind() == ParamKind::categorical) {
      for (const auto& c : p.categories()) out << c << ',';
    } else {
      out << format_number(p.encoded_low()) << ',' << format_number(p.encoded_high());
    }
    out << ';';
  }
  return out.str();
}

std::uint64_t ParameterSpace::schema_hash() const { return fnv1a64(canonical()); }

Bounds Bounds::whole(const ParameterSpace& space) {
  Bounds b;
  for (const auto& p : space.parameters()) {
    b.low.push_back(p.encoded_low());
    b.high.push_back(p.encoded_high());
  }
  return b;
}

bool Bounds::contains(const ConfigSetting& setting) const {
  if (setting.values.size() != low.size()) return false;
  for (std::size_t i = 0; i < low.size(); ++i) {
    if (!(setting.values[i] >= low[i] && setting.values[i] < high[i])) return false;
  }
  return true;
}

double Bounds::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < low.size(); ++i) v *= high[i] - low[i];
  return v;
}

std::vector<Interval> divide_continuous(double low, double high, std::size_t k,
                                        std::size_t param_index) {
  if (k == 0) throw SpaceError("interval count must be positive");
  std::vector<Interval> out;
  out.reserve(k);
  const double width = (high - low) / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double lo = low + width * static_cast<double>(i);
    const double hi = (i + 1 == k) ? high : low + width * static_cast<double>(i + 1);
    out.push_back({param_index, i, lo, hi});
  }
  return out;
}

std::vector<Interval> divide_range(const Parameter& param, std::size_t k,
                                   std::size_t param_index) {
  if (k == 0) throw SpaceError("interval count must be positive");
  const auto card = param.cardinality();
  if (!card) return divide_continuous(param.encoded_low(), param.encoded_high(), k, param_index);
  if (k > *card) {
    throw SpaceError("parameter '" + param.name() + "' has " + std::to_string(*card) +
                     " distinct values and cannot be divided into " + std::to_string(k) +
                     " intervals");
  }
  const std::size_t base = *card / k;
  const std::size_t extra = *card % k;
  std::vector<Interval> out;
  out.reserve(k);
  double lo = param.encoded_low();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t size = base + (i < extra ? 1 : 0);
    const double hi = lo + static_cast<double>(size);
    out.push_back({param_index, i, lo, hi});
    lo = hi;
  }
  return out;
}

NativeValue decode(const Parameter& param, double encoded) {
  if (!param.contains(encoded)) {
    throw SpaceError("value " + format_number(encoded) + " is outside the encoded range of '" +
                     param.name() + "'");
  }
  switch (param.kind()) {
    case ParamKind::continuous: return encoded;
    case ParamKind::integer: return static_cast<long long>(std::floor(encoded));
    case ParamKind::boolean: return encoded >= 1.0;
    case ParamKind::categorical:
      return param.categories()[static_cast<std::size_t>(std::floor(encoded))];
  }
  return encoded;
}

double encode(const Parameter& param, const NativeValue& value) {
  double encoded = 0.0;
  switch (param.kind()) {
    case ParamKind::continuous:
      if (const auto* d = std::get_if<double>(&value)) encoded = *d;
      else if (const auto* i = std::get_if<long long>(&value)) encoded = static_cast<double>(*i);
      else throw SpaceError("parameter '" + param.name() + "' expects a number");
      break;
    case ParamKind::integer:
      if (const auto* i = std::get_if<long long>(&value)) encoded = static_cast<double>(*i);
      else throw SpaceError("parameter '" + param.name() + "' expects an integer");
      break;
    case ParamKind::boolean:
      if (const auto* b = std::get_if<bool>(&value)) encoded = *b ? 1.0 : 0.0;
      else throw SpaceError("parameter '" + param.name() + "' expects true or false");
      break;
    case ParamKind::categorical: {
      const auto* label = std::get_if<std::string>(&value);
      if (!label) throw SpaceError("parameter '" + param.name() + "' expects a category label");
      const auto& cats = param.categories();
      auto it = std::find(cats.begin(), cats.end(), *label);
      if (it == cats.end()) {
        throw SpaceError("parameter '" + param.name() + "' has no category '" + *label + "'");
      }
      encoded = static_cast<double>(it - cats.begin());
      break;
    }
  }
  if (!param.contains(encoded)) {
    throw SpaceError("value " + format_native(value) + " is outside the range of '" +
                     param.name() + "'");
  }
  return encoded;
}

std::vector<NativeValue> decode_setting(const ParameterSpace& space,
                                        const ConfigSetting& setting) {
  if (setting.values.size() != space.dimension()) {
    throw DimensionMismatch(space.dimension(), setting.values.size());
  }
  std::vector<NativeValue> out;
  out.reserve(space.dimension());
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    out.push_back(decode(space[i], setting.values[i]));
  }
  return out;
}

DimensionMismatch::DimensionMismatch(std::size_t expected, std::size_t actual)
    : std::invalid_argument("setting has " + std::to_string(actual) +
                            " values but the space has " + std::to_string(expected) +
                            " parameters") {}

std::string ValidationReport::describe() const {
  if (ok()) return "ok";
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += "'" + v.param_name + "' = " + format_number(v.value) + " out of range";
  }
  return out;
}

ValidationReport validate(const ParameterSpace& space, const ConfigSetting& setting) {
  if (setting.values.size() != space.dimension()) {
    throw DimensionMismatch(space.dimension(), setting.values.size());
  }
  ValidationReport report;
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    if (!space[i].contains(setting.values[i])) {
      report.violations.push_back({i, space[i].name(), setting.values[i]});
    }
  }
  return report;
}

namespace detail {

namespace {

double number_field(const YAML::Node& entry, const char* field, const std::string& name) {
  const auto node = entry[field];
  if (!node) {
    throw SpaceError(at_line(entry) + "parameter '" + name + "' is missing '" + field + "'");
  }
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw SpaceError(at_line(node) + "parameter '" + name + "': '" + field +
                     "' must be a number");
  }
}

long long integer_field(const YAML::Node& entry, const char* field, const std::string& name) {
  const double v = number_field(entry, field, name);
  if (std::floor(v) != v || std::fabs(v) > 9.0e15) {
    throw SpaceError(at_line(entry[field]) + "parameter '" + name + "': '" + field +
                     "' must be an integer");
  }
  return static_cast<long long>(v);
}

Parameter parameter_from_yaml(const YAML::Node& entry, std::size_t position) {
  if (!entry.IsMap()) {
    throw SpaceError(at_line(entry) + "parameter #" + std::to_string(position + 1) +
                     " must be a mapping");
  }
  const auto name_node = entry["name"];
  if (!name_node || !name_node.IsScalar()) {
    throw SpaceError(at_line(entry) + "parameter #" + std::to_string(position + 1) +
                     " is missing 'name'");
  }
  const auto name = name_node.as<std::string>();
  const auto kind_node = entry["kind"];
  if (!kind_node || !kind_node.IsScalar()) {
    throw SpaceError(at_line(entry) + "parameter '" + name + "' is missing 'kind'");
  }
  const auto kind = parse_param_kind(kind_node.as<std::string>());
  if (!kind) {
    throw SpaceError(at_line(kind_node) + "parameter '" + name + "' has unknown kind '" +
                     kind_node.as<std::string>() + "' (expected float, int, bool or categorical)");
  }
  try {
    switch (*kind) {
      case ParamKind::continuous:
        return Parameter::continuous(name, number_field(entry, "min", name),
                                     number_field(entry, "max", name));
      case ParamKind::integer:
        return Parameter::integer(name, integer_field(entry, "min", name),
                                  integer_field(entry, "max", name));
      case ParamKind::boolean:
        return Parameter::boolean(name);
      case ParamKind::categorical: {
        const auto cats = entry["categories"];
        if (!cats || !cats.IsSequence()) {
          throw SpaceError(at_line(entry) + "parameter '" + name +
                           "' needs a 'categories' list");
        }
        std::vector<std::string> labels;
        for (const auto& c : cats) labels.push_back(c.as<std::string>());
        return Parameter::categorical(name, std::move(labels));
      }
    }
  } catch (const SpaceError& e) {
    const std::string msg = e.what();
    if (msg.rfind("line ", 0) == 0) throw;
    throw SpaceError(at_line(entry) + msg);
  }
  throw SpaceError(at_line(entry) + "unreachable parameter kind");
}

}  // namespace

ParameterSpace space_from_yaml(const YAML::Node& root) {
  YAML::Node list = root;
  if (root.IsMap()) list = root["parameters"];
  if (!list || !list.IsSequence()) {
    throw SpaceError(at_line(root) + "expected a list of parameters");
  }
  std::vector<Parameter> params;
  std::set<std::string> seen;
  std::size_t position = 0;
  for (const auto& entry : list) {
    auto p = parameter_from_yaml(entry, position++);
    if (!seen.insert(p.name()).second) {
      throw SpaceError(at_line(entry) + "duplicate parameter name '" + p.name() + "'");
    }
    params.push_back(std::move(p));
  }
  if (params.empty()) throw SpaceError(at_line(list) + "parameter list is empty");
  return ParameterSpace(std::move(params));
}

}  // namespace detail

ParameterSpace parse_space(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw SpaceError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return detail::space_from_yaml(root);
}

ParameterSpace load_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpaceError("cannot open space file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_space(buf.str());
}

}  // namespace autotune
