#pragma once

// Internal helpers shared by the space and job file loaders.

#include <string>

#include <yaml-cpp/yaml.h>

#include "autotune/param_space.hpp"

namespace autotune::detail {

inline std::string at_line(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.is_null()) return "";
  return "line " + std::to_string(mark.line + 1) + ": ";
}

ParameterSpace space_from_yaml(const YAML::Node& root);

}  // namespace autotune::detail
