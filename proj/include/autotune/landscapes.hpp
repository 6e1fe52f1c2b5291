#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "autotune/param_space.hpp"

namespace autotune {

class LandscapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LandscapeKind { step_slab, bumpy, smooth_bowl };

struct Bump {
  std::vector<double> center;
  double width;
  double height;
};

struct KnownMaximum {
  std::vector<double> point;
  double value;
};

/// Closed-form performance surface over the unit cube [0,1)^n.
///
/// step_slab   base b everywhere except a slab along one axis, where it is 12 b.
/// bumpy       gentle linear trend plus five Gaussian bumps; the narrowest bump
///             is the tallest.
/// smooth_bowl concave quadratic with one interior maximizer.
///
/// Ids take optional suffix arguments, e.g. "step_slab:dim=4,base=50,fraction=0.25"
/// or "bumpy:dim=3". Constants are fixed so oracle values never drift.
struct LandscapeDef {
  std::string id;
  LandscapeKind kind = LandscapeKind::smooth_bowl;
  std::size_t dimension = 2;
  std::string metric = "throughput";

  // step_slab
  double base = 100.0;
  double slab_ratio = 12.0;
  std::size_t slab_axis = 0;
  double slab_low = 0.625;
  double slab_high = 0.75;

  // bumpy
  double trend_level = 100.0;
  double trend_slope = 40.0;
  std::vector<Bump> bumps;

  // smooth_bowl
  std::vector<double> maximizer;
  double peak = 1000.0;
  double curvature = 800.0;

  std::optional<KnownMaximum> analytic_max;

  double evaluate(std::span<const double> unit_point) const;
  double minimum_value() const;
  /// Center of the tallest bump (bumpy) or the analytic maximizer.
  std::vector<double> peak_location() const;
  /// x0..x{n-1}, each a float parameter on [0, 1).
  ParameterSpace default_space() const;
  double slab_fraction() const { return slab_high - slab_low; }
};

LandscapeDef get_landscape(const std::string& id);
std::vector<std::string> list_landscapes();

/// Maps an encoded setting of `space` onto the unit cube, axis by axis.
std::vector<double> to_unit_cube(const ParameterSpace& space, const ConfigSetting& setting);

}  // namespace autotune
