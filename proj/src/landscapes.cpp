#include "autotune/landscapes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "autotune/numeric_text.hpp"

namespace autotune {

namespace {

// Bump layout for the 2-D archetype; higher dimensions repeat the pattern.
struct BumpSeed {
  double x;
  double y;
  double width;
  double height;
};

constexpr BumpSeed kBumps[] = {
    {0.15, 0.20, 0.08, 120.0},
    {0.80, 0.25, 0.06, 150.0},
    {0.35, 0.75, 0.07, 130.0},
    {0.55, 0.45, 0.10, 100.0},
    {0.82, 0.82, 0.035, 200.0},
};

double squared_distance(std::span<const double> a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

struct IdArgs {
  std::string name;
  std::vector<std::pair<std::string, double>> values;
};

IdArgs split_id(const std::string& id) {
  IdArgs out;
  const auto colon = id.find(':');
  out.name = id.substr(0, colon);
  if (colon == std::string::npos) return out;
  std::stringstream rest(id.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw LandscapeError("landscape argument '" + item + "' needs key=value");
    const auto v = parse_number(item.substr(eq + 1));
    if (!v || !std::isfinite(*v)) {
      throw LandscapeError("landscape argument '" + item + "' has a non-numeric value");
    }
    out.values.emplace_back(item.substr(0, eq), *v);
  }
  return out;
}

std::size_t as_dimension(double v) {
  if (v < 1 || v > 64 || std::floor(v) != v) throw LandscapeError("dim must be an integer in 1..64");
  return static_cast<std::size_t>(v);
}

}  // namespace

double LandscapeDef::evaluate(std::span<const double> x) const {
  if (x.size() != dimension) {
    throw LandscapeError("landscape '" + id + "' expects " + std::to_string(dimension) +
                         " coordinates, got " + std::to_string(x.size()));
  }
  switch (kind) {
    case LandscapeKind::step_slab: {
      const double v = x[slab_axis];
      return (v >= slab_low && v < slab_high) ? base * slab_ratio : base;
    }
    case LandscapeKind::bumpy: {
      double mean = 0.0;
      for (double c : x) mean += c;
      mean /= static_cast<double>(dimension);
      double f = trend_level + trend_slope * mean;
      for (const auto& b : bumps) {
        f += b.height * std::exp(-squared_distance(x, b.center) / (2.0 * b.width * b.width));
      }
      return f;
    }
    case LandscapeKind::smooth_bowl:
      return peak - curvature * squared_distance(x, maximizer);
  }
  return 0.0;
}

double LandscapeDef::minimum_value() const {
  switch (kind) {
    case LandscapeKind::step_slab: return base;
    case LandscapeKind::bumpy: return trend_level;  // bumps are positive, trend >= level
    case LandscapeKind::smooth_bowl: {
      double far = 0.0;
      for (double m : maximizer) far += std::max(m, 1.0 - m) * std::max(m, 1.0 - m);
      return peak - curvature * far;
    }
  }
  return 0.0;
}

std::vector<double> LandscapeDef::peak_location() const {
  if (kind == LandscapeKind::bumpy) {
    auto tallest = std::max_element(bumps.begin(), bumps.end(),
                                    [](const Bump& a, const Bump& b) { return a.height < b.height; });
    return tallest->center;
  }
  return analytic_max->point;
}

ParameterSpace LandscapeDef::default_space() const {
  std::vector<Parameter> params;
  for (std::size_t i = 0; i < dimension; ++i) {
    params.push_back(Parameter::continuous("x" + std::to_string(i), 0.0, 1.0));
  }
  return ParameterSpace(std::move(params));
}

LandscapeDef get_landscape(const std::string& id) {
  const auto args = split_id(id);
  LandscapeDef def;
  def.id = id;
  if (args.name == "step_slab") {
    def.kind = LandscapeKind::step_slab;
    double fraction = 0.125;
    for (const auto& [key, v] : args.values) {
      if (key == "dim") def.dimension = as_dimension(v);
      else if (key == "base") def.base = v;
      else if (key == "fraction") fraction = v;
      else throw LandscapeError("step_slab has no argument '" + key + "'");
    }
    if (!(def.base > 0.0)) throw LandscapeError("step_slab base must be positive");
    if (!(fraction > 0.0 && fraction < 1.0)) throw LandscapeError("slab fraction must be in (0, 1)");
    def.slab_low = std::min(0.625, 1.0 - fraction);
    def.slab_high = def.slab_low + fraction;
    std::vector<double> point(def.dimension, 0.5);
    point[def.slab_axis] = 0.5 * (def.slab_low + def.slab_high);
    def.analytic_max = KnownMaximum{point, def.base * def.slab_ratio};
  } else if (args.name == "bumpy") {
    def.kind = LandscapeKind::bumpy;
    for (const auto& [key, v] : args.values) {
      if (key == "dim") def.dimension = as_dimension(v);
      else throw LandscapeError("bumpy has no argument '" + key + "'");
    }
    for (const auto& seed : kBumps) {
      Bump b{std::vector<double>(def.dimension), seed.width, seed.height};
      for (std::size_t d = 0; d < def.dimension; ++d) b.center[d] = (d % 2 == 0) ? seed.x : seed.y;
      def.bumps.push_back(std::move(b));
    }
  } else if (args.name == "smooth_bowl") {
    def.kind = LandscapeKind::smooth_bowl;
    for (const auto& [key, v] : args.values) {
      if (key == "dim") def.dimension = as_dimension(v);
      else throw LandscapeError("smooth_bowl has no argument '" + key + "'");
    }
    // keeps the bowl floor at 385 for every dimension
    def.curvature = 1600.0 / static_cast<double>(def.dimension);
    def.maximizer.resize(def.dimension);
    for (std::size_t d = 0; d < def.dimension; ++d) def.maximizer[d] = (d % 2 == 0) ? 0.62 : 0.38;
    def.analytic_max = KnownMaximum{def.maximizer, def.peak};
  } else {
    std::string known;
    for (const auto& name : list_landscapes()) known += (known.empty() ? "" : ", ") + name;
    throw LandscapeError("unknown landscape '" + args.name + "' (available: " + known + ")");
  }
  return def;
}

std::vector<std::string> list_landscapes() { return {"step_slab", "bumpy", "smooth_bowl"}; }

std::vector<double> to_unit_cube(const ParameterSpace& space, const ConfigSetting& setting) {
  if (setting.values.size() != space.dimension()) {
    throw DimensionMismatch(space.dimension(), setting.values.size());
  }
  std::vector<double> out(space.dimension());
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const auto& p = space[i];
    out[i] = (setting.values[i] - p.encoded_low()) / (p.encoded_high() - p.encoded_low());
  }
  return out;
}

}  // namespace autotune
