#include <filesystem>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "autotune/landscapes.hpp"
#include "autotune/tuner.hpp"
#include "yaml_support.hpp"

namespace autotune {

namespace {

using detail::at_line;

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw JobError(at_line(node) + "'" + field + "' has the wrong type");
  }
}

template <typename T>
T optional_scalar(const YAML::Node& parent, const char* field, T fallback) {
  const auto node = parent[field];
  if (!node) return fallback;
  return scalar<T>(node, field);
}

std::size_t count_field(const YAML::Node& parent, const char* field, std::size_t fallback) {
  const auto node = parent[field];
  if (!node) return fallback;
  const auto v = scalar<long long>(node, field);
  if (v < 0) throw JobError(at_line(node) + "'" + field + "' must not be negative");
  return static_cast<std::size_t>(v);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).string();
}

TargetSpec target_from_yaml(const YAML::Node& node) {
  if (!node || !node.IsMap()) throw JobError(at_line(node) + "job needs a 'target' mapping");
  const auto kind = optional_scalar<std::string>(node, "kind", "");
  if (kind == "synthetic") {
    SyntheticTarget t;
    const auto landscape = node["landscape"];
    if (!landscape) throw JobError(at_line(node) + "synthetic target needs 'landscape'");
    t.landscape_id = scalar<std::string>(landscape, "landscape");
    t.noise_stddev = optional_scalar<double>(node, "noise", 0.0);
    t.repetitions = count_field(node, "repetitions", 1);
    return {t};
  }
  if (kind == "process") {
    ProcessTarget t;
    t.setup_command = optional_scalar<std::string>(node, "setup", "");
    t.test_command = optional_scalar<std::string>(node, "test", "");
    t.teardown_command = optional_scalar<std::string>(node, "teardown", "");
    const auto render = optional_scalar<std::string>(node, "render", "env");
    if (render == "env") t.render = ProcessTarget::Render::env;
    else if (render == "file") t.render = ProcessTarget::Render::file;
    else throw JobError(at_line(node["render"]) + "render must be 'env' or 'file'");
    t.render_path = optional_scalar<std::string>(node, "render_path", "");
    const auto source = optional_scalar<std::string>(node, "metrics_source", "stdout");
    if (source == "stdout") t.metrics_source = ProcessTarget::MetricsSource::stdout_last_line;
    else if (source == "file") t.metrics_source = ProcessTarget::MetricsSource::results_file;
    else throw JobError(at_line(node["metrics_source"]) + "metrics_source must be 'stdout' or 'file'");
    t.results_path = optional_scalar<std::string>(node, "results_path", "");
    t.timeout_seconds = optional_scalar<double>(node, "timeout", 60.0);
    t.repetitions = count_field(node, "repetitions", 1);
    t.log_dir = optional_scalar<std::string>(node, "log_dir", "");
    const auto metrics = node["metrics"];
    if (!metrics || !metrics.IsSequence()) {
      throw JobError(at_line(node) + "process target needs a 'metrics' list");
    }
    for (const auto& m : metrics) {
      if (m.IsScalar()) {
        t.declared_metrics.push_back({m.as<std::string>(), false});
      } else {
        const auto name = m["name"];
        if (!name) throw JobError(at_line(m) + "metric entry needs 'name'");
        t.declared_metrics.push_back(
            {scalar<std::string>(name, "name"), optional_scalar<bool>(m, "positive", false)});
      }
    }
    return {t};
  }
  throw JobError(at_line(node) + "target kind must be 'synthetic' or 'process'");
}

NativeValue native_from_yaml(const Parameter& p, const YAML::Node& node) {
  switch (p.kind()) {
    case ParamKind::continuous: return scalar<double>(node, p.name());
    case ParamKind::integer: return scalar<long long>(node, p.name());
    case ParamKind::boolean: return scalar<bool>(node, p.name());
    case ParamKind::categorical: return scalar<std::string>(node, p.name());
  }
  return 0.0;
}

}  // namespace

TuningJob parse_job(const std::string& text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw JobError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw JobError("job file must be a mapping");

  auto target = target_from_yaml(root["target"]);

  std::optional<ParameterSpace> space;
  try {
    if (const auto node = root["space"]) {
      if (node.IsScalar()) space = load_space(resolve(base_dir, node.as<std::string>()));
      else space = detail::space_from_yaml(node);
    } else if (const auto params = root["parameters"]) {
      space = detail::space_from_yaml(params);
    } else if (const auto* synth = std::get_if<SyntheticTarget>(&target.kind)) {
      space = get_landscape(synth->landscape_id).default_space();
    } else {
      throw JobError("job needs 'space' or 'parameters'");
    }
  } catch (const SpaceError& e) {
    throw JobError(e.what());
  } catch (const LandscapeError& e) {
    throw JobError(e.what());
  }

  const auto utility_node = root["utility"];
  if (!utility_node) throw JobError("job needs a 'utility' expression");
  std::optional<UtilitySpec> utility;
  try {
    utility = UtilitySpec::parse(scalar<std::string>(utility_node, "utility"));
  } catch (const UtilityError& e) {
    throw JobError(at_line(utility_node) + e.what());
  }

  const auto goal_text = optional_scalar<std::string>(root, "goal", "maximize");
  const auto goal = parse_goal_direction(goal_text);
  if (!goal) throw JobError(at_line(root["goal"]) + "goal must be 'maximize' or 'minimize'");
  const auto sampler_text = optional_scalar<std::string>(root, "sampler", "dds");
  const auto sampler = parse_sampler_kind(sampler_text);
  if (!sampler) throw JobError(at_line(root["sampler"]) + "unknown sampler '" + sampler_text + "'");
  const auto optimizer_text = optional_scalar<std::string>(root, "optimizer", "rbs");
  const auto optimizer = parse_optimizer_kind(optimizer_text);
  if (!optimizer) {
    throw JobError(at_line(root["optimizer"]) + "unknown optimizer '" + optimizer_text + "'");
  }

  TuningJob job{*space, std::move(target), *utility};
  job.goal = *goal;
  job.sampler = *sampler;
  job.optimizer = *optimizer;
  job.budget_total = count_field(root, "budget", 0);
  job.set_size = count_field(root, "set_size", 0);
  if (const auto seed = root["seed"]) {
    job.seed = scalar<std::uint64_t>(seed, "seed");
    job.seed_given = true;
  }
  job.history_path = resolve(base_dir, optional_scalar<std::string>(root, "history", ""));
  if (const auto rrs = root["rrs"]) {
    job.rrs.q = optional_scalar<double>(rrs, "q", job.rrs.q);
    job.rrs.c = optional_scalar<double>(rrs, "c", job.rrs.c);
    job.rrs.v = optional_scalar<double>(rrs, "v", job.rrs.v);
  }
  if (const auto base = root["baseline"]) {
    if (!base.IsMap()) throw JobError(at_line(base) + "baseline must map parameter names to values");
    ConfigSetting setting;
    for (const auto& p : job.space.parameters()) {
      const auto v = base[p.name()];
      if (!v) throw JobError(at_line(base) + "baseline is missing parameter '" + p.name() + "'");
      try {
        setting.values.push_back(encode(p, native_from_yaml(p, v)));
      } catch (const SpaceError& e) {
        throw JobError(at_line(v) + e.what());
      }
    }
    job.baseline = std::move(setting);
  }
  return job;
}

TuningJob load_job(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw JobError("cannot open job file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_job(buf.str(), dir.empty() ? "." : dir);
}

}  // namespace autotune
