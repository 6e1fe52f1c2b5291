#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "autotune/diagnostics.hpp"
#include "autotune/landscapes.hpp"
#include "autotune/numeric_text.hpp"
#include "autotune/tuner.hpp"

using namespace autotune;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitAborted = 3;

struct TuneFlags {
  std::string job_file;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> set_size;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> sampler;
  std::optional<std::string> optimizer;
  std::optional<std::string> history;
};

void add_override_flags(CLI::App* cmd, TuneFlags& f) {
  cmd->add_option("job", f.job_file, "YAML job file")->required();
  cmd->add_option("--budget", f.budget, "Total tests, baseline included (default: job file)");
  cmd->add_option("--set-size", f.set_size, "Tests per round (default: job file)");
  cmd->add_option("--seed", f.seed,
                  "Run seed (default: job file, then AUTOTUNE_SEED, then 0)");
  cmd->add_option("--sampler", f.sampler, "dds | lhs | uniform | grid (default: job file, then dds)");
  cmd->add_option("--optimizer", f.optimizer, "rbs | rrs (default: job file, then rbs)");
  cmd->add_option("--history", f.history, "History file path (default: job file)");
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("AUTOTUNE_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw JobError(std::string("AUTOTUNE_SEED is not an unsigned integer: ") + raw);
  }
}

TuningJob build_job(const TuneFlags& f) {
  auto job = load_job(f.job_file);
  if (f.budget) job.budget_total = *f.budget;
  if (f.set_size) job.set_size = *f.set_size;
  if (f.seed) {
    job.seed = *f.seed;
  } else if (!job.seed_given) {
    if (const auto s = env_seed()) job.seed = *s;
  }
  if (f.sampler) {
    const auto k = parse_sampler_kind(*f.sampler);
    if (!k) throw JobError("unknown sampler '" + *f.sampler + "'");
    job.sampler = *k;
  }
  if (f.optimizer) {
    const auto k = parse_optimizer_kind(*f.optimizer);
    if (!k) throw JobError("unknown optimizer '" + *f.optimizer + "'");
    job.optimizer = *k;
  }
  if (f.history) job.history_path = *f.history;
  job.check();
  return job;
}

void print_best(const ParameterSpace& space, const std::optional<Sample>& best) {
  if (!best) {
    std::cout << "no successful test\n";
    return;
  }
  std::cout << "best utility: " << format_number(*best->utility) << '\n';
  std::cout << "best setting:";
  const auto values = decode_setting(space, best->setting);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::cout << ' ' << space.parameters()[i].name() << '=' << format_native(values[i]);
  }
  std::cout << '\n';
}

void print_run(const TuningJob& job, const TuningResult& result) {
  std::cout << "tests: " << result.tests_used() << " of " << job.budget_total << '\n';
  std::cout << "rounds: " << result.rounds << '\n';
  print_best(job.space, result.best);
  if (!job.history_path.empty()) std::cout << "history: " << job.history_path << '\n';
}

int cmd_report(const std::string& path) {
  const auto file = read_history(path);
  if (file.records.empty()) {
    std::cout << "no tests recorded\n";
    return kExitOk;
  }
  const auto trajectory = best_per_round(file.records);
  for (std::size_t r = 0; r < trajectory.size(); ++r) {
    std::cout << "round " << (r + 1) << " best "
              << (std::isnan(trajectory[r]) ? std::string("none") : format_number(trajectory[r]))
              << '\n';
  }
  std::cout << "tests: " << file.records.size() << '\n';

  std::map<std::string, std::size_t> failures;
  const HistoryRecord* best = nullptr;
  for (const auto& r : file.records) {
    if (r.failure) ++failures[to_string(*r.failure)];
    if (r.ok() && (best == nullptr || *r.utility > *best->utility)) best = &r;
  }
  if (failures.empty()) {
    std::cout << "failures: none\n";
  } else {
    std::cout << "failures:";
    for (const auto& [reason, count] : failures) std::cout << ' ' << reason << '=' << count;
    std::cout << '\n';
  }
  if (best == nullptr) {
    std::cout << "no successful test\n";
    return kExitOk;
  }
  std::cout << "best utility: " << format_number(*best->utility) << '\n';
  std::cout << "best setting:";
  for (const auto& [name, value] : best->decoded) std::cout << ' ' << name << '=' << value;
  std::cout << '\n';
  return kExitOk;
}

Bounds parse_bounds(const std::string& text, const LandscapeDef& def) {
  auto box = Bounds::whole(def.default_space());
  if (text.empty()) return box;
  // lo:hi per axis, comma separated
  std::size_t d = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const auto item = text.substr(start, end - start);
    const auto colon = item.find(':');
    const auto lo = colon == std::string::npos ? std::nullopt : parse_number(item.substr(0, colon));
    const auto hi = colon == std::string::npos ? std::nullopt : parse_number(item.substr(colon + 1));
    if (!lo || !hi || d >= box.dimension()) {
      throw DiagnosticsError("bounds must be lo:hi for each of the " +
                             std::to_string(box.dimension()) + " axes");
    }
    box.low[d] = *lo;
    box.high[d] = *hi;
    ++d;
    start = end + 1;
  }
  if (d != box.dimension()) {
    throw DiagnosticsError("bounds must be lo:hi for each of the " +
                           std::to_string(box.dimension()) + " axes");
  }
  return box;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box configuration tuner"};
  app.require_subcommand(1);

  TuneFlags tune_flags;
  auto* tune = app.add_subcommand("tune", "Run a tuning job");
  add_override_flags(tune, tune_flags);

  TuneFlags resume_flags;
  auto* resume_cmd = app.add_subcommand("resume", "Continue an interrupted run from its history");
  add_override_flags(resume_cmd, resume_flags);

  std::string landscapes = "bumpy";
  std::string strategies = "dds+rbs";
  std::size_t trials = 50;
  std::size_t cmp_set_size = 100;
  std::size_t rounds = 2;
  std::uint64_t cmp_seed = 1;
  double noise = 0.0;
  std::string csv_path;
  std::string summary_path;
  auto* compare = app.add_subcommand("compare", "Compare sampler+optimizer strategies");
  compare->add_option("--landscape", landscapes, "Comma-separated landscape ids")
      ->capture_default_str();
  compare->add_option("--strategies", strategies, "Comma-separated sampler+optimizer pairs")
      ->capture_default_str();
  compare->add_option("--trials", trials, "Seeded trials per strategy")->capture_default_str();
  compare->add_option("--set-size", cmp_set_size, "Tests per round")->capture_default_str();
  compare->add_option("--rounds", rounds, "Rounds per trial")->capture_default_str();
  compare->add_option("--seed", cmp_seed, "Seed of the first trial")->capture_default_str();
  compare->add_option("--noise", noise, "Relative noise standard deviation")->capture_default_str();
  compare->add_option("--csv", csv_path, "Trajectory CSV path (default: stdout)");
  compare->add_option("--summary", summary_path, "Median/IQR CSV path (default: none)");

  std::string phi_landscape = "step_slab";
  double y0 = 0.0;
  std::size_t resolution = 200;
  std::string bounds_text;
  bool per_subspace = false;
  auto* phi = app.add_subcommand("phi", "Estimate the share of points no better than y0");
  phi->add_option("--landscape", phi_landscape, "Landscape id")->capture_default_str();
  phi->add_option("--y0", y0, "Performance threshold")->required();
  phi->add_option("--resolution", resolution, "Grid points per dimension")->capture_default_str();
  phi->add_option("--bounds", bounds_text, "Subspace as lo:hi,lo:hi,... (default: whole space)");
  phi->add_flag("--subspace-denominator", per_subspace,
                "Normalize by the subspace's own grid points instead of the whole space");

  std::string report_path;
  auto* report = app.add_subcommand("report", "Summarize a history file");
  report->add_option("history", report_path, "History file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*tune) {
      const auto job = build_job(tune_flags);
      print_run(job, run_tuning(job));
    } else if (*resume_cmd) {
      const auto job = build_job(resume_flags);
      if (job.history_path.empty()) throw JobError("resume needs a history file");
      print_run(job, autotune::resume(job, job.history_path));
    } else if (*compare) {
      ComparisonConfig config;
      config.strategies = parse_strategies(strategies);
      std::size_t start = 0;
      while (start <= landscapes.size()) {
        const auto end = std::min(landscapes.find(',', start), landscapes.size());
        if (end > start) {
          config.landscapes.push_back(landscapes.substr(start, end - start));
          get_landscape(config.landscapes.back());
        }
        start = end + 1;
      }
      config.trials = trials;
      config.set_size = cmp_set_size;
      config.rounds = rounds;
      config.base_seed = cmp_seed;
      config.noise = noise;
      const auto result = compare_strategies(config);
      if (csv_path.empty()) {
        result.write_csv(std::cout);
      } else {
        std::ofstream out(csv_path);
        if (!out) throw JobError("cannot write '" + csv_path + "'");
        result.write_csv(out);
      }
      if (!summary_path.empty()) {
        std::ofstream out(summary_path);
        if (!out) throw JobError("cannot write '" + summary_path + "'");
        result.write_summary_csv(out);
      }
    } else if (*phi) {
      const auto def = get_landscape(phi_landscape);
      const auto box = parse_bounds(bounds_text, def);
      const auto est = empirical_phi(
          phi_landscape, box, y0, resolution,
          per_subspace ? PhiDenominator::subspace : PhiDenominator::whole_space);
      std::cout << "phi " << format_number(est.phi) << '\n';
    } else if (*report) {
      return cmd_report(report_path);
    }
  } catch (const TuningAborted& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return kExitAborted;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}
