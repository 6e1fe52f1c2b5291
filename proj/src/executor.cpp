#include "autotune/executor.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "autotune/landscapes.hpp"
#include "autotune/numeric_text.hpp"
#include "autotune/random.hpp"

extern char** environ;

namespace autotune {

std::string to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::nonzero_exit: return "nonzero_exit";
    case FailureReason::timeout: return "timeout";
    case FailureReason::parse_error: return "parse_error";
    case FailureReason::setup_error: return "setup_error";
  }
  return "?";
}

std::optional<FailureReason> parse_failure_reason(const std::string& text) {
  if (text == "nonzero_exit") return FailureReason::nonzero_exit;
  if (text == "timeout") return FailureReason::timeout;
  if (text == "parse_error") return FailureReason::parse_error;
  if (text == "setup_error") return FailureReason::setup_error;
  return std::nullopt;
}

std::vector<DeclaredMetric> TargetSpec::declared_metrics() const {
  if (const auto* p = std::get_if<ProcessTarget>(&kind)) return p->declared_metrics;
  const auto& synth = std::get<SyntheticTarget>(kind);
  return {{get_landscape(synth.landscape_id).metric, true}};
}

std::set<std::string> TargetSpec::positive_metrics() const {
  std::set<std::string> out;
  for (const auto& m : declared_metrics()) {
    if (m.positive) out.insert(m.name);
  }
  return out;
}

namespace {

const std::regex& placeholder_pattern() {
  static const std::regex re(R"(\{\{([A-Za-z0-9_.\-]+)\}\})");
  return re;
}

std::string expand_placeholders(const std::string& command,
                                const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  auto begin = std::sregex_iterator(command.begin(), command.end(), placeholder_pattern());
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out += command.substr(last, static_cast<std::size_t>(m.position()) - last);
    const auto name = m[1].str();
    auto found = std::find_if(values.begin(), values.end(),
                              [&](const auto& kv) { return kv.first == name; });
    out += found != values.end() ? found->second : m.str();
    last = static_cast<std::size_t>(m.position() + m.length());
  }
  out += command.substr(last);
  return out;
}

}  // namespace

void validate_target(const TargetSpec& target, const ParameterSpace& space) {
  if (const auto* synth = std::get_if<SyntheticTarget>(&target.kind)) {
    const auto def = get_landscape(synth->landscape_id);
    if (def.dimension != space.dimension()) {
      throw TargetError("landscape '" + synth->landscape_id + "' has dimension " +
                        std::to_string(def.dimension) + " but the space has " +
                        std::to_string(space.dimension()) + " parameters");
    }
    if (!(synth->noise_stddev >= 0.0) || !std::isfinite(synth->noise_stddev)) {
      throw TargetError("noise must be a non-negative fraction");
    }
    if (synth->repetitions == 0) throw TargetError("repetitions must be positive");
    return;
  }
  const auto& proc = std::get<ProcessTarget>(target.kind);
  if (!(proc.timeout_seconds > 0.0)) throw TargetError("timeout must be positive");
  if (proc.test_command.empty()) throw TargetError("process target needs a test command");
  if (proc.declared_metrics.empty()) throw TargetError("process target must declare its metrics");
  if (proc.repetitions == 0) throw TargetError("repetitions must be positive");
  if (proc.render == ProcessTarget::Render::file && proc.render_path.empty()) {
    throw TargetError("file rendering needs a path");
  }
  if (proc.metrics_source == ProcessTarget::MetricsSource::results_file &&
      proc.results_path.empty()) {
    throw TargetError("results_file metrics need a path");
  }
  for (const auto* cmd : {&proc.setup_command, &proc.test_command, &proc.teardown_command}) {
    for (auto it = std::sregex_iterator(cmd->begin(), cmd->end(), placeholder_pattern());
         it != std::sregex_iterator(); ++it) {
      if (!space.index_of((*it)[1].str())) {
        throw TargetError("command placeholder '" + it->str() + "' names no parameter");
      }
    }
  }
}

std::optional<MetricVector> parse_metric_line(const std::string& line) {
  std::istringstream in(line);
  std::string token;
  MetricVector out;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) return std::nullopt;
    const auto value = parse_number(std::string_view(token).substr(eq + 1));
    if (!value) return std::nullopt;
    out[token.substr(0, eq)] = *value;
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> render_setting(const ParameterSpace& space,
                                                                const ConfigSetting& setting) {
  const auto natives = decode_setting(space, setting);
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < natives.size(); ++i) {
    out.emplace_back(space[i].name(), format_native(natives[i]));
  }
  return out;
}

MetricVector eval_landscape(const std::string& landscape_id, const ConfigSetting& point) {
  const auto def = get_landscape(landscape_id);
  return {{def.metric, def.evaluate(point.values)}};
}

namespace {

struct CommandResult {
  bool timed_out = false;
  int exit_code = -1;
  std::string out;
  std::string err;
};

using Clock = std::chrono::steady_clock;

CommandResult run_command(const std::string& command, const std::vector<std::string>& extra_env,
                          double timeout_seconds) {
  int out_pipe[2];
  int err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    throw TargetError(std::string("pipe failed: ") + std::strerror(errno));
  }

  // envp is assembled before fork so the child only calls async-signal-safe functions
  std::vector<std::string> env_strings;
  for (char** e = environ; *e != nullptr; ++e) env_strings.emplace_back(*e);
  for (const auto& kv : extra_env) env_strings.push_back(kv);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::string sh = "/bin/sh";
  std::string dash_c = "-c";
  std::string cmd = command;
  std::array<char*, 4> argv{sh.data(), dash_c.data(), cmd.data(), nullptr};

  const pid_t pid = fork();
  if (pid < 0) throw TargetError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    setpgid(0, 0);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    execve(argv[0], argv.data(), envp.data());
    _exit(127);
  }
  setpgid(pid, pid);
  close(out_pipe[1]);
  close(err_pipe[1]);

  CommandResult result;
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(timeout_seconds));
  std::array<pollfd, 2> fds{pollfd{out_pipe[0], POLLIN, 0}, pollfd{err_pipe[0], POLLIN, 0}};
  std::array<std::string*, 2> sinks{&result.out, &result.err};
  int open_fds = 2;
  std::array<char, 4096> buf{};
  while (open_fds > 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      break;
    }
    const int ready = poll(fds.data(), fds.size(), static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) continue;
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].fd < 0 || fds[i].revents == 0) continue;
      const auto n = read(fds[i].fd, buf.data(), buf.size());
      if (n > 0) {
        sinks[i]->append(buf.data(), static_cast<std::size_t>(n));
      } else if (n == 0 || (n < 0 && errno != EINTR)) {
        close(fds[i].fd);
        fds[i].fd = -1;
        --open_fds;
      }
    }
  }

  int status = 0;
  if (result.timed_out) {
    kill(-pid, SIGKILL);
    waitpid(pid, &status, 0);
  } else {
    // output closed; the shell may still be exiting
    while (true) {
      const pid_t r = waitpid(pid, &status, WNOHANG);
      if (r == pid) break;
      if (Clock::now() >= deadline) {
        result.timed_out = true;
        kill(-pid, SIGKILL);
        waitpid(pid, &status, 0);
        break;
      }
      usleep(1000);
    }
  }
  for (auto& f : fds) {
    if (f.fd >= 0) close(f.fd);
  }
  if (!result.timed_out) {
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  }
  return result;
}

std::string last_nonempty_line(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string last;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) last = line;
  }
  return last;
}

class TestLog {
 public:
  explicit TestLog(const std::string& dir, std::uint64_t index) {
    if (dir.empty()) return;
    path_ = dir + "/test-" + std::to_string(index) + ".log";
    out_.open(path_, std::ios::app);
    if (!out_) path_.clear();
  }

  void section(const std::string& label, const std::string& command, const CommandResult& r) {
    if (!out_) return;
    out_ << "== " << label << ": " << command << "\n";
    out_ << r.out;
    if (!r.err.empty()) out_ << "-- stderr\n" << r.err;
    out_ << "-- " << (r.timed_out ? std::string("timeout") : "exit " + std::to_string(r.exit_code))
         << "\n";
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

TestOutcome failed(FailureReason reason, std::string detail) {
  TestOutcome o;
  o.failure = reason;
  o.detail = std::move(detail);
  return o;
}

TestOutcome run_process_once(const ProcessTarget& target, const ParameterSpace& space,
                             const ConfigSetting& setting, TestLog& log) {
  const auto rendered = render_setting(space, setting);
  std::vector<std::string> env;
  if (target.render == ProcessTarget::Render::env) {
    for (const auto& [name, value] : rendered) env.push_back("CONF_" + name + "=" + value);
  } else {
    std::ofstream file(target.render_path, std::ios::trunc);
    if (!file) return failed(FailureReason::setup_error, "cannot write " + target.render_path);
    for (const auto& [name, value] : rendered) file << name << '=' << value << '\n';
  }
  if (target.metrics_source == ProcessTarget::MetricsSource::results_file) {
    std::remove(target.results_path.c_str());
  }

  auto run = [&](const char* label, const std::string& command) {
    const auto expanded = expand_placeholders(command, rendered);
    auto r = run_command(expanded, env, target.timeout_seconds);
    log.section(label, expanded, r);
    return r;
  };

  TestOutcome outcome;
  if (!target.setup_command.empty()) {
    const auto r = run("setup", target.setup_command);
    if (r.timed_out || r.exit_code != 0) {
      outcome = failed(FailureReason::setup_error,
                       r.timed_out ? "setup timed out" : "setup exited " + std::to_string(r.exit_code));
    }
  }
  if (outcome.ok()) {
    const auto r = run("test", target.test_command);
    if (r.timed_out) {
      outcome = failed(FailureReason::timeout, "test exceeded " +
                                                   format_number(target.timeout_seconds) + " s");
    } else if (r.exit_code != 0) {
      outcome = failed(FailureReason::nonzero_exit, "test exited " + std::to_string(r.exit_code));
    } else {
      std::string source;
      if (target.metrics_source == ProcessTarget::MetricsSource::stdout_last_line) {
        source = last_nonempty_line(r.out);
      } else {
        std::ifstream in(target.results_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        source = last_nonempty_line(buf.str());
      }
      auto metrics = parse_metric_line(source);
      if (!metrics) {
        outcome = failed(FailureReason::parse_error, "malformed metrics line: " + source);
      } else {
        for (const auto& m : target.declared_metrics) {
          auto it = metrics->find(m.name);
          if (it == metrics->end() || !std::isfinite(it->second)) {
            outcome = failed(FailureReason::parse_error, "metric '" + m.name + "' missing or not finite");
            break;
          }
        }
        if (outcome.ok()) outcome.metrics = std::move(*metrics);
      }
    }
  }
  if (!target.teardown_command.empty()) {
    const auto r = run("teardown", target.teardown_command);
    if ((r.timed_out || r.exit_code != 0) && outcome.ok()) {
      outcome = failed(FailureReason::setup_error, "teardown failed after a successful test");
    }
  }
  return outcome;
}

void accumulate(MetricVector& sum, const MetricVector& add) {
  for (const auto& [k, v] : add) sum[k] += v;
}

void average(MetricVector& sum, std::size_t count) {
  for (auto& [k, v] : sum) v /= static_cast<double>(count);
}

}  // namespace

TestOutcome run_test(const TargetSpec& target, const ParameterSpace& space,
                     const ConfigSetting& setting, const TestContext& context) {
  const auto report = validate(space, setting);
  if (!report.ok()) throw TargetError("setting is outside the space: " + report.describe());

  if (const auto* synth = std::get_if<SyntheticTarget>(&target.kind)) {
    const auto def = get_landscape(synth->landscape_id);
    const double clean = def.evaluate(to_unit_cube(space, setting));
    Rng noise(mix_seed(context.seed, context.test_index));
    double total = 0.0;
    for (std::size_t r = 0; r < synth->repetitions; ++r) {
      total += synth->noise_stddev > 0.0 ? clean * (1.0 + synth->noise_stddev * noise.normal()) : clean;
    }
    TestOutcome outcome;
    outcome.metrics[def.metric] = total / static_cast<double>(synth->repetitions);
    return outcome;
  }

  const auto& proc = std::get<ProcessTarget>(target.kind);
  const auto start = Clock::now();
  TestLog log(proc.log_dir, context.test_index);
  MetricVector sum;
  TestOutcome outcome;
  for (std::size_t r = 0; r < proc.repetitions; ++r) {
    outcome = run_process_once(proc, space, setting, log);
    if (!outcome.ok()) break;
    accumulate(sum, outcome.metrics);
  }
  if (outcome.ok()) {
    average(sum, proc.repetitions);
    outcome.metrics = std::move(sum);
  }
  outcome.duration_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  outcome.log_ref = log.path();
  return outcome;
}

}  // namespace autotune
