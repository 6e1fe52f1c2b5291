#include "autotune/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "autotune/numeric_text.hpp"

namespace autotune {

using ordered_json = nlohmann::ordered_json;

void TuningJob::check() const {
  if (set_size == 0) throw JobError("set_size must be positive");
  if (budget_total == 0) throw JobError("budget must be positive");
  if (set_size > budget_total) {
    throw JobError("set_size " + std::to_string(set_size) + " exceeds the budget of " +
                   std::to_string(budget_total));
  }
  if (baseline) {
    const auto report = validate(space, *baseline);
    if (!report.ok()) throw JobError("baseline setting is invalid: " + report.describe());
  }
  try {
    validate_target(target, space);
    utility.check_against([&] {
      std::set<std::string> names;
      for (const auto& m : target.declared_metrics()) names.insert(m.name);
      return names;
    }());
    orient_for_maximization(utility, goal, target.positive_metrics());
  } catch (const std::exception& e) {
    throw JobError(e.what());
  }
}

std::string to_string(RecordScope scope) {
  switch (scope) {
    case RecordScope::baseline: return "baseline";
    case RecordScope::whole: return "whole";
    case RecordScope::bounded: return "bounded";
  }
  return "?";
}

Sample HistoryRecord::to_sample() const {
  Sample s;
  s.setting = encoded;
  s.metrics = metrics;
  s.utility = ok() ? utility : std::nullopt;
  s.round = round;
  s.test_index = test_index;
  s.status = ok() ? SampleStatus::ok : SampleStatus::failed;
  return s;
}

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

HistoryHeader make_header(const TuningJob& job) {
  HistoryHeader h;
  h.schema_hash = job.space.schema_hash();
  h.seed = job.seed;
  h.budget = job.budget_total;
  h.set_size = job.set_size;
  h.sampler = to_string(job.sampler);
  h.optimizer = to_string(job.optimizer);
  h.utility = job.utility.to_string();
  h.space = job.space.canonical();
  return h;
}

std::string history_header_line(const HistoryHeader& h) {
  ordered_json j;
  j["type"] = "header";
  j["version"] = h.version;
  j["schema_hash"] = hex64(h.schema_hash);
  j["seed"] = h.seed;
  j["budget"] = h.budget;
  j["set_size"] = h.set_size;
  j["sampler"] = h.sampler;
  j["optimizer"] = h.optimizer;
  j["utility"] = h.utility;
  j["space"] = h.space;
  return j.dump();
}

std::string history_record_line(const HistoryRecord& r) {
  ordered_json j;
  j["type"] = "test";
  j["test_index"] = r.test_index;
  j["round"] = r.round;
  j["scope"] = to_string(r.scope);
  j["cell"] = r.cell;
  j["encoded"] = r.encoded.values;
  ordered_json decoded = ordered_json::object();
  for (const auto& [name, value] : r.decoded) decoded[name] = value;
  j["decoded"] = decoded;
  ordered_json metrics = ordered_json::object();
  for (const auto& [name, value] : r.metrics) metrics[name] = value;
  j["metrics"] = metrics;
  j["utility"] = r.utility ? ordered_json(*r.utility) : ordered_json(nullptr);
  j["status"] = r.failure ? "failed" : "ok";
  if (r.failure) j["failure"] = to_string(*r.failure);
  if (r.bounds) j["bounds"] = {{"low", r.bounds->low}, {"high", r.bounds->high}};
  j["duration"] = r.duration_seconds;
  j["timestamp"] = r.timestamp;
  return j.dump();
}

namespace {

HistoryHeader header_from_json(const ordered_json& j) {
  HistoryHeader h;
  h.version = j.at("version").get<std::string>();
  h.schema_hash = std::stoull(j.at("schema_hash").get<std::string>(), nullptr, 16);
  h.seed = j.at("seed").get<std::uint64_t>();
  h.budget = j.at("budget").get<std::size_t>();
  h.set_size = j.at("set_size").get<std::size_t>();
  h.sampler = j.at("sampler").get<std::string>();
  h.optimizer = j.at("optimizer").get<std::string>();
  h.utility = j.at("utility").get<std::string>();
  h.space = j.value("space", "");
  return h;
}

HistoryRecord record_from_json(const ordered_json& j) {
  HistoryRecord r;
  r.test_index = j.at("test_index").get<std::size_t>();
  r.round = j.at("round").get<std::size_t>();
  const auto scope = j.at("scope").get<std::string>();
  if (scope == "baseline") r.scope = RecordScope::baseline;
  else if (scope == "whole") r.scope = RecordScope::whole;
  else if (scope == "bounded") r.scope = RecordScope::bounded;
  else throw HistoryError("unknown scope '" + scope + "'");
  r.cell = j.at("cell").get<Cell>();
  r.encoded.values = j.at("encoded").get<std::vector<double>>();
  for (const auto& [name, value] : j.at("decoded").items()) {
    r.decoded.emplace_back(name, value.get<std::string>());
  }
  for (const auto& [name, value] : j.at("metrics").items()) r.metrics[name] = value.get<double>();
  if (!j.at("utility").is_null()) r.utility = j.at("utility").get<double>();
  const auto status = j.at("status").get<std::string>();
  if (status == "failed") {
    const auto reason = parse_failure_reason(j.at("failure").get<std::string>());
    if (!reason) throw HistoryError("unknown failure reason");
    r.failure = reason;
  } else if (status != "ok") {
    throw HistoryError("unknown status '" + status + "'");
  } else if (!r.utility) {
    throw HistoryError("ok record without utility");
  }
  if (j.contains("bounds")) {
    Bounds b;
    b.low = j["bounds"].at("low").get<std::vector<double>>();
    b.high = j["bounds"].at("high").get<std::vector<double>>();
    r.bounds = std::move(b);
  }
  r.duration_seconds = j.value("duration", 0.0);
  r.timestamp = j.value("timestamp", "");
  return r;
}

}  // namespace

HistoryFile parse_history(const std::string& text) {
  HistoryFile file;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "history line " + std::to_string(line_no) + ": ";
    try {
      const auto j = ordered_json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        if (file.header || !file.records.empty()) throw HistoryError("unexpected header");
        file.header = header_from_json(j);
      } else if (type == "test") {
        if (!file.header) throw HistoryError("test record before the header");
        auto record = record_from_json(j);
        if (record.test_index != file.records.size()) {
          throw HistoryError("test_index " + std::to_string(record.test_index) + " where " +
                             std::to_string(file.records.size()) + " was expected");
        }
        file.records.push_back(std::move(record));
      } else {
        throw HistoryError("unknown record type '" + type + "'");
      }
    } catch (const HistoryError& e) {
      throw HistoryError(where + e.what());
    } catch (const std::exception& e) {
      throw HistoryError(where + "corrupt record (" + e.what() + ")");
    }
  }
  return file;
}

HistoryFile read_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw HistoryError("cannot open history file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_history(buf.str());
}

std::vector<double> best_per_round(const std::vector<HistoryRecord>& history) {
  std::size_t rounds = 0;
  for (const auto& r : history) rounds = std::max(rounds, r.round);
  std::vector<double> out(rounds, std::nan(""));
  std::optional<double> best;
  for (const auto& r : history) {
    if (r.ok() && (!best || *r.utility > *best)) best = r.utility;
    if (r.round > 0 && best) out[r.round - 1] = *best;
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (std::isnan(out[i])) out[i] = out[i - 1];
  }
  return out;
}

namespace {

class Loop {
 public:
  Loop(const TuningJob& job, const std::vector<HistoryRecord>* replay, std::ofstream* out)
      : job_(job), replay_(replay), out_(out),
        utility_(orient_for_maximization(job.utility, job.goal, job.target.positive_metrics())) {}

  TuningResult run(const RunOptions& options) {
    SamplerOptions sopts;
    sopts.continuous_fallback = true;
    auto sampler = make_sampler(job_.sampler, job_.space, mix_seed(job_.seed, 0x5a3d), sopts);
    auto optimizer =
        make_optimizer(job_.optimizer, job_.space, job_.budget_total, job_.set_size, job_.rrs);

    TuningResult result;
    if (job_.baseline) {
      const auto& rec = test(0, RecordScope::baseline, {}, *job_.baseline, std::nullopt);
      optimizer->baseline(rec.to_sample());
    }
    const std::size_t first_test = result_.size();
    const std::size_t first_round_size =
        std::min(job_.set_size, job_.budget_total - first_test);

    RoundDecision decision = optimizer->start();
    std::size_t batches = 0;
    while (decision.action != Action::stop) {
      ++batches;
      const bool bounded = decision.action == Action::sample_bounded;
      const auto batch = sampler->sample(decision.batch_size, decision.bounds);
      std::vector<Sample> samples;
      samples.reserve(batch.size());
      for (std::size_t j = 0; j < batch.size(); ++j) {
        const std::size_t round = round_for(batches, result_.size() - first_test);
        const auto& rec = test(round, bounded ? RecordScope::bounded : RecordScope::whole,
                               batch.cells[j], batch.settings[j], decision.bounds);
        samples.push_back(rec.to_sample());
      }
      decision = optimizer->ingest(samples);

      const std::size_t done = result_.size() - first_test;
      if (done >= first_round_size && !first_round_checked_) {
        first_round_checked_ = true;
        bool any_ok = false;
        for (std::size_t i = first_test; i < first_test + first_round_size; ++i) {
          any_ok = any_ok || result_[i].ok();
        }
        if (!any_ok) {
          throw TuningAborted("every test of the first round failed (last failure: " +
                              last_detail_ + "); the target looks unusable");
        }
      }
      const std::size_t completed = rounds_completed(batches, done);
      if (options.stop_after_rounds && completed >= *options.stop_after_rounds &&
          decision.action != Action::stop) {
        result.interrupted = true;
        break;
      }
    }
    result.best = optimizer->best();
    result.history = std::move(result_);
    result.rounds = result.history.empty() ? 0 : result.history.back().round;
    return result;
  }

 private:
  std::size_t round_for(std::size_t batches, std::size_t tests_done) const {
    if (job_.optimizer == OptimizerKind::rbs) return batches;
    return 1 + tests_done / job_.set_size;
  }

  std::size_t rounds_completed(std::size_t batches, std::size_t tests_done) const {
    if (job_.optimizer == OptimizerKind::rbs) return batches;
    return tests_done / job_.set_size;
  }

  const HistoryRecord& test(std::size_t round, RecordScope scope, const Cell& cell,
                            const ConfigSetting& setting, const std::optional<Bounds>& bounds) {
    const std::size_t index = result_.size();
    if (replay_ != nullptr && index < replay_->size()) {
      const auto& old = (*replay_)[index];
      if (old.encoded != setting || old.round != round || old.scope != scope) {
        throw HistoryError("history record " + std::to_string(index) +
                           " does not match the replayed run (different job or corrupt file)");
      }
      result_.push_back(old);
      return result_.back();
    }

    HistoryRecord rec;
    rec.test_index = index;
    rec.round = round;
    rec.scope = scope;
    rec.cell = cell;
    rec.encoded = setting;
    rec.decoded = render_setting(job_.space, setting);
    if (scope == RecordScope::bounded) rec.bounds = bounds;
    rec.timestamp = utc_timestamp();
    const auto outcome = run_test(job_.target, job_.space, setting, {job_.seed, index});
    rec.duration_seconds = outcome.duration_seconds;
    if (outcome.ok()) {
      rec.metrics = outcome.metrics;
      try {
        rec.utility = utility_.evaluate(outcome.metrics);
      } catch (const UtilityError& e) {
        rec.failure = FailureReason::parse_error;
        last_detail_ = e.what();
      }
    } else {
      rec.failure = outcome.failure;
      last_detail_ = to_string(*outcome.failure) + ": " + outcome.detail;
    }
    if (out_ != nullptr) {
      *out_ << history_record_line(rec) << '\n';
      out_->flush();
    }
    result_.push_back(std::move(rec));
    return result_.back();
  }

  const TuningJob& job_;
  const std::vector<HistoryRecord>* replay_;
  std::ofstream* out_;
  UtilitySpec utility_;
  std::vector<HistoryRecord> result_;
  bool first_round_checked_ = false;
  std::string last_detail_ = "none";
};

void check_header(const HistoryHeader& found, const HistoryHeader& expected) {
  if (found.schema_hash != expected.schema_hash) {
    throw HistoryError("schema hash mismatch: the history was recorded for a different "
                       "parameter space");
  }
  auto same = [](const char* what, const auto& a, const auto& b) {
    if (!(a == b)) throw HistoryError(std::string("history ") + what + " differs from the job");
  };
  same("seed", found.seed, expected.seed);
  same("budget", found.budget, expected.budget);
  same("set size", found.set_size, expected.set_size);
  same("sampler", found.sampler, expected.sampler);
  same("optimizer", found.optimizer, expected.optimizer);
  same("utility", found.utility, expected.utility);
}

}  // namespace

TuningResult run_tuning(const TuningJob& job, const RunOptions& options) {
  job.check();
  std::ofstream out;
  if (!job.history_path.empty()) {
    out.open(job.history_path, std::ios::trunc);
    if (!out) throw JobError("cannot write history file '" + job.history_path + "'");
    out << history_header_line(make_header(job)) << '\n';
    out.flush();
  }
  Loop loop(job, nullptr, job.history_path.empty() ? nullptr : &out);
  return loop.run(options);
}

TuningResult resume(const TuningJob& job, const std::string& history_path,
                    const RunOptions& options) {
  job.check();
  auto file = read_history(history_path);
  if (!file.header) throw HistoryError("history file '" + history_path + "' has no header");
  check_header(*file.header, make_header(job));
  std::ofstream out(history_path, std::ios::app);
  if (!out) throw JobError("cannot append to history file '" + history_path + "'");
  Loop loop(job, &file.records, &out);
  return loop.run(options);
}

}  // namespace autotune
