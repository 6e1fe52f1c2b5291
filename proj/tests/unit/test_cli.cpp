#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string command = std::string(AUTOTUNE_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct Workspace {
  fs::path dir = fs::temp_directory_path() / ("autotune-cli-" + std::to_string(::getpid()));
  Workspace() {
    fs::create_directories(dir);
    std::ofstream(dir / "job.yaml") << "target: {kind: synthetic, landscape: smooth_bowl}\n"
                                       "utility: throughput\nbudget: 40\nset_size: 10\n";
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string line_with(const std::string& text, const std::string& prefix) {
  const auto at = text.find(prefix);
  if (at == std::string::npos) return "";
  return text.substr(at, text.find('\n', at) - at);
}

}  // namespace

TEST_CASE("tune runs a single round when the budget equals the set size") {
  Workspace ws;
  const auto r = cli("tune " + ws.path("job.yaml") + " --budget 100 --set-size 100 --seed 1");
  CHECK(r.code == 0);
  CHECK(r.out.find("rounds: 1") != std::string::npos);
  CHECK(r.out.find("best utility: ") != std::string::npos);
}

TEST_CASE("a zero set size is a usage error") {
  Workspace ws;
  CHECK(cli("tune " + ws.path("job.yaml") + " --set-size 0").code == 2);
  CHECK(cli("tune " + ws.path("missing.yaml")).code == 2);
  CHECK(cli("tune").code == 2);
  CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("the same seed gives the same best") {
  Workspace ws;
  const auto a = cli("tune " + ws.path("job.yaml") + " --seed 42");
  const auto b = cli("tune " + ws.path("job.yaml") + " --seed 42");
  CHECK(line_with(a.out, "best setting") == line_with(b.out, "best setting"));
  CHECK_FALSE(line_with(a.out, "best setting").empty());
}

TEST_CASE("AUTOTUNE_SEED is the last-resort seed") {
  Workspace ws;
  ::setenv("AUTOTUNE_SEED", "42", 1);
  const auto env = cli("tune " + ws.path("job.yaml"));
  ::unsetenv("AUTOTUNE_SEED");
  const auto flag = cli("tune " + ws.path("job.yaml") + " --seed 42");
  CHECK(line_with(env.out, "best setting") == line_with(flag.out, "best setting"));
}

TEST_CASE("report summarises a history") {
  Workspace ws;
  const auto h = ws.path("h.ndjson");
  REQUIRE(cli("tune " + ws.path("job.yaml") + " --budget 30 --history " + h).code == 0);
  const auto r = cli("report " + h);
  CHECK(r.code == 0);
  CHECK(r.out.find("round 3 best") != std::string::npos);
  CHECK(r.out.find("round 4") == std::string::npos);
  CHECK(r.out.find("tests: 30") != std::string::npos);
  CHECK(r.out.find("failures: none") != std::string::npos);
}

TEST_CASE("report handles empty, failing and corrupt histories") {
  Workspace ws;
  const auto empty = ws.path("empty.ndjson");
  std::ofstream(empty).close();
  const auto r = cli("report " + empty);
  CHECK(r.code == 0);
  CHECK(r.out == "no tests recorded\n");

  std::ofstream(ws.path("fail.yaml"))
      << "parameters: [{name: x, kind: float, min: 0, max: 1}]\n"
         "target:\n  kind: process\n  test: 'awk -v x=$CONF_x \"BEGIN {exit !(x < 0.5)}\" && exit 1; "
         "echo throughput=1'\n  metrics: [throughput]\n"
         "utility: throughput\nbudget: 20\nset_size: 10\nhistory: fail.ndjson\n";
  REQUIRE(cli("tune " + ws.path("fail.yaml")).code == 0);
  const auto f = cli("report " + ws.path("fail.ndjson"));
  CHECK(f.out.find("nonzero_exit=") != std::string::npos);

  std::ofstream(ws.path("bad.ndjson")) << "{\"type\":\"header\"}\nnot json\n";
  CHECK(cli("report " + ws.path("bad.ndjson")).code == 2);
}

TEST_CASE("a target that never works exits with 3") {
  Workspace ws;
  std::ofstream(ws.path("dead.yaml"))
      << "parameters: [{name: x, kind: float, min: 0, max: 1}]\n"
         "target: {kind: process, test: 'exit 1', metrics: [throughput]}\n"
         "utility: throughput\nbudget: 4\nset_size: 2\n";
  CHECK(cli("tune " + ws.path("dead.yaml")).code == 3);
}

TEST_CASE("resume finishes an interrupted history") {
  Workspace ws;
  const auto h = ws.path("r.ndjson");
  REQUIRE(cli("tune " + ws.path("job.yaml") + " --budget 20 --seed 3 --history " + h).code == 0);
  const auto full = cli("report " + h);
  const auto r = cli("resume " + ws.path("job.yaml") + " --budget 20 --seed 3 --history " + h);
  CHECK(r.code == 0);
  CHECK(line_with(r.out, "best utility") == line_with(full.out, "best utility"));
  CHECK(cli("resume " + ws.path("job.yaml") + " --budget 20 --seed 4 --history " + h).code == 2);
}

TEST_CASE("compare writes the trajectory schema") {
  Workspace ws;
  const auto csv = ws.path("c.csv");
  const auto r = cli("compare --landscape bumpy --strategies dds+rbs,uniform+rbs --trials 50 --csv " + csv);
  CHECK(r.code == 0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "sampler,optimizer,landscape,seed,round,best_utility,tests_used");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 2 * 50 * 2);
  CHECK(cli("compare --strategies dds+magic").code == 2);
}

TEST_CASE("phi prints the slab share") {
  const auto r = cli("phi --landscape step_slab --y0 100 --resolution 200");
  CHECK(r.code == 0);
  CHECK(r.out == "phi 0.875\n");
  CHECK(cli("phi --landscape step_slab --y0 100 --bounds 0:0.5").code == 2);
}
