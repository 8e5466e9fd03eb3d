// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;  // stdout followed by stderr
};

Run run(const std::string& args) {
  const std::string command = std::string(QSIM_BINARY) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe);
  Run r;
  char buffer[4096];
  while (std::size_t n = fread(buffer, 1, sizeof buffer, pipe)) r.out.append(buffer, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "qsim_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("text output matches the stored trace") {
  const Run r = run("--spec specs/juggling.qs");
  CHECK(r.code == 0);
  CHECK(r.out == slurp("tests/golden/juggling.txt"));
}

TEST_CASE("json output round-trips through verification") {
  const fs::path trace = scratch("juggling.json");
  fs::remove(trace);
  REQUIRE(run("--spec specs/juggling.qs --format json --out " + trace.string()).code == 0);
  const auto doc = nlohmann::json::parse(slurp(trace));
  CHECK(doc["k"] == 8);
  CHECK(doc["loop_start"] == 3);

  const Run verified = run("--spec specs/juggling.qs --verify-only " + trace.string());
  CHECK(verified.code == 0);
  CHECK(verified.out.find("verdict: pass") != std::string::npos);

  // one changed relation breaks at least the converse check
  auto broken = doc;
  auto& rel = broken["aspects"][0]["states"][4]["pairs"][0]["rel"];
  rel = rel == "disjoint" ? "overlap" : "disjoint";
  const fs::path bad = scratch("broken.json");
  write(bad, broken.dump(2));
  const Run failed = run("--spec specs/juggling.qs --verify-only " + bad.string());
  CHECK(failed.code == 1);
  CHECK(failed.out.find("verdict: fail") != std::string::npos);

  const fs::path garbage = scratch("garbage.json");
  write(garbage, "{\"k\": ");
  CHECK(run("--spec specs/juggling.qs --verify-only " + garbage.string()).code == 2);
}

TEST_CASE("dot output draws the loop edge") {
  const Run r = run("--spec specs/juggling.qs --format dot");
  CHECK(r.code == 0);
  int nodes = 0;
  for (int i = 1; i <= 9; ++i) nodes += r.out.find("  s" + std::to_string(i) + " [") != std::string::npos;
  CHECK(nodes == 8);
  CHECK(r.out.find("s8 -> s3") != std::string::npos);
}

TEST_CASE("unsat exits with 1") {
  const fs::path spec = scratch("contradiction.qs");
  write(spec,
        "[objects]\nO = {a, b}\n[aspects]\nQ = rcc8\n[temporal]\n"
        "G Q[a,b] = disjoint;\nF Q[a,b] = overlap;\n");
  const Run r = run("--spec " + spec.string() + " --k-max 4");
  CHECK(r.code == 1);
  CHECK(r.out.find("unsat") != std::string::npos);
}

TEST_CASE("budget exits with 3") {
  const Run r = run("--spec specs/navigation.qs --k-min 12 --k-max 12 --budget 0.3");
  CHECK(r.code == 3);
  CHECK(r.out.find("error: budget") != std::string::npos);
}

TEST_CASE("invalid input exits with 2") {
  const Run missing = run("--spec missing.qs");
  CHECK(missing.code == 2);
  CHECK(missing.out.find("error: io") != std::string::npos);

  const fs::path spec = scratch("bad.qs");
  write(spec, "[objects]\nO = {a, b}\n[aspects]\nQ = rcc8\n[temporal]\nG Q[a,c] = meet;\n");
  const Run bad = run("--spec " + spec.string());
  CHECK(bad.code == 2);
  CHECK(bad.out.find("error: spec") != std::string::npos);

  CHECK(run("--spec specs/juggling.qs --format yaml").code == 2);
  CHECK(run("--spec specs/juggling.qs --heuristic random").code == 2);
  CHECK(run("--spec specs/juggling.qs --translation array --allow-finite-path").code == 2);
  CHECK(run("").code == 2);
}

TEST_CASE("array translation and jobs give the same bound") {
  const Run array = run("--spec specs/juggling.qs --translation array --format json");
  const Run parallel = run("--spec specs/juggling.qs --jobs 2 --format json");
  REQUIRE(array.code == 0);
  REQUIRE(parallel.code == 0);
  CHECK(nlohmann::json::parse(array.out)["k"] == 8);
  CHECK(nlohmann::json::parse(parallel.out)["k"] == 8);
}
