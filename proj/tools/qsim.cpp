// SPDX-License-Identifier: Apache-2.0
//
// qsim: finds lasso-shaped qualitative simulations for a specification file.
//
// Exit status: 0 trace found (or --verify-only passed), 1 no trace up to
// k_max (or verification failed), 2 invalid input, 3 budget exhausted.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qsim/engine.hpp"
#include "qsim/spec.hpp"

namespace {

enum Exit { kFound = 0, kUnsat = 1, kInvalid = 2, kBudget = 3 };

int error(const std::string& kind, const std::string& message, int code) {
  std::cerr << "error: " << kind << ": " << message << "\n";
  return code;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search for infinite qualitative simulations (lasso-shaped traces)", "qsim"};
  std::string spec_path, out_path, verify_path, format = "text", translation, heuristic;
  std::optional<int> k_min, k_max, jobs;
  std::optional<std::uint64_t> seed;
  std::optional<double> budget, budget_per_k;
  bool allow_finite = false, verbose = false;

  app.add_option("--spec", spec_path, "Problem specification file")->required();
  app.add_option("--k-min", k_min, "Smallest loop bound tried (default 1)")->check(CLI::PositiveNumber);
  app.add_option("--k-max", k_max, "Largest loop bound tried (default 30)")->check(CLI::PositiveNumber);
  app.add_option("--translation", translation, "Temporal translation")->check(CLI::IsMember({"unravel", "array"}));
  app.add_option("--heuristic", heuristic, "first-fail or subclass:FILE");
  app.add_flag("--allow-finite-path", allow_finite, "Also accept finite paths (no loop)");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json", "dot"}));
  app.add_option("--out", out_path, "Write the trace here instead of standard output");
  app.add_option("--seed", seed, "Randomize tie-breaking among equally constrained variables");
  app.add_option("--verify-only", verify_path, "Check a stored JSON trace against the specification");
  app.add_option("--jobs", jobs, "Bounds solved concurrently")->check(CLI::PositiveNumber);
  app.add_option("--budget", budget, "Overall time budget in seconds")->check(CLI::PositiveNumber);
  app.add_option("--budget-per-k", budget_per_k, "Time budget per bound in seconds")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", verbose, "Report every bound on standard error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return error("usage", e.what(), kInvalid);
  }

  qsim::Problem problem;
  try {
    problem = qsim::load_spec(spec_path);
    auto& o = problem.options;
    if (k_min) o.k_min = *k_min;
    if (k_max) o.k_max = *k_max;
    if (!translation.empty()) {
      o.translation = translation == "array" ? qsim::Translation::array : qsim::Translation::unravel;
    }
    if (heuristic == "first-fail") {
      o.subclass_families.clear();
    } else if (heuristic.rfind("subclass:", 0) == 0) {
      o.subclass_families = qsim::load_families(heuristic.substr(9), problem.vocab);
    } else if (!heuristic.empty()) {
      return error("usage", "--heuristic must be first-fail or subclass:FILE", kInvalid);
    }
    if (allow_finite) o.allow_finite_path = true;
    if (seed) o.seed = seed;
    if (jobs) o.jobs = *jobs;
    if (budget) o.budget_total = std::chrono::milliseconds(static_cast<long long>(*budget * 1000));
    if (budget_per_k) o.budget_per_k = std::chrono::milliseconds(static_cast<long long>(*budget_per_k * 1000));
    if (o.translation == qsim::Translation::array && o.allow_finite_path) {
      return error("spec", "the array translation supports infinite paths only", kInvalid);
    }
    problem.check();
  } catch (const qsim::SpecError& e) {
    return error("spec", e.what(), kInvalid);
  } catch (const std::invalid_argument& e) {
    return error("spec", e.what(), kInvalid);
  } catch (const std::exception& e) {
    return error("io", e.what(), kInvalid);
  }

  if (!verify_path.empty()) {
    qsim::ltl::LassoPath path;
    try {
      path = qsim::trace_from_json(problem, read_file(verify_path));
    } catch (const std::invalid_argument& e) {
      return error("trace", e.what(), kInvalid);
    } catch (const std::exception& e) {
      return error("io", e.what(), kInvalid);
    }
    const auto report = qsim::verify_trace(problem, path);
    for (const auto& f : report.failures) std::cout << "fail " << f.check << ": " << f.witness << "\n";
    std::cout << "verdict: " << (report.passed() ? "pass" : "fail") << " (" << report.checks << " checks, "
              << report.failures.size() << " failed)\n";
    return report.passed() ? kFound : kUnsat;
  }

  qsim::SimulationResult result;
  try {
    result = qsim::simulate(problem, [&](const qsim::BoundReport& r) {
      if (!verbose) return;
      const char* status = r.status == qsim::csp::SolveStatus::solved  ? "solved"
                           : r.status == qsim::csp::SolveStatus::unsat ? "unsat"
                                                                       : "limit";
      std::cerr << "k=" << r.k << " " << status << " nodes=" << r.stats.nodes << " failures=" << r.stats.failures
                << " time=" << r.stats.seconds << "s\n";
    });
  } catch (const std::invalid_argument& e) {
    return error("spec", e.what(), kInvalid);
  }

  if (result.outcome == qsim::Outcome::unsat) {
    std::cerr << "unsat: no simulation with " << problem.options.k_min << " <= k <= " << problem.options.k_max
              << "\n";
    return kUnsat;
  }
  if (result.outcome == qsim::Outcome::budget) {
    return error("budget", "budget exhausted at k=" + std::to_string(result.k_reached), kBudget);
  }

  const auto& trace = *result.trace;
  qsim::TraceStats stats;
  for (const auto& b : result.bounds) {
    stats.nodes += b.stats.nodes;
    stats.failures += b.stats.failures;
    stats.propagations += b.stats.propagations;
  }
  stats.seconds = result.seconds;
  std::string document;
  if (format == "json") {
    document = qsim::trace_to_json(problem, trace.path, stats);
  } else if (format == "dot") {
    document = qsim::trace_to_dot(problem, trace.path);
  } else {
    document = qsim::trace_to_text(problem, trace.path);
  }
  if (out_path.empty()) {
    std::cout << document;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!(out << document)) return error("io", "cannot write " + out_path, kInvalid);
  }
  return kFound;
}
