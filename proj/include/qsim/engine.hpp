// SPDX-License-Identifier: Apache-2.0
//
// Iterative deepening over the loop bound k and independent trace checking.

#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qsim/csp.hpp"
#include "qsim/ltl.hpp"
#include "qsim/problem.hpp"

namespace qsim {

struct SimulationTrace {
  ltl::LassoPath path;  // states Q_1..Q_k and loop start
  csp::SearchStats stats;

  int k() const { return path.length(); }
};

enum class Outcome { found, unsat, budget };

struct BoundReport {
  int k = 0;
  csp::SolveStatus status = csp::SolveStatus::unsat;
  csp::SearchStats stats;
  std::size_t variables = 0;
  std::size_t constraints = 0;
};

struct SimulationResult {
  Outcome outcome = Outcome::unsat;
  std::optional<SimulationTrace> trace;
  int k_reached = 0;  // last bound examined
  std::vector<BoundReport> bounds;
  double seconds = 0.0;
};

using ProgressCallback = std::function<void(const BoundReport&)>;

/// Tries k = k_min..k_max and returns the first (hence shortest) lasso. Every
/// returned trace has passed verify_trace; a failing check throws
/// std::logic_error.
SimulationResult simulate(const Problem& problem, const ProgressCallback& progress = {});

/// Solves the single bound k.
BoundReport solve_bound(const Problem& problem, int k, std::optional<SimulationTrace>* trace = nullptr,
                        std::chrono::milliseconds budget = std::chrono::milliseconds{0});

std::unique_ptr<csp::SplitStrategy> make_strategy(const Problem& problem);

struct CheckFailure {
  std::string check;    // identity, conv, comp, neighbourhood, link, initial, formula, shape
  std::string witness;
};

struct VerifyReport {
  int checks = 0;
  std::vector<CheckFailure> failures;

  bool passed() const { return failures.empty(); }
};

/// Checks a lasso against every integrity, neighbourhood, link, initial and
/// temporal constraint of the problem without using the solver.
VerifyReport verify_trace(const Problem& problem, const ltl::LassoPath& path);

}  // namespace qsim
