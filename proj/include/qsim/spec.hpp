// SPDX-License-Identifier: Apache-2.0
//
// Problem specification files and trace documents.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsim/engine.hpp"
#include "qsim/problem.hpp"

namespace qsim {

class SpecError : public std::runtime_error {
 public:
  SpecError(std::string source, int line, const std::string& message)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Parses a specification document. `source` names it in diagnostics and
/// `base_dir` resolves relative file references (calculus and heuristic files).
Problem parse_spec(std::string_view text, const std::string& source = "<spec>",
                   const std::filesystem::path& base_dir = {});
Problem load_spec(const std::filesystem::path& path);

/// Subclass family file: one relation set per line, written "calculus: r1 r2 ...".
/// Families are assigned to every aspect whose calculus has that name.
std::vector<std::vector<RelationSet>> parse_families(std::string_view text, const ltl::Vocabulary& vocab,
                                                     const std::string& source = "<families>");
std::vector<std::vector<RelationSet>> load_families(const std::filesystem::path& path, const ltl::Vocabulary& vocab);

struct TraceStats {
  std::uint64_t nodes = 0;
  std::uint64_t failures = 0;
  std::uint64_t propagations = 0;
  double seconds = 0.0;
};

std::string trace_to_text(const Problem& problem, const ltl::LassoPath& path);
std::string trace_to_json(const Problem& problem, const ltl::LassoPath& path, const TraceStats& stats = {});
std::string trace_to_dot(const Problem& problem, const ltl::LassoPath& path);
/// Reads a document written by trace_to_json. Throws std::invalid_argument
/// when it does not match the problem's objects, aspects or alphabets.
ltl::LassoPath trace_from_json(const Problem& problem, std::string_view json);

}  // namespace qsim
