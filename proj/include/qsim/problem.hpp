// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsim/csp.hpp"
#include "qsim/ltl.hpp"

namespace qsim {

/// Binary table between two aspects, posted on (A[a,b], B[a,b]) for every
/// ordered pair of distinct objects at every real stage.
struct Link {
  int first = 0;   // aspect index
  int second = 0;  // aspect index
  std::vector<std::pair<RelationId, RelationId>> allowed;

  bool allows(RelationId r, RelationId s) const;
  /// (first in lhs) <-> (second in rhs)
  static Link iff(const ltl::Vocabulary& vocab, int first, RelationSet lhs, int second, RelationSet rhs);
};

/// A stage-1 restriction A[a,b] in R.
struct InitialAtom {
  int aspect = 0;
  int a = 0;
  int b = 0;
  RelationSet relations;
};

enum class Translation { unravel, array };

struct Options {
  int k_min = 1;
  int k_max = 30;
  Translation translation = Translation::unravel;
  bool allow_finite_path = false;
  std::chrono::milliseconds budget_per_k{0};  // 0: unlimited
  std::chrono::milliseconds budget_total{0};  // 0: unlimited
  std::uint64_t node_limit_per_k = 0;         // 0: unlimited
  /// Relation-set families per aspect for the subclass split heuristic;
  /// empty selects first-fail.
  std::vector<std::vector<RelationSet>> subclass_families;
  /// Number of bounds evaluated concurrently (1: sequential).
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

struct TemporalFormula {
  std::string source;  // as written, for reports
  ltl::Formula formula;  // quantifier-free
};

struct Problem {
  ltl::Vocabulary vocab;
  std::vector<Link> links;
  std::vector<InitialAtom> initial;
  std::vector<TemporalFormula> formulas;
  Options options;

  int object_count() const { return vocab.object_count(); }
  int aspect_count() const { return static_cast<int>(vocab.aspects.size()); }
  /// Throws std::invalid_argument when names or relation ids are out of range.
  void check() const;
};

}  // namespace qsim
