// SPDX-License-Identifier: Apache-2.0
//
// Finite constraint encoding of (k-l)-loops: stage arrays Q_1..Q_{k+1} with
// integrity and neighbourhood constraints, the loop variable l, and the two
// translations of temporal formulas into reified Boolean constraints.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "qsim/csp.hpp"
#include "qsim/ltl.hpp"
#include "qsim/problem.hpp"

namespace qsim {

struct PlanCounts {
  int relation_variables = 0;  // stages 1..k+1, all ordered pairs including the diagonal
  int conv = 0;
  int comp = 0;
  int neighbourhood = 0;
  int link = 0;
  int conditional_equal = 0;
  int initial = 0;
};

class StagePlan {
 public:
  StagePlan(const Problem& problem, int k);

  int k() const { return k_; }
  const Problem& problem() const { return *problem_; }
  csp::Network& net() { return net_; }
  const csp::Network& net() const { return net_; }
  csp::VarId loop() const { return loop_; }
  /// Least value of dom(l) when the plan was built.
  int loop_min() const { return loop_min_; }
  bool finite_paths() const { return finite_; }
  /// Q_t[a,b] of `aspect`, t in 1..k+1.
  csp::VarId relation(int aspect, int t, int a, int b) const;
  const PlanCounts& counts() const { return counts_; }

  /// Cache of translated (subformula, index) pairs.
  std::size_t cache_size() const { return cache_.size(); }
  /// Boolean variables created by the formula translations.
  int translation_booleans() const { return booleans_; }
  /// Index variables created by the array translation.
  int index_variables() const { return index_vars_; }

  /// Decodes a solution of the network.
  ltl::LassoPath extract(std::span<const int> values) const;

 private:
  friend class Translator;

  enum class Slot : std::uint8_t { constant, variable, loop_aux };
  using Key = std::tuple<int, Slot, std::uint32_t>;

  int intern(const ltl::Formula& f);

  const Problem* problem_;
  int k_;
  bool finite_;
  int loop_min_ = 1;
  csp::Network net_;
  csp::VarId loop_;
  // relations_[aspect][(t-1) * n * n + a * n + b]
  std::vector<std::vector<csp::VarId>> relations_;
  PlanCounts counts_;

  std::map<Key, csp::Literal> cache_;
  std::unordered_map<const ltl::Node*, int> node_ids_;
  std::vector<ltl::Formula> retained_;  // keeps node_ids_ keys alive
  std::map<std::string, int> structural_ids_;
  int booleans_ = 0;
  int index_vars_ = 0;
};

/// Builds the stage arrays and all non-temporal constraints for bound k.
std::unique_ptr<StagePlan> build_stages(const Problem& problem, int k);

/// Steps a recursive temporal operator is unrolled past state i before the
/// loop closes it: k - min(l_min, i).
int n_unravel(int k, int loop_min, int i);

/// Literal equivalent to the truth of quantifier-free `f` at state i (1..k).
csp::Literal translate_unravel(StagePlan& plan, const ltl::Formula& f, int i);
/// Posts b <-> (f at state i).
void translate_unravel(StagePlan& plan, const ltl::Formula& f, int i, csp::Literal b);

/// Array-lookup translation. `f` must be in negation normal form and the plan
/// must not admit finite paths. The returned literal implies the truth of f
/// at the index, and every lasso satisfying f admits an assignment making it
/// true.
csp::Literal translate_array(StagePlan& plan, const ltl::Formula& f, int i);
csp::Literal translate_array(StagePlan& plan, const ltl::Formula& f, csp::VarId index);
/// Posts b -> (f at state i).
void translate_array(StagePlan& plan, const ltl::Formula& f, int i, csp::Literal b);

/// Posts every problem formula at state 1 with truth value true, using the
/// problem's translation option.
void post_formulas(StagePlan& plan);

}  // namespace qsim
