// SPDX-License-Identifier: Apache-2.0
//
// Finite-domain constraint network with hyper-arc consistency propagation and
// backtracking search by domain splitting. Domains are bitsets over 0..63.

#pragma once

#include <bit>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qsim::csp {

using Domain = std::uint64_t;

inline constexpr int kMaxValue = 63;

constexpr Domain value_bit(int v) { return Domain{1} << v; }
constexpr Domain range_domain(int lo, int hi) {
  Domain d = 0;
  for (int v = lo; v <= hi; ++v) d |= value_bit(v);
  return d;
}
constexpr int domain_size(Domain d) { return std::popcount(d); }
constexpr int min_value(Domain d) { return std::countr_zero(d); }
constexpr int max_value(Domain d) { return 63 - std::countl_zero(d); }

inline constexpr Domain kBoolDomain = 0b11;
inline constexpr Domain kFalse = 0b01;
inline constexpr Domain kTrue = 0b10;

struct VarId {
  std::uint32_t index = 0;
  bool operator==(const VarId&) const = default;
  auto operator<=>(const VarId&) const = default;
};

/// A Boolean variable, possibly negated.
struct Literal {
  VarId var;
  bool positive = true;

  Literal operator!() const { return {var, !positive}; }
  bool operator==(const Literal&) const = default;
  auto operator<=>(const Literal&) const = default;
};

class Network;

/// Base class of all constraint kinds. A propagator removes exactly the values
/// of its scope that have no support in the constraint.
class Propagator {
 public:
  explicit Propagator(std::vector<VarId> scope) : scope_(std::move(scope)) {}
  virtual ~Propagator() = default;

  const std::vector<VarId>& scope() const { return scope_; }
  /// Returns false when some domain becomes empty.
  virtual bool propagate(Network& net) = 0;
  /// Direct check of a total assignment (values indexed by variable id).
  virtual bool satisfied(std::span<const int> values) const = 0;
  virtual std::string_view kind() const = 0;

 protected:
  std::vector<VarId> scope_;
};

enum class Status { stable, failed };

/// Search class of a variable: branching considers lower classes first.
enum class VarClass : std::uint8_t { loop = 0, decision = 1, auxiliary = 2 };

class Network {
 public:
  Network();
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  VarId add_variable(Domain initial, VarClass cls = VarClass::decision, int group = -1);
  VarId add_boolean(VarClass cls = VarClass::auxiliary) { return add_variable(kBoolDomain, cls); }
  Literal true_literal() const { return {true_var_, true}; }
  Literal false_literal() const { return {true_var_, false}; }
  Literal constant(bool value) const { return {true_var_, value}; }

  std::size_t variable_count() const { return domains_.size(); }
  std::size_t constraint_count() const { return propagators_.size(); }
  const Propagator& constraint(std::size_t i) const { return *propagators_[i]; }

  Domain domain(VarId v) const { return domains_[v.index]; }
  Domain domain(Literal l) const;
  bool fixed(VarId v) const { return std::has_single_bit(domains_[v.index]); }
  int value(VarId v) const { return min_value(domains_[v.index]); }
  VarClass var_class(VarId v) const { return classes_[v.index]; }
  int group(VarId v) const { return groups_[v.index]; }
  const std::vector<VarId>& variables_of(VarClass cls) const { return by_class_[static_cast<int>(cls)]; }

  /// Intersects the domain with `mask`; false (domain untouched) if empty.
  bool restrict(VarId v, Domain mask);
  bool restrict(Literal l, Domain mask);
  bool assign(VarId v, int value) { return restrict(v, value_bit(value)); }

  template <class P, class... Args>
  P& post(Args&&... args) {
    auto owned = std::make_unique<P>(std::forward<Args>(args)...);
    P& ref = *owned;
    attach(std::move(owned));
    return ref;
  }

  Status propagate();

  std::size_t checkpoint() const { return trail_.size(); }
  void restore(std::size_t mark);

  /// Checks every constraint against a total assignment; returns the index of
  /// the first violated constraint.
  std::optional<std::size_t> first_violation(std::span<const int> values) const;
  std::vector<int> current_values() const;

  std::uint64_t propagation_count() const { return propagations_; }

 private:
  void attach(std::unique_ptr<Propagator> p);
  void enqueue_watchers(std::uint32_t var);

  std::vector<Domain> domains_;
  std::vector<VarClass> classes_;
  std::vector<int> groups_;
  std::vector<std::vector<std::uint32_t>> watchers_;
  std::vector<VarId> by_class_[3];
  std::vector<std::unique_ptr<Propagator>> propagators_;
  std::vector<std::pair<std::uint32_t, Domain>> trail_;
  std::vector<std::uint32_t> queue_;
  std::vector<char> queued_;
  std::int64_t current_ = -1;
  std::uint64_t propagations_ = 0;
  VarId true_var_;
};

// ---------------------------------------------------------------------------
// Constraint kinds

/// Extensional constraint: the scope must take one of the listed tuples.
void post_table(Network& net, std::vector<VarId> scope, const std::vector<std::vector<int>>& tuples);

/// result <-> (x in set)
void post_member(Network& net, Literal result, VarId x, Domain set);

/// result <-> (l1 & ... & ln); the empty conjunction is true.
void post_and(Network& net, Literal result, std::vector<Literal> operands);
/// result <-> (l1 | ... | ln); the empty disjunction is false.
void post_or(Network& net, Literal result, std::vector<Literal> operands);
/// result <-> (a <-> b)
void post_equiv(Network& net, Literal result, Literal a, Literal b);
/// l1 | ... | ln must hold.
void post_clause(Network& net, std::vector<Literal> operands);

/// (selector = selected) -> (x = y)
void post_conditional_equal(Network& net, VarId selector, int selected, VarId x, VarId y);
/// (selector = selected) -> (xs[i] = ys[i] for every i)
void post_conditional_equal(Network& net, VarId selector, int selected, const std::vector<VarId>& xs,
                            const std::vector<VarId>& ys);

/// value = elements[index - offset]. Index values outside the array are removed.
void post_element(Network& net, VarId index, int offset, VarId value, std::vector<VarId> elements);
/// Boolean version over literals: result <-> elements[index - offset].
void post_element(Network& net, VarId index, int offset, Literal result, std::vector<Literal> elements);

// ---------------------------------------------------------------------------
// Search

struct Branch {
  VarId var;
  Domain first = 0;
  Domain second = 0;
};

class SplitStrategy {
 public:
  virtual ~SplitStrategy() = default;
  /// Nothing when every variable is fixed.
  virtual std::optional<Branch> split(const Network& net) const = 0;
  virtual std::string name() const = 0;
};

/// Smallest domain first (ties: lowest id, or a seeded pseudo-random order)
/// within the lowest variable class that has unfixed variables; tries the
/// lowest value, then the rest.
class FirstFail : public SplitStrategy {
 public:
  FirstFail() = default;
  explicit FirstFail(std::optional<std::uint64_t> seed) : seed_(seed) {}
  std::optional<Branch> split(const Network& net) const override;
  std::string name() const override { return "first-fail"; }

 private:
  std::optional<std::uint64_t> seed_;
};

/// Splits relation domains so that the first part belongs to a family of
/// relation sets, keyed by variable group (one family per calculus).
class SubclassSplit : public SplitStrategy {
 public:
  explicit SubclassSplit(std::map<int, std::vector<Domain>> families) : families_(std::move(families)) {}
  std::optional<Branch> split(const Network& net) const override;
  std::string name() const override { return "subclass"; }

 private:
  std::map<int, std::vector<Domain>> families_;
};

std::optional<Branch> split(const SplitStrategy& strategy, const Network& net);

struct SearchLimits {
  std::uint64_t max_nodes = 0;               // 0: unlimited
  std::chrono::milliseconds max_time{0};     // 0: unlimited
};

enum class SolveStatus { solved, unsat, limit };

struct SearchStats {
  std::uint64_t nodes = 0;
  std::uint64_t failures = 0;
  std::uint64_t propagations = 0;
  double seconds = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::unsat;
  std::vector<int> values;  // by variable id, when solved
  SearchStats stats;
};

/// Depth-first search interleaved with propagation. The network is restored to
/// its entry state before returning. Solutions are checked against every
/// constraint by direct evaluation.
SolveResult solve(Network& net, const SplitStrategy& strategy, const SearchLimits& limits = {});

}  // namespace qsim::csp
