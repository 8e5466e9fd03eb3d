// SPDX-License-Identifier: Apache-2.0
//
// Linear temporal logic over qualitative atoms Q[a,b] in R, with bounded
// quantification over named object sets.

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsim/calculus.hpp"

namespace qsim::ltl {

struct Aspect {
  std::string name;
  std::shared_ptr<const Calculus> calculus;
};

/// Names a formula may refer to: objects, object sets and aspects.
struct Vocabulary {
  std::vector<std::string> objects;
  std::map<std::string, std::vector<int>> sets;
  std::vector<Aspect> aspects;

  std::optional<int> find_object(std::string_view name) const;
  std::optional<int> find_aspect(std::string_view name) const;
  const Calculus& calculus(int aspect) const { return *aspects.at(aspect).calculus; }
  int object_count() const { return static_cast<int>(objects.size()); }
};

enum class Op {
  truth,
  falsity,
  atom,
  same,  // object identity guard a = b, removed by expand_quantifiers
  negation,
  conjunction,
  disjunction,
  implication,
  equivalence,
  next,
  eventually,
  always,
  until,
  forall,
  exists,
};

/// Object reference: a concrete object (object >= 0) or a bound variable.
struct Term {
  std::string variable;
  int object = -1;

  bool bound() const { return object >= 0; }
  bool operator==(const Term&) const = default;
};

struct ObjectSet {
  std::string name;                  // named set, or empty
  std::vector<std::string> members;  // literal {a, b, ...} when name is empty

  bool operator==(const ObjectSet&) const = default;
};

struct Node;
using Formula = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::truth;
  // atom / same
  int aspect = -1;
  Term lhs, rhs;
  RelationSet relations;
  // connectives and temporal operators; until is (children[0] U children[1])
  std::vector<Formula> children;
  // quantifiers
  std::string variable;
  ObjectSet range;
};

Formula truth();
Formula falsity();
Formula atom(int aspect, Term lhs, Term rhs, RelationSet relations);
Formula atom(int aspect, int a, int b, RelationSet relations);
Formula same(Term lhs, Term rhs);
Formula negation(Formula f);
Formula conjunction(std::vector<Formula> operands);
Formula disjunction(std::vector<Formula> operands);
Formula implication(Formula lhs, Formula rhs);
Formula equivalence(Formula lhs, Formula rhs);
Formula next(Formula f);
Formula eventually(Formula f);
Formula always(Formula f);
Formula until(Formula lhs, Formula rhs);
Formula forall(std::string variable, ObjectSet range, Formula body);
Formula exists(std::string variable, ObjectSet range, Formula body);

bool structurally_equal(const Formula& a, const Formula& b);
/// Nesting depth; atoms and constants have depth 1.
int depth(const Formula& f);
bool is_quantifier_free(const Formula& f);
bool is_nnf(const Formula& f);

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        message_(message) {}
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_, column_;
  std::string message_;
};

/// Parses one formula. `first_line` offsets reported line numbers when the
/// text is embedded in a larger document.
Formula parse(std::string_view text, const Vocabulary& vocabulary, int first_line = 1);
std::string to_string(const Formula& f, const Vocabulary& vocabulary);

/// Replaces quantifiers by conjunctions/disjunctions over their sets and folds
/// object guards and propositional constants.
Formula expand_quantifiers(const Formula& f, const Vocabulary& vocabulary);
/// Negation normal form: negation only on atoms, as complemented relation sets.
/// Precondition: quantifier-free.
Formula to_nnf(const Formula& f, const Vocabulary& vocabulary);

/// One qualitative array per aspect; cell (a, b) holds the relation of a to b.
class QualitativeArray {
 public:
  QualitativeArray() = default;
  explicit QualitativeArray(int objects, RelationId fill = 0)
      : objects_(objects), cells_(static_cast<std::size_t>(objects) * objects, fill) {}

  int objects() const { return objects_; }
  RelationId at(int a, int b) const { return cells_[static_cast<std::size_t>(a) * objects_ + b]; }
  RelationId& at(int a, int b) { return cells_[static_cast<std::size_t>(a) * objects_ + b]; }
  bool operator==(const QualitativeArray&) const = default;

 private:
  int objects_ = 0;
  std::vector<RelationId> cells_;
};

using State = std::vector<QualitativeArray>;  // indexed by aspect

/// States Q_1..Q_k; loop_start l (1-based) denotes Q_1..Q_{l-1} (Q_l..Q_k)^omega,
/// no loop start denotes the finite path Q_1..Q_k.
struct LassoPath {
  std::vector<State> states;
  std::optional<int> loop_start;

  int length() const { return static_cast<int>(states.size()); }
};

/// Truth of a quantifier-free formula at 1-based position `position`.
/// On a finite path, next at the last state is false.
bool evaluate_on_lasso(const Formula& f, const LassoPath& path, int position = 1);

}  // namespace qsim::ltl
