// SPDX-License-Identifier: Apache-2.0

#include "qsim/ltl.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace qsim::ltl {

std::optional<int> Vocabulary::find_object(std::string_view name) const {
  auto it = std::find(objects.begin(), objects.end(), name);
  if (it == objects.end()) return std::nullopt;
  return static_cast<int>(it - objects.begin());
}

std::optional<int> Vocabulary::find_aspect(std::string_view name) const {
  for (std::size_t i = 0; i < aspects.size(); ++i) {
    if (aspects[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

namespace {

Formula make(Op op, std::vector<Formula> children = {}) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->children = std::move(children);
  return n;
}

Formula quantifier(Op op, std::string variable, ObjectSet range, Formula body) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->variable = std::move(variable);
  n->range = std::move(range);
  n->children = {std::move(body)};
  return n;
}

}  // namespace

Formula truth() {
  static const Formula t = make(Op::truth);
  return t;
}

Formula falsity() {
  static const Formula f = make(Op::falsity);
  return f;
}

Formula atom(int aspect, Term lhs, Term rhs, RelationSet relations) {
  auto n = std::make_shared<Node>();
  n->op = Op::atom;
  n->aspect = aspect;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->relations = relations;
  return n;
}

Formula atom(int aspect, int a, int b, RelationSet relations) {
  return atom(aspect, Term{{}, a}, Term{{}, b}, relations);
}

Formula same(Term lhs, Term rhs) {
  auto n = std::make_shared<Node>();
  n->op = Op::same;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

Formula negation(Formula f) { return make(Op::negation, {std::move(f)}); }
Formula conjunction(std::vector<Formula> operands) { return make(Op::conjunction, std::move(operands)); }
Formula disjunction(std::vector<Formula> operands) { return make(Op::disjunction, std::move(operands)); }
Formula implication(Formula lhs, Formula rhs) { return make(Op::implication, {std::move(lhs), std::move(rhs)}); }
Formula equivalence(Formula lhs, Formula rhs) { return make(Op::equivalence, {std::move(lhs), std::move(rhs)}); }
Formula next(Formula f) { return make(Op::next, {std::move(f)}); }
Formula eventually(Formula f) { return make(Op::eventually, {std::move(f)}); }
Formula always(Formula f) { return make(Op::always, {std::move(f)}); }
Formula until(Formula lhs, Formula rhs) { return make(Op::until, {std::move(lhs), std::move(rhs)}); }

Formula forall(std::string variable, ObjectSet range, Formula body) {
  return quantifier(Op::forall, std::move(variable), std::move(range), std::move(body));
}

Formula exists(std::string variable, ObjectSet range, Formula body) {
  return quantifier(Op::exists, std::move(variable), std::move(range), std::move(body));
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (a->op != b->op || a->children.size() != b->children.size()) return false;
  switch (a->op) {
    case Op::atom:
      if (a->aspect != b->aspect || a->relations != b->relations) return false;
      [[fallthrough]];
    case Op::same:
      if (!(a->lhs == b->lhs) || !(a->rhs == b->rhs)) return false;
      break;
    case Op::forall:
    case Op::exists:
      if (a->variable != b->variable || !(a->range == b->range)) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!structurally_equal(a->children[i], b->children[i])) return false;
  }
  return true;
}

int depth(const Formula& f) {
  int deepest = 0;
  for (const auto& c : f->children) deepest = std::max(deepest, depth(c));
  return deepest + 1;
}

bool is_quantifier_free(const Formula& f) {
  if (f->op == Op::forall || f->op == Op::exists || f->op == Op::same) return false;
  return std::all_of(f->children.begin(), f->children.end(), is_quantifier_free);
}

bool is_nnf(const Formula& f) {
  switch (f->op) {
    case Op::negation:
    case Op::implication:
    case Op::equivalence:
    case Op::forall:
    case Op::exists:
    case Op::same:
      return false;
    default:
      return std::all_of(f->children.begin(), f->children.end(), is_nnf);
  }
}

// ---------------------------------------------------------------------------
// Quantifier expansion

namespace {

Formula fold(Op op, std::vector<Formula> kids);

class Expander {
 public:
  explicit Expander(const Vocabulary& vocab) : vocab_(vocab) {}

  Formula run(const Formula& f) {
    switch (f->op) {
      case Op::truth:
      case Op::falsity:
        return f;
      case Op::atom:
        return atom(f->aspect, resolve(f->lhs), resolve(f->rhs), f->relations);
      case Op::same:
        return resolve(f->lhs).object == resolve(f->rhs).object ? truth() : falsity();
      case Op::forall:
      case Op::exists: {
        std::vector<Formula> parts;
        for (int object : members(f->range)) {
          bindings_.emplace_back(f->variable, object);
          parts.push_back(run(f->children[0]));
          bindings_.pop_back();
        }
        return fold(f->op == Op::forall ? Op::conjunction : Op::disjunction, std::move(parts));
      }
      default: {
        std::vector<Formula> kids;
        for (const auto& c : f->children) kids.push_back(run(c));
        return fold(f->op, std::move(kids));
      }
    }
  }

 private:
  Term resolve(const Term& t) const {
    if (t.bound()) return t;
    for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it) {
      if (it->first == t.variable) return Term{{}, it->second};
    }
    if (auto o = vocab_.find_object(t.variable)) return Term{{}, *o};
    throw std::invalid_argument("unbound variable '" + t.variable + "'");
  }

  std::vector<int> members(const ObjectSet& range) const {
    if (!range.name.empty()) {
      auto it = vocab_.sets.find(range.name);
      if (it == vocab_.sets.end()) throw std::invalid_argument("unknown object set '" + range.name + "'");
      return it->second;
    }
    std::vector<int> out;
    for (const auto& m : range.members) {
      auto o = vocab_.find_object(m);
      if (!o) throw std::invalid_argument("unknown object '" + m + "'");
      out.push_back(*o);
    }
    return out;
  }

  const Vocabulary& vocab_;
  std::vector<std::pair<std::string, int>> bindings_;
};

bool is_const(const Formula& f, bool value) { return f->op == (value ? Op::truth : Op::falsity); }

// Propositional constant folding; temporal operators are folded only where
// the result holds on finite paths as well.
Formula fold(Op op, std::vector<Formula> kids) {
  switch (op) {
    case Op::negation:
      if (is_const(kids[0], true)) return falsity();
      if (is_const(kids[0], false)) return truth();
      return negation(kids[0]);
    case Op::conjunction:
    case Op::disjunction: {
      const bool absorbing = op == Op::disjunction;
      std::vector<Formula> kept;
      for (auto& k : kids) {
        if (is_const(k, absorbing)) return absorbing ? truth() : falsity();
        if (is_const(k, !absorbing)) continue;
        if (k->op == op) {
          kept.insert(kept.end(), k->children.begin(), k->children.end());
        } else {
          kept.push_back(std::move(k));
        }
      }
      if (kept.empty()) return absorbing ? falsity() : truth();
      if (kept.size() == 1) return kept[0];
      return op == Op::conjunction ? conjunction(std::move(kept)) : disjunction(std::move(kept));
    }
    case Op::implication:
      if (is_const(kids[0], false) || is_const(kids[1], true)) return truth();
      if (is_const(kids[0], true)) return kids[1];
      if (is_const(kids[1], false)) return fold(Op::negation, {kids[0]});
      return implication(kids[0], kids[1]);
    case Op::equivalence:
      if (is_const(kids[0], true)) return kids[1];
      if (is_const(kids[1], true)) return kids[0];
      if (is_const(kids[0], false)) return fold(Op::negation, {kids[1]});
      if (is_const(kids[1], false)) return fold(Op::negation, {kids[0]});
      return equivalence(kids[0], kids[1]);
    case Op::next:
      if (is_const(kids[0], false)) return falsity();
      return next(kids[0]);
    case Op::eventually:
      if (kids[0]->op == Op::truth || kids[0]->op == Op::falsity) return kids[0];
      return eventually(kids[0]);
    case Op::always:
      if (is_const(kids[0], false)) return falsity();
      return always(kids[0]);
    case Op::until:
      if (kids[1]->op == Op::truth || kids[1]->op == Op::falsity) return kids[1];
      return until(kids[0], kids[1]);
    default:
      throw std::logic_error("fold: unexpected operator");
  }
}

}  // namespace

Formula expand_quantifiers(const Formula& f, const Vocabulary& vocabulary) {
  return Expander(vocabulary).run(f);
}

// ---------------------------------------------------------------------------
// Negation normal form

namespace {

Formula nnf(const Formula& f, bool negated, const Vocabulary& vocab) {
  switch (f->op) {
    case Op::truth:
    case Op::falsity:
      return (f->op == Op::truth) != negated ? truth() : falsity();
    case Op::atom: {
      if (!negated) return f;
      const RelationSet all = vocab.calculus(f->aspect).alphabet();
      return atom(f->aspect, f->lhs, f->rhs, all - f->relations);
    }
    case Op::negation:
      return nnf(f->children[0], !negated, vocab);
    case Op::conjunction:
    case Op::disjunction: {
      std::vector<Formula> kids;
      for (const auto& c : f->children) kids.push_back(nnf(c, negated, vocab));
      const bool as_and = (f->op == Op::conjunction) != negated;
      return as_and ? conjunction(std::move(kids)) : disjunction(std::move(kids));
    }
    case Op::implication:
      return nnf(disjunction({negation(f->children[0]), f->children[1]}), negated, vocab);
    case Op::equivalence: {
      const auto& a = f->children[0];
      const auto& b = f->children[1];
      if (!negated) {
        return disjunction({conjunction({nnf(a, false, vocab), nnf(b, false, vocab)}),
                            conjunction({nnf(a, true, vocab), nnf(b, true, vocab)})});
      }
      return disjunction({conjunction({nnf(a, false, vocab), nnf(b, true, vocab)}),
                          conjunction({nnf(a, true, vocab), nnf(b, false, vocab)})});
    }
    case Op::next:
      return next(nnf(f->children[0], negated, vocab));
    case Op::eventually:
      return negated ? always(nnf(f->children[0], true, vocab)) : eventually(nnf(f->children[0], false, vocab));
    case Op::always:
      return negated ? eventually(nnf(f->children[0], true, vocab)) : always(nnf(f->children[0], false, vocab));
    case Op::until: {
      if (!negated) return until(nnf(f->children[0], false, vocab), nnf(f->children[1], false, vocab));
      // not (x U y) == (not y) U (not x and not y)  or  G not y
      const Formula not_x = nnf(f->children[0], true, vocab);
      const Formula not_y = nnf(f->children[1], true, vocab);
      return disjunction({until(not_y, conjunction({not_x, not_y})), always(not_y)});
    }
    default:
      throw std::invalid_argument("to_nnf: formula still contains quantifiers or object guards");
  }
}

}  // namespace

Formula to_nnf(const Formula& f, const Vocabulary& vocabulary) { return nnf(f, false, vocabulary); }

// ---------------------------------------------------------------------------
// Evaluation on lasso paths

namespace {

class Evaluator {
 public:
  explicit Evaluator(const LassoPath& path) : path_(path), k_(path.length()) {
    if (path.loop_start && (*path.loop_start < 1 || *path.loop_start > k_)) {
      throw std::out_of_range("loop start outside 1..k");
    }
  }

  // Truth at every position, index 0 is position 1.
  const std::vector<char>& values(const Formula& f) {
    if (auto it = memo_.find(f.get()); it != memo_.end()) return it->second;
    std::vector<char> v(k_, 0);
    switch (f->op) {
      case Op::truth:
        std::fill(v.begin(), v.end(), 1);
        break;
      case Op::falsity:
        break;
      case Op::atom: {
        if (!f->lhs.bound() || !f->rhs.bound()) throw std::invalid_argument("evaluate: unexpanded atom");
        for (int p = 0; p < k_; ++p) {
          v[p] = f->relations.contains(path_.states[p].at(f->aspect).at(f->lhs.object, f->rhs.object));
        }
        break;
      }
      case Op::negation: {
        const auto& c = values(f->children[0]);
        for (int p = 0; p < k_; ++p) v[p] = !c[p];
        break;
      }
      case Op::conjunction:
      case Op::disjunction: {
        const bool is_and = f->op == Op::conjunction;
        std::fill(v.begin(), v.end(), is_and ? 1 : 0);
        for (const auto& child : f->children) {
          const auto& c = values(child);
          for (int p = 0; p < k_; ++p) v[p] = is_and ? (v[p] && c[p]) : (v[p] || c[p]);
        }
        break;
      }
      case Op::implication:
      case Op::equivalence: {
        const auto a = values(f->children[0]);
        const auto& b = values(f->children[1]);
        for (int p = 0; p < k_; ++p) v[p] = f->op == Op::implication ? (!a[p] || b[p]) : (a[p] == b[p]);
        break;
      }
      case Op::next: {
        const auto& c = values(f->children[0]);
        for (int p = 0; p < k_; ++p) {
          const int s = successor(p);
          v[p] = s >= 0 && c[s];
        }
        break;
      }
      case Op::eventually:
        v = fixpoint(nullptr, &values(f->children[0]), false);
        break;
      case Op::always: {
        const auto c = values(f->children[0]);
        v = fixpoint(&c, nullptr, true);
        break;
      }
      case Op::until: {
        const auto hold = values(f->children[0]);
        const auto& goal = values(f->children[1]);
        v = fixpoint(&hold, &goal, false);
        break;
      }
      default:
        throw std::invalid_argument("evaluate: formula contains quantifiers or object guards");
    }
    return memo_.emplace(f.get(), std::move(v)).first->second;
  }

 private:
  int successor(int p) const {
    if (p + 1 < k_) return p + 1;
    return path_.loop_start ? *path_.loop_start - 1 : -1;
  }

  // Solves v = goal or (hold and next v); greatest fixpoint when `greatest`,
  // in which case v = hold and next v.
  std::vector<char> fixpoint(const std::vector<char>* hold, const std::vector<char>* goal, bool greatest) {
    std::vector<char> v(k_, greatest ? 1 : 0);
    for (bool changed = true; changed;) {
      changed = false;
      for (int p = k_ - 1; p >= 0; --p) {
        const int s = successor(p);
        const bool later = s >= 0 && v[s];
        bool now;
        if (greatest) {
          now = (*hold)[p] && later;
        } else {
          now = (*goal)[p] || ((hold ? (*hold)[p] : true) && later);
        }
        if (now != static_cast<bool>(v[p])) {
          v[p] = now;
          changed = true;
        }
      }
    }
    return v;
  }

  const LassoPath& path_;
  int k_;
  std::unordered_map<const Node*, std::vector<char>> memo_;
};

}  // namespace

bool evaluate_on_lasso(const Formula& f, const LassoPath& path, int position) {
  if (position < 1 || position > path.length()) throw std::out_of_range("position outside 1..k");
  Evaluator eval(path);
  return eval.values(f)[position - 1];
}

}  // namespace qsim::ltl
