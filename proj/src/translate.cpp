// SPDX-License-Identifier: Apache-2.0

#include "qsim/translate.hpp"

#include <algorithm>
#include <stdexcept>

namespace qsim {

using csp::Domain;
using csp::Literal;
using csp::VarClass;
using csp::VarId;
using ltl::Formula;
using ltl::Op;

namespace {

Domain to_domain(RelationSet s) { return s.bits(); }

// <r,s,t> in CT iff <conv r, t, s> in CT. When it holds, the six orderings of
// a triple of objects all constrain the same relation up to converse.
bool triangle_symmetric(const Calculus& c) {
  for (RelationId r = 0; r < c.size(); ++r) {
    for (RelationId s = 0; s < c.size(); ++s) {
      for (RelationId t = 0; t < c.size(); ++t) {
        if (c.composes(r, s, t) != c.composes(c.converse(r), t, s)) return false;
      }
    }
  }
  return true;
}

}  // namespace

int n_unravel(int k, int loop_min, int i) { return k - std::min(loop_min, i); }

StagePlan::StagePlan(const Problem& problem, int k)
    : problem_(&problem), k_(k), finite_(problem.options.allow_finite_path) {
  if (k < 1 || k > csp::kMaxValue - 2) throw std::invalid_argument("bound k out of range");
  problem.check();
  const int n = problem.object_count();
  const int aspects = problem.aspect_count();

  loop_ = net_.add_variable(csp::range_domain(1, finite_ ? k + 1 : k), VarClass::loop);
  loop_min_ = csp::min_value(net_.domain(loop_));

  relations_.resize(aspects);
  for (int x = 0; x < aspects; ++x) {
    const Calculus& calc = problem.vocab.calculus(x);
    auto& vars = relations_[x];
    vars.reserve(static_cast<std::size_t>(k + 1) * n * n);
    for (int t = 1; t <= k + 1; ++t) {
      // The placeholder stage k+1 is fully determined once l is known.
      const VarClass cls = t <= k ? VarClass::decision : VarClass::auxiliary;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          const Domain d = a == b ? csp::value_bit(calc.identity()) : to_domain(calc.alphabet());
          vars.push_back(net_.add_variable(d, a == b ? VarClass::auxiliary : cls, x));
          ++counts_.relation_variables;
        }
      }
    }
  }

  for (int x = 0; x < aspects; ++x) {
    const Calculus& calc = problem.vocab.calculus(x);
    std::vector<std::vector<int>> conv, neighbourhood, comp;
    for (RelationId r = 0; r < calc.size(); ++r) {
      conv.push_back({r, calc.converse(r)});
      for (RelationId s : calc.neighbours(r)) neighbourhood.push_back({r, s});
      for (RelationId s = 0; s < calc.size(); ++s) {
        for (RelationId t : calc.compose(RelationSet::single(r), RelationSet::single(s))) comp.push_back({r, s, t});
      }
    }
    const bool symmetric = triangle_symmetric(calc);
    for (int t = 1; t <= k; ++t) {
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
          csp::post_table(net_, {relation(x, t, a, b), relation(x, t, b, a)}, conv);
          ++counts_.conv;
        }
      }
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          for (int c = 0; c < n; ++c) {
            if (a == b || b == c || a == c) continue;
            // One representative per class: (a,b,c) ~ (c,b,a) always, and all
            // orderings when the table is triangle symmetric.
            if (symmetric ? !(a < b && b < c) : a > c) continue;
            csp::post_table(net_, {relation(x, t, a, b), relation(x, t, b, c), relation(x, t, a, c)}, comp);
            ++counts_.comp;
          }
        }
      }
    }
    for (int t = 1; t <= k; ++t) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (a == b) continue;
          csp::post_table(net_, {relation(x, t, a, b), relation(x, t + 1, a, b)}, neighbourhood);
          ++counts_.neighbourhood;
        }
      }
    }
  }

  for (const Link& link : problem.links) {
    std::vector<std::vector<int>> tuples;
    for (auto [r, s] : link.allowed) tuples.push_back({r, s});
    for (int t = 1; t <= k; ++t) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (a == b) continue;
          csp::post_table(net_, {relation(link.first, t, a, b), relation(link.second, t, a, b)}, tuples);
          ++counts_.link;
        }
      }
    }
  }

  for (int j = 1; j <= k; ++j) {
    std::vector<VarId> real, placeholder;
    for (int x = 0; x < aspects; ++x) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (a == b) continue;
          real.push_back(relation(x, j, a, b));
          placeholder.push_back(relation(x, k + 1, a, b));
        }
      }
    }
    csp::post_conditional_equal(net_, loop_, j, real, placeholder);
    ++counts_.conditional_equal;
  }

  for (const InitialAtom& init : problem.initial) {
    const VarId v = relation(init.aspect, 1, init.a, init.b);
    if (!net_.restrict(v, to_domain(init.relations))) {
      // Contradictory initial constraints leave an empty domain behind a
      // failing constraint so that solving reports unsatisfiability.
      csp::post_table(net_, {v}, {});
    }
    ++counts_.initial;
  }
}

VarId StagePlan::relation(int aspect, int t, int a, int b) const {
  const int n = problem_->object_count();
  return relations_.at(aspect).at(static_cast<std::size_t>(t - 1) * n * n + static_cast<std::size_t>(a) * n + b);
}

ltl::LassoPath StagePlan::extract(std::span<const int> values) const {
  const int n = problem_->object_count();
  ltl::LassoPath path;
  for (int t = 1; t <= k_; ++t) {
    ltl::State state;
    for (int x = 0; x < problem_->aspect_count(); ++x) {
      ltl::QualitativeArray q(n);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) q.at(a, b) = values[relation(x, t, a, b).index];
      }
      state.push_back(std::move(q));
    }
    path.states.push_back(std::move(state));
  }
  const int l = values[loop_.index];
  if (l <= k_) path.loop_start = l;
  return path;
}

int StagePlan::intern(const Formula& f) {
  if (auto it = node_ids_.find(f.get()); it != node_ids_.end()) return it->second;
  std::string key = std::to_string(static_cast<int>(f->op));
  switch (f->op) {
    case Op::atom:
      key += ":" + std::to_string(f->aspect) + ":" + std::to_string(f->lhs.object) + ":" +
             std::to_string(f->rhs.object) + ":" + std::to_string(f->relations.bits());
      break;
    case Op::truth:
    case Op::falsity:
    case Op::negation:
    case Op::conjunction:
    case Op::disjunction:
    case Op::implication:
    case Op::equivalence:
    case Op::next:
    case Op::eventually:
    case Op::always:
    case Op::until:
      for (const auto& c : f->children) key += "," + std::to_string(intern(c));
      break;
    default:
      throw std::invalid_argument("translation requires a quantifier-free formula");
  }
  auto [it, inserted] = structural_ids_.emplace(std::move(key), static_cast<int>(structural_ids_.size()));
  node_ids_.emplace(f.get(), it->second);
  retained_.push_back(f);
  return it->second;
}

// ---------------------------------------------------------------------------

class Translator {
 public:
  explicit Translator(StagePlan& plan) : p_(plan), net_(plan.net_), k_(plan.k_) {}

  // Exact translation at a constant state. In array mode, eventually is
  // delegated to a fresh index variable and the result is one-directional.
  Literal at(const Formula& f, int q, bool array) {
    // The two modes differ below eventually, so they are cached apart.
    const StagePlan::Key key{p_.intern(f), StagePlan::Slot::constant,
                             static_cast<std::uint32_t>(q) * 2 + (array ? 1 : 0)};
    if (auto it = p_.cache_.find(key); it != p_.cache_.end()) return it->second;
    const Literal result = build_at(f, q, array);
    p_.cache_.emplace(key, result);
    return result;
  }

  Literal at_var(const Formula& f, VarId index) {
    if (net_.fixed(index)) return at(f, net_.value(index), true);
    const StagePlan::Key key{p_.intern(f), StagePlan::Slot::variable, index.index};
    if (auto it = p_.cache_.find(key); it != p_.cache_.end()) return it->second;
    const Literal result = build_var(f, index);
    p_.cache_.emplace(key, result);
    return result;
  }

 private:
  Literal fresh() {
    ++p_.booleans_;
    return {net_.add_boolean(VarClass::auxiliary), true};
  }

  Literal atom_at(const Formula& f, int q) {
    const VarId v = p_.relation(f->aspect, q, f->lhs.object, f->rhs.object);
    const Domain in = net_.domain(v) & to_domain(f->relations);
    if (in == 0) return net_.false_literal();
    if (in == net_.domain(v)) return net_.true_literal();
    const Literal b = fresh();
    csp::post_member(net_, b, v, to_domain(f->relations));
    return b;
  }

  Literal connective(Op op, const std::vector<Literal>& kids) {
    const Literal b = fresh();
    switch (op) {
      case Op::conjunction:
        csp::post_and(net_, b, kids);
        break;
      case Op::disjunction:
        csp::post_or(net_, b, kids);
        break;
      case Op::implication:
        csp::post_or(net_, b, {!kids[0], kids[1]});
        break;
      case Op::equivalence:
        csp::post_equiv(net_, b, kids[0], kids[1]);
        break;
      default:
        throw std::logic_error("not a connective");
    }
    return b;
  }

  // l selects among per-state literals; index k+1 (no loop) selects false.
  Literal select_by_loop(const std::vector<Literal>& by_state) {
    std::vector<Literal> elements = by_state;
    elements.push_back(net_.false_literal());
    const Literal b = fresh();
    csp::post_element(net_, p_.loop_, 1, b, std::move(elements));
    return b;
  }

  // The operator restarted at the loop start, without wrapping again:
  //   aux@j = step(phi@j, chi@j, aux@(j+1)),  aux@k = base(phi@k)
  // for j >= l_min, i.e. n_unravel(k, l_min, k) + 1 states.
  std::vector<Literal> loop_chain(const Formula& f, bool array) {
    const int id = p_.intern(f);
    std::vector<Literal> chain(k_, net_.false_literal());
    const int first = k_ - n_unravel(k_, p_.loop_min_, k_);
    Literal later{};
    for (int j = k_; j >= first; --j) {
      const StagePlan::Key slot{id, StagePlan::Slot::loop_aux,
                                static_cast<std::uint32_t>(j) * 2 + (array ? 1 : 0)};
      if (auto it = p_.cache_.find(slot); it != p_.cache_.end()) {
        chain[j - 1] = later = it->second;
        continue;
      }
      const Literal now = j == k_ ? base(f, j, array) : step(f, j, array, later);
      p_.cache_.emplace(slot, now);
      chain[j - 1] = later = now;
    }
    return chain;
  }

  Literal base(const Formula& f, int q, bool array) {
    // Last state without successor: F phi and phi U psi need the goal now,
    // G phi needs phi now (its continuation is conjoined by the caller).
    return at(f->op == Op::until ? f->children[1] : f->children[0], q, array);
  }

  Literal step(const Formula& f, int q, bool array, Literal later) {
    switch (f->op) {
      case Op::eventually:
        return connective(Op::disjunction, {at(f->children[0], q, array), later});
      case Op::always:
        return connective(Op::conjunction, {at(f->children[0], q, array), later});
      case Op::until: {
        const Literal hold = connective(Op::conjunction, {at(f->children[0], q, array), later});
        return connective(Op::disjunction, {at(f->children[1], q, array), hold});
      }
      default:
        throw std::logic_error("not a recursive temporal operator");
    }
  }

  // F, G, U at a constant state q: unfold to k, then close through the loop.
  Literal recursive_at(const Formula& f, int q, bool array) {
    if (q < k_) return step(f, q, array, at(f, q + 1, array));
    const Literal wrapped = select_by_loop(loop_chain(f, array));
    return step(f, q, array, wrapped);
  }

  Literal build_at(const Formula& f, int q, bool array) {
    switch (f->op) {
      case Op::truth:
        return net_.true_literal();
      case Op::falsity:
        return net_.false_literal();
      case Op::atom:
        return atom_at(f, q);
      case Op::negation:
        if (array) throw std::invalid_argument("array translation requires negation normal form");
        return !at(f->children[0], q, array);
      case Op::implication:
      case Op::equivalence:
        if (array) throw std::invalid_argument("array translation requires negation normal form");
        [[fallthrough]];
      case Op::conjunction:
      case Op::disjunction: {
        std::vector<Literal> kids;
        for (const auto& c : f->children) kids.push_back(at(c, q, array));
        return connective(f->op, kids);
      }
      case Op::next: {
        if (q < k_) return at(f->children[0], q + 1, array);
        std::vector<Literal> by_state(k_, net_.false_literal());
        for (int j = p_.loop_min_; j <= k_; ++j) by_state[j - 1] = at(f->children[0], j, array);
        return select_by_loop(by_state);
      }
      case Op::eventually:
        if (array) return eventually_from(f, [&](VarId j) { return min_table(j, q); });
        return recursive_at(f, q, array);
      case Op::always:
      case Op::until:
        return recursive_at(f, q, array);
      default:
        throw std::invalid_argument("translation requires a quantifier-free formula");
    }
  }

  VarId index_var() {
    ++p_.index_vars_;
    return net_.add_variable(csp::range_domain(1, k_), VarClass::auxiliary);
  }

  // j >= min(l, q) for a constant state q.
  void min_table(VarId j, int q) {
    std::vector<std::vector<int>> tuples;
    for (int l = 1; l <= k_; ++l) {
      for (int jj = std::min(l, q); jj <= k_; ++jj) tuples.push_back({l, jj});
    }
    csp::post_table(net_, {p_.loop_, j}, tuples);
  }

  // j >= min(l, i) for an index variable i.
  void min_table_var(VarId j, VarId i) {
    std::vector<std::vector<int>> tuples;
    for (int l = 1; l <= k_; ++l) {
      for (int ii = 1; ii <= k_; ++ii) {
        for (int jj = std::min(l, ii); jj <= k_; ++jj) tuples.push_back({l, ii, jj});
      }
    }
    csp::post_table(net_, {p_.loop_, i, j}, tuples);
  }

  template <class Bound>
  Literal eventually_from(const Formula& f, Bound bound) {
    const VarId j = index_var();
    bound(j);
    return at_var(f->children[0], j);
  }

  Literal build_var(const Formula& f, VarId index) {
    switch (f->op) {
      case Op::truth:
        return net_.true_literal();
      case Op::falsity:
        return net_.false_literal();
      case Op::atom: {
        std::vector<VarId> column;
        Domain values = 0;
        for (int t = 1; t <= k_; ++t) {
          column.push_back(p_.relation(f->aspect, t, f->lhs.object, f->rhs.object));
          values |= net_.domain(column.back());
        }
        const VarId x = net_.add_variable(values, VarClass::auxiliary);
        csp::post_element(net_, index, 1, x, std::move(column));
        const Literal b = fresh();
        csp::post_member(net_, b, x, to_domain(f->relations));
        return b;
      }
      case Op::conjunction:
      case Op::disjunction: {
        std::vector<Literal> kids;
        for (const auto& c : f->children) kids.push_back(at_var(c, index));
        return connective(f->op, kids);
      }
      case Op::next: {
        const VarId succ = index_var();
        std::vector<std::vector<int>> tuples;
        for (int l = 1; l <= k_; ++l) {
          for (int i = 1; i <= k_; ++i) tuples.push_back({i, l, i < k_ ? i + 1 : l});
        }
        csp::post_table(net_, {index, p_.loop_, succ}, tuples);
        return at_var(f->children[0], succ);
      }
      case Op::eventually:
        return eventually_from(f, [&](VarId j) { min_table_var(j, index); });
      case Op::always:
      case Op::until: {
        std::vector<Literal> by_state(k_, net_.false_literal());
        const Domain d = net_.domain(index);
        for (int q = 1; q <= k_; ++q) {
          if (d & csp::value_bit(q)) by_state[q - 1] = at(f, q, true);
        }
        const Literal b = fresh();
        csp::post_element(net_, index, 1, b, std::move(by_state));
        return b;
      }
      default:
        throw std::invalid_argument("array translation requires negation normal form");
    }
  }

  StagePlan& p_;
  csp::Network& net_;
  int k_;
};

std::unique_ptr<StagePlan> build_stages(const Problem& problem, int k) {
  return std::make_unique<StagePlan>(problem, k);
}

Literal translate_unravel(StagePlan& plan, const Formula& f, int i) {
  if (i < 1 || i > plan.k()) throw std::out_of_range("state index outside 1..k");
  return Translator(plan).at(f, i, false);
}

void translate_unravel(StagePlan& plan, const Formula& f, int i, Literal b) {
  csp::post_equiv(plan.net(), plan.net().true_literal(), b, translate_unravel(plan, f, i));
}

namespace {

void check_array_plan(const StagePlan& plan, const Formula& f) {
  if (plan.finite_paths()) throw std::invalid_argument("array translation supports infinite paths only");
  if (!ltl::is_nnf(f)) throw std::invalid_argument("array translation requires negation normal form");
}

}  // namespace

Literal translate_array(StagePlan& plan, const Formula& f, int i) {
  if (i < 1 || i > plan.k()) throw std::out_of_range("state index outside 1..k");
  check_array_plan(plan, f);
  return Translator(plan).at(f, i, true);
}

Literal translate_array(StagePlan& plan, const Formula& f, VarId index) {
  check_array_plan(plan, f);
  if (plan.net().domain(index) & ~csp::range_domain(1, plan.k())) {
    throw std::invalid_argument("index variable must range over 1..k");
  }
  return Translator(plan).at_var(f, index);
}

void translate_array(StagePlan& plan, const Formula& f, int i, Literal b) {
  csp::post_clause(plan.net(), {!b, translate_array(plan, f, i)});
}

void post_formulas(StagePlan& plan) {
  const Problem& problem = plan.problem();
  for (const auto& tf : problem.formulas) {
    Literal l;
    if (problem.options.translation == Translation::array) {
      l = translate_array(plan, ltl::to_nnf(tf.formula, problem.vocab), 1);
    } else {
      l = translate_unravel(plan, tf.formula, 1);
    }
    if (!plan.net().restrict(l, csp::kTrue)) csp::post_clause(plan.net(), {l});
  }
}

}  // namespace qsim
