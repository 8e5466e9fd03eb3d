// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "oracles.hpp"
#include "qsim/spec.hpp"
#include "qsim/translate.hpp"

using namespace qsim;
using csp::Status;

namespace {

// Number of comp classes per stage: ordered distinct triples up to the
// symmetries the composition table has.
int comp_classes(int n, bool triangle_symmetric) {
  std::set<std::vector<int>> classes;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        if (a == b || b == c || a == c) continue;
        std::vector<std::vector<int>> orbit = {{a, b, c}, {c, b, a}};
        if (triangle_symmetric) orbit = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
        classes.insert(*std::min_element(orbit.begin(), orbit.end()));
      }
    }
  }
  return static_cast<int>(classes.size());
}

bool triangle_symmetric(const Calculus& c) {
  for (const auto& [r, s, t] : c.composition_triples()) {
    if (!c.composes(c.converse(r), t, s)) return false;
  }
  return true;
}

Problem pair(const Calculus& c) { return oracle::pair_problem(std::make_shared<const Calculus>(c)); }

}  // namespace

TEST_CASE("juggling plan counts") {
  const Problem p = load_spec("specs/juggling.qs");
  const auto plan = build_stages(p, 8);
  const PlanCounts& c = plan->counts();
  const int n = 5, k = 8;
  CHECK(c.relation_variables == (k + 1) * n * n);
  CHECK(c.conv == k * n * (n - 1) / 2);
  CHECK(c.comp == k * comp_classes(n, triangle_symmetric(p.vocab.calculus(0))));
  CHECK(c.neighbourhood == k * n * (n - 1));
  CHECK(c.conditional_equal == k);
  CHECK(c.initial == 3);
  CHECK(c.link == 0);
  // 20 ordered pairs per stage besides the fixed diagonal
  std::set<std::uint32_t> open;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (!plan->net().fixed(plan->relation(0, 2, a, b))) open.insert(plan->relation(0, 2, a, b).index);
    }
  }
  CHECK(open.size() == 20);
}

TEST_CASE("comp constraints are one per symmetry class") {
  CHECK(triangle_symmetric(builtin_calculus("rcc8")));
  CHECK(triangle_symmetric(builtin_calculus("dir9")));
  CHECK(comp_classes(5, true) == 10);
  CHECK(comp_classes(5, false) == 30);
}

TEST_CASE("smallest plan") {
  Problem p = pair(builtin_calculus("size3"));
  p.options.allow_finite_path = true;
  const auto plan = build_stages(p, 1);
  CHECK(plan->net().domain(plan->loop()) == csp::range_domain(1, 2));
  CHECK(plan->counts().conditional_equal == 1);

  const Problem q = pair(builtin_calculus("size3"));
  const auto loops_only = build_stages(q, 1);
  CHECK(loops_only->net().domain(loops_only->loop()) == csp::range_domain(1, 1));
}

TEST_CASE("navigation initial position is posted at stage 1") {
  const Problem p = load_spec("specs/navigation.qs");
  const auto plan = build_stages(p, 13);
  const int ship = *p.vocab.find_object("ship"), c = *p.vocab.find_object("buoy_c");
  CHECK(plan->counts().initial == 1);
  CHECK(plan->net().domain(plan->relation(0, 1, ship, c)) == csp::value_bit(p.vocab.calculus(0).id("south")));
  CHECK(plan->net().domain(plan->relation(0, 2, ship, c)) != csp::value_bit(p.vocab.calculus(0).id("south")));
}

TEST_CASE("stage k+1 is only tied to stage k") {
  const Problem p = load_spec("specs/juggling.qs");
  auto plan = build_stages(p, 3);
  auto& net = plan->net();
  std::set<std::uint32_t> last;
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) last.insert(plan->relation(0, 4, a, b).index);
  }
  for (std::size_t i = 0; i < net.constraint_count(); ++i) {
    const auto& con = net.constraint(i);
    int in_last = 0;
    for (auto v : con.scope()) in_last += last.contains(v.index);
    if (in_last == 0) continue;
    const std::string kind(con.kind());
    CAPTURE(kind);
    CHECK((kind == "table" || kind == "conditional-equal"));
    if (kind == "table") CHECK(con.scope().size() == 2);
  }
}

TEST_CASE("n_unravel") {
  CHECK(n_unravel(5, 1, 1) == 4);
  CHECK(n_unravel(5, 6, 5) == 0);
  CHECK(n_unravel(13, 1, 7) == 12);
  CHECK(n_unravel(8, 3, 5) == 5);
}

TEST_CASE("atom literal follows the stage variable") {
  const Calculus rcc8 = builtin_calculus("rcc8");
  const Problem p = pair(rcc8);
  auto plan = build_stages(p, 3);
  const auto lit = translate_unravel(*plan, ltl::atom(0, 0, 1, rcc8.parse_set("meet")), 2);
  auto& net = plan->net();
  REQUIRE(net.propagate() == Status::stable);
  CHECK(net.domain(lit) == csp::kBoolDomain);
  const auto mark = net.checkpoint();
  REQUIRE(net.assign(plan->relation(0, 2, 0, 1), rcc8.id("meet")));
  REQUIRE(net.propagate() == Status::stable);
  CHECK(net.domain(lit) == csp::kTrue);
  net.restore(mark);
  REQUIRE(net.restrict(lit, csp::kFalse));
  REQUIRE(net.propagate() == Status::stable);
  CHECK((net.domain(plan->relation(0, 2, 0, 1)) & csp::value_bit(rcc8.id("meet"))) == 0);
}

TEST_CASE("next at the last state is false without a loop") {
  Problem p = pair(builtin_calculus("size3"));
  p.options.allow_finite_path = true;
  auto plan = build_stages(p, 3);
  const auto lit = translate_unravel(*plan, ltl::next(ltl::truth()), 3);
  auto& net = plan->net();
  REQUIRE(net.assign(plan->loop(), 4));
  REQUIRE(net.propagate() == Status::stable);
  CHECK(net.domain(lit) == csp::kFalse);
}

TEST_CASE("array translation of eventually adds one index variable") {
  const Calculus rcc8 = builtin_calculus("rcc8");
  Problem p = pair(rcc8);
  p.options.translation = Translation::array;
  auto plan = build_stages(p, 4);
  const auto lit = translate_array(*plan, ltl::eventually(ltl::atom(0, 0, 1, rcc8.parse_set("meet"))), 1);
  CHECK(plan->index_variables() == 1);
  auto& net = plan->net();
  REQUIRE(net.restrict(lit, csp::kTrue));
  REQUIRE(net.propagate() == Status::stable);
  // no stage is meet except the last: the index must point there
  for (int t = 1; t <= 3; ++t) REQUIRE(net.restrict(plan->relation(0, t, 0, 1), ~csp::value_bit(rcc8.id("meet"))));
  REQUIRE(net.propagate() == Status::stable);
  CHECK(net.domain(plan->relation(0, 4, 0, 1)) == csp::value_bit(rcc8.id("meet")));
}

TEST_CASE("translation cache stays linear in k") {
  const Calculus c = builtin_calculus("size3");
  const Problem p = pair(c);
  ltl::Formula f = ltl::atom(0, 0, 1, c.parse_set("<"));
  int subformulas = 1;
  for (int i = 0; i < 6; ++i) {
    f = i % 2 ? ltl::always(f) : ltl::eventually(f);
    ++subformulas;
  }
  for (int k : {4, 8, 16}) {
    auto plan = build_stages(p, k);
    translate_unravel(*plan, f, 1);
    CAPTURE(k);
    CHECK(plan->translation_booleans() <= 2 * subformulas * (k + 1));
    CHECK(plan->cache_size() <= static_cast<std::size_t>(2 * subformulas * (k + 1)));
  }
}

TEST_CASE("model sets tell formulas apart") {
  const Calculus c = oracle::two_valued_calculus();
  Problem p = pair(c);
  const auto same = ltl::atom(0, 0, 1, c.parse_set("same"));
  p.formulas.push_back({"", ltl::eventually(same)});
  const auto lassos = oracle::all_lassos(c, 2, false);
  const auto models = oracle::solver_models(p, 2, lassos);
  CHECK(models == oracle::evaluator_models(c, ltl::eventually(same), lassos));
  CHECK(models != oracle::evaluator_models(c, ltl::always(same), lassos));
  CHECK(models.size() == 6);  // 8 lassos of length 2, minus the two staying "other"
}

TEST_CASE("exhaustive equivalence with the evaluator, two relations") {
  const Calculus c = oracle::two_valued_calculus();
  REQUIRE(c.validate().empty());
  for (auto translation : {Translation::unravel, Translation::array}) {
    const auto r = oracle::check_family(c, 3, {1, 2, 3}, translation, false);
    CAPTURE(r.first_mismatch);
    CHECK(r.instances > 4000);
    CHECK(r.mismatches == 0);
  }
}

TEST_CASE("exhaustive equivalence with the evaluator, finite paths allowed") {
  const Calculus c = oracle::two_valued_calculus();
  const auto r = oracle::check_family(c, 3, {1, 2, 3}, Translation::unravel, true);
  CAPTURE(r.first_mismatch);
  CHECK(r.mismatches == 0);
}

TEST_CASE("equivalence with the evaluator, three relations") {
  const Calculus c = builtin_calculus("size3");
  for (auto translation : {Translation::unravel, Translation::array}) {
    const auto r = oracle::check_family(c, 2, {1, 2, 3}, translation, false);
    CAPTURE(r.first_mismatch);
    CHECK(r.mismatches == 0);
  }
}

TEST_CASE("both translations agree on random three-object problems") {
  auto calc = std::make_shared<const Calculus>(builtin_calculus("size3"));
  ltl::Vocabulary v;
  v.objects = {"a", "b", "c"};
  v.aspects.push_back({"Q", calc});
  std::mt19937_64 rng(41);
  int satisfiable = 0;
  for (int i = 0; i < 1000; ++i) {
    Problem p;
    p.vocab = v;
    for (int f = 0; f < 3; ++f) p.formulas.push_back({"", oracle::random_formula(rng, 3, v)});
    const int k = 1 + static_cast<int>(rng() % 4);
    p.options.translation = Translation::unravel;
    const auto unravel = solve_bound(p, k);
    p.options.translation = Translation::array;
    const auto array = solve_bound(p, k);
    CAPTURE(ltl::to_string(p.formulas[0].formula, v));
    CAPTURE(ltl::to_string(p.formulas[1].formula, v));
    CAPTURE(ltl::to_string(p.formulas[2].formula, v));
    CAPTURE(k);
    CHECK(unravel.status == array.status);
    satisfiable += unravel.status == csp::SolveStatus::solved;
  }
  // both verdicts occur often
  CHECK(satisfiable > 200);
  CHECK(satisfiable < 800);
}
