// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qsim/engine.hpp"
#include "qsim/spec.hpp"

using namespace qsim;

namespace {

bool has_check(const VerifyReport& r, const std::string& check) {
  for (const auto& f : r.failures) {
    if (f.check == check) return true;
  }
  return false;
}

Problem rcc8_pair() { return oracle::pair_problem(std::make_shared<const Calculus>(builtin_calculus("rcc8"))); }

ltl::Formula rcc8_atom(const Problem& p, const char* rels) {
  return ltl::atom(0, 0, 1, p.vocab.calculus(0).parse_set(rels));
}

}  // namespace

TEST_CASE("contradictory specification is unsat up to k_max") {
  Problem p = rcc8_pair();
  p.formulas.push_back({"G disjoint", ltl::always(rcc8_atom(p, "disjoint"))});
  p.formulas.push_back({"F overlap", ltl::eventually(rcc8_atom(p, "overlap"))});
  p.options.k_max = 5;
  const auto r = simulate(p);
  CHECK(r.outcome == Outcome::unsat);
  CHECK(r.k_reached == 5);
  CHECK(r.bounds.size() == 5);
  CHECK_FALSE(r.trace);
}

TEST_CASE("shortest loop is found first") {
  Problem p = rcc8_pair();
  // disjoint to overlap and back needs meet in between, both ways
  p.formulas.push_back({"G F disjoint", ltl::always(ltl::eventually(rcc8_atom(p, "disjoint")))});
  p.formulas.push_back({"G F overlap", ltl::always(ltl::eventually(rcc8_atom(p, "overlap")))});
  const auto r = simulate(p);
  REQUIRE(r.outcome == Outcome::found);
  CHECK(r.trace->k() == 4);
  CHECK(verify_trace(p, r.trace->path).passed());
  for (std::size_t i = 0; i + 1 < r.bounds.size(); ++i) CHECK(r.bounds[i].status == csp::SolveStatus::unsat);

  p.options.jobs = 3;
  const auto parallel = simulate(p);
  REQUIRE(parallel.outcome == Outcome::found);
  CHECK(parallel.trace->k() == 4);
}

TEST_CASE("finite paths when allowed") {
  Problem p = rcc8_pair();
  p.formulas.push_back({"F overlap", ltl::eventually(rcc8_atom(p, "overlap"))});
  p.formulas.push_back({"G disjoint-free", ltl::always(rcc8_atom(p, "overlap meet"))});
  const auto lasso = simulate(p);
  REQUIRE(lasso.outcome == Outcome::found);
  CHECK(lasso.trace->path.loop_start);

  // "always" never holds on a finite path
  p.formulas.pop_back();
  p.options.allow_finite_path = true;
  p.formulas.push_back({"X X false", ltl::eventually(ltl::negation(ltl::next(ltl::truth())))});
  const auto finite = simulate(p);
  REQUIRE(finite.outcome == Outcome::found);
  CHECK_FALSE(finite.trace->path.loop_start);
  CHECK(verify_trace(p, finite.trace->path).passed());
}

TEST_CASE("juggling is found with k = 8 and loop from 3") {
  const Problem p = load_spec("specs/juggling.qs");
  const auto r = simulate(p);
  REQUIRE(r.outcome == Outcome::found);
  CHECK(r.trace->k() == 8);
  CHECK(r.trace->path.loop_start == 3);
  CHECK(verify_trace(p, r.trace->path).passed());

  // loop legality, checked directly on the extracted states
  const Calculus& c = p.vocab.calculus(0);
  const auto& states = r.trace->path.states;
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) CHECK(c.adjacent(states[7][0].at(a, b), states[2][0].at(a, b)));
  }

  const auto again = simulate(p);
  REQUIRE(again.trace);
  CHECK(again.trace->path.states == r.trace->path.states);
}

TEST_CASE("node budget is reported") {
  Problem p = load_spec("specs/juggling.qs");
  p.options.k_min = 8;
  p.options.node_limit_per_k = 1;
  const auto r = simulate(p);
  CHECK(r.outcome == Outcome::budget);
  CHECK(r.k_reached == 8);
}

TEST_CASE("the hand-written juggling cascade passes verification") {
  const Problem p = load_spec("specs/juggling.qs");
  const auto path = fixtures::juggling_cascade_trace(p);
  const auto report = verify_trace(p, path);
  for (const auto& f : report.failures) MESSAGE(f.check << ": " << f.witness);
  CHECK(report.passed());
  CHECK(report.checks > 500);
}

TEST_CASE("swapping two states breaks the juggling trace") {
  const Problem p = load_spec("specs/juggling.qs");
  auto path = fixtures::juggling_cascade_trace(p);
  std::swap(path.states[3], path.states[4]);
  const auto report = verify_trace(p, path);
  CHECK_FALSE(report.passed());
  CHECK((has_check(report, "neighbourhood") || has_check(report, "formula")));
}

TEST_CASE("all-samepoint self loop violates distinctness") {
  const Problem p = load_spec("specs/navigation.qs");
  const Calculus& c = p.vocab.calculus(0);
  ltl::LassoPath path;
  path.states.push_back({ltl::QualitativeArray(p.object_count(), c.identity())});
  path.loop_start = 1;
  const auto report = verify_trace(p, path);
  CHECK(has_check(report, "formula"));
}

TEST_CASE("shape problems are reported") {
  const Problem p = load_spec("specs/juggling.qs");
  auto path = fixtures::juggling_cascade_trace(p);
  path.loop_start = 9;
  CHECK(has_check(verify_trace(p, path), "shape"));
  path.loop_start.reset();
  CHECK(has_check(verify_trace(p, path), "shape"));
  path = fixtures::juggling_cascade_trace(p);
  path.states[2][0].at(0, 0) = p.vocab.calculus(0).id("meet");
  CHECK(has_check(verify_trace(p, path), "identity"));
}

TEST_CASE("initial state is checked") {
  const Problem p = load_spec("specs/juggling.qs");
  auto path = fixtures::juggling_cascade_trace(p);
  std::rotate(path.states.begin(), path.states.begin() + 2, path.states.end());
  CHECK(has_check(verify_trace(p, path), "initial"));
}

TEST_CASE("single-cell mutations are caught") {
  const Problem p = load_spec("specs/juggling.qs");
  const auto base = fixtures::juggling_cascade_trace(p);
  const Calculus& c = p.vocab.calculus(0);
  std::mt19937_64 rng(8);
  const int n = p.object_count();
  for (int i = 0; i < 100; ++i) {
    auto path = base;
    const int t = static_cast<int>(rng() % path.length());
    const int a = static_cast<int>(rng() % n);
    const int b = static_cast<int>(rng() % n);
    auto& cell = path.states[t][0].at(a, b);
    cell = (cell + 1 + static_cast<int>(rng() % (c.size() - 1))) % c.size();
    CHECK_FALSE(verify_trace(p, path).passed());
  }
}

TEST_CASE("links are checked") {
  const Problem p = load_spec("specs/juggling_dir.qs");
  const auto r = simulate(p);
  REQUIRE(r.outcome == Outcome::found);
  auto path = r.trace->path;
  const int equal = p.vocab.calculus(0).id("equal");
  path.states[0][0].at(0, 1) = equal;
  path.states[0][0].at(1, 0) = equal;
  CHECK(has_check(verify_trace(p, path), "link"));
}

TEST_CASE("subclass split agrees with first-fail") {
  const Problem nav = load_spec("specs/navigation.qs");
  const auto families = load_families("specs/dir9_rectangles.families", nav.vocab);
  REQUIRE(families[0].size() == 36);
  for (int k = 1; k <= 11; ++k) {
    Problem p = nav;
    const auto ff = solve_bound(p, k);
    p.options.subclass_families = families;
    const auto sub = solve_bound(p, k);
    CAPTURE(k);
    CHECK(ff.status == sub.status);
  }

  auto calc = std::make_shared<const Calculus>(builtin_calculus("dir9"));
  ltl::Vocabulary v;
  v.objects = {"a", "b", "c"};
  v.aspects.push_back({"Q", calc});
  std::mt19937_64 rng(5);
  int satisfiable = 0;
  for (int i = 0; i < 300; ++i) {
    Problem p;
    p.vocab = v;
    for (int f = 0; f < 6; ++f) p.formulas.push_back({"", oracle::random_formula(rng, 3, v)});
    const int k = 1 + static_cast<int>(rng() % 4);
    std::optional<SimulationTrace> trace;
    const auto ff = solve_bound(p, k);
    p.options.subclass_families = families;
    const auto sub = solve_bound(p, k, &trace);
    CHECK(ff.status == sub.status);
    if (trace) CHECK(verify_trace(p, trace->path).passed());
    satisfiable += ff.status == csp::SolveStatus::solved;
  }
  CHECK(satisfiable > 30);
  CHECK(satisfiable < 270);
}
