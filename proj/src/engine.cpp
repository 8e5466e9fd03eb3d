// SPDX-License-Identifier: Apache-2.0

#include "qsim/engine.hpp"

#include <algorithm>
#include <future>
#include <sstream>
#include <stdexcept>

#include "qsim/translate.hpp"

namespace qsim {

std::unique_ptr<csp::SplitStrategy> make_strategy(const Problem& problem) {
  const auto& families = problem.options.subclass_families;
  if (families.empty()) return std::make_unique<csp::FirstFail>(problem.options.seed);
  std::map<int, std::vector<csp::Domain>> by_group;
  for (std::size_t aspect = 0; aspect < families.size(); ++aspect) {
    if (families[aspect].empty()) continue;
    auto& family = by_group[static_cast<int>(aspect)];
    for (RelationSet s : families[aspect]) family.push_back(s.bits());
  }
  return std::make_unique<csp::SubclassSplit>(std::move(by_group));
}

BoundReport solve_bound(const Problem& problem, int k, std::optional<SimulationTrace>* trace,
                        std::chrono::milliseconds budget) {
  auto plan = build_stages(problem, k);
  post_formulas(*plan);
  const auto strategy = make_strategy(problem);
  csp::SearchLimits limits;
  limits.max_nodes = problem.options.node_limit_per_k;
  limits.max_time = budget;
  const csp::SolveResult solved = csp::solve(plan->net(), *strategy, limits);

  BoundReport report;
  report.k = k;
  report.status = solved.status;
  report.stats = solved.stats;
  report.variables = plan->net().variable_count();
  report.constraints = plan->net().constraint_count();
  if (solved.status == csp::SolveStatus::solved && trace) {
    SimulationTrace t;
    t.path = plan->extract(solved.values);
    t.stats = solved.stats;
    *trace = std::move(t);
  }
  return report;
}

namespace {

using clock = std::chrono::steady_clock;

std::chrono::milliseconds remaining(const Options& o, clock::time_point started) {
  auto per_k = o.budget_per_k;
  if (o.budget_total.count() > 0) {
    const auto left = o.budget_total - std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - started);
    const auto floor = std::max(left, std::chrono::milliseconds{1});
    per_k = per_k.count() > 0 ? std::min(per_k, floor) : floor;
  }
  return per_k;
}

void verify_or_throw(const Problem& problem, const SimulationTrace& trace) {
  const VerifyReport report = verify_trace(problem, trace.path);
  if (!report.passed()) {
    const auto& f = report.failures.front();
    throw std::logic_error("solver returned a trace that fails verification (" + f.check + ": " + f.witness + ")");
  }
}

}  // namespace

SimulationResult simulate(const Problem& problem, const ProgressCallback& progress) {
  problem.check();
  const Options& o = problem.options;
  const auto started = clock::now();
  SimulationResult result;
  auto finish = [&](Outcome outcome) {
    result.outcome = outcome;
    result.seconds = std::chrono::duration<double>(clock::now() - started).count();
    return result;
  };
  const int jobs = std::max(1, o.jobs);

  for (int k = o.k_min; k <= o.k_max; k += jobs) {
    const int last = std::min(o.k_max, k + jobs - 1);
    const auto budget = remaining(o, started);
    std::vector<std::optional<SimulationTrace>> traces(last - k + 1);
    std::vector<BoundReport> reports;
    if (jobs == 1) {
      reports.push_back(solve_bound(problem, k, &traces[0], budget));
    } else {
      std::vector<std::future<BoundReport>> running;
      for (int kk = k; kk <= last; ++kk) {
        running.push_back(std::async(std::launch::async, [&, kk] {
          return solve_bound(problem, kk, &traces[kk - k], budget);
        }));
      }
      for (auto& f : running) reports.push_back(f.get());
    }
    // Report bounds in order, stopping at the first that is not unsat.
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const BoundReport& r = reports[i];
      result.bounds.push_back(r);
      result.k_reached = r.k;
      if (progress) progress(r);
      if (r.status == csp::SolveStatus::solved) {
        verify_or_throw(problem, *traces[i]);
        result.trace = std::move(traces[i]);
        return finish(Outcome::found);
      }
      if (r.status == csp::SolveStatus::limit) return finish(Outcome::budget);
    }
    if (o.budget_total.count() > 0 && clock::now() - started >= o.budget_total && last < o.k_max) {
      return finish(Outcome::budget);
    }
  }
  return finish(Outcome::unsat);
}

// ---------------------------------------------------------------------------

namespace {

class Verifier {
 public:
  Verifier(const Problem& problem, const ltl::LassoPath& path) : p_(problem), path_(path) {}

  VerifyReport run() {
    if (!shape()) return report_;
    const int n = p_.object_count();
    const int k = path_.length();
    for (int x = 0; x < p_.aspect_count(); ++x) {
      const Calculus& calc = p_.vocab.calculus(x);
      for (int t = 1; t <= k; ++t) {
        const auto& q = state(t, x);
        for (int a = 0; a < n; ++a) {
          check("identity", q.at(a, a) == calc.identity(), [&] { return cell(x, t, a, a); });
          for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            check("conv", q.at(b, a) == calc.converse(q.at(a, b)),
                  [&] { return cell(x, t, a, b) + " but " + cell(x, t, b, a); });
            for (int c = 0; c < n; ++c) {
              if (c == a || c == b) continue;
              check("comp", calc.composes(q.at(a, b), q.at(b, c), q.at(a, c)), [&] {
                return cell(x, t, a, b) + ", " + cell(x, t, b, c) + ", " + cell(x, t, a, c) +
                       " is not in the composition table";
              });
            }
          }
        }
      }
      std::vector<std::pair<int, int>> steps;
      for (int t = 1; t < k; ++t) steps.emplace_back(t, t + 1);
      if (path_.loop_start) steps.emplace_back(k, *path_.loop_start);
      for (auto [from, to] : steps) {
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            check("neighbourhood", calc.adjacent(state(from, x).at(a, b), state(to, x).at(a, b)),
                  [&] { return cell(x, from, a, b) + " cannot change to " + cell(x, to, a, b); });
          }
        }
      }
    }
    for (const Link& link : p_.links) {
      for (int t = 1; t <= k; ++t) {
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            check("link", link.allows(state(t, link.first).at(a, b), state(t, link.second).at(a, b)),
                  [&] { return cell(link.first, t, a, b) + " with " + cell(link.second, t, a, b); });
          }
        }
      }
    }
    for (const InitialAtom& init : p_.initial) {
      check("initial", init.relations.contains(state(1, init.aspect).at(init.a, init.b)), [&] {
        return cell(init.aspect, 1, init.a, init.b) + ", required " +
               p_.vocab.calculus(init.aspect).format_set(init.relations);
      });
    }
    for (const auto& f : p_.formulas) {
      check("formula", ltl::evaluate_on_lasso(f.formula, path_, 1), [&] { return f.source + " is false"; });
    }
    return report_;
  }

 private:
  const ltl::QualitativeArray& state(int t, int aspect) const { return path_.states[t - 1][aspect]; }

  std::string cell(int aspect, int t, int a, int b) const {
    std::ostringstream s;
    s << p_.vocab.aspects[aspect].name << "_" << t << "[" << p_.vocab.objects[a] << "," << p_.vocab.objects[b]
      << "] = " << p_.vocab.calculus(aspect).relation_name(state(t, aspect).at(a, b));
    return s.str();
  }

  template <class Witness>
  void check(const char* what, bool ok, Witness witness) {
    ++report_.checks;
    if (!ok) report_.failures.push_back({what, witness()});
  }

  bool shape() {
    const int n = p_.object_count();
    const int k = path_.length();
    auto fail = [&](std::string w) {
      report_.failures.push_back({"shape", std::move(w)});
      return false;
    };
    ++report_.checks;
    if (k < 1) return fail("trace has no states");
    if (path_.loop_start) {
      if (*path_.loop_start < 1 || *path_.loop_start > k) return fail("loop start outside 1..k");
    } else if (!p_.options.allow_finite_path) {
      return fail("trace has no loop and finite paths are not allowed");
    }
    for (int t = 1; t <= k; ++t) {
      const auto& s = path_.states[t - 1];
      if (static_cast<int>(s.size()) != p_.aspect_count()) return fail("state " + std::to_string(t) + " has wrong aspect count");
      for (int x = 0; x < p_.aspect_count(); ++x) {
        if (s[x].objects() != n) return fail("state " + std::to_string(t) + " has wrong object count");
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            if (s[x].at(a, b) < 0 || s[x].at(a, b) >= p_.vocab.calculus(x).size()) {
              return fail("state " + std::to_string(t) + " holds an unknown relation id");
            }
          }
        }
      }
    }
    return true;
  }

  const Problem& p_;
  const ltl::LassoPath& path_;
  VerifyReport report_;
};

}  // namespace

VerifyReport verify_trace(const Problem& problem, const ltl::LassoPath& path) { return Verifier(problem, path).run(); }

}  // namespace qsim
