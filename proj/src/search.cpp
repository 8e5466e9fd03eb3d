// SPDX-License-Identifier: Apache-2.0

#include <stdexcept>

#include "qsim/csp.hpp"

namespace qsim::csp {

namespace {

constexpr VarClass kClassOrder[] = {VarClass::loop, VarClass::decision, VarClass::auxiliary};

Branch lowest_value_branch(VarId var, Domain d) {
  const Domain low = d & (~d + 1);
  return {var, low, d & ~low};
}

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::optional<Branch> FirstFail::split(const Network& net) const {
  for (VarClass cls : kClassOrder) {
    std::optional<VarId> best;
    int best_size = 65;
    std::uint64_t best_tie = 0;
    for (VarId v : net.variables_of(cls)) {
      const int s = domain_size(net.domain(v));
      if (s <= 1 || s > best_size) continue;
      if (!seed_) {
        if (s == best_size) continue;
        best = v;
        best_size = s;
        if (s == 2) break;
        continue;
      }
      const std::uint64_t tie = mix(*seed_ ^ mix(v.index));
      if (s < best_size || tie < best_tie) {
        best = v;
        best_size = s;
        best_tie = tie;
      }
    }
    if (best) return lowest_value_branch(*best, net.domain(*best));
  }
  return std::nullopt;
}

std::optional<Branch> SubclassSplit::split(const Network& net) const {
  auto member = [](const std::vector<Domain>& family, Domain d) {
    for (Domain m : family) {
      if (m == d) return true;
    }
    return false;
  };
  for (VarClass cls : kClassOrder) {
    std::optional<VarId> best;
    int best_rank = 0;
    for (VarId v : net.variables_of(cls)) {
      const Domain d = net.domain(v);
      const int s = domain_size(d);
      if (s <= 1) continue;
      auto it = families_.find(net.group(v));
      // Variables whose domain is outside the family are split first.
      const bool outside = it != families_.end() && !member(it->second, d);
      const int rank = (outside ? 0 : 100) + s;
      if (!best || rank < best_rank) {
        best = v;
        best_rank = rank;
      }
    }
    if (!best) continue;
    const Domain d = net.domain(*best);
    auto it = families_.find(net.group(*best));
    if (it != families_.end() && !member(it->second, d)) {
      Domain chosen = 0;
      for (Domain m : it->second) {
        if (m == 0 || m == d || (m & ~d) != 0) continue;
        if (domain_size(m) > domain_size(chosen) || (domain_size(m) == domain_size(chosen) && m < chosen)) {
          chosen = m;
        }
      }
      if (chosen) return Branch{*best, chosen, d & ~chosen};
    }
    return lowest_value_branch(*best, d);
  }
  return std::nullopt;
}

std::optional<Branch> split(const SplitStrategy& strategy, const Network& net) { return strategy.split(net); }

SolveResult solve(Network& net, const SplitStrategy& strategy, const SearchLimits& limits) {
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  const std::uint64_t propagations_before = net.propagation_count();
  SolveResult result;
  auto finish = [&](SolveStatus status) {
    result.status = status;
    result.stats.seconds = std::chrono::duration<double>(clock::now() - started).count();
    result.stats.propagations = net.propagation_count() - propagations_before;
    return result;
  };
  auto out_of_budget = [&] {
    if (limits.max_nodes && result.stats.nodes >= limits.max_nodes) return true;
    if (limits.max_time.count() > 0 && (result.stats.nodes & 255U) == 0) {
      return clock::now() - started >= limits.max_time;
    }
    return false;
  };

  const std::size_t root = net.checkpoint();
  if (net.propagate() == Status::failed) {
    net.restore(root);
    return finish(SolveStatus::unsat);
  }

  struct Frame {
    std::size_t mark;
    VarId var;
    Domain second;
  };
  std::vector<Frame> stack;
  while (true) {
    const auto branch = strategy.split(net);
    if (!branch) {
      result.values = net.current_values();
      if (auto bad = net.first_violation(result.values)) {
        throw std::logic_error("search produced an assignment violating constraint #" + std::to_string(*bad) +
                               " (" + std::string(net.constraint(*bad).kind()) + ")");
      }
      net.restore(root);
      return finish(SolveStatus::solved);
    }
    if (out_of_budget()) {
      net.restore(root);
      return finish(SolveStatus::limit);
    }
    ++result.stats.nodes;
    stack.push_back({net.checkpoint(), branch->var, branch->second});
    bool ok = net.restrict(branch->var, branch->first) && net.propagate() == Status::stable;
    while (!ok) {
      ++result.stats.failures;
      if (stack.empty()) {
        net.restore(root);
        return finish(SolveStatus::unsat);
      }
      const Frame frame = stack.back();
      stack.pop_back();
      net.restore(frame.mark);
      ++result.stats.nodes;
      ok = net.restrict(frame.var, frame.second) && net.propagate() == Status::stable;
    }
  }
}

}  // namespace qsim::csp
