// SPDX-License-Identifier: Apache-2.0
//
// Hand-transcribed traces used by several tests.

#pragma once

#include <array>
#include <stdexcept>

#include "qsim/ltl.hpp"
#include "qsim/problem.hpp"

namespace fixtures {

/// The eight-state juggling cascade, loop from state 3. `holder[t][b]` is the
/// hand holding ball b in state t+1 (0 left, 1 right, -1 airborne).
inline qsim::ltl::LassoPath juggling_cascade_trace(const qsim::Problem& p) {
  static constexpr std::array<std::array<int, 3>, 8> holder = {{
      {0, 0, 1},
      {-1, 0, 1},
      {-1, 0, -1},
      {1, -1, -1},
      {-1, -1, 0},
      {-1, 1, -1},
      {0, -1, -1},
      {-1, -1, 1},
  }};
  const auto& v = p.vocab;
  const qsim::Calculus& c = v.calculus(0);
  const int meet = c.id("meet"), disjoint = c.id("disjoint");
  auto id = [&](const char* name) {
    const auto o = v.find_object(name);
    if (!o) throw std::invalid_argument(name);
    return *o;
  };
  const int hands[2] = {id("left_hand"), id("right_hand")};
  const int balls[3] = {id("ball1"), id("ball2"), id("ball3")};
  qsim::ltl::LassoPath path;
  for (const auto& state : holder) {
    qsim::ltl::QualitativeArray q(v.object_count(), c.identity());
    auto set = [&](int a, int b, int r) {
      q.at(a, b) = r;
      q.at(b, a) = c.converse(r);
    };
    set(hands[0], hands[1], disjoint);
    for (int b = 0; b < 3; ++b) {
      for (int h = 0; h < 2; ++h) set(hands[h], balls[b], state[b] == h ? meet : disjoint);
      for (int b2 = b + 1; b2 < 3; ++b2) {
        set(balls[b], balls[b2], state[b] >= 0 && state[b] == state[b2] ? meet : disjoint);
      }
    }
    path.states.push_back({q});
  }
  path.loop_start = 3;
  return path;
}

}  // namespace fixtures
