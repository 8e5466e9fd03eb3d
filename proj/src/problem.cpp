// SPDX-License-Identifier: Apache-2.0

#include "qsim/problem.hpp"

#include <algorithm>
#include <stdexcept>

namespace qsim {

bool Link::allows(RelationId r, RelationId s) const {
  return std::find(allowed.begin(), allowed.end(), std::pair{r, s}) != allowed.end();
}

Link Link::iff(const ltl::Vocabulary& vocab, int first, RelationSet lhs, int second, RelationSet rhs) {
  Link link{first, second, {}};
  for (RelationId r : vocab.calculus(first).alphabet()) {
    for (RelationId s : vocab.calculus(second).alphabet()) {
      if (lhs.contains(r) == rhs.contains(s)) link.allowed.emplace_back(r, s);
    }
  }
  return link;
}

void Problem::check() const {
  const int n = object_count();
  const int m = aspect_count();
  if (n < 1) throw std::invalid_argument("problem declares no objects");
  if (m < 1) throw std::invalid_argument("problem declares no aspects");
  for (const auto& a : vocab.aspects) {
    if (!a.calculus) throw std::invalid_argument("aspect " + a.name + " has no calculus");
  }
  for (const auto& [name, members] : vocab.sets) {
    for (int o : members) {
      if (o < 0 || o >= n) throw std::invalid_argument("object set " + name + " refers to an unknown object");
    }
  }
  for (const auto& link : links) {
    if (link.first < 0 || link.first >= m || link.second < 0 || link.second >= m || link.first == link.second) {
      throw std::invalid_argument("link between unknown or identical aspects");
    }
    for (auto [r, s] : link.allowed) {
      if (r >= vocab.calculus(link.first).size() || s >= vocab.calculus(link.second).size()) {
        throw std::invalid_argument("link table refers to a relation outside its calculus");
      }
    }
  }
  for (const auto& init : initial) {
    if (init.aspect < 0 || init.aspect >= m || init.a < 0 || init.a >= n || init.b < 0 || init.b >= n) {
      throw std::invalid_argument("initial constraint refers to an unknown aspect or object");
    }
    if (!init.relations.subset_of(vocab.calculus(init.aspect).alphabet())) {
      throw std::invalid_argument("initial constraint uses relations outside its calculus");
    }
  }
  for (const auto& f : formulas) {
    if (!f.formula || !ltl::is_quantifier_free(f.formula)) {
      throw std::invalid_argument("temporal formula is not expanded: " + f.source);
    }
  }
  if (options.k_min < 1 || options.k_max < options.k_min) throw std::invalid_argument("invalid bound range");
  if (options.k_max > csp::kMaxValue - 2) {
    throw std::invalid_argument("k_max must not exceed " + std::to_string(csp::kMaxValue - 2));
  }
}

}  // namespace qsim
