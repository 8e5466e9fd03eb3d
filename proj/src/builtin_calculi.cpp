// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>

#include "qsim/calculus.hpp"

namespace qsim {

namespace {

// Region Connection Calculus, standard composition table (193 triples).
constexpr std::string_view kRcc8 = R"(# RCC8
NAME
rcc8

ALPHABET
disjoint meet overlap equal covers contains coveredby inside

IDENTITY
equal

CONVERSE
disjoint disjoint
meet meet
overlap overlap
equal equal
covers coveredby
coveredby covers
contains inside
inside contains

COMPOSITION
disjoint disjoint : *
disjoint meet : disjoint meet overlap coveredby inside
disjoint overlap : disjoint meet overlap coveredby inside
disjoint equal : disjoint
disjoint covers : disjoint
disjoint contains : disjoint
disjoint coveredby : disjoint meet overlap coveredby inside
disjoint inside : disjoint meet overlap coveredby inside

meet disjoint : disjoint meet overlap covers contains
meet meet : disjoint meet overlap equal covers coveredby
meet overlap : disjoint meet overlap coveredby inside
meet equal : meet
meet covers : disjoint meet
meet contains : disjoint
meet coveredby : meet overlap coveredby inside
meet inside : overlap coveredby inside

overlap disjoint : disjoint meet overlap covers contains
overlap meet : disjoint meet overlap covers contains
overlap overlap : *
overlap equal : overlap
overlap covers : disjoint meet overlap covers contains
overlap contains : disjoint meet overlap covers contains
overlap coveredby : overlap coveredby inside
overlap inside : overlap coveredby inside

equal disjoint : disjoint
equal meet : meet
equal overlap : overlap
equal equal : equal
equal covers : covers
equal contains : contains
equal coveredby : coveredby
equal inside : inside

covers disjoint : disjoint meet overlap covers contains
covers meet : meet overlap covers contains
covers overlap : overlap covers contains
covers equal : covers
covers covers : covers contains
covers contains : contains
covers coveredby : overlap equal covers coveredby
covers inside : overlap coveredby inside

contains disjoint : disjoint meet overlap covers contains
contains meet : overlap covers contains
contains overlap : overlap covers contains
contains equal : contains
contains covers : contains
contains contains : contains
contains coveredby : overlap covers contains
contains inside : overlap equal covers contains coveredby inside

coveredby disjoint : disjoint
coveredby meet : disjoint meet
coveredby overlap : disjoint meet overlap coveredby inside
coveredby equal : coveredby
coveredby covers : disjoint meet overlap equal covers coveredby
coveredby contains : disjoint meet overlap covers contains
coveredby coveredby : coveredby inside
coveredby inside : inside

inside disjoint : disjoint
inside meet : disjoint
inside overlap : disjoint meet overlap coveredby inside
inside equal : inside
inside covers : disjoint meet overlap coveredby inside
inside contains : *
inside coveredby : inside
inside inside : inside

NEIGHBOURHOOD
disjoint meet
meet disjoint
meet overlap
overlap meet
overlap equal
equal overlap
overlap covers
covers overlap
overlap coveredby
coveredby overlap
equal covers
covers equal
equal coveredby
coveredby equal
equal contains
contains equal
equal inside
inside equal
covers contains
contains covers
coveredby inside
inside coveredby
)";

constexpr std::string_view kSize3 = R"(# relative size
NAME
size3

ALPHABET
< = >

IDENTITY
=

CONVERSE
< >
= =
> <

COMPOSITION
< < : <
< = : <
< > : *
= < : <
= = : =
= > : >
> < : *
> = : >
> > : >

NEIGHBOURHOOD
< =
= <
= >
> =
)";

constexpr std::array<std::string_view, 9> kDirNames = {
    "north", "northeast", "east", "southeast", "south", "southwest", "west", "northwest", "samepoint"};

// Sign of (dx, dy) per direction, in kDirNames order.
constexpr std::array<std::array<int, 2>, 9> kDirSigns = {{
    {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 0}}};

// Possible signs of a + b given the signs of a and b.
std::vector<int> sign_sum(int a, int b) {
  if (a == 0) return {b};
  if (b == 0 || a == b) return {a};
  return {-1, 0, 1};
}

int dir_of(int sx, int sy) {
  for (int r = 0; r < 9; ++r) {
    if (kDirSigns[r][0] == sx && kDirSigns[r][1] == sy) return r;
  }
  return -1;
}

std::string dir_document() {
  const DirTables tables = derive_dir_tables();
  std::string doc = "# cardinal directions, derived from point semantics\nNAME\ndir9\n\nALPHABET\n";
  for (const auto& name : tables.relations) doc += name + " ";
  doc += "\n\nIDENTITY\nsamepoint\n\nCONVERSE\n";
  for (int r = 0; r < 9; ++r) {
    const int c = dir_of(-kDirSigns[r][0], -kDirSigns[r][1]);
    doc += tables.relations[r] + " " + tables.relations[c] + "\n";
  }
  doc += "\nCOMPOSITION\n";
  for (const auto& [r, s, t] : tables.composition) {
    doc += tables.relations[r] + " " + tables.relations[s] + " " + tables.relations[t] + "\n";
  }
  doc += "\nNEIGHBOURHOOD\n";
  for (const auto& [r, s] : tables.neighbourhood) {
    doc += tables.relations[r] + " " + tables.relations[s] + "\n";
  }
  return doc;
}

}  // namespace

DirTables derive_dir_tables() {
  DirTables out;
  for (auto name : kDirNames) out.relations.emplace_back(name);
  for (int r = 0; r < 9; ++r) {
    for (int s = 0; s < 9; ++s) {
      std::vector<int> targets;
      for (int sx : sign_sum(kDirSigns[r][0], kDirSigns[s][0])) {
        for (int sy : sign_sum(kDirSigns[r][1], kDirSigns[s][1])) targets.push_back(dir_of(sx, sy));
      }
      std::sort(targets.begin(), targets.end());
      for (int t : targets) out.composition.push_back({r, s, t});
    }
  }
  const int samepoint = 8;
  for (int r = 0; r < 8; ++r) {
    out.neighbourhood.emplace_back(samepoint, r);
    out.neighbourhood.emplace_back(r, samepoint);
    // Directions are listed clockwise, so the two ring neighbours of an axis
    // direction are quadrants and vice versa.
    out.neighbourhood.emplace_back(r, (r + 1) % 8);
    out.neighbourhood.emplace_back(r, (r + 7) % 8);
  }
  for (int r = 0; r < 9; ++r) out.neighbourhood.emplace_back(r, r);
  return out;
}

std::vector<std::string> builtin_calculus_names() { return {"rcc8", "dir9", "size3"}; }

std::string builtin_calculus_document(std::string_view name) {
  if (name == "rcc8") return std::string(kRcc8);
  if (name == "size3") return std::string(kSize3);
  if (name == "dir9") return dir_document();
  throw CalculusError("unknown built-in calculus '" + std::string(name) + "'");
}

Calculus builtin_calculus(std::string_view name, const CalculusOptions& options) {
  Calculus cal = load_calculus(builtin_calculus_document(name));
  if (!options.rigid_objects) return cal;
  if (name != "rcc8") throw CalculusError("rigid_objects applies to rcc8 only");

  const RelationId equal = cal.id("equal");
  const RelationSet size_changes = cal.parse_set("coveredby covers inside contains");
  std::vector<RelationPair> kept;
  for (const auto& [r, s] : cal.neighbourhood_pairs()) {
    const bool drop = (r == equal && size_changes.contains(s)) || (s == equal && size_changes.contains(r));
    if (!drop) kept.emplace_back(r, s);
  }
  std::vector<RelationId> converse;
  for (RelationId r = 0; r < cal.size(); ++r) converse.push_back(cal.converse(r));
  return Calculus(cal.name(), cal.relation_names(), cal.identity(), std::move(converse),
                  cal.composition_triples(), kept);
}

}  // namespace qsim
