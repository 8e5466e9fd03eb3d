// SPDX-License-Identifier: Apache-2.0
//
// Binary qualitative calculi: relation alphabets with identity, converse,
// composition table and conceptual neighbourhood.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qsim {

using RelationId = int;

/// A subset of a calculus alphabet. Alphabets are limited to 64 relations.
class RelationSet {
 public:
  class iterator {
   public:
    using value_type = RelationId;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    explicit iterator(std::uint64_t rest) : rest_(rest) {}

    RelationId operator*() const { return std::countr_zero(rest_); }
    iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    iterator operator++(int) {
      iterator copy = *this;
      ++*this;
      return copy;
    }
    bool operator==(const iterator&) const = default;

   private:
    std::uint64_t rest_ = 0;
  };

  constexpr RelationSet() = default;
  constexpr explicit RelationSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr RelationSet single(RelationId r) { return RelationSet{std::uint64_t{1} << r}; }
  static constexpr RelationSet first(int n) {
    return RelationSet{n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1};
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool contains(RelationId r) const { return (bits_ >> r) & 1U; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool subset_of(RelationSet other) const { return (bits_ & ~other.bits_) == 0; }

  constexpr void insert(RelationId r) { bits_ |= std::uint64_t{1} << r; }
  constexpr void erase(RelationId r) { bits_ &= ~(std::uint64_t{1} << r); }

  constexpr RelationSet operator|(RelationSet o) const { return RelationSet{bits_ | o.bits_}; }
  constexpr RelationSet operator&(RelationSet o) const { return RelationSet{bits_ & o.bits_}; }
  constexpr RelationSet operator-(RelationSet o) const { return RelationSet{bits_ & ~o.bits_}; }
  constexpr RelationSet& operator|=(RelationSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr bool operator==(const RelationSet&) const = default;

  iterator begin() const { return iterator{bits_}; }
  iterator end() const { return iterator{}; }

 private:
  std::uint64_t bits_ = 0;
};

struct LawViolation {
  std::string law;
  std::string witness;
};

class CalculusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed calculus document; `line` is 1-based.
class CalculusParseError : public CalculusError {
 public:
  CalculusParseError(int line, const std::string& message)
      : CalculusError("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class CalculusValidationError : public CalculusError {
 public:
  explicit CalculusValidationError(std::vector<LawViolation> violations);
  const std::vector<LawViolation>& violations() const { return violations_; }

 private:
  std::vector<LawViolation> violations_;
};

using Triple = std::array<RelationId, 3>;
using RelationPair = std::pair<RelationId, RelationId>;

/// Immutable qualitative calculus. A converse entry of -1 marks an undefined
/// converse; such calculi are constructible so that validate() can report it.
class Calculus {
 public:
  Calculus(std::string name, std::vector<std::string> relations, RelationId identity,
           std::vector<RelationId> converse, const std::vector<Triple>& composition,
           const std::vector<RelationPair>& neighbourhood);

  const std::string& name() const { return name_; }
  int size() const { return static_cast<int>(relations_.size()); }
  RelationSet alphabet() const { return RelationSet::first(size()); }
  const std::string& relation_name(RelationId r) const { return relations_.at(r); }
  const std::vector<std::string>& relation_names() const { return relations_; }
  std::optional<RelationId> find(std::string_view name) const;
  /// Like find() but throws CalculusError for unknown names.
  RelationId id(std::string_view name) const;

  RelationId identity() const { return identity_; }
  RelationId converse(RelationId r) const { return converse_.at(r); }

  bool composes(RelationId r, RelationId s, RelationId t) const {
    return table_[index(r, s)].contains(t);
  }
  /// { t | exists r in R, s in S with <r,s,t> in the composition table }.
  RelationSet compose(RelationSet lhs, RelationSet rhs) const;
  RelationSet converse_of(RelationSet rels) const;
  /// Admissible successors of r in one step; always contains r itself.
  RelationSet neighbours(RelationId r) const;
  bool adjacent(RelationId from, RelationId to) const { return neighbours(from).contains(to); }

  int composition_size() const;
  std::vector<Triple> composition_triples() const;
  /// Explicit (non-reflexive) directed neighbourhood pairs.
  std::vector<RelationPair> neighbourhood_pairs() const;

  std::vector<LawViolation> validate() const;

  /// Parses a comma- or space-separated list of relation names.
  RelationSet parse_set(std::string_view names) const;
  std::string format_set(RelationSet rels) const;

 private:
  std::size_t index(RelationId r, RelationId s) const {
    return static_cast<std::size_t>(r) * relations_.size() + static_cast<std::size_t>(s);
  }

  std::string name_;
  std::vector<std::string> relations_;
  RelationId identity_;
  std::vector<RelationId> converse_;
  std::vector<RelationSet> table_;
  std::vector<RelationSet> adjacent_;
};

struct CalculusOptions {
  /// RCC8 only: objects keep their size, so equal no longer neighbours the
  /// proper-part relations.
  bool rigid_objects = false;
};

/// Parses the line-oriented calculus format (sections NAME, ALPHABET, IDENTITY,
/// CONVERSE, COMPOSITION, NEIGHBOURHOOD) and validates the table laws.
Calculus load_calculus(std::string_view document);

/// Built-in calculi: "rcc8", "dir9", "size3".
Calculus builtin_calculus(std::string_view name, const CalculusOptions& options = {});
std::vector<std::string> builtin_calculus_names();
/// The document a built-in calculus is loaded from.
std::string builtin_calculus_document(std::string_view name);

/// Serializes a calculus in the format accepted by load_calculus().
std::string format_calculus(const Calculus& calculus);

struct DirTables {
  std::vector<std::string> relations;
  std::vector<Triple> composition;
  std::vector<RelationPair> neighbourhood;
};

/// Cardinal-direction (projection based) tables derived from point semantics.
/// Relation r between a and b is the sign pair of a - b.
DirTables derive_dir_tables();

}  // namespace qsim
