// SPDX-License-Identifier: Apache-2.0

#include "qsim/calculus.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace qsim {

namespace {

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string describe_triple(const Calculus& cal, RelationId r, RelationId s, RelationId t) {
  return "<" + cal.relation_name(r) + ", " + cal.relation_name(s) + ", " + cal.relation_name(t) + ">";
}

}  // namespace

CalculusValidationError::CalculusValidationError(std::vector<LawViolation> violations)
    : CalculusError([&] {
        std::string msg = "calculus violates table laws:";
        for (const auto& v : violations) msg += " [" + v.law + ": " + v.witness + "]";
        return msg;
      }()),
      violations_(std::move(violations)) {}

Calculus::Calculus(std::string name, std::vector<std::string> relations, RelationId identity,
                   std::vector<RelationId> converse, const std::vector<Triple>& composition,
                   const std::vector<RelationPair>& neighbourhood)
    : name_(std::move(name)),
      relations_(std::move(relations)),
      identity_(identity),
      converse_(std::move(converse)) {
  const int n = size();
  if (n == 0 || n > 64) throw CalculusError("alphabet size must be in 1..64");
  if (identity_ < 0 || identity_ >= n) throw CalculusError("identity relation out of range");
  if (static_cast<int>(converse_.size()) != n) throw CalculusError("converse table size mismatch");
  for (RelationId c : converse_) {
    if (c < -1 || c >= n) throw CalculusError("converse entry out of range");
  }
  table_.assign(static_cast<std::size_t>(n) * n, RelationSet{});
  for (const auto& [r, s, t] : composition) {
    if (r < 0 || s < 0 || t < 0 || r >= n || s >= n || t >= n) {
      throw CalculusError("composition triple out of range");
    }
    table_[index(r, s)].insert(t);
  }
  adjacent_.assign(n, RelationSet{});
  for (const auto& [r, s] : neighbourhood) {
    if (r < 0 || s < 0 || r >= n || s >= n) throw CalculusError("neighbourhood pair out of range");
    if (r != s) adjacent_[r].insert(s);
  }
}

std::optional<RelationId> Calculus::find(std::string_view name) const {
  auto it = std::find(relations_.begin(), relations_.end(), name);
  if (it == relations_.end()) return std::nullopt;
  return static_cast<RelationId>(it - relations_.begin());
}

RelationId Calculus::id(std::string_view name) const {
  if (auto r = find(name)) return *r;
  throw CalculusError("unknown relation '" + std::string(name) + "' in calculus " + name_);
}

RelationSet Calculus::compose(RelationSet lhs, RelationSet rhs) const {
  RelationSet out;
  for (RelationId r : lhs) {
    for (RelationId s : rhs) out |= table_[index(r, s)];
  }
  return out;
}

RelationSet Calculus::converse_of(RelationSet rels) const {
  RelationSet out;
  for (RelationId r : rels) {
    if (converse_[r] >= 0) out.insert(converse_[r]);
  }
  return out;
}

RelationSet Calculus::neighbours(RelationId r) const {
  RelationSet out = adjacent_.at(r);
  out.insert(r);
  return out;
}

int Calculus::composition_size() const {
  int total = 0;
  for (const auto& cell : table_) total += cell.size();
  return total;
}

std::vector<Triple> Calculus::composition_triples() const {
  std::vector<Triple> out;
  for (RelationId r = 0; r < size(); ++r) {
    for (RelationId s = 0; s < size(); ++s) {
      for (RelationId t : table_[index(r, s)]) out.push_back({r, s, t});
    }
  }
  return out;
}

std::vector<RelationPair> Calculus::neighbourhood_pairs() const {
  std::vector<RelationPair> out;
  for (RelationId r = 0; r < size(); ++r) {
    for (RelationId s : adjacent_[r]) out.emplace_back(r, s);
  }
  return out;
}

std::vector<LawViolation> Calculus::validate() const {
  std::vector<LawViolation> out;
  const int n = size();
  bool converse_total = true;
  for (RelationId r = 0; r < n; ++r) {
    const RelationId c = converse_[r];
    if (c < 0) {
      out.push_back({"involution", "converse(" + relation_name(r) + ") is undefined"});
      converse_total = false;
    } else if (converse_[c] != r) {
      out.push_back({"involution", "converse(converse(" + relation_name(r) + ")) != " + relation_name(r)});
      converse_total = false;
    }
  }
  if (converse_[identity_] != identity_) {
    out.push_back({"converse-identity", "converse(" + relation_name(identity_) + ") != " + relation_name(identity_)});
  }
  for (RelationId r = 0; r < n; ++r) {
    for (RelationId t = 0; t < n; ++t) {
      if (composes(identity_, r, t) != (t == r)) {
        out.push_back({"identity", describe_triple(*this, identity_, r, t)});
      }
      if (composes(r, identity_, t) != (t == r)) {
        out.push_back({"identity", describe_triple(*this, r, identity_, t)});
      }
    }
  }
  if (converse_total) {
    for (RelationId r = 0; r < n; ++r) {
      for (RelationId s = 0; s < n; ++s) {
        for (RelationId t = 0; t < n; ++t) {
          if (composes(r, s, t) != composes(converse_[s], converse_[r], converse_[t])) {
            out.push_back({"converse-composition", describe_triple(*this, r, s, t)});
          }
        }
      }
    }
  }
  for (RelationId r = 0; r < n; ++r) {
    for (RelationId s : adjacent_[r]) {
      if (!adjacent_[s].contains(r)) {
        out.push_back({"neighbourhood-symmetry", "<" + relation_name(r) + ", " + relation_name(s) + ">"});
      }
    }
  }
  return out;
}

RelationSet Calculus::parse_set(std::string_view names) const {
  RelationSet out;
  for (const auto& word : split_words(names)) {
    if (word == "*") {
      out |= alphabet();
    } else {
      out.insert(id(word));
    }
  }
  return out;
}

std::string Calculus::format_set(RelationSet rels) const {
  std::string out = "{";
  bool first = true;
  for (RelationId r : rels) {
    if (!first) out += ", ";
    out += relation_name(r);
    first = false;
  }
  return out + "}";
}

Calculus load_calculus(std::string_view document) {
  enum class Section { none, name, alphabet, identity, converse, composition, neighbourhood };
  static const std::map<std::string, Section> headers = {
      {"NAME", Section::name},
      {"ALPHABET", Section::alphabet},
      {"IDENTITY", Section::identity},
      {"CONVERSE", Section::converse},
      {"COMPOSITION", Section::composition},
      {"NEIGHBOURHOOD", Section::neighbourhood},
  };

  std::string name;
  std::vector<std::string> alphabet;
  std::optional<std::string> identity;
  std::vector<std::pair<int, std::vector<std::string>>> converse_lines, composition_lines, neighbour_lines;
  std::set<Section> seen;

  Section section = Section::none;
  int line_no = 0;
  std::istringstream in{std::string(document)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto words = split_words(line);
    if (words.empty()) continue;
    if (words.size() == 1) {
      if (auto it = headers.find(words[0]); it != headers.end()) {
        section = it->second;
        if (!seen.insert(section).second) throw CalculusParseError(line_no, "duplicate section " + words[0]);
        continue;
      }
    }
    switch (section) {
      case Section::none:
        throw CalculusParseError(line_no, "content before first section header");
      case Section::name:
        if (words.size() != 1 || !name.empty()) throw CalculusParseError(line_no, "NAME takes one word");
        name = words[0];
        break;
      case Section::alphabet:
        alphabet.insert(alphabet.end(), words.begin(), words.end());
        break;
      case Section::identity:
        if (words.size() != 1 || identity) throw CalculusParseError(line_no, "IDENTITY takes one relation");
        identity = words[0];
        break;
      case Section::converse:
        if (words.size() != 2) throw CalculusParseError(line_no, "converse line needs two relations");
        converse_lines.emplace_back(line_no, std::move(words));
        break;
      case Section::composition:
        composition_lines.emplace_back(line_no, std::move(words));
        break;
      case Section::neighbourhood:
        if (words.size() != 2) throw CalculusParseError(line_no, "neighbourhood line needs two relations");
        neighbour_lines.emplace_back(line_no, std::move(words));
        break;
    }
  }

  if (name.empty()) throw CalculusParseError(line_no, "missing NAME section");
  if (alphabet.empty()) throw CalculusParseError(line_no, "missing or empty ALPHABET section");
  if (!identity) throw CalculusParseError(line_no, "missing IDENTITY section");
  if (alphabet.size() > 64) throw CalculusParseError(line_no, "alphabet larger than 64 relations");

  std::map<std::string, RelationId> ids;
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (alphabet[i] == "*" || alphabet[i] == ":") {
      throw CalculusParseError(line_no, "reserved relation name '" + alphabet[i] + "'");
    }
    if (!ids.emplace(alphabet[i], static_cast<RelationId>(i)).second) {
      throw CalculusParseError(line_no, "duplicate relation name '" + alphabet[i] + "'");
    }
  }
  auto lookup = [&](int at, const std::string& word) {
    auto it = ids.find(word);
    if (it == ids.end()) throw CalculusParseError(at, "unknown relation '" + word + "'");
    return it->second;
  };

  const int n = static_cast<int>(alphabet.size());
  std::vector<RelationId> converse(n, -1);
  for (const auto& [at, words] : converse_lines) {
    const RelationId r = lookup(at, words[0]);
    if (converse[r] != -1) throw CalculusParseError(at, "converse of '" + words[0] + "' given twice");
    converse[r] = lookup(at, words[1]);
  }

  std::vector<Triple> triples;
  for (const auto& [at, words] : composition_lines) {
    auto colon = std::find(words.begin(), words.end(), ":");
    if (colon == words.end()) {
      if (words.size() != 3) throw CalculusParseError(at, "composition line needs 'r s t' or 'r s : t...'");
      triples.push_back({lookup(at, words[0]), lookup(at, words[1]), lookup(at, words[2])});
      continue;
    }
    if (colon - words.begin() != 2) throw CalculusParseError(at, "composition line needs two relations before ':'");
    const RelationId r = lookup(at, words[0]);
    const RelationId s = lookup(at, words[1]);
    for (auto it = colon + 1; it != words.end(); ++it) {
      if (*it == "*") {
        for (RelationId t = 0; t < n; ++t) triples.push_back({r, s, t});
      } else {
        triples.push_back({r, s, lookup(at, *it)});
      }
    }
  }

  std::vector<RelationPair> pairs;
  for (const auto& [at, words] : neighbour_lines) pairs.emplace_back(lookup(at, words[0]), lookup(at, words[1]));

  Calculus cal(name, alphabet, lookup(line_no, *identity), std::move(converse), triples, pairs);
  if (auto violations = cal.validate(); !violations.empty()) {
    throw CalculusValidationError(std::move(violations));
  }
  return cal;
}

std::string format_calculus(const Calculus& cal) {
  std::ostringstream out;
  out << "NAME\n" << cal.name() << "\n\nALPHABET\n";
  for (RelationId r = 0; r < cal.size(); ++r) out << (r ? " " : "") << cal.relation_name(r);
  out << "\n\nIDENTITY\n" << cal.relation_name(cal.identity()) << "\n\nCONVERSE\n";
  for (RelationId r = 0; r < cal.size(); ++r) {
    out << cal.relation_name(r) << ' ' << cal.relation_name(cal.converse(r)) << '\n';
  }
  out << "\nCOMPOSITION\n";
  for (RelationId r = 0; r < cal.size(); ++r) {
    for (RelationId s = 0; s < cal.size(); ++s) {
      out << cal.relation_name(r) << ' ' << cal.relation_name(s) << " :";
      for (RelationId t : cal.compose(RelationSet::single(r), RelationSet::single(s))) {
        out << ' ' << cal.relation_name(t);
      }
      out << '\n';
    }
  }
  out << "\nNEIGHBOURHOOD\n";
  for (const auto& [r, s] : cal.neighbourhood_pairs()) {
    out << cal.relation_name(r) << ' ' << cal.relation_name(s) << '\n';
  }
  return out.str();
}

}  // namespace qsim
