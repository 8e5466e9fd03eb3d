// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <set>

#include "qsim/ltl.hpp"

namespace qsim::ltl {

namespace {

enum class Tok {
  ident,
  lparen,
  rparen,
  lbracket,
  rbracket,
  lbrace,
  rbrace,
  comma,
  dot,
  tilde,
  bang,
  amp,
  bar,
  arrow,
  iff,
  eq,
  neq,
  lt,
  gt,
  end,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

std::vector<Token> lex(std::string_view s, int first_line) {
  std::vector<Token> out;
  int line = first_line;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t j = 0; j < n; ++j, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    const int tl = line;
    const int tc = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::ident, std::string(s.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    auto starts = [&](std::string_view p) { return s.substr(i, p.size()) == p; };
    struct Sym {
      std::string_view text;
      Tok kind;
    };
    static constexpr Sym kSymbols[] = {
        {"<->", Tok::iff}, {"->", Tok::arrow}, {"!=", Tok::neq},   {"(", Tok::lparen}, {")", Tok::rparen},
        {"[", Tok::lbracket}, {"]", Tok::rbracket}, {"{", Tok::lbrace}, {"}", Tok::rbrace}, {",", Tok::comma},
        {".", Tok::dot},  {"~", Tok::tilde}, {"!", Tok::bang},    {"&", Tok::amp},    {"|", Tok::bar},
        {"=", Tok::eq},   {"<", Tok::lt},    {">", Tok::gt},
    };
    bool matched = false;
    for (const auto& sym : kSymbols) {
      if (starts(sym.text)) {
        out.push_back({sym.kind, std::string(sym.text), tl, tc});
        advance(sym.text.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(tl, tc, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::end, "end of input", line, col});
  return out;
}

const std::set<std::string, std::less<>> kKeywords = {"X", "F", "G", "U", "forall", "exists", "in", "notin", "true", "false"};

class Parser {
 public:
  Parser(std::vector<Token> tokens, const Vocabulary& vocab) : toks_(std::move(tokens)), vocab_(vocab) {}

  Formula parse_all() {
    Formula f = formula();
    if (peek().kind != Tok::end) fail(peek(), "unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool is_word(const Token& t, std::string_view w) const { return t.kind == Tok::ident && t.text == w; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  bool accept_word(std::string_view w) {
    if (!is_word(peek(), w)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const Token& t, const std::string& message) const {
    throw ParseError(t.line, t.column, message);
  }
  const Token& expect(Tok k, std::string_view what) {
    if (peek().kind != k) fail(peek(), "expected " + std::string(what) + ", found '" + peek().text + "'");
    return take();
  }
  std::string name(std::string_view what) {
    const Token& t = peek();
    if (t.kind != Tok::ident || kKeywords.count(t.text)) {
      fail(t, "expected " + std::string(what) + ", found '" + t.text + "'");
    }
    return take().text;
  }

  Formula formula() {
    if (is_word(peek(), "forall") || is_word(peek(), "exists")) return quantified();
    return equiv();
  }

  Formula quantified() {
    const bool universal = take().text == "forall";
    std::vector<std::pair<std::string, ObjectSet>> binders;
    do {
      std::vector<std::string> names{name("variable")};
      while (accept(Tok::comma)) names.push_back(name("variable"));
      if (!accept_word("in")) fail(peek(), "expected 'in' after quantified variables");
      ObjectSet range = object_set();
      for (auto& n : names) binders.emplace_back(std::move(n), range);
    } while (accept(Tok::comma));
    expect(Tok::dot, "'.' after quantifier binders");
    for (const auto& b : binders) scope_.push_back(b.first);
    Formula body = formula();
    scope_.resize(scope_.size() - binders.size());
    for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
      body = universal ? forall(it->first, it->second, body) : exists(it->first, it->second, body);
    }
    return body;
  }

  ObjectSet object_set() {
    ObjectSet set;
    if (peek().kind == Tok::lbrace) {
      take();
      if (!accept(Tok::rbrace)) {
        do {
          const Token& t = peek();
          set.members.push_back(name("object"));
          if (!vocab_.find_object(set.members.back())) fail(t, "unknown object '" + set.members.back() + "'");
        } while (accept(Tok::comma));
        expect(Tok::rbrace, "'}'");
      }
      return set;
    }
    const Token& t = peek();
    set.name = name("object set");
    if (!vocab_.sets.count(set.name)) fail(t, "unknown object set '" + set.name + "'");
    return set;
  }

  Formula equiv() {
    Formula lhs = implies();
    while (accept(Tok::iff)) lhs = equivalence(lhs, implies());
    return lhs;
  }

  Formula implies() {
    Formula lhs = disj();
    if (accept(Tok::arrow)) return implication(lhs, implies());
    return lhs;
  }

  Formula disj() {
    std::vector<Formula> parts{until_level()};
    while (accept(Tok::bar)) parts.push_back(until_level());
    return parts.size() == 1 ? parts[0] : disjunction(std::move(parts));
  }

  Formula until_level() {
    Formula lhs = conj();
    while (accept_word("U")) lhs = until(lhs, conj());
    return lhs;
  }

  Formula conj() {
    std::vector<Formula> parts{unary()};
    while (accept(Tok::amp)) parts.push_back(unary());
    return parts.size() == 1 ? parts[0] : conjunction(std::move(parts));
  }

  Formula unary() {
    if (accept(Tok::tilde) || accept(Tok::bang)) return negation(unary());
    if (accept_word("X")) return next(unary());
    if (accept_word("F")) return eventually(unary());
    if (accept_word("G")) return always(unary());
    if (is_word(peek(), "forall") || is_word(peek(), "exists")) return quantified();
    return primary();
  }

  Formula primary() {
    const Token& t = peek();
    if (accept(Tok::lparen)) {
      Formula f = formula();
      expect(Tok::rparen, "')'");
      return f;
    }
    if (accept_word("true")) return truth();
    if (accept_word("false")) return falsity();
    if (t.kind != Tok::ident || kKeywords.count(t.text)) fail(t, "expected a formula, found '" + t.text + "'");
    if (peek(1).kind == Tok::lbracket) return atom_formula();
    if (peek(1).kind == Tok::eq || peek(1).kind == Tok::neq) {
      Term lhs = term();
      const bool negated = take().kind == Tok::neq;
      Term rhs = term();
      Formula g = same(lhs, rhs);
      return negated ? negation(g) : g;
    }
    fail(t, "expected an atom Q[a,b] or a guard a = b, found '" + t.text + "'");
  }

  Term term() {
    const Token& t = peek();
    std::string n = name("object or variable");
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (*it == n) return Term{n, -1};
    }
    if (auto o = vocab_.find_object(n)) return Term{{}, *o};
    fail(t, "unknown object or variable '" + n + "'");
  }

  RelationId relation(const Calculus& calc) {
    const Token& t = peek();
    std::string r;
    if (t.kind == Tok::lt || t.kind == Tok::gt || t.kind == Tok::eq || t.kind == Tok::ident) {
      r = take().text;
    } else {
      fail(t, "expected a relation name, found '" + t.text + "'");
    }
    auto id = calc.find(r);
    if (!id) fail(t, "relation '" + r + "' is not in calculus " + calc.name());
    return *id;
  }

  Formula atom_formula() {
    const Token& at = peek();
    const std::string aspect_name = take().text;
    auto aspect = vocab_.find_aspect(aspect_name);
    if (!aspect) fail(at, "unknown aspect '" + aspect_name + "'");
    const Calculus& calc = vocab_.calculus(*aspect);
    expect(Tok::lbracket, "'['");
    Term lhs = term();
    expect(Tok::comma, "','");
    Term rhs = term();
    expect(Tok::rbracket, "']'");
    RelationSet rels;
    if (accept_word("in") || is_word(peek(), "notin")) {
      const bool complement = accept_word("notin");
      expect(Tok::lbrace, "'{'");
      if (!accept(Tok::rbrace)) {
        do {
          rels = rels | RelationSet::single(relation(calc));
        } while (accept(Tok::comma));
        expect(Tok::rbrace, "'}'");
      }
      if (complement) rels = calc.alphabet() - rels;
    } else if (accept(Tok::eq)) {
      rels = RelationSet::single(relation(calc));
    } else if (accept(Tok::neq)) {
      rels = calc.alphabet() - RelationSet::single(relation(calc));
    } else {
      fail(peek(), "expected 'in', 'notin', '=' or '!=' after " + aspect_name + "[...]");
    }
    return atom(*aspect, lhs, rhs, rels);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Vocabulary& vocab_;
  std::vector<std::string> scope_;
};

// Printing ------------------------------------------------------------------

enum Level { kQuant = 0, kIff, kImplies, kOr, kUntil, kAnd, kUnary, kPrimary };

class Printer {
 public:
  explicit Printer(const Vocabulary& vocab) : vocab_(vocab) {}

  std::string print(const Formula& f, int required) {
    const int level = level_of(f);
    std::string s = body(f);
    return level < required ? "(" + s + ")" : s;
  }

 private:
  static int level_of(const Formula& f) {
    switch (f->op) {
      case Op::forall:
      case Op::exists:
        return kQuant;
      case Op::equivalence:
        return kIff;
      case Op::implication:
        return kImplies;
      case Op::disjunction:
        return kOr;
      case Op::until:
        return kUntil;
      case Op::conjunction:
        return kAnd;
      case Op::negation:
        return f->children[0]->op == Op::same ? kPrimary : kUnary;
      case Op::next:
      case Op::eventually:
      case Op::always:
        return kUnary;
      default:
        return kPrimary;
    }
  }

  std::string term(const Term& t) const { return t.bound() ? vocab_.objects.at(t.object) : t.variable; }

  std::string join(const std::vector<Formula>& kids, std::string_view sep, int required) {
    std::string s;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (i) s += sep;
      s += print(kids[i], required);
    }
    return s;
  }

  std::string body(const Formula& f) {
    switch (f->op) {
      case Op::truth:
        return "true";
      case Op::falsity:
        return "false";
      case Op::atom: {
        const Calculus& calc = vocab_.calculus(f->aspect);
        std::string s = vocab_.aspects.at(f->aspect).name + "[" + term(f->lhs) + ", " + term(f->rhs) + "]";
        if (f->relations.size() == 1) return s + " = " + calc.relation_name(*f->relations.begin());
        return s + " in " + calc.format_set(f->relations);
      }
      case Op::same:
        return term(f->lhs) + " = " + term(f->rhs);
      case Op::negation: {
        const Formula& c = f->children[0];
        if (c->op == Op::same) return term(c->lhs) + " != " + term(c->rhs);
        return "~" + print(c, kUnary);
      }
      case Op::conjunction:
        return join(f->children, " & ", kUnary);
      case Op::disjunction:
        return join(f->children, " | ", kUntil);
      case Op::implication:
        return print(f->children[0], kOr) + " -> " + print(f->children[1], kImplies);
      case Op::equivalence:
        return print(f->children[0], kIff) + " <-> " + print(f->children[1], kImplies);
      case Op::next:
        return "X " + print(f->children[0], kUnary);
      case Op::eventually:
        return "F " + print(f->children[0], kUnary);
      case Op::always:
        return "G " + print(f->children[0], kUnary);
      case Op::until:
        return print(f->children[0], kUntil) + " U " + print(f->children[1], kAnd);
      case Op::forall:
      case Op::exists: {
        const ObjectSet& r = f->range;
        std::string range = r.name;
        if (range.empty()) {
          range = "{";
          for (std::size_t i = 0; i < r.members.size(); ++i) range += (i ? ", " : "") + r.members[i];
          range += "}";
        }
        return std::string(f->op == Op::forall ? "forall " : "exists ") + f->variable + " in " + range + ". " +
               print(f->children[0], kQuant);
      }
    }
    return {};
  }

  const Vocabulary& vocab_;
};

}  // namespace

Formula parse(std::string_view text, const Vocabulary& vocabulary, int first_line) {
  return Parser(lex(text, first_line), vocabulary).parse_all();
}

std::string to_string(const Formula& f, const Vocabulary& vocabulary) { return Printer(vocabulary).print(f, kQuant); }

}  // namespace qsim::ltl
