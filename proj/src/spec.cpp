// SPDX-License-Identifier: Apache-2.0

#include "qsim/spec.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace qsim {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return std::string(hash == std::string_view::npos ? line : line.substr(0, hash));
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::vector<std::string> words(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Line {
  int number;
  std::string text;  // comment stripped, trimmed
};

class SpecParser {
 public:
  SpecParser(std::string source, std::filesystem::path base) : source_(std::move(source)), base_(std::move(base)) {}

  Problem parse(std::string_view text) {
    split_sections(text);
    for (const auto& [name, lines] : sections_) {
      static const char* known[] = {"objects", "aspects", "links", "init", "temporal", "options"};
      if (std::find(std::begin(known), std::end(known), name) == std::end(known)) {
        fail(section_lines_[name], "unknown section [" + name + "]");
      }
    }
    objects();
    aspects();
    links();
    init();
    temporal();
    options();
    if (problem_.vocab.objects.empty()) fail(1, "no objects declared");
    if (problem_.vocab.aspects.empty()) fail(1, "no aspects declared");
    return std::move(problem_);
  }

 private:
  [[noreturn]] void fail(int line, const std::string& message) const { throw SpecError(source_, line, message); }

  void split_sections(std::string_view text) {
    std::string current;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      ++number;
      std::string raw(text.substr(pos, end - pos));
      pos = end + 1;
      const std::string line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(number, "malformed section header");
        current = trim(line.substr(1, line.size() - 2));
        if (sections_.count(current)) fail(number, "duplicate section [" + current + "]");
        sections_[current];
        section_lines_[current] = number;
        continue;
      }
      if (current.empty()) fail(number, "text before the first section header");
      sections_[current].push_back({number, line});
    }
  }

  const std::vector<Line>& section(const std::string& name) {
    static const std::vector<Line> none;
    auto it = sections_.find(name);
    return it == sections_.end() ? none : it->second;
  }

  int object(const std::string& name) {
    auto& objs = problem_.vocab.objects;
    auto it = std::find(objs.begin(), objs.end(), name);
    if (it != objs.end()) return static_cast<int>(it - objs.begin());
    objs.push_back(name);
    return static_cast<int>(objs.size()) - 1;
  }

  // Name = {a, b} + Other + {c}
  void objects() {
    auto& sets = problem_.vocab.sets;
    for (const Line& l : section("objects")) {
      const auto eq = l.text.find('=');
      if (eq == std::string::npos) fail(l.number, "expected 'Name = {objects}'");
      const std::string name = trim(l.text.substr(0, eq));
      if (!is_identifier(name)) fail(l.number, "invalid set name '" + name + "'");
      if (sets.count(name)) fail(l.number, "object set '" + name + "' declared twice");
      std::vector<int> members;
      auto add = [&](int o) {
        if (std::find(members.begin(), members.end(), o) == members.end()) members.push_back(o);
      };
      std::string rest = l.text.substr(eq + 1);
      std::size_t i = 0;
      bool expect_term = true;
      while (true) {
        while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
        if (i == rest.size()) break;
        if (!expect_term) {
          if (rest[i] != '+') fail(l.number, "expected '+' between set terms");
          ++i;
          expect_term = true;
          continue;
        }
        if (rest[i] == '{') {
          const auto close = rest.find('}', i);
          if (close == std::string::npos) fail(l.number, "missing '}'");
          std::string inner = rest.substr(i + 1, close - i - 1);
          std::replace(inner.begin(), inner.end(), ',', ' ');
          for (const auto& w : words(inner)) {
            if (!is_identifier(w)) fail(l.number, "invalid object name '" + w + "'");
            if (sets.count(w) || w == name) fail(l.number, "'" + w + "' is a set name, not an object");
            add(object(w));
          }
          i = close + 1;
        } else {
          std::size_t j = i;
          while (j < rest.size() && (std::isalnum(static_cast<unsigned char>(rest[j])) || rest[j] == '_')) ++j;
          const std::string ref = rest.substr(i, j - i);
          if (ref.empty()) fail(l.number, "unexpected '" + std::string(1, rest[i]) + "'");
          auto it = sets.find(ref);
          if (it == sets.end()) fail(l.number, "unknown object set '" + ref + "'");
          for (int o : it->second) add(o);
          i = j;
        }
        expect_term = false;
      }
      if (expect_term && !members.empty()) fail(l.number, "dangling '+'");
      sets[name] = members;
    }
    for (const auto& o : problem_.vocab.objects) {
      if (sets.count(o)) fail(section_lines_["objects"], "'" + o + "' names both an object and a set");
    }
  }

  // Name = rcc8 [rigid_objects] | Name = file:PATH
  void aspects() {
    auto& vocab = problem_.vocab;
    for (const Line& l : section("aspects")) {
      const auto eq = l.text.find('=');
      if (eq == std::string::npos) fail(l.number, "expected 'Name = calculus'");
      const std::string name = trim(l.text.substr(0, eq));
      if (!is_identifier(name)) fail(l.number, "invalid aspect name '" + name + "'");
      if (vocab.find_aspect(name)) fail(l.number, "aspect '" + name + "' declared twice");
      const auto w = words(l.text.substr(eq + 1));
      if (w.empty()) fail(l.number, "missing calculus for aspect '" + name + "'");
      std::shared_ptr<const Calculus> calc;
      try {
        if (w[0].rfind("file:", 0) == 0) {
          if (w.size() > 1) fail(l.number, "calculus files take no options");
          const auto path = base_ / w[0].substr(5);
          calc = std::make_shared<const Calculus>(load_calculus(read_file(path)));
        } else {
          CalculusOptions options;
          for (std::size_t i = 1; i < w.size(); ++i) {
            if (w[i] != "rigid_objects") fail(l.number, "unknown calculus option '" + w[i] + "'");
            options.rigid_objects = true;
          }
          const auto names = builtin_calculus_names();
          if (std::find(names.begin(), names.end(), w[0]) == names.end()) {
            fail(l.number, "unknown calculus '" + w[0] + "'");
          }
          calc = std::make_shared<const Calculus>(builtin_calculus(w[0], options));
        }
      } catch (const SpecError&) {
        throw;
      } catch (const std::exception& e) {
        fail(l.number, e.what());
      }
      vocab.aspects.push_back({name, std::move(calc)});
    }
  }

  int aspect(const Line& l, const std::string& name) {
    auto a = problem_.vocab.find_aspect(name);
    if (!a) fail(l.number, "unknown aspect '" + name + "'");
    return *a;
  }

  RelationSet relation_set(const Line& l, int aspect_index, std::string text) {
    text = trim(text);
    if (text.size() < 2 || text.front() != '{' || text.back() != '}') fail(l.number, "expected {relations}");
    std::replace(text.begin(), text.end(), ',', ' ');
    RelationSet out;
    const Calculus& calc = problem_.vocab.calculus(aspect_index);
    for (const auto& w : words(text.substr(1, text.size() - 2))) {
      auto r = calc.find(w);
      if (!r) fail(l.number, "relation '" + w + "' is not in calculus " + calc.name());
      out.insert(*r);
    }
    return out;
  }

  // A B iff {R} {S}   |   A B allow r:s r:s ...
  void links() {
    for (const Line& l : section("links")) {
      const auto w = words(l.text);
      if (w.size() < 3) fail(l.number, "expected 'A B iff {R} {S}' or 'A B allow r:s ...'");
      const int first = aspect(l, w[0]);
      const int second = aspect(l, w[1]);
      if (first == second) fail(l.number, "a link needs two different aspects");
      if (w[2] == "iff") {
        const std::string rest = l.text.substr(l.text.find("iff") + 3);
        const auto split = rest.find('}');
        if (split == std::string::npos) fail(l.number, "expected two relation sets");
        const RelationSet lhs = relation_set(l, first, rest.substr(0, split + 1));
        const RelationSet rhs = relation_set(l, second, rest.substr(split + 1));
        problem_.links.push_back(Link::iff(problem_.vocab, first, lhs, second, rhs));
      } else if (w[2] == "allow") {
        Link link{first, second, {}};
        for (std::size_t i = 3; i < w.size(); ++i) {
          const auto colon = w[i].find(':');
          if (colon == std::string::npos) fail(l.number, "expected r:s, found '" + w[i] + "'");
          auto r = problem_.vocab.calculus(first).find(w[i].substr(0, colon));
          auto s = problem_.vocab.calculus(second).find(w[i].substr(colon + 1));
          if (!r || !s) fail(l.number, "unknown relation in '" + w[i] + "'");
          link.allowed.emplace_back(*r, *s);
        }
        problem_.links.push_back(std::move(link));
      } else {
        fail(l.number, "unknown link kind '" + w[2] + "'");
      }
    }
  }

  struct Statement {
    int line;
    std::string text;
  };

  std::vector<Statement> statements(const std::string& name) {
    std::vector<Statement> out;
    std::string pending;
    int start = 0;
    int previous = 0;
    for (const Line& l : section(name)) {
      std::string_view rest = l.text;
      const int offset_line = l.number;
      // Keep line numbers of multi-line statements exact across skipped lines.
      if (!pending.empty()) pending.append(static_cast<std::size_t>(std::max(0, l.number - previous - 1)), '\n');
      previous = l.number;
      while (!rest.empty()) {
        const auto semi = rest.find(';');
        if (pending.empty()) start = offset_line;
        if (semi == std::string_view::npos) {
          pending += std::string(rest) + "\n";
          break;
        }
        pending += std::string(rest.substr(0, semi));
        if (!trim(pending).empty()) out.push_back({start, pending});
        pending.clear();
        rest = trim(rest.substr(semi + 1));
      }
    }
    if (!trim(pending).empty()) out.push_back({start, pending});
    return out;
  }

  ltl::Formula formula(const Statement& s) {
    try {
      return ltl::expand_quantifiers(ltl::parse(s.text, problem_.vocab, s.line), problem_.vocab);
    } catch (const ltl::ParseError& e) {
      fail(e.line(), "column " + std::to_string(e.column()) + ": " + e.message());
    } catch (const std::invalid_argument& e) {
      fail(s.line, e.what());
    }
  }

  void init() {
    for (const auto& s : statements("init")) {
      const ltl::Formula f = formula(s);
      std::vector<ltl::Formula> parts;
      if (f->op == ltl::Op::conjunction) {
        parts = f->children;
      } else if (f->op != ltl::Op::truth) {
        parts = {f};
      }
      for (const auto& p : parts) {
        if (p->op != ltl::Op::atom) fail(s.line, "initial constraints must be (conjunctions of) atoms");
        problem_.initial.push_back({p->aspect, p->lhs.object, p->rhs.object, p->relations});
      }
    }
  }

  void temporal() {
    for (const auto& s : statements("temporal")) {
      problem_.formulas.push_back({collapse_spaces(s.text), formula(s)});
    }
  }

  int integer(const Line& l, const std::string& v) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      fail(l.number, "expected an integer, found '" + v + "'");
    }
  }

  void options() {
    Options& o = problem_.options;
    for (const Line& l : section("options")) {
      const auto eq = l.text.find('=');
      if (eq == std::string::npos) fail(l.number, "expected 'key = value'");
      const std::string key = trim(l.text.substr(0, eq));
      const std::string value = trim(l.text.substr(eq + 1));
      if (key == "k_min") {
        o.k_min = integer(l, value);
      } else if (key == "k_max") {
        o.k_max = integer(l, value);
      } else if (key == "translation") {
        if (value == "unravel") {
          o.translation = Translation::unravel;
        } else if (value == "array") {
          o.translation = Translation::array;
        } else {
          fail(l.number, "translation must be unravel or array");
        }
      } else if (key == "heuristic") {
        if (value == "first-fail") {
          o.subclass_families.clear();
        } else if (value.rfind("subclass:", 0) == 0) {
          try {
            o.subclass_families = load_families(base_ / value.substr(9), problem_.vocab);
          } catch (const std::exception& e) {
            fail(l.number, e.what());
          }
        } else {
          fail(l.number, "heuristic must be first-fail or subclass:FILE");
        }
      } else if (key == "allow_finite_path") {
        if (value != "true" && value != "false") fail(l.number, "expected true or false");
        o.allow_finite_path = value == "true";
      } else if (key == "budget") {
        o.budget_total = std::chrono::seconds(integer(l, value));
      } else if (key == "budget_per_k") {
        o.budget_per_k = std::chrono::seconds(integer(l, value));
      } else if (key == "jobs") {
        o.jobs = integer(l, value);
      } else {
        fail(l.number, "unknown option '" + key + "'");
      }
    }
    if (o.k_min < 1 || o.k_max < o.k_min || o.k_max > csp::kMaxValue - 2) {
      fail(section_lines_["options"], "invalid bound range");
    }
  }

  std::string source_;
  std::filesystem::path base_;
  std::map<std::string, std::vector<Line>> sections_;
  std::map<std::string, int> section_lines_;
  Problem problem_;
};

}  // namespace

Problem parse_spec(std::string_view text, const std::string& source, const std::filesystem::path& base_dir) {
  return SpecParser(source, base_dir).parse(text);
}

Problem load_spec(const std::filesystem::path& path) {
  return parse_spec(read_file(path), path.string(), path.parent_path());
}

std::vector<std::vector<RelationSet>> parse_families(std::string_view text, const ltl::Vocabulary& vocab,
                                                     const std::string& source) {
  std::vector<std::vector<RelationSet>> families(vocab.aspects.size());
  int number = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++number;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw SpecError(source, number, "expected 'calculus: relations'");
    const std::string calc_name = trim(line.substr(0, colon));
    std::string rels = line.substr(colon + 1);
    std::replace(rels.begin(), rels.end(), ',', ' ');
    for (std::size_t x = 0; x < vocab.aspects.size(); ++x) {
      const Calculus& calc = vocab.calculus(static_cast<int>(x));
      if (calc.name() != calc_name) continue;
      RelationSet set;
      for (const auto& w : words(rels)) {
        auto r = calc.find(w);
        if (!r) throw SpecError(source, number, "relation '" + w + "' is not in calculus " + calc_name);
        set.insert(*r);
      }
      if (set.empty()) throw SpecError(source, number, "empty relation set");
      families[x].push_back(set);
    }
  }
  return families;
}

std::vector<std::vector<RelationSet>> load_families(const std::filesystem::path& path, const ltl::Vocabulary& vocab) {
  return parse_families(read_file(path), vocab, path.string());
}

}  // namespace qsim
