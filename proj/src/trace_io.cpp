// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "qsim/spec.hpp"

namespace qsim {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kSchema = "qsim-trace/v1";

std::string loop_span(const ltl::LassoPath& path) {
  if (!path.loop_start) return "none (finite path)";
  return std::to_string(*path.loop_start) + ".." + std::to_string(path.length());
}

}  // namespace

std::string trace_to_text(const Problem& problem, const ltl::LassoPath& path) {
  const auto& vocab = problem.vocab;
  const int n = problem.object_count();
  std::ostringstream out;
  out << "k: " << path.length() << "\n";
  out << "loop: " << loop_span(path) << "\n";
  for (int t = 1; t <= path.length(); ++t) {
    out << "state " << t;
    if (path.loop_start && t == *path.loop_start) out << "  [loop start]";
    if (path.loop_start && t == path.length()) out << "  [back to " << *path.loop_start << "]";
    out << "\n";
    for (int x = 0; x < problem.aspect_count(); ++x) {
      out << "  " << vocab.aspects[x].name << "\n";
      const auto& q = path.states[t - 1][x];
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (a == b) continue;
          out << "    " << vocab.objects[a] << " " << vocab.objects[b] << " "
              << vocab.calculus(x).relation_name(q.at(a, b)) << "\n";
        }
      }
    }
  }
  return out.str();
}

std::string trace_to_json(const Problem& problem, const ltl::LassoPath& path, const TraceStats& stats) {
  const auto& vocab = problem.vocab;
  const int n = problem.object_count();
  json doc;
  doc["schema"] = kSchema;
  doc["k"] = path.length();
  doc["loop_start"] = path.loop_start ? json(*path.loop_start) : json(nullptr);
  doc["objects"] = vocab.objects;
  json aspects = json::array();
  for (int x = 0; x < problem.aspect_count(); ++x) {
    json aspect;
    aspect["name"] = vocab.aspects[x].name;
    aspect["calculus"] = vocab.calculus(x).name();
    json states = json::array();
    for (int t = 1; t <= path.length(); ++t) {
      json pairs = json::array();
      const auto& q = path.states[t - 1][x];
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (a == b) continue;
          pairs.push_back({{"a", vocab.objects[a]}, {"b", vocab.objects[b]},
                           {"rel", vocab.calculus(x).relation_name(q.at(a, b))}});
        }
      }
      states.push_back({{"index", t}, {"pairs", std::move(pairs)}});
    }
    aspect["states"] = std::move(states);
    aspects.push_back(std::move(aspect));
  }
  doc["aspects"] = std::move(aspects);
  doc["stats"] = {{"nodes", stats.nodes},
                  {"failures", stats.failures},
                  {"propagations", stats.propagations},
                  {"seconds", std::round(stats.seconds * 1000.0) / 1000.0}};
  return doc.dump(2) + "\n";
}

std::string trace_to_dot(const Problem& problem, const ltl::LassoPath& path) {
  const auto& vocab = problem.vocab;
  const int n = problem.object_count();
  std::ostringstream out;
  out << "digraph trace {\n";
  out << "  rankdir=LR;\n";
  out << "  node [shape=box, fontname=\"monospace\"];\n";
  for (int t = 1; t <= path.length(); ++t) {
    out << "  s" << t << " [label=\"" << t;
    for (int x = 0; x < problem.aspect_count(); ++x) {
      const auto& q = path.states[t - 1][x];
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
          out << "\\n" << vocab.aspects[x].name << "[" << vocab.objects[a] << "," << vocab.objects[b]
              << "] " << vocab.calculus(x).relation_name(q.at(a, b));
        }
      }
    }
    out << "\\l\"];\n";
  }
  for (int t = 1; t < path.length(); ++t) out << "  s" << t << " -> s" << t + 1 << ";\n";
  if (path.loop_start) {
    out << "  s" << path.length() << " -> s" << *path.loop_start
        << " [color=red, penwidth=2, constraint=false, label=\"loop\"];\n";
  }
  out << "}\n";
  return out.str();
}

ltl::LassoPath trace_from_json(const Problem& problem, std::string_view text) {
  const auto& vocab = problem.vocab;
  const int n = problem.object_count();
  auto bad = [](const std::string& what) { return std::invalid_argument("trace document: " + what); };
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw bad(e.what());
  }
  try {
    if (doc.value("schema", "") != kSchema) throw bad(std::string("expected schema ") + kSchema);
    const int k = doc.at("k").get<int>();
    if (k < 1) throw bad("k must be positive");
    ltl::LassoPath path;
    if (!doc.at("loop_start").is_null()) path.loop_start = doc.at("loop_start").get<int>();
    const auto objects = doc.at("objects").get<std::vector<std::string>>();
    if (objects != vocab.objects) throw bad("objects differ from the specification");
    path.states.assign(k, ltl::State{});
    for (auto& s : path.states) {
      for (int x = 0; x < problem.aspect_count(); ++x) s.emplace_back(n, vocab.calculus(x).identity());
    }
    const auto& aspects = doc.at("aspects");
    if (static_cast<int>(aspects.size()) != problem.aspect_count()) throw bad("aspect count differs");
    for (const auto& aspect : aspects) {
      const std::string name = aspect.at("name").get<std::string>();
      const auto x = vocab.find_aspect(name);
      if (!x) throw bad("unknown aspect " + name);
      const Calculus& calc = vocab.calculus(*x);
      const auto& states = aspect.at("states");
      if (static_cast<int>(states.size()) != k) throw bad("aspect " + name + " does not have k states");
      std::vector<char> seen(static_cast<std::size_t>(k) * n * n, 0);
      for (const auto& state : states) {
        const int t = state.at("index").get<int>();
        if (t < 1 || t > k) throw bad("state index out of range");
        for (const auto& pair : state.at("pairs")) {
          const auto a = vocab.find_object(pair.at("a").get<std::string>());
          const auto b = vocab.find_object(pair.at("b").get<std::string>());
          const auto r = calc.find(pair.at("rel").get<std::string>());
          if (!a || !b) throw bad("unknown object in state " + std::to_string(t));
          if (!r) throw bad("unknown relation in state " + std::to_string(t));
          path.states[t - 1][*x].at(*a, *b) = *r;
          seen[static_cast<std::size_t>(t - 1) * n * n + *a * n + *b] = 1;
        }
      }
      for (int t = 0; t < k; ++t) {
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            if (a != b && !seen[static_cast<std::size_t>(t) * n * n + a * n + b]) {
              throw bad("aspect " + name + " state " + std::to_string(t + 1) + " misses pair " + vocab.objects[a] +
                        "," + vocab.objects[b]);
            }
          }
        }
      }
    }
    return path;
  } catch (const json::exception& e) {
    throw bad(e.what());
  }
}

}  // namespace qsim
