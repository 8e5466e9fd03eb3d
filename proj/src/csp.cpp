// SPDX-License-Identifier: Apache-2.0

#include "qsim/csp.hpp"

#include <algorithm>
#include <stdexcept>

namespace qsim::csp {

namespace {

constexpr Domain swap_bool(Domain d) { return ((d & 1U) << 1) | ((d >> 1) & 1U); }

Domain view(const Network& net, Literal l) { return net.domain(l); }

bool literal_value(std::span<const int> values, Literal l) {
  const bool v = values[l.var.index] != 0;
  return l.positive ? v : !v;
}

// --- extensional tables ----------------------------------------------------

class BinaryTable final : public Propagator {
 public:
  BinaryTable(VarId x, VarId y, const std::vector<std::vector<int>>& tuples)
      : Propagator({x, y}), for_x_(64, 0), for_y_(64, 0) {
    for (const auto& t : tuples) {
      for_x_[t[0]] |= value_bit(t[1]);
      for_y_[t[1]] |= value_bit(t[0]);
    }
  }

  bool propagate(Network& net) override {
    const VarId x = scope_[0], y = scope_[1];
    Domain dy = net.domain(y);
    Domain keep_x = 0;
    for (Domain rest = net.domain(x); rest; rest &= rest - 1) {
      const int v = std::countr_zero(rest);
      if (for_x_[v] & dy) keep_x |= value_bit(v);
    }
    if (!net.restrict(x, keep_x)) return false;
    Domain keep_y = 0;
    for (Domain rest = dy; rest; rest &= rest - 1) {
      const int v = std::countr_zero(rest);
      if (for_y_[v] & keep_x) keep_y |= value_bit(v);
    }
    return net.restrict(y, keep_y);
  }

  bool satisfied(std::span<const int> values) const override {
    return (for_x_[values[scope_[0].index]] >> values[scope_[1].index]) & 1U;
  }
  std::string_view kind() const override { return "table"; }

 private:
  std::vector<Domain> for_x_, for_y_;
};

class TernaryTable final : public Propagator {
 public:
  TernaryTable(VarId x, VarId y, VarId z, const std::vector<std::vector<int>>& tuples)
      : Propagator({x, y, z}) {
    for (const auto& t : tuples) {
      width_x_ = std::max(width_x_, t[0] + 1);
      width_y_ = std::max(width_y_, t[1] + 1);
    }
    for_xy_.assign(static_cast<std::size_t>(width_x_) * width_y_, 0);
    for (const auto& t : tuples) for_xy_[cell(t[0], t[1])] |= value_bit(t[2]);
  }

  bool propagate(Network& net) override {
    const Domain dx = net.domain(scope_[0]) & range_domain(0, width_x_ - 1);
    const Domain dy = net.domain(scope_[1]) & range_domain(0, width_y_ - 1);
    const Domain dz = net.domain(scope_[2]);
    Domain sx = 0, sy = 0, sz = 0;
    for (Domain rx = dx; rx; rx &= rx - 1) {
      const int vx = std::countr_zero(rx);
      for (Domain ry = dy; ry; ry &= ry - 1) {
        const int vy = std::countr_zero(ry);
        const Domain m = for_xy_[cell(vx, vy)] & dz;
        if (m) {
          sx |= value_bit(vx);
          sy |= value_bit(vy);
          sz |= m;
        }
      }
    }
    return net.restrict(scope_[0], sx) && net.restrict(scope_[1], sy) && net.restrict(scope_[2], sz);
  }

  bool satisfied(std::span<const int> values) const override {
    const int vx = values[scope_[0].index], vy = values[scope_[1].index];
    if (vx >= width_x_ || vy >= width_y_) return false;
    return (for_xy_[cell(vx, vy)] >> values[scope_[2].index]) & 1U;
  }
  std::string_view kind() const override { return "table"; }

 private:
  std::size_t cell(int vx, int vy) const { return static_cast<std::size_t>(vx) * width_y_ + vy; }

  int width_x_ = 0, width_y_ = 0;
  std::vector<Domain> for_xy_;
};

class Table final : public Propagator {
 public:
  Table(std::vector<VarId> scope, const std::vector<std::vector<int>>& tuples)
      : Propagator(std::move(scope)) {
    for (const auto& t : tuples) flat_.insert(flat_.end(), t.begin(), t.end());
  }

  bool propagate(Network& net) override {
    const std::size_t arity = scope_.size();
    Domain doms[64];
    Domain support[64] = {};
    for (std::size_t i = 0; i < arity; ++i) doms[i] = net.domain(scope_[i]);
    for (std::size_t off = 0; off < flat_.size(); off += arity) {
      bool valid = true;
      for (std::size_t i = 0; i < arity && valid; ++i) valid = (doms[i] >> flat_[off + i]) & 1U;
      if (!valid) continue;
      for (std::size_t i = 0; i < arity; ++i) support[i] |= value_bit(flat_[off + i]);
    }
    for (std::size_t i = 0; i < arity; ++i) {
      if (!net.restrict(scope_[i], support[i])) return false;
    }
    return true;
  }

  bool satisfied(std::span<const int> values) const override {
    const std::size_t arity = scope_.size();
    for (std::size_t off = 0; off < flat_.size(); off += arity) {
      bool match = true;
      for (std::size_t i = 0; i < arity && match; ++i) match = values[scope_[i].index] == flat_[off + i];
      if (match) return true;
    }
    return false;
  }
  std::string_view kind() const override { return "table"; }

 private:
  std::vector<std::uint8_t> flat_;
};

// --- reified and Boolean constraints ---------------------------------------

class Member final : public Propagator {
 public:
  Member(Literal result, VarId x, Domain set) : Propagator({result.var, x}), result_(result), set_(set) {}

  bool propagate(Network& net) override {
    const Domain dx = net.domain(scope_[1]);
    if ((dx & ~set_) == 0) return net.restrict(result_, kTrue);
    if ((dx & set_) == 0) return net.restrict(result_, kFalse);
    const Domain r = view(net, result_);
    if (r == kTrue) return net.restrict(scope_[1], set_);
    if (r == kFalse) return net.restrict(scope_[1], ~set_);
    return true;
  }

  bool satisfied(std::span<const int> values) const override {
    const bool in = (set_ >> values[scope_[1].index]) & 1U;
    return in == literal_value(values, result_);
  }
  std::string_view kind() const override { return "member"; }

 private:
  Literal result_;
  Domain set_;
};

std::vector<VarId> literal_scope(Literal head, const std::vector<Literal>& rest) {
  std::vector<VarId> scope{head.var};
  for (const auto& l : rest) scope.push_back(l.var);
  return scope;
}

// result <-> AND operands; disjunction is posted through De Morgan.
class Conjunction final : public Propagator {
 public:
  Conjunction(Literal result, std::vector<Literal> operands, bool as_or)
      : Propagator(literal_scope(result, operands)), result_(result), operands_(std::move(operands)), as_or_(as_or) {}

  bool propagate(Network& net) override {
    int unfixed = 0;
    Literal last{};
    for (const auto& l : operands_) {
      const Domain d = view(net, l);
      if (d == kFalse) return net.restrict(result_, kFalse);
      if (d == kBoolDomain) {
        ++unfixed;
        last = l;
      }
    }
    if (unfixed == 0) return net.restrict(result_, kTrue);
    const Domain r = view(net, result_);
    if (r == kTrue) {
      for (const auto& l : operands_) {
        if (!net.restrict(l, kTrue)) return false;
      }
    } else if (r == kFalse && unfixed == 1) {
      return net.restrict(last, kFalse);
    }
    return true;
  }

  bool satisfied(std::span<const int> values) const override {
    bool all = true;
    for (const auto& l : operands_) all = all && literal_value(values, l);
    return all == literal_value(values, result_);
  }
  std::string_view kind() const override { return as_or_ ? "or" : "and"; }

 private:
  Literal result_;
  std::vector<Literal> operands_;
  bool as_or_;
};

class Equivalence final : public Propagator {
 public:
  Equivalence(Literal result, Literal a, Literal b)
      : Propagator({result.var, a.var, b.var}), lits_{result, a, b} {}

  bool propagate(Network& net) override {
    Domain support[3] = {};
    const Domain d[3] = {view(net, lits_[0]), view(net, lits_[1]), view(net, lits_[2])};
    for (int va = 0; va < 2; ++va) {
      for (int vb = 0; vb < 2; ++vb) {
        const int vr = va == vb ? 1 : 0;
        if ((d[0] >> vr & 1U) && (d[1] >> va & 1U) && (d[2] >> vb & 1U)) {
          support[0] |= value_bit(vr);
          support[1] |= value_bit(va);
          support[2] |= value_bit(vb);
        }
      }
    }
    for (int i = 0; i < 3; ++i) {
      if (!net.restrict(lits_[i], support[i])) return false;
    }
    return true;
  }

  bool satisfied(std::span<const int> values) const override {
    return literal_value(values, lits_[0]) == (literal_value(values, lits_[1]) == literal_value(values, lits_[2]));
  }
  std::string_view kind() const override { return "equiv"; }

 private:
  Literal lits_[3];
};

class ConditionalEqual final : public Propagator {
 public:
  ConditionalEqual(VarId selector, int selected, const std::vector<VarId>& xs, const std::vector<VarId>& ys)
      : Propagator([&] {
          std::vector<VarId> scope{selector};
          scope.insert(scope.end(), xs.begin(), xs.end());
          scope.insert(scope.end(), ys.begin(), ys.end());
          return scope;
        }()),
        selected_(selected),
        width_(xs.size()) {}

  bool propagate(Network& net) override {
    const Domain ds = net.domain(scope_[0]);
    if (!(ds & value_bit(selected_))) return true;
    for (std::size_t i = 1; i <= width_; ++i) {
      if ((net.domain(scope_[i]) & net.domain(scope_[i + width_])) == 0) {
        return net.restrict(scope_[0], ~value_bit(selected_));
      }
    }
    if (ds != value_bit(selected_)) return true;
    for (std::size_t i = 1; i <= width_; ++i) {
      const Domain both = net.domain(scope_[i]) & net.domain(scope_[i + width_]);
      if (!net.restrict(scope_[i], both) || !net.restrict(scope_[i + width_], both)) return false;
    }
    return true;
  }

  bool satisfied(std::span<const int> values) const override {
    if (values[scope_[0].index] != selected_) return true;
    for (std::size_t i = 1; i <= width_; ++i) {
      if (values[scope_[i].index] != values[scope_[i + width_].index]) return false;
    }
    return true;
  }
  std::string_view kind() const override { return "conditional-equal"; }

 private:
  int selected_;
  std::size_t width_;
};

class Element final : public Propagator {
 public:
  Element(VarId index, int offset, Literal value, std::vector<Literal> elements)
      : Propagator([&] {
          std::vector<VarId> scope{index, value.var};
          for (const auto& e : elements) scope.push_back(e.var);
          return scope;
        }()),
        offset_(offset),
        value_(value),
        elements_(std::move(elements)) {}

  bool propagate(Network& net) override {
    const VarId index = scope_[0];
    const Domain dv = view(net, value_);
    Domain keep = 0, reachable = 0;
    for (Domain rest = net.domain(index); rest; rest &= rest - 1) {
      const int i = std::countr_zero(rest);
      const int pos = i - offset_;
      if (pos < 0 || pos >= static_cast<int>(elements_.size())) continue;
      const Domain common = view(net, elements_[pos]) & dv;
      if (common) {
        keep |= value_bit(i);
        reachable |= common;
      }
    }
    if (!net.restrict(index, keep) || !net.restrict(value_, reachable)) return false;
    if (std::has_single_bit(keep)) {
      return net.restrict(elements_[std::countr_zero(keep) - offset_], reachable);
    }
    return true;
  }

  bool satisfied(std::span<const int> values) const override {
    const int pos = values[scope_[0].index] - offset_;
    if (pos < 0 || pos >= static_cast<int>(elements_.size())) return false;
    const Literal e = elements_[pos];
    const int ev = e.positive ? values[e.var.index] : 1 - values[e.var.index];
    const int vv = value_.positive ? values[value_.var.index] : 1 - values[value_.var.index];
    return ev == vv;
  }
  std::string_view kind() const override { return "element"; }

 private:
  int offset_;
  Literal value_;
  std::vector<Literal> elements_;
};

}  // namespace

// ---------------------------------------------------------------------------

Network::Network() { true_var_ = add_variable(kTrue, VarClass::auxiliary); }

VarId Network::add_variable(Domain initial, VarClass cls, int group) {
  if (initial == 0) throw std::invalid_argument("variable with empty domain");
  VarId id{static_cast<std::uint32_t>(domains_.size())};
  domains_.push_back(initial);
  classes_.push_back(cls);
  groups_.push_back(group);
  watchers_.emplace_back();
  by_class_[static_cast<int>(cls)].push_back(id);
  return id;
}

Domain Network::domain(Literal l) const {
  const Domain d = domains_[l.var.index];
  return l.positive ? d : swap_bool(d);
}

bool Network::restrict(VarId v, Domain mask) {
  const Domain old = domains_[v.index];
  const Domain next = old & mask;
  if (next == old) return true;
  if (next == 0) return false;
  trail_.emplace_back(v.index, old);
  domains_[v.index] = next;
  enqueue_watchers(v.index);
  return true;
}

bool Network::restrict(Literal l, Domain mask) {
  return restrict(l.var, l.positive ? mask : swap_bool(mask));
}

void Network::enqueue_watchers(std::uint32_t var) {
  for (std::uint32_t c : watchers_[var]) {
    if (c == current_ || queued_[c]) continue;
    queued_[c] = 1;
    queue_.push_back(c);
  }
}

void Network::attach(std::unique_ptr<Propagator> p) {
  const auto id = static_cast<std::uint32_t>(propagators_.size());
  for (VarId v : p->scope()) {
    if (v.index >= domains_.size()) throw std::invalid_argument("constraint over unknown variable");
    auto& w = watchers_[v.index];
    if (w.empty() || w.back() != id) w.push_back(id);
  }
  propagators_.push_back(std::move(p));
  queued_.push_back(1);
  queue_.push_back(id);
}

Status Network::propagate() {
  std::size_t head = 0;
  while (head < queue_.size()) {
    const std::uint32_t c = queue_[head++];
    queued_[c] = 0;
    current_ = c;
    ++propagations_;
    const bool ok = propagators_[c]->propagate(*this);
    current_ = -1;
    if (!ok) {
      for (std::size_t i = head; i < queue_.size(); ++i) queued_[queue_[i]] = 0;
      queue_.clear();
      return Status::failed;
    }
    if (head > 4096 && head * 2 > queue_.size()) {
      queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(head));
      head = 0;
    }
  }
  queue_.clear();
  return Status::stable;
}

void Network::restore(std::size_t mark) {
  while (trail_.size() > mark) {
    const auto& [var, old] = trail_.back();
    domains_[var] = old;
    trail_.pop_back();
  }
}

std::optional<std::size_t> Network::first_violation(std::span<const int> values) const {
  for (std::size_t i = 0; i < propagators_.size(); ++i) {
    if (!propagators_[i]->satisfied(values)) return i;
  }
  return std::nullopt;
}

std::vector<int> Network::current_values() const {
  std::vector<int> out(domains_.size());
  for (std::size_t i = 0; i < domains_.size(); ++i) out[i] = min_value(domains_[i]);
  return out;
}

// ---------------------------------------------------------------------------

void post_table(Network& net, std::vector<VarId> scope, const std::vector<std::vector<int>>& tuples) {
  for (const auto& t : tuples) {
    if (t.size() != scope.size()) throw std::invalid_argument("table tuple arity does not match scope");
    for (int v : t) {
      if (v < 0 || v > kMaxValue) throw std::invalid_argument("table value out of range");
    }
  }
  if (scope.size() > 64) throw std::invalid_argument("table arity above 64");
  if (scope.size() == 2 && scope[0] != scope[1]) {
    net.post<BinaryTable>(scope[0], scope[1], tuples);
  } else if (scope.size() == 3 && scope[0] != scope[1] && scope[1] != scope[2] && scope[0] != scope[2]) {
    net.post<TernaryTable>(scope[0], scope[1], scope[2], tuples);
  } else {
    net.post<Table>(std::move(scope), tuples);
  }
}

void post_member(Network& net, Literal result, VarId x, Domain set) { net.post<Member>(result, x, set); }

void post_and(Network& net, Literal result, std::vector<Literal> operands) {
  net.post<Conjunction>(result, std::move(operands), false);
}

void post_or(Network& net, Literal result, std::vector<Literal> operands) {
  for (auto& l : operands) l = !l;
  net.post<Conjunction>(!result, std::move(operands), true);
}

void post_equiv(Network& net, Literal result, Literal a, Literal b) { net.post<Equivalence>(result, a, b); }

void post_clause(Network& net, std::vector<Literal> operands) {
  post_or(net, net.true_literal(), std::move(operands));
}

void post_conditional_equal(Network& net, VarId selector, int selected, VarId x, VarId y) {
  net.post<ConditionalEqual>(selector, selected, std::vector<VarId>{x}, std::vector<VarId>{y});
}

void post_conditional_equal(Network& net, VarId selector, int selected, const std::vector<VarId>& xs,
                            const std::vector<VarId>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("post_conditional_equal: arrays differ in length");
  net.post<ConditionalEqual>(selector, selected, xs, ys);
}

void post_element(Network& net, VarId index, int offset, VarId value, std::vector<VarId> elements) {
  std::vector<Literal> lits;
  lits.reserve(elements.size());
  for (VarId e : elements) lits.push_back({e, true});
  net.post<Element>(index, offset, Literal{value, true}, std::move(lits));
}

void post_element(Network& net, VarId index, int offset, Literal result, std::vector<Literal> elements) {
  net.post<Element>(index, offset, result, std::move(elements));
}

}  // namespace qsim::csp
