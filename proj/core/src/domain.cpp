#include "smuc/domain.hpp"

#include <algorithm>

#include "smuc/errors.hpp"

namespace smuc {

DomainPtr Domain::boolean() { return DomainPtr(new Domain(Kind::Bool)); }

DomainPtr Domain::tropical() { return DomainPtr(new Domain(Kind::Tropical)); }

DomainPtr Domain::interval(Rat lo, Rat hi) {
  require(lo <= hi && !lo.is_inf(), ErrorKind::BadArgument, "bad interval bounds");
  auto d = new Domain(Kind::Interval);
  d->lo_ = lo;
  d->hi_ = hi;
  return DomainPtr(d);
}

DomainPtr Domain::finite_set(std::optional<ValueVec> universe) {
  auto d = new Domain(Kind::Set);
  if (universe) {
    std::sort(universe->begin(), universe->end());
    universe->erase(std::unique(universe->begin(), universe->end()), universe->end());
  }
  d->universe_ = std::move(universe);
  return DomainPtr(d);
}

DomainPtr Domain::path(std::vector<std::string> alphabet) {
  auto d = new Domain(Kind::Path);
  d->order_ = std::move(alphabet);
  return DomainPtr(d);
}

DomainPtr Domain::node_ids(std::vector<std::string> ids, bool totally_ordered) {
  require(!ids.empty(), ErrorKind::BadArgument, "node domain needs at least one id");
  auto d = new Domain(Kind::Node);
  d->order_ = std::move(ids);
  d->total_ = totally_ordered;
  return DomainPtr(d);
}

DomainPtr Domain::product(std::vector<DomainPtr> parts) {
  require(!parts.empty(), ErrorKind::BadArgument, "empty product");
  auto d = new Domain(Kind::Product);
  d->parts_ = std::move(parts);
  return DomainPtr(d);
}

DomainPtr Domain::lexproduct(DomainPtr first, DomainPtr second) {
  auto d = new Domain(Kind::LexProduct);
  d->parts_ = {std::move(first), std::move(second)};
  return DomainPtr(d);
}

DomainPtr Domain::hoare(DomainPtr elem) {
  auto d = new Domain(Kind::Hoare);
  d->parts_ = {std::move(elem)};
  return DomainPtr(d);
}

DomainPtr Domain::reverse(DomainPtr of) {
  if (of->kind() == Kind::Reverse) return of->parts_[0];
  auto d = new Domain(Kind::Reverse);
  d->parts_ = {std::move(of)};
  return DomainPtr(d);
}

DomainPtr make_product(DomainPtr a, DomainPtr b) { return Domain::product({std::move(a), std::move(b)}); }
DomainPtr make_lexproduct(DomainPtr a, DomainPtr b) { return Domain::lexproduct(std::move(a), std::move(b)); }
DomainPtr make_hoare(DomainPtr elem) { return Domain::hoare(std::move(elem)); }

const Domain& Domain::base() const { return kind_ == Kind::Reverse ? *parts_[0] : *this; }

int Domain::position(const std::string& id) const {
  for (size_t i = 0; i < order_.size(); ++i)
    if (order_[i] == id) return static_cast<int>(i);
  return -1;
}

// ---------------------------------------------------------------- membership

bool Domain::contains(const Value& v) const {
  switch (kind_) {
    case Kind::Bool: return v.is(Value::Kind::Bool);
    case Kind::Tropical: return v.is(Value::Kind::Num) && !v.as_num().negative();
    case Kind::Interval:
      return v.is(Value::Kind::Num) && lo_ <= v.as_num() && v.as_num() <= hi_;
    case Kind::Set: {
      if (!v.is(Value::Kind::Set)) return false;
      if (!universe_) return true;
      for (const auto& e : v.elems())
        if (!std::binary_search(universe_->begin(), universe_->end(), e)) return false;
      return true;
    }
    case Kind::Path: {
      if (!v.is(Value::Kind::Path)) return false;
      const auto& p = v.as_path();
      if (p.top) return true;
      for (const auto& n : p.nodes)
        if (position(n) < 0) return false;
      return true;
    }
    case Kind::Node: return v.is(Value::Kind::Node) && position(v.as_node()) >= 0;
    case Kind::Product:
    case Kind::LexProduct: {
      if (!v.is(Value::Kind::Tuple) || v.elems().size() != parts_.size()) return false;
      for (size_t i = 0; i < parts_.size(); ++i)
        if (!parts_[i]->contains(v.elems()[i])) return false;
      return true;
    }
    case Kind::Hoare: {
      if (!v.is(Value::Kind::Antichain)) return false;
      for (const auto& e : v.elems())
        if (!parts_[0]->contains(e)) return false;
      return true;
    }
    case Kind::Reverse: return parts_[0]->contains(v);
  }
  return false;
}

void Domain::check_member(const Value& v, const std::string& where) const {
  if (!contains(v))
    fail(ErrorKind::TypeMismatch, where + ": value " + v.str() + " is not in domain " + str());
}

// --------------------------------------------------------------- bottom/top

Value Domain::bottom() const {
  switch (kind_) {
    case Kind::Bool: return Value::boolean(false);
    case Kind::Tropical: return Value::num(0);
    case Kind::Interval: return Value::num(lo_);
    case Kind::Set: return Value::set({});
    case Kind::Path: return Value::path(PathWord{});
    case Kind::Node: {
      require(total_, ErrorKind::NoLub, "discrete node domain has no bottom");
      return Value::node(order_.back());
    }
    case Kind::Product:
    case Kind::LexProduct: {
      ValueVec es;
      for (const auto& p : parts_) es.push_back(p->bottom());
      return Value::tuple(std::move(es));
    }
    case Kind::Hoare: return Value::antichain({});
    case Kind::Reverse: return parts_[0]->top();
  }
  fail(ErrorKind::Internal, "unreachable");
}

Value Domain::top() const {
  switch (kind_) {
    case Kind::Bool: return Value::boolean(true);
    case Kind::Tropical: return Value::num(Rat::infinity());
    case Kind::Interval: return Value::num(hi_);
    case Kind::Set:
      require(universe_.has_value(), ErrorKind::NoLub, "open set domain has no top");
      return Value::set(*universe_);
    case Kind::Path: return Value::path(PathWord{true, {}});
    case Kind::Node: {
      require(total_, ErrorKind::NoLub, "discrete node domain has no top");
      return Value::node(order_.front());
    }
    case Kind::Product:
    case Kind::LexProduct: {
      ValueVec es;
      for (const auto& p : parts_) es.push_back(p->top());
      return Value::tuple(std::move(es));
    }
    case Kind::Hoare: return Value::antichain(parts_[0]->maximal_elements());
    case Kind::Reverse: return parts_[0]->bottom();
  }
  fail(ErrorKind::Internal, "unreachable");
}

static ValueVec cross_tuples(const std::vector<ValueVec>& parts) {
  ValueVec out{Value::tuple({})};
  for (const auto& component : parts) {
    ValueVec next;
    for (const auto& prefix : out)
      for (const auto& e : component) {
        ValueVec es = prefix.elems();
        es.push_back(e);
        next.push_back(Value::tuple(std::move(es)));
      }
    out = std::move(next);
  }
  return out;
}

ValueVec Domain::maximal_elements() const {
  switch (kind_) {
    case Kind::Node:
      if (!total_) {
        ValueVec out;
        for (const auto& id : order_) out.push_back(Value::node(id));
        return out;
      }
      return {top()};
    case Kind::Product: {
      std::vector<ValueVec> parts;
      for (const auto& p : parts_) parts.push_back(p->maximal_elements());
      return cross_tuples(parts);
    }
    case Kind::LexProduct: {
      // maximal first components, each paired with the second top
      ValueVec firsts = parts_[0]->maximal_elements();
      ValueVec out;
      for (const auto& a : firsts) out.push_back(Value::tuple({a, parts_[1]->top()}));
      return out;
    }
    case Kind::Reverse: return parts_[0]->minimal_elements();
    default: return {top()};
  }
}

ValueVec Domain::minimal_elements() const {
  switch (kind_) {
    case Kind::Node:
      if (!total_) {
        ValueVec out;
        for (const auto& id : order_) out.push_back(Value::node(id));
        return out;
      }
      return {bottom()};
    case Kind::Product: {
      std::vector<ValueVec> parts;
      for (const auto& p : parts_) parts.push_back(p->minimal_elements());
      return cross_tuples(parts);
    }
    case Kind::LexProduct: {
      ValueVec firsts = parts_[0]->minimal_elements();
      ValueVec out;
      for (const auto& a : firsts) out.push_back(Value::tuple({a, parts_[1]->bottom()}));
      return out;
    }
    case Kind::Reverse: return parts_[0]->maximal_elements();
    default: return {bottom()};
  }
}

// -------------------------------------------------------------------- order

// Dictionary order on words: a word precedes its extensions, otherwise the
// first differing letter decides by alphabet position (front of the alphabet
// list is the top letter, so "smaller position" means greater).
static int path_cmp(const Domain& d, const PathWord& a, const PathWord& b,
                    const std::vector<std::string>& order);

bool Domain::leq(const Value& a, const Value& b) const {
  check_member(a, "leq");
  check_member(b, "leq");
  switch (kind_) {
    case Kind::Bool: return !a.as_bool() || b.as_bool();
    case Kind::Tropical:
    case Kind::Interval: return a.as_num() <= b.as_num();
    case Kind::Set: {
      const auto& ea = a.elems();
      const auto& eb = b.elems();
      return std::includes(eb.begin(), eb.end(), ea.begin(), ea.end());
    }
    case Kind::Path: return path_cmp(*this, a.as_path(), b.as_path(), order_) <= 0;
    case Kind::Node: {
      if (a == b) return true;
      if (!total_) return false;
      return position(a.as_node()) >= position(b.as_node());
    }
    case Kind::Product: {
      for (size_t i = 0; i < parts_.size(); ++i)
        if (!parts_[i]->leq(a.elems()[i], b.elems()[i])) return false;
      return true;
    }
    case Kind::LexProduct: {
      const auto& a1 = a.elems()[0];
      const auto& b1 = b.elems()[0];
      if (a1 == b1) return parts_[1]->leq(a.elems()[1], b.elems()[1]);
      return parts_[0]->leq(a1, b1);  // strictly below, since a1 != b1
    }
    case Kind::Hoare: {
      // Hoare (lower) order on down-closures, computed on antichains.
      for (const auto& x : a.elems()) {
        bool covered = false;
        for (const auto& y : b.elems())
          if (parts_[0]->leq(x, y)) {
            covered = true;
            break;
          }
        if (!covered) return false;
      }
      return true;
    }
    case Kind::Reverse: return parts_[0]->leq(b, a);
  }
  fail(ErrorKind::Internal, "unreachable");
}

static int path_cmp(const Domain& d, const PathWord& a, const PathWord& b,
                    const std::vector<std::string>& order) {
  (void)d;
  if (a.top || b.top) {
    if (a.top && b.top) return 0;
    return a.top ? 1 : -1;
  }
  auto pos = [&order](const std::string& id) {
    for (size_t i = 0; i < order.size(); ++i)
      if (order[i] == id) return i;
    return order.size();
  };
  size_t k = std::min(a.nodes.size(), b.nodes.size());
  for (size_t i = 0; i < k; ++i) {
    if (a.nodes[i] == b.nodes[i]) continue;
    // Front of the alphabet is greatest.
    return pos(a.nodes[i]) > pos(b.nodes[i]) ? -1 : 1;
  }
  if (a.nodes.size() == b.nodes.size()) return 0;
  return a.nodes.size() < b.nodes.size() ? -1 : 1;
}

// --------------------------------------------------------------- lattice ops

Value Domain::prune(ValueVec elems) const {
  const Domain& e = *parts_[0];
  ValueVec keep;
  for (size_t i = 0; i < elems.size(); ++i) {
    bool dominated = false;
    for (size_t j = 0; j < elems.size() && !dominated; ++j) {
      if (i == j) continue;
      if (!e.leq(elems[i], elems[j])) continue;
      // Strictly below, or a duplicate we keep only once (the later copy wins).
      if (!e.leq(elems[j], elems[i]) || j < i) dominated = true;
    }
    if (!dominated) keep.push_back(elems[i]);
  }
  return Value::antichain(std::move(keep));
}

Value Domain::join(const Value& a, const Value& b) const {
  check_member(a, "join");
  check_member(b, "join");
  switch (kind_) {
    case Kind::Bool: return Value::boolean(a.as_bool() || b.as_bool());
    case Kind::Tropical:
    case Kind::Interval: return Value::num(rat_max(a.as_num(), b.as_num()));
    case Kind::Set: {
      ValueVec u = a.elems();
      u.insert(u.end(), b.elems().begin(), b.elems().end());
      return Value::set(std::move(u));
    }
    case Kind::Path: return path_cmp(*this, a.as_path(), b.as_path(), order_) >= 0 ? a : b;
    case Kind::Node: {
      if (a == b) return a;
      require(total_, ErrorKind::NoLub,
              "no lub of " + a.str() + " and " + b.str() + " in a discrete node domain");
      return position(a.as_node()) < position(b.as_node()) ? a : b;
    }
    case Kind::Product: {
      ValueVec es;
      for (size_t i = 0; i < parts_.size(); ++i)
        es.push_back(parts_[i]->join(a.elems()[i], b.elems()[i]));
      return Value::tuple(std::move(es));
    }
    case Kind::LexProduct: {
      if (leq(a, b)) return b;
      if (leq(b, a)) return a;
      const auto& a1 = a.elems()[0];
      const auto& b1 = b.elems()[0];
      if (a1 == b1) return Value::tuple({a1, parts_[1]->join(a.elems()[1], b.elems()[1])});
      Value j1 = parts_[0]->join(a1, b1);
      if (j1 == a1) return a;
      if (j1 == b1) return b;
      return Value::tuple({j1, parts_[1]->bottom()});
    }
    case Kind::Hoare: {
      ValueVec u = a.elems();
      u.insert(u.end(), b.elems().begin(), b.elems().end());
      return prune(std::move(u));
    }
    case Kind::Reverse: return parts_[0]->meet(a, b);
  }
  fail(ErrorKind::Internal, "unreachable");
}

Value Domain::meet(const Value& a, const Value& b) const {
  check_member(a, "meet");
  check_member(b, "meet");
  switch (kind_) {
    case Kind::Bool: return Value::boolean(a.as_bool() && b.as_bool());
    case Kind::Tropical:
    case Kind::Interval: return Value::num(rat_min(a.as_num(), b.as_num()));
    case Kind::Set: {
      ValueVec out;
      std::set_intersection(a.elems().begin(), a.elems().end(), b.elems().begin(),
                            b.elems().end(), std::back_inserter(out));
      return Value::set(std::move(out));
    }
    case Kind::Path: return path_cmp(*this, a.as_path(), b.as_path(), order_) <= 0 ? a : b;
    case Kind::Node: {
      if (a == b) return a;
      require(total_, ErrorKind::NoLub,
              "no glb of " + a.str() + " and " + b.str() + " in a discrete node domain");
      return position(a.as_node()) > position(b.as_node()) ? a : b;
    }
    case Kind::Product: {
      ValueVec es;
      for (size_t i = 0; i < parts_.size(); ++i)
        es.push_back(parts_[i]->meet(a.elems()[i], b.elems()[i]));
      return Value::tuple(std::move(es));
    }
    case Kind::LexProduct: {
      if (leq(a, b)) return a;
      if (leq(b, a)) return b;
      const auto& a1 = a.elems()[0];
      const auto& b1 = b.elems()[0];
      if (a1 == b1) return Value::tuple({a1, parts_[1]->meet(a.elems()[1], b.elems()[1])});
      Value m1 = parts_[0]->meet(a1, b1);
      if (m1 == a1) return a;
      if (m1 == b1) return b;
      return Value::tuple({m1, parts_[1]->top()});
    }
    case Kind::Hoare: {
      // Down-closure intersection: maximal glbs of cross pairs.
      ValueVec out;
      for (const auto& x : a.elems())
        for (const auto& y : b.elems()) {
          try {
            out.push_back(parts_[0]->meet(x, y));
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoLub) throw;  // pairs without a glb drop out
          }
        }
      return prune(std::move(out));
    }
    case Kind::Reverse: return parts_[0]->join(a, b);
  }
  fail(ErrorKind::Internal, "unreachable");
}

// ------------------------------------------------------------------ semiring

bool Domain::has_semiring() const {
  switch (kind_) {
    case Kind::Bool:
    case Kind::Tropical:
    case Kind::Interval:
    case Kind::Hoare: return true;
    case Kind::Set: return universe_.has_value();
    case Kind::Path:
    case Kind::Node:
    case Kind::LexProduct: return false;
    case Kind::Product: {
      for (const auto& p : parts_)
        if (!p->has_semiring()) return false;
      return true;
    }
    case Kind::Reverse: {
      const Domain& b = *parts_[0];
      if (b.kind() == Kind::Set) return b.universe_.has_value();
      return b.has_semiring();
    }
  }
  return false;
}

Value Domain::semiring_plus(std::span<const Value> vs) const {
  require(has_semiring(), ErrorKind::NotASemiring, "domain has no semiring: " + str());
  Value acc = bottom();
  for (const auto& v : vs) acc = join(acc, v);
  return acc;
}

Value Domain::semiring_times(const Value& a, const Value& b) const {
  require(has_semiring(), ErrorKind::NotASemiring, "domain has no semiring: " + str());
  // For the reversed tropical semiring, combine is arithmetic +; every other
  // built-in semiring is a bounded distributive lattice, where combine = glb.
  if (kind_ == Kind::Reverse && parts_[0]->kind() == Kind::Tropical) {
    check_member(a, "times");
    check_member(b, "times");
    return Value::num(a.as_num() + b.as_num());
  }
  if (kind_ == Kind::Product) {
    check_member(a, "times");
    check_member(b, "times");
    ValueVec es;
    for (size_t i = 0; i < parts_.size(); ++i)
      es.push_back(parts_[i]->semiring_times(a.elems()[i], b.elems()[i]));
    return Value::tuple(std::move(es));
  }
  return meet(a, b);
}

// ------------------------------------------------------------- canonical form

Value Domain::canonicalize(const Value& v) const {
  switch (kind_) {
    case Kind::Hoare: {
      ValueVec es;
      for (const auto& e : v.elems()) es.push_back(parts_[0]->canonicalize(e));
      return prune(std::move(es));
    }
    case Kind::Product:
    case Kind::LexProduct: {
      ValueVec es;
      for (size_t i = 0; i < parts_.size(); ++i) es.push_back(parts_[i]->canonicalize(v.elems()[i]));
      return Value::tuple(std::move(es));
    }
    case Kind::Reverse: return parts_[0]->canonicalize(v);
    default: return v;
  }
}

// ------------------------------------------------------------------ sampling

Value Domain::sample(Rng& rng) const {
  auto pick = [&rng](size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng); };
  switch (kind_) {
    case Kind::Bool: return Value::boolean(pick(2) == 1);
    case Kind::Tropical: {
      size_t r = pick(12);
      if (r == 11) return Value::num(Rat::infinity());
      if (r == 10) return Value::num(Rat(static_cast<long>(pick(9) + 1), 2));
      return Value::num(static_cast<long>(r));
    }
    case Kind::Interval: {
      // lo + k/8 * (hi - lo) clamped into the interval
      if (hi_.is_inf()) return pick(2) ? Value::num(Rat::infinity()) : Value::num(lo_);
      long k = static_cast<long>(pick(9));
      Rat span = hi_ + lo_ * Rat(-1);
      return Value::num(lo_ + span * Rat(k, 8));
    }
    case Kind::Set: {
      ValueVec pool;
      if (universe_)
        pool = *universe_;
      else
        for (long i = 0; i < 4; ++i) pool.push_back(Value::num(i));
      ValueVec out;
      for (const auto& e : pool)
        if (pick(2)) out.push_back(e);
      return Value::set(std::move(out));
    }
    case Kind::Path: {
      size_t r = pick(10);
      if (r == 9) return Value::path(PathWord{true, {}});
      PathWord p;
      for (size_t i = 0; i < r % 4; ++i) p.nodes.push_back(order_[pick(order_.size())]);
      return Value::path(std::move(p));
    }
    case Kind::Node: return Value::node(order_[pick(order_.size())]);
    case Kind::Product:
    case Kind::LexProduct: {
      ValueVec es;
      for (const auto& p : parts_) es.push_back(p->sample(rng));
      return Value::tuple(std::move(es));
    }
    case Kind::Hoare: {
      ValueVec es;
      size_t n = pick(4);
      for (size_t i = 0; i < n; ++i) es.push_back(parts_[0]->sample(rng));
      return prune(std::move(es));
    }
    case Kind::Reverse: return parts_[0]->sample(rng);
  }
  fail(ErrorKind::Internal, "unreachable");
}

std::optional<ValueVec> Domain::enumerate(size_t limit) const {
  switch (kind_) {
    case Kind::Bool: return ValueVec{Value::boolean(false), Value::boolean(true)};
    case Kind::Node: {
      ValueVec out;
      for (const auto& id : order_) out.push_back(Value::node(id));
      return out;
    }
    case Kind::Set: {
      if (!universe_ || universe_->size() > 12) return std::nullopt;
      size_t n = universe_->size();
      if ((size_t{1} << n) > limit) return std::nullopt;
      ValueVec out;
      for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
        ValueVec subset;
        for (size_t i = 0; i < n; ++i)
          if (mask & (size_t{1} << i)) subset.push_back((*universe_)[i]);
        out.push_back(Value::set(std::move(subset)));
      }
      return out;
    }
    case Kind::Product:
    case Kind::LexProduct: {
      std::vector<ValueVec> all;
      size_t total = 1;
      for (const auto& p : parts_) {
        auto e = p->enumerate(limit);
        if (!e) return std::nullopt;
        total *= e->size();
        if (total > limit) return std::nullopt;
        all.push_back(std::move(*e));
      }
      ValueVec out{Value::tuple({})};
      for (const auto& component : all) {
        ValueVec next;
        for (const auto& prefix : out)
          for (const auto& e : component) {
            ValueVec es = prefix.elems();
            es.push_back(e);
            next.push_back(Value::tuple(std::move(es)));
          }
        out = std::move(next);
      }
      return out;
    }
    case Kind::Hoare: {
      auto elems = parts_[0]->enumerate(16);
      if (!elems || elems->size() > 10) return std::nullopt;
      size_t n = elems->size();
      ValueVec out;
      for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
        ValueVec subset;
        for (size_t i = 0; i < n; ++i)
          if (mask & (size_t{1} << i)) subset.push_back((*elems)[i]);
        Value cand = Value::antichain(subset);
        if (prune(subset) == cand) out.push_back(cand);
        if (out.size() > limit) return std::nullopt;
      }
      return out;
    }
    case Kind::Reverse: return parts_[0]->enumerate(limit);
    default: return std::nullopt;
  }
}

std::optional<size_t> Domain::chain_height() const {
  switch (kind_) {
    case Kind::Bool: return 2;
    case Kind::Node: return total_ ? std::optional<size_t>(order_.size()) : 2;
    case Kind::Set:
      if (universe_) return universe_->size() + 1;
      return std::nullopt;
    case Kind::Product:
    case Kind::LexProduct: {
      size_t h = kind_ == Kind::Product ? 1 : 1;
      for (const auto& p : parts_) {
        auto ph = p->chain_height();
        if (!ph) return std::nullopt;
        if (kind_ == Kind::Product)
          h += *ph - 1;
        else
          h *= *ph;
      }
      return h;
    }
    case Kind::Hoare: {
      auto e = parts_[0]->enumerate(64);
      if (!e) return std::nullopt;
      return e->size() + 1;
    }
    case Kind::Reverse: return parts_[0]->chain_height();
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------- json

bool Domain::same(const Domain& o) const { return to_json() == o.to_json(); }

json Domain::to_json() const {
  switch (kind_) {
    case Kind::Bool: return json{{"kind", "bool"}};
    case Kind::Tropical: return json{{"kind", "tropical"}};
    case Kind::Interval: return json{{"kind", "interval"}, {"min", lo_.str()}, {"max", hi_.str()}};
    case Kind::Set: {
      json j{{"kind", "set"}};
      if (universe_) {
        json u = json::array();
        for (const auto& e : *universe_) u.push_back(e.to_json());
        j["universe"] = u;
      }
      return j;
    }
    case Kind::Path: return json{{"kind", "path"}, {"order", order_}};
    case Kind::Node: return json{{"kind", "node"}, {total_ ? "order" : "ids", order_}};
    case Kind::Product:
    case Kind::LexProduct: {
      json arr = json::array();
      for (const auto& p : parts_) arr.push_back(p->to_json());
      return json{{"kind", kind_ == Kind::Product ? "product" : "lexproduct"}, {"of", arr}};
    }
    case Kind::Hoare: return json{{"kind", "hoare"}, {"of", parts_[0]->to_json()}};
    case Kind::Reverse: return json{{"kind", "reverse"}, {"of", parts_[0]->to_json()}};
  }
  fail(ErrorKind::Internal, "unreachable");
}

DomainPtr Domain::from_json(const json& j) {
  require(j.is_object() && j.contains("kind"), ErrorKind::Schema,
          "domain descriptor needs a \"kind\": " + j.dump());
  std::string k = j.at("kind").get<std::string>();
  if (k == "bool") return boolean();
  if (k == "tropical") return tropical();
  if (k == "interval")
    return interval(Rat::parse(j.at("min").get<std::string>()),
                    Rat::parse(j.at("max").get<std::string>()));
  if (k == "set") {
    std::optional<ValueVec> u;
    if (j.contains("universe")) {
      ValueVec us;
      for (const auto& e : j.at("universe")) us.push_back(Value::from_json(e));
      u = std::move(us);
    }
    return finite_set(std::move(u));
  }
  if (k == "path") return path(j.at("order").get<std::vector<std::string>>());
  if (k == "node") {
    if (j.contains("order")) return node_ids(j.at("order").get<std::vector<std::string>>(), true);
    return node_ids(j.at("ids").get<std::vector<std::string>>(), false);
  }
  if (k == "product" || k == "lexproduct") {
    std::vector<DomainPtr> parts;
    for (const auto& p : j.at("of")) parts.push_back(from_json(p));
    if (k == "product") return product(std::move(parts));
    require(parts.size() == 2, ErrorKind::Schema, "lexproduct takes exactly two components");
    return lexproduct(parts[0], parts[1]);
  }
  if (k == "hoare") return hoare(from_json(j.at("of")));
  if (k == "reverse") return reverse(from_json(j.at("of")));
  fail(ErrorKind::Schema, "unknown domain kind: " + k);
}

}  // namespace smuc
