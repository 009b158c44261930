#include "smuc/value.hpp"

#include <algorithm>
#include <sstream>

#include "smuc/errors.hpp"

namespace smuc {

Value Value::boolean(bool b) {
  Value v;
  v.rep_ = b;
  return v;
}

Value Value::num(Rat q) {
  Value v;
  v.rep_ = std::move(q);
  return v;
}

Value Value::node(std::string id) {
  Value v;
  v.rep_ = std::move(id);
  return v;
}

Value Value::path(PathWord p) {
  Value v;
  v.rep_ = std::move(p);
  return v;
}

Value Value::tuple(ValueVec elems) {
  Value v;
  v.rep_ = std::make_shared<const Boxed>(Boxed{Kind::Tuple, std::move(elems)});
  return v;
}

Value Value::set(ValueVec elems) {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  Value v;
  v.rep_ = std::make_shared<const Boxed>(Boxed{Kind::Set, std::move(elems)});
  return v;
}

Value Value::antichain(ValueVec elems) {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  Value v;
  v.rep_ = std::make_shared<const Boxed>(Boxed{Kind::Antichain, std::move(elems)});
  return v;
}

Value Value::eq_atom(EqAtom a) {
  Value v;
  v.rep_ = a;
  return v;
}

Value::Kind Value::kind() const {
  switch (rep_.index()) {
    case 0: return Kind::Bool;
    case 1: return Kind::Num;
    case 2: return Kind::Node;
    case 3: return Kind::Path;
    case 4: return boxed().kind;
    default: return Kind::Eq;
  }
}

const Value::Boxed& Value::boxed() const { return *std::get<std::shared_ptr<const Boxed>>(rep_); }

bool Value::as_bool() const {
  if (!is(Kind::Bool)) fail(ErrorKind::TypeMismatch, "expected a truth value, got " + str());
  return std::get<bool>(rep_);
}

const Rat& Value::as_num() const {
  if (!is(Kind::Num)) fail(ErrorKind::TypeMismatch, "expected a number, got " + str());
  return std::get<Rat>(rep_);
}

const std::string& Value::as_node() const {
  if (!is(Kind::Node)) fail(ErrorKind::TypeMismatch, "expected a node id, got " + str());
  return std::get<std::string>(rep_);
}

const PathWord& Value::as_path() const {
  if (!is(Kind::Path)) fail(ErrorKind::TypeMismatch, "expected a path, got " + str());
  return std::get<PathWord>(rep_);
}

const ValueVec& Value::elems() const {
  if (rep_.index() != 4)
    fail(ErrorKind::TypeMismatch, "expected tuple/set/antichain, got " + str());
  return boxed().elems;
}

EqAtom Value::as_eq() const {
  if (!is(Kind::Eq)) fail(ErrorKind::TypeMismatch, "expected an agreement atom, got " + str());
  return std::get<EqAtom>(rep_);
}

int cmp(const Value& a, const Value& b) {
  auto ka = static_cast<int>(a.kind());
  auto kb = static_cast<int>(b.kind());
  if (ka != kb) return ka < kb ? -1 : 1;
  switch (a.kind()) {
    case Value::Kind::Bool: {
      int x = a.as_bool() ? 1 : 0, y = b.as_bool() ? 1 : 0;
      return x == y ? 0 : (x < y ? -1 : 1);
    }
    case Value::Kind::Num: {
      if (a.as_num() == b.as_num()) return 0;
      return a.as_num() < b.as_num() ? -1 : 1;
    }
    case Value::Kind::Node:
      return a.as_node().compare(b.as_node()) < 0 ? -1 : (a.as_node() == b.as_node() ? 0 : 1);
    case Value::Kind::Path: {
      const auto& pa = a.as_path();
      const auto& pb = b.as_path();
      if (pa.top != pb.top) return pa.top ? 1 : -1;
      if (pa.nodes == pb.nodes) return 0;
      return pa.nodes < pb.nodes ? -1 : 1;
    }
    case Value::Kind::Eq: {
      int x = static_cast<int>(a.as_eq()), y = static_cast<int>(b.as_eq());
      return x == y ? 0 : (x < y ? -1 : 1);
    }
    default: {
      const auto& ea = a.elems();
      const auto& eb = b.elems();
      for (size_t i = 0; i < std::min(ea.size(), eb.size()); ++i) {
        int c = cmp(ea[i], eb[i]);
        if (c != 0) return c;
      }
      if (ea.size() == eb.size()) return 0;
      return ea.size() < eb.size() ? -1 : 1;
    }
  }
}

bool Value::operator==(const Value& o) const { return cmp(*this, o) == 0; }
bool Value::operator<(const Value& o) const { return cmp(*this, o) < 0; }

std::string Value::str() const {
  switch (kind()) {
    case Kind::Bool: return as_bool() ? "true" : "false";
    case Kind::Num: {
      const Rat& q = as_num();
      if (q.is_integer()) return std::to_string(q.to_long());
      return q.str();
    }
    case Kind::Node: return as_node();
    case Kind::Path: {
      const auto& p = as_path();
      if (p.top) return "<top-path>";
      if (p.nodes.empty()) return "eps";
      std::string s;
      for (size_t i = 0; i < p.nodes.size(); ++i) {
        if (i) s += ".";
        s += p.nodes[i];
      }
      return s;
    }
    case Kind::Eq: return as_eq() == EqAtom::Any ? "any" : "none";
    default: {
      std::string open = kind() == Kind::Tuple ? "(" : "{";
      std::string close = kind() == Kind::Tuple ? ")" : "}";
      std::ostringstream out;
      out << open;
      const auto& es = elems();
      for (size_t i = 0; i < es.size(); ++i) {
        if (i) out << ",";
        out << es[i].str();
      }
      out << close;
      return out.str();
    }
  }
}

json Value::to_json() const {
  switch (kind()) {
    case Kind::Bool: return json{{"bool", as_bool()}};
    case Kind::Num: return json{{"num", as_num().str()}};
    case Kind::Node: return json{{"node", as_node()}};
    case Kind::Path: {
      const auto& p = as_path();
      if (p.top) return json{{"path", "top"}};
      return json{{"path", p.nodes}};
    }
    case Kind::Eq: return json{{"eq", as_eq() == EqAtom::Any ? "any" : "none"}};
    case Kind::Tuple:
    case Kind::Set:
    case Kind::Antichain: {
      json arr = json::array();
      for (const auto& e : elems()) arr.push_back(e.to_json());
      const char* key = kind() == Kind::Tuple ? "tuple" : (kind() == Kind::Set ? "set" : "antichain");
      return json{{key, arr}};
    }
  }
  fail(ErrorKind::Internal, "unreachable value kind");
}

static ValueVec values_from_json(const json& arr) {
  require(arr.is_array(), ErrorKind::Schema, "expected an array of values");
  ValueVec out;
  for (const auto& e : arr) out.push_back(Value::from_json(e));
  return out;
}

Value Value::from_json(const json& j) {
  require(j.is_object() && j.size() == 1, ErrorKind::Schema,
          "value must be a single-key tagged object, got " + j.dump());
  const std::string& key = j.begin().key();
  const json& body = j.begin().value();
  if (key == "bool") {
    require(body.is_boolean(), ErrorKind::Schema, "bool value must be a JSON boolean");
    return boolean(body.get<bool>());
  }
  if (key == "num") {
    require(body.is_string() || body.is_number_integer(), ErrorKind::Schema,
            "num value must be a string like \"3/1\" or \"inf\"");
    if (body.is_number_integer()) return num(Rat(body.get<long>()));
    return num(Rat::parse(body.get<std::string>()));
  }
  if (key == "node") {
    require(body.is_string(), ErrorKind::Schema, "node value must be a string id");
    return node(body.get<std::string>());
  }
  if (key == "path") {
    if (body.is_string() && body.get<std::string>() == "top") return path(PathWord{true, {}});
    require(body.is_array(), ErrorKind::Schema, "path value must be an id array or \"top\"");
    PathWord p;
    for (const auto& e : body) p.nodes.push_back(e.get<std::string>());
    return path(std::move(p));
  }
  if (key == "eq") {
    std::string s = body.get<std::string>();
    require(s == "any" || s == "none", ErrorKind::Schema, "eq atom must be any/none");
    return eq_atom(s == "any" ? EqAtom::Any : EqAtom::None);
  }
  if (key == "tuple") return tuple(values_from_json(body));
  if (key == "set") return set(values_from_json(body));
  if (key == "antichain") return antichain(values_from_json(body));
  fail(ErrorKind::Schema, "unknown value tag: " + key);
}

}  // namespace smuc
