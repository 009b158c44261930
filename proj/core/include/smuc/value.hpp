#pragma once

#include <json.hpp>

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "smuc/rational.hpp"

namespace smuc {

using json = nlohmann::json;

class Value;
using ValueVec = std::vector<Value>;

// A path: a finite word of node ids, or the distinguished top word that
// dominates every finite word.
struct PathWord {
  bool top = false;
  std::vector<std::string> nodes;

  bool operator==(const PathWord& o) const { return top == o.top && nodes == o.nodes; }
};

// `any` is the unit and `none` the absorbing element of the agreement
// combinator `eq`; they are transient values, not members of any field domain.
enum class EqAtom { Any, None };

// Tagged element of a field domain: truth value, exact extended rational,
// node id, path, tuple, finite set, or antichain (the Hoare power domain
// representation by maximal elements).
class Value {
public:
  enum class Kind { Bool, Num, Node, Path, Tuple, Set, Antichain, Eq };

  Value() : rep_(false) {}
  static Value boolean(bool b);
  static Value num(Rat q);
  static Value num(long n, long d = 1) { return num(Rat(n, d)); }
  static Value node(std::string id);
  static Value path(PathWord p);
  static Value tuple(ValueVec elems);
  // Sorted + deduplicated on construction (structural order).
  static Value set(ValueVec elems);
  // Sorted + deduplicated only; domain-aware pruning lives in Domain.
  static Value antichain(ValueVec elems);
  static Value eq_atom(EqAtom a);

  Kind kind() const;
  bool as_bool() const;
  const Rat& as_num() const;
  const std::string& as_node() const;
  const PathWord& as_path() const;
  const ValueVec& elems() const;  // tuple/set/antichain
  EqAtom as_eq() const;

  bool is(Kind k) const { return kind() == k; }

  bool operator==(const Value& o) const;
  bool operator!=(const Value& o) const { return !(*this == o); }
  // Structural total order; used for canonical container layout and map keys,
  // unrelated to any domain order.
  bool operator<(const Value& o) const;

  std::string str() const;
  json to_json() const;
  static Value from_json(const json& j);

private:
  struct Boxed {
    Value::Kind kind;
    ValueVec elems;
  };
  using Rep = std::variant<bool, Rat, std::string, PathWord, std::shared_ptr<const Boxed>, EqAtom>;
  Rep rep_;

  const Boxed& boxed() const;
};

// Three-way structural comparison.
int cmp(const Value& a, const Value& b);

}  // namespace smuc
