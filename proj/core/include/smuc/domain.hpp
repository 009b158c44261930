#pragma once

#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "smuc/value.hpp"

namespace smuc {

class Domain;
using DomainPtr = std::shared_ptr<const Domain>;
using Rng = std::mt19937_64;

// A field domain descriptor: carrier kind, partial order, bottom, top, and
// (where available) the semiring choose/combine pair. Descriptors are
// immutable and shared.
//
// Built-in kinds:
//   bool                    <{false,true}, implies, false, true>
//   tropical                <Q+ u {inf}, <=, 0, inf>
//   interval(lo,hi)         <[lo..hi], <=, lo, hi>
//   set(universe?)          <2^U, subset, {}, U>; universe may be left open
//   path(alphabet order)    words over node ids plus a dominating top word
//   node(order|ids)         node ids; "order" lists ids from top down,
//                           "ids" makes them pairwise incomparable
//   product(parts)          componentwise order
//   lexproduct(a,b)         first component decides, ties fall to the second
//   hoare(elem)             downward-closed sets of elem, as antichains of
//                           maximal elements, ordered by inclusion
//   reverse(of)             the opposite order
class Domain : public std::enable_shared_from_this<Domain> {
public:
  enum class Kind { Bool, Tropical, Interval, Set, Path, Node, Product, LexProduct, Hoare, Reverse };

  static DomainPtr boolean();
  static DomainPtr tropical();
  static DomainPtr interval(Rat lo, Rat hi);
  static DomainPtr finite_set(std::optional<ValueVec> universe);
  static DomainPtr path(std::vector<std::string> alphabet);
  static DomainPtr node_ids(std::vector<std::string> ids, bool totally_ordered);
  static DomainPtr product(std::vector<DomainPtr> parts);
  static DomainPtr lexproduct(DomainPtr first, DomainPtr second);
  static DomainPtr hoare(DomainPtr elem);
  static DomainPtr reverse(DomainPtr of);

  Kind kind() const { return kind_; }
  const std::vector<DomainPtr>& parts() const { return parts_; }

  bool contains(const Value& v) const;
  void check_member(const Value& v, const std::string& where) const;

  Value bottom() const;
  Value top() const;
  // The maximal/minimal elements of the carrier; a singleton when top/bottom
  // exist, the whole id set for discrete node domains, crosses for products.
  ValueVec maximal_elements() const;
  ValueVec minimal_elements() const;

  bool leq(const Value& a, const Value& b) const;
  Value join(const Value& a, const Value& b) const;
  Value meet(const Value& a, const Value& b) const;

  bool has_semiring() const;
  // n-ary idempotent choose; empty input yields bottom.
  Value semiring_plus(std::span<const Value> vs) const;
  Value semiring_times(const Value& a, const Value& b) const;

  // Canonical representative (antichains pruned and sorted, recursively).
  Value canonicalize(const Value& v) const;

  // Uniform-ish random member, for law checks and monotonicity probes.
  Value sample(Rng& rng) const;
  // Every carrier element for small finite kinds; nullopt when the carrier
  // is infinite or too large to enumerate.
  std::optional<ValueVec> enumerate(size_t limit = 4096) const;
  // Upper bound on strictly increasing chains, when one is known.
  std::optional<size_t> chain_height() const;

  bool same(const Domain& o) const;

  json to_json() const;
  static DomainPtr from_json(const json& j);
  std::string str() const { return to_json().dump(); }

private:
  explicit Domain(Kind k) : kind_(k) {}

  Kind kind_;
  std::vector<DomainPtr> parts_;
  std::optional<ValueVec> universe_;          // set
  std::vector<std::string> order_;            // path alphabet / node ids
  bool total_ = false;                        // node
  Rat lo_, hi_;                               // interval

  const Domain& base() const;  // strips one reverse
  int position(const std::string& id) const;
  Value prune(ValueVec elems) const;  // hoare
};

DomainPtr make_product(DomainPtr a, DomainPtr b);
DomainPtr make_lexproduct(DomainPtr a, DomainPtr b);
DomainPtr make_hoare(DomainPtr elem);

}  // namespace smuc
