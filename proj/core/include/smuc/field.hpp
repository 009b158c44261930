#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "smuc/domain.hpp"

namespace smuc {

// Total map node -> value.
using NodeValuation = std::map<std::string, Value>;

using Edge = std::pair<std::string, std::string>;

class Field;

// Label reads against something other than the global interpretation (the
// distributed engine substitutes each fragment's partial view). Returns null
// when the value is not available.
using LabelReader = std::function<const Value*(const std::string& label, const std::string& node)>;

// Evaluation context handed to capabilities; grd/cgr-style capabilities read
// other node labels at the edge endpoints through it.
struct CapCtx {
  const Field& field;
  const std::string& src;
  const std::string& dst;
  const LabelReader* reader = nullptr;

  const Value& read_label(const std::string& label, const std::string& node) const;
};

// A resolved edge capability: a total value transformer over the label's
// domain, plus the set of node labels it consults (needed by the distributed
// engine to gate evaluation).
struct Capability {
  std::string display;
  std::vector<std::string> reads;
  std::function<Value(const CapCtx&, const Value&)> apply;
};

struct CapabilityRef {
  std::string name;
  std::vector<json> args;

  json to_json() const;
  static CapabilityRef from_json(const json& j);
  std::string str() const { return to_json().dump(); }
};

using CapabilityBuilder = std::function<Capability(const std::vector<json>& args)>;

// Installs a parameterized capability into the global registry.
void register_capability(const std::string& name, CapabilityBuilder builder);
bool capability_registered(const std::string& name);
Capability resolve_capability(const CapabilityRef& ref);

// The graph-shaped field: nodes in document order (which doubles as the
// declared total node order), directed edges, per-label node valuations and
// per-label edge capabilities. Immutable during formula evaluation; the
// program stepper copies and swaps interpretations.
class Field {
public:
  struct NodeLabel {
    DomainPtr domain;
    NodeValuation values;
  };
  struct EdgeLabel {
    std::map<Edge, CapabilityRef> caps;
  };

  Field() = default;
  Field(std::vector<std::string> nodes, std::vector<Edge> edges);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool has_node(const std::string& id) const { return node_pos_.count(id) > 0; }
  size_t node_position(const std::string& id) const;
  bool has_edge(const Edge& e) const;

  const std::vector<std::string>& out_neighbors(const std::string& n) const;
  const std::vector<std::string>& in_neighbors(const std::string& n) const;
  // In/out neighborhood, excluding n itself unless self-looped.
  std::vector<std::string> neighbors(const std::string& n) const;

  // Node labels.
  void declare_node_label(const std::string& name, DomainPtr domain, NodeValuation values);
  void assign_node_label(const std::string& name, DomainPtr domain, NodeValuation values);
  void remove_node_label(const std::string& name);  // free
  bool has_node_label(const std::string& name) const;
  const NodeLabel& node_label(const std::string& name) const;
  const Value& label_value(const std::string& name, const std::string& node) const;
  std::vector<std::string> node_label_names() const;

  // Edge labels.
  void declare_edge_label(const std::string& name, std::map<Edge, CapabilityRef> caps);
  bool has_edge_label(const std::string& name) const;
  const EdgeLabel& edge_label(const std::string& name) const;
  // Applies the label's capability on the given edge; the "id" label is the
  // implicit identity capability on every edge.
  Value apply_capability(const std::string& label, const Edge& e, const Value& v,
                         const LabelReader* reader = nullptr) const;
  std::vector<std::string> edge_label_names() const;

  // The total node order backing node-valued tie-breaks: document order,
  // first node greatest.
  DomainPtr node_order_domain() const;

  json to_json() const;
  static Field from_json(const json& j);
  std::string to_dot(const std::vector<std::string>& labels = {}) const;

private:
  std::vector<std::string> nodes_;
  std::map<std::string, size_t> node_pos_;
  std::vector<Edge> edges_;
  std::map<std::string, std::vector<std::string>> out_, in_;
  std::map<std::string, NodeLabel> node_labels_;
  std::map<std::string, EdgeLabel> edge_labels_;

  void validate_label(const std::string& name, const NodeLabel& l) const;
};

Field load_field(const json& doc);
json dump_field(const Field& f);

// Pointwise order test between two valuations over the same node set.
bool lift_order(const NodeValuation& f1, const NodeValuation& f2, const Domain& d);
NodeValuation lifted_bottom(const std::vector<std::string>& nodes, const Domain& d);
NodeValuation lifted_top(const std::vector<std::string>& nodes, const Domain& d);

// Samples comparable pairs a <= b and checks cap(a) <= cap(b); returns the
// offending pair if one is found.
struct MonotonicityReport {
  bool monotone = true;
  std::string detail;
};
MonotonicityReport probe_capability_monotone(const Field& f, const std::string& edge_label,
                                             const Edge& e, const Domain& d, int samples,
                                             Rng& rng);

}  // namespace smuc
