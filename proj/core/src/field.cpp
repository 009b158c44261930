#include "smuc/field.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "smuc/errors.hpp"

namespace smuc {

// ------------------------------------------------------------- capabilities

json CapabilityRef::to_json() const {
  json j{{"cap", name}};
  if (!args.empty()) j["args"] = args;
  return j;
}

CapabilityRef CapabilityRef::from_json(const json& j) {
  require(j.is_object() && j.contains("cap"), ErrorKind::Schema,
          "capability ref needs {\"cap\": name}: " + j.dump());
  CapabilityRef r;
  r.name = j.at("cap").get<std::string>();
  if (j.contains("args"))
    for (const auto& a : j.at("args")) r.args.push_back(a);
  return r;
}

namespace {

std::map<std::string, CapabilityBuilder>& registry() {
  static std::map<std::string, CapabilityBuilder> reg;
  return reg;
}

Rat arg_num(const json& a) {
  if (a.is_string()) return Rat::parse(a.get<std::string>());
  if (a.is_number_integer()) return Rat(a.get<long>());
  if (a.is_object() && a.contains("num")) return Value::from_json(a).as_num();
  fail(ErrorKind::Schema, "expected a numeric capability argument, got " + a.dump());
}

std::string arg_label(const json& a) {
  require(a.is_string(), ErrorKind::Schema, "expected a label-name argument, got " + a.dump());
  return a.get<std::string>();
}

// Rebuilds a tuple with one component replaced.
Value with_component(const Value& t, size_t idx, Value v) {
  ValueVec es = t.elems();
  es[idx] = std::move(v);
  return Value::tuple(std::move(es));
}

size_t unique_component(const Value& t, Value::Kind k, const char* what) {
  require(t.is(Value::Kind::Tuple), ErrorKind::TypeMismatch,
          std::string(what) + " expects tuples, got " + t.str());
  size_t found = t.elems().size();
  for (size_t i = 0; i < t.elems().size(); ++i)
    if (t.elems()[i].is(k)) {
      require(found == t.elems().size(), ErrorKind::TypeMismatch,
              std::string(what) + ": ambiguous component in " + t.str());
      found = i;
    }
  require(found < t.elems().size(), ErrorKind::TypeMismatch,
          std::string(what) + ": no matching component in " + t.str());
  return found;
}

Value map_collection(const Value& c, const std::function<Value(const Value&)>& f) {
  ValueVec out;
  for (const auto& e : c.elems()) out.push_back(f(e));
  if (c.is(Value::Kind::Set)) return Value::set(std::move(out));
  require(c.is(Value::Kind::Antichain), ErrorKind::TypeMismatch,
          "expected a set or antichain, got " + c.str());
  return Value::antichain(std::move(out));
}

void register_builtin_capabilities() {
  register_capability("id", [](const std::vector<json>&) {
    return Capability{"id", {}, [](const CapCtx&, const Value& v) { return v; }};
  });

  register_capability("const", [](const std::vector<json>& args) {
    require(args.size() == 1, ErrorKind::Schema, "const(v) takes one value");
    Value v = Value::from_json(args[0]);
    return Capability{"const(" + v.str() + ")", {}, [v](const CapCtx&, const Value&) { return v; }};
  });

  register_capability("add", [](const std::vector<json>& args) {
    require(args.size() == 1, ErrorKind::Schema, "add(c) takes one number");
    Rat c = arg_num(args[0]);
    return Capability{"add(" + c.str() + ")", {}, [c](const CapCtx&, const Value& v) {
                        return Value::num(v.as_num() + c);
                      }};
  });

  // Adds c to the cost component (the unique Num slot) of every pair.
  register_capability("shift_pairs", [](const std::vector<json>& args) {
    require(args.size() == 1, ErrorKind::Schema, "shift_pairs(c) takes one number");
    Rat c = arg_num(args[0]);
    return Capability{"shift_pairs(" + c.str() + ")", {},
                      [c](const CapCtx&, const Value& v) {
                        return map_collection(v, [&c](const Value& pair) {
                          size_t i = unique_component(pair, Value::Kind::Num, "shift_pairs");
                          return with_component(pair, i, Value::num(pair.elems()[i].as_num() + c));
                        });
                      }};
  });

  // Prepends the edge source to the path component of every pair.
  register_capability("prefix_src", [](const std::vector<json>& args) {
    require(args.empty(), ErrorKind::Schema, "prefix_src takes no arguments");
    return Capability{"prefix_src", {}, [](const CapCtx& ctx, const Value& v) {
                        return map_collection(v, [&ctx](const Value& pair) {
                          size_t i = unique_component(pair, Value::Kind::Path, "prefix_src");
                          PathWord p = pair.elems()[i].as_path();
                          require(!p.top, ErrorKind::TypeMismatch, "cannot extend the top path");
                          p.nodes.insert(p.nodes.begin(), ctx.src);
                          return with_component(pair, i, Value::path(std::move(p)));
                        });
                      }};
  });

  // One gradient step over (cost, next-hop) pairs: add the edge weight and
  // point at the edge target.
  register_capability("dst", [](const std::vector<json>& args) {
    require(args.size() == 1, ErrorKind::Schema, "dst(w) takes the edge weight");
    Rat w = arg_num(args[0]);
    return Capability{"dst(" + w.str() + ")", {}, [w](const CapCtx& ctx, const Value& v) {
                        const auto& es = v.elems();
                        require(es.size() == 2, ErrorKind::TypeMismatch,
                                "dst expects (cost, node) pairs, got " + v.str());
                        return Value::tuple({Value::num(es[0].as_num() + w), Value::node(ctx.dst)});
                      }};
  });

  // Forwards (cost, path) pairs one step down the gradient of label D: kept
  // only when the edge target is the source's next hop, path extended by the
  // source node.
  register_capability("dst_gradient", [](const std::vector<json>& args) {
    require(args.size() == 1, ErrorKind::Schema, "dst_gradient(D) names the gradient label");
    std::string dlabel = arg_label(args[0]);
    return Capability{
        "dst_gradient(" + dlabel + ")",
        {dlabel},
        [dlabel](const CapCtx& ctx, const Value& v) {
          const Value& dsrc = ctx.read_label(dlabel, ctx.src);
          (void)ctx.read_label(dlabel, ctx.dst);  // both endpoints must be defined
          const auto& pair = dsrc.elems();
          require(pair.size() == 2, ErrorKind::TypeMismatch,
                  "gradient label must hold (cost, node) pairs, got " + dsrc.str());
          bool on_gradient = pair[1].as_node() == ctx.dst;
          if (!on_gradient)
            return v.is(Value::Kind::Antichain) ? Value::antichain({}) : Value::set({});
          return map_collection(v, [&ctx](const Value& p) {
            size_t i = unique_component(p, Value::Kind::Path, "dst_gradient");
            PathWord w = p.elems()[i].as_path();
            require(!w.top, ErrorKind::TypeMismatch, "cannot extend the top path");
            w.nodes.insert(w.nodes.begin(), ctx.src);
            return with_component(p, i, Value::path(std::move(w)));
          });
        }};
  });

  // Selects the paths that start at the edge source and strips that head.
  register_capability("cogradient", [](const std::vector<json>& args) {
    require(args.size() <= 1, ErrorKind::Schema, "cogradient takes at most the gradient label");
    return Capability{"cogradient", {}, [](const CapCtx& ctx, const Value& v) {
                        ValueVec out;
                        for (const auto& e : v.elems()) {
                          const PathWord& p = e.as_path();
                          if (!p.top && !p.nodes.empty() && p.nodes.front() == ctx.src) {
                            PathWord tail{false, {p.nodes.begin() + 1, p.nodes.end()}};
                            out.push_back(Value::path(std::move(tail)));
                          }
                        }
                        require(v.is(Value::Kind::Set), ErrorKind::TypeMismatch,
                                "cogradient expects a set of paths, got " + v.str());
                        return Value::set(std::move(out));
                      }};
  });

  register_capability("compose", [](const std::vector<json>& args) {
    require(args.size() >= 2, ErrorKind::Schema, "compose takes at least two capability refs");
    std::vector<Capability> caps;
    std::vector<std::string> reads;
    std::string display = "compose(";
    for (size_t i = 0; i < args.size(); ++i) {
      caps.push_back(resolve_capability(CapabilityRef::from_json(args[i])));
      reads.insert(reads.end(), caps.back().reads.begin(), caps.back().reads.end());
      display += (i ? "," : "") + caps.back().display;
    }
    display += ")";
    return Capability{display, reads, [caps](const CapCtx& ctx, const Value& v) {
                        Value out = v;
                        for (const auto& c : caps) out = c.apply(ctx, out);
                        return out;
                      }};
  });
}

std::once_flag builtin_caps_once;

}  // namespace

void register_capability(const std::string& name, CapabilityBuilder builder) {
  auto [it, fresh] = registry().emplace(name, std::move(builder));
  (void)it;
  require(fresh, ErrorKind::BadArgument, "duplicate capability name: " + name);
}

bool capability_registered(const std::string& name) {
  std::call_once(builtin_caps_once, register_builtin_capabilities);
  return registry().count(name) > 0;
}

Capability resolve_capability(const CapabilityRef& ref) {
  std::call_once(builtin_caps_once, register_builtin_capabilities);
  auto it = registry().find(ref.name);
  require(it != registry().end(), ErrorKind::UnknownName, "unknown capability: " + ref.name);
  return it->second(ref.args);
}

// -------------------------------------------------------------------- field

Field::Field(std::vector<std::string> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (size_t i = 0; i < nodes_.size(); ++i) {
    require(node_pos_.emplace(nodes_[i], i).second, ErrorKind::Schema,
            "duplicate node id: " + nodes_[i]);
    out_[nodes_[i]];
    in_[nodes_[i]];
  }
  std::set<Edge> seen;
  for (const auto& [src, dst] : edges_) {
    require(has_node(src) && has_node(dst), ErrorKind::Schema,
            "dangling edge (" + src + "," + dst + ")");
    require(seen.insert({src, dst}).second, ErrorKind::Schema,
            "duplicate edge (" + src + "," + dst + ")");
    out_[src].push_back(dst);
    in_[dst].push_back(src);
  }
}

size_t Field::node_position(const std::string& id) const {
  auto it = node_pos_.find(id);
  if (it == node_pos_.end()) fail(ErrorKind::UnknownName, "unknown node: " + id);
  return it->second;
}

bool Field::has_edge(const Edge& e) const {
  auto it = out_.find(e.first);
  if (it == out_.end()) return false;
  return std::find(it->second.begin(), it->second.end(), e.second) != it->second.end();
}

const std::vector<std::string>& Field::out_neighbors(const std::string& n) const {
  auto it = out_.find(n);
  if (it == out_.end()) fail(ErrorKind::UnknownName, "unknown node: " + n);
  return it->second;
}

const std::vector<std::string>& Field::in_neighbors(const std::string& n) const {
  auto it = in_.find(n);
  if (it == in_.end()) fail(ErrorKind::UnknownName, "unknown node: " + n);
  return it->second;
}

std::vector<std::string> Field::neighbors(const std::string& n) const {
  std::set<std::string> s;
  for (const auto& m : out_neighbors(n)) s.insert(m);
  for (const auto& m : in_neighbors(n)) s.insert(m);
  return {s.begin(), s.end()};
}

void Field::validate_label(const std::string& name, const NodeLabel& l) const {
  // Translation-introduced temporaries may carry no domain; they only hold
  // values that flow into domain-free functions.
  for (const auto& n : nodes_) {
    auto it = l.values.find(n);
    require(it != l.values.end(), ErrorKind::Schema,
            "label " + name + " is not total: missing node " + n);
    if (l.domain) l.domain->check_member(it->second, "label " + name + " at node " + n);
  }
  require(l.values.size() == nodes_.size(), ErrorKind::Schema,
          "label " + name + " mentions unknown nodes");
}

void Field::declare_node_label(const std::string& name, DomainPtr domain, NodeValuation values) {
  require(!node_labels_.count(name), ErrorKind::Schema, "duplicate node label: " + name);
  require(domain != nullptr, ErrorKind::Schema, "label " + name + " has no domain");
  NodeLabel l{std::move(domain), std::move(values)};
  for (auto& [n, v] : l.values) v = l.domain->canonicalize(v);
  validate_label(name, l);
  node_labels_[name] = std::move(l);
}

void Field::assign_node_label(const std::string& name, DomainPtr domain, NodeValuation values) {
  NodeLabel l{std::move(domain), std::move(values)};
  validate_label(name, l);
  node_labels_[name] = std::move(l);
}

void Field::remove_node_label(const std::string& name) { node_labels_.erase(name); }

bool Field::has_node_label(const std::string& name) const { return node_labels_.count(name) > 0; }

const Field::NodeLabel& Field::node_label(const std::string& name) const {
  auto it = node_labels_.find(name);
  if (it == node_labels_.end()) fail(ErrorKind::UnknownName, "unknown node label: " + name);
  return it->second;
}

const Value& Field::label_value(const std::string& name, const std::string& node) const {
  const auto& l = node_label(name);
  auto it = l.values.find(node);
  if (it == l.values.end())
    fail(ErrorKind::UnknownName, "label " + name + " undefined at node " + node);
  return it->second;
}

std::vector<std::string> Field::node_label_names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : node_labels_) out.push_back(k);
  return out;
}

void Field::declare_edge_label(const std::string& name, std::map<Edge, CapabilityRef> caps) {
  require(!edge_labels_.count(name), ErrorKind::Schema, "duplicate edge label: " + name);
  require(name != "id", ErrorKind::Schema, "edge label name 'id' is reserved");
  for (const auto& [e, ref] : caps) {
    require(has_edge(e), ErrorKind::Schema,
            "edge label " + name + " on missing edge (" + e.first + "," + e.second + ")");
    require(capability_registered(ref.name), ErrorKind::UnknownName,
            "unknown capability name: " + ref.name);
  }
  for (const auto& e : edges_)
    require(caps.count(e) > 0, ErrorKind::Schema,
            "edge label " + name + " is not total: missing edge (" + e.first + "," + e.second + ")");
  edge_labels_[name] = EdgeLabel{std::move(caps)};
}

bool Field::has_edge_label(const std::string& name) const { return edge_labels_.count(name) > 0; }

const Field::EdgeLabel& Field::edge_label(const std::string& name) const {
  auto it = edge_labels_.find(name);
  if (it == edge_labels_.end()) fail(ErrorKind::UnknownName, "unknown edge label: " + name);
  return it->second;
}

const Value& CapCtx::read_label(const std::string& label, const std::string& node) const {
  if (reader) {
    const Value* v = (*reader)(label, node);
    require(v != nullptr, ErrorKind::UndefRead,
            "label " + label + " undefined at node " + node + " in the local view");
    return *v;
  }
  return field.label_value(label, node);
}

Value Field::apply_capability(const std::string& label, const Edge& e, const Value& v,
                              const LabelReader* reader) const {
  if (label == "id" || label.empty()) return v;
  const auto& el = edge_label(label);
  auto it = el.caps.find(e);
  if (it == el.caps.end())
    fail(ErrorKind::Internal,
         "edge label " + label + " missing on (" + e.first + "," + e.second + ")");
  Capability cap = resolve_capability(it->second);
  CapCtx ctx{*this, e.first, e.second, reader};
  return cap.apply(ctx, v);
}

std::vector<std::string> Field::edge_label_names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : edge_labels_) out.push_back(k);
  return out;
}

DomainPtr Field::node_order_domain() const { return Domain::node_ids(nodes_, true); }

json Field::to_json() const {
  json nodes = json::array();
  for (const auto& n : nodes_) nodes.push_back(json{{"id", n}});
  json edges = json::array();
  for (const auto& [s, d] : edges_) edges.push_back(json::array({s, d}));
  json nlabels = json::object();
  for (const auto& [name, l] : node_labels_) {
    json values = json::object();
    for (const auto& [n, v] : l.values) values[n] = v.to_json();
    json entry{{"values", values}};
    if (l.domain) entry["domain"] = l.domain->to_json();
    nlabels[name] = entry;
  }
  json elabels = json::object();
  for (const auto& [name, l] : edge_labels_) {
    json caps = json::object();
    for (const auto& [e, ref] : l.caps) caps[e.first + "," + e.second] = ref.to_json();
    elabels[name] = json{{"caps", caps}};
  }
  return json{{"nodes", nodes}, {"edges", edges}, {"node_labels", nlabels}, {"edge_labels", elabels}};
}

Field Field::from_json(const json& doc) {
  require(doc.is_object(), ErrorKind::Schema, "field document must be a JSON object");
  std::vector<std::string> nodes;
  for (const auto& n : doc.value("nodes", json::array())) {
    if (n.is_string())
      nodes.push_back(n.get<std::string>());
    else {
      require(n.is_object() && n.contains("id"), ErrorKind::Schema,
              "node entries are {\"id\": ...}: " + n.dump());
      nodes.push_back(n.at("id").get<std::string>());
    }
  }
  if (doc.contains("node_order")) {
    auto order = doc.at("node_order").get<std::vector<std::string>>();
    require(std::set<std::string>(order.begin(), order.end()) ==
                std::set<std::string>(nodes.begin(), nodes.end()),
            ErrorKind::Schema, "node_order must be a permutation of the node ids");
    nodes = order;
  }
  std::vector<Edge> edges;
  for (const auto& e : doc.value("edges", json::array())) {
    require(e.is_array() && e.size() == 2, ErrorKind::Schema, "edges are [src,dst] pairs");
    edges.push_back({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
  }
  Field f(std::move(nodes), std::move(edges));
  json node_labels = doc.value("node_labels", json::object());
  for (const auto& [name, body] : node_labels.items()) {
    require(body.contains("domain") && body.contains("values"), ErrorKind::Schema,
            "node label " + name + " needs domain and values");
    NodeValuation values;
    for (const auto& [n, v] : body.at("values").items()) values[n] = Value::from_json(v);
    f.declare_node_label(name, Domain::from_json(body.at("domain")), std::move(values));
  }
  json edge_labels = doc.value("edge_labels", json::object());
  for (const auto& [name, body] : edge_labels.items()) {
    std::map<Edge, CapabilityRef> caps;
    json cap_entries = body.value("caps", json::object());
    for (const auto& [ek, ref] : cap_entries.items()) {
      auto comma = ek.find(',');
      require(comma != std::string::npos, ErrorKind::Schema, "edge keys look like \"src,dst\"");
      caps[{ek.substr(0, comma), ek.substr(comma + 1)}] = CapabilityRef::from_json(ref);
    }
    f.declare_edge_label(name, std::move(caps));
  }
  return f;
}

Field load_field(const json& doc) { return Field::from_json(doc); }
json dump_field(const Field& f) { return f.to_json(); }

std::string Field::to_dot(const std::vector<std::string>& labels) const {
  std::ostringstream out;
  out << "digraph field {\n";
  std::vector<std::string> shown = labels;
  if (shown.empty()) shown = node_label_names();
  for (const auto& n : nodes_) {
    out << "  \"" << n << "\" [label=\"" << n;
    for (const auto& l : shown)
      if (has_node_label(l)) out << "\\n" << l << "=" << label_value(l, n).str();
    out << "\"];\n";
  }
  for (const auto& [s, d] : edges_) out << "  \"" << s << "\" -> \"" << d << "\";\n";
  out << "}\n";
  return out.str();
}

// --------------------------------------------------------------- valuations

bool lift_order(const NodeValuation& f1, const NodeValuation& f2, const Domain& d) {
  require(f1.size() == f2.size(), ErrorKind::NodeSetMismatch, "valuations over different node sets");
  auto it2 = f2.begin();
  for (auto it1 = f1.begin(); it1 != f1.end(); ++it1, ++it2) {
    require(it1->first == it2->first, ErrorKind::NodeSetMismatch,
            "valuations over different node sets");
    if (!d.leq(it1->second, it2->second)) return false;
  }
  return true;
}

NodeValuation lifted_bottom(const std::vector<std::string>& nodes, const Domain& d) {
  NodeValuation f;
  for (const auto& n : nodes) f[n] = d.bottom();
  return f;
}

NodeValuation lifted_top(const std::vector<std::string>& nodes, const Domain& d) {
  NodeValuation f;
  for (const auto& n : nodes) f[n] = d.top();
  return f;
}

MonotonicityReport probe_capability_monotone(const Field& f, const std::string& edge_label,
                                             const Edge& e, const Domain& d, int samples,
                                             Rng& rng) {
  for (int i = 0; i < samples; ++i) {
    Value a, b, fa, fb;
    try {
      a = d.canonicalize(d.sample(rng));
      b = d.join(a, d.canonicalize(d.sample(rng)));
      fa = f.apply_capability(edge_label, e, a);
      fb = f.apply_capability(edge_label, e, b);
      if (!d.leq(d.canonicalize(fa), d.canonicalize(fb)))
        return {false, edge_label + " on (" + e.first + "," + e.second + "): " + a.str() +
                           " <= " + b.str() + " but " + fa.str() + " !<= " + fb.str()};
    } catch (const Error& err) {
      // Samples the capability cannot digest (open-ended carriers without a
      // useful generator) prove nothing either way.
      if (err.internal()) throw;
      continue;
    }
  }
  return {true, ""};
}

}  // namespace smuc
