#include "smuc/rescue.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "smuc/errors.hpp"

namespace smuc {

namespace {

bool g_saved_leq = false;

DomainPtr open_pair_set() { return Domain::finite_set(std::nullopt); }

// length-then-lexicographic over document order
bool path_less(const PathWord& a, const PathWord& b, const Field& f) {
  if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
  for (size_t i = 0; i < a.nodes.size(); ++i) {
    if (a.nodes[i] == b.nodes[i]) continue;
    return f.node_position(a.nodes[i]) < f.node_position(b.nodes[i]);
  }
  return false;
}

struct Candidate {
  Rat cost;
  PathWord path;
};

bool candidate_less(const Candidate& x, const Candidate& y, const Field& f) {
  if (x.cost != y.cost) return x.cost < y.cost;
  return path_less(x.path, y.path, f);
}

long how_many_at(const FnCtx& ctx) {
  const Value& k = ctx.read_label("howMany", ctx.node);
  require(k.as_num().is_integer(), ErrorKind::TypeMismatch, "howMany must be an integer");
  return k.as_num().to_long();
}

bool saved_at(const FnCtx& ctx) {
  if (!ctx.read_label("victim", ctx.node).as_bool()) return false;
  long have = static_cast<long>(ctx.read_label("rescuers", ctx.node).elems().size());
  long need = how_many_at(ctx);
  return g_saved_leq ? have <= need : have >= need;
}

// The howMany best candidates by (cost, path) order, as bare paths.
Value opt_select(const FnCtx& ctx) {
  std::vector<Candidate> cands;
  for (const auto& pair : ctx.read_label("rescuers", ctx.node).elems()) {
    const auto& es = pair.elems();
    require(es.size() == 2, ErrorKind::TypeMismatch, "rescuers holds (cost, path) pairs");
    cands.push_back({es[0].as_num(), es[1].as_path()});
  }
  std::sort(cands.begin(), cands.end(), [&](const Candidate& x, const Candidate& y) {
    return candidate_less(x, y, ctx.field);
  });
  long k = how_many_at(ctx);
  ValueVec out;
  for (long i = 0; i < k && i < static_cast<long>(cands.size()); ++i)
    out.push_back(Value::path(cands[i].path));
  return Value::set(std::move(out));
}

}  // namespace

void set_saved_verbatim_leq(bool enabled) { g_saved_leq = enabled; }

void register_rescue_functions() {
  static bool done = false;
  if (done) return;
  done = true;

  // A rescuer contributes its distance-to-victim with an empty path;
  // unreachable rescuers contribute nothing.
  register_function("init",
                    {0, 0, true, {"rescuer", "D"},
                     [](const FnCtx& ctx, const std::vector<Value>&) {
                       if (!ctx.read_label("rescuer", ctx.node).as_bool()) return Value::set({});
                       const auto& d = ctx.read_label("D", ctx.node).elems();
                       if (d.at(0).as_num().is_inf()) return Value::set({});
                       return Value::set({Value::tuple({d.at(0), Value::path(PathWord{})})});
                     },
                     [](const std::vector<DomainPtr>&) { return open_pair_set(); }});

  register_function("saved", {0, 0, false, {"victim", "rescuers", "howMany"},
                              [](const FnCtx& ctx, const std::vector<Value>&) {
                                return Value::boolean(saved_at(ctx));
                              },
                              [](const std::vector<DomainPtr>&) { return Domain::boolean(); }});

  register_function("choose",
                    {0, 0, true, {"victim", "rescuers", "howMany"},
                     [](const FnCtx& ctx, const std::vector<Value>&) {
                       if (!ctx.read_label("victim", ctx.node).as_bool()) return Value::set({});
                       if (!saved_at(ctx)) return Value::set({});
                       return opt_select(ctx);
                     },
                     [](const std::vector<DomainPtr>&) { return open_pair_set(); }});
}

std::string rescue_program_text() {
  return R"(finish <- false;
until finish do {
  source <- ite(victim, pair(0, self()), pair(inf, self()));
  D <- mu Z. min1(source, <out dst:min1> Z);
  rescuers <- mu Z. cup(init(), <in grd:cup> Z);
  engaged <- mu Z. cup(choose(), <out cgr:cup> Z);
  victim' <- victim;
  victim <- and(victim, not(saved()));
  rescuer <- and(rescuer, isempty(engaged));
  finish <- equals(victim', victim)
};
allsaved <- not(victim)
)";
}

StmtPtr rescue_program() {
  register_rescue_functions();
  return parse_program(rescue_program_text());
}

// ----------------------------------------------------------------- scenario

namespace {

long isqrt(long v) {
  long lo = 0, hi = 1;
  while (hi * hi <= v) hi *= 2;
  while (lo + 1 < hi) {
    long mid = lo + (hi - lo) / 2;
    if (mid * mid <= v)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

Field gen_scenario(const ScenarioSpec& spec) {
  register_rescue_functions();
  std::vector<std::string> names;
  std::set<std::string> victims;
  std::map<std::string, long> need;
  for (const auto& [v, k] : spec.victims) {
    names.push_back(v);
    victims.insert(v);
    need[v] = k;
  }
  std::set<std::string> rescuers;
  for (size_t i = 0; i < spec.rescuers; ++i) {
    names.push_back("r" + std::to_string(i));
    rescuers.insert(names.back());
  }
  for (size_t i = 0; i < spec.landmarks; ++i) names.push_back("l" + std::to_string(i));
  size_t n = names.size();
  require(n >= 1, ErrorKind::BadArgument, "empty scenario");

  Rng rng(spec.seed);
  const long side = 1000;
  // Radius for near-certain connectivity of a random geometric graph, grown
  // on every failed draw.
  double base = static_cast<double>(side) * side * (std::log(static_cast<double>(n)) + 3.0) /
                (3.14159 * static_cast<double>(n));
  long r2 = static_cast<long>(4.0 * base) + 1;

  for (int attempt = 0; attempt < 24; ++attempt, r2 *= 2) {
    std::uniform_int_distribution<long> coord(0, side);
    std::map<std::string, std::pair<long, long>> at;
    for (const auto& name : names) at[name] = {coord(rng), coord(rng)};
    std::vector<Edge> edges;
    std::map<Edge, long> weight;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) {
        auto [xi, yi] = at[names[i]];
        auto [xj, yj] = at[names[j]];
        long d2 = (xi - xj) * (xi - xj) + (yi - yj) * (yi - yj);
        if (d2 > r2) continue;
        long w = std::max<long>(1, isqrt(d2));
        edges.push_back({names[i], names[j]});
        edges.push_back({names[j], names[i]});
        weight[{names[i], names[j]}] = w;
        weight[{names[j], names[i]}] = w;
      }
    Field f(names, edges);
    // connectivity over the undirected closure
    std::set<std::string> seen{names[0]};
    std::vector<std::string> queue{names[0]};
    while (!queue.empty()) {
      std::string cur = queue.back();
      queue.pop_back();
      for (const auto& m : f.neighbors(cur))
        if (seen.insert(m).second) queue.push_back(m);
    }
    if (seen.size() != n) continue;

    DomainPtr boolean = Domain::boolean();
    DomainPtr gradient =
        Domain::lexproduct(Domain::reverse(Domain::tropical()), Domain::node_ids(names, true));
    NodeValuation victim_v, rescuer_v, howmany_v, seed_v;
    for (const auto& name : names) {
      victim_v[name] = Value::boolean(victims.count(name) > 0);
      rescuer_v[name] = Value::boolean(rescuers.count(name) > 0);
      howmany_v[name] = Value::num(Rat(victims.count(name) ? need[name] : 0));
      seed_v[name] = gradient->bottom();
    }
    f.declare_node_label("victim", boolean, victim_v);
    f.declare_node_label("rescuer", boolean, rescuer_v);
    f.declare_node_label("howMany", Domain::tropical(), howmany_v);
    f.declare_node_label("source", gradient, seed_v);
    f.declare_node_label("D", gradient, seed_v);

    std::map<Edge, CapabilityRef> dst, grd, cgr;
    for (const auto& e : f.edges()) {
      dst[e] = CapabilityRef{"dst", {json(std::to_string(weight[e]))}};
      grd[e] = CapabilityRef{"dst_gradient", {json("D")}};
      cgr[e] = CapabilityRef{"cogradient", {}};
    }
    f.declare_edge_label("dst", std::move(dst));
    f.declare_edge_label("grd", std::move(grd));
    f.declare_edge_label("cgr", std::move(cgr));
    return f;
  }
  fail(ErrorKind::BadArgument, "could not draw a connected scenario");
}

// ------------------------------------------------------------------- oracle

namespace {

struct Gradient {
  std::map<std::string, Rat> cost;
  std::map<std::string, std::string> nexthop;
};

long edge_weight(const Field& f, const Edge& e) {
  const auto& ref = f.edge_label("dst").caps.at(e);
  return Rat::parse(ref.args.at(0).get<std::string>()).to_long();
}

// Multi-source shortest distances toward the remaining victims, plus the
// lexicographic next hop each node's gradient entry would carry.
Gradient dijkstra(const Field& f, const std::set<std::string>& victims) {
  Gradient g;
  for (const auto& n : f.nodes()) g.cost[n] = Rat::infinity();
  using Item = std::pair<long, size_t>;  // (cost, node position)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (const auto& v : victims) {
    g.cost[v] = Rat(0);
    heap.push({0, f.node_position(v)});
  }
  while (!heap.empty()) {
    auto [c, pos] = heap.top();
    heap.pop();
    const std::string& n = f.nodes()[pos];
    if (g.cost[n] != Rat(c)) continue;
    // relax over incoming edges: distance-to-victim flows backwards
    for (const auto& m : f.in_neighbors(n)) {
      long w = edge_weight(f, {m, n});
      if (Rat(c + w) < g.cost[m]) {
        g.cost[m] = Rat(c + w);
        heap.push({c + w, f.node_position(m)});
      }
    }
  }
  for (const auto& n : f.nodes()) {
    if (victims.count(n) || g.cost[n].is_inf()) continue;
    std::optional<std::pair<Rat, std::string>> best;
    for (const auto& m : f.out_neighbors(n)) {
      Rat via = g.cost[m] + Rat(edge_weight(f, {n, m}));
      std::pair<Rat, std::string> cand{via, m};
      if (!best || cand.first < best->first ||
          (cand.first == best->first &&
           f.node_position(cand.second) < f.node_position(best->second)))
        best = cand;
    }
    if (best && best->first == g.cost[n]) g.nexthop[n] = best->second;
  }
  for (const auto& v : victims) g.nexthop[v] = v;
  return g;
}

}  // namespace

Assignment oracle_assignment(const Field& f) {
  Assignment out;
  std::set<std::string> victims, rescuers;
  for (const auto& n : f.nodes()) {
    if (f.label_value("victim", n).as_bool()) victims.insert(n);
    if (f.label_value("rescuer", n).as_bool()) rescuers.insert(n);
  }
  std::set<std::string> all_victims = victims;

  bool progress = true;
  while (progress && !victims.empty()) {
    progress = false;
    Gradient g = dijkstra(f, victims);
    struct Cand {
      Rat cost;
      PathWord path;
      std::string rescuer;
    };
    std::map<std::string, std::vector<Cand>> per_victim;
    for (const auto& r : rescuers) {
      if (g.cost[r].is_inf()) continue;
      PathWord path;
      std::string cur = r;
      std::vector<std::string> walk;
      while (!victims.count(cur)) {
        walk.push_back(cur);
        cur = g.nexthop.at(cur);
        require(walk.size() <= f.nodes().size(), ErrorKind::Internal, "gradient chain loops");
      }
      path.nodes.assign(walk.rbegin(), walk.rend());
      per_victim[cur].push_back({g.cost[r], std::move(path), r});
    }
    for (auto& [v, cands] : per_victim) {
      long k = f.label_value("howMany", v).as_num().to_long();
      bool enough = g_saved_leq ? static_cast<long>(cands.size()) <= k
                                : static_cast<long>(cands.size()) >= k;
      if (!enough) continue;
      std::sort(cands.begin(), cands.end(), [&](const Cand& x, const Cand& y) {
        return candidate_less({x.cost, x.path}, {y.cost, y.path}, f);
      });
      for (long i = 0; i < k && i < static_cast<long>(cands.size()); ++i) {
        out.rescuers_of[v].insert(cands[i].rescuer);
        rescuers.erase(cands[i].rescuer);
      }
      out.saved.insert(v);
      victims.erase(v);
      progress = true;
    }
  }
  out.success = out.saved == all_victims;
  return out;
}

// ---------------------------------------------------------------------- run

RescueRun run_rescue(Field f, size_t fuel) {
  register_rescue_functions();
  StmtPtr prog = rescue_program();
  RescueRun result;
  StepHook hook = [&result](const Stmt& fired, const Field& after) {
    if (fired.tag != Stmt::Tag::Assign || fired.label != "engaged") return;
    for (const auto& r : after.nodes()) {
      if (!after.label_value("rescuer", r).as_bool()) continue;
      const Value& engaged = after.label_value("engaged", r);
      bool chosen = false;
      for (const auto& p : engaged.elems())
        if (!p.as_path().top && p.as_path().nodes.empty()) chosen = true;
      if (!chosen) continue;
      // Follow the gradient to the victim that selected this rescuer.
      std::string cur = r;
      size_t guard = 0;
      while (!after.label_value("victim", cur).as_bool()) {
        cur = after.label_value("D", cur).elems().at(1).as_node();
        require(++guard <= after.nodes().size(), ErrorKind::Internal, "gradient chain loops");
      }
      result.assignment.rescuers_of[cur].insert(r);
      result.assignment.saved.insert(cur);
    }
  };
  RunResult run_result = run(prog, std::move(f), fuel, hook);
  result.field = std::move(run_result.field);
  result.steps = run_result.steps;
  bool all = true;
  for (const auto& n : result.field.nodes())
    all = all && result.field.label_value("allsaved", n).as_bool();
  result.assignment.success = all;
  return result;
}

}  // namespace smuc
