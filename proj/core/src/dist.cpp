#include "smuc/dist.hpp"

#include <algorithm>

#include "smuc/errors.hpp"

namespace smuc {

std::string chi_str(ChiVal v) {
  switch (v) {
    case ChiVal::QTrue: return "?true";
    case ChiVal::True: return "true";
    case ChiVal::False: return "false";
  }
  return "?";
}

std::string rule_name(Rule r) {
  switch (r) {
    case Rule::DStep: return "D-Step";
    case Rule::DFree: return "D-Free";
    case Rule::DIfT: return "D-IfT";
    case Rule::DIfF: return "D-IfF";
    case Rule::DUntilT: return "D-UntilT";
    case Rule::DUntilF: return "D-UntilF";
    case Rule::DAgreeF1: return "D-AgreeF1";
    case Rule::DAgreeT: return "D-AgreeT";
    case Rule::DAgreeF2: return "D-AgreeF2";
    case Rule::DAgreeN1: return "D-AgreeN1";
    case Rule::DAgreeP: return "D-AgreeP";
  }
  return "?";
}

// ------------------------------------------------------------ infrastructure

Infrastructure Infrastructure::bfs(const Field& f) {
  require(!f.nodes().empty(), ErrorKind::BadArgument, "cannot span an empty field");
  Infrastructure infra;
  infra.field = f;
  infra.root = f.nodes().front();
  std::set<std::string> seen{infra.root};
  std::deque<std::string> queue{infra.root};
  infra.children[infra.root];
  while (!queue.empty()) {
    std::string n = queue.front();
    queue.pop_front();
    for (const auto& m : f.neighbors(n)) {
      if (seen.count(m)) continue;
      seen.insert(m);
      infra.parent[m] = n;
      infra.children[n].push_back(m);
      infra.children[m];
      queue.push_back(m);
    }
  }
  require(seen.size() == f.nodes().size(), ErrorKind::BadArgument,
          "field is not connected; no spanning tree exists");
  return infra;
}

Infrastructure Infrastructure::from_json(const Field& f, const json& tree) {
  Infrastructure infra;
  infra.field = f;
  infra.root = tree.at("root").get<std::string>();
  require(f.has_node(infra.root), ErrorKind::Schema, "tree root is not a field node");
  for (const auto& n : f.nodes()) infra.children[n];
  for (const auto& [child, par] : tree.at("parent").items()) {
    require(f.has_node(child) && f.has_node(par.get<std::string>()), ErrorKind::Schema,
            "tree mentions unknown nodes");
    infra.parent[child] = par.get<std::string>();
    infra.children[par.get<std::string>()].push_back(child);
  }
  // Every non-root node needs a parent chain reaching the root.
  for (const auto& n : f.nodes()) {
    std::string cur = n;
    std::set<std::string> walk;
    while (cur != infra.root) {
      require(walk.insert(cur).second, ErrorKind::Schema, "tree has a cycle at " + cur);
      auto it = infra.parent.find(cur);
      require(it != infra.parent.end(), ErrorKind::Schema, "tree does not span node " + n);
      cur = it->second;
    }
  }
  return infra;
}

json Infrastructure::tree_json() const {
  json parents = json::object();
  for (const auto& [c, p] : parent) parents[c] = p;
  return json{{"root", root}, {"parent", parents}};
}

std::vector<std::string> Infrastructure::relatives(const std::string& n) const {
  std::vector<std::string> out;
  auto it = parent.find(n);
  if (it != parent.end()) out.push_back(it->second);
  auto ch = children.find(n);
  if (ch != children.end()) out.insert(out.end(), ch->second.begin(), ch->second.end());
  return out;
}

// ------------------------------------------------------------------ fragment

uint64_t Fragment::iteration(const std::string& label) const {
  auto it = kappa.find(label);
  return it == kappa.end() ? 0 : it->second;
}

const ValueCell* Fragment::cell(const std::string& label, const std::string& n) const {
  auto it = iota.find(label);
  if (it == iota.end()) return nullptr;
  auto jt = it->second.find(n);
  return jt == it->second.end() ? nullptr : &jt->second;
}

json Message::to_json() const {
  json j{{"from", from}, {"label", label}, {"to", std::vector<std::string>(to.begin(), to.end())}};
  if (agree) {
    j["iter"] = iter;
    j["value"] = chi_str(cv);
  } else {
    j["value"] = value.to_json();
    j["seq"] = seq;
  }
  return j;
}

Fragment& DistExecution::at(const std::string& node) {
  for (auto& f : fragments)
    if (f.node == node) return f;
  fail(ErrorKind::Internal, "no fragment for node " + node);
}

const Fragment& DistExecution::at(const std::string& node) const {
  for (const auto& f : fragments)
    if (f.node == node) return f;
  fail(ErrorKind::Internal, "no fragment for node " + node);
}

// -------------------------------------------------------------- static types

namespace {

DomainPtr infer_elementary_domain(const Formula& f, const Field& field,
                                  const std::map<std::string, DomainPtr>& labels) {
  TypeMap types;
  return infer_domains(f, field, {}, types, &labels);
}

// One pass over the program in order, recording the domain every label will
// carry. Loop bodies settle in a single pass because re-assignments repeat
// the same right-hand sides.
void type_pass(const Stmt& s, const Field& field, std::map<std::string, DomainPtr>& labels) {
  switch (s.tag) {
    case Stmt::Tag::Skip:
    case Stmt::Tag::Free: return;
    case Stmt::Tag::Assign: {
      DomainPtr d = infer_elementary_domain(*s.formula, field, labels);
      auto it = labels.find(s.label);
      if (it == labels.end() || !it->second) labels[s.label] = d;
      return;
    }
    case Stmt::Tag::Seq:
      type_pass(*s.a, field, labels);
      type_pass(*s.b, field, labels);
      return;
    case Stmt::Tag::If:
      type_pass(*s.a, field, labels);
      type_pass(*s.b, field, labels);
      return;
    case Stmt::Tag::Until: type_pass(*s.a, field, labels); return;
  }
}

// --------------------------------------------------------- residual zipping

StmtPtr normalize(StmtPtr s) {
  while (s->tag == Stmt::Tag::Seq && s->a->is_skip()) s = s->b;
  return s;
}

const Stmt& head_stmt(const Stmt& s) {
  if (s.tag == Stmt::Tag::Seq) {
    const Stmt& h = head_stmt(*s.a);
    return h.tag == Stmt::Tag::Skip ? head_stmt(*s.b) : h;
  }
  return s;
}

// Replaces the head statement by `next` and renormalizes.
StmtPtr replace_head(const StmtPtr& s, const StmtPtr& next) {
  if (s->tag == Stmt::Tag::Seq) {
    if (s->a->is_skip()) return replace_head(normalize(s), next);
    return normalize(Stmt::seq(replace_head(s->a, next), s->b));
  }
  return normalize(next);
}

// ----------------------------------------------------------- local evaluation

struct Requirement {
  std::string label;
  std::string node;
  bool neighbor = false;  // neighbor cells are gated by the write sequence
};

// Node labels an elementary formula consults, including capability and
// context-function reads.
std::vector<Requirement> requirements(const Formula& f, const Fragment& frag,
                                      const Infrastructure& infra) {
  const Field& field = infra.field;
  const std::string& n = frag.node;
  std::vector<Requirement> reqs;
  auto own = [&](const std::string& label) { reqs.push_back({label, n, false}); };
  switch (f.tag) {
    case Formula::Tag::Label: own(f.name); return reqs;
    case Formula::Tag::Const: return reqs;
    case Formula::Tag::Apply: {
      if (f.name == "bot" || f.name == "top") return reqs;
      for (const auto& r : function_def(f.name).reads) own(r);
      for (const auto& k : f.kids) {
        auto sub = requirements(*k, frag, infra);
        reqs.insert(reqs.end(), sub.begin(), sub.end());
      }
      return reqs;
    }
    case Formula::Tag::Modal: {
      const std::string& j = f.kids[0]->name;
      std::vector<std::string> cap_reads;
      if (f.alpha != "id") {
        std::set<std::string> reads;
        for (const auto& [e, ref] : field.edge_label(f.alpha).caps) {
          (void)e;
          for (const auto& r : resolve_capability(ref).reads) reads.insert(r);
        }
        cap_reads.assign(reads.begin(), reads.end());
      }
      auto one_edge = [&](const std::string& src, const std::string& dst) {
        const std::string& peer = src == n ? dst : src;
        reqs.push_back({j, peer, true});
        for (const auto& r : cap_reads) {
          reqs.push_back({r, src, src != n});
          reqs.push_back({r, dst, dst != n});
        }
      };
      if (f.out)
        for (const auto& m : field.out_neighbors(n)) one_edge(n, m);
      else
        for (const auto& m : field.in_neighbors(n)) one_edge(m, n);
      return reqs;
    }
    default:
      fail(ErrorKind::Internal, "non-elementary formula in a fragment: " + print_formula(f));
  }
}

bool satisfied(const Fragment& frag, const std::vector<Requirement>& reqs) {
  for (const auto& r : reqs) {
    const ValueCell* cell = frag.cell(r.label, r.node);
    if (!cell || !cell->value) return false;
    if (r.neighbor) {
      auto it = frag.writes.find(r.label);
      uint64_t own_writes = it == frag.writes.end() ? 0 : it->second;
      if (cell->seq < own_writes) return false;  // stale round, wait for the peer
    }
  }
  return true;
}

Value eval_elementary(const Formula& f, const Fragment& frag, const DistExecution& exec,
                      const Infrastructure& infra) {
  const Field& field = infra.field;
  const std::string& n = frag.node;
  LabelReader reader = [&frag](const std::string& label, const std::string& at) -> const Value* {
    const ValueCell* cell = frag.cell(label, at);
    return cell && cell->value ? &*cell->value : nullptr;
  };
  auto domain_of = [&exec](const std::string& label) -> const Domain* {
    auto it = exec.label_domains.find(label);
    return it == exec.label_domains.end() ? nullptr : it->second.get();
  };
  switch (f.tag) {
    case Formula::Tag::Label: {
      const ValueCell* cell = frag.cell(f.name, n);
      if (!cell || !cell->value)
        fail(ErrorKind::UndefRead, "label " + f.name + " undefined at " + n);
      return *cell->value;
    }
    case Formula::Tag::Const: return f.constant;
    case Formula::Tag::Apply: {
      if (f.name == "bot" || f.name == "top") {
        DomainPtr d = infer_elementary_domain(f, field, exec.label_domains);
        require(d != nullptr, ErrorKind::TypeMismatch,
                "cannot infer the domain of " + print_formula(f));
        return f.name == "bot" ? d->bottom() : d->top();
      }
      const FunctionDef& def = function_def(f.name);
      std::vector<Value> args;
      for (const auto& k : f.kids) args.push_back(eval_elementary(*k, frag, exec, infra));
      DomainPtr d = infer_elementary_domain(f, field, exec.label_domains);
      FnCtx ctx{field, n, d.get(), &reader};
      return def.eval(ctx, args);
    }
    case Formula::Tag::Modal: {
      const AggregatorDef& agg = aggregator_def(f.agg);
      const std::string& j = f.kids[0]->name;
      std::vector<Value> inputs;
      auto take = [&](const Edge& e, const std::string& peer) {
        const ValueCell* cell = frag.cell(j, peer);
        if (!cell || !cell->value)
          fail(ErrorKind::UndefRead, "label " + j + " undefined at neighbor " + peer);
        inputs.push_back(field.apply_capability(f.alpha, e, *cell->value, &reader));
      };
      if (f.out)
        for (const auto& m : field.out_neighbors(n)) take({n, m}, m);
      else
        for (const auto& m : field.in_neighbors(n)) take({m, n}, m);
      return agg.fold(domain_of(j), inputs);
    }
    default: fail(ErrorKind::Internal, "non-elementary formula in a fragment");
  }
}

ChiVal own_chi(const Fragment& frag, const std::string& label, uint64_t iter, bool* present) {
  auto p = frag.chi.find(frag.node);
  if (p != frag.chi.end()) {
    auto l = p->second.find(label);
    if (l != p->second.end()) {
      auto i = l->second.find(iter);
      if (i != l->second.end()) {
        *present = true;
        return i->second;
      }
    }
  }
  *present = false;
  return ChiVal::False;
}

std::optional<ChiVal> peer_chi(const Fragment& frag, const std::string& peer,
                               const std::string& label, uint64_t iter) {
  auto p = frag.chi.find(peer);
  if (p == frag.chi.end()) return std::nullopt;
  auto l = p->second.find(label);
  if (l == p->second.end()) return std::nullopt;
  auto i = l->second.find(iter);
  if (i == l->second.end()) return std::nullopt;
  return i->second;
}

}  // namespace

// ---------------------------------------------------------------- projection

DistExecution project(const Infrastructure& infra, const StmtPtr& saf_program) {
  require(is_saf(*saf_program), ErrorKind::BadArgument,
          "distributed execution needs a program in simple assignment form");
  const Field& f = infra.field;
  DistExecution exec;
  exec.label_domains.clear();
  for (const auto& name : f.node_label_names())
    exec.label_domains[name] = f.node_label(name).domain;
  type_pass(*saf_program, f, exec.label_domains);
  for (const auto& n : f.nodes()) {
    Fragment frag;
    frag.node = n;
    frag.residual = normalize(saf_program);
    std::vector<std::string> view = f.neighbors(n);
    view.push_back(n);
    for (const auto& name : f.node_label_names())
      for (const auto& m : view)
        frag.iota[name][m] = ValueCell{f.label_value(name, m), 0};
    exec.fragments.push_back(std::move(frag));
  }
  return exec;
}

// -------------------------------------------------------------- rule firing

std::vector<Rule> enabled_rules(const DistExecution& exec, const Infrastructure& infra,
                                const Fragment& frag) {
  std::vector<Rule> out;
  if (frag.done()) return out;
  const Stmt& head = head_stmt(*frag.residual);
  switch (head.tag) {
    case Stmt::Tag::Assign: {
      auto reqs = requirements(*head.formula, frag, infra);
      if (satisfied(frag, reqs)) out.push_back(Rule::DStep);
      return out;
    }
    case Stmt::Tag::Free: out.push_back(Rule::DFree); return out;
    case Stmt::Tag::If:
    case Stmt::Tag::Until: {
      bool is_until = head.tag == Stmt::Tag::Until;
      const std::string& i = head.formula->name;
      uint64_t c = frag.iteration(i);
      bool present = false;
      ChiVal mine = own_chi(frag, i, c, &present);
      if (present && mine == ChiVal::True)
        out.push_back(is_until ? Rule::DUntilT : Rule::DIfT);
      if (present && mine == ChiVal::False)
        out.push_back(is_until ? Rule::DUntilF : Rule::DIfF);
      if (present && mine == ChiVal::QTrue && !infra.is_root(frag.node)) {
        auto pv = peer_chi(frag, infra.parent.at(frag.node), i, c);
        if (pv && *pv != ChiVal::QTrue) out.push_back(Rule::DAgreeP);
      }
      if (!present) {
        const ValueCell* local = frag.cell(i, frag.node);
        if (local && local->value && local->value->is(Value::Kind::Bool)) {
          if (!local->value->as_bool()) {
            out.push_back(Rule::DAgreeF1);
          } else {
            bool any_false = false;
            bool all_qtrue = true;
            for (const auto& ch : infra.children.at(frag.node)) {
              auto cv = peer_chi(frag, ch, i, c);
              if (cv && *cv == ChiVal::False) any_false = true;
              if (!cv || *cv != ChiVal::QTrue) all_qtrue = false;
            }
            if (any_false)
              out.push_back(Rule::DAgreeF2);
            else if (all_qtrue)
              out.push_back(infra.is_root(frag.node) ? Rule::DAgreeN1 : Rule::DAgreeT);
          }
        }
      }
      return out;
    }
    default: return out;
  }
}

void frag_step(DistExecution& exec, const Infrastructure& infra, size_t fragment, Rule rule) {
  Fragment& frag = exec.fragments[fragment];
  const Stmt& head = head_stmt(*frag.residual);
  const std::string& n = frag.node;
  auto log_rule = [&](json extra) {
    extra["event"] = "rule";
    extra["node"] = n;
    extra["rule"] = rule_name(rule);
    exec.log.push_back({std::move(extra)});
  };
  auto send = [&](Message m) {
    exec.log.push_back({json{{"event", "send"}, {"msg", m.to_json()}}});
    exec.pending.push_back(std::move(m));
  };
  auto bump = [&](const std::string& i, uint64_t c) { frag.kappa[i] = c + 1; };

  switch (rule) {
    case Rule::DStep: {
      Value v = eval_elementary(*head.formula, frag, exec, infra);
      auto dit = exec.label_domains.find(head.label);
      if (dit != exec.label_domains.end() && dit->second) v = dit->second->canonicalize(v);
      uint64_t seq = ++frag.writes[head.label];
      frag.iota[head.label][n] = ValueCell{v, seq};
      std::set<std::string> to;
      for (const auto& m : infra.field.neighbors(n)) to.insert(m);
      log_rule({{"label", head.label}, {"value", v.to_json()}, {"seq", seq}});
      if (!to.empty())
        send(Message{false, n, head.label, std::move(to), v, seq, 0, ChiVal::False});
      frag.residual = replace_head(frag.residual, Stmt::skip());
      return;
    }
    case Rule::DFree: {
      for (const auto& l : head.freed) {
        auto it = frag.iota.find(l);
        if (it == frag.iota.end()) continue;
        for (auto& [node, cell] : it->second) cell.value.reset();
      }
      log_rule({{"labels", head.freed}});
      frag.residual = replace_head(frag.residual, Stmt::skip());
      return;
    }
    case Rule::DIfT:
    case Rule::DIfF: {
      uint64_t c = frag.iteration(head.formula->name);
      bump(head.formula->name, c);
      log_rule({{"label", head.formula->name}, {"iter", c}});
      frag.residual = replace_head(frag.residual, rule == Rule::DIfT ? head.a : head.b);
      return;
    }
    case Rule::DUntilT: {
      uint64_t c = frag.iteration(head.formula->name);
      bump(head.formula->name, c);
      log_rule({{"label", head.formula->name}, {"iter", c}});
      frag.residual = replace_head(frag.residual, Stmt::skip());
      return;
    }
    case Rule::DUntilF: {
      uint64_t c = frag.iteration(head.formula->name);
      bump(head.formula->name, c);
      log_rule({{"label", head.formula->name}, {"iter", c}});
      StmtPtr unrolled = Stmt::seq(head.a, std::make_shared<Stmt>(head));
      frag.residual = replace_head(frag.residual, unrolled);
      return;
    }
    case Rule::DAgreeF1:
    case Rule::DAgreeF2: {
      const std::string& i = head.formula->name;
      uint64_t c = frag.iteration(i);
      frag.chi[n][i][c] = ChiVal::False;
      std::set<std::string> to;
      for (const auto& r : infra.relatives(n)) to.insert(r);
      log_rule({{"label", i}, {"iter", c}, {"local", rule == Rule::DAgreeF1 ? false : true}});
      if (!to.empty())
        send(Message{true, n, i, std::move(to), Value(), 0, c, ChiVal::False});
      return;
    }
    case Rule::DAgreeT: {
      const std::string& i = head.formula->name;
      uint64_t c = frag.iteration(i);
      frag.chi[n][i][c] = ChiVal::QTrue;
      log_rule({{"label", i}, {"iter", c}, {"local", true}});
      send(Message{true, n, i, {infra.parent.at(n)}, Value(), 0, c, ChiVal::QTrue});
      return;
    }
    case Rule::DAgreeN1: {
      // The table text stores false here; the prose protocol decides true and
      // floods it from the root, which is what keeps UntilT reachable.
      const std::string& i = head.formula->name;
      uint64_t c = frag.iteration(i);
      frag.chi[n][i][c] = ChiVal::True;
      std::set<std::string> to(infra.children.at(n).begin(), infra.children.at(n).end());
      log_rule({{"label", i}, {"iter", c}, {"local", true}});
      if (!to.empty()) send(Message{true, n, i, std::move(to), Value(), 0, c, ChiVal::True});
      return;
    }
    case Rule::DAgreeP: {
      // A waiting node adopts its parent's decided value and forwards it.
      const std::string& i = head.formula->name;
      uint64_t c = frag.iteration(i);
      auto pv = peer_chi(frag, infra.parent.at(n), i, c);
      require(pv.has_value() && *pv != ChiVal::QTrue, ErrorKind::Internal,
              "D-AgreeP fired without a decided parent value");
      frag.chi[n][i][c] = *pv;
      std::set<std::string> to(infra.children.at(n).begin(), infra.children.at(n).end());
      log_rule({{"label", i}, {"iter", c}, {"decided", chi_str(*pv)}});
      if (!to.empty()) send(Message{true, n, i, std::move(to), Value(), 0, c, *pv});
      return;
    }
  }
}

void deliver(DistExecution& exec, size_t msg_index) {
  require(msg_index < exec.pending.size(), ErrorKind::Internal, "no such pending message");
  Message m = exec.pending[msg_index];
  exec.pending.erase(exec.pending.begin() + static_cast<long>(msg_index));
  exec.log.push_back({json{{"event", "deliver"}, {"msg", m.to_json()}}});
  for (auto& frag : exec.fragments) {
    if (!m.to.count(frag.node)) continue;  // non-recipients are unchanged
    if (m.agree) {
      auto& cell = frag.chi[m.from][m.label];
      auto it = cell.find(m.iter);
      if (it != cell.end()) {
        // Agreement cells are write-once per (sender, label, iteration); the
        // QTrue -> decided transition happens only in the sender's own row.
        require(it->second == m.cv, ErrorKind::Internal,
                "conflicting agreement message for " + m.label);
      }
      cell[m.iter] = m.cv;
    } else {
      ValueCell& cell = frag.iota[m.label][m.from];
      if (m.seq >= cell.seq) cell = ValueCell{m.value, m.seq};
    }
  }
}

// ----------------------------------------------------------------- simulate

DistExecution simulate(const Infrastructure& infra, const StmtPtr& saf_program,
                       const SimulateOptions& opts) {
  DistExecution exec = project(infra, saf_program);
  Rng rng(opts.seed);
  for (size_t fuel = opts.fuel; fuel > 0; --fuel) {
    std::vector<EnabledRule> rules;
    for (size_t i = 0; i < exec.fragments.size(); ++i)
      for (Rule r : enabled_rules(exec, infra, exec.fragments[i])) rules.push_back({i, r});
    size_t total = rules.size() + exec.pending.size();
    if (total == 0) {
      bool all_done = true;
      for (const auto& f : exec.fragments) all_done = all_done && f.done();
      if (all_done) return exec;
      std::string dump = "distributed execution is stuck; residual programs:";
      for (const auto& f : exec.fragments)
        if (!f.done()) dump += "\n  " + f.node + ": " + print_program(head_stmt(*f.residual));
      fail(ErrorKind::FuelExhausted, dump);
    }
    size_t pick = std::uniform_int_distribution<size_t>(0, total - 1)(rng);
    if (pick < rules.size())
      frag_step(exec, infra, rules[pick].fragment, rules[pick].rule);
    else
      deliver(exec, pick - rules.size());
    if (!opts.keep_log) exec.log.clear();
  }
  fail(ErrorKind::FuelExhausted, "distributed simulation ran out of fuel");
}

std::map<std::string, NodeValuation> lift(const DistExecution& exec) {
  std::map<std::string, NodeValuation> out;
  for (const auto& frag : exec.fragments)
    for (const auto& [label, cells] : frag.iota) {
      auto it = cells.find(frag.node);
      if (it != cells.end() && it->second.value) out[label][frag.node] = *it->second.value;
    }
  return out;
}

bool agrees_with(const DistExecution& exec, const Field& f) {
  auto lifted = lift(exec);
  for (const auto& name : f.node_label_names()) {
    if (is_aux_label(name)) continue;
    auto it = lifted.find(name);
    if (it == lifted.end()) return false;
    for (const auto& n : f.nodes()) {
      auto v = it->second.find(n);
      if (v == it->second.end() || v->second != f.label_value(name, n)) return false;
    }
  }
  return true;
}

}  // namespace smuc
