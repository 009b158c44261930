#include "smuc/saf.hpp"
#include <algorithm>

#include "smuc/errors.hpp"

namespace smuc {

namespace {

bool is_atom(const Formula& f) {
  if (f.tag == Formula::Tag::Const) return true;
  if (f.tag == Formula::Tag::Apply && (f.name == "bot" || f.name == "top")) return true;
  return false;
}

bool is_label_or_atom(const Formula& f) { return f.tag == Formula::Tag::Label || is_atom(f); }

}  // namespace

bool is_elementary(const Formula& f) {
  switch (f.tag) {
    case Formula::Tag::Label:
    case Formula::Tag::Const: return true;
    case Formula::Tag::Apply: {
      if (is_atom(f)) return true;
      for (const auto& k : f.kids)
        if (!is_label_or_atom(*k)) return false;
      return true;
    }
    case Formula::Tag::Modal: return f.kids[0]->tag == Formula::Tag::Label;
    default: return false;
  }
}

bool is_saf(const Stmt& p) {
  switch (p.tag) {
    case Stmt::Tag::Skip:
    case Stmt::Tag::Free: return true;
    case Stmt::Tag::Assign: return is_elementary(*p.formula);
    case Stmt::Tag::Seq: return is_saf(*p.a) && is_saf(*p.b);
    case Stmt::Tag::If:
      return p.formula->tag == Formula::Tag::Label && is_saf(*p.a) && is_saf(*p.b);
    case Stmt::Tag::Until: return p.formula->tag == Formula::Tag::Label && is_saf(*p.a);
  }
  return false;
}

StmtPtr wait_stmt(const std::string& label) {
  return Stmt::seq(Stmt::assign(label, Formula::constant_of(Value::boolean(true))),
                   Stmt::until(Formula::label(label), Stmt::skip()));
}

std::pair<StmtPtr, size_t> translate_formula(const FormulaPtr& psi, const std::string& target,
                                             size_t c) {
  switch (psi->tag) {
    case Formula::Tag::Label:
    case Formula::Tag::Const: return {Stmt::assign(target, psi), c};
    case Formula::Tag::Var:
      fail(ErrorKind::BadArgument,
           "cannot translate an open formula: free variable " + psi->name);
    case Formula::Tag::Apply: {
      if (is_atom(*psi)) return {Stmt::assign(target, psi), c};
      // One auxiliary per argument, threaded left to right.
      std::vector<StmtPtr> stmts;
      std::vector<FormulaPtr> args;
      size_t cur = c;
      for (const auto& k : psi->kids) {
        std::string t = aux_label(cur);
        auto [s, next] = translate_formula(k, t, cur + 1);
        stmts.push_back(s);
        args.push_back(Formula::label(t));
        cur = next;
      }
      stmts.push_back(Stmt::assign(target, Formula::apply(psi->name, std::move(args))));
      return {Stmt::seq_all(std::move(stmts)), cur};
    }
    case Formula::Tag::Modal: {
      std::string t = aux_label(c);
      auto [s, next] = translate_formula(psi->kids[0], t, c + 1);
      FormulaPtr modal = Formula::modal(psi->out, psi->alpha, psi->agg, Formula::label(t));
      return {Stmt::seq(s, Stmt::assign(target, modal)), next};
    }
    case Formula::Tag::Mu:
    case Formula::Tag::Nu: {
      bool is_mu = psi->tag == Formula::Tag::Mu;
      std::string prev = aux_label(c);        // x_c: previous iterate
      std::string curr = aux_label(c + 1);    // x_{c+1}: current iterate
      FormulaPtr body = subst_var_with_label(psi->kids[0], psi->name, prev);
      auto [s, c2] = translate_formula(body, curr, c + 2);
      std::string guard = aux_label(c2);      // x_{c'}: stabilization flag
      FormulaPtr seed = Formula::apply(is_mu ? "bot" : "top", {body});
      StmtPtr loop_body = Stmt::seq_all(
          {Stmt::assign(prev, Formula::label(curr)), s,
           Stmt::assign(guard,
                        Formula::apply("equals", {Formula::label(prev), Formula::label(curr)}))});
      StmtPtr out = Stmt::seq_all(
          {Stmt::assign(prev, seed), Stmt::assign(curr, seed),
           Stmt::assign(guard, Formula::constant_of(Value::boolean(false))),
           Stmt::until(Formula::label(guard), loop_body),
           Stmt::assign(target, Formula::label(curr))});
      return {out, c2 + 1};
    }
  }
  fail(ErrorKind::Internal, "unreachable");
}

std::pair<StmtPtr, size_t> translate_program(const StmtPtr& p, size_t c) {
  switch (p->tag) {
    case Stmt::Tag::Skip:
    case Stmt::Tag::Free: return {p, c};
    case Stmt::Tag::Assign: {
      auto [s, c2] = translate_formula(p->formula, p->label, c);
      if (c2 == c) return {s, c2};
      std::vector<std::string> freed;
      for (size_t i = c; i < c2; ++i) freed.push_back(aux_label(i));
      return {Stmt::seq(s, Stmt::free_labels(std::move(freed))), c2};
    }
    case Stmt::Tag::Seq: {
      auto [s, c2] = translate_program(p->a, c);
      auto [r, c3] = translate_program(p->b, c2);
      return {Stmt::seq_all({s, wait_stmt(aux_label(c3)), r}), c3 + 1};
    }
    case Stmt::Tag::If: {
      std::string guard = aux_label(c);
      auto [r, c2] = translate_formula(p->formula, guard, c + 1);
      auto [s1, c3] = translate_program(p->a, c2);
      auto [s2, c4] = translate_program(p->b, c3);
      return {Stmt::seq(r, Stmt::if_else(Formula::label(guard), s1, s2)), c4};
    }
    case Stmt::Tag::Until: {
      std::string guard = aux_label(c);
      auto [r, c2] = translate_formula(p->formula, guard, c + 1);
      auto [s, c3] = translate_program(p->a, c2);
      StmtPtr body = Stmt::seq_all({s, wait_stmt(aux_label(c3)), r});
      return {Stmt::seq(r, Stmt::until(Formula::label(guard), body)), c3 + 1};
    }
  }
  fail(ErrorKind::Internal, "unreachable");
}

namespace {

void collect_freed(const Stmt& p, std::vector<std::string>& out) {
  if (p.tag == Stmt::Tag::Free)
    out.insert(out.end(), p.freed.begin(), p.freed.end());
  for (const auto& k : {p.a, p.b})
    if (k) collect_freed(*k, out);
}

json erased_labels(const Field& f) {
  json out = json::object();
  for (const auto& name : f.node_label_names()) {
    if (is_aux_label(name)) continue;
    json values = json::object();
    for (const auto& [n, v] : f.node_label(name).values) values[n] = v.to_json();
    out[name] = values;
  }
  return out;
}

}  // namespace

DifferentialReport differential_check(const StmtPtr& p, const Field& f, size_t fuel,
                                      const EvalOptions& opts) {
  DifferentialReport rep;
  auto [saf, counter] = translate_program(p, 0);
  (void)counter;
  // Hygiene: the translation may only add frees of auxiliary labels; frees
  // already present in the source pass through untouched.
  std::vector<std::string> freed, source_freed;
  collect_freed(*saf, freed);
  collect_freed(*p, source_freed);
  for (const auto& l : freed)
    if (!is_aux_label(l) &&
        std::find(source_freed.begin(), source_freed.end(), l) == source_freed.end()) {
      rep.ok = false;
      rep.detail = "translation freed a source label: " + l;
      return rep;
    }

  RunResult direct = run(p, f, fuel, {}, opts);
  RunResult via_saf = run(saf, f, fuel, {}, opts);
  rep.direct_steps = direct.steps;
  rep.saf_steps = via_saf.steps;

  json a = erased_labels(direct.field);
  json b = erased_labels(via_saf.field);
  if (a != b) {
    rep.ok = false;
    for (const auto& [label, values] : a.items()) {
      if (!b.contains(label)) {
        rep.detail = "label " + label + " missing from the SAF run";
        return rep;
      }
      for (const auto& [n, v] : values.items())
        if (b.at(label).value(n, json()) != v) {
          rep.detail = "first difference at (" + label + ", " + n + "): direct " + v.dump() +
                       " vs SAF " + b.at(label).value(n, json()).dump();
          return rep;
        }
    }
    for (const auto& [label, values] : b.items())
      if (!a.contains(label)) {
        rep.detail = "label " + label + " only present in the SAF run";
        return rep;
      }
    rep.detail = "fields differ";
  }
  return rep;
}

}  // namespace smuc
