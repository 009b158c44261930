#include "smuc/formula.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "smuc/errors.hpp"

namespace smuc {

// ----------------------------------------------------------------- builders

FormulaPtr Formula::label(std::string name) {
  auto f = std::make_shared<Formula>();
  f->tag = Tag::Label;
  f->name = std::move(name);
  return f;
}

FormulaPtr Formula::var(std::string name) {
  auto f = std::make_shared<Formula>();
  f->tag = Tag::Var;
  f->name = std::move(name);
  return f;
}

FormulaPtr Formula::constant_of(Value v) {
  auto f = std::make_shared<Formula>();
  f->tag = Tag::Const;
  f->constant = std::move(v);
  return f;
}

FormulaPtr Formula::apply(std::string fn, std::vector<FormulaPtr> args) {
  auto f = std::make_shared<Formula>();
  f->tag = Tag::Apply;
  f->name = std::move(fn);
  f->kids = std::move(args);
  return f;
}

FormulaPtr Formula::modal(bool out, std::string alpha, std::string agg, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->tag = Tag::Modal;
  f->out = out;
  f->alpha = std::move(alpha);
  f->agg = std::move(agg);
  f->kids = {std::move(body)};
  return f;
}

FormulaPtr Formula::mu(std::string var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->tag = Tag::Mu;
  f->name = std::move(var);
  f->kids = {std::move(body)};
  return f;
}

FormulaPtr Formula::nu(std::string var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->tag = Tag::Nu;
  f->name = std::move(var);
  f->kids = {std::move(body)};
  return f;
}

bool formula_equal(const Formula& a, const Formula& b) {
  if (a.tag != b.tag || a.name != b.name || a.out != b.out || a.alpha != b.alpha ||
      a.agg != b.agg || a.kids.size() != b.kids.size())
    return false;
  if (a.tag == Formula::Tag::Const && a.constant != b.constant) return false;
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (!formula_equal(*a.kids[i], *b.kids[i])) return false;
  return true;
}

// -------------------------------------------------------------------- lexer

namespace detail {

Lexer::Lexer(const std::string& text) {
  size_t line = 1, col = 1;
  size_t i = 0;
  auto push = [&](Token::Kind k, std::string t, size_t l, size_t c) {
    toks_.push_back(Token{k, std::move(t), l, c});
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    size_t startc = col;
    if (isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::string id;
      while (i < text.size() &&
             (isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' || text[i] == '$' ||
              text[i] == '\'' || (text[i] == ':' && !id.empty() && id[0] == '$'))) {
        id += text[i++];
        ++col;
      }
      push(Token::Kind::Ident, id, line, startc);
      continue;
    }
    if (isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      while (i < text.size() && (isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.' ||
                                 text[i] == '/')) {
        num += text[i++];
        ++col;
      }
      push(Token::Kind::Number, num, line, startc);
      continue;
    }
    if (c == '<' && i + 1 < text.size() && text[i + 1] == '-') {
      push(Token::Kind::Punct, "<-", line, startc);
      i += 2;
      col += 2;
      continue;
    }
    static const std::string puncts = "<>().,;:{}";
    if (puncts.find(c) != std::string::npos) {
      push(Token::Kind::Punct, std::string(1, c), line, startc);
      ++i;
      ++col;
      continue;
    }
    throw Error(ErrorKind::Syntax, "unexpected character '" + std::string(1, c) + "' at line " +
                                       std::to_string(line) + ", column " + std::to_string(col));
  }
  push(Token::Kind::End, "", line, col);
}

bool Lexer::accept(const std::string& t) {
  const Token& tok = peek();
  if (tok.kind == Token::Kind::End) return false;
  if (tok.text == t) {
    next();
    return true;
  }
  return false;
}

void Lexer::expect(const std::string& t, const std::string& what) {
  if (!accept(t)) error("expected '" + t + "' " + what + ", got '" + peek().text + "'");
}

void Lexer::error(const std::string& msg) const {
  const Token& tok = peek();
  throw Error(ErrorKind::Syntax, msg + " (line " + std::to_string(tok.line) + ", column " +
                                     std::to_string(tok.col) + ")");
}

namespace {

std::string fresh_binder(std::string base, const std::set<std::string>& taken) {
  while (taken.count(base)) base += "'";
  return base;
}

}  // namespace

FormulaPtr parse_formula_at(Lexer& lex, std::set<std::string>& bound_seen,
                            std::vector<std::string>& scope) {
  const Token& t = lex.peek();
  if (t.kind == Token::Kind::Ident && (t.text == "mu" || t.text == "nu")) {
    bool is_mu = t.text == "mu";
    lex.next();
    const Token& v = lex.peek();
    if (v.kind != Token::Kind::Ident) lex.error("expected a variable after mu/nu");
    std::string var = lex.next().text;
    std::string renamed = fresh_binder(var, bound_seen);
    bound_seen.insert(renamed);
    lex.expect(".", "after the fixpoint variable");
    scope.push_back(renamed);
    // While this binder is in scope, occurrences of the surface name resolve
    // to the renamed variable.
    scope.push_back(var + "\x01" + renamed);  // alias record
    FormulaPtr body = parse_formula_at(lex, bound_seen, scope);
    scope.pop_back();
    scope.pop_back();
    return is_mu ? Formula::mu(renamed, std::move(body)) : Formula::nu(renamed, std::move(body));
  }
  if (t.kind == Token::Kind::Punct && t.text == "<") {
    lex.next();
    const Token& dir = lex.peek();
    if (dir.kind != Token::Kind::Ident || (dir.text != "out" && dir.text != "in"))
      lex.error("modal operator starts with <out or <in");
    bool out = lex.next().text == "out";
    std::string alpha = "id";
    if (lex.peek().kind == Token::Kind::Ident) alpha = lex.next().text;
    lex.expect(":", "before the modal aggregator");
    if (lex.peek().kind != Token::Kind::Ident) lex.error("expected an aggregator name");
    std::string agg = lex.next().text;
    lex.expect(">", "to close the modal operator");
    FormulaPtr body = parse_formula_at(lex, bound_seen, scope);
    return Formula::modal(out, std::move(alpha), std::move(agg), std::move(body));
  }
  if (t.kind == Token::Kind::Punct && t.text == "(") {
    lex.next();
    FormulaPtr inner = parse_formula_at(lex, bound_seen, scope);
    lex.expect(")", "to close the group");
    return inner;
  }
  if (t.kind == Token::Kind::Number) {
    std::string num = lex.next().text;
    return Formula::constant_of(Value::num(Rat::parse(num)));
  }
  if (t.kind == Token::Kind::Ident) {
    std::string id = lex.next().text;
    if (id == "true") return Formula::constant_of(Value::boolean(true));
    if (id == "false") return Formula::constant_of(Value::boolean(false));
    if (id == "inf") return Formula::constant_of(Value::num(Rat::infinity()));
    if (id == "any") return Formula::constant_of(Value::eq_atom(EqAtom::Any));
    if (id == "none") return Formula::constant_of(Value::eq_atom(EqAtom::None));
    if (id == "eps") return Formula::constant_of(Value::path(PathWord{}));
    if (lex.peek().kind == Token::Kind::Punct && lex.peek().text == "(") {
      lex.next();
      std::vector<FormulaPtr> args;
      if (!lex.accept(")")) {
        args.push_back(parse_formula_at(lex, bound_seen, scope));
        while (lex.accept(",")) args.push_back(parse_formula_at(lex, bound_seen, scope));
        lex.expect(")", "to close the argument list");
      }
      return Formula::apply(std::move(id), std::move(args));
    }
    // Resolve through binder aliases, innermost first.
    for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
      auto sep = it->find('\x01');
      if (sep != std::string::npos && it->substr(0, sep) == id)
        return Formula::var(it->substr(sep + 1));
      if (sep == std::string::npos && *it == id) return Formula::var(id);
    }
    return Formula::label(std::move(id));
  }
  lex.error("expected a formula");
  return nullptr;
}

}  // namespace detail

FormulaPtr parse_formula(const std::string& text) {
  detail::Lexer lex(text);
  std::set<std::string> bound;
  std::vector<std::string> scope;
  FormulaPtr f = detail::parse_formula_at(lex, bound, scope);
  if (lex.peek().kind != detail::Token::Kind::End) lex.error("trailing input after formula");
  return f;
}

// ------------------------------------------------------------------ printer

static void print_rec(const Formula& f, std::ostringstream& out) {
  switch (f.tag) {
    case Formula::Tag::Label:
    case Formula::Tag::Var: out << f.name; return;
    case Formula::Tag::Const: {
      const Value& v = f.constant;
      switch (v.kind()) {
        case Value::Kind::Bool: out << (v.as_bool() ? "true" : "false"); return;
        case Value::Kind::Num:
          out << (v.as_num().is_inf() ? "inf" : v.as_num().is_integer()
                                                    ? std::to_string(v.as_num().to_long())
                                                    : v.as_num().str());
          return;
        case Value::Kind::Eq: out << (v.as_eq() == EqAtom::Any ? "any" : "none"); return;
        case Value::Kind::Path:
          if (!v.as_path().top && v.as_path().nodes.empty()) {
            out << "eps";
            return;
          }
          [[fallthrough]];
        default: fail(ErrorKind::BadArgument, "constant " + v.str() + " has no concrete syntax");
      }
    }
    case Formula::Tag::Apply: {
      out << f.name << "(";
      for (size_t i = 0; i < f.kids.size(); ++i) {
        if (i) out << ", ";
        print_rec(*f.kids[i], out);
      }
      out << ")";
      return;
    }
    case Formula::Tag::Modal: {
      out << "<" << (f.out ? "out" : "in");
      if (f.alpha != "id") out << " " << f.alpha;
      out << ":" << f.agg << "> ";
      print_rec(*f.kids[0], out);
      return;
    }
    case Formula::Tag::Mu:
    case Formula::Tag::Nu: {
      out << (f.tag == Formula::Tag::Mu ? "mu " : "nu ") << f.name << ". ";
      print_rec(*f.kids[0], out);
      return;
    }
  }
}

std::string print_formula(const Formula& f) {
  std::ostringstream out;
  print_rec(f, out);
  return out.str();
}

// ---------------------------------------------------------------- free vars

static void free_vars_rec(const Formula& f, std::set<std::string>& bound,
                          std::set<std::string>& out) {
  switch (f.tag) {
    case Formula::Tag::Var:
      if (!bound.count(f.name)) out.insert(f.name);
      return;
    case Formula::Tag::Mu:
    case Formula::Tag::Nu: {
      bool fresh = bound.insert(f.name).second;
      free_vars_rec(*f.kids[0], bound, out);
      if (fresh) bound.erase(f.name);
      return;
    }
    default:
      for (const auto& k : f.kids) free_vars_rec(*k, bound, out);
  }
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> bound, out;
  free_vars_rec(f, bound, out);
  return out;
}

bool closed_under(const Formula& f, const Environment& env) {
  for (const auto& v : free_vars(f))
    if (!env.count(v)) return false;
  return true;
}

FormulaPtr subst_var_with_label(const FormulaPtr& f, const std::string& var,
                                const std::string& label) {
  switch (f->tag) {
    case Formula::Tag::Var: return f->name == var ? Formula::label(label) : f;
    case Formula::Tag::Label:
    case Formula::Tag::Const: return f;
    case Formula::Tag::Mu:
    case Formula::Tag::Nu:
      if (f->name == var) return f;  // shadowed (cannot happen after alpha renaming)
      [[fallthrough]];
    default: {
      auto copy = std::make_shared<Formula>(*f);
      for (auto& k : copy->kids) k = subst_var_with_label(k, var, label);
      return copy;
    }
  }
}

// -------------------------------------------------------------- registries

namespace {

struct Registries {
  std::map<std::string, FunctionDef> functions;
  std::map<std::string, AggregatorDef> aggregators;
};

Registries& regs();

Value fold_join(const Domain* d, const std::vector<Value>& vs) {
  require(d != nullptr, ErrorKind::TypeMismatch, "aggregation needs an inferable domain");
  Value acc = d->bottom();
  for (const auto& v : vs) acc = d->join(acc, v);
  return acc;
}

Value fold_meet(const Domain* d, const std::vector<Value>& vs) {
  require(d != nullptr, ErrorKind::TypeMismatch, "aggregation needs an inferable domain");
  Value acc = d->top();
  for (const auto& v : vs) acc = d->meet(acc, v);
  return acc;
}

DomainPtr unify(const std::vector<DomainPtr>& ds) {
  DomainPtr found;
  for (const auto& d : ds) {
    if (!d) continue;
    if (!found) {
      found = d;
      continue;
    }
    require(found->same(*d), ErrorKind::TypeMismatch,
            "mixed domains: " + found->str() + " vs " + d->str());
  }
  return found;
}

void register_builtins() {
  auto same_domain = [](const std::vector<DomainPtr>& ds) { return unify(ds); };
  auto bool_domain = [](const std::vector<DomainPtr>&) { return Domain::boolean(); };

  register_function("or", {1, -1, true, {},
                           [](const FnCtx&, const std::vector<Value>& vs) {
                             bool b = false;
                             for (const auto& v : vs) b = b || v.as_bool();
                             return Value::boolean(b);
                           },
                           bool_domain});
  register_function("and", {1, -1, true, {},
                            [](const FnCtx&, const std::vector<Value>& vs) {
                              bool b = true;
                              for (const auto& v : vs) b = b && v.as_bool();
                              return Value::boolean(b);
                            },
                            bool_domain});
  register_function("not", {1, 1, false, {},
                            [](const FnCtx&, const std::vector<Value>& vs) {
                              return Value::boolean(!vs[0].as_bool());
                            },
                            bool_domain});
  register_function("min", {1, -1, true, {},
                            [](const FnCtx&, const std::vector<Value>& vs) {
                              Rat m = vs[0].as_num();
                              for (const auto& v : vs) m = rat_min(m, v.as_num());
                              return Value::num(m);
                            },
                            same_domain});
  register_function("max", {1, -1, true, {},
                            [](const FnCtx&, const std::vector<Value>& vs) {
                              Rat m = vs[0].as_num();
                              for (const auto& v : vs) m = rat_max(m, v.as_num());
                              return Value::num(m);
                            },
                            same_domain});
  // Lexicographic select: join/meet of the (cost, tiebreak) lexicographic
  // domain, i.e. best cost first, then the tiebreak component.
  register_function("min1", {1, -1, true, {},
                             [](const FnCtx& ctx, const std::vector<Value>& vs) {
                               require(ctx.domain, ErrorKind::TypeMismatch,
                                       "min1 needs an inferable domain");
                               Value acc = vs[0];
                               for (const auto& v : vs) acc = ctx.domain->join(acc, v);
                               return acc;
                             },
                             same_domain});
  register_function("max1", {1, -1, true, {},
                             [](const FnCtx& ctx, const std::vector<Value>& vs) {
                               require(ctx.domain, ErrorKind::TypeMismatch,
                                       "max1 needs an inferable domain");
                               Value acc = vs[0];
                               for (const auto& v : vs) acc = ctx.domain->meet(acc, v);
                               return acc;
                             },
                             same_domain});
  for (const char* name : {"cup", "join"})
    register_function(name, {1, -1, true, {},
                             [](const FnCtx& ctx, const std::vector<Value>& vs) {
                               require(ctx.domain, ErrorKind::TypeMismatch,
                                       "join needs an inferable domain");
                               Value acc = vs[0];
                               for (const auto& v : vs) acc = ctx.domain->join(acc, v);
                               return acc;
                             },
                             same_domain});
  for (const char* name : {"cap", "meet"})
    register_function(name, {1, -1, true, {},
                             [](const FnCtx& ctx, const std::vector<Value>& vs) {
                               require(ctx.domain, ErrorKind::TypeMismatch,
                                       "meet needs an inferable domain");
                               Value acc = vs[0];
                               for (const auto& v : vs) acc = ctx.domain->meet(acc, v);
                               return acc;
                             },
                             same_domain});
  register_function("plus", {1, -1, true, {},
                             [](const FnCtx& ctx, const std::vector<Value>& vs) {
                               require(ctx.domain, ErrorKind::TypeMismatch,
                                       "plus needs an inferable domain");
                               return ctx.domain->semiring_plus(vs);
                             },
                             same_domain});
  register_function("times", {2, 2, true, {},
                              [](const FnCtx& ctx, const std::vector<Value>& vs) {
                                require(ctx.domain, ErrorKind::TypeMismatch,
                                        "times needs an inferable domain");
                                return ctx.domain->semiring_times(vs[0], vs[1]);
                              },
                              same_domain});
  register_function("equals", {2, 2, false, {},
                               [](const FnCtx&, const std::vector<Value>& vs) {
                                 return Value::boolean(vs[0] == vs[1]);
                               },
                               bool_domain});
  register_function("neq", {2, 2, false, {},
                            [](const FnCtx&, const std::vector<Value>& vs) {
                              return Value::boolean(vs[0] != vs[1]);
                            },
                            bool_domain});
  register_function("ite", {3, 3, false, {},
                            [](const FnCtx&, const std::vector<Value>& vs) {
                              return vs[0].as_bool() ? vs[1] : vs[2];
                            },
                            [](const std::vector<DomainPtr>& ds) {
                              return unify({ds.size() > 1 ? ds[1] : nullptr,
                                            ds.size() > 2 ? ds[2] : nullptr});
                            }});
  register_function("pair", {2, 2, false, {},
                             [](const FnCtx&, const std::vector<Value>& vs) {
                               return Value::tuple({vs[0], vs[1]});
                             },
                             [](const std::vector<DomainPtr>&) { return DomainPtr(); }});
  register_function("fst", {1, 1, false, {},
                            [](const FnCtx&, const std::vector<Value>& vs) {
                              return vs[0].elems().at(0);
                            },
                            [](const std::vector<DomainPtr>& ds) {
                              if (ds[0] && !ds[0]->parts().empty()) return ds[0]->parts()[0];
                              return DomainPtr();
                            }});
  register_function("snd", {1, 1, false, {},
                            [](const FnCtx&, const std::vector<Value>& vs) {
                              return vs[0].elems().at(1);
                            },
                            [](const std::vector<DomainPtr>& ds) {
                              if (ds[0] && ds[0]->parts().size() > 1) return ds[0]->parts()[1];
                              return DomainPtr();
                            }});
  register_function("isempty", {1, 1, false, {},
                                [](const FnCtx&, const std::vector<Value>& vs) {
                                  return Value::boolean(vs[0].elems().empty());
                                },
                                bool_domain});
  register_function("self", {0, 0, true, {},
                             [](const FnCtx& ctx, const std::vector<Value>&) {
                               return Value::node(ctx.node);
                             },
                             [](const std::vector<DomainPtr>&) { return DomainPtr(); }});
  // eq values (any/none plus the merged value) live outside every declared
  // domain, so eq results stay untyped.
  register_function("eq", {1, -1, false, {},
                           [](const FnCtx&, const std::vector<Value>& vs) { return eq_merge(vs); },
                           [](const std::vector<DomainPtr>&) { return DomainPtr(); }});
  // bot(F)/top(F) evaluate to the bottom/top of F's domain without touching F.
  for (const char* name : {"bot", "top"}) {
    bool is_bot = std::string(name) == "bot";
    register_function(name, {1, 1, true, {},
                             [is_bot](const FnCtx& ctx, const std::vector<Value>&) -> Value {
                               require(ctx.domain, ErrorKind::TypeMismatch,
                                       "bot/top need an inferable domain");
                               return is_bot ? ctx.domain->bottom() : ctx.domain->top();
                             },
                             same_domain});
  }

  register_aggregator("or", {true, [](const Domain*, const std::vector<Value>& vs) {
                               bool b = false;
                               for (const auto& v : vs) b = b || v.as_bool();
                               return Value::boolean(b);
                             }});
  register_aggregator("and", {true, [](const Domain*, const std::vector<Value>& vs) {
                                bool b = true;
                                for (const auto& v : vs) b = b && v.as_bool();
                                return Value::boolean(b);
                              }});
  register_aggregator("min", {true, [](const Domain*, const std::vector<Value>& vs) {
                                Rat m = Rat::infinity();
                                for (const auto& v : vs) m = rat_min(m, v.as_num());
                                return Value::num(m);
                              }});
  register_aggregator("max", {true, [](const Domain*, const std::vector<Value>& vs) {
                                Rat m(0);
                                for (const auto& v : vs) m = rat_max(m, v.as_num());
                                return Value::num(m);
                              }});
  for (const char* name : {"cup", "join", "min1"}) register_aggregator(name, {true, fold_join});
  for (const char* name : {"cap", "meet", "max1"}) register_aggregator(name, {true, fold_meet});
  register_aggregator("plus", {true, [](const Domain* d, const std::vector<Value>& vs) {
                                 require(d != nullptr, ErrorKind::TypeMismatch,
                                         "plus aggregation needs an inferable domain");
                                 return d->semiring_plus(vs);
                               }});
  register_aggregator("times", {true, [](const Domain* d, const std::vector<Value>& vs) {
                                  require(d != nullptr, ErrorKind::TypeMismatch,
                                          "times aggregation needs an inferable domain");
                                  Value acc = d->top();
                                  for (const auto& v : vs) acc = d->semiring_times(acc, v);
                                  return acc;
                                }});
  register_aggregator("eq", {false, [](const Domain*, const std::vector<Value>& vs) {
                               return eq_merge(vs);
                             }});
}

Registries& regs() {
  static Registries r;
  return r;
}

// Registration is single-threaded startup work; the flag is set before the
// builtin registrations run so they can reuse the public entry points.
void ensure_builtins() {
  static bool done = false;
  if (!done) {
    done = true;
    register_builtins();
  }
}

}  // namespace

Value eq_merge(const std::vector<Value>& vs) {
  Value acc = Value::eq_atom(EqAtom::Any);
  for (const auto& v : vs) {
    if (v.is(Value::Kind::Eq) && v.as_eq() == EqAtom::None) return Value::eq_atom(EqAtom::None);
    if (v.is(Value::Kind::Eq) && v.as_eq() == EqAtom::Any) continue;
    if (acc.is(Value::Kind::Eq) && acc.as_eq() == EqAtom::Any) {
      acc = v;
      continue;
    }
    if (acc != v) return Value::eq_atom(EqAtom::None);
  }
  return acc;
}

void register_function(const std::string& name, FunctionDef def) {
  ensure_builtins();
  require(regs().functions.emplace(name, std::move(def)).second, ErrorKind::BadArgument,
          "duplicate function name: " + name);
}

void register_aggregator(const std::string& name, AggregatorDef def) {
  ensure_builtins();
  require(regs().aggregators.emplace(name, std::move(def)).second, ErrorKind::BadArgument,
          "duplicate aggregator name: " + name);
}

const FunctionDef& function_def(const std::string& name) {
  ensure_builtins();
  auto it = regs().functions.find(name);
  require(it != regs().functions.end(), ErrorKind::UnknownName, "unknown function: " + name);
  return it->second;
}

const AggregatorDef& aggregator_def(const std::string& name) {
  ensure_builtins();
  auto it = regs().aggregators.find(name);
  require(it != regs().aggregators.end(), ErrorKind::UnknownName, "unknown aggregator: " + name);
  return it->second;
}

bool function_registered(const std::string& name) {
  ensure_builtins();
  return regs().functions.count(name) > 0;
}

bool aggregator_registered(const std::string& name) {
  ensure_builtins();
  return regs().aggregators.count(name) > 0;
}

// ---------------------------------------------------------------- inference

static DomainPtr infer_rec(const Formula& f, const Field& field,
                           std::map<std::string, DomainPtr>& vars, TypeMap& out,
                           const std::map<std::string, DomainPtr>* extra) {
  DomainPtr d;
  switch (f.tag) {
    case Formula::Tag::Label:
      if (field.has_node_label(f.name)) {
        d = field.node_label(f.name).domain;
      } else if (extra) {
        auto it = extra->find(f.name);
        if (it != extra->end()) d = it->second;
      }
      break;
    case Formula::Tag::Var: {
      auto it = vars.find(f.name);
      if (it != vars.end()) d = it->second;
      break;
    }
    case Formula::Tag::Const:
      switch (f.constant.kind()) {
        case Value::Kind::Bool: d = Domain::boolean(); break;
        default: break;  // numeric and other literals adopt the context domain
      }
      break;
    case Formula::Tag::Apply: {
      const FunctionDef& def = function_def(f.name);
      std::vector<DomainPtr> kds;
      for (const auto& k : f.kids) kds.push_back(infer_rec(*k, field, vars, out, extra));
      if (def.infer) d = def.infer(kds);
      break;
    }
    case Formula::Tag::Modal: {
      (void)aggregator_def(f.agg);
      d = infer_rec(*f.kids[0], field, vars, out, extra);
      if (f.agg == "eq") d = nullptr;  // eq aggregation leaves the domain
      break;
    }
    case Formula::Tag::Mu:
    case Formula::Tag::Nu: {
      vars[f.name] = nullptr;
      DomainPtr body = infer_rec(*f.kids[0], field, vars, out, extra);
      if (body) {
        // Second pass resolves uses of the bound variable.
        vars[f.name] = body;
        body = infer_rec(*f.kids[0], field, vars, out, extra);
      }
      vars.erase(f.name);
      d = body;
      break;
    }
  }
  if (d) out[&f] = d;
  return d;
}

DomainPtr infer_domains(const Formula& f, const Field& field,
                        const std::map<std::string, DomainPtr>& var_domains, TypeMap& out,
                        const std::map<std::string, DomainPtr>* extra_labels) {
  std::map<std::string, DomainPtr> vars = var_domains;
  return infer_rec(f, field, vars, out, extra_labels);
}

// ------------------------------------------------------------ monotonicity

static void check_rec(const Formula& f, const Field& field, bool under_fix, const TypeMap& types,
                      MonotoneReport& rep, Rng& rng, bool probe) {
  if (!rep.accepted) return;
  switch (f.tag) {
    case Formula::Tag::Label:
    case Formula::Tag::Var:
    case Formula::Tag::Const: return;
    case Formula::Tag::Apply: {
      const FunctionDef& def = function_def(f.name);
      if (under_fix && !def.monotone) {
        rep.accepted = false;
        rep.offender = f.name;
        return;
      }
      for (const auto& k : f.kids) check_rec(*k, field, under_fix, types, rep, rng, probe);
      return;
    }
    case Formula::Tag::Modal: {
      const AggregatorDef& def = aggregator_def(f.agg);
      if (under_fix && !def.monotone) {
        rep.accepted = false;
        rep.offender = f.agg;
        return;
      }
      if (under_fix && probe && f.alpha != "id") {
        auto it = types.find(f.kids[0].get());
        const Domain* d = it == types.end() ? nullptr : it->second.get();
        if (d) {
          for (const auto& e : field.edges()) {
            auto mono = probe_capability_monotone(field, f.alpha, e, *d, 6, rng);
            if (!mono.monotone) {
              rep.accepted = false;
              rep.offender = mono.detail;
              return;
            }
          }
        }
      }
      check_rec(*f.kids[0], field, under_fix, types, rep, rng, probe);
      return;
    }
    case Formula::Tag::Mu:
    case Formula::Tag::Nu:
      check_rec(*f.kids[0], field, true, types, rep, rng, probe);
      return;
  }
}

MonotoneReport check_monotone(const Formula& f, const Field& field, uint64_t probe_seed,
                              bool probe_capabilities) {
  TypeMap types;
  infer_domains(f, field, {}, types);
  MonotoneReport rep;
  Rng rng(probe_seed);
  check_rec(f, field, false, types, rep, rng, probe_capabilities);
  return rep;
}

}  // namespace smuc
