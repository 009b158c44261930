#include "smuc/program.hpp"

#include <sstream>

#include "smuc/errors.hpp"

namespace smuc {

StmtPtr Stmt::skip() {
  auto s = std::make_shared<Stmt>();
  s->tag = Tag::Skip;
  return s;
}

StmtPtr Stmt::assign(std::string label, FormulaPtr rhs) {
  auto s = std::make_shared<Stmt>();
  s->tag = Tag::Assign;
  s->label = std::move(label);
  s->formula = std::move(rhs);
  return s;
}

StmtPtr Stmt::seq(StmtPtr a, StmtPtr b) {
  auto s = std::make_shared<Stmt>();
  s->tag = Tag::Seq;
  s->a = std::move(a);
  s->b = std::move(b);
  return s;
}

StmtPtr Stmt::seq_all(std::vector<StmtPtr> stmts) {
  if (stmts.empty()) return skip();
  StmtPtr out = stmts.back();
  for (size_t i = stmts.size() - 1; i-- > 0;) out = seq(stmts[i], out);
  return out;
}

StmtPtr Stmt::if_else(FormulaPtr guard, StmtPtr then_branch, StmtPtr else_branch) {
  auto s = std::make_shared<Stmt>();
  s->tag = Tag::If;
  s->formula = std::move(guard);
  s->a = std::move(then_branch);
  s->b = std::move(else_branch);
  return s;
}

StmtPtr Stmt::until(FormulaPtr guard, StmtPtr body) {
  auto s = std::make_shared<Stmt>();
  s->tag = Tag::Until;
  s->formula = std::move(guard);
  s->a = std::move(body);
  return s;
}

StmtPtr Stmt::free_labels(std::vector<std::string> labels) {
  require(!labels.empty(), ErrorKind::BadArgument, "free() needs at least one label");
  auto s = std::make_shared<Stmt>();
  s->tag = Tag::Free;
  s->freed = std::move(labels);
  return s;
}

namespace {

// Linearizes a sequence spine, dropping skip units, so equality does not
// depend on how seq trees associate.
void seq_items(const Stmt& s, std::vector<const Stmt*>& out) {
  if (s.tag == Stmt::Tag::Seq) {
    seq_items(*s.a, out);
    seq_items(*s.b, out);
    return;
  }
  if (s.tag != Stmt::Tag::Skip) out.push_back(&s);
}

bool stmt_equal_one(const Stmt& a, const Stmt& b) {
  if (a.tag != b.tag || a.label != b.label || a.freed != b.freed) return false;
  if ((a.formula == nullptr) != (b.formula == nullptr)) return false;
  if (a.formula && !formula_equal(*a.formula, *b.formula)) return false;
  for (auto [x, y] : {std::pair{a.a, b.a}, std::pair{a.b, b.b}}) {
    if ((x == nullptr) != (y == nullptr)) return false;
    if (x && !stmt_equal(*x, *y)) return false;
  }
  return true;
}

}  // namespace

bool stmt_equal(const Stmt& a, const Stmt& b) {
  std::vector<const Stmt*> xs, ys;
  seq_items(a, xs);
  seq_items(b, ys);
  if (xs.size() != ys.size()) return false;
  if (xs.empty()) return true;  // both reduce to skip
  for (size_t i = 0; i < xs.size(); ++i)
    if (!stmt_equal_one(*xs[i], *ys[i])) return false;
  return true;
}

// ------------------------------------------------------------------- parser

namespace {

const std::set<std::string> kStmtKeywords = {"skip", "free", "if",   "then",
                                             "else", "until", "do"};

StmtPtr parse_stmt(detail::Lexer& lex);

StmtPtr parse_block(detail::Lexer& lex) {
  if (lex.accept("{")) {
    std::vector<StmtPtr> stmts;
    if (!lex.accept("}")) {
      stmts.push_back(parse_stmt(lex));
      while (lex.accept(";")) {
        if (lex.peek().text == "}") break;
        stmts.push_back(parse_stmt(lex));
      }
      lex.expect("}", "to close the block");
    }
    return Stmt::seq_all(std::move(stmts));
  }
  return parse_stmt(lex);
}

// Binder hygiene is per formula: every right-hand side gets a fresh rename
// set, so identical formula texts parse to identical trees.
FormulaPtr parse_rhs(detail::Lexer& lex) {
  std::set<std::string> bound;
  std::vector<std::string> scope;
  return detail::parse_formula_at(lex, bound, scope);
}

StmtPtr parse_stmt(detail::Lexer& lex) {
  const auto& t = lex.peek();
  if (t.text == "skip") {
    lex.next();
    return Stmt::skip();
  }
  if (t.text == "free") {
    lex.next();
    lex.expect("(", "after free");
    std::vector<std::string> labels;
    labels.push_back(lex.next().text);
    while (lex.accept(",")) labels.push_back(lex.next().text);
    lex.expect(")", "to close free");
    return Stmt::free_labels(std::move(labels));
  }
  if (t.text == "if") {
    lex.next();
    FormulaPtr guard = parse_rhs(lex);
    lex.expect("then", "after the if guard");
    StmtPtr then_branch = parse_block(lex);
    lex.expect("else", "after the then branch");
    StmtPtr else_branch = parse_block(lex);
    return Stmt::if_else(std::move(guard), std::move(then_branch), std::move(else_branch));
  }
  if (t.text == "until") {
    lex.next();
    FormulaPtr guard = parse_rhs(lex);
    lex.expect("do", "after the until guard");
    StmtPtr body = parse_block(lex);
    return Stmt::until(std::move(guard), std::move(body));
  }
  if (t.kind == detail::Token::Kind::Ident && !kStmtKeywords.count(t.text)) {
    std::string label = lex.next().text;
    lex.expect("<-", "in the assignment");
    FormulaPtr rhs = parse_rhs(lex);
    return Stmt::assign(std::move(label), std::move(rhs));
  }
  lex.error("expected a statement");
  return nullptr;
}

}  // namespace

StmtPtr parse_program(const std::string& text) {
  detail::Lexer lex(text);
  std::vector<StmtPtr> stmts;
  stmts.push_back(parse_stmt(lex));
  while (lex.accept(";")) {
    if (lex.peek().kind == detail::Token::Kind::End) break;
    stmts.push_back(parse_stmt(lex));
  }
  if (lex.peek().kind != detail::Token::Kind::End) lex.error("trailing input after program");
  return Stmt::seq_all(std::move(stmts));
}

// ------------------------------------------------------------------ printer

namespace {

void print_stmt(const Stmt& s, std::ostringstream& out, int indent);

void print_indent(std::ostringstream& out, int indent) {
  for (int i = 0; i < indent; ++i) out << "  ";
}

void print_block(const StmtPtr& s, std::ostringstream& out, int indent) {
  out << "{\n";
  print_stmt(*s, out, indent + 1);
  out << "\n";
  print_indent(out, indent);
  out << "}";
}

void print_stmt(const Stmt& s, std::ostringstream& out, int indent) {
  switch (s.tag) {
    case Stmt::Tag::Skip:
      print_indent(out, indent);
      out << "skip";
      return;
    case Stmt::Tag::Assign:
      print_indent(out, indent);
      out << s.label << " <- " << print_formula(*s.formula);
      return;
    case Stmt::Tag::Seq:
      print_stmt(*s.a, out, indent);
      out << ";\n";
      print_stmt(*s.b, out, indent);
      return;
    case Stmt::Tag::If:
      print_indent(out, indent);
      out << "if " << print_formula(*s.formula) << " then ";
      print_block(s.a, out, indent);
      out << " else ";
      print_block(s.b, out, indent);
      return;
    case Stmt::Tag::Until:
      print_indent(out, indent);
      out << "until " << print_formula(*s.formula) << " do ";
      print_block(s.a, out, indent);
      return;
    case Stmt::Tag::Free: {
      print_indent(out, indent);
      out << "free(";
      for (size_t i = 0; i < s.freed.size(); ++i) out << (i ? ", " : "") << s.freed[i];
      out << ")";
      return;
    }
  }
}

}  // namespace

std::string print_program(const Stmt& p) {
  std::ostringstream out;
  print_stmt(p, out, 0);
  return out.str();
}

// ---------------------------------------------------------------- semantics

namespace {

// Guards must be truth-valued at every node; the strict branch needs true
// everywhere.
bool guard_everywhere(const Field& f, const Formula& guard, const EvalOptions& opts) {
  NodeValuation v = eval_formula(f, {}, guard, opts);
  bool all = true;
  for (const auto& [n, val] : v) {
    if (!val.is(Value::Kind::Bool))
      fail(ErrorKind::TypeMismatch, "guard is not a truth value at node " + n + ": " + val.str());
    all = all && val.as_bool();
  }
  return all;
}

Field assign_into(Field f, const std::string& label, const Formula& rhs,
                  const EvalOptions& opts) {
  NodeValuation v = eval_formula(f, {}, rhs, opts);
  DomainPtr domain;
  if (f.has_node_label(label) && f.node_label(label).domain) {
    domain = f.node_label(label).domain;
  } else {
    // New labels adopt the inferred domain; plain data temporaries (bare
    // constants and tuples) may stay untyped.
    TypeMap types;
    domain = infer_domains(rhs, f, opts.var_domains, types);
  }
  if (domain)
    for (auto& [n, val] : v) val = domain->canonicalize(val);
  f.assign_node_label(label, domain, std::move(v));
  return f;
}

}  // namespace

StepResult step(const StmtPtr& p, const Field& f, const EvalOptions& opts) {
  require(!p->is_skip(), ErrorKind::BadArgument, "skip is terminal");
  switch (p->tag) {
    case Stmt::Tag::Assign:
      return {Stmt::skip(), assign_into(f, p->label, *p->formula, opts)};
    case Stmt::Tag::Free: {
      Field g = f;
      for (const auto& l : p->freed) g.remove_node_label(l);
      return {Stmt::skip(), std::move(g)};
    }
    case Stmt::Tag::Seq: {
      if (p->a->is_skip()) {
        if (p->b->is_skip()) return {Stmt::skip(), f};
        StepResult r = step(p->b, f, opts);
        return r;
      }
      StepResult r = step(p->a, f, opts);
      return {Stmt::seq(r.program, p->b), std::move(r.field)};
    }
    case Stmt::Tag::If:
      return {guard_everywhere(f, *p->formula, opts) ? p->a : p->b, f};
    case Stmt::Tag::Until: {
      if (guard_everywhere(f, *p->formula, opts)) return {Stmt::skip(), f};
      return {Stmt::seq(p->a, p), f};
    }
    default: fail(ErrorKind::Internal, "unreachable");
  }
}

namespace {

// Leftmost primitive statement about to fire, for run hooks.
const Stmt& head_of(const Stmt& s) {
  if (s.tag != Stmt::Tag::Seq) return s;
  const Stmt& h = head_of(*s.a);
  return h.tag == Stmt::Tag::Skip ? head_of(*s.b) : h;
}

}  // namespace

RunResult run(StmtPtr p, Field f, size_t fuel, const StepHook& hook, const EvalOptions& opts) {
  size_t steps = 0;
  while (!p->is_skip()) {
    require(steps < fuel, ErrorKind::FuelExhausted,
            "program did not terminate within " + std::to_string(fuel) + " steps");
    const Stmt& fired = head_of(*p);
    StepResult r = step(p, f, opts);
    p = std::move(r.program);
    f = std::move(r.field);
    ++steps;
    if (hook) hook(fired, f);
  }
  return {std::move(f), steps};
}

FormulaPtr agreement_formula(const FormulaPtr& psi) {
  FormulaPtr out_agg = Formula::modal(true, "id", "eq", psi);
  FormulaPtr in_agg = Formula::modal(false, "id", "eq", psi);
  FormulaPtr merged = Formula::apply("eq", {psi, out_agg, in_agg});
  return Formula::apply("neq", {merged, Formula::constant_of(Value::eq_atom(EqAtom::None))});
}

}  // namespace smuc
