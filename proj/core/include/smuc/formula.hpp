#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "smuc/errors.hpp"
#include "smuc/field.hpp"

namespace smuc {

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Formula AST. Binders are alpha-renamed at parse time so bound variables are
// pairwise distinct.
struct Formula {
  enum class Tag { Label, Var, Const, Apply, Modal, Mu, Nu };

  Tag tag;
  std::string name;             // label / var / function / binder name
  Value constant;               // Const
  bool out = true;              // Modal: follow outgoing edges?
  std::string alpha;            // Modal: edge label, "id" for the identity
  std::string agg;              // Modal: aggregator name
  std::vector<FormulaPtr> kids;

  static FormulaPtr label(std::string name);
  static FormulaPtr var(std::string name);
  static FormulaPtr constant_of(Value v);
  static FormulaPtr apply(std::string fn, std::vector<FormulaPtr> args);
  static FormulaPtr modal(bool out, std::string alpha, std::string agg, FormulaPtr body);
  static FormulaPtr mu(std::string var, FormulaPtr body);
  static FormulaPtr nu(std::string var, FormulaPtr body);

  bool is_fixpoint() const { return tag == Tag::Mu || tag == Tag::Nu; }
};

bool formula_equal(const Formula& a, const Formula& b);

FormulaPtr parse_formula(const std::string& text);
std::string print_formula(const Formula& f);

std::set<std::string> free_vars(const Formula& f);

// map variable -> node valuation
using Environment = std::map<std::string, NodeValuation>;

bool closed_under(const Formula& f, const Environment& env);

// Substitutes a label for a formula variable (used by the SAF translation).
FormulaPtr subst_var_with_label(const FormulaPtr& f, const std::string& var,
                                const std::string& label);

// ------------------------------------------------------------- registries

struct FnCtx {
  const Field& field;
  const std::string& node;
  const Domain* domain;  // inferred result domain, may be null
  const LabelReader* reader = nullptr;

  const Value& read_label(const std::string& label, const std::string& at) const {
    if (reader) {
      const Value* v = (*reader)(label, at);
      if (!v)
        fail(ErrorKind::UndefRead,
             "label " + label + " undefined at node " + at + " in the local view");
      return *v;
    }
    return field.label_value(label, at);
  }
};

struct FunctionDef {
  int min_args = 0;
  int max_args = -1;  // -1: variadic
  bool monotone = false;
  std::vector<std::string> reads;  // node labels consulted through the context
  std::function<Value(const FnCtx&, const std::vector<Value>&)> eval;
  // Result domain from argument domains (entries may be null).
  std::function<DomainPtr(const std::vector<DomainPtr>&)> infer;
};

struct AggregatorDef {
  bool monotone = false;
  // Folds a multiset from element domain d; the empty multiset yields the
  // aggregator's declared unit.
  std::function<Value(const Domain* d, const std::vector<Value>&)> fold;
};

void register_function(const std::string& name, FunctionDef def);
void register_aggregator(const std::string& name, AggregatorDef def);
const FunctionDef& function_def(const std::string& name);
const AggregatorDef& aggregator_def(const std::string& name);
bool function_registered(const std::string& name);
bool aggregator_registered(const std::string& name);

// The agreement combinator: any is the unit, none absorbs, distinct values
// collapse to none.
Value eq_merge(const std::vector<Value>& vs);

// ----------------------------------------------------------- static checks

struct MonotoneReport {
  bool accepted = true;
  std::string offender;  // first non-monotone operator or failing capability
};

// Accepts when every operator under a fixpoint binder is on the monotone
// whitelist and every capability used there passes a sampling probe. The
// probe can be switched off for hot paths that only need the whitelist part.
MonotoneReport check_monotone(const Formula& f, const Field& field, uint64_t probe_seed = 7,
                              bool probe_capabilities = true);

// Per-subformula inferred domains. Labels contribute their declared domains;
// unknowns unify upward. The map owns one entry per reachable subformula with
// a resolvable domain. extra_labels supplies domains of labels that are not
// declared in the field (the SAF auxiliaries, during distributed typing).
using TypeMap = std::map<const Formula*, DomainPtr>;
DomainPtr infer_domains(const Formula& f, const Field& field,
                        const std::map<std::string, DomainPtr>& var_domains, TypeMap& out,
                        const std::map<std::string, DomainPtr>* extra_labels = nullptr);

// ----------------------------------------------------------------- lexing

namespace detail {

struct Token {
  enum class Kind { Ident, Number, Punct, End };
  Kind kind;
  std::string text;
  size_t line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string& text);
  const Token& peek() const { return toks_[pos_]; }
  const Token& peek2() const { return toks_[std::min(pos_ + 1, toks_.size() - 1)]; }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool accept(const std::string& punct_or_kw);
  void expect(const std::string& punct_or_kw, const std::string& what);
  [[noreturn]] void error(const std::string& msg) const;

private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

FormulaPtr parse_formula_at(Lexer& lex, std::set<std::string>& bound_seen,
                            std::vector<std::string>& scope);

}  // namespace detail

}  // namespace smuc
