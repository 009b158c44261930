#pragma once

#include "smuc/eval.hpp"

namespace smuc {

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

// Imperative program AST: skip, label assignment, sequencing, global
// if/until, and label deallocation (free).
struct Stmt {
  enum class Tag { Skip, Assign, Seq, If, Until, Free };

  Tag tag;
  std::string label;                // Assign target
  FormulaPtr formula;               // Assign right side / If / Until guard
  StmtPtr a, b;                     // Seq(a,b) / If(a=then,b=else) / Until(a=body)
  std::vector<std::string> freed;   // Free

  static StmtPtr skip();
  static StmtPtr assign(std::string label, FormulaPtr rhs);
  static StmtPtr seq(StmtPtr a, StmtPtr b);
  static StmtPtr seq_all(std::vector<StmtPtr> stmts);
  static StmtPtr if_else(FormulaPtr guard, StmtPtr then_branch, StmtPtr else_branch);
  static StmtPtr until(FormulaPtr guard, StmtPtr body);
  static StmtPtr free_labels(std::vector<std::string> labels);

  bool is_skip() const { return tag == Tag::Skip; }
};

bool stmt_equal(const Stmt& a, const Stmt& b);

StmtPtr parse_program(const std::string& text);
std::string print_program(const Stmt& p);

// One small-step transition of the global semantics. The guard of if/until
// must evaluate to a truth value at every node; the then/exit branch fires
// only when it is true everywhere.
struct StepResult {
  StmtPtr program;
  Field field;
};
StepResult step(const StmtPtr& p, const Field& f, const EvalOptions& opts = {});

// Called after each primitive transition with the fired statement and the
// field it produced.
using StepHook = std::function<void(const Stmt& fired, const Field& after)>;

struct RunResult {
  Field field;
  size_t steps = 0;
};
RunResult run(StmtPtr p, Field f, size_t fuel = 1000000, const StepHook& hook = {},
              const EvalOptions& opts = {});

// eq(psi, <out id:eq> psi, <in id:eq> psi) != none: true at n exactly when
// psi agrees across n and all of its in/out neighbours.
FormulaPtr agreement_formula(const FormulaPtr& psi);

}  // namespace smuc
