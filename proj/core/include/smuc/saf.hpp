#pragma once

#include "smuc/program.hpp"

namespace smuc {

// Reserved namespace for translation-introduced labels.
inline const std::string kAuxPrefix = "$aux:";
inline std::string aux_label(size_t c) { return kAuxPrefix + std::to_string(c); }
inline bool is_aux_label(const std::string& l) { return l.rfind(kAuxPrefix, 0) == 0; }

// Elementary formulas: a label, a function over labels (and literal atoms),
// or a single modal step over a label. bot(F)/top(F) count as literal atoms;
// their argument is a domain annotation, never evaluated.
bool is_elementary(const Formula& f);

// Simple assignment form: elementary right-hand sides, bare-label guards,
// free allowed.
bool is_saf(const Stmt& p);

// The program transformer: allocates auxiliary labels $aux:c upward and
// compiles fixpoints into until-loops over an equality guard, sequencing
// into wait-barriers, and guards into hoisted auxiliary labels.
std::pair<StmtPtr, size_t> translate_program(const StmtPtr& p, size_t c);
std::pair<StmtPtr, size_t> translate_formula(const FormulaPtr& psi, const std::string& target,
                                             size_t c);

// wait(x) = x <- true; until x do skip
StmtPtr wait_stmt(const std::string& label);

struct DifferentialReport {
  bool ok = true;
  std::string detail;  // first differing (label, node) or hygiene violation
  size_t direct_steps = 0;
  size_t saf_steps = 0;
};

// Runs p and its SAF image side by side and compares the final fields after
// erasing every $aux: label.
DifferentialReport differential_check(const StmtPtr& p, const Field& f, size_t fuel = 1000000,
                                      const EvalOptions& opts = {});

}  // namespace smuc
