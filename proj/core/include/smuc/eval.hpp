#pragma once

#include <functional>
#include <optional>

#include "smuc/formula.hpp"

namespace smuc {

struct EvalOptions {
  // Iteration cap; defaults to 10 * |N| * chain-height hint (64 when the
  // domain gives none). SMUC_MAX_ITERS in the environment overrides both.
  std::optional<size_t> max_iters;
  size_t default_chain_hint = 64;
  // Domains of free environment variables, for inference.
  std::map<std::string, DomainPtr> var_domains;
  // Reject non-monotone operators under fixpoint binders before evaluating.
  bool check_monotone = true;
};

// The interpretation function of formulas: label lookup, pointwise function
// application, modal aggregation over out/in edges, fixpoints by iteration
// from the lifted bottom/top until two consecutive valuations are equal.
NodeValuation eval_formula(const Field& field, const Environment& env, const Formula& psi,
                           const EvalOptions& opts = {});

// Every iterate of the top-level fixpoint, from psi^0 up to the first
// stabilized valuation. Non-fixpoint formulas yield a single row.
std::vector<NodeValuation> eval_trace(const Field& field, const Environment& env,
                                      const Formula& psi, const EvalOptions& opts = {});

// One synchronous application of a fixpoint body, exposed for the
// asynchronous strategies: apply(f) = [[body]] with the binder mapped to f.
struct FixpointStep {
  bool is_nu = false;
  DomainPtr domain;
  NodeValuation start;  // lifted bottom (mu) or top (nu)
  std::function<NodeValuation(const NodeValuation&)> apply;
};

FixpointStep fixpoint_step(const Field& field, const FormulaPtr& fix, const Environment& env = {},
                           const EvalOptions& opts = {});

}  // namespace smuc
