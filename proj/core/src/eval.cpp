#include "smuc/eval.hpp"

#include <cstdlib>

#include "smuc/errors.hpp"

namespace smuc {

namespace {

class Evaluator {
public:
  Evaluator(const Field& field, const Formula& root, const EvalOptions& opts)
      : field_(field), opts_(opts) {
    if (opts.check_monotone) {
      auto rep = check_monotone(root, field, 7, /*probe_capabilities=*/false);
      require(rep.accepted, ErrorKind::TypeMismatch,
              "non-monotone operator under a fixpoint binder: " + rep.offender);
    }
    infer_domains(root, field, opts.var_domains, types_);
  }

  size_t iter_cap(const Domain* d) const {
    if (const char* env = std::getenv("SMUC_MAX_ITERS")) {
      char* end = nullptr;
      unsigned long v = std::strtoul(env, &end, 10);
      if (end && *end == '\0' && v > 0) return v;
    }
    if (opts_.max_iters) return *opts_.max_iters;
    size_t hint = opts_.default_chain_hint;
    if (d) hint = d->chain_height().value_or(hint);
    return 10 * std::max<size_t>(field_.nodes().size(), 1) * std::max<size_t>(hint, 1);
  }

  const Domain* type_of(const Formula& f) const {
    auto it = types_.find(&f);
    return it == types_.end() ? nullptr : it->second.get();
  }

  DomainPtr type_ptr(const Formula& f) const {
    auto it = types_.find(&f);
    return it == types_.end() ? nullptr : it->second;
  }

  NodeValuation eval(const Formula& f, Environment& env, std::vector<NodeValuation>* trace) {
    switch (f.tag) {
      case Formula::Tag::Label: {
        const auto& l = field_.node_label(f.name);
        return l.values;
      }
      case Formula::Tag::Var: {
        auto it = env.find(f.name);
        if (it == env.end())
          fail(ErrorKind::UnknownName, "formula is not closed: unbound variable " + f.name);
        return it->second;
      }
      case Formula::Tag::Const: {
        NodeValuation out;
        for (const auto& n : field_.nodes()) out[n] = f.constant;
        return out;
      }
      case Formula::Tag::Apply: return eval_apply(f, env);
      case Formula::Tag::Modal: return eval_modal(f, env);
      case Formula::Tag::Mu:
      case Formula::Tag::Nu: return eval_fixpoint(f, env, trace);
    }
    fail(ErrorKind::Internal, "unreachable");
  }

  NodeValuation eval_fixpoint(const Formula& f, Environment& env,
                              std::vector<NodeValuation>* trace) {
    const Domain* d = type_of(f);
    require(d != nullptr, ErrorKind::TypeMismatch,
            "cannot infer the domain of fixpoint " + print_formula(f));
    bool is_nu = f.tag == Formula::Tag::Nu;
    NodeValuation cur =
        is_nu ? lifted_top(field_.nodes(), *d) : lifted_bottom(field_.nodes(), *d);
    if (trace) trace->push_back(cur);
    size_t cap = iter_cap(d);
    auto saved = env.find(f.name) != env.end() ? std::optional<NodeValuation>(env[f.name])
                                               : std::nullopt;
    for (size_t k = 0; k <= cap; ++k) {
      env[f.name] = cur;
      NodeValuation next = eval(*f.kids[0], env, nullptr);
      if (next == cur) {
        if (saved)
          env[f.name] = *saved;
        else
          env.erase(f.name);
        return cur;
      }
      if (trace) trace->push_back(next);
      cur = std::move(next);
    }
    fail(ErrorKind::InfiniteChain,
         "fixpoint did not stabilize within " + std::to_string(cap) +
             " iterations; the domain may have infinite chains");
  }

  NodeValuation eval_apply(const Formula& f, Environment& env) {
    // bot/top take their argument's domain without evaluating it.
    if (f.name == "bot" || f.name == "top") {
      const Domain* d = type_of(f);
      if (!d && !f.kids.empty()) d = type_of(*f.kids[0]);
      require(d != nullptr, ErrorKind::TypeMismatch,
              "cannot infer the domain of " + print_formula(f));
      Value v = f.name == "bot" ? d->bottom() : d->top();
      NodeValuation out;
      for (const auto& n : field_.nodes()) out[n] = v;
      return out;
    }
    const FunctionDef& def = function_def(f.name);
    int argc = static_cast<int>(f.kids.size());
    if (argc < def.min_args || (def.max_args >= 0 && argc > def.max_args))
      fail(ErrorKind::BadArgument, f.name + " applied to " + std::to_string(argc) + " arguments");
    std::vector<NodeValuation> args;
    args.reserve(f.kids.size());
    for (const auto& k : f.kids) args.push_back(eval(*k, env, nullptr));
    const Domain* d = type_of(f);
    NodeValuation out;
    std::vector<Value> argv(args.size());
    for (const auto& n : field_.nodes()) {
      for (size_t i = 0; i < args.size(); ++i) argv[i] = args[i].at(n);
      FnCtx ctx{field_, n, d};
      out[n] = def.eval(ctx, argv);
    }
    return out;
  }

  NodeValuation eval_modal(const Formula& f, Environment& env) {
    const AggregatorDef& agg = aggregator_def(f.agg);
    NodeValuation body = eval(*f.kids[0], env, nullptr);
    const Domain* d = type_of(*f.kids[0]);
    NodeValuation out;
    for (const auto& n : field_.nodes()) {
      std::vector<Value> inputs;  // one entry per edge: multiplicities preserved
      if (f.out) {
        for (const auto& m : field_.out_neighbors(n))
          inputs.push_back(field_.apply_capability(f.alpha, {n, m}, body.at(m)));
      } else {
        for (const auto& m : field_.in_neighbors(n))
          inputs.push_back(field_.apply_capability(f.alpha, {m, n}, body.at(m)));
      }
      out[n] = agg.fold(d, inputs);
    }
    return out;
  }

  const Field& field_;
  EvalOptions opts_;
  TypeMap types_;
};

}  // namespace

NodeValuation eval_formula(const Field& field, const Environment& env, const Formula& psi,
                           const EvalOptions& opts) {
  require(closed_under(psi, env), ErrorKind::UnknownName,
          "formula has free variables outside the environment");
  Evaluator ev(field, psi, opts);
  Environment scratch = env;
  return ev.eval(psi, scratch, nullptr);
}

std::vector<NodeValuation> eval_trace(const Field& field, const Environment& env,
                                      const Formula& psi, const EvalOptions& opts) {
  require(closed_under(psi, env), ErrorKind::UnknownName,
          "formula has free variables outside the environment");
  Evaluator ev(field, psi, opts);
  Environment scratch = env;
  if (!psi.is_fixpoint()) return {ev.eval(psi, scratch, nullptr)};
  std::vector<NodeValuation> trace;
  NodeValuation fix = ev.eval(psi, scratch, &trace);
  // The trace holds psi^0 .. psi^K where psi^{K+1} = psi^K.
  (void)fix;
  return trace;
}

FixpointStep fixpoint_step(const Field& field, const FormulaPtr& fix, const Environment& env,
                           const EvalOptions& opts) {
  require(fix->is_fixpoint(), ErrorKind::BadArgument, "fixpoint_step needs a mu/nu formula");
  auto ev = std::make_shared<Evaluator>(field, *fix, opts);
  DomainPtr d = ev->type_ptr(*fix);
  require(d != nullptr, ErrorKind::TypeMismatch, "cannot infer the fixpoint domain");
  FixpointStep step;
  step.is_nu = fix->tag == Formula::Tag::Nu;
  step.domain = d;
  step.start = step.is_nu ? lifted_top(field.nodes(), *d) : lifted_bottom(field.nodes(), *d);
  std::string var = fix->name;
  FormulaPtr body = fix->kids[0];
  Environment base = env;
  step.apply = [ev, body, var, base](const NodeValuation& f) mutable {
    Environment scratch = base;
    scratch[var] = f;
    return ev->eval(*body, scratch, nullptr);
  };
  return step;
}

}  // namespace smuc
