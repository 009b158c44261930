#include "smuc/strategy.hpp"

#include <algorithm>

#include "smuc/errors.hpp"

namespace smuc {

Strategy Strategy::all_nodes(std::vector<std::string> nodes) {
  Strategy s;
  s.kind_ = Kind::All;
  s.nodes_ = std::move(nodes);
  s.window_ = 1;
  return s;
}

Strategy Strategy::periodic(std::vector<Pattern> cycle) {
  require(!cycle.empty(), ErrorKind::BadArgument, "periodic strategy needs a nonempty cycle");
  Strategy s;
  s.kind_ = Kind::Periodic;
  s.steps_ = std::move(cycle);
  s.window_ = s.steps_.size();
  return s;
}

Strategy Strategy::round_robin_skip(std::vector<std::string> nodes) {
  require(!nodes.empty(), ErrorKind::BadArgument, "empty node list");
  Strategy s;
  s.kind_ = Kind::RoundRobinSkip;
  s.nodes_ = std::move(nodes);
  s.window_ = std::max<size_t>(2, s.nodes_.size());
  return s;
}

Strategy Strategy::random_fair(std::vector<std::string> nodes, uint64_t seed, double p_active,
                               size_t window) {
  require(!nodes.empty(), ErrorKind::BadArgument, "empty node list");
  require(window >= 1, ErrorKind::BadArgument, "window must be positive");
  Strategy s;
  s.kind_ = Kind::RandomFair;
  s.nodes_ = std::move(nodes);
  s.seed_ = seed;
  s.p_active_ = p_active;
  s.window_ = window;
  return s;
}

Strategy Strategy::explicit_list(std::vector<Pattern> steps) {
  Strategy s;
  s.kind_ = Kind::Explicit;
  s.steps_ = std::move(steps);
  s.window_ = std::max<size_t>(1, s.steps_.size());
  return s;
}

Pattern Strategy::at(size_t k) const {
  require(k >= 1, ErrorKind::BadArgument, "patterns are 1-indexed");
  switch (kind_) {
    case Kind::All: return Pattern(nodes_.begin(), nodes_.end());
    case Kind::Periodic: return steps_[(k - 1) % steps_.size()];
    case Kind::RoundRobinSkip: {
      Pattern p(nodes_.begin(), nodes_.end());
      p.erase(nodes_[(k - 1) % nodes_.size()]);
      return p;
    }
    case Kind::RandomFair: {
      // Each node owns a fixed slot offset, so every window of `window_`
      // consecutive steps fires every node at least once; extra activations
      // are per-step coin flips.
      size_t slot = (k - 1) % window_;
      Rng coins(seed_ ^ (0x9e3779b97f4a7c15ULL * k));
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      Pattern p;
      for (size_t i = 0; i < nodes_.size(); ++i) {
        Rng slot_rng(seed_ ^ (0xbf58476d1ce4e5b9ULL * (i + 1)));
        size_t forced = std::uniform_int_distribution<size_t>(0, window_ - 1)(slot_rng);
        bool active = coin(coins) < p_active_;
        if (forced == slot || active) p.insert(nodes_[i]);
      }
      return p;
    }
    case Kind::Explicit:
      require(k <= steps_.size(), ErrorKind::BadArgument, "explicit strategy exhausted");
      return steps_[k - 1];
  }
  fail(ErrorKind::Internal, "unreachable");
}

std::vector<std::string> uncovered_nodes(const Strategy& s, size_t steps,
                                         const std::vector<std::string>& universe) {
  std::set<std::string> fired;
  size_t limit = s.finite() ? std::min(steps, s.length()) : steps;
  for (size_t k = 1; k <= limit; ++k) {
    Pattern p = s.at(k);
    fired.insert(p.begin(), p.end());
  }
  std::vector<std::string> out;
  for (const auto& n : universe)
    if (!fired.count(n)) out.push_back(n);
  return out;
}

// ------------------------------------------------------------ failure plans

void FailureSpec::validate() const {
  for (const auto& [key, to] : rollbacks) {
    require(key.first >= 1, ErrorKind::BadArgument, "rollback steps are 1-indexed");
    require(to < key.first, ErrorKind::BadArgument,
            "rollback target must be an earlier step");
    require(key.first <= safe_after, ErrorKind::BadArgument,
            "rollback after the safe horizon");
  }
}

json FailureSpec::to_json() const {
  json arr = json::array();
  for (const auto& [key, to] : rollbacks)
    arr.push_back(json{{"step", key.first}, {"node", key.second}, {"to", to}});
  return json{{"safe_after", safe_after}, {"rollbacks", arr}};
}

FailureSpec FailureSpec::from_json(const json& j) {
  FailureSpec spec;
  spec.safe_after = j.value("safe_after", size_t{0});
  for (const auto& r : j.value("rollbacks", json::array()))
    spec.rollbacks[{r.at("step").get<size_t>(), r.at("node").get<std::string>()}] =
        r.at("to").get<size_t>();
  spec.validate();
  return spec;
}

FailureSpec FailureSpec::random(const std::vector<std::string>& nodes, size_t safe_after,
                                uint64_t seed) {
  FailureSpec spec;
  spec.safe_after = safe_after;
  Rng rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (size_t k = 2; k <= safe_after; ++k)
    for (const auto& n : nodes)
      if (coin(rng) < 0.25) {
        std::uniform_int_distribution<size_t> to(0, k - 1);
        spec.rollbacks[{k, n}] = to(rng);
      }
  return spec;
}

// ---------------------------------------------------------------- execution

NodeValuation apply_pattern(const std::function<NodeValuation(const NodeValuation&)>& step,
                            const Pattern& pi, const NodeValuation& f) {
  if (pi.empty()) return f;
  NodeValuation full = step(f);
  NodeValuation out = f;
  for (const auto& n : pi) {
    auto it = full.find(n);
    require(it != full.end(), ErrorKind::NodeSetMismatch, "pattern node outside the field: " + n);
    out[n] = it->second;
  }
  return out;
}

namespace {

std::vector<NodeValuation> run_loop(const FixpointStep& step, const Strategy& sigma,
                                    const FailureSpec* spec, const RunLimits& limits) {
  std::vector<NodeValuation> trace{step.start};
  size_t last_change = 0;
  size_t window = std::max<size_t>(1, sigma.window());
  for (size_t k = 1; k <= limits.max_steps; ++k) {
    if (sigma.finite() && k > sigma.length()) return trace;
    Pattern pi = sigma.at(k);
    const NodeValuation& prev = trace.back();
    NodeValuation next = apply_pattern(step.apply, pi, prev);
    if (spec) {
      for (const auto& [key, to] : spec->rollbacks) {
        if (key.first != k) continue;
        if (pi.count(key.second)) continue;  // active nodes always update
        next[key.second] = trace[std::min(to, trace.size() - 1)].at(key.second);
      }
    }
    bool changed = next != trace.back();
    trace.push_back(std::move(next));
    if (changed) last_change = k;
    bool settled = k >= last_change + window;
    if (spec && k <= spec->safe_after) settled = false;
    if (settled) {
      trace.resize(last_change + 1);
      return trace;
    }
  }
  fail(ErrorKind::FuelExhausted,
       "no stabilization within " + std::to_string(limits.max_steps) + " steps");
}

}  // namespace

std::vector<NodeValuation> run_strategy(const FixpointStep& step, const Strategy& sigma,
                                        const RunLimits& limits) {
  return run_loop(step, sigma, nullptr, limits);
}

std::vector<NodeValuation> run_failures(const FixpointStep& step, const Strategy& sigma,
                                        const FailureSpec& spec, const RunLimits& limits) {
  spec.validate();
  return run_loop(step, sigma, &spec, limits);
}

RobustnessReport check_robustness(const Field& field, const FormulaPtr& fix, size_t trials,
                                  uint64_t seed, const EvalOptions& opts) {
  RobustnessReport rep;
  rep.trials = trials;
  NodeValuation lfp = eval_formula(field, {}, *fix, opts);
  FixpointStep step = fixpoint_step(field, fix, {}, opts);
  const Domain& d = *step.domain;
  for (size_t t = 0; t < trials; ++t) {
    Strategy sigma = Strategy::random_fair(field.nodes(), seed + 1789 * t + 1, 0.5, 4);
    auto trace = run_strategy(step, sigma, {});
    if (trace.back() == lfp)
      ++rep.strategy_agreements;
    else if (rep.counterexamples.size() < 3)
      rep.counterexamples.push_back("strategy trial " + std::to_string(t));

    FailureSpec spec = FailureSpec::random(field.nodes(), 4 + (t % 8), seed + 977 * t + 7);
    auto ftrace = run_failures(step, sigma, spec, {});
    if (ftrace.back() == lfp)
      ++rep.failure_agreements;
    else if (rep.counterexamples.size() < 3)
      rep.counterexamples.push_back("failure trial " + std::to_string(t));
    for (size_t i = 0; i + 1 < ftrace.size() && !rep.saw_decreasing_step; ++i)
      if (!lift_order(ftrace[i], ftrace[i + 1], d)) rep.saw_decreasing_step = true;
  }
  return rep;
}

}  // namespace smuc
