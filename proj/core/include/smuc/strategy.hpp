#pragma once

#include "smuc/eval.hpp"

namespace smuc {

// The set of nodes that participate in one asynchronous round.
using Pattern = std::set<std::string>;

// A pattern sequence. Fair kinds guarantee every node fires at least once in
// every window of `window()` consecutive steps; explicit lists carry no such
// guarantee and can be audited with uncovered_nodes().
class Strategy {
public:
  enum class Kind { All, Periodic, RoundRobinSkip, RandomFair, Explicit };

  static Strategy all_nodes(std::vector<std::string> nodes);
  static Strategy periodic(std::vector<Pattern> cycle);
  // Every step activates all nodes but one, rotating through the node list.
  static Strategy round_robin_skip(std::vector<std::string> nodes);
  // Within every window each node gets one forced slot; other (step, node)
  // activations are coin flips with probability p_active.
  static Strategy random_fair(std::vector<std::string> nodes, uint64_t seed,
                              double p_active = 0.5, size_t window = 4);
  static Strategy explicit_list(std::vector<Pattern> steps);

  // 1-based step index, following the paper's sigma_1, sigma_2, ...
  Pattern at(size_t k) const;
  size_t window() const { return window_; }
  Kind kind() const { return kind_; }
  bool finite() const { return kind_ == Kind::Explicit; }
  size_t length() const { return steps_.size(); }

private:
  Kind kind_ = Kind::All;
  std::vector<std::string> nodes_;
  std::vector<Pattern> steps_;  // periodic cycle or explicit list
  uint64_t seed_ = 0;
  double p_active_ = 0.5;
  size_t window_ = 1;
};

// Universe nodes that never fire in the first `steps` patterns.
std::vector<std::string> uncovered_nodes(const Strategy& s, size_t steps,
                                         const std::vector<std::string>& universe);

// Per-step, per-node failure plan: nodes outside the active pattern either
// hold their value or roll back to an earlier trace row; after safe_after no
// rollback happens.
struct FailureSpec {
  size_t safe_after = 0;
  // (step, node) -> earlier row index to restore
  std::map<std::pair<size_t, std::string>, size_t> rollbacks;

  void validate() const;
  json to_json() const;
  static FailureSpec from_json(const json& j);
  static FailureSpec random(const std::vector<std::string>& nodes, size_t safe_after,
                            uint64_t seed);
};

// One pattern-restricted application: nodes in the pattern are updated
// against the full previous snapshot, the rest keep their value.
NodeValuation apply_pattern(const std::function<NodeValuation(const NodeValuation&)>& step,
                            const Pattern& pi, const NodeValuation& f);

struct RunLimits {
  size_t max_steps = 100000;
};

// Trace of pattern-restricted applications from the fixpoint seed, ending at
// the first row of a full no-change window.
std::vector<NodeValuation> run_strategy(const FixpointStep& step, const Strategy& sigma,
                                        const RunLimits& limits = {});

// Failure-sequence run: active nodes update, inactive nodes hold or roll
// back per the spec. Traces need not be chains before safe_after.
std::vector<NodeValuation> run_failures(const FixpointStep& step, const Strategy& sigma,
                                        const FailureSpec& spec, const RunLimits& limits = {});

struct RobustnessReport {
  size_t trials = 0;
  size_t strategy_agreements = 0;
  size_t failure_agreements = 0;
  bool saw_decreasing_step = false;
  std::vector<std::string> counterexamples;

  bool ok() const {
    return strategy_agreements == trials && failure_agreements == trials;
  }
};

// Runs `trials` random fair strategies and safe failure sequences and checks
// that every stabilized endpoint equals the synchronous fixpoint.
RobustnessReport check_robustness(const Field& field, const FormulaPtr& fix, size_t trials,
                                  uint64_t seed, const EvalOptions& opts = {});

}  // namespace smuc
