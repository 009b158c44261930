#pragma once

#include <deque>

#include "smuc/saf.hpp"

namespace smuc {

// Protocol state of the spanning-tree agreement: undef cells are absent,
// QTrue means "this subtree agreed on true so far".
enum class ChiVal { QTrue, True, False };
std::string chi_str(ChiVal v);

// Spanning tree over the undirected closure of the field's edges.
struct Infrastructure {
  Field field;  // static topology, capabilities and initial interpretation
  std::string root;
  std::map<std::string, std::string> parent;            // absent for the root
  std::map<std::string, std::vector<std::string>> children;

  // BFS from the first node in document order.
  static Infrastructure bfs(const Field& f);
  static Infrastructure from_json(const Field& f, const json& tree);
  json tree_json() const;

  bool is_root(const std::string& n) const { return n == root; }
  std::vector<std::string> relatives(const std::string& n) const;
};

// Field-value or agreement message addressed to a recipient set. Value
// messages carry the sender's per-label write sequence so receivers keep only
// the newest write regardless of delivery order.
struct Message {
  bool agree = false;
  std::string from;
  std::string label;
  std::set<std::string> to;
  Value value;        // value message payload
  uint64_t seq = 0;   // value message write index
  uint64_t iter = 0;  // agreement iteration
  ChiVal cv = ChiVal::False;

  json to_json() const;
};

struct ValueCell {
  std::optional<Value> value;  // nullopt = undef
  uint64_t seq = 0;
};

// One node's distributed state: residual program, partial interpretation
// over itself and its neighbors, agreement store and iteration counters.
struct Fragment {
  std::string node;
  StmtPtr residual;
  // label -> node -> cell, covering this node and its graph neighbors
  std::map<std::string, std::map<std::string, ValueCell>> iota;
  // own write counter per label; value messages carry it
  std::map<std::string, uint64_t> writes;
  // peer -> label -> iteration -> state, peers in rel(T,n) + {n}
  std::map<std::string, std::map<std::string, std::map<uint64_t, ChiVal>>> chi;
  std::map<std::string, uint64_t> kappa;

  uint64_t iteration(const std::string& label) const;
  const ValueCell* cell(const std::string& label, const std::string& node) const;
  bool done() const { return residual->is_skip(); }
};

struct Event {
  json body;
};

struct DistExecution {
  std::vector<Fragment> fragments;
  std::deque<Message> pending;
  std::map<std::string, DomainPtr> label_domains;  // static typing of every label
  std::vector<Event> log;

  Fragment& at(const std::string& node);
  const Fragment& at(const std::string& node) const;
};

// One fragment per node, each holding the whole program, its neighborhood
// restriction of the interpretation, an empty agreement store and zeroed
// counters.
DistExecution project(const Infrastructure& infra, const StmtPtr& saf_program);

// Local rules of the fragment semantics.
enum class Rule {
  DStep,
  DFree,
  DIfT,
  DIfF,
  DUntilT,
  DUntilF,
  DAgreeF1,
  DAgreeT,
  DAgreeF2,
  DAgreeN1,
  DAgreeP,
};
std::string rule_name(Rule r);

struct EnabledRule {
  size_t fragment;
  Rule rule;
};

// Enabled local rules of one fragment (empty when it is blocked or done).
std::vector<Rule> enabled_rules(const DistExecution& exec, const Infrastructure& infra,
                                const Fragment& frag);

// Fires one enabled rule; emitted messages are appended to exec.pending.
void frag_step(DistExecution& exec, const Infrastructure& infra, size_t fragment, Rule rule);

// Delivers one pending message to every recipient (exactly-once, unordered).
void deliver(DistExecution& exec, size_t msg_index);

struct SimulateOptions {
  uint64_t seed = 0;
  size_t fuel = 2000000;
  bool keep_log = true;
};

// Runs the seeded scheduler until every fragment holds skip and no message
// pends: each step picks uniformly among enabled fragment rules and pending
// messages.
DistExecution simulate(const Infrastructure& infra, const StmtPtr& saf_program,
                       const SimulateOptions& opts = {});

// Own-row values per label, auxiliaries included; undef cells are skipped.
std::map<std::string, NodeValuation> lift(const DistExecution& exec);
// Compares the lifted interpretation with the field's on non-auxiliary labels.
bool agrees_with(const DistExecution& exec, const Field& f);

}  // namespace smuc
