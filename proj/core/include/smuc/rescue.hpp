#pragma once

#include "smuc/program.hpp"

namespace smuc {

// The bundled rescuer-assignment case study: a gradient field toward the
// closest victim, candidate paths flowing down the gradient, victims engaging
// their best candidates, repeated until no further victim is saved.

// Installs init/choose/saved into the function registry (idempotent).
void register_rescue_functions();

// saved(n) compares the candidate count against howMany(n); the written-out
// definition uses <=, which would mark undersubscribed victims saved. The
// default is the >= reading; the verbatim one stays available for comparison.
void set_saved_verbatim_leq(bool enabled);

// The case-study program source and its AST.
std::string rescue_program_text();
StmtPtr rescue_program();

struct ScenarioSpec {
  size_t landmarks = 0;
  std::vector<std::pair<std::string, long>> victims;  // (node id, rescuers needed)
  size_t rescuers = 0;
  uint64_t seed = 0;
};

// Connected random geometric graph with bidirectional weighted edges,
// victim/rescuer/howMany node labels, dst/grd/cgr edge labels, and declared
// gradient-valued source/D labels. Disconnected draws are resampled.
Field gen_scenario(const ScenarioSpec& spec);

struct Assignment {
  std::map<std::string, std::set<std::string>> rescuers_of;  // victim -> rescuers
  std::set<std::string> saved;
  bool success = false;  // every victim saved
};

// Independent restatement of the three stages: multi-source shortest paths
// by an explicit Dijkstra per round, candidate grouping, and per-victim
// selection of the howMany best (cost, path) candidates.
Assignment oracle_assignment(const Field& f);

struct RescueRun {
  Field field;
  Assignment assignment;
  size_t steps = 0;
};

// Runs the bundled program and harvests the victim->rescuers map from the
// engaged label after each round.
RescueRun run_rescue(Field f, size_t fuel = 4000000);

}  // namespace smuc
