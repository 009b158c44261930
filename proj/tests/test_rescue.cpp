#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smuc/rescue.hpp"
#include "smuc/saf.hpp"
#include "testutil.hpp"

using namespace smuc;
using namespace smuc::test;

namespace {

ScenarioSpec small_spec(uint64_t seed, size_t landmarks = 12, size_t victims = 2,
                        size_t rescuers = 4, long howmany = 1) {
  ScenarioSpec spec;
  spec.landmarks = landmarks;
  spec.rescuers = rescuers;
  spec.seed = seed;
  for (size_t i = 0; i < victims; ++i)
    spec.victims.push_back({"v" + std::to_string(i), howmany});
  return spec;
}

}  // namespace

TEST_CASE("scenario generation") {
  Field f = gen_scenario(small_spec(1));
  CHECK(f.nodes().size() == 12 + 2 + 4);
  CHECK(f.has_node_label("victim"));
  CHECK(f.has_node_label("rescuer"));
  CHECK(f.has_node_label("howMany"));
  CHECK(f.has_edge_label("dst"));
  CHECK(f.has_edge_label("grd"));
  CHECK(f.has_edge_label("cgr"));
  // connected and bidirectional
  for (const auto& [s, d] : f.edges()) CHECK(f.has_edge({d, s}));
  CHECK(f.label_value("victim", "v0") == B(true));
  CHECK(f.label_value("howMany", "v0") == N(1));
  CHECK(f.label_value("rescuer", "r1") == B(true));
  // deterministic for a fixed seed
  CHECK(dump_field(gen_scenario(small_spec(1))) == dump_field(f));
}

TEST_CASE("rescue program parses and type checks") {
  register_rescue_functions();
  StmtPtr p = rescue_program();
  CHECK_FALSE(p->is_skip());
  CHECK(stmt_equal(*p, *parse_program(print_program(*p))));
  Field f = gen_scenario(small_spec(2));
  MonotoneReport rep =
      check_monotone(*parse_formula("mu Z. min1(source, <out dst:min1> Z)"), f);
  CHECK_MESSAGE(rep.accepted, rep.offender);
}

TEST_CASE("stage one gradient on the fig2 weights") {
  // node 0 as the sole victim: costs follow the shortest paths of the
  // weighted graph
  Field f = fixture_field("fig3_tree.json");
  NodeValuation d = eval_formula(f, {}, *parse_formula("mu Z. min1(i, <out alpha:min1> Z)"));
  CHECK(d.at("0").elems()[0] == N(0));
  CHECK(d.at("1").elems()[0] == N(1));
  CHECK(d.at("2").elems()[0] == N(3));
  CHECK(d.at("3").elems()[0] == N(2));
}

TEST_CASE("zero victims: success in the first round") {
  Field f = gen_scenario(small_spec(3, 10, 0, 3));
  RescueRun r = run_rescue(f);
  CHECK(r.assignment.success);
  CHECK(r.assignment.rescuers_of.empty());
  Assignment oracle = oracle_assignment(f);
  CHECK(oracle.success);
}

TEST_CASE("rescue run matches the oracle on small scenarios") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    Field f = gen_scenario(small_spec(100 + seed, 14, 2, 4));
    RescueRun r = run_rescue(f);
    Assignment oracle = oracle_assignment(f);
    CHECK_MESSAGE(r.assignment.saved == oracle.saved, "seed ", seed);
    CHECK_MESSAGE(r.assignment.rescuers_of == oracle.rescuers_of, "seed ", seed);
    CHECK(r.assignment.success == oracle.success);
  }
}

TEST_CASE("no rescuer is assigned to two victims") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    Field f = gen_scenario(small_spec(200 + seed, 16, 3, 5));
    RescueRun r = run_rescue(f);
    std::set<std::string> seen;
    for (const auto& [v, rs] : r.assignment.rescuers_of)
      for (const auto& rescuer : rs) CHECK(seen.insert(rescuer).second);
  }
}

TEST_CASE("contested victims needing several rescuers can fail") {
  // two victims needing two rescuers each, two rescuers: when each rescuer is
  // closest to a different victim, nobody is saved
  bool saw_failure = false;
  for (uint64_t seed = 0; seed < 30 && !saw_failure; ++seed) {
    Field f = gen_scenario(small_spec(300 + seed, 10, 2, 2, 2));
    Assignment oracle = oracle_assignment(f);
    RescueRun r = run_rescue(f);
    CHECK(r.assignment.saved == oracle.saved);
    if (!oracle.success && oracle.saved.empty()) saw_failure = true;
  }
  CHECK(saw_failure);
}

TEST_CASE("unreachable victims stay unsaved") {
  // build a custom field: one victim disconnected in gradient terms is
  // impossible here (scenarios are connected), so starve it instead
  Field f = gen_scenario(small_spec(4, 8, 1, 0));
  RescueRun r = run_rescue(f);
  CHECK_FALSE(r.assignment.success);
  CHECK(r.assignment.saved.empty());
}

TEST_CASE("engaged paths are valid edge walks from the victim to a rescuer") {
  Field base = gen_scenario(small_spec(7, 14, 2, 4));
  register_rescue_functions();
  size_t checked = 0;
  StepHook hook = [&](const Stmt& fired, const Field& after) {
    if (fired.tag != Stmt::Tag::Assign || fired.label != "engaged") return;
    for (const auto& v : after.nodes()) {
      if (!after.label_value("victim", v).as_bool()) continue;
      // the victim's own engaged entry holds exactly its chosen paths
      for (const auto& pv : after.label_value("engaged", v).elems()) {
        const PathWord& path = pv.as_path();
        std::string cur = v;
        for (const auto& hop : path.nodes) {
          CHECK(after.has_edge({hop, cur}));  // flows along real edges
          cur = hop;
        }
        CHECK(after.label_value("rescuer", cur) == B(true));
        ++checked;
      }
    }
  };
  run(rescue_program(), base, 4000000, hook);
  CHECK(checked > 0);
}

TEST_CASE("rescue program differential against its SAF image") {
  Field f = gen_scenario(small_spec(11, 8, 1, 2));
  StmtPtr p = rescue_program();
  DifferentialReport rep = differential_check(p, f);
  CHECK_MESSAGE(rep.ok, rep.detail);
}

TEST_CASE("verbatim <= reading of saved stays available") {
  Field f = gen_scenario(small_spec(12, 10, 1, 3));
  set_saved_verbatim_leq(true);
  RescueRun verbatim = run_rescue(f);
  Assignment verbatim_oracle = oracle_assignment(f);
  CHECK(verbatim.assignment.saved == verbatim_oracle.saved);
  set_saved_verbatim_leq(false);
  RescueRun standard = run_rescue(f);
  Assignment standard_oracle = oracle_assignment(f);
  CHECK(standard.assignment.saved == standard_oracle.saved);
}
