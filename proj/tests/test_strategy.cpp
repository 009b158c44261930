#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smuc/strategy.hpp"
#include "testutil.hpp"

using namespace smuc;
using namespace smuc::test;

namespace {

// Node 1 participates in odd rounds only.
Strategy odd_even() {
  Pattern all{"0", "1", "2", "3"};
  Pattern skip1{"0", "2", "3"};
  return Strategy::periodic({all, skip1});
}

FixpointStep step_of(const Field& f, const std::string& formula) {
  return fixpoint_step(f, parse_formula(formula));
}

}  // namespace

TEST_CASE("pattern-restricted application") {
  Field f = fixture_field("fig1.json");
  FixpointStep step = step_of(f, "mu z. or(i, <out:or> z)");
  NodeValuation v = row4(B(true), B(false), B(false), B(false));
  Pattern all{"0", "1", "2", "3"};
  CHECK(apply_pattern(step.apply, all, v) == step.apply(v));  // full pattern = one iteration
  CHECK(apply_pattern(step.apply, {}, v) == v);               // empty pattern = identity
  // only node 1 updates; it reads the full previous snapshot
  NodeValuation one = apply_pattern(step.apply, {"1"}, v);
  CHECK(one.at("1") == step.apply(v).at("1"));
  CHECK(one.at("0") == v.at("0"));
  CHECK(one.at("2") == v.at("2"));
}

TEST_CASE("fig4 table 1 under the odd/even strategy") {
  Field f = fixture_field("fig1.json");
  auto rows = run_strategy(step_of(f, "mu z. or(i, <out:or> z)"), odd_even());
  std::vector<NodeValuation> expect = {
      row4(B(false), B(false), B(false), B(false)),
      row4(B(true), B(false), B(false), B(false)),
      row4(B(true), B(false), B(false), B(false)),
      row4(B(true), B(true), B(false), B(false)),
      row4(B(true), B(true), B(true), B(true)),
  };
  CHECK(rows == expect);
}

TEST_CASE("fig4 table 2 under the odd/even strategy") {
  Field f = fixture_field("fig1_min.json");
  auto rows = run_strategy(step_of(f, "mu z. min(i, <out:min> z)"), odd_even());
  std::vector<NodeValuation> expect = {
      row4(INF(), INF(), INF(), INF()),
      row4(N(0), N(1), N(2), N(3)),
      row4(N(0), N(1), N(1), N(1)),
      row4(N(0), N(0), N(1), N(1)),
      row4(N(0), N(0), N(0), N(0)),
  };
  CHECK(rows == expect);
}

TEST_CASE("fig4 table 3 under the odd/even strategy") {
  Field f = fixture_field("fig1_union.json");
  auto rows = run_strategy(step_of(f, "mu z. cup(i, <out:cup> z)"), odd_even());
  auto s = [](std::vector<std::string> ids) {
    ValueVec vs;
    for (auto& id : ids) vs.push_back(ND(id));
    return S(std::move(vs));
  };
  std::vector<NodeValuation> expect = {
      row4(s({}), s({}), s({}), s({})),
      row4(s({"0"}), s({"1"}), s({"2"}), s({"3"})),
      row4(s({"0", "2"}), s({"1"}), s({"1", "2", "3"}), s({"1", "3"})),
      row4(s({"0", "1", "2", "3"}), s({"0", "1", "2"}), s({"1", "2", "3"}), s({"1", "3"})),
      row4(s({"0", "1", "2", "3"}), s({"0", "1", "2"}), s({"0", "1", "2", "3"}),
           s({"0", "1", "2", "3"})),
      row4(s({"0", "1", "2", "3"}), s({"0", "1", "2", "3"}), s({"0", "1", "2", "3"}),
           s({"0", "1", "2", "3"})),
  };
  CHECK(rows == expect);
}

TEST_CASE("the all-nodes strategy reproduces the synchronous trace") {
  Field f = fixture_field("fig2_cost.json");
  FormulaPtr psi = parse_formula("mu z. min(i, <out alpha:min> z)");
  auto sync = eval_trace(f, {}, *psi);
  auto rows = run_strategy(fixpoint_step(f, psi), Strategy::all_nodes(f.nodes()));
  CHECK(rows == sync);
}

TEST_CASE("strategy traces are chains bounded by the fixpoint") {
  Field f = fixture_field("fig2_cost.json");
  FormulaPtr psi = parse_formula("mu z. min(i, <out alpha:min> z)");
  FixpointStep step = fixpoint_step(f, psi);
  NodeValuation lfp = eval_formula(f, {}, *psi);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto rows = run_strategy(step, Strategy::random_fair(f.nodes(), seed));
    for (size_t i = 0; i + 1 < rows.size(); ++i)
      CHECK(lift_order(rows[i], rows[i + 1], *step.domain));
    for (const auto& row : rows) CHECK(lift_order(row, lfp, *step.domain));
    CHECK(rows.back() == lfp);
  }
}

TEST_CASE("failure runs: no rollbacks reduce to plain strategy runs") {
  Field f = fixture_field("fig1.json");
  FixpointStep step = step_of(f, "mu z. or(i, <out:or> z)");
  Strategy sigma = Strategy::random_fair(f.nodes(), 42);
  FailureSpec none;
  none.safe_after = 0;
  CHECK(run_failures(step, sigma, none) == run_strategy(step, sigma));
}

TEST_CASE("failure runs converge to the fixpoint after the safe horizon") {
  Field f = fixture_field("fig1.json");
  FormulaPtr psi = parse_formula("mu z. or(i, <out:or> z)");
  FixpointStep step = fixpoint_step(f, psi);
  NodeValuation lfp = eval_formula(f, {}, *psi);

  // node 1 rolled back to bottom at step 5
  FailureSpec spec;
  spec.safe_after = 5;
  spec.rollbacks[{5, "1"}] = 0;
  Strategy sigma = Strategy::periodic({Pattern{"0", "1", "2", "3"}, Pattern{"0", "2", "3"},
                                       Pattern{"0", "1", "2", "3"}, Pattern{"1", "2", "3"},
                                       Pattern{"0", "2", "3"}});
  auto rows = run_failures(step, sigma, spec);
  CHECK(rows.back() == lfp);

  // roll everything back to bottom mid-run, then fair: still the fixpoint
  FailureSpec wipe;
  wipe.safe_after = 4;
  for (const auto& n : f.nodes()) wipe.rollbacks[{2, n}] = 0;
  Strategy pulse = Strategy::periodic({Pattern{"0", "1"}, Pattern{}, Pattern{"2", "3"},
                                       Pattern{"0", "1", "2", "3"}});
  auto wiped = run_failures(step, pulse, wipe);
  CHECK(wiped.back() == lfp);
}

TEST_CASE("a rollback produces a non-chain trace") {
  Field f = fixture_field("fig1.json");
  FormulaPtr psi = parse_formula("mu z. or(i, <out:or> z)");
  FixpointStep step = fixpoint_step(f, psi);
  FailureSpec spec;
  spec.safe_after = 3;
  spec.rollbacks[{3, "0"}] = 0;  // node 0 falls back to bottom
  Strategy sigma = Strategy::periodic({Pattern{"0", "1", "2", "3"}, Pattern{"1", "2", "3"},
                                       Pattern{"1", "2", "3"}});
  auto rows = run_failures(step, sigma, spec);
  bool decreasing = false;
  for (size_t i = 0; i + 1 < rows.size(); ++i)
    decreasing = decreasing || !lift_order(rows[i], rows[i + 1], *step.domain);
  CHECK(decreasing);
  CHECK(rows.back() == eval_formula(f, {}, *psi));
}

TEST_CASE("robustness report on the shortest-path instance") {
  Field f = fixture_field("fig2_cost.json");
  RobustnessReport rep =
      check_robustness(f, parse_formula("mu z. min(i, <out alpha:min> z)"), 50, 11);
  CHECK(rep.trials == 50);
  CHECK(rep.strategy_agreements == 50);
  CHECK(rep.failure_agreements == 50);
  CHECK(rep.saw_decreasing_step);
  CHECK(rep.ok());
}

TEST_CASE("a constant step stabilizes immediately for any strategy") {
  Field f = fixture_field("fig1.json");
  FixpointStep step = step_of(f, "mu z. i");
  auto rows = run_strategy(step, Strategy::all_nodes(f.nodes()));
  CHECK(rows.size() == 2);
  CHECK(rows.back() == f.node_label("i").values);
}

TEST_CASE("nu strategies descend from the top") {
  Field f = fixture_field("fig1.json");
  FormulaPtr psi = parse_formula("nu z. and(i, <out:and> z)");
  FixpointStep step = fixpoint_step(f, psi);
  NodeValuation gfp = eval_formula(f, {}, *psi);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto rows = run_strategy(step, Strategy::random_fair(f.nodes(), seed));
    for (size_t i = 0; i + 1 < rows.size(); ++i)
      CHECK(lift_order(rows[i + 1], rows[i], *step.domain));
    CHECK(rows.back() == gfp);
  }
}

TEST_CASE("fairness window coverage and explicit strategies") {
  Strategy r = Strategy::random_fair({"a", "b", "c"}, 9, 0.3, 4);
  for (size_t win = 0; win < 12; ++win) {
    std::set<std::string> fired;
    for (size_t k = win * 4 + 1; k <= (win + 1) * 4; ++k) {
      Pattern p = r.at(k);
      fired.insert(p.begin(), p.end());
    }
    CHECK(fired == std::set<std::string>{"a", "b", "c"});
  }
  Strategy e = Strategy::explicit_list({Pattern{"a"}, Pattern{"a", "b"}});
  CHECK(uncovered_nodes(e, 2, {"a", "b", "c"}) == std::vector<std::string>{"c"});
  CHECK(uncovered_nodes(r, 8, {"a", "b", "c"}).empty());
}

TEST_CASE("failure specs validate and round trip") {
  FailureSpec spec;
  spec.safe_after = 4;
  spec.rollbacks[{3, "1"}] = 1;
  CHECK(FailureSpec::from_json(spec.to_json()).to_json() == spec.to_json());
  FailureSpec bad;
  bad.safe_after = 2;
  bad.rollbacks[{3, "1"}] = 0;  // after the horizon
  CHECK_THROWS_AS(bad.validate(), Error);
  FailureSpec forward;
  forward.safe_after = 5;
  forward.rollbacks[{2, "1"}] = 4;  // target after the step
  CHECK_THROWS_AS(forward.validate(), Error);
}
