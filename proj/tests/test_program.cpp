#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smuc/program.hpp"
#include "testutil.hpp"

using namespace smuc;
using namespace smuc::test;

TEST_CASE("program parse and print round trip") {
  for (const char* name : {"programs/fig1_ef.smuc", "programs/guards.smuc",
                           "programs/branch.smuc", "programs/free_temp.smuc", "rescue.smuc"}) {
    StmtPtr p = parse_program(read_fixture_text(name));
    StmtPtr again = parse_program(print_program(*p));
    CHECK_MESSAGE(stmt_equal(*p, *again), name);
  }
}

TEST_CASE("assignment updates the interpretation") {
  Field f = fixture_field("fig1.json");
  StmtPtr p = Stmt::assign("j", parse_formula("mu z. or(i, <out:or> z)"));
  StepResult r = step(p, f);
  CHECK(r.program->is_skip());
  CHECK(r.field.node_label("j").values == row4(B(true), B(true), B(true), B(true)));
  CHECK_FALSE(f.has_node_label("j"));  // the source field is untouched
}

TEST_CASE("until with an all-true guard exits at once") {
  Field f = fixture_field("fig1.json");
  StmtPtr p = Stmt::until(parse_formula("or(i, not(i))"), Stmt::assign("x", parse_formula("i")));
  StepResult r = step(p, f);
  CHECK(r.program->is_skip());
  CHECK_FALSE(r.field.has_node_label("x"));
}

TEST_CASE("skip; P behaves as P") {
  Field f = fixture_field("fig1.json");
  StmtPtr p = Stmt::seq(Stmt::skip(), Stmt::assign("j", parse_formula("i")));
  StepResult r = step(p, f);
  CHECK(r.program->is_skip());
  CHECK(r.field.has_node_label("j"));
}

TEST_CASE("sequencing runs left to right") {
  Field f = fixture_field("fig1.json");
  StmtPtr p = parse_program("j <- i; k <- j");
  RunResult r = run(p, f);
  CHECK(r.field.node_label("k").values == f.node_label("i").values);
  CHECK(r.steps == 2);
}

TEST_CASE("until loop terminates when the guard saturates") {
  Field f = fixture_field("fig1.json");
  StmtPtr p = parse_program("finish <- false; until finish do { finish <- true }");
  RunResult r = run(p, f);
  for (const auto& n : f.nodes()) CHECK(r.field.label_value("finish", n) == B(true));
  CHECK(r.steps < 10);
}

TEST_CASE("guard totality: one false node forces the other branch") {
  json doc = read_fixture_json("fig1.json");
  Field f = load_field(doc);
  // i is true only at node 0, so the until body must run
  StmtPtr p = parse_program("g <- i; until g do { g <- true }");
  RunResult r = run(p, f);
  CHECK(r.steps > 2);
  StmtPtr q = parse_program("if i then { a <- true } else { a <- false }");
  RunResult rq = run(q, f);
  for (const auto& n : f.nodes()) CHECK(rq.field.label_value("a", n) == B(false));
}

TEST_CASE("non-boolean guards are a runtime type error") {
  Field f = fixture_field("fig1_min.json");
  StmtPtr p = Stmt::if_else(parse_formula("i"), Stmt::skip(), Stmt::skip());
  CHECK_THROWS_WITH_AS((void)step(p, f), doctest::Contains("truth value"), Error);
}

TEST_CASE("free removes labels and reads of undef labels fail") {
  Field f = fixture_field("fig1.json");
  StmtPtr p = parse_program("tmp <- i; free(tmp)");
  RunResult r = run(p, f);
  CHECK_FALSE(r.field.has_node_label("tmp"));
  StmtPtr q = Stmt::assign("x", parse_formula("tmp"));
  CHECK_THROWS_WITH_AS((void)step(q, r.field), doctest::Contains("tmp"), Error);
}

TEST_CASE("determinism: step is a function of the configuration") {
  Field f = fixture_field("fig1.json");
  StmtPtr p = parse_program(read_fixture_text("programs/guards.smuc"));
  RunResult a = run(p, f);
  RunResult b = run(p, f);
  CHECK(a.steps == b.steps);
  CHECK(dump_field(a.field) == dump_field(b.field));
}

TEST_CASE("fuel exhaustion is reported") {
  Field f = fixture_field("fig1.json");
  StmtPtr p = parse_program("spin <- false; until spin do { spin <- false }");
  CHECK_THROWS_WITH_AS((void)run(p, f, 50), doctest::Contains("terminate"), Error);
}

TEST_CASE("agreement formula") {
  Field f = fixture_field("fig1.json");
  FormulaPtr agree = agreement_formula(Formula::label("i"));

  // brute force over the five edges: true at n iff i agrees across n and all
  // of its in/out neighbors
  NodeValuation expect;
  for (const auto& n : f.nodes()) {
    bool all_equal = true;
    for (const auto& m : f.neighbors(n))
      all_equal = all_equal && f.label_value("i", m) == f.label_value("i", n);
    expect[n] = Value::boolean(all_equal);
  }
  CHECK(eval_formula(f, {}, *agree) == expect);
  // with i true only at node 0, nodes 0, 1, 2 disagree with a neighbor while
  // node 3's neighborhood (2 and 1) is uniformly false
  CHECK(expect == row4(B(false), B(false), B(false), B(true)));

  // a constant formula agrees everywhere
  FormulaPtr const_agree = agreement_formula(Formula::constant_of(B(true)));
  for (const auto& [n, v] : eval_formula(f, {}, *const_agree)) CHECK(v == B(true));

  // a single node with no edges agrees with itself
  json doc{{"nodes", json::array({json{{"id", "n"}}})},
           {"edges", json::array()},
           {"node_labels",
            {{"i", {{"domain", {{"kind", "bool"}}}, {"values", {{"n", {{"bool", false}}}}}}}}}};
  Field single = load_field(doc);
  CHECK(eval_formula(single, {}, *agree).at("n") == B(true));
}
