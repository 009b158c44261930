#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smuc/saf.hpp"
#include "testutil.hpp"

using namespace smuc;
using namespace smuc::test;

TEST_CASE("elementary formulas") {
  CHECK(is_elementary(*parse_formula("i")));
  CHECK(is_elementary(*parse_formula("<out alpha:min> j")));
  CHECK(is_elementary(*parse_formula("or(i, j)")));
  CHECK(is_elementary(*parse_formula("false")));
  CHECK(is_elementary(*parse_formula("bot(min(i, <out:min> j))")));
  CHECK_FALSE(is_elementary(*parse_formula("or(i, or(j, k))")));
  CHECK_FALSE(is_elementary(*parse_formula("<out:or> or(i, j)")));
  CHECK_FALSE(is_elementary(*parse_formula("mu z. or(i, z)")));
}

TEST_CASE("label-only translation introduces no auxiliaries") {
  auto [s, c] = translate_formula(Formula::label("i"), "j", 7);
  CHECK(c == 7);
  CHECK(s->tag == Stmt::Tag::Assign);
  CHECK(s->label == "j");
}

TEST_CASE("translated programs are in simple assignment form") {
  for (const char* name :
       {"programs/fig1_ef.smuc", "programs/fig3_tree.smuc", "programs/nested.smuc",
        "programs/guards.smuc", "programs/branch.smuc", "rescue.smuc"}) {
    StmtPtr p = parse_program(read_fixture_text(name));
    auto [saf, counter] = translate_program(p, 0);
    bool source_already_saf = is_saf(*p) && name == std::string("programs/nested.smuc");
    CHECK_FALSE(source_already_saf);
    CHECK_MESSAGE(is_saf(*saf), name);
    CHECK(counter > 0);
    // SAF output is valid program text and reparses to the same tree
    StmtPtr again = parse_program(print_program(*saf));
    CHECK_MESSAGE(stmt_equal(*saf, *again), name);
  }
}

TEST_CASE("sequencing emits exactly one wait between the halves") {
  StmtPtr p = parse_program("a <- i; b <- i");
  auto [saf, counter] = translate_program(p, 0);
  (void)counter;
  std::string text = print_program(*saf);
  size_t waits = 0;
  for (size_t at = text.find("until"); at != std::string::npos; at = text.find("until", at + 1))
    ++waits;
  CHECK(waits == 1);  // the wait barrier is the only loop
}

TEST_CASE("counters grow monotonically and ranges stay disjoint") {
  // two sibling subtrees: their auxiliary ranges must not overlap
  FormulaPtr psi = parse_formula("or(mu z. or(i, <out:or> z), mu w. and(i, <in:and> w))");
  auto [s1, c1] = translate_formula(psi->kids[0], "a", 0);
  auto [s2, c2] = translate_formula(psi->kids[1], "b", c1);
  CHECK(c1 > 0);
  CHECK(c2 > c1);
  std::string t1 = print_program(*s1), t2 = print_program(*s2);
  for (size_t i = 0; i < c1; ++i)
    CHECK(t2.find("$aux:" + std::to_string(i) + " <-") == std::string::npos);
}

TEST_CASE("mu loop rounds track the synchronous iterates") {
  Field f = fixture_field("fig1.json");
  FormulaPtr psi = parse_formula("mu z. or(i, <out:or> z)");
  auto sync = eval_trace(f, {}, *psi);
  auto [saf, counter] = translate_formula(psi, "j", 0);
  (void)counter;

  // watch assignments to the loop's stabilization flag $aux:5: the first one
  // is the seed initialization, after which loop round k leaves the k-th
  // synchronous iterate in $aux:1 and the previous one in $aux:0
  std::vector<NodeValuation> currents, previous;
  StepHook hook = [&](const Stmt& fired, const Field& after) {
    if (fired.tag == Stmt::Tag::Assign && fired.label == "$aux:5") {
      currents.push_back(after.node_label("$aux:1").values);
      previous.push_back(after.node_label("$aux:0").values);
    }
  };
  RunResult r = run(saf, f, 100000, hook);
  REQUIRE(currents.size() == sync.size() + 1);  // init + one round past stabilization
  for (size_t k = 0; k < sync.size(); ++k) CHECK(currents[k] == sync[k]);
  CHECK(currents.back() == sync.back());
  for (size_t k = 2; k < sync.size(); ++k) CHECK(previous[k] == sync[k - 1]);
  CHECK(r.field.node_label("j").values == sync.back());
}

TEST_CASE("differential check passes on the corpus") {
  struct Case {
    const char* field;
    const char* program;
  };
  for (const Case& c : {Case{"fig1.json", "programs/fig1_ef.smuc"},
                        Case{"fig1_min.json", "programs/fig1_min.smuc"},
                        Case{"fig1_union.json", "programs/fig1_union.smuc"},
                        Case{"fig2_cost.json", "programs/fig2_cost.smuc"},
                        Case{"fig2_nodecost.json", "programs/fig2_nodecost.smuc"},
                        Case{"fig2_pathcost.json", "programs/fig2_pathcost.smuc"},
                        Case{"fig3_tree.json", "programs/fig3_tree.smuc"},
                        Case{"fig1.json", "programs/nested.smuc"},
                        Case{"fig1.json", "programs/guards.smuc"},
                        Case{"fig1.json", "programs/branch.smuc"},
                        Case{"fig1.json", "programs/straightline.smuc"},
                        Case{"fig1.json", "programs/free_temp.smuc"}}) {
    StmtPtr p = parse_program(read_fixture_text(c.program));
    DifferentialReport rep = differential_check(p, fixture_field(c.field));
    CHECK_MESSAGE(rep.ok, c.program, ": ", rep.detail);
  }
}

TEST_CASE("differential check on trivial programs") {
  Field f = fixture_field("fig1.json");
  CHECK(differential_check(Stmt::skip(), f).ok);
  CHECK(differential_check(parse_program("j <- i; k <- j"), f).ok);
}

TEST_CASE("no aux label survives erasure and no source label is freed") {
  Field f = fixture_field("fig1.json");
  StmtPtr p = parse_program(read_fixture_text("programs/nested.smuc"));
  auto [saf, counter] = translate_program(p, 0);
  (void)counter;
  RunResult r = run(saf, f);
  // every surviving aux label is erased by the comparison; source labels
  // must all still be present
  CHECK(r.field.has_node_label("i"));
  CHECK(r.field.has_node_label("t"));
  CHECK(r.field.has_node_label("s"));
  DifferentialReport rep = differential_check(p, f);
  CHECK(rep.ok);
}

TEST_CASE("open formulas cannot be translated") {
  CHECK_THROWS_AS(translate_formula(Formula::var("z"), "j", 0), Error);
}
