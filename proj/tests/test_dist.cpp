#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smuc/dist.hpp"
#include "testutil.hpp"

using namespace smuc;
using namespace smuc::test;

namespace {

json erased_lift(const DistExecution& exec) {
  json out = json::object();
  for (const auto& [label, v] : lift(exec)) {
    if (is_aux_label(label)) continue;
    json values = json::object();
    for (const auto& [n, val] : v) values[n] = val.to_json();
    out[label] = values;
  }
  return out;
}

json erased_field(const Field& f) {
  json out = json::object();
  for (const auto& name : f.node_label_names()) {
    if (is_aux_label(name)) continue;
    json values = json::object();
    for (const auto& [n, v] : f.node_label(name).values) values[n] = v.to_json();
    out[name] = values;
  }
  return out;
}

StmtPtr saf_of(const std::string& program_fixture) {
  StmtPtr p = parse_program(read_fixture_text(program_fixture));
  return translate_program(p, 0).first;
}

}  // namespace

TEST_CASE("bfs spanning tree") {
  Field f = fixture_field("fig1.json");
  Infrastructure infra = Infrastructure::bfs(f);
  CHECK(infra.root == "0");
  CHECK(infra.parent.at("2") == "0");  // 0 -- 2 via the directed edge (0,2)
  CHECK(infra.parent.at("1") == "0");  // undirected closure includes (1,0)
  CHECK(infra.parent.at("3") == "1");  // breadth first: 1 is reached before 2 expands
  CHECK(infra.relatives("2") == std::vector<std::string>{"0"});
  CHECK(infra.relatives("1") == std::vector<std::string>{"0", "3"});
  Infrastructure again = Infrastructure::from_json(f, infra.tree_json());
  CHECK(again.tree_json() == infra.tree_json());

  Field disconnected({"a", "b"}, {});
  CHECK_THROWS_WITH_AS(Infrastructure::bfs(disconnected), doctest::Contains("connected"), Error);
}

TEST_CASE("projection covers exactly the neighborhood") {
  Field f = fixture_field("fig1.json");
  Infrastructure infra = Infrastructure::bfs(f);
  DistExecution exec = project(infra, Stmt::skip());
  const Fragment& two = exec.at("2");
  // node 2 sees labels at itself and its in/out neighbors 0, 1, 3
  for (const char* n : {"0", "1", "2", "3"}) CHECK(two.cell("i", n) != nullptr);
  const Fragment& zero = exec.at("0");
  CHECK(zero.cell("i", "3") == nullptr);  // 3 is not a neighbor of 0
  CHECK(zero.cell("i", "0") != nullptr);

  // single-node field: the view is just the node itself
  json doc{{"nodes", json::array({json{{"id", "n"}}})},
           {"edges", json::array()},
           {"node_labels",
            {{"i", {{"domain", {{"kind", "bool"}}}, {"values", {{"n", {{"bool", true}}}}}}}}}};
  Field single = load_field(doc);
  DistExecution sexec = project(Infrastructure::bfs(single), Stmt::skip());
  CHECK(sexec.at("n").cell("i", "n") != nullptr);

  // projection then lifting restores the interpretation
  CHECK(agrees_with(exec, f));
}

TEST_CASE("a modal step blocks while a required neighbor value is stale") {
  Field f = fixture_field("fig1.json");
  Infrastructure infra = Infrastructure::bfs(f);
  StmtPtr p = Stmt::assign("k", parse_formula("<out:or> i"));
  DistExecution exec = project(infra, p);
  // the projection seeds neighbor rows, so the first round can fire
  auto rules = enabled_rules(exec, infra, exec.at("0"));
  REQUIRE(rules.size() == 1);
  CHECK(rules[0] == Rule::DStep);
  // after a local write of i, cached neighbor rows fall behind the reader's
  // write count and the modal blocks until fresh values arrive
  Fragment& zero = exec.at("0");
  zero.writes["i"] = 1;
  CHECK(enabled_rules(exec, infra, zero).empty());
  Message fresh{false, "2", "i", {"0"}, B(true), 1, 0, ChiVal::False};
  exec.pending.push_back(fresh);
  deliver(exec, 0);
  rules = enabled_rules(exec, infra, zero);
  REQUIRE(rules.size() == 1);
  CHECK(rules[0] == Rule::DStep);
}

TEST_CASE("agreement rules fire in protocol order on a two node chain") {
  json doc{{"nodes", json::array({json{{"id", "a"}}, json{{"id", "b"}}})},
           {"edges", json::array({json::array({"a", "b"})})},
           {"node_labels",
            {{"g",
              {{"domain", {{"kind", "bool"}}},
               {"values", {{"a", {{"bool", true}}}, {"b", {{"bool", true}}}}}}}}}};
  Field f = load_field(doc);
  Infrastructure infra = Infrastructure::bfs(f);
  StmtPtr p = Stmt::until(Formula::label("g"), Stmt::skip());
  DistExecution exec = project(infra, p);

  // only the leaf b can report (the root needs b's ?true first)
  auto rules_a = enabled_rules(exec, infra, exec.at("a"));
  auto rules_b = enabled_rules(exec, infra, exec.at("b"));
  REQUIRE(rules_b.size() == 1);
  CHECK(rules_b[0] == Rule::DAgreeT);
  CHECK(rules_a.empty());

  frag_step(exec, infra, 1, Rule::DAgreeT);
  REQUIRE(exec.pending.size() == 1);
  deliver(exec, 0);
  rules_a = enabled_rules(exec, infra, exec.at("a"));
  REQUIRE(rules_a.size() == 1);
  CHECK(rules_a[0] == Rule::DAgreeN1);  // root with all children ?true decides

  frag_step(exec, infra, 0, Rule::DAgreeN1);
  auto after = enabled_rules(exec, infra, exec.at("a"));
  REQUIRE(after.size() == 1);
  CHECK(after[0] == Rule::DUntilT);
  frag_step(exec, infra, 0, Rule::DUntilT);
  CHECK(exec.at("a").done());
  // b adopts the decision once the message lands, then exits
  deliver(exec, 0);
  auto rules_b2 = enabled_rules(exec, infra, exec.at("b"));
  REQUIRE(rules_b2.size() == 1);
  CHECK(rules_b2[0] == Rule::DAgreeP);
  frag_step(exec, infra, 1, Rule::DAgreeP);
  auto rules_b3 = enabled_rules(exec, infra, exec.at("b"));
  REQUIRE(rules_b3.size() == 1);
  CHECK(rules_b3[0] == Rule::DUntilT);
}

TEST_CASE("false at a leaf decides the round without the rest of the tree") {
  json doc{{"nodes", json::array({json{{"id", "a"}}, json{{"id", "b"}}})},
           {"edges", json::array({json::array({"a", "b"})})},
           {"node_labels",
            {{"g",
              {{"domain", {{"kind", "bool"}}},
               {"values", {{"a", {{"bool", true}}}, {"b", {{"bool", false}}}}}}}}}};
  Field f = load_field(doc);
  Infrastructure infra = Infrastructure::bfs(f);
  StmtPtr p = Stmt::if_else(Formula::label("g"), Stmt::skip(), Stmt::skip());
  DistExecution exec = project(infra, p);
  auto rules_b = enabled_rules(exec, infra, exec.at("b"));
  REQUIRE(rules_b.size() == 1);
  CHECK(rules_b[0] == Rule::DAgreeF1);
  frag_step(exec, infra, 1, Rule::DAgreeF1);
  // b is already decided locally
  auto next_b = enabled_rules(exec, infra, exec.at("b"));
  REQUIRE(next_b.size() == 1);
  CHECK(next_b[0] == Rule::DIfF);
}

TEST_CASE("message delivery is exactly once and keeps the newest write") {
  Field f = fixture_field("fig1.json");
  Infrastructure infra = Infrastructure::bfs(f);
  DistExecution exec = project(infra, Stmt::skip());
  Message msg{false, "2", "i", {"0"}, B(true), 5, 0, ChiVal::False};
  exec.pending.push_back(msg);
  Message stale{false, "2", "i", {"0"}, B(false), 3, 0, ChiVal::False};
  exec.pending.push_back(stale);
  deliver(exec, 0);
  CHECK(*exec.at("0").cell("i", "2")->value == B(true));
  deliver(exec, 0);  // the stale write does not regress the cache
  CHECK(*exec.at("0").cell("i", "2")->value == B(true));
  CHECK(exec.at("0").cell("i", "2")->seq == 5);
  // an empty recipient set is a no-op
  exec.pending.push_back(Message{false, "2", "i", {}, B(false), 9, 0, ChiVal::False});
  deliver(exec, 0);
  CHECK(*exec.at("0").cell("i", "2")->value == B(true));
}

TEST_CASE("simulate: skip everywhere terminates immediately") {
  Field f = fixture_field("fig1.json");
  DistExecution exec = simulate(Infrastructure::bfs(f), Stmt::skip(), {});
  CHECK(agrees_with(exec, f));
  CHECK(exec.pending.empty());
}

TEST_CASE("simulate agrees with the global run across seeds") {
  struct Case {
    const char* field;
    const char* program;
  };
  for (const Case& c : {Case{"fig1.json", "programs/fig1_ef.smuc"},
                        Case{"fig3_tree.json", "programs/fig3_tree.smuc"},
                        Case{"fig1.json", "programs/guards.smuc"},
                        Case{"fig1.json", "programs/branch.smuc"}}) {
    Field f = fixture_field(c.field);
    StmtPtr source = parse_program(read_fixture_text(c.program));
    RunResult global = run(source, f);
    json expect = erased_field(global.field);
    Infrastructure infra = Infrastructure::bfs(f);
    StmtPtr saf = translate_program(source, 0).first;
    for (uint64_t seed = 0; seed < 12; ++seed) {
      SimulateOptions opts;
      opts.seed = seed;
      opts.keep_log = false;
      DistExecution exec = simulate(infra, saf, opts);
      CHECK_MESSAGE(erased_lift(exec) == expect, c.program, " seed ", seed);
    }
  }
}

TEST_CASE("fig3 program: many seeds reach the spanning tree") {
  Field f = fixture_field("fig3_tree.json");
  Infrastructure infra = Infrastructure::bfs(f);
  StmtPtr saf = saf_of("programs/fig3_tree.smuc");
  json expect;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    SimulateOptions opts;
    opts.seed = seed;
    opts.keep_log = false;
    DistExecution exec = simulate(infra, saf, opts);
    json lifted = erased_lift(exec);
    if (seed == 0) {
      expect = lifted;
      CHECK(lifted.at("D").at("2") == T({N(3), ND("3")}).to_json());
      CHECK(lifted.at("D").at("1") == T({N(1), ND("0")}).to_json());
    }
    CHECK(lifted == expect);
  }
}

TEST_CASE("until exits are justified and agreement state never regresses") {
  Field f = fixture_field("fig1.json");
  Infrastructure infra = Infrastructure::bfs(f);
  StmtPtr saf = saf_of("programs/guards.smuc");
  SimulateOptions opts;
  opts.seed = 3;
  DistExecution exec = simulate(infra, saf, opts);

  // collect, per (label, iter): local reports and whether UntilT consumed it
  std::map<std::pair<std::string, uint64_t>, std::set<std::string>> reported_true;
  std::set<std::pair<std::string, uint64_t>> until_true;
  for (const auto& e : exec.log) {
    if (e.body.value("event", "") != "rule") continue;
    std::string rule = e.body.value("rule", "");
    auto key = [&e]() {
      return std::pair<std::string, uint64_t>(e.body.at("label").get<std::string>(),
                                              e.body.at("iter").get<uint64_t>());
    };
    if (rule == "D-AgreeT" || rule == "D-AgreeN1")
      reported_true[key()].insert(e.body.at("node").get<std::string>());
    if (rule == "D-UntilT") until_true.insert(key());
  }
  CHECK(!until_true.empty());
  for (const auto& key : until_true) {
    // every node reported a local true for that iteration
    CHECK(reported_true[key].size() == f.nodes().size());
  }

  // tree locality of agreement messages
  for (const auto& e : exec.log) {
    if (e.body.value("event", "") != "send") continue;
    const json& msg = e.body.at("msg");
    if (!msg.contains("iter")) continue;
    std::string from = msg.at("from");
    auto rel = infra.relatives(from);
    for (const auto& to : msg.at("to")) {
      bool is_relative = std::find(rel.begin(), rel.end(), to.get<std::string>()) != rel.end();
      CHECK(is_relative);
    }
  }
}

TEST_CASE("deadlock dumps the stuck fragments") {
  // an assignment reading a label nobody defines can never fire
  Field f = fixture_field("fig1.json");
  StmtPtr p = Stmt::assign("x", Formula::label("ghost"));
  CHECK_THROWS_WITH_AS(simulate(Infrastructure::bfs(f), p, {}), doctest::Contains("stuck"),
                       Error);
}
