#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"

using namespace smuc;
using namespace smuc::test;

TEST_CASE("fig1 field loads") {
  Field f = fixture_field("fig1.json");
  CHECK(f.nodes() == std::vector<std::string>{"0", "1", "2", "3"});
  CHECK(f.edges().size() == 5);
  CHECK(f.label_value("i", "0") == B(true));
  CHECK(f.label_value("i", "3") == B(false));
  CHECK(f.out_neighbors("2") == std::vector<std::string>{"1", "3"});
  CHECK(f.in_neighbors("1") == std::vector<std::string>{"2", "3"});
}

TEST_CASE("empty field is valid") {
  Field f = load_field(json{{"nodes", json::array()}, {"edges", json::array()}});
  CHECK(f.nodes().empty());
}

TEST_CASE("dangling edge is rejected") {
  json doc{{"nodes", json::array({json{{"id", "0"}}})},
           {"edges", json::array({json::array({"0", "9"})})}};
  CHECK_THROWS_WITH_AS(load_field(doc), doctest::Contains("dangling"), Error);
}

TEST_CASE("non-total label is rejected") {
  json doc = read_fixture_json("fig1.json");
  doc["node_labels"]["i"]["values"].erase("3");
  CHECK_THROWS_WITH_AS(load_field(doc), doctest::Contains("not total"), Error);
}

TEST_CASE("unknown capability name is rejected") {
  json doc = read_fixture_json("fig2_cost.json");
  doc["edge_labels"]["alpha"]["caps"]["0,1"]["cap"] = "no_such_cap";
  CHECK_THROWS_WITH_AS(load_field(doc), doctest::Contains("unknown capability"), Error);
}

TEST_CASE("load then dump is the identity on documents") {
  for (const char* name : {"fig1.json", "fig1_union.json", "fig2_cost.json", "fig2_nodecost.json",
                           "fig2_pathcost.json", "fig3_tree.json"}) {
    json doc = read_fixture_json(name);
    Field f = load_field(doc);
    Field again = load_field(dump_field(f));
    CHECK(dump_field(f) == dump_field(again));
  }
}

TEST_CASE("capabilities") {
  Field f = fixture_field("fig2_cost.json");
  CHECK(f.apply_capability("alpha", {"2", "1"}, N(1)) == N(4));
  CHECK(f.apply_capability("id", {"2", "1"}, N(7)) == N(7));

  Field g = fixture_field("fig2_pathcost.json");
  // one modal step of the (cost, path) capability on edge (2,3)
  Value in = A({T({N(1), P({"1", "0"})})});
  Value out = g.apply_capability("alpha", {"2", "3"}, in);
  CHECK(out == A({T({N(2), P({"2", "1", "0"})})}));
}

TEST_CASE("capability registry rejects duplicates") {
  register_capability("test_dup_cap", [](const std::vector<json>&) {
    return Capability{"test_dup_cap", {}, [](const CapCtx&, const Value& v) { return v; }};
  });
  CHECK_THROWS_WITH_AS(
      register_capability("test_dup_cap",
                          [](const std::vector<json>&) { return Capability{}; }),
      doctest::Contains("duplicate"), Error);
}

TEST_CASE("lift order") {
  Field f = fixture_field("fig1_min.json");
  const Domain& d = *f.node_label("i").domain;
  NodeValuation bot = lifted_bottom(f.nodes(), d);
  NodeValuation psi2 = row4(N(0), N(0), N(1), N(1));
  NodeValuation psi3 = row4(N(0), N(0), N(0), N(0));
  CHECK(lift_order(bot, psi2, d));
  CHECK(lift_order(psi2, psi3, d));
  CHECK_FALSE(lift_order(psi3, psi2, d));
  DomainPtr cost = Domain::reverse(Domain::tropical());
  NodeValuation a = {{"0", N(0)}, {"1", N(5)}};
  NodeValuation b = {{"0", N(5)}, {"1", N(0)}};
  CHECK_FALSE(lift_order(a, b, *cost));
  CHECK_FALSE(lift_order(b, a, *cost));
  NodeValuation short_one = {{"0", N(0)}};
  CHECK_THROWS_AS((void)lift_order(a, short_one, *cost), Error);
}

TEST_CASE("monotonicity probe accepts the bundled capabilities") {
  Field f = fixture_field("fig2_cost.json");
  Rng rng(3);
  const Domain& d = *f.node_label("i").domain;
  for (const auto& e : f.edges()) {
    auto rep = probe_capability_monotone(f, "alpha", e, d, 20, rng);
    CHECK_MESSAGE(rep.monotone, rep.detail);
  }
}

TEST_CASE("monotonicity probe flags a non-monotone capability") {
  register_capability("test_negate_cap", [](const std::vector<json>&) {
    return Capability{"test_negate_cap", {}, [](const CapCtx&, const Value& v) {
                        return Value::boolean(!v.as_bool());
                      }};
  });
  json doc = read_fixture_json("fig1.json");
  doc["edge_labels"]["neg"] = json{{"caps", json::object()}};
  for (const auto& e : {"0,2", "2,1", "2,3", "3,1", "1,0"})
    doc["edge_labels"]["neg"]["caps"][e] = json{{"cap", "test_negate_cap"}};
  Field f = load_field(doc);
  Rng rng(3);
  auto rep = probe_capability_monotone(f, "neg", {"0", "2"}, *Domain::boolean(), 20, rng);
  CHECK_FALSE(rep.monotone);
}

TEST_CASE("dot export mentions nodes and labels") {
  Field f = fixture_field("fig1.json");
  std::string dot = f.to_dot();
  CHECK(dot.find("\"0\" -> \"2\"") != std::string::npos);
  CHECK(dot.find("i=true") != std::string::npos);
}
