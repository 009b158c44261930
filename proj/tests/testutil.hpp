#pragma once

#include <fstream>
#include <string>

#include "smuc/dist.hpp"
#include "smuc/eval.hpp"

namespace smuc::test {

inline json read_fixture_json(const std::string& name) {
  std::ifstream in(std::string(SMUC_FIXTURES) + "/" + name);
  REQUIRE_MESSAGE(in.good(), "missing fixture ", name);
  json j;
  in >> j;
  return j;
}

inline std::string read_fixture_text(const std::string& name) {
  std::ifstream in(std::string(SMUC_FIXTURES) + "/" + name);
  REQUIRE_MESSAGE(in.good(), "missing fixture ", name);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline Field fixture_field(const std::string& name) { return load_field(read_fixture_json(name)); }

inline Value B(bool b) { return Value::boolean(b); }
inline Value N(long n) { return Value::num(n); }
inline Value INF() { return Value::num(Rat::infinity()); }
inline Value ND(const std::string& id) { return Value::node(id); }
inline Value P(std::vector<std::string> nodes) { return Value::path(PathWord{false, std::move(nodes)}); }
inline Value T(ValueVec vs) { return Value::tuple(std::move(vs)); }
inline Value S(ValueVec vs) { return Value::set(std::move(vs)); }
inline Value A(ValueVec vs) { return Value::antichain(std::move(vs)); }

inline NodeValuation row4(Value v0, Value v1, Value v2, Value v3) {
  return {{"0", v0}, {"1", v1}, {"2", v2}, {"3", v3}};
}

// Brute-force least solution of f = step(f) over the Boolean domain, by
// enumerating all valuations; nullopt when no fixpoint exists (cannot happen
// for monotone bodies).
inline std::optional<NodeValuation> least_bool_fixpoint(const Field& field,
                                                        const FormulaPtr& fix) {
  FixpointStep step = fixpoint_step(field, fix);
  size_t n = field.nodes().size();
  std::vector<NodeValuation> fixes;
  for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
    NodeValuation cand;
    for (size_t i = 0; i < n; ++i)
      cand[field.nodes()[i]] = Value::boolean((mask >> i) & 1);
    if (step.apply(cand) == cand) fixes.push_back(std::move(cand));
  }
  for (const auto& f : fixes) {
    bool least = true;
    for (const auto& g : fixes) least = least && lift_order(f, g, *step.domain);
    if (least) return f;
  }
  return std::nullopt;
}

}  // namespace smuc::test
