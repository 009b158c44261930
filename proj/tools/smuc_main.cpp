#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "smuc/dist.hpp"
#include "smuc/rescue.hpp"
#include "smuc/strategy.hpp"

namespace fs = std::filesystem;
using namespace smuc;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::BadArgument, "cannot open " + path);
  json j;
  in >> j;
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::BadArgument, "cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::BadArgument, "cannot write " + path);
  out << text;
}

json valuation_json(const NodeValuation& v) {
  json j = json::object();
  for (const auto& [n, val] : v) j[n] = val.to_json();
  return j;
}

std::string valuation_line(const NodeValuation& v) {
  std::string out;
  for (const auto& [n, val] : v) out += n + "=" + val.str() + " ";
  if (!out.empty()) out.pop_back();
  return out;
}

void dump_dot_rows(const Field& base, const std::string& label,
                   const std::vector<NodeValuation>& rows, const std::string& dir) {
  fs::create_directories(dir);
  for (size_t i = 0; i < rows.size(); ++i) {
    Field f = base;
    f.assign_node_label(label, nullptr, rows[i]);
    write_text_file(dir + "/iter" + std::to_string(i) + ".dot", f.to_dot({label}));
  }
}

EvalOptions eval_options(std::optional<size_t> max_iters) {
  EvalOptions opts;
  opts.max_iters = max_iters;
  return opts;
}

// ------------------------------------------------------------- subcommands

int cmd_eval(const std::string& field_path, const std::string& formula_text, bool trace,
             const std::string& dot_dir, bool as_json, std::optional<size_t> max_iters) {
  Field f = load_field(read_json_file(field_path));
  FormulaPtr psi = parse_formula(formula_text);
  EvalOptions opts = eval_options(max_iters);
  if (trace) {
    auto rows = eval_trace(f, {}, *psi, opts);
    if (as_json) {
      json arr = json::array();
      for (const auto& r : rows) arr.push_back(valuation_json(r));
      std::cout << json{{"trace", arr}}.dump(2) << "\n";
    } else {
      for (size_t i = 0; i < rows.size(); ++i)
        std::cout << "psi^" << i << ": " << valuation_line(rows[i]) << "\n";
    }
    if (!dot_dir.empty()) dump_dot_rows(f, "psi", rows, dot_dir);
    return 0;
  }
  NodeValuation v = eval_formula(f, {}, *psi, opts);
  if (as_json)
    std::cout << json{{"result", valuation_json(v)}}.dump(2) << "\n";
  else
    std::cout << valuation_line(v) << "\n";
  if (!dot_dir.empty()) dump_dot_rows(f, "psi", {v}, dot_dir);
  return 0;
}

int cmd_run(const std::string& field_path, const std::string& program_path, bool trace,
            bool as_json, size_t fuel, std::optional<size_t> max_iters) {
  Field f = load_field(read_json_file(field_path));
  StmtPtr p = parse_program(read_text_file(program_path));
  StepHook hook;
  if (trace)
    hook = [](const Stmt& fired, const Field&) {
      if (fired.tag == Stmt::Tag::Assign) std::cout << "step: " << fired.label << " <- ...\n";
    };
  RunResult r = run(p, std::move(f), fuel, hook, eval_options(max_iters));
  if (as_json)
    std::cout << json{{"steps", r.steps}, {"field", dump_field(r.field)}}.dump(2) << "\n";
  else {
    std::cout << "terminated after " << r.steps << " steps\n";
    for (const auto& name : r.field.node_label_names())
      std::cout << name << ": " << valuation_line(r.field.node_label(name).values) << "\n";
  }
  return 0;
}

int cmd_compile(const std::string& program_path, const std::string& out_path) {
  StmtPtr p = parse_program(read_text_file(program_path));
  auto [saf, counter] = translate_program(p, 0);
  (void)counter;
  std::string text = print_program(*saf) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);
  return 0;
}

int cmd_dist(const std::string& field_path, const std::string& program_path, uint64_t seed,
             const std::string& trace_path, const std::string& tree_arg, bool as_json,
             size_t fuel) {
  Field f = load_field(read_json_file(field_path));
  StmtPtr p = parse_program(read_text_file(program_path));
  if (!is_saf(*p)) p = translate_program(p, 0).first;
  Infrastructure infra =
      tree_arg == "bfs" ? Infrastructure::bfs(f) : Infrastructure::from_json(f, read_json_file(tree_arg));
  SimulateOptions opts;
  opts.seed = seed;
  opts.fuel = fuel;
  opts.keep_log = !trace_path.empty();
  DistExecution exec = simulate(infra, p, opts);
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    for (const auto& e : exec.log) out << e.body.dump() << "\n";
  }
  auto lifted = lift(exec);
  json j = json::object();
  for (const auto& [label, v] : lifted) {
    if (is_aux_label(label)) continue;
    j[label] = valuation_json(v);
  }
  if (as_json)
    std::cout << json{{"tree", infra.tree_json()}, {"labels", j}}.dump(2) << "\n";
  else
    for (const auto& [label, v] : j.items()) std::cout << label << ": " << v.dump() << "\n";
  return 0;
}

int cmd_fuzz(const std::string& field_path, const std::string& formula_text, size_t trials,
             uint64_t seed, const std::string& failures_path) {
  Field f = load_field(read_json_file(field_path));
  FormulaPtr psi = parse_formula(formula_text);
  require(psi->is_fixpoint(), ErrorKind::BadArgument, "fuzz needs a top-level fixpoint formula");
  if (!failures_path.empty()) {
    FailureSpec spec = FailureSpec::from_json(read_json_file(failures_path));
    NodeValuation lfp = eval_formula(f, {}, *psi);
    FixpointStep step = fixpoint_step(f, psi);
    auto trace = run_failures(step, Strategy::random_fair(f.nodes(), seed), spec);
    bool ok = trace.back() == lfp;
    std::cout << (ok ? "failure run stabilized to the synchronous fixpoint\n"
                     : "MISMATCH: failure run diverged from the synchronous fixpoint\n");
    return ok ? 0 : 1;
  }
  RobustnessReport rep = check_robustness(f, psi, trials, seed);
  std::cout << "strategy runs: " << rep.strategy_agreements << "/" << rep.trials
            << " reached the synchronous fixpoint\n";
  std::cout << "failure runs:  " << rep.failure_agreements << "/" << rep.trials
            << " reached the synchronous fixpoint\n";
  for (const auto& c : rep.counterexamples) std::cout << "counterexample: " << c << "\n";
  return rep.ok() ? 0 : 1;
}

int cmd_rescue(size_t landmarks, size_t victims, size_t rescuers, uint64_t seed, long howmany,
               const std::string& dot_dir, bool check, bool as_json) {
  ScenarioSpec spec;
  spec.landmarks = landmarks;
  spec.rescuers = rescuers;
  spec.seed = seed;
  for (size_t i = 0; i < victims; ++i) spec.victims.push_back({"v" + std::to_string(i), howmany});
  Field f = gen_scenario(spec);
  RescueRun result = run_rescue(f);
  json assigned = json::object();
  for (const auto& [v, rs] : result.assignment.rescuers_of)
    assigned[v] = std::vector<std::string>(rs.begin(), rs.end());
  int rc = 0;
  json out{{"success", result.assignment.success},
           {"saved", std::vector<std::string>(result.assignment.saved.begin(),
                                              result.assignment.saved.end())},
           {"assigned", assigned},
           {"steps", result.steps}};
  if (check) {
    Assignment oracle = oracle_assignment(f);
    bool match = oracle.rescuers_of == result.assignment.rescuers_of &&
                 oracle.saved == result.assignment.saved;
    out["oracle_match"] = match;
    if (!match) rc = 1;
  }
  if (!dot_dir.empty()) {
    fs::create_directories(dot_dir);
    write_text_file(dot_dir + "/final.dot",
                    result.field.to_dot({"victim", "rescuer", "engaged"}));
  }
  if (as_json)
    std::cout << out.dump(2) << "\n";
  else {
    std::cout << (result.assignment.success ? "all victims saved" : "victims remain") << "\n";
    for (const auto& [v, rs] : out.at("assigned").items())
      std::cout << "  " << v << " <- " << rs.dump() << "\n";
    if (check) std::cout << "oracle match: " << (out["oracle_match"].get<bool>() ? "yes" : "no") << "\n";
  }
  return rc;
}

int cmd_check(const std::string& field_path, const std::string& formula_text, uint64_t seed,
              size_t samples) {
  Field f = load_field(read_json_file(field_path));
  Rng rng(seed);
  bool ok = true;
  for (const auto& name : f.node_label_names()) {
    const auto& domain = f.node_label(name).domain;
    if (!domain) continue;
    size_t failures = 0;
    for (size_t i = 0; i < samples; ++i) {
      Value a = domain->canonicalize(domain->sample(rng));
      Value b = domain->canonicalize(domain->sample(rng));
      Value j = domain->join(a, b);
      if (!domain->leq(a, j) || !domain->leq(b, j)) ++failures;
      if (domain->leq(a, b) != (domain->join(a, b) == b)) ++failures;
    }
    // chain height probe: strictly ascending joins from bottom must stop
    Value cur = domain->bottom();
    size_t ascents = 0;
    for (size_t i = 0; i < samples && ascents < 512; ++i) {
      Value up = domain->join(cur, domain->canonicalize(domain->sample(rng)));
      if (up != cur) ++ascents;
      cur = up;
    }
    bool label_ok = failures == 0 && ascents < 512;
    ok = ok && label_ok;
    std::cout << "label " << name << ": " << (label_ok ? "ok" : "LAW VIOLATION") << "\n";
  }
  if (!formula_text.empty()) {
    FormulaPtr psi = parse_formula(formula_text);
    MonotoneReport rep = check_monotone(*psi, f, seed, true);
    std::cout << "formula: " << (rep.accepted ? "monotone" : "rejected: " + rep.offender) << "\n";
    ok = ok && rep.accepted;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixpoint computational fields over semiring-valued graphs"};
  app.require_subcommand(1);

  std::string field_path, program_path, formula_text, dot_dir, out_path, trace_path;
  std::string tree_arg = "bfs";
  std::string failures_path;
  bool trace = false, as_json = false, check = false;
  uint64_t seed = 0;
  size_t trials = 100, fuel = 1000000, samples = 200;
  size_t landmarks = 0, victims = 0, rescuers = 0;
  long howmany = 1;
  std::optional<size_t> max_iters;

  auto add_max_iters = [&](CLI::App* sub) {
    sub->add_option("--max-iters", max_iters, "fixpoint iteration cap");
  };

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a formula on a field");
  eval_cmd->add_option("--field", field_path)->required();
  eval_cmd->add_option("--formula", formula_text)->required();
  eval_cmd->add_flag("--trace", trace);
  eval_cmd->add_option("--dot", dot_dir);
  eval_cmd->add_flag("--json", as_json);
  add_max_iters(eval_cmd);

  auto* run_cmd = app.add_subcommand("run", "run a program on a field");
  run_cmd->add_option("--field", field_path)->required();
  run_cmd->add_option("--program", program_path)->required();
  run_cmd->add_flag("--trace", trace);
  run_cmd->add_flag("--json", as_json);
  run_cmd->add_option("--fuel", fuel);
  add_max_iters(run_cmd);

  auto* compile_cmd = app.add_subcommand("compile", "translate a program to simple assignment form");
  compile_cmd->add_option("--program", program_path)->required();
  compile_cmd->add_option("-o,--output", out_path);

  auto* dist_cmd = app.add_subcommand("dist", "message-level distributed simulation");
  dist_cmd->add_option("--field", field_path)->required();
  dist_cmd->add_option("--program", program_path)->required();
  dist_cmd->add_option("--seed", seed);
  dist_cmd->add_option("--trace", trace_path, "event log (JSON lines)");
  dist_cmd->add_option("--tree", tree_arg, "bfs or a tree JSON file");
  dist_cmd->add_flag("--json", as_json);
  dist_cmd->add_option("--fuel", fuel);

  auto* fuzz_cmd = app.add_subcommand("fuzz", "random fair strategies and failure sequences");
  fuzz_cmd->add_option("--field", field_path)->required();
  fuzz_cmd->add_option("--formula", formula_text)->required();
  fuzz_cmd->add_option("--trials", trials);
  fuzz_cmd->add_option("--seed", seed);
  fuzz_cmd->add_option("--failures", failures_path, "failure spec JSON");

  auto* rescue_cmd = app.add_subcommand("rescue", "run the rescuer-assignment case study");
  rescue_cmd->add_option("--landmarks", landmarks)->required();
  rescue_cmd->add_option("--victims", victims)->required();
  rescue_cmd->add_option("--rescuers", rescuers)->required();
  rescue_cmd->add_option("--seed", seed);
  rescue_cmd->add_option("--howmany", howmany);
  rescue_cmd->add_option("--dot", dot_dir);
  rescue_cmd->add_flag("--check", check, "compare with the explicit assignment oracle");
  rescue_cmd->add_flag("--json", as_json);

  auto* check_cmd = app.add_subcommand("check", "domain law and monotonicity probes");
  check_cmd->add_option("--field", field_path)->required();
  check_cmd->add_option("--formula", formula_text);
  check_cmd->add_option("--seed", seed);
  check_cmd->add_option("--samples", samples);

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval_cmd->parsed())
      return cmd_eval(field_path, formula_text, trace, dot_dir, as_json, max_iters);
    if (run_cmd->parsed()) return cmd_run(field_path, program_path, trace, as_json, fuel, max_iters);
    if (compile_cmd->parsed()) return cmd_compile(program_path, out_path);
    if (dist_cmd->parsed())
      return cmd_dist(field_path, program_path, seed, trace_path, tree_arg, as_json, fuel);
    if (fuzz_cmd->parsed()) return cmd_fuzz(field_path, formula_text, trials, seed, failures_path);
    if (rescue_cmd->parsed())
      return cmd_rescue(landmarks, victims, rescuers, seed, howmany, dot_dir, check, as_json);
    if (check_cmd->parsed()) return cmd_check(field_path, formula_text, seed, samples);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.internal() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
