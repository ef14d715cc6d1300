// dialoplan: plan, validate, compile-domain, synth, run-script, serve, fixtures.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dialoplan/error.hpp"
#include "dialoplan/fixtures.hpp"
#include "dialoplan/gateway.hpp"
#include "dialoplan/kit.hpp"
#include "dialoplan/orchestrator.hpp"
#include "dialoplan/pddl.hpp"
#include "dialoplan/plan.hpp"
#include "dialoplan/planner.hpp"
#include "dialoplan/runtime_fixtures.hpp"
#include "dialoplan/synth.hpp"

namespace fs = std::filesystem;
using namespace dialoplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnsolvable = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

FondProblem load_problem(const std::string& domain_path, const std::string& problem_path) {
  pddl::LiftedDomain domain;
  try {
    domain = pddl::parse_domain(slurp(domain_path));
  } catch (const ParseError& e) {
    throw ParseError(domain_path + ":" + e.what());
  }
  pddl::LiftedProblem problem;
  try {
    problem = pddl::parse_problem(slurp(problem_path), domain);
  } catch (const ParseError& e) {
    throw ParseError(problem_path + ":" + e.what());
  }
  return pddl::ground(domain, problem);
}

int cmd_plan(const std::string& domain, const std::string& problem, const std::string& out, const std::string& dot,
             long long max_expansions, long long time_limit_ms) {
  const FondProblem p = load_problem(domain, problem);
  SolveOptions opts;
  opts.max_expansions = static_cast<std::size_t>(max_expansions);
  opts.time_limit = std::chrono::milliseconds(time_limit_ms);
  SolveStats stats;
  const auto solution = solve(p, opts, &stats);
  if (!solution) {
    std::cerr << "unsolvable (" << stats.expanded_states << " states explored)\n";
    return kExitUnsolvable;
  }
  const DialoguePlan plan = compile_plan(p, *solution);
  const std::string json = to_json(plan).dump(2) + "\n";
  if (out.empty() || out == "-")
    std::cout << json;
  else
    write_file(out, json);
  if (!dot.empty()) write_file(dot, to_dot(plan));
  std::cerr << plan.nodes.size() << " nodes (" << solution->action_node_count() << " actions, "
            << solution->done_node_count() << " Done), " << stats.expanded_states << " states explored\n";
  return kExitOk;
}

int cmd_validate(const std::string& domain, const std::string& problem, const std::string& plan_path) {
  const FondProblem p = load_problem(domain, problem);
  const DialoguePlan plan = from_json(nlohmann::json::parse(slurp(plan_path)));
  const ValidationReport report = validate(p, solution_from_plan(p, plan));
  if (report.valid()) {
    std::cout << "valid\n";
    return kExitOk;
  }
  for (const auto& v : report.violations) std::cout << to_string(v.property) << ": " << v.witness << "\n";
  return kExitError;
}

int cmd_compile_domain(const std::string& spec_path, const std::string& out_dir) {
  const kit::CompiledSpec spec = kit::compile_spec(nlohmann::json::parse(slurp(spec_path)));
  write_file((fs::path(out_dir) / "domain.pddl").string(), pddl::print_domain(spec.built.domain));
  write_file((fs::path(out_dir) / "problem.pddl").string(), pddl::print_problem(spec.problem));
  for (const auto& line : spec.built.report.slot_obligations) std::cout << "obligation: " << line << "\n";
  for (const auto& c : spec.built.report.checks)
    std::cout << (c.passed ? "pass " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::size_t n = 100;
  std::uint64_t seed = 1;
  std::string out;
  std::string histogram;
  std::string gnuplot;
  double bin_width = 1.0;
  bool no_timing = false;
  unsigned threads = 0;
  int retry_cap = 20;
};

int cmd_synth(const SynthArgs& a) {
  synth::ExperimentOptions opts;
  opts.instances = a.n;
  opts.master_seed = a.seed;
  opts.threads = a.threads;
  opts.retry_cap = a.retry_cap;
  opts.record_timing = !a.no_timing;
  const auto records = synth::run_experiment(opts);

  std::ostringstream csv;
  synth::write_csv(csv, records);
  if (a.out.empty() || a.out == "-")
    std::cout << csv.str();
  else
    write_file(a.out, csv.str());

  std::size_t solved = 0, degenerate = 0, at_least_4 = 0;
  double max_ratio = 0;
  for (const auto& r : records) {
    solved += r.solved;
    degenerate += r.degenerate();
    if (auto q = r.ratio()) {
      at_least_4 += *q >= 4;
      max_ratio = std::max(max_ratio, *q);
    }
  }
  const std::size_t measured = solved - degenerate;
  std::cerr << solved << "/" << records.size() << " solved, " << degenerate << " degenerate; ratio >= 4 in "
            << at_least_4 << "/" << measured << ", max ratio " << max_ratio << "\n";

  if (measured > 0 && (!a.histogram.empty() || !a.gnuplot.empty())) {
    const auto bins = synth::ratio_histogram(records, a.bin_width);
    if (!a.histogram.empty()) {
      std::ostringstream os;
      synth::write_histogram_csv(os, bins);
      write_file(a.histogram, os.str());
    }
    if (!a.gnuplot.empty()) {
      std::ostringstream os;
      synth::write_histogram_dat(os, bins);
      write_file(a.gnuplot, os.str());
    }
  }
  return kExitOk;
}

int cmd_run_script(const std::string& script_path, const std::string& out, const std::string& weather) {
  fixtures::RuntimeOptions ro;
  if (!weather.empty()) ro.weather = weather;
  const PlanLibrary library = fixtures::standard_library(ro);
  const ScriptRun run = run_script(library, script_from_json(nlohmann::json::parse(slurp(script_path))));
  const std::string json = run.to_json().dump(2) + "\n";
  if (out.empty() || out == "-")
    std::cout << json;
  else
    write_file(out, json);
  std::cerr << "status " << to_string(run.session->status()) << (run.expectation_met ? "" : " (unexpected)") << "\n";
  return run.expectation_met ? kExitOk : kExitError;
}

int cmd_serve(const std::string& host, int port, const std::string& fixtures_dir, int ttl_minutes) {
  GatewayOptions opts;
  if (!fixtures_dir.empty()) opts.fixtures_dir = fixtures_dir;
  opts.idle_ttl = std::chrono::minutes(ttl_minutes);
  Gateway gateway(opts);
  std::cerr << "serving " << gateway.library().names().size() << " fixtures on " << host << ":" << port << "\n";
  return serve(gateway, host, port) ? kExitOk : kExitError;
}

int cmd_fixtures(const std::string& out_dir) {
  for (const auto& name : fixtures::names()) {
    const auto f = fixtures::by_name(name);
    const fs::path dir = fs::path(out_dir) / name;
    write_file((dir / "domain.pddl").string(), pddl::print_domain(f.built.domain));
    write_file((dir / "problem.pddl").string(), pddl::print_problem(f.problem));
    std::cout << dir.string() << "\n";
  }
  return kExitOk;
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dialogue plans from FOND planning domains"};
  app.require_subcommand(1);

  std::string domain, problem, out, dot, plan_path, spec, script, weather;
  long long max_expansions = 1'000'000, time_limit_ms = 60'000;

  auto* plan = app.add_subcommand("plan", "Solve a PDDL problem and write the dialogue plan as JSON");
  plan->add_option("domain", domain, "Domain file")->required();
  plan->add_option("problem", problem, "Problem file")->required();
  plan->add_option("-o,--out", out, "Plan JSON output (default stdout)");
  plan->add_option("--dot", dot, "Also write Graphviz DOT here");
  plan->add_option("--max-expansions", max_expansions, "State expansion budget");
  plan->add_option("--time-limit-ms", time_limit_ms, "Wall-clock budget");

  auto* validate_cmd = app.add_subcommand("validate", "Check a plan JSON against a PDDL problem");
  validate_cmd->add_option("domain", domain, "Domain file")->required();
  validate_cmd->add_option("problem", problem, "Problem file")->required();
  validate_cmd->add_option("plan", plan_path, "Plan JSON")->required();

  auto* compile = app.add_subcommand("compile-domain", "Build PDDL from a JSON domain description");
  compile->add_option("spec", spec, "Spec JSON")->required();
  compile->add_option("-o,--out", out, "Output directory")->required();

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Random-instance experiment; writes one CSV row per instance");
  synth_cmd->add_option("--n", sa.n, "Instances");
  synth_cmd->add_option("--seed", sa.seed, "Master seed");
  synth_cmd->add_option("--out", sa.out, "CSV output (default stdout)");
  synth_cmd->add_option("--hist", sa.histogram, "Ratio histogram CSV");
  synth_cmd->add_option("--gnuplot", sa.gnuplot, "Ratio histogram as gnuplot data");
  synth_cmd->add_option("--bin-width", sa.bin_width, "Histogram bin width");
  synth_cmd->add_option("--threads", sa.threads, "Worker threads (0: all cores)");
  synth_cmd->add_option("--retry-cap", sa.retry_cap, "Attempts per instance");
  synth_cmd->add_flag("--no-timing", sa.no_timing, "Write wall_ms as 0 so reruns are byte-identical");

  auto* run = app.add_subcommand("run-script", "Replay a scripted conversation against a bundled fixture");
  run->add_option("script", script, "Script JSON")->required();
  run->add_option("-o,--out", out, "Transcript JSON output (default stdout)");
  run->add_option("--weather", weather, "Weather stub: ok, bad, unavailable")
      ->check(CLI::IsMember({"ok", "bad", "unavailable"}));

  std::string host = "127.0.0.1";
  int port = std::stoi(env_or("DIALOPLAN_PORT", "8080"));
  std::string fixtures_dir = env_or("DIALOPLAN_FIXTURES_DIR", "");
  int ttl_minutes = 30;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP session service");
  serve_cmd->add_option("--port", port, "Port (env DIALOPLAN_PORT)");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--fixtures-dir", fixtures_dir, "Extra PDDL fixtures (env DIALOPLAN_FIXTURES_DIR)");
  serve_cmd->add_option("--ttl-minutes", ttl_minutes, "Idle session lifetime");

  auto* fixtures_cmd = app.add_subcommand("fixtures", "Write the bundled fixtures as PDDL");
  fixtures_cmd->add_option("-o,--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) return cmd_plan(domain, problem, out, dot, max_expansions, time_limit_ms);
    if (*validate_cmd) return cmd_validate(domain, problem, plan_path);
    if (*compile) return cmd_compile_domain(spec, out);
    if (*synth_cmd) return cmd_synth(sa);
    if (*run) return cmd_run_script(script, out, weather);
    if (*serve_cmd) return cmd_serve(host, port, fixtures_dir, ttl_minutes);
    if (*fixtures_cmd) return cmd_fixtures(out);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitError;
  } catch (const ResourceError& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return kExitUnsolvable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
