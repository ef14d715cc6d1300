// Thin bindings: documents cross the boundary as JSON text and are decoded on
// the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dialoplan/error.hpp"
#include "dialoplan/fixtures.hpp"
#include "dialoplan/orchestrator.hpp"
#include "dialoplan/pddl.hpp"
#include "dialoplan/plan.hpp"
#include "dialoplan/planner.hpp"
#include "dialoplan/runtime_fixtures.hpp"
#include "dialoplan/synth.hpp"

namespace py = pybind11;
using namespace dialoplan;

namespace {

FondProblem ground_text(const std::string& domain, const std::string& problem) {
  const auto d = pddl::parse_domain(domain);
  return pddl::ground(d, pddl::parse_problem(problem, d));
}

std::optional<std::string> solve_text(const std::string& domain, const std::string& problem,
                                      std::size_t max_expansions, double time_limit_s) {
  const FondProblem p = ground_text(domain, problem);
  SolveOptions opts{max_expansions, std::chrono::milliseconds(static_cast<long long>(time_limit_s * 1000))};
  std::optional<FondSolution> sol;
  {
    py::gil_scoped_release release;
    sol = solve(p, opts);
  }
  if (!sol) return std::nullopt;
  return to_json(compile_plan(p, *sol)).dump();
}

std::vector<std::pair<std::string, std::string>> validate_text(const std::string& domain, const std::string& problem,
                                                               const std::string& plan_json) {
  const FondProblem p = ground_text(domain, problem);
  const DialoguePlan plan = from_json(nlohmann::json::parse(plan_json));
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& v : validate(p, solution_from_plan(p, plan)).violations)
    out.emplace_back(std::string(to_string(v.property)), v.witness);
  return out;
}

std::string synth_csv(std::size_t instances, std::uint64_t seed, unsigned threads, bool record_timing) {
  synth::ExperimentOptions opts;
  opts.instances = instances;
  opts.master_seed = seed;
  opts.threads = threads;
  opts.record_timing = record_timing;
  std::vector<synth::InstanceRecord> records;
  {
    py::gil_scoped_release release;
    records = synth::run_experiment(opts);
  }
  std::ostringstream os;
  synth::write_csv(os, records);
  return os.str();
}

std::string run_script_text(const std::string& script_json, const std::string& weather) {
  fixtures::RuntimeOptions opts;
  opts.weather = weather;
  const PlanLibrary library = fixtures::standard_library(opts);
  return run_script(library, script_from_json(nlohmann::json::parse(script_json))).to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_dialoplan, m) {
  m.doc() = "FOND dialogue planning core";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BuildError>(m, "BuildError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);
  py::register_exception<NoPlanError>(m, "NoPlanError", PyExc_LookupError);
  py::register_exception<UnsolvableError>(m, "UnsolvableError", PyExc_RuntimeError);

  m.def("solve", &solve_text, py::arg("domain"), py::arg("problem"), py::arg("max_expansions") = 1'000'000,
        py::arg("time_limit_s") = 60.0, "Plan JSON text, or None when no strong-cyclic solution exists.");
  m.def("validate", &validate_text, py::arg("domain"), py::arg("problem"), py::arg("plan_json"),
        "List of (property, witness) violations; empty when the plan is valid.");
  m.def(
      "to_dot", [](const std::string& plan_json) { return to_dot(from_json(nlohmann::json::parse(plan_json))); },
      py::arg("plan_json"));
  m.def("fixture_names", &fixtures::names);
  m.def(
      "fixture_pddl",
      [](const std::string& name) {
        const auto f = fixtures::by_name(name);
        return std::make_pair(pddl::print_domain(f.built.domain), pddl::print_problem(f.problem));
      },
      py::arg("name"));
  m.def("synth_csv", &synth_csv, py::arg("instances"), py::arg("seed"), py::arg("threads") = 0,
        py::arg("record_timing") = true);
  m.def("run_script", &run_script_text, py::arg("script_json"), py::arg("weather") = "ok");
}
