#include <fstream>
#include <sstream>

#include "doctest.h"

#include "dialoplan/error.hpp"
#include "dialoplan/fixtures.hpp"
#include "dialoplan/pddl.hpp"
#include "dialoplan/plan.hpp"
#include "dialoplan/planner.hpp"

using namespace dialoplan;

namespace {

DialoguePlan plan_of(const FondProblem& p) {
  const auto sol = solve(p);
  REQUIRE(sol);
  return compile_plan(p, *sol);
}

State state_of(const DialoguePlan& plan, std::initializer_list<const char*> names) {
  State s;
  for (const char* n : names) s.insert(*plan.fluents.find(n));
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Two-node plan whose root has the given outcomes, all leading to Done.
DialoguePlan fan(const std::vector<Outcome>& outcomes) {
  DialoguePlan plan;
  plan.fluents.declare("x");
  plan.fluents.declare("y");
  plan.nodes = {{0, "ask", ActionKind::kDialogue}, {1, "Done", std::nullopt}};
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    plan.edges.push_back({0, 1, i, outcomes[i], outcome_formula(outcomes[i])});
  plan.goals = {1};
  return plan;
}

}  // namespace

TEST_SUITE("plan") {
  TEST_CASE("luggage plan labels") {
    const DialoguePlan plan = plan_of(fixtures::luggage().ground());
    plan.check();
    CHECK(plan.nodes.size() == 5);
    CHECK(plan.goals.size() == 2);
    CHECK(plan.nodes[plan.initial].action == "ask-checkin-luggage");
    std::vector<std::string> labels;
    for (std::size_t e : plan.out_edges(plan.initial)) labels.push_back(edge_label(plan, plan.edges[e]));
    CHECK(labels == std::vector<std::string>{"[no-checkin]", "[ok-checkin, have-number]", "[ok-checkin]", "[ ]"});
    // the empty outcome loops back
    const PlanEdge& stay = plan.edges[plan.out_edges(plan.initial).back()];
    CHECK(stay.to == plan.initial);
    CHECK(stay.formula == Formula::truth());
    int services = 0;
    for (const auto& n : plan.nodes)
      if (n.kind == ActionKind::kService) ++services;
    CHECK(services == 1);
  }

  TEST_CASE("edge labels show deletes") {
    const Outcome o(State{0}, State{1});
    const DialoguePlan plan = fan({o});
    CHECK(edge_label(plan, plan.edges[0]) == "[x, not y]");
  }

  TEST_CASE("formula text round-trips") {
    FluentTable t;
    for (const char* text : {"true", "x", "(not x)", "(and x (not y))", "(or (and x y) (not z))"}) {
      CAPTURE(text);
      const Formula f = parse_formula(text, t);
      CHECK(render_formula(f, t) == text);
    }
    CHECK_THROWS_AS(parse_formula("(xor a b)", t), ParseError);
    CHECK_THROWS_AS(parse_formula("(and a", t), ParseError);
  }

  TEST_CASE("JSON round trip on every fixture") {
    for (const auto& name : fixtures::names()) {
      CAPTURE(name);
      const DialoguePlan plan = plan_of(fixtures::by_name(name).ground());
      const auto doc = to_json(plan);
      CHECK(doc["version"] == "dialoplan-plan/1");
      const DialoguePlan back = from_json(doc);
      CHECK(to_json(back) == doc);
      CHECK(back.fluents == plan.fluents);
      CHECK(to_json(from_json(nlohmann::json::parse(doc.dump(2)))) == doc);
    }
  }

  TEST_CASE("from_json rejects broken documents") {
    const auto good = to_json(plan_of(fixtures::luggage().ground()));
    auto broken = [&](auto edit) {
      auto doc = good;
      edit(doc);
      return doc;
    };
    CHECK_THROWS_AS(from_json(nlohmann::json::array()), StructuralError);
    CHECK_THROWS_AS(from_json(broken([](auto& d) { d["version"] = "dialoplan-plan/0"; })), StructuralError);
    CHECK_THROWS_AS(from_json(broken([](auto& d) { d.erase("nodes"); })), StructuralError);
    CHECK_THROWS_AS(from_json(broken([](auto& d) { d["initial"] = "zero"; })), StructuralError);
    CHECK_THROWS_AS(from_json(broken([](auto& d) { d["edges"][0]["to"] = 42; })), StructuralError);
    CHECK_THROWS_AS(from_json(broken([](auto& d) { d["edges"][0]["formula"] = "(and"; })), StructuralError);
    CHECK_THROWS_AS(from_json(broken([](auto& d) { d["goals"] = nlohmann::json::array(); })), StructuralError);
    CHECK_THROWS_AS(from_json(broken([](auto& d) { d["nodes"][0]["kind"] = "oracle"; })), StructuralError);
    CHECK_THROWS_AS(from_json(broken([](auto& d) { d["edges"].erase(0); })), StructuralError);
  }

  TEST_CASE("DOT export") {
    const DialoguePlan plan = plan_of(fixtures::luggage().ground());
    const std::string dot = to_dot(plan);
    CHECK(dot.rfind("digraph dialogue_plan {", 0) == 0);
    CHECK(dot.find("start -> n" + std::to_string(plan.initial) + ";") != std::string::npos);
    CHECK(dot.find("label=\"set-luggage-checkin\", shape=ellipse") != std::string::npos);
    CHECK(dot.find("peripheries=2") != std::string::npos);
    CHECK(dot.find("[label=\"[ok-checkin, have-number]\"]") != std::string::npos);
    CHECK(dot.find("[label=\"[ ]\"]") != std::string::npos);
    // single-outcome edges stay unlabelled
    for (std::size_t e = 0; e < plan.edges.size(); ++e) {
      const PlanEdge& edge = plan.edges[e];
      if (plan.out_edges(edge.from).size() != 1) continue;
      const std::string line = "n" + std::to_string(edge.from) + " -> n" + std::to_string(edge.to) + ";";
      CHECK(dot.find(line) != std::string::npos);
    }
  }

  TEST_CASE("branch resolution") {
    const DialoguePlan plan = plan_of(fixtures::luggage().ground());
    const NodeId root = plan.initial;
    SUBCASE("unique match") {
      const auto r = resolve_branch(plan, root, {}, state_of(plan, {"ok-checkin"}));
      REQUIRE(r.ok());
      CHECK(plan.edges[*r.edge].outcome_index == 2);
      CHECK_FALSE(r.duplicate_outcomes);
    }
    SUBCASE("empty outcome") {
      const auto r = resolve_branch(plan, root, {}, {});
      REQUIRE(r.ok());
      CHECK(plan.edges[*r.edge].outcome_index == 3);
    }
    SUBCASE("nothing consistent") {
      const auto r = resolve_branch(plan, root, {}, state_of(plan, {"luggage-checkin-set"}));
      CHECK_FALSE(r.ok());
      CHECK(r.failure == BranchResolution::Failure::kNoConsistentBranch);
      CHECK(to_string(r.failure) == "no-consistent-branch");
    }
    SUBCASE("full-state equality, not containment") {
      const auto r = resolve_branch(plan, root, {}, state_of(plan, {"ok-checkin", "luggage-checkin-set"}));
      CHECK_FALSE(r.ok());
    }
  }

  TEST_CASE("ambiguous and duplicate branches") {
    SUBCASE("different outcomes, same successor") {
      const DialoguePlan plan = fan({Outcome(State{0}, {}), Outcome(State{0}, State{1})});
      const auto r = resolve_branch(plan, 0, {}, State{0});
      CHECK_FALSE(r.ok());
      CHECK(r.failure == BranchResolution::Failure::kAmbiguousBranches);
      CHECK(r.consistent.size() == 2);
    }
    SUBCASE("identical outcomes") {
      const DialoguePlan plan = fan({Outcome(State{1}, {}), Outcome(State{0}, {}), Outcome(State{0}, {})});
      const auto r = resolve_branch(plan, 0, {}, State{0});
      REQUIRE(r.ok());
      CHECK(r.duplicate_outcomes);
      CHECK(*r.edge == 1);
    }
  }

  TEST_CASE("plans map back onto problems") {
    for (const auto& name : fixtures::names()) {
      CAPTURE(name);
      const FondProblem p = fixtures::by_name(name).ground();
      const DialoguePlan plan = plan_of(p);
      const FondSolution back = solution_from_plan(p, from_json(to_json(plan)));
      CHECK(validate(p, back).valid());
    }
  }

  TEST_CASE("plan fluents are remapped by name") {
    const std::string dir = std::string(DIALOPLAN_SOURCE_DIR) + "/fixtures/luggage/";
    std::string domain = read_file(dir + "domain.pddl");
    const std::string problem = read_file(dir + "problem.pddl");
    const auto from = domain.find("    (ok-checkin)\n");
    REQUIRE(from != std::string::npos);
    domain.erase(from, 17);
    domain.insert(domain.find("(luggage-checkin-set))") + 21, " (ok-checkin)");
    const auto d = pddl::parse_domain(domain);
    const FondProblem reordered = pddl::ground(d, pddl::parse_problem(problem, d));
    const FondProblem original = fixtures::luggage().ground();
    REQUIRE(reordered.fluents.at("ok-checkin") != original.fluents.at("ok-checkin"));
    const DialoguePlan plan = plan_of(original);
    CHECK(validate(reordered, solution_from_plan(reordered, plan)).valid());
  }

  TEST_CASE("solution_from_plan rejects mismatches") {
    const FondProblem p = fixtures::luggage().ground();
    DialoguePlan plan = plan_of(p);
    SUBCASE("unknown action") {
      plan.nodes[plan.initial].action = "ask-something-else";
      CHECK_THROWS_AS(solution_from_plan(p, plan), StructuralError);
    }
    SUBCASE("tampered outcome") {
      plan.edges[0].outcome = Outcome(State{*plan.fluents.find("luggage-checkin-set")}, {});
      CHECK_THROWS_AS(solution_from_plan(p, plan), StructuralError);
    }
    SUBCASE("fluent outside the problem") {
      plan.fluents.declare("ghost");
      CHECK_THROWS_AS(solution_from_plan(p, plan), StructuralError);
    }
  }

  TEST_CASE("compile_plan refuses invalid solutions") {
    const FondProblem p = fixtures::luggage().ground();
    auto sol = solve(p);
    REQUIRE(sol);
    for (auto& e : sol->edges)
      if (e.from == sol->root) e.to = sol->root;
    CHECK_THROWS_AS(compile_plan(p, *sol), StructuralError);
  }
}
