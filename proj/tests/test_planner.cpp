#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "dialoplan/error.hpp"
#include "dialoplan/fixtures.hpp"
#include "dialoplan/pddl.hpp"
#include "dialoplan/plan.hpp"
#include "dialoplan/planner.hpp"

using namespace dialoplan;

namespace {

/// Random problem over `n` fluents: conjunctive preconditions and goal,
/// outcomes with up to two literals each.
FondProblem random_problem(std::mt19937& rng, int n, int actions) {
  FondProblem p;
  for (int i = 0; i < n; ++i) p.fluents.declare("f" + std::to_string(i));
  auto pick = [&](int k) { return static_cast<int>(rng() % static_cast<unsigned>(k)); };
  auto literals = [&](int max) {
    std::vector<Literal> lits;
    std::vector<bool> used(n, false);
    for (int k = pick(max + 1); k > 0; --k) {
      const int f = pick(n);
      if (used[f]) continue;
      used[f] = true;
      lits.push_back({static_cast<FluentId>(f), rng() % 2 == 0});
    }
    return lits;
  };
  for (int i = 0; i < n; ++i)
    if (rng() % 2) p.init.insert(static_cast<FluentId>(i));
  for (int a = 0; a < actions; ++a) {
    NDAction act;
    act.name = "a" + std::to_string(a);
    act.precondition = Formula::of_literals(literals(2));
    for (int o = 1 + pick(3); o > 0; --o) {
      State add, del;
      for (const auto& l : literals(2)) (l.positive ? add : del).insert(l.fluent);
      act.outcomes.emplace_back(add, del);
    }
    p.actions.push_back(std::move(act));
  }
  auto goal = literals(2);
  if (goal.empty()) goal.push_back({0, true});
  p.goal = Formula::of_literals(goal);
  return p;
}

oracle::Mask mask(const State& s) {
  oracle::Mask m = 0;
  for (FluentId id : s.ids()) m |= 1u << id;
  return m;
}

FondProblem solved_luggage(FondSolution& out) {
  FondProblem p = fixtures::luggage().ground();
  auto sol = solve(p);
  REQUIRE(sol);
  out = *sol;
  return p;
}

}  // namespace

TEST_SUITE("planner") {
  TEST_CASE("agrees with exhaustive policy search on tiny problems") {
    std::mt19937 rng(11);
    int solvable = 0;
    for (int trial = 0; trial < 400; ++trial) {
      CAPTURE(trial);
      const FondProblem p = random_problem(rng, 3, 1 + trial % 3);
      const oracle::Problem o = oracle::from_fond(p);
      const auto sol = solve(p);
      const bool exists = oracle::exists_policy(o);
      REQUIRE(sol.has_value() == exists);
      CHECK(oracle::strong_cyclic_region(o).count(o.init) == (exists ? 1u : 0u));
      if (!sol) continue;
      ++solvable;
      CHECK(validate(p, *sol).valid());
      std::vector<int> policy(1u << 3, -1);
      for (const auto& node : sol->nodes)
        if (!node.done()) policy[mask(node.state)] = static_cast<int>(node.action);
      CHECK(oracle::policy_solves(o, policy));
    }
    // both outcomes should be well represented
    CHECK(solvable > 60);
    CHECK(solvable < 340);
  }

  TEST_CASE("luggage solution shape") {
    FondSolution sol;
    const FondProblem p = solved_luggage(sol);
    CHECK(sol.action_node_count() == 3);
    CHECK(sol.done_node_count() == 2);
    CHECK(p.actions[sol.nodes[sol.root].action].name == "ask-checkin-luggage");
    CHECK(sol.nodes[sol.root].state == p.init);
    for (NodeId n = 0; n < sol.nodes.size(); ++n) {
      const auto out = sol.out_edges(n);
      if (sol.nodes[n].done()) {
        CHECK(out.empty());
        CHECK(eval_formula(p.goal, sol.nodes[n].state));
        continue;
      }
      const NDAction& a = p.actions[sol.nodes[n].action];
      REQUIRE(out.size() == a.outcomes.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i]->outcome == i);
        CHECK(sol.nodes[out[i]->to].state == apply_outcome(sol.nodes[n].state, a.outcomes[i]));
      }
    }
  }

  TEST_CASE("goal already true gives a lone Done node") {
    FondProblem p;
    p.fluents.declare("g");
    p.init = State{0};
    p.goal = Formula::atom(0);
    auto sol = solve(p);
    REQUIRE(sol);
    CHECK(sol->nodes.size() == 1);
    CHECK(sol->nodes[0].done());
    CHECK(validate(p, *sol).valid());
  }

  TEST_CASE("dead ends make a problem unsolvable") {
    FondProblem p;
    const FluentId g = p.fluents.declare("g"), dead = p.fluents.declare("dead");
    p.goal = Formula::atom(g);
    NDAction a;
    a.name = "gamble";
    a.precondition = Formula::literal({dead, false});
    a.outcomes = {Outcome(State{g}, {}), Outcome(State{dead}, {})};
    p.actions.push_back(a);
    CHECK_FALSE(solve(p).has_value());
    // a way back out makes it strong-cyclic
    NDAction back;
    back.name = "recover";
    back.precondition = Formula::atom(dead);
    back.outcomes = {Outcome({}, State{dead})};
    p.actions.push_back(back);
    auto sol = solve(p);
    REQUIRE(sol);
    CHECK(sol->action_node_count() == 2);
    CHECK(validate(p, *sol).valid());
  }

  TEST_CASE("ties go to the first declared action") {
    FondProblem p;
    const FluentId g = p.fluents.declare("g");
    p.goal = Formula::atom(g);
    for (const char* name : {"first", "second"}) {
      NDAction a;
      a.name = name;
      a.outcomes = {Outcome(State{g}, {})};
      p.actions.push_back(a);
    }
    auto sol = solve(p);
    REQUIRE(sol);
    CHECK(p.actions[sol->nodes[sol->root].action].name == "first");
  }

  TEST_CASE("solving is deterministic") {
    const FondProblem p = fixtures::trip().ground();
    const auto a = solve(p);
    const auto b = solve(p);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->edges == b->edges);
    REQUIRE(a->nodes.size() == b->nodes.size());
    for (std::size_t i = 0; i < a->nodes.size(); ++i) {
      CHECK(a->nodes[i].action == b->nodes[i].action);
      CHECK(a->nodes[i].state == b->nodes[i].state);
    }
  }

  TEST_CASE("expansion budget raises ResourceError") {
    const FondProblem p = fixtures::trip().ground();
    CHECK_THROWS_AS(solve(p, {2, std::chrono::milliseconds(60'000)}), ResourceError);
    SolveStats stats;
    CHECK(solve(p, {}, &stats));
    CHECK(stats.expanded_states > 2);
    CHECK(stats.fixpoint_rounds >= 1);
  }

  TEST_CASE("validator flags a wrong root action") {
    FondSolution sol;
    const FondProblem p = solved_luggage(sol);
    const std::size_t ask_number = *p.find_action("ask-how-many");
    sol.nodes[sol.root].action = ask_number;
    // keep the edge count consistent with the new action
    std::erase_if(sol.edges, [&](const SolutionEdge& e) { return e.from == sol.root && e.outcome >= 2; });
    const auto report = validate(p, sol);
    CHECK_FALSE(report.has(SolutionProperty::kStructural));
    CHECK(report.has(SolutionProperty::kRootApplicable));
  }

  TEST_CASE("validator flags inapplicable actions downstream") {
    FondSolution sol;
    const FondProblem p = solved_luggage(sol);
    bool found = false;
    for (std::size_t e = 0; e < sol.edges.size() && !found; ++e)
      for (NodeId n = 0; n < sol.nodes.size() && !found; ++n) {
        if (sol.nodes[n].done() || n == sol.edges[e].to) continue;
        FondSolution bad = sol;
        bad.edges[e].to = n;
        const auto report = validate(p, bad);
        if (report.has(SolutionProperty::kAllApplicable)) {
          found = true;
          CHECK_FALSE(report.has(SolutionProperty::kStructural));
        }
      }
    CHECK(found);
  }

  TEST_CASE("validator flags loops with no way out") {
    FondSolution sol;
    const FondProblem p = solved_luggage(sol);
    for (auto& e : sol.edges)
      if (e.from == sol.root) e.to = sol.root;
    const auto report = validate(p, sol);
    CHECK(report.has(SolutionProperty::kLeafReachable));
  }

  TEST_CASE("validator flags structural damage") {
    FondSolution sol;
    const FondProblem p = solved_luggage(sol);
    SUBCASE("missing edge") {
      sol.edges.erase(sol.edges.begin());
      CHECK(validate(p, sol).has(SolutionProperty::kStructural));
    }
    SUBCASE("dangling target") {
      sol.edges.back().to = 99;
      CHECK(validate(p, sol).has(SolutionProperty::kStructural));
    }
    SUBCASE("edges out of Done") {
      NodeId done = 0;
      while (!sol.nodes[done].done()) ++done;
      sol.edges.push_back({done, 0, sol.root});
      CHECK(validate(p, sol).has(SolutionProperty::kStructural));
    }
    SUBCASE("unknown action") {
      sol.nodes[sol.root].action = p.actions.size() + 3;
      CHECK(validate(p, sol).has(SolutionProperty::kStructural));
    }
  }

  TEST_CASE("reachable pairs follow the policy states") {
    for (const auto& name : fixtures::names()) {
      CAPTURE(name);
      const FondProblem p = fixtures::by_name(name).ground();
      const auto sol = solve(p);
      REQUIRE(sol);
      const auto pairs = enumerate_reachable(p, *sol);
      REQUIRE_FALSE(pairs.empty());
      CHECK(pairs.front() == ReachablePair{p.init, sol->root});
      std::set<NodeId> nodes;
      for (const auto& [state, node] : pairs) {
        CHECK(sol->nodes[node].state == state);
        nodes.insert(node);
      }
      // every node of the policy is reached
      CHECK(nodes.size() == sol->nodes.size());
    }
  }

  TEST_CASE("fixture sizes") {
    const std::map<std::string, std::size_t> nodes = {
        {"luggage", 5}, {"trip", 18}, {"career", 8}, {"career-pathway", 4}, {"multi-intent", 4}};
    for (const auto& [name, count] : nodes) {
      CAPTURE(name);
      const FondProblem p = fixtures::by_name(name).ground();
      const auto sol = solve(p);
      REQUIRE(sol);
      CHECK(sol->nodes.size() == count);
      CHECK(validate(p, *sol).valid());
    }
  }
}
