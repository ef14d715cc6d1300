#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "dialoplan/error.hpp"
#include "dialoplan/fixtures.hpp"
#include "dialoplan/pddl.hpp"

using namespace dialoplan;
using namespace dialoplan::pddl;

namespace {

const char* kRoads = R"(
(define (domain roads)
  (:requirements :strips :typing :negative-preconditions :universal-preconditions :non-deterministic)
  (:types place)
  (:constants home - place)
  (:predicates (at ?p - place) (road ?a ?b - place) (lost))
  (:action drive
    :parameters (?from ?to - place)
    :precondition (and (at ?from) (road ?from ?to) (not (lost)))
    :effect (oneof (and (not (at ?from)) (at ?to)) (and (not (at ?from)) (lost)) (and)))
  (:action relocate
    :kind system
    :parameters ()
    :precondition (and (lost) (forall (?p - place) (not (at ?p))))
    :effect (and (not (lost)) (at home)))
  (:action honk
    :kind service
    :parameters (?p - place)
    :precondition (or (at ?p) (lost))
    :effect (and (at ?p) (not (at ?p)))))
)";

const char* kRoadsProblem = R"(
(define (problem trip)
  (:domain roads)
  (:objects a b c - place)
  (:init (at home) (road home a) (road a b) (road b c))
  (:goal (at c)))
)";

}  // namespace

TEST_SUITE("pddl") {
  TEST_CASE("reads the extended subset") {
    const LiftedDomain d = parse_domain(kRoads);
    CHECK(d.name == "roads");
    CHECK(d.constants.size() == 1);
    REQUIRE(d.actions.size() == 3);
    CHECK(d.actions[0].kind == ActionKind::kDialogue);
    CHECK(d.actions[1].kind == ActionKind::kSystem);
    CHECK(d.actions[2].kind == ActionKind::kService);
    CHECK(d.actions[0].effect.kind == Effect::Kind::kOneof);
    const LiftedProblem p = parse_problem(kRoadsProblem, d);
    CHECK(p.objects.size() == 3);
    CHECK(p.init.size() == 4);
  }

  TEST_CASE("syntax errors carry a source position") {
    try {
      parse_domain("(define (domain x)\n  (:predicates (a))\n  (:action go :parameters () :effect (b)))");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() > 0);
    }
    try {
      parse_domain("(define (domain x)\n  (:predicates (a)\n  (:action");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() > 0);
    }
    CHECK_THROWS_AS(parse_domain("(define (domain x) (:requirements :fluents))"), ParseError);
    CHECK_THROWS_AS(parse_domain("(define (domain x) (:predicates (p ?x - ghost)))"), ParseError);
    const LiftedDomain d = parse_domain(kRoads);
    CHECK_THROWS_AS(parse_problem("(define (problem p) (:domain other) (:init) (:goal (lost)))", d), ParseError);
    try {
      parse_problem("(define (problem p) (:domain roads)\n  (:init (lost)\n        (at nowhere))\n  (:goal (lost)))", d);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() == 9);
    }
  }

  TEST_CASE("oneof flattening matches the cross-product oracle") {
    const Effect e = parse_effect("(and (a) (oneof (b) (c)) (oneof (d) (and (e) (not (f))) (g)))");
    const auto got = flatten_effect(e);
    const auto want = oracle::cross({{{{"a", true}}},
                                     {{{"b", true}}, {{"c", true}}},
                                     {{{"d", true}}, {{"e", true}, {"f", false}}, {{"g", true}}}});
    REQUIRE(got.size() == want.size());
    CHECK(got.size() == 6);
    for (std::size_t i = 0; i < got.size(); ++i) {
      std::vector<oracle::Lit> flat;
      for (const auto& [atom, pos] : got[i]) flat.emplace_back(atom.predicate, pos);
      CHECK(flat == want[i]);
    }
  }

  TEST_CASE("print then parse is idempotent on every fixture") {
    for (const auto& name : fixtures::names()) {
      CAPTURE(name);
      const auto f = fixtures::by_name(name);
      const std::string once = print_domain(f.built.domain);
      const LiftedDomain again = parse_domain(once);
      CHECK(again == f.built.domain);
      CHECK(print_domain(again) == once);
      const std::string prob = print_problem(f.problem);
      CHECK(print_problem(parse_problem(prob, again)) == prob);
    }
    const LiftedDomain d = parse_domain(kRoads);
    CHECK(parse_domain(print_domain(d)) == d);
  }

  TEST_CASE("condition and effect snippets round-trip") {
    for (const char* text : {"(and)", "(a)", "(not (a ?x))", "(or (a) (and (b) (not (c))))",
                             "(forall (?t - kind) (not (p ?t)))"}) {
      CAPTURE(text);
      CHECK(print_condition(parse_condition(print_condition(parse_condition(text)))) ==
            print_condition(parse_condition(text)));
    }
    for (const char* text : {"(and)", "(a)", "(not (a))", "(oneof (a) (and (b) (not (c))) (and))"}) {
      CAPTURE(text);
      CHECK(parse_effect(print_effect(parse_effect(text))) == parse_effect(text));
    }
  }

  TEST_CASE("ground names") {
    CHECK(ground_fluent_name("force-reason", {"bad-weather"}) == "force-reason-bad-weather");
    CHECK(ground_fluent_name("goal", {}) == "goal");
    CHECK(ground_action_name("handle-forced-dialogue", {"bad-dates"}) == "handle-forced-dialogue(bad-dates)");
    CHECK(ground_action_name("drive", {"a", "b"}) == "drive(a,b)");
    CHECK(ground_action_name("book", {}) == "book");
    auto [schema, args] = split_ground_action_name("drive(a,b)");
    CHECK(schema == "drive");
    CHECK(args == std::vector<std::string>{"a", "b"});
  }

  TEST_CASE("grounding agrees with direct lifted interpretation") {
    const LiftedDomain d = parse_domain(kRoads);
    const LiftedProblem lp = parse_problem(kRoadsProblem, d);
    const FondProblem g = ground(d, lp, {100000, false});

    std::map<std::string, std::vector<std::string>> by_type;
    for (const auto& c : d.constants) by_type[c.type].push_back(c.name);
    for (const auto& o : lp.objects) by_type[o.type].push_back(o.name);

    std::mt19937 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
      oracle::Atoms atoms;
      State s;
      for (FluentId id = 0; id < g.fluents.size(); ++id)
        if (rng() % 3 == 0) {
          s.insert(id);
          atoms.insert(g.fluents.name(id));
        }
      for (const auto& schema : d.actions) {
        std::vector<oracle::Binding> bindings{{}};
        for (const auto& param : schema.parameters) {
          std::vector<oracle::Binding> next;
          for (const auto& b : bindings)
            for (const auto& o : by_type[param.type]) {
              auto bb = b;
              bb[param.name] = o;
              next.push_back(bb);
            }
          bindings = next;
        }
        for (const auto& b : bindings) {
          std::vector<std::string> args;
          for (const auto& param : schema.parameters) args.push_back(b.at(param.name));
          const std::string name = ground_action_name(schema.name, args);
          auto idx = g.find_action(name);
          REQUIRE_MESSAGE(idx, name);
          const NDAction& a = g.actions[*idx];
          REQUIRE_MESSAGE(applicable(a, s) == oracle::holds(schema.precondition, b, atoms, by_type), name);
          const auto want = oracle::successors(schema.effect, b, atoms);
          REQUIRE(want.size() == a.outcomes.size());
          for (std::size_t i = 0; i < want.size(); ++i) {
            oracle::Atoms got;
            for (FluentId id : apply_outcome(s, a.outcomes[i]).ids()) got.insert(g.fluents.name(id));
            CHECK_MESSAGE(got == want[i], name << " outcome " << i);
          }
        }
      }
    }
  }

  TEST_CASE("static pruning drops only actions blocked by static facts") {
    const LiftedDomain d = parse_domain(kRoads);
    const LiftedProblem lp = parse_problem(kRoadsProblem, d);
    const FondProblem all = ground(d, lp, {100000, false});
    const FondProblem pruned = ground(d, lp);
    CHECK(pruned.actions.size() < all.actions.size());
    CHECK(pruned.find_action("drive(home,a)"));
    CHECK(pruned.find_action("drive(b,c)"));
    CHECK_FALSE(pruned.find_action("drive(c,b)"));
    CHECK(pruned.find_action("relocate"));
    // fluents are every grounding regardless of pruning
    CHECK(pruned.fluents == all.fluents);
  }

  TEST_CASE("add wins over delete of the same atom") {
    const LiftedDomain d = parse_domain(kRoads);
    const FondProblem g = ground(d, parse_problem(kRoadsProblem, d));
    const NDAction& honk = g.actions[*g.find_action("honk(a)")];
    REQUIRE(honk.outcomes.size() == 1);
    CHECK(honk.outcomes[0].adds() == State{g.fluents.at("at-a")});
    CHECK(honk.outcomes[0].deletes().empty());
  }

  TEST_CASE("grounding cap raises ResourceError") {
    const auto f = fixtures::trip();
    CHECK_THROWS_AS(ground(f.built.domain, f.problem, {3, true}), ResourceError);
  }

  TEST_CASE("universal negated preconditions ground to conjunctions") {
    const LiftedDomain d = parse_domain(kRoads);
    const FondProblem g = ground(d, parse_problem(kRoadsProblem, d));
    const NDAction& r = g.actions[*g.find_action("relocate")];
    CHECK(r.precondition.ground());
    CHECK(r.kind == ActionKind::kSystem);
    State s{g.fluents.at("lost")};
    CHECK(applicable(r, s));
    s.insert(g.fluents.at("at-b"));
    CHECK_FALSE(applicable(r, s));
  }
}
