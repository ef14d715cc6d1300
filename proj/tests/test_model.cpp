#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "dialoplan/error.hpp"
#include "dialoplan/model.hpp"
#include "dialoplan/plan.hpp"

using namespace dialoplan;

namespace {

std::string random_formula(std::mt19937& rng, int depth, int fluents) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 4 : 1);
  std::uniform_int_distribution<int> var(0, fluents - 1);
  switch (pick(rng)) {
    case 0:
    case 1: return "f" + std::to_string(var(rng));
    case 2: return "(not " + random_formula(rng, depth - 1, fluents) + ")";
    default: {
      std::string op = pick(rng) % 2 ? "and" : "or";
      std::string s = "(" + op;
      int n = 2 + static_cast<int>(rng() % 2);
      for (int i = 0; i < n; ++i) s += " " + random_formula(rng, depth - 1, fluents);
      return s + ")";
    }
  }
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("fluent table interns densely and rejects bad names") {
    FluentTable t;
    CHECK(t.intern("have-number") == 0);
    CHECK(t.intern("ok-checkin") == 1);
    CHECK(t.intern("have-number") == 0);
    CHECK(t.at("ok-checkin") == 1);
    CHECK_FALSE(t.find("nope"));
    CHECK_THROWS_AS(t.declare("have-number"), StructuralError);
    CHECK_THROWS_AS(t.declare("Bad Name"), StructuralError);
    CHECK_THROWS_AS(t.at("nope"), StructuralError);
  }

  TEST_CASE("state equality is canonical") {
    State a{1, 70};
    a.erase(70);
    CHECK(a == State{1});
    CHECK(a.hash() == State{1}.hash());
    CHECK(State{}.empty());
    CHECK(State{2, 3}.count() == 2);
    CHECK(State{1, 2}.with(State{5}, State{1}) == State{2, 5});
    CHECK(State{1}.subset_of(State{1, 2}));
    CHECK(State{1}.disjoint(State{2}));
  }

  TEST_CASE("evaluator agrees with the truth-table oracle over 5 fluents") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const std::string text = random_formula(rng, 3, 5);
      FluentTable t;
      for (int i = 0; i < 5; ++i) t.intern("f" + std::to_string(i));
      const Formula f = parse_formula(text, t);
      oracle::TextFormula ref(text);
      for (unsigned mask = 0; mask < 32; ++mask) {
        State s;
        std::set<std::string> truth;
        for (FluentId i = 0; i < 5; ++i)
          if (mask >> i & 1) {
            s.insert(i);
            truth.insert("f" + std::to_string(i));
          }
        REQUIRE_MESSAGE(eval_formula(f, s) == ref.eval(truth), text << " at mask " << mask);
      }
    }
  }

  TEST_CASE("rendering is stable under reparse") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      FluentTable t;
      const Formula f = parse_formula(random_formula(rng, 3, 4), t);
      const std::string once = render_formula(f, t);
      CHECK(render_formula(parse_formula(once, t), t) == once);
    }
    FluentTable t;
    CHECK(render_formula(Formula::truth(), t) == "true");
  }

  TEST_CASE("unground formulas refuse evaluation") {
    Formula f = Formula::forall_not({"?t", "followup-type", "forced-followup", {"?t"}});
    CHECK_FALSE(f.ground());
    CHECK_THROWS_AS(eval_formula(f, State{}), StructuralError);
  }

  TEST_CASE("outcomes reject overlapping adds and deletes") {
    CHECK_THROWS_AS(Outcome(State{1}, State{1}), StructuralError);
    Outcome o(State{0}, State{2});
    CHECK(apply_outcome(State{2, 3}, o) == State{0, 3});
    CHECK(Outcome().empty());
    auto lits = o.literals();
    REQUIRE(lits.size() == 2);
    CHECK(lits[0] == Literal{0, true});
    CHECK(lits[1] == Literal{2, false});
  }

  TEST_CASE("conjunct literals") {
    const auto f = Formula::of_literals({{0, true}, {1, false}});
    auto lits = f.conjunct_literals();
    REQUIRE(lits);
    CHECK(lits->size() == 2);
    CHECK_FALSE(Formula::disjunction({Formula::atom(0), Formula::atom(1)}).conjunct_literals());
  }

  TEST_CASE("action kinds round-trip by name") {
    for (auto k : {ActionKind::kDialogue, ActionKind::kService, ActionKind::kSystem})
      CHECK(action_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(action_kind_from_string("robot"), StructuralError);
  }

  TEST_CASE("problem checks") {
    FondProblem p;
    p.fluents.declare("a");
    p.actions.push_back({"x", ActionKind::kDialogue, Formula::truth(), {Outcome(State{0}, State{})}});
    CHECK_NOTHROW(p.check());
    CHECK(p.find_action("x") == 0u);

    auto dup = p;
    dup.actions.push_back(dup.actions.front());
    CHECK_THROWS_AS(dup.check(), StructuralError);

    auto done = p;
    done.actions.front().name = "Done";
    CHECK_THROWS_AS(done.check(), StructuralError);

    auto empty = p;
    empty.actions.front().outcomes.clear();
    CHECK_THROWS_AS(empty.check(), StructuralError);

    auto undeclared = p;
    undeclared.goal = Formula::atom(7);
    CHECK_THROWS_AS(undeclared.check(), StructuralError);
  }
}
