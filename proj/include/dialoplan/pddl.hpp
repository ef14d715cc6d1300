#pragma once

// FOND-flavoured PDDL subset: typed lifted actions, `oneof` effects,
// negative and universally quantified (negated-atom) preconditions.
//
// Beyond plain PDDL the reader accepts `(:constants ...)` in the domain,
// `or` in preconditions and goals, and an optional `:kind dialogue|service|system`
// slot on actions that carries the dialogue action taxonomy.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dialoplan/model.hpp"
#include "dialoplan/sexpr.hpp"

namespace dialoplan::pddl {

struct TypedName {
  std::string name;
  std::string type = "object";

  friend bool operator==(const TypedName&, const TypedName&) = default;
};

struct Predicate {
  std::string name;
  std::vector<TypedName> parameters;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Predicate applied to variables (`?r`) and/or object names.
struct Atom {
  std::string predicate;
  std::vector<std::string> arguments;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Condition {
  enum class Kind { kAtom, kNot, kAnd, kOr, kForallNot };

  Kind kind = Kind::kAnd;  // empty conjunction: true
  Atom atom;               // kAtom, kForallNot
  TypedName bound;         // kForallNot
  std::vector<Condition> children;

  static Condition make_atom(Atom a);
  static Condition make_not(Condition c);
  static Condition make_and(std::vector<Condition> cs);

  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Effect {
  enum class Kind { kLiteral, kAnd, kOneof };

  Kind kind = Kind::kAnd;  // empty conjunction: no change
  Atom atom;
  bool positive = true;
  std::vector<Effect> children;

  friend bool operator==(const Effect&, const Effect&) = default;
};

struct ActionSchema {
  std::string name;
  ActionKind kind = ActionKind::kDialogue;
  std::vector<TypedName> parameters;
  Condition precondition;
  Effect effect;

  friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

struct LiftedDomain {
  std::string name;
  std::vector<std::string> requirements;
  std::vector<std::string> types;
  std::vector<TypedName> constants;
  std::vector<Predicate> predicates;
  std::vector<ActionSchema> actions;

  const Predicate* find_predicate(std::string_view name) const;
  const ActionSchema* find_action(std::string_view name) const;
  bool has_type(std::string_view type) const;

  friend bool operator==(const LiftedDomain&, const LiftedDomain&) = default;
};

struct LiftedProblem {
  std::string name;
  std::string domain;
  std::vector<TypedName> objects;
  std::vector<Atom> init;
  Condition goal;

  friend bool operator==(const LiftedProblem&, const LiftedProblem&) = default;
};

LiftedDomain parse_domain(std::string_view text);
LiftedProblem parse_problem(std::string_view text, const LiftedDomain& domain);

/// Precondition / goal and effect readers, exposed for builders that take
/// formula snippets. They check shape only; declarations are checked by
/// `check_domain`.
Condition parse_condition(const sexpr::Node& node);
Effect parse_effect(const sexpr::Node& node);
Condition parse_condition(std::string_view text);
Effect parse_effect(std::string_view text);

/// Declaration checks run by parse_domain: types, predicate arities,
/// variable binding, `oneof` placement. Throws ParseError.
void check_domain(const LiftedDomain& domain);

std::string print_condition(const Condition& c);
std::string print_effect(const Effect& e);
std::string print_domain(const LiftedDomain& domain);
std::string print_problem(const LiftedProblem& problem);

/// `(force-reason bad-weather)` grounds to fluent `force-reason-bad-weather`.
std::string ground_fluent_name(std::string_view predicate, const std::vector<std::string>& args);
/// `handle-forced-dialogue` over `(bad-weather)` is named `handle-forced-dialogue(bad-weather)`.
std::string ground_action_name(std::string_view schema, const std::vector<std::string>& args);
/// Inverse of ground_action_name: schema name and argument list.
std::pair<std::string, std::vector<std::string>> split_ground_action_name(std::string_view name);

struct GroundOptions {
  std::size_t max_ground_actions = 100000;
  /// Drop ground actions whose precondition is false on static fluents.
  bool prune_static = true;
};

FondProblem ground(const LiftedDomain& domain, const LiftedProblem& problem,
                   const GroundOptions& options = {});

/// Effect tree flattened to its ordered outcome list, as literal lists
/// (before grounding). Nested `and` over `oneof` expands as a cross product,
/// first factor varying slowest.
std::vector<std::vector<std::pair<Atom, bool>>> flatten_effect(const Effect& effect);

}  // namespace dialoplan::pddl
