#pragma once

// Declarative builder for dialogue planning domains.
//
// Slots become a `have-X` / `maybe-X` pair (at most one may hold), flags become
// `ok-X`. Forced followups are modelled with the lifted predicates
// `(forced-followup ?t - followup-type)` and `(force-reason ?r - reason)`, so
// their ground fluents read `forced-followup-dialogue`, `force-reason-bad-weather`.
// Intents compile to `intent-I` fluents and `assert-intent-I` actions whose only
// effect adds `goal`.
//
// Action preconditions and outcomes are given as PDDL snippets, e.g.
// `"(and (ok-checkin) (not (have-number)))"`; `"(and)"` is the empty outcome.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "dialoplan/model.hpp"
#include "dialoplan/pddl.hpp"

namespace dialoplan::kit {

inline constexpr const char* kFollowupType = "followup-type";
inline constexpr const char* kReasonType = "reason";
inline constexpr const char* kFollowupPredicate = "forced-followup";
inline constexpr const char* kReasonPredicate = "force-reason";
inline constexpr const char* kGoalFluent = "goal";

struct ActionSpec {
  std::string name;
  ActionKind kind = ActionKind::kDialogue;
  std::vector<pddl::TypedName> parameters;
  std::string precondition = "(and)";
  std::vector<std::string> outcomes;
};

struct FollowupSpec {
  std::vector<std::string> types;
  std::vector<std::string> reasons;
  /// followup type -> names of the action schemas that handle it
  std::map<std::string, std::vector<std::string>> handlers;
};

struct Intent {
  std::string name;
  std::string condition;
};

struct IntentSpec {
  std::vector<Intent> intents;
};

struct StaticCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct StaticReport {
  /// One line per slot: `not (have-X and maybe-X)`.
  std::vector<std::string> slot_obligations;
  std::vector<StaticCheck> checks;

  bool passed() const;
};

struct BuiltDomain {
  pddl::LiftedDomain domain;
  StaticReport report;
  std::vector<std::string> slots;
};

class DomainBuilder {
 public:
  explicit DomainBuilder(std::string name);

  DomainBuilder& declare_slot(const std::string& name);
  DomainBuilder& declare_flag(const std::string& name);
  /// Plain 0-ary fluent outside the slot/flag conventions.
  DomainBuilder& declare_fluent(const std::string& name);

  DomainBuilder& add_dialogue_action(const std::string& name, const std::string& precondition,
                                     std::vector<std::string> outcomes);
  /// `kind` may be kService (API call) or kSystem (internal check).
  DomainBuilder& add_service_action(const std::string& name, const std::string& precondition,
                                    std::vector<std::string> outcomes,
                                    ActionKind kind = ActionKind::kService);
  DomainBuilder& add_action(ActionSpec spec);

  DomainBuilder& compile_followups(FollowupSpec spec);
  DomainBuilder& compile_intents(IntentSpec spec);

  /// Emits the lifted domain. Throws BuildError when any static check fails
  /// or when no actions were added.
  BuiltDomain build() const;

  /// Problem over the built domain; followup types and reasons are domain
  /// constants, so no objects are needed.
  pddl::LiftedProblem make_problem(const std::string& name, const std::vector<std::string>& init,
                                   const std::string& goal) const;

  const std::vector<std::string>& slots() const { return slots_; }

 private:
  void declare(const std::string& fluent);
  void check_atoms(const std::string& action, const pddl::Condition& c) const;
  void check_atoms(const std::string& action, const pddl::Effect& e) const;
  bool known_predicate(const std::string& name) const;
  std::vector<StaticCheck> followup_checks(const pddl::ActionSchema& handler,
                                           const std::string& type) const;

  std::string name_;
  std::vector<std::string> fluents_;
  std::set<std::string> fluent_set_;
  std::vector<std::string> slots_;
  std::vector<pddl::ActionSchema> actions_;
  std::optional<FollowupSpec> followups_;
  IntentSpec intents_;
};

struct CompiledSpec {
  BuiltDomain built;
  pddl::LiftedProblem problem;
};

/// Builds a domain and problem from a JSON description:
///
///     {"name": "luggage", "slots": [], "flags": ["checkin"], "fluents": ["no-checkin"],
///      "actions": [{"name": "ask", "kind": "dialogue", "parameters": [{"name": "?r", "type": "reason"}],
///                   "precondition": "(and)", "outcomes": ["(no-checkin)", "(and)"]}],
///      "followups": {"types": [...], "reasons": [...], "handlers": {"dialogue": ["..."]}},
///      "intents": [{"name": "book", "condition": "(booked)"}],
///      "problem": {"name": "luggage-problem", "init": ["(ok-checkin)"], "goal": "(no-checkin)"}}
///
/// Throws ConfigError on shape errors, plus whatever the builder throws.
CompiledSpec compile_spec(const nlohmann::json& spec);

}  // namespace dialoplan::kit
