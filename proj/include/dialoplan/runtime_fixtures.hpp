#pragma once

// Runtime bindings (fluent rules, transformers, NLU rules) for the bundled
// fixtures, plus a generic binding for arbitrary PDDL problems.

#include <optional>
#include <string>
#include <vector>

#include "dialoplan/fixtures.hpp"
#include "dialoplan/orchestrator.hpp"

namespace dialoplan::fixtures {

struct RuntimeOptions {
  /// Default weather stub answer: "ok", "bad" (bad weather on the first check
  /// only) or "unavailable". A session overrides it with the `weather-stub`
  /// context variable.
  std::string weather = "ok";
  /// When set, check-weather calls this endpoint instead of the stub.
  std::optional<std::string> weather_url;
  std::vector<std::string> career_goals{"Data Scientist", "Product Manager", "UX Designer"};
  std::vector<std::string> pathways{"Evening bootcamp", "Online certificate", "Internal rotation"};
};

/// Intents: affirm, deny, hedge, explain, feedback and the top-level
/// check-in-luggage, plan-trip, career-coaching, asked-about-weather.
/// Entities: `@place`, `@number`, `@date`.
Nlu demo_nlu();

RuntimeBinding luggage_binding(const RuntimeOptions& options = {});
RuntimeBinding trip_binding(const RuntimeOptions& options = {});
RuntimeBinding career_binding(const RuntimeOptions& options = {}, bool career_goal_known = false);
RuntimeBinding multi_intent_binding(const std::vector<std::string>& active_intents = {"book-trip", "weather-only"});

/// Entry for a bundled fixture by name; throws std::out_of_range.
PlanEntry runtime_entry(const std::string& name, const RuntimeOptions& options = {});

/// Every bundled fixture, keyed by fixture name, with the demo NLU.
PlanLibrary standard_library(const RuntimeOptions& options = {});

/// Binding for a plan without hand-written transformers. Every fluent mirrors a
/// boolean variable of the same name, seeded from the problem's initial state.
/// A dialogue node's reply picks an outcome by index (`#2`, `2`) or by its
/// label (`[have-number]`); anything else leaves the state unchanged. Service
/// and system nodes take their first outcome.
RuntimeBinding generic_binding(const FondProblem& problem);

}  // namespace dialoplan::fixtures
