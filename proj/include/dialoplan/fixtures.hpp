#pragma once

// Bundled example domains.

#include <string>
#include <vector>

#include "dialoplan/kit.hpp"
#include "dialoplan/pddl.hpp"

namespace dialoplan::fixtures {

struct DomainFixture {
  std::string name;
  kit::BuiltDomain built;
  pddl::LiftedProblem problem;

  FondProblem ground() const { return pddl::ground(built.domain, problem); }
};

/// Check-in-luggage toy plan: ask, ask how many, set the check-in field.
DomainFixture luggage();

/// Trip booking: origin, destination (possibly only guessed), dates, location
/// validation, weather check, forced followup messages, date-change suggestion.
/// Nine action schemas. The initial state holds a guessed destination.
DomainFixture trip();

/// Career coaching: recommend / present / explain / reject loops for a career
/// goal and then a pathway. With `career_goal_known` the initial state already
/// holds the goal and only the pathway part is planned.
DomainFixture career(bool career_goal_known = false);

/// Two top-level intents (book-trip, weather-only) over a small travel
/// domain; `active_intents` lists which `intent-*` fluents hold initially.
DomainFixture multi_intent(const std::vector<std::string>& active_intents = {"book-trip", "weather-only"});

std::vector<std::string> names();
/// By name: luggage, trip, career, career-pathway, multi-intent. Throws
/// std::out_of_range for unknown names.
DomainFixture by_name(const std::string& name);

}  // namespace dialoplan::fixtures
