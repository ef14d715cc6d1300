#include "dialoplan/fixtures.hpp"

#include <stdexcept>

namespace dialoplan::fixtures {
namespace {

DomainFixture finish(const std::string& name, const kit::DomainBuilder& b, const std::vector<std::string>& init,
                     const std::string& goal) {
  DomainFixture f;
  f.name = name;
  f.built = b.build();
  f.problem = b.make_problem(name + "-problem", init, goal);
  return f;
}

}  // namespace

DomainFixture luggage() {
  kit::DomainBuilder b("luggage");
  b.declare_flag("checkin")
      .declare_fluent("no-checkin")
      .declare_fluent("have-number")
      .declare_fluent("luggage-checkin-set");
  // Outcomes: no luggage / yes with a number / yes without one / no usable answer.
  b.add_dialogue_action("ask-checkin-luggage", "(and (not (ok-checkin)) (not (no-checkin)))",
                        {"(no-checkin)", "(and (ok-checkin) (have-number))", "(ok-checkin)", "(and)"});
  b.add_dialogue_action("ask-how-many", "(and (ok-checkin) (not (have-number)))", {"(have-number)", "(and)"});
  b.add_service_action("set-luggage-checkin", "(and (ok-checkin) (have-number) (not (luggage-checkin-set)))",
                       {"(luggage-checkin-set)"});
  return finish("luggage", b, {}, "(or (no-checkin) (luggage-checkin-set))");
}

DomainFixture trip() {
  kit::DomainBuilder b("trip");
  b.declare_slot("location-orig")
      .declare_slot("location-dest")
      .declare_slot("dates")
      .declare_flag("locations")
      .declare_flag("weather")
      .declare_fluent("inferior-weather")
      .declare_fluent("goal");

  b.add_dialogue_action("ask-user-orig", "(and (not (have-location-orig)) (not (maybe-location-orig)))",
                        {"(have-location-orig)", "(and)"});
  b.add_dialogue_action("ask-user-dest", "(and (not (have-location-dest)) (not (maybe-location-dest)))",
                        {"(have-location-dest)", "(maybe-location-dest)", "(and)"});
  b.add_dialogue_action(
      "confirm-user-dest", "(and (maybe-location-dest) (not (have-location-dest)))",
      {"(and (have-location-dest) (not (maybe-location-dest)) (forced-followup dialogue) (force-reason affirm-ok))",
       "(not (maybe-location-dest))"});
  b.add_dialogue_action("ask-dates", "(and (not (have-dates)) (not (maybe-dates)))",
                        {"(have-dates)", "(and (forced-followup dialogue) (force-reason bad-dates))", "(and)"});
  b.add_service_action("validate-locations",
                       "(and (have-location-orig) (have-location-dest) (not (ok-locations)))",
                       {"(ok-locations)", "(not (have-location-dest))"}, ActionKind::kSystem);
  b.add_service_action(
      "check-weather", "(and (ok-locations) (have-dates) (not (ok-weather)) (not (inferior-weather)))",
      {"(ok-weather)", "(and (inferior-weather) (forced-followup dialogue) (force-reason bad-weather))",
       "(and (ok-weather) (forced-followup dialogue) (force-reason no-weather-service))"});
  b.add_action({"handle-forced-dialogue",
                ActionKind::kDialogue,
                {{"?r", kit::kReasonType}},
                "(and (forced-followup dialogue) (force-reason ?r))",
                {"(and (not (forced-followup dialogue)) (not (force-reason ?r)))"}});
  b.add_dialogue_action("suggest-change-dates", "(inferior-weather)",
                        {"(and (not (inferior-weather)) (not (have-dates)))",
                         "(and (not (inferior-weather)) (ok-weather))", "(and)"});
  b.add_service_action("book-trip", "(and (ok-locations) (have-dates) (ok-weather) (not (goal)))",
                       {"(goal)", "(and)"});

  b.compile_followups({{"dialogue"},
                       {"bad-weather", "bad-dates", "no-weather-service", "affirm-ok"},
                       {{"dialogue", {"handle-forced-dialogue"}}}});
  return finish("trip", b, {"(maybe-location-dest)"}, "(goal)");
}

DomainFixture career(bool career_goal_known) {
  kit::DomainBuilder b("career");
  b.declare_slot("career-goal")
      .declare_slot("pathway")
      .declare_fluent("goal-recs-ready")
      .declare_fluent("explanation-requested")
      .declare_fluent("goal-rejected")
      .declare_fluent("pathway-recs-ready")
      .declare_fluent("pathway-rejected");

  b.add_service_action("recommend-career-goals",
                       "(and (not (have-career-goal)) (not (goal-recs-ready)) (not (goal-rejected)))",
                       {"(goal-recs-ready)", "(and)"});
  b.add_dialogue_action(
      "present-career-goals",
      "(and (goal-recs-ready) (not (have-career-goal)) (not (explanation-requested)) (not (goal-rejected)))",
      {"(and (have-career-goal) (not (maybe-career-goal)) (not (goal-recs-ready)))", "(explanation-requested)",
       "(and (goal-rejected) (not (goal-recs-ready)))", "(and)"});
  b.add_dialogue_action("explain-career-goal", "(explanation-requested)", {"(not (explanation-requested))"});
  b.add_dialogue_action("elicit-goal-feedback", "(goal-rejected)", {"(not (goal-rejected))", "(and)"});
  b.add_service_action(
      "recommend-pathways",
      "(and (have-career-goal) (not (pathway-recs-ready)) (not (have-pathway)) (not (pathway-rejected)))",
      {"(pathway-recs-ready)", "(and)"});
  b.add_dialogue_action("present-pathway", "(and (pathway-recs-ready) (not (have-pathway)) (not (pathway-rejected)))",
                        {"(and (have-pathway) (not (maybe-pathway)) (not (pathway-recs-ready)))",
                         "(and (pathway-rejected) (not (pathway-recs-ready)))", "(and)"});
  b.add_dialogue_action("elicit-pathway-feedback", "(pathway-rejected)", {"(not (pathway-rejected))", "(and)"});

  std::vector<std::string> init;
  if (career_goal_known) init.push_back("(have-career-goal)");
  return finish(career_goal_known ? "career-pathway" : "career", b, init, "(have-pathway)");
}

DomainFixture multi_intent(const std::vector<std::string>& active_intents) {
  kit::DomainBuilder b("multi-intent");
  b.declare_slot("location-dest")
      .declare_slot("dates")
      .declare_fluent("weather-reported")
      .declare_fluent("trip-booked");
  b.add_dialogue_action("ask-user-dest", "(and (not (have-location-dest)) (not (maybe-location-dest)))",
                        {"(have-location-dest)", "(and)"});
  b.add_dialogue_action("ask-dates", "(and (not (have-dates)) (not (maybe-dates)))", {"(have-dates)", "(and)"});
  b.add_service_action("report-weather", "(and (have-location-dest) (not (weather-reported)))",
                       {"(weather-reported)", "(and)"});
  b.add_service_action("book-flight", "(and (have-location-dest) (have-dates) (not (trip-booked)))",
                       {"(trip-booked)", "(and)"});
  b.compile_intents({{{"book-trip", "(trip-booked)"}, {"weather-only", "(weather-reported)"}}});

  std::vector<std::string> init;
  for (const auto& i : active_intents) init.push_back("(intent-" + i + ")");
  return finish("multi-intent", b, init, "(goal)");
}

std::vector<std::string> names() { return {"luggage", "trip", "career", "career-pathway", "multi-intent"}; }

DomainFixture by_name(const std::string& name) {
  if (name == "luggage") return luggage();
  if (name == "trip") return trip();
  if (name == "career") return career(false);
  if (name == "career-pathway") return career(true);
  if (name == "multi-intent") return multi_intent();
  throw std::out_of_range("unknown fixture '" + name + "'");
}

}  // namespace dialoplan::fixtures
