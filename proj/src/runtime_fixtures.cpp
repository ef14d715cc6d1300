#include "dialoplan/runtime_fixtures.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <stdexcept>

#include "dialoplan/plan.hpp"

namespace dialoplan::fixtures {

namespace {

using Fn = std::function<TransformerResult(const TransformerCall&)>;

/// Transformer with a fixed prompt and custom respond / execute phases; absent
/// phases fall back to default_transformer.
Transformer phases(std::function<std::string(const Context&)> prompt, Fn respond = nullptr, Fn execute = nullptr) {
  return [prompt = std::move(prompt), respond = std::move(respond),
          execute = std::move(execute)](const TransformerCall& call) {
    switch (call.phase) {
      case Phase::kPrompt:
        if (prompt) return TransformerResult{{}, {}, {prompt(call.context)}, {}};
        break;
      case Phase::kRespond:
        if (respond) return respond(call);
        break;
      case Phase::kExecute:
        if (execute) return execute(call);
        break;
    }
    return default_transformer(call);
  };
}

Transformer service(Fn execute) { return phases(nullptr, nullptr, std::move(execute)); }

std::function<std::string(const Context&)> text(std::string s) {
  return [s = std::move(s)](const Context&) { return s; };
}

std::string str(const Context& c, const std::string& var, const std::string& fallback = "?") {
  const Value* v = c.get(var);
  return v ? value_to_string(*v) : fallback;
}

bool is(const TransformerCall& call, const char* intent) {
  return call.classified && call.classified->intent == intent;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Context declare_all(std::initializer_list<std::string> vars) {
  Context c;
  for (const auto& v : vars) c.declare(v);
  return c;
}

}  // namespace

Nlu demo_nlu() {
  Nlu nlu;
  nlu.add_intent("hedge", {R"(\b(maybe|perhaps|probably|i think)\b)"}, 20)
      .add_intent("explain", {R"(\b(why|explain|tell me more)\b)"}, 15)
      .add_intent("affirm", {R"(\b(yes|yeah|yep|sure|correct|sounds good)\b)"}, 10)
      .add_intent("deny", {R"(\b(no|nope|nah|not really)\b)"}, 10)
      .add_intent("check-in-luggage", {R"(\b(luggage|suitcases?|baggage|check in)\b)"}, 5)
      .add_intent("asked-about-weather", {R"(\bweather\b)"}, 5)
      .add_intent("plan-trip", {R"(\b(trip|travel|vacation|holiday)\b)"}, 5)
      .add_intent("career-coaching", {R"(\b(career|job|profession)\b)"}, 5)
      .add_intent("feedback", {R"(\b(prefer|rather|like|want|more|less|something)\b)"}, 1);
  nlu.add_gazetteer("@place", {"Paris", "Berlin", "London", "Rome", "Madrid", "Lisbon", "Vienna", "Toronto",
                               "New York", "Tokyo"})
      .add_number("@number")
      .add_pattern("@date",
                   R"(\b(today|tomorrow|yesterday|next (?:week|month|weekend|monday|tuesday|wednesday|thursday|friday|saturday|sunday)|last \w+|\d{1,2}/\d{1,2}(?:/\d{2,4})?|(?:jan|feb|mar|apr|jun|jul|aug|sep|oct|nov|dec)[a-z]* \d{1,2})\b)");
  return nlu;
}

RuntimeBinding luggage_binding(const RuntimeOptions&) {
  RuntimeBinding b;
  b.initial_context = declare_all({"checkin", "number", "luggage-checkin-set", "@number"});
  b.rules["ok-checkin"] = rules::is_true("checkin");
  b.rules["no-checkin"] = rules::equals("checkin", false);
  b.rules["have-number"] = rules::present("number");
  b.rules["luggage-checkin-set"] = rules::mirror("luggage-checkin-set");

  b.transformers["ask-checkin-luggage"] = phases(text("Would you like to check in any luggage?"),
                                                 [](const TransformerCall& call) {
                                                   TransformerResult r;
                                                   const Value* n = call.classified->entity("@number");
                                                   if (is(call, "deny")) {
                                                     r.set.emplace_back("checkin", false);
                                                   } else if (is(call, "affirm") || n) {
                                                     r.set.emplace_back("checkin", true);
                                                     if (n) r.set.emplace_back("number", *n);
                                                   }
                                                   return r;
                                                 });
  b.transformers["ask-how-many"] = phases(text("How many pieces?"), [](const TransformerCall& call) {
    TransformerResult r;
    if (const Value* n = call.classified->entity("@number")) r.set.emplace_back("number", *n);
    return r;
  });
  b.transformers["set-luggage-checkin"] = service([](const TransformerCall& call) {
    TransformerResult r;
    const std::string n = str(call.context, "number");
    r.set.emplace_back("luggage-checkin-set", true);
    r.utterances.push_back("Done: " + n + " piece(s) of luggage checked in.");
    r.service_calls.push_back({"set-luggage-checkin", {{"pieces", n}}, {{"ok", true}}});
    return r;
  });
  return b;
}

RuntimeBinding trip_binding(const RuntimeOptions& options) {
  RuntimeBinding b;
  b.initial_context = declare_all({"location-orig", "location-orig-guess", "location-dest", "location-dest-guess",
                                   "dates", "dates-guess", "locations-ok", "weather-ok", "inferior-weather",
                                   "forced-followup-dialogue", "force-reason-bad-weather", "force-reason-bad-dates",
                                   "force-reason-no-weather-service", "force-reason-affirm-ok", "goal",
                                   "weather-stub", "weather-checks", "booking", "@place", "@date"});
  // guessed from the user's profile
  b.initial_context.set("location-dest-guess", std::string("Paris"));

  for (const char* slot : {"location-orig", "location-dest", "dates"}) {
    b.rules[std::string("have-") + slot] = rules::present(slot);
    b.rules[std::string("maybe-") + slot] = rules::present(std::string(slot) + "-guess");
  }
  b.rules["ok-locations"] = rules::is_true("locations-ok");
  b.rules["ok-weather"] = rules::is_true("weather-ok");
  for (const char* f : {"inferior-weather", "forced-followup-dialogue", "force-reason-bad-weather",
                        "force-reason-bad-dates", "force-reason-no-weather-service", "force-reason-affirm-ok", "goal"})
    b.rules[f] = rules::mirror(f);

  b.transformers["ask-user-orig"] = phases(text("Where are you leaving from?"), [](const TransformerCall& call) {
    TransformerResult r;
    if (const Value* p = call.classified->entity("@place")) r.set.emplace_back("location-orig", *p);
    return r;
  });
  b.transformers["ask-user-dest"] = phases(text("Where would you like to go?"), [](const TransformerCall& call) {
    TransformerResult r;
    if (const Value* p = call.classified->entity("@place"))
      r.set.emplace_back(is(call, "hedge") ? "location-dest-guess" : "location-dest", *p);
    return r;
  });
  b.transformers["confirm-user-dest"] = phases(
      [](const Context& c) { return "Are you travelling to " + str(c, "location-dest-guess") + "?"; },
      [](const TransformerCall& call) {
        TransformerResult r;
        r.erase.push_back("location-dest-guess");
        if (is(call, "affirm")) {
          r.set.emplace_back("location-dest", *call.context.get("location-dest-guess"));
          r.set.emplace_back("forced-followup-dialogue", true);
          r.set.emplace_back("force-reason-affirm-ok", true);
        }
        return r;
      });
  b.transformers["ask-dates"] = phases(text("When do you want to travel?"), [](const TransformerCall& call) {
    TransformerResult r;
    const Value* d = call.classified->entity("@date");
    if (!d) return r;
    const std::string when = lower(value_to_string(*d));
    if (when == "yesterday" || when.rfind("last ", 0) == 0) {
      r.set.emplace_back("forced-followup-dialogue", true);
      r.set.emplace_back("force-reason-bad-dates", true);
    } else {
      r.set.emplace_back("dates", *d);
    }
    return r;
  });
  b.transformers["validate-locations"] = service([](const TransformerCall& call) {
    TransformerResult r;
    if (lower(str(call.context, "location-orig")) == lower(str(call.context, "location-dest"))) {
      r.erase.push_back("location-dest");
      r.utterances.push_back("Origin and destination are the same.");
    } else {
      r.set.emplace_back("locations-ok", true);
    }
    return r;
  });

  if (options.weather_url) {
    b.transformers["check-weather"] = http_service(*options.weather_url, {"location-dest", "dates"});
  } else {
    b.transformers["check-weather"] = service([fallback = options.weather](const TransformerCall& call) {
      TransformerResult r;
      const std::string mode = str(call.context, "weather-stub", fallback);
      const Value* checks = call.context.get("weather-checks");
      const double n = checks ? std::get<double>(*checks) : 0;
      r.set.emplace_back("weather-checks", n + 1);
      nlohmann::json request = {{"place", str(call.context, "location-dest")},
                                {"dates", str(call.context, "dates")}};
      nlohmann::json response;
      if (mode == "unavailable") {
        r.set.emplace_back("weather-ok", true);
        r.set.emplace_back("forced-followup-dialogue", true);
        r.set.emplace_back("force-reason-no-weather-service", true);
        response = {{"error", "unavailable"}};
      } else if (mode == "bad" && n == 0) {
        r.set.emplace_back("inferior-weather", true);
        r.set.emplace_back("forced-followup-dialogue", true);
        r.set.emplace_back("force-reason-bad-weather", true);
        response = {{"forecast", "storms"}};
      } else {
        r.set.emplace_back("weather-ok", true);
        response = {{"forecast", "sunny"}};
      }
      r.service_calls.push_back({"check-weather", request, response});
      return r;
    });
  }

  b.transformers["handle-forced-dialogue(affirm-ok)"] =
      phases([](const Context& c) { return "Great, " + str(c, "location-dest") + " it is."; });
  b.transformers["handle-forced-dialogue(bad-dates)"] = phases(text("Those dates are in the past."));
  b.transformers["handle-forced-dialogue(bad-weather)"] = phases(text("The forecast looks poor for those dates."));
  b.transformers["handle-forced-dialogue(no-weather-service)"] =
      phases(text("The weather service is unavailable, so I could not check the forecast."));
  b.transformers["suggest-change-dates"] = phases(text("Would you like to pick other dates?"),
                                                  [](const TransformerCall& call) {
                                                    TransformerResult r;
                                                    if (is(call, "affirm")) {
                                                      r.set.emplace_back("inferior-weather", false);
                                                      r.erase.push_back("dates");
                                                    } else if (is(call, "deny")) {
                                                      r.set.emplace_back("inferior-weather", false);
                                                      r.set.emplace_back("weather-ok", true);
                                                    }
                                                    return r;
                                                  });
  b.transformers["book-trip"] = service([](const TransformerCall& call) {
    TransformerResult r;
    const std::string ref = "BK-" + str(call.context, "location-orig") + "-" + str(call.context, "location-dest");
    r.set.emplace_back("goal", true);
    r.set.emplace_back("booking", ref);
    r.utterances.push_back("Your trip is booked, reference " + ref + ".");
    r.service_calls.push_back({"book-trip",
                               {{"from", str(call.context, "location-orig")},
                                {"to", str(call.context, "location-dest")},
                                {"dates", str(call.context, "dates")}},
                               {{"reference", ref}}});
    return r;
  });
  return b;
}

namespace {

/// recommend / present / explain-or-reject / feedback cycle over one list.
void recommender(RuntimeBinding& b, const std::string& slot, const std::string& recs_var,
                 const std::vector<std::string>& items, const std::string& recommend, const std::string& present,
                 const std::string& rejected, const std::string& elicit, const std::string& explained) {
  b.transformers[recommend] = service([recs_var, items, recommend](const TransformerCall&) {
    TransformerResult r;
    r.set.emplace_back(recs_var, items);
    r.service_calls.push_back({recommend, nlohmann::json::object(), {{"items", items}}});
    return r;
  });
  b.transformers[present] = phases(
      [recs_var](const Context& c) { return "Here are some options: " + str(c, recs_var) + "."; },
      [slot, recs_var, rejected, explained](const TransformerCall& call) {
        TransformerResult r;
        const auto* recs = std::get_if<std::vector<std::string>>(call.context.get(recs_var));
        if (!explained.empty() && is(call, "explain")) {
          r.set.emplace_back(explained, true);
        } else if (is(call, "deny")) {
          r.set.emplace_back(rejected, true);
          r.erase.push_back(recs_var);
        } else if (recs && !recs->empty()) {
          std::optional<std::string> pick;
          if (const Value* n = call.classified->entity("@number")) {
            const auto i = static_cast<std::size_t>(std::get<double>(*n));
            if (i >= 1 && i <= recs->size()) pick = (*recs)[i - 1];
          }
          for (const auto& item : *recs)
            if (!pick && lower(*call.utterance).find(lower(item)) != std::string::npos) pick = item;
          if (!pick && is(call, "affirm")) pick = recs->front();
          if (pick) {
            r.set.emplace_back(slot, *pick);
            r.erase.push_back(recs_var);
          }
        }
        return r;
      });
  b.transformers[elicit] = phases(text("What would you prefer instead?"), [rejected](const TransformerCall& call) {
    TransformerResult r;
    if (call.classified->intent) r.set.emplace_back(rejected, false);
    return r;
  });
}

}  // namespace

RuntimeBinding career_binding(const RuntimeOptions& options, bool career_goal_known) {
  RuntimeBinding b;
  b.initial_context = declare_all({"career-goal", "career-goal-guess", "pathway", "pathway-guess", "goal-recs",
                                   "explanation-requested", "goal-rejected", "pathway-recs", "pathway-rejected",
                                   "@number"});
  if (career_goal_known) b.initial_context.set("career-goal", options.career_goals.front());
  for (const char* slot : {"career-goal", "pathway"}) {
    b.rules[std::string("have-") + slot] = rules::present(slot);
    b.rules[std::string("maybe-") + slot] = rules::present(std::string(slot) + "-guess");
  }
  b.rules["goal-recs-ready"] = rules::present("goal-recs");
  b.rules["pathway-recs-ready"] = rules::present("pathway-recs");
  for (const char* f : {"explanation-requested", "goal-rejected", "pathway-rejected"}) b.rules[f] = rules::mirror(f);

  recommender(b, "career-goal", "goal-recs", options.career_goals, "recommend-career-goals", "present-career-goals",
              "goal-rejected", "elicit-goal-feedback", "explanation-requested");
  recommender(b, "pathway", "pathway-recs", options.pathways, "recommend-pathways", "present-pathway",
              "pathway-rejected", "elicit-pathway-feedback", "");
  b.transformers["explain-career-goal"] =
      phases(text("These goals match the skills in your profile and current openings."));
  return b;
}

RuntimeBinding multi_intent_binding(const std::vector<std::string>& active_intents) {
  RuntimeBinding b;
  b.initial_context = declare_all({"location-dest", "location-dest-guess", "dates", "dates-guess", "weather-reported",
                                   "trip-booked", "intent-book-trip", "intent-weather-only", "goal", "@place",
                                   "@date"});
  for (const auto& i : active_intents) b.initial_context.set("intent-" + i, true);
  for (const char* slot : {"location-dest", "dates"}) {
    b.rules[std::string("have-") + slot] = rules::present(slot);
    b.rules[std::string("maybe-") + slot] = rules::present(std::string(slot) + "-guess");
  }
  for (const char* f : {"weather-reported", "trip-booked", "intent-book-trip", "intent-weather-only", "goal"})
    b.rules[f] = rules::mirror(f);

  b.transformers["ask-user-dest"] = phases(text("Where to?"), [](const TransformerCall& call) {
    TransformerResult r;
    if (const Value* p = call.classified->entity("@place")) r.set.emplace_back("location-dest", *p);
    return r;
  });
  b.transformers["ask-dates"] = phases(text("Which dates?"), [](const TransformerCall& call) {
    TransformerResult r;
    if (const Value* d = call.classified->entity("@date")) r.set.emplace_back("dates", *d);
    return r;
  });
  b.transformers["report-weather"] = service([](const TransformerCall& call) {
    TransformerResult r;
    r.set.emplace_back("weather-reported", true);
    r.utterances.push_back("It will be sunny in " + str(call.context, "location-dest") + ".");
    r.service_calls.push_back({"report-weather", {{"place", str(call.context, "location-dest")}},
                               {{"forecast", "sunny"}}});
    return r;
  });
  b.transformers["book-flight"] = service([](const TransformerCall& call) {
    TransformerResult r;
    r.set.emplace_back("trip-booked", true);
    r.utterances.push_back("Flight to " + str(call.context, "location-dest") + " booked.");
    return r;
  });
  return b;
}

PlanEntry runtime_entry(const std::string& name, const RuntimeOptions& options) {
  const DomainFixture f = by_name(name);
  PlanEntry e;
  e.name = name;
  e.problem = std::make_shared<const FondProblem>(f.ground());
  if (name == "luggage") {
    e.intents = {"check-in-luggage"};
    e.binding = luggage_binding(options);
  } else if (name == "trip") {
    e.intents = {"plan-trip"};
    e.binding = trip_binding(options);
  } else if (name == "career") {
    e.intents = {"career-coaching"};
    e.binding = career_binding(options, false);
  } else if (name == "career-pathway") {
    e.binding = career_binding(options, true);
  } else if (name == "multi-intent") {
    e.intents = {"asked-about-weather"};
    e.binding = multi_intent_binding();
  } else {
    throw std::out_of_range("unknown fixture '" + name + "'");
  }
  return e;
}

PlanLibrary standard_library(const RuntimeOptions& options) {
  PlanLibrary lib(demo_nlu());
  for (const auto& name : names()) lib.add(runtime_entry(name, options));
  return lib;
}

RuntimeBinding generic_binding(const FondProblem& problem) {
  RuntimeBinding b;
  for (FluentId id = 0; id < problem.fluents.size(); ++id) {
    const std::string& name = problem.fluents.name(id);
    b.initial_context.declare(name);
    b.rules[name] = rules::mirror(name);
    if (problem.init.contains(id)) b.initial_context.set(name, true);
  }
  auto apply = [](const TransformerCall& call, std::size_t index) {
    TransformerResult r;
    for (const auto& l : call.definition.outcomes.at(index).literals())
      r.set.emplace_back(call.fluents.name(l.fluent), l.positive);
    return r;
  };
  Transformer generic = [apply](const TransformerCall& call) {
    const auto& outcomes = call.definition.outcomes;
    switch (call.phase) {
      case Phase::kPrompt:
        return TransformerResult{{}, {}, {call.action}, {}};
      case Phase::kExecute:
        return apply(call, 0);
      case Phase::kRespond: {
        std::string u = *call.utterance;
        u.erase(0, u.find_first_not_of(" \t#"));
        u.erase(u.find_last_not_of(" \t") + 1);
        if (!u.empty() && std::all_of(u.begin(), u.end(), [](unsigned char c) { return std::isdigit(c); })) {
          const auto i = std::stoul(u);
          if (i < outcomes.size()) return apply(call, i);
        }
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
          std::string label = "[";
          for (const auto& l : outcomes[i].literals())
            label += (label.size() > 1 ? ", " : "") + std::string(l.positive ? "" : "not ") + call.fluents.name(l.fluent);
          label += outcomes[i].empty() ? " ]" : "]";
          if (u == label) return apply(call, i);
        }
        return TransformerResult{};
      }
    }
    return TransformerResult{};
  };
  for (const auto& a : problem.actions) b.transformers[a.name] = generic;
  return b;
}

}  // namespace dialoplan::fixtures
