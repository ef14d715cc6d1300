#include "dialoplan/orchestrator.hpp"

#include <algorithm>
#include <regex>

#include "httplib.h"

#include "dialoplan/error.hpp"

namespace dialoplan {

namespace {

nlohmann::json state_json(const State& s, const FluentTable& fluents) {
  nlohmann::json out = nlohmann::json::array();
  for (FluentId id : s.ids()) out.push_back(fluents.name(id));
  return out;
}

SessionStatus status_from_string(const std::string& s) {
  for (auto st : {SessionStatus::kRunning, SessionStatus::kAwaitingUser, SessionStatus::kDone,
                  SessionStatus::kAborted, SessionStatus::kError})
    if (to_string(st) == s) return st;
  throw ConfigError("unknown session status '" + s + "'");
}

}  // namespace

TransformerResult default_transformer(const TransformerCall& call) {
  TransformerResult r;
  switch (call.phase) {
    case Phase::kPrompt:
      r.utterances.push_back(call.action);
      break;
    case Phase::kRespond:
      if (call.classified)
        for (const auto& [entity, value] : call.classified->assignments)
          if (call.context.declared(entity)) r.set.emplace_back(entity, value);
      break;
    case Phase::kExecute: {
      if (call.definition.outcomes.size() != 1) break;
      const auto literals = call.definition.outcomes.front().literals();
      const bool mirrored = std::all_of(literals.begin(), literals.end(), [&](const Literal& l) {
        return call.context.declared(call.fluents.name(l.fluent));
      });
      if (!mirrored) break;
      for (const auto& l : literals) r.set.emplace_back(call.fluents.name(l.fluent), l.positive);
      break;
    }
  }
  return r;
}

Transformer http_service(const std::string& url, std::vector<std::string> request_variables) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw ConfigError("bad service url '" + url + "'");
  std::string base = m.str(1);
  std::string path = m[2].matched ? m.str(2) : "/";
  return [base, path, vars = std::move(request_variables)](const TransformerCall& call) {
    nlohmann::json request = nlohmann::json::object();
    for (const auto& v : vars)
      if (const Value* value = call.context.get(v)) request[v] = value_to_json(*value);
    request["action"] = call.action;

    httplib::Client client(base);
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
    auto res = client.Post(path, request.dump(), "application/json");
    if (!res) throw std::runtime_error("service " + base + path + " unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw std::runtime_error("service " + base + path + " answered HTTP " + std::to_string(res->status));
    auto body = nlohmann::json::parse(res->body);
    if (!body.is_object()) throw std::runtime_error("service " + base + path + " did not return a JSON object");

    TransformerResult r;
    for (const auto& [k, v] : body.items()) {
      if (!call.context.declared(k)) continue;
      if (v.is_null())
        r.erase.push_back(k);
      else
        r.set.emplace_back(k, value_from_json(v));
    }
    r.service_calls.push_back({call.action, request, body});
    return r;
  };
}

const Transformer* RuntimeBinding::find(const std::string& action) const {
  if (auto it = transformers.find(action); it != transformers.end()) return &it->second;
  if (auto it = transformers.find(action.substr(0, action.find('('))); it != transformers.end())
    return &it->second;
  return nullptr;
}

// PlanLibrary

void PlanLibrary::add(PlanEntry entry) {
  if (!entry.problem) throw ConfigError("plan entry '" + entry.name + "' has no problem");
  if (find(entry.name)) throw ConfigError("duplicate plan entry '" + entry.name + "'");
  check_rules(entry.binding.rules, entry.problem->fluents);
  auto slot = std::make_unique<Slot>();
  slot->entry = std::move(entry);
  slots_.push_back(std::move(slot));
  const PlanEntry& e = slots_.back()->entry;
  try {
    plan(e, e.problem->init);
  } catch (...) {
    slots_.pop_back();
    throw;
  }
}

const PlanEntry* PlanLibrary::find(const std::string& name) const {
  for (const auto& s : slots_)
    if (s->entry.name == name) return &s->entry;
  return nullptr;
}

const PlanEntry* PlanLibrary::for_intent(const std::string& intent) const {
  for (const auto& s : slots_)
    if (std::find(s->entry.intents.begin(), s->entry.intents.end(), intent) != s->entry.intents.end())
      return &s->entry;
  return nullptr;
}

std::vector<std::string> PlanLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& s : slots_) out.push_back(s->entry.name);
  return out;
}

bool PlanLibrary::top_level(const std::string& intent) const { return for_intent(intent) != nullptr; }

std::shared_ptr<const DialoguePlan> PlanLibrary::plan(const PlanEntry& entry, const State& init) const {
  const Slot* slot = nullptr;
  for (const auto& s : slots_)
    if (&s->entry == &entry) slot = s.get();
  if (!slot) throw NoPlanError("plan entry '" + entry.name + "' is not in this library");

  std::lock_guard lock(slot->mutex);
  if (auto it = slot->plans.find(init); it != slot->plans.end()) return it->second;
  if (slot->unsolvable.count(init)) throw UnsolvableError("'" + entry.name + "' is unsolvable from this state");

  FondProblem problem = *entry.problem;
  problem.init = init;
  auto solution = solve(problem);
  if (!solution) {
    slot->unsolvable.insert(init);
    throw UnsolvableError("'" + entry.name + "' is unsolvable from this state");
  }
  auto compiled = std::make_shared<const DialoguePlan>(compile_plan(problem, *solution));
  slot->plans.emplace(init, compiled);
  return compiled;
}

// Session

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::kRunning: return "running";
    case SessionStatus::kAwaitingUser: return "awaiting-user";
    case SessionStatus::kDone: return "done";
    case SessionStatus::kAborted: return "aborted";
    case SessionStatus::kError: return "error";
  }
  return "?";
}

std::string_view to_string(Event::Kind k) {
  switch (k) {
    case Event::Kind::kUtterance: return "utterance";
    case Event::Kind::kServiceCall: return "service-call";
    case Event::Kind::kWarning: return "warning";
    case Event::Kind::kStayOnTopic: return "stay-on-topic";
    case Event::Kind::kError: return "error";
  }
  return "?";
}

Session::Session(std::string id, const PlanLibrary& library, const PlanEntry& entry,
                 std::shared_ptr<const DialoguePlan> plan, Context context, int max_loop_visits)
    : id_(std::move(id)),
      library_(&library),
      entry_(&entry),
      plan_(std::move(plan)),
      context_(std::move(context)),
      max_loop_visits_(max_loop_visits) {
  check_rules(entry_->binding.rules, plan_->fluents);
  prev_ = evaluate_state(entry_->binding.rules, context_, plan_->fluents);
  current_ = plan_->initial;
  path_.push_back(current_);
  visits_[current_] = 1;
  if (plan_->nodes.at(current_).done()) status_ = SessionStatus::kDone;
}

void Session::fail(StepResult& out, const std::string& message, nlohmann::json data) {
  status_ = SessionStatus::kError;
  data["message"] = message;
  data["node"] = current_;
  data["action"] = plan_->nodes[current_].action;
  diagnostic_ = data;
  out.events.push_back({Event::Kind::kError, current_, message, std::move(data)});
}

TransformerResult Session::run(Phase phase, const std::string* utterance, const Classification* classified) {
  const PlanNode& node = plan_->nodes[current_];
  const NDAction& def = problem().actions[*problem().find_action(node.action)];
  TransformerCall call{phase, node.action, def, plan_->fluents, context_, utterance, classified};
  if (const Transformer* t = entry_->binding.find(node.action)) return (*t)(call);
  return default_transformer(call);
}

bool Session::enter(NodeId node, StepResult& out) {
  current_ = node;
  path_.push_back(node);
  if (++visits_[node] > max_loop_visits_) {
    status_ = SessionStatus::kAborted;
    out.events.push_back({Event::Kind::kWarning, node,
                          "node visited more than " + std::to_string(max_loop_visits_) + " times",
                          {{"visits", visits_[node]}}});
    return false;
  }
  const PlanNode& pn = plan_->nodes[node];
  if (pn.done()) {
    if (!eval_formula(problem().goal, prev_)) {
      fail(out, "reached Done but the goal does not hold", {{"state", state_json(prev_, plan_->fluents)}});
      return false;
    }
    status_ = SessionStatus::kDone;
    return false;
  }
  const NDAction& def = problem().actions[*problem().find_action(pn.action)];
  if (!eval_formula(def.precondition, prev_)) {
    fail(out, "precondition of " + pn.action + " does not hold on arrival",
         {{"state", state_json(prev_, plan_->fluents)}});
    return false;
  }
  return true;
}

bool Session::apply_and_branch(const TransformerResult& r, StepResult& out) {
  for (const auto& u : r.utterances) out.events.push_back({Event::Kind::kUtterance, current_, u, nullptr});
  for (const auto& c : r.service_calls)
    out.events.push_back(
        {Event::Kind::kServiceCall, current_, c.service, {{"request", c.request}, {"response", c.response}}});
  try {
    for (const auto& e : r.erase) context_.erase(e);
    for (const auto& [k, v] : r.set) context_.set(k, v);
  } catch (const ConfigError& e) {
    fail(out, e.what(), nlohmann::json::object());
    return false;
  }

  const State cur = evaluate_state(entry_->binding.rules, context_, plan_->fluents);
  const BranchResolution res = resolve_branch(*plan_, current_, prev_, cur);
  if (!res.ok()) {
    nlohmann::json outcomes = nlohmann::json::array();
    for (std::size_t e : plan_->out_edges(current_)) outcomes.push_back(edge_label(*plan_, plan_->edges[e]));
    fail(out, std::string(to_string(res.failure)),
         {{"prev", state_json(prev_, plan_->fluents)}, {"cur", state_json(cur, plan_->fluents)},
          {"outcomes", outcomes}, {"consistent", res.consistent}});
    return false;
  }
  if (res.duplicate_outcomes)
    out.events.push_back({Event::Kind::kWarning, current_, "duplicate outcomes; lowest index taken",
                          {{"consistent", res.consistent}}});

  const PlanEdge& edge = plan_->edges[*res.edge];
  out.transitions.push_back({edge.from, edge.to, edge.outcome_index, edge_label(*plan_, edge), prev_, cur});
  prev_ = cur;
  return enter(edge.to, out);
}

void Session::advance(StepResult& out) {
  while (status_ == SessionStatus::kRunning) {
    const PlanNode& node = plan_->nodes[current_];
    if (node.done()) {
      status_ = SessionStatus::kDone;
      return;
    }
    TransformerResult r;
    try {
      if (node.kind == ActionKind::kDialogue) {
        r = run(Phase::kPrompt, nullptr, nullptr);
        if (plan_->out_edges(current_).size() > 1) {
          for (const auto& u : r.utterances) out.events.push_back({Event::Kind::kUtterance, current_, u, nullptr});
          for (const auto& e : r.erase) context_.erase(e);
          for (const auto& [k, v] : r.set) context_.set(k, v);
          status_ = SessionStatus::kAwaitingUser;
          return;
        }
        TransformerResult x = run(Phase::kExecute, nullptr, nullptr);
        r.set.insert(r.set.end(), x.set.begin(), x.set.end());
        r.erase.insert(r.erase.end(), x.erase.begin(), x.erase.end());
        r.utterances.insert(r.utterances.end(), x.utterances.begin(), x.utterances.end());
        r.service_calls.insert(r.service_calls.end(), x.service_calls.begin(), x.service_calls.end());
      } else {
        r = run(Phase::kExecute, nullptr, nullptr);
      }
    } catch (const std::exception& e) {
      fail(out, std::string("transformer failed: ") + e.what(), nlohmann::json::object());
      return;
    }
    if (!apply_and_branch(r, out)) return;
  }
}

StepResult Session::step(const std::optional<std::string>& input) {
  StepResult out;
  Turn turn;
  turn.user = input;
  if (status_ == SessionStatus::kRunning) {
    if (input) throw SessionStateError("session is not awaiting user input");
    advance(out);
  } else if (status_ == SessionStatus::kAwaitingUser) {
    if (!input) throw SessionStateError("session is awaiting user input");
    const Classification cls = library_->nlu().classify(*input);
    turn.intent = cls.intent;
    const PlanEntry* other = cls.intent ? library_->for_intent(*cls.intent) : nullptr;
    if (other && other != entry_) {
      out.events.push_back({Event::Kind::kStayOnTopic, current_,
                            "let's finish " + entry_->name + " first",
                            {{"intent", *cls.intent}, {"plan", other->name}}});
    } else {
      TransformerResult r;
      bool ok = true;
      try {
        r = run(Phase::kRespond, &*input, &cls);
      } catch (const std::exception& e) {
        fail(out, std::string("transformer failed: ") + e.what(), nlohmann::json::object());
        ok = false;
      }
      if (ok) {
        status_ = SessionStatus::kRunning;
        if (apply_and_branch(r, out)) advance(out);
      }
    }
  } else {
    throw SessionStateError("session is " + std::string(to_string(status_)));
  }
  out.status = status_;
  out.node = current_;
  turn.events = out.events;
  turn.transitions = out.transitions;
  turn.status = status_;
  transcript_.push_back(std::move(turn));
  return out;
}

namespace {

nlohmann::json event_json(const Event& e, const DialoguePlan& plan) {
  nlohmann::json j = {{"kind", to_string(e.kind)}, {"node", e.node}, {"action", plan.nodes[e.node].action},
                      {"text", e.text}};
  if (!e.data.is_null()) j["data"] = e.data;
  return j;
}

nlohmann::json transition_json(const Transition& t, const DialoguePlan& plan) {
  return {{"from", t.from},
          {"to", t.to},
          {"from_action", plan.nodes[t.from].action},
          {"to_action", plan.nodes[t.to].action},
          {"outcome_index", t.outcome_index},
          {"label", t.label},
          {"before", state_json(t.before, plan.fluents)},
          {"after", state_json(t.after, plan.fluents)}};
}

}  // namespace

nlohmann::json to_json(const StepResult& r, const DialoguePlan& plan) {
  nlohmann::json j = {{"status", to_string(r.status)}, {"current_node", r.node},
                      {"current_action", plan.nodes[r.node].action}};
  j["events"] = nlohmann::json::array();
  for (const auto& e : r.events) j["events"].push_back(event_json(e, plan));
  j["transitions"] = nlohmann::json::array();
  for (const auto& t : r.transitions) j["transitions"].push_back(transition_json(t, plan));
  j["branch_taken"] = r.transitions.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.transitions.front().label);
  return j;
}

nlohmann::json Session::transcript_json() const {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : transcript_) {
    nlohmann::json j;
    j["user"] = t.user ? nlohmann::json(*t.user) : nlohmann::json(nullptr);
    j["intent"] = t.intent ? nlohmann::json(*t.intent) : nlohmann::json(nullptr);
    j["events"] = nlohmann::json::array();
    for (const auto& e : t.events) j["events"].push_back(event_json(e, *plan_));
    j["transitions"] = nlohmann::json::array();
    for (const auto& tr : t.transitions) j["transitions"].push_back(transition_json(tr, *plan_));
    j["status"] = to_string(t.status);
    turns.push_back(std::move(j));
  }
  return turns;
}

nlohmann::json Session::to_json() const {
  nlohmann::json path = nlohmann::json::array();
  for (NodeId n : path_) path.push_back(plan_->nodes[n].action);
  nlohmann::json visits = nlohmann::json::object();
  for (const auto& [n, c] : visits_) visits[std::to_string(n)] = c;
  nlohmann::json j = {{"id", id_},
                      {"plan", entry_->name},
                      {"status", to_string(status_)},
                      {"current_node", current_},
                      {"current_action", plan_->nodes[current_].action},
                      {"state", state_json(prev_, plan_->fluents)},
                      {"context", context_.to_json()},
                      {"path", path},
                      {"path_nodes", path_},
                      {"loop_visits", visits},
                      {"max_loop_visits", max_loop_visits_},
                      {"transcript", transcript_json()}};
  if (!diagnostic_.is_null()) j["diagnostic"] = diagnostic_;
  return j;
}

std::unique_ptr<Session> start_session(const PlanLibrary& library, const std::string& plan_name, Context overrides,
                                       const SessionOptions& options, std::string id) {
  const PlanEntry* entry = library.find(plan_name);
  if (!entry) throw NoPlanError("no plan named '" + plan_name + "'");
  Context ctx = entry->binding.initial_context;
  for (const auto& [k, v] : overrides.values()) ctx.set(k, v);
  check_rules(entry->binding.rules, entry->problem->fluents);
  const State init = evaluate_state(entry->binding.rules, ctx, entry->problem->fluents);
  auto plan = library.plan(*entry, init);
  const int max_visits = options.max_loop_visits.value_or(entry->binding.max_loop_visits);
  if (max_visits < 1) throw ConfigError("max_loop_visits must be positive");
  return std::make_unique<Session>(std::move(id), library, *entry, std::move(plan), std::move(ctx), max_visits);
}

std::unique_ptr<Session> start_session_from_utterance(const PlanLibrary& library, const std::string& utterance,
                                                      Context overrides, const SessionOptions& options,
                                                      std::string id) {
  const Classification cls = library.nlu().classify(utterance);
  const PlanEntry* entry = cls.intent ? library.for_intent(*cls.intent) : nullptr;
  if (!entry) throw NoPlanError("no top-level intent in '" + utterance + "'");
  for (const auto& [entity, value] : cls.assignments) {
    if (!entry->binding.initial_context.declared(entity) || overrides.has(entity)) continue;
    overrides.declare(entity);
    overrides.set(entity, value);
  }
  return start_session(library, entry->name, std::move(overrides), options, std::move(id));
}

Script script_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("plan") || !doc["plan"].is_string())
    throw ConfigError("script needs a string 'plan'");
  Script s;
  s.plan = doc["plan"].get<std::string>();
  if (doc.contains("turns")) {
    if (!doc["turns"].is_array()) throw ConfigError("script 'turns' must be a list");
    for (const auto& t : doc["turns"]) {
      if (!t.is_string()) throw ConfigError("script turns must be strings");
      s.turns.push_back(t.get<std::string>());
    }
  }
  if (doc.contains("expect")) s.expect_status = status_from_string(doc["expect"].get<std::string>());
  if (doc.contains("context")) {
    if (!doc["context"].is_object()) throw ConfigError("script 'context' must be an object");
    for (const auto& [k, v] : doc["context"].items()) {
      s.context.declare(k);
      s.context.set(k, value_from_json(v));
    }
  }
  if (doc.contains("max_loop_visits")) s.options.max_loop_visits = doc["max_loop_visits"].get<int>();
  return s;
}

ScriptRun run_script(const PlanLibrary& library, const Script& script) {
  ScriptRun run;
  run.session = start_session(library, script.plan, script.context, script.options);
  Session& s = *run.session;
  if (s.status() == SessionStatus::kRunning) s.step();
  for (const auto& turn : script.turns) {
    if (s.status() != SessionStatus::kAwaitingUser) break;
    s.step(turn);
  }
  run.expectation_met = !script.expect_status || *script.expect_status == s.status();
  return run;
}

nlohmann::json ScriptRun::to_json() const {
  nlohmann::json j = session->to_json();
  j["expectation_met"] = expectation_met;
  return j;
}

}  // namespace dialoplan
