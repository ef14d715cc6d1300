#pragma once

// Runs dialogue plans against a context: transformers act, fluent rules read
// the new planning state back, and branch resolution picks the edge to follow.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dialoplan/context.hpp"
#include "dialoplan/model.hpp"
#include "dialoplan/nlu.hpp"
#include "dialoplan/plan.hpp"

namespace dialoplan {

/// No top-level intent matched, or the named plan does not exist.
class NoPlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested plan has no strong-cyclic solution from the session's state.
class UnsolvableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// step() called in a status that does not accept it.
class SessionStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ServiceCall {
  std::string service;
  nlohmann::json request;
  nlohmann::json response;
};

/// What a transformer hands back. It never touches the plan or the planning
/// state; the orchestrator applies `set` and `erase` to the context.
struct TransformerResult {
  std::vector<std::pair<std::string, Value>> set;
  std::vector<std::string> erase;
  std::vector<std::string> utterances;
  std::vector<ServiceCall> service_calls;
};

/// kPrompt: entering a dialogue node (ask the user). kRespond: the user's reply
/// to a multi-outcome dialogue node. kExecute: service and system nodes, and
/// single-outcome dialogue nodes right after their prompt.
enum class Phase { kPrompt, kRespond, kExecute };

struct TransformerCall {
  Phase phase;
  const std::string& action;  // ground label, e.g. `handle-forced-dialogue(bad-dates)`
  const NDAction& definition;
  const FluentTable& fluents;
  const Context& context;
  const std::string* utterance = nullptr;      // kRespond only
  const Classification* classified = nullptr;  // kRespond only
};

using Transformer = std::function<TransformerResult(const TransformerCall&)>;

/// Fallback for actions without a transformer of their own. Prompt emits the
/// action label; respond copies declared entities into the context; execute
/// applies a single outcome to same-named boolean variables when every fluent
/// it touches has one, and does nothing otherwise.
TransformerResult default_transformer(const TransformerCall& call);

/// Service transformer that POSTs the listed context variables as a JSON object
/// to `url` (`http://host:port/path`) and copies the declared keys of the JSON
/// object it gets back into the context.
Transformer http_service(const std::string& url, std::vector<std::string> request_variables);

struct RuntimeBinding {
  RuleSet rules;
  /// Keyed by ground label first, then by schema name.
  std::map<std::string, Transformer> transformers;
  Context initial_context;  // declares the variables; may hold values
  int max_loop_visits = 5;

  const Transformer* find(const std::string& action) const;
};

struct PlanEntry {
  std::string name;
  std::vector<std::string> intents;  // top-level intents that start this plan
  std::shared_ptr<const FondProblem> problem;
  RuntimeBinding binding;
};

/// Plans indexed by name and top-level intent. The plan from the problem's own
/// initial state is compiled on add(); plans from other initial states are
/// solved on demand and cached. Safe to share across sessions.
class PlanLibrary {
 public:
  explicit PlanLibrary(Nlu nlu = {}) : nlu_(std::move(nlu)) {}

  /// Throws UnsolvableError when the problem has no solution, ConfigError when
  /// the binding misses a fluent rule.
  void add(PlanEntry entry);

  const Nlu& nlu() const { return nlu_; }
  const PlanEntry* find(const std::string& name) const;
  const PlanEntry* for_intent(const std::string& intent) const;
  std::vector<std::string> names() const;
  bool top_level(const std::string& intent) const;

  /// Plan for `entry` starting in `init`. Throws UnsolvableError.
  std::shared_ptr<const DialoguePlan> plan(const PlanEntry& entry, const State& init) const;

 private:
  struct Slot {
    PlanEntry entry;
    mutable std::mutex mutex;
    mutable std::map<State, std::shared_ptr<const DialoguePlan>> plans;
    mutable std::set<State> unsolvable;
  };

  Nlu nlu_;
  std::vector<std::unique_ptr<Slot>> slots_;
};

enum class SessionStatus { kRunning, kAwaitingUser, kDone, kAborted, kError };

std::string_view to_string(SessionStatus s);

struct Event {
  enum class Kind { kUtterance, kServiceCall, kWarning, kStayOnTopic, kError };
  Kind kind;
  NodeId node;
  std::string text;
  nlohmann::json data;  // service call payload or diagnostic
};

std::string_view to_string(Event::Kind k);

struct Transition {
  NodeId from;
  NodeId to;
  std::size_t outcome_index;
  std::string label;
  State before;
  State after;
};

struct Turn {
  std::optional<std::string> user;
  std::optional<std::string> intent;
  std::vector<Event> events;
  std::vector<Transition> transitions;
  SessionStatus status;
};

struct StepResult {
  std::vector<Event> events;
  std::vector<Transition> transitions;
  SessionStatus status;
  NodeId node;
};

/// Events, transitions, status and cursor; `branch_taken` is the label of the
/// first edge followed, null when none was.
nlohmann::json to_json(const StepResult& r, const DialoguePlan& plan);

struct SessionOptions {
  std::optional<int> max_loop_visits;  // overrides the binding's value
};

class Session {
 public:
  /// Use start_session. The library must outlive the session.
  Session(std::string id, const PlanLibrary& library, const PlanEntry& entry,
          std::shared_ptr<const DialoguePlan> plan, Context context, int max_loop_visits);

  /// In kRunning, pass no input: advances to the next node needing the user.
  /// In kAwaitingUser, pass the user's utterance. Throws SessionStateError
  /// otherwise.
  StepResult step(const std::optional<std::string>& input = std::nullopt);

  const std::string& id() const { return id_; }
  const std::string& plan_name() const { return entry_->name; }
  const DialoguePlan& plan() const { return *plan_; }
  const FondProblem& problem() const { return *entry_->problem; }
  NodeId current_node() const { return current_; }
  const State& planning_state() const { return prev_; }
  const Context& context() const { return context_; }
  SessionStatus status() const { return status_; }
  const std::vector<Turn>& transcript() const { return transcript_; }
  /// Nodes entered, in order, starting with the root.
  const std::vector<NodeId>& path() const { return path_; }
  const std::map<NodeId, int>& loop_visits() const { return visits_; }
  int max_loop_visits() const { return max_loop_visits_; }
  const nlohmann::json& diagnostic() const { return diagnostic_; }

  nlohmann::json to_json() const;
  nlohmann::json transcript_json() const;

 private:
  bool enter(NodeId node, StepResult& out);
  void advance(StepResult& out);
  bool apply_and_branch(const TransformerResult& r, StepResult& out);
  TransformerResult run(Phase phase, const std::string* utterance, const Classification* classified);
  void fail(StepResult& out, const std::string& message, nlohmann::json data);

  std::string id_;
  const PlanLibrary* library_;
  const PlanEntry* entry_;
  std::shared_ptr<const DialoguePlan> plan_;
  Context context_;
  int max_loop_visits_;
  NodeId current_ = 0;
  State prev_;
  SessionStatus status_ = SessionStatus::kRunning;
  std::vector<Turn> transcript_;
  std::vector<NodeId> path_;
  std::map<NodeId, int> visits_;
  nlohmann::json diagnostic_;
};

/// Session on the named plan. The context is `initial_context` of the binding
/// overlaid with `overrides`' values; the plan is the one solved from the
/// state the context evaluates to. Status is kDone when that plan's root is a
/// goal node, kRunning otherwise. Throws NoPlanError, UnsolvableError.
std::unique_ptr<Session> start_session(const PlanLibrary& library, const std::string& plan_name,
                                       Context overrides = {}, const SessionOptions& options = {},
                                       std::string id = "s0");

/// Classifies the utterance and starts the plan for its top-level intent,
/// with the extracted entities written into the context where declared.
/// Throws NoPlanError when no top-level intent matches.
std::unique_ptr<Session> start_session_from_utterance(const PlanLibrary& library, const std::string& utterance,
                                                      Context overrides = {}, const SessionOptions& options = {},
                                                      std::string id = "s0");

struct Script {
  std::string plan;
  std::vector<std::string> turns;
  std::optional<SessionStatus> expect_status;
  Context context;
  SessionOptions options;
};

/// `{"plan": "luggage", "turns": ["yes", "2"], "expect": "done",
///   "context": {...}, "max_loop_visits": 3}`; only `plan` is required.
Script script_from_json(const nlohmann::json& doc);

struct ScriptRun {
  std::unique_ptr<Session> session;
  bool expectation_met = true;

  nlohmann::json to_json() const;
};

/// Starts the session, advances it, then feeds turns while the session awaits
/// input. Turns left over once the session has finished are not fed.
ScriptRun run_script(const PlanLibrary& library, const Script& script);

}  // namespace dialoplan
