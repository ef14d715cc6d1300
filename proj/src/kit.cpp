#include "dialoplan/kit.hpp"

#include <algorithm>

#include "dialoplan/error.hpp"

namespace dialoplan::kit {
namespace {

using pddl::Atom;
using pddl::Condition;
using pddl::Effect;

/// Literals that appear as top-level conjuncts of a precondition.
std::vector<std::pair<Atom, bool>> top_level_literals(const Condition& c) {
  std::vector<std::pair<Atom, bool>> out;
  auto visit = [&](const Condition& x) {
    if (x.kind == Condition::Kind::kAtom) out.emplace_back(x.atom, true);
    if (x.kind == Condition::Kind::kNot && x.children.front().kind == Condition::Kind::kAtom) {
      out.emplace_back(x.children.front().atom, false);
    }
  };
  if (c.kind == Condition::Kind::kAnd) {
    for (const auto& child : c.children) visit(child);
  } else {
    visit(c);
  }
  return out;
}

bool has_literal(const std::vector<std::pair<Atom, bool>>& lits, const Atom& atom, bool positive) {
  return std::any_of(lits.begin(), lits.end(),
                     [&](const auto& l) { return l.first == atom && l.second == positive; });
}

Atom zero_ary(const std::string& name) { return Atom{name, {}}; }

Condition conjoin(Condition base, std::vector<Condition> extra) {
  if (extra.empty()) return base;
  if (base.kind != Condition::Kind::kAnd) base = Condition::make_and({std::move(base)});
  for (auto& e : extra) base.children.push_back(std::move(e));
  return base;
}

std::string describe(const std::vector<std::pair<Atom, bool>>& outcome) {
  std::string out = "{";
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    if (i > 0) out += ", ";
    if (!outcome[i].second) out += "not ";
    out += pddl::ground_fluent_name(outcome[i].first.predicate, outcome[i].first.arguments);
  }
  return out + "}";
}

}  // namespace

bool StaticReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const StaticCheck& c) { return c.passed; });
}

DomainBuilder::DomainBuilder(std::string name) : name_(std::move(name)) {}

void DomainBuilder::declare(const std::string& fluent) {
  if (!FluentTable::valid_name(fluent)) throw BuildError("invalid fluent name '" + fluent + "'");
  if (!fluent_set_.insert(fluent).second) throw BuildError("fluent '" + fluent + "' already declared");
  fluents_.push_back(fluent);
}

DomainBuilder& DomainBuilder::declare_slot(const std::string& name) {
  if (std::find(slots_.begin(), slots_.end(), name) != slots_.end()) {
    throw BuildError("slot '" + name + "' already declared");
  }
  declare("have-" + name);
  declare("maybe-" + name);
  slots_.push_back(name);
  return *this;
}

DomainBuilder& DomainBuilder::declare_flag(const std::string& name) {
  declare("ok-" + name);
  return *this;
}

DomainBuilder& DomainBuilder::declare_fluent(const std::string& name) {
  declare(name);
  return *this;
}

bool DomainBuilder::known_predicate(const std::string& name) const {
  // Followup and goal vocabulary is declared by the compile steps, which may
  // run after the actions that mention it.
  return fluent_set_.count(name) > 0 || name == kFollowupPredicate || name == kReasonPredicate ||
         name == kGoalFluent;
}

void DomainBuilder::check_atoms(const std::string& action, const Condition& c) const {
  if (c.kind == Condition::Kind::kAtom || c.kind == Condition::Kind::kForallNot) {
    if (!known_predicate(c.atom.predicate)) {
      throw BuildError("action '" + action + "' uses undeclared fluent '" + c.atom.predicate + "'");
    }
  }
  for (const auto& child : c.children) check_atoms(action, child);
}

void DomainBuilder::check_atoms(const std::string& action, const Effect& e) const {
  if (e.kind == Effect::Kind::kLiteral && !known_predicate(e.atom.predicate)) {
    throw BuildError("action '" + action + "' uses undeclared fluent '" + e.atom.predicate + "'");
  }
  for (const auto& child : e.children) check_atoms(action, child);
}

DomainBuilder& DomainBuilder::add_dialogue_action(const std::string& name, const std::string& precondition,
                                                  std::vector<std::string> outcomes) {
  return add_action({name, ActionKind::kDialogue, {}, precondition, std::move(outcomes)});
}

DomainBuilder& DomainBuilder::add_service_action(const std::string& name, const std::string& precondition,
                                                 std::vector<std::string> outcomes, ActionKind kind) {
  if (kind == ActionKind::kDialogue) throw BuildError("service action '" + name + "' cannot have kind dialogue");
  return add_action({name, kind, {}, precondition, std::move(outcomes)});
}

DomainBuilder& DomainBuilder::add_action(ActionSpec spec) {
  if (spec.outcomes.empty()) throw BuildError("action '" + spec.name + "' needs at least one outcome");
  if (std::any_of(actions_.begin(), actions_.end(),
                  [&](const pddl::ActionSchema& a) { return a.name == spec.name; })) {
    throw BuildError("action '" + spec.name + "' already added");
  }
  pddl::ActionSchema schema;
  schema.name = spec.name;
  schema.kind = spec.kind;
  schema.parameters = spec.parameters;
  try {
    schema.precondition = pddl::parse_condition(spec.precondition);
    if (spec.outcomes.size() == 1) {
      schema.effect = pddl::parse_effect(spec.outcomes.front());
    } else {
      schema.effect.kind = Effect::Kind::kOneof;
      for (const auto& text : spec.outcomes) {
        Effect e = pddl::parse_effect(text);
        if (e.kind == Effect::Kind::kOneof) throw BuildError("outcome of '" + spec.name + "' may not contain oneof");
        schema.effect.children.push_back(std::move(e));
      }
    }
  } catch (const ParseError& e) {
    throw BuildError("action '" + spec.name + "': " + e.what());
  }
  check_atoms(spec.name, schema.precondition);
  check_atoms(spec.name, schema.effect);
  actions_.push_back(std::move(schema));
  return *this;
}

std::vector<StaticCheck> DomainBuilder::followup_checks(const pddl::ActionSchema& handler,
                                                        const std::string& type) const {
  std::vector<StaticCheck> out;
  const Atom flag{kFollowupPredicate, {type}};
  const auto pre = top_level_literals(handler.precondition);
  const auto outcomes = pddl::flatten_effect(handler.effect);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    StaticCheck check;
    check.name = "followup-deletion " + handler.name + " outcome " + std::to_string(i);
    if (!has_literal(outcomes[i], flag, false)) {
      check.passed = false;
      check.detail = "handler '" + handler.name + "' outcome " + std::to_string(i) +
                     " does not delete forced-followup-" + type;
    }
    for (const auto& [atom, positive] : pre) {
      if (positive && atom.predicate == kReasonPredicate && !has_literal(outcomes[i], atom, false)) {
        check.passed = false;
        check.detail = "handler '" + handler.name + "' outcome " + std::to_string(i) +
                       " does not delete the asserted force-reason";
      }
    }
    out.push_back(std::move(check));
  }
  return out;
}

DomainBuilder& DomainBuilder::compile_followups(FollowupSpec spec) {
  if (followups_) throw BuildError("followups already compiled");
  if (spec.types.empty()) throw BuildError("followup spec needs at least one type");
  for (const auto& t : spec.types) {
    auto it = spec.handlers.find(t);
    if (it == spec.handlers.end() || it->second.empty()) {
      throw BuildError("followup type '" + t + "' has no handler");
    }
  }
  for (const auto& [type, handlers] : spec.handlers) {
    if (std::find(spec.types.begin(), spec.types.end(), type) == spec.types.end()) {
      throw BuildError("handlers given for undeclared followup type '" + type + "'");
    }
    for (const auto& h : handlers) {
      auto it = std::find_if(actions_.begin(), actions_.end(),
                             [&](const pddl::ActionSchema& a) { return a.name == h; });
      if (it == actions_.end()) throw BuildError("followup handler '" + h + "' is not a registered action");
      for (const auto& check : followup_checks(*it, type)) {
        if (!check.passed) throw BuildError(check.detail);
      }
    }
  }
  followups_ = std::move(spec);
  return *this;
}

DomainBuilder& DomainBuilder::compile_intents(IntentSpec spec) {
  std::set<std::string> names;
  for (const auto& i : intents_.intents) names.insert(i.name);
  for (const auto& i : spec.intents) {
    if (!names.insert(i.name).second) throw BuildError("duplicate intent '" + i.name + "'");
    try {
      check_atoms("assert-intent-" + i.name, pddl::parse_condition(i.condition));
    } catch (const ParseError& e) {
      throw BuildError("intent '" + i.name + "': " + e.what());
    }
    intents_.intents.push_back(i);
  }
  return *this;
}

BuiltDomain DomainBuilder::build() const {
  if (actions_.empty() && intents_.intents.empty()) throw BuildError("domain '" + name_ + "' has no actions");

  BuiltDomain out;
  out.slots = slots_;
  pddl::LiftedDomain& d = out.domain;
  d.name = name_;
  d.requirements = {":strips", ":typing", ":negative-preconditions", ":non-deterministic"};
  if (followups_) d.requirements.insert(d.requirements.begin() + 3, ":universal-preconditions");

  for (const auto& f : fluents_) d.predicates.push_back({f, {}});
  if (followups_) {
    d.types = {kFollowupType, kReasonType};
    for (const auto& t : followups_->types) d.constants.push_back({t, kFollowupType});
    for (const auto& r : followups_->reasons) d.constants.push_back({r, kReasonType});
    d.predicates.push_back({kFollowupPredicate, {{"?t", kFollowupType}}});
    d.predicates.push_back({kReasonPredicate, {{"?r", kReasonType}}});
  }
  if (!intents_.intents.empty() && fluent_set_.count(kGoalFluent) == 0) {
    d.predicates.push_back({kGoalFluent, {}});
  }
  for (const auto& i : intents_.intents) {
    if (fluent_set_.count("intent-" + i.name) == 0) d.predicates.push_back({"intent-" + i.name, {}});
  }

  d.actions = actions_;
  for (const auto& i : intents_.intents) {
    pddl::ActionSchema a;
    a.name = "assert-intent-" + i.name;
    a.kind = ActionKind::kSystem;
    a.precondition = conjoin(Condition::make_atom(zero_ary("intent-" + i.name)),
                             {pddl::parse_condition(i.condition)});
    a.effect.kind = Effect::Kind::kLiteral;
    a.effect.atom = zero_ary(kGoalFluent);
    d.actions.push_back(std::move(a));
  }

  StaticReport& report = out.report;
  for (const auto& s : slots_) report.slot_obligations.push_back("not (have-" + s + " and maybe-" + s + ")");

  if (followups_) {
    for (auto& a : d.actions) {
      std::vector<std::string> unhandled;
      for (const auto& t : followups_->types) {
        const auto& hs = followups_->handlers.at(t);
        if (std::find(hs.begin(), hs.end(), a.name) == hs.end()) unhandled.push_back(t);
      }
      if (unhandled.size() == followups_->types.size()) {
        Condition guard;
        guard.kind = Condition::Kind::kForallNot;
        guard.bound = {"?t", kFollowupType};
        guard.atom = Atom{kFollowupPredicate, {"?t"}};
        a.precondition = conjoin(std::move(a.precondition), {std::move(guard)});
      } else {
        std::vector<Condition> guards;
        for (const auto& t : unhandled) {
          guards.push_back(Condition::make_not(Condition::make_atom(Atom{kFollowupPredicate, {t}})));
        }
        a.precondition = conjoin(std::move(a.precondition), std::move(guards));
      }
    }
    for (const auto& [type, handlers] : followups_->handlers) {
      for (const auto& h : handlers) {
        const auto* schema = d.find_action(h);
        auto checks = followup_checks(*schema, type);
        report.checks.insert(report.checks.end(), checks.begin(), checks.end());
      }
    }
  }

  // Reasons are only ever asserted together with a followup type.
  for (const auto& a : d.actions) {
    const auto outcomes = pddl::flatten_effect(a.effect);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const bool adds_reason = std::any_of(outcomes[i].begin(), outcomes[i].end(), [](const auto& l) {
        return l.second && l.first.predicate == kReasonPredicate;
      });
      if (!adds_reason) continue;
      const bool adds_type = std::any_of(outcomes[i].begin(), outcomes[i].end(), [](const auto& l) {
        return l.second && l.first.predicate == kFollowupPredicate;
      });
      StaticCheck check{"reason-with-type " + a.name + " outcome " + std::to_string(i), adds_type, ""};
      if (!adds_type) check.detail = "'" + a.name + "' outcome " + std::to_string(i) + " asserts a force-reason without a forced-followup";
      report.checks.push_back(std::move(check));
    }
  }

  // 3-valued slots: every outcome that makes have-X (maybe-X) true must make
  // maybe-X (have-X) false, or run only where it is already false.
  for (const auto& s : slots_) {
    const Atom have = zero_ary("have-" + s);
    const Atom maybe = zero_ary("maybe-" + s);
    StaticCheck check{"three-valued " + s, true, ""};
    for (const auto& a : d.actions) {
      const auto pre = top_level_literals(a.precondition);
      const auto outcomes = pddl::flatten_effect(a.effect);
      for (std::size_t i = 0; i < outcomes.size() && check.passed; ++i) {
        const auto& o = outcomes[i];
        const bool adds_have = has_literal(o, have, true);
        const bool adds_maybe = has_literal(o, maybe, true);
        const bool bad = (adds_have && adds_maybe) ||
                         (adds_have && !has_literal(o, maybe, false) && !has_literal(pre, maybe, false)) ||
                         (adds_maybe && !has_literal(o, have, false) && !has_literal(pre, have, false));
        if (bad) {
          check.passed = false;
          check.detail = "'" + a.name + "' outcome " + std::to_string(i) + " " + describe(o) +
                         " can make have-" + s + " and maybe-" + s + " both true";
        }
      }
    }
    report.checks.push_back(std::move(check));
  }

  // Slot fluents stay propositional: no slot value is ever an argument.
  for (const auto& p : d.predicates) {
    if ((p.name.rfind("have-", 0) == 0 || p.name.rfind("maybe-", 0) == 0) && !p.parameters.empty()) {
      report.checks.push_back({"abstraction " + p.name, false, "slot fluent '" + p.name + "' takes arguments"});
    }
  }

  try {
    pddl::check_domain(d);
  } catch (const ParseError& e) {
    throw BuildError(std::string("emitted domain is inconsistent: ") + e.what());
  }
  if (!report.passed()) {
    std::string msg = "static checks failed for domain '" + name_ + "':";
    for (const auto& c : report.checks) {
      if (!c.passed) msg += "\n  " + c.detail;
    }
    throw BuildError(msg);
  }
  return out;
}

pddl::LiftedProblem DomainBuilder::make_problem(const std::string& name, const std::vector<std::string>& init,
                                                const std::string& goal) const {
  const BuiltDomain built = build();
  pddl::LiftedProblem p;
  p.name = name;
  p.domain = built.domain.name;
  for (const auto& text : init) {
    const Condition c = pddl::parse_condition(text);
    if (c.kind != Condition::Kind::kAtom) throw BuildError("initial state entry '" + text + "' is not an atom");
    p.init.push_back(c.atom);
  }
  p.goal = pddl::parse_condition(goal);
  try {
    return pddl::parse_problem(pddl::print_problem(p), built.domain);
  } catch (const ParseError& e) {
    throw BuildError("problem '" + name + "': " + e.what());
  }
}

}  // namespace dialoplan::kit

namespace dialoplan::kit {

namespace {

const nlohmann::json& field(const nlohmann::json& obj, const char* key, nlohmann::json::value_t type) {
  static const nlohmann::json kNull;
  auto it = obj.find(key);
  if (it == obj.end()) return kNull;
  if (it->type() != type && !(type == nlohmann::json::value_t::number_integer && it->is_number()))
    throw ConfigError(std::string("spec field '") + key + "' has the wrong type");
  return *it;
}

std::vector<std::string> strings(const nlohmann::json& obj, const char* key) {
  std::vector<std::string> out;
  for (const auto& v : field(obj, key, nlohmann::json::value_t::array)) {
    if (!v.is_string()) throw ConfigError(std::string("spec field '") + key + "' must list strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string string_or(const nlohmann::json& obj, const char* key, std::string fallback) {
  const auto& v = field(obj, key, nlohmann::json::value_t::string);
  return v.is_null() ? fallback : v.get<std::string>();
}

}  // namespace

CompiledSpec compile_spec(const nlohmann::json& spec) {
  if (!spec.is_object()) throw ConfigError("spec must be a JSON object");
  const std::string name = string_or(spec, "name", "");
  if (name.empty()) throw ConfigError("spec needs a 'name'");

  DomainBuilder b(name);
  for (const auto& s : strings(spec, "slots")) b.declare_slot(s);
  for (const auto& f : strings(spec, "flags")) b.declare_flag(f);
  for (const auto& f : strings(spec, "fluents")) b.declare_fluent(f);

  for (const auto& a : field(spec, "actions", nlohmann::json::value_t::array)) {
    if (!a.is_object()) throw ConfigError("spec actions must be objects");
    ActionSpec as;
    as.name = string_or(a, "name", "");
    as.kind = action_kind_from_string(string_or(a, "kind", "dialogue"));
    as.precondition = string_or(a, "precondition", "(and)");
    as.outcomes = strings(a, "outcomes");
    for (const auto& p : field(a, "parameters", nlohmann::json::value_t::array))
      as.parameters.push_back({string_or(p, "name", ""), string_or(p, "type", "object")});
    b.add_action(std::move(as));
  }

  if (const auto& f = field(spec, "followups", nlohmann::json::value_t::object); !f.is_null()) {
    FollowupSpec fs{strings(f, "types"), strings(f, "reasons"), {}};
    for (const auto& [type, handlers] : field(f, "handlers", nlohmann::json::value_t::object).items())
      for (const auto& h : handlers) fs.handlers[type].push_back(h.get<std::string>());
    b.compile_followups(std::move(fs));
  }

  IntentSpec is;
  for (const auto& i : field(spec, "intents", nlohmann::json::value_t::array))
    is.intents.push_back({string_or(i, "name", ""), string_or(i, "condition", "(and)")});
  if (!is.intents.empty()) b.compile_intents(std::move(is));

  CompiledSpec out;
  out.built = b.build();
  const auto& p = field(spec, "problem", nlohmann::json::value_t::object);
  if (p.is_null()) throw ConfigError("spec needs a 'problem' object");
  out.problem = b.make_problem(string_or(p, "name", name + "-problem"), strings(p, "init"), string_or(p, "goal", ""));
  return out;
}

}  // namespace dialoplan::kit
