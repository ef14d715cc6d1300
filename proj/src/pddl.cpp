#include "dialoplan/pddl.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "dialoplan/error.hpp"

namespace dialoplan::pddl {
namespace {

using sexpr::Node;

const std::set<std::string, std::less<>> kRequirements = {
    ":strips", ":typing", ":negative-preconditions", ":universal-preconditions",
    ":non-deterministic"};

[[noreturn]] void fail(const Node& at, const std::string& message) {
  throw ParseError(message, at.line, at.column);
}

const std::string& expect_symbol(const Node& node, const char* what) {
  if (!node.is_symbol() || node.symbol.empty()) fail(node, std::string("expected ") + what);
  return node.symbol;
}

/// Runs `check`, giving position-less ParseErrors the position of `where`.
template <class F>
void located(const Node* where, F&& check) {
  try {
    check();
  } catch (const ParseError& e) {
    if (e.line() != 0 || where == nullptr) throw;
    throw ParseError(e.what(), where->line, where->column);
  }
}

bool is_variable(std::string_view s) { return !s.empty() && s.front() == '?'; }

/// `?a ?b - t ?c` style typed list; untyped entries default to `object`.
std::vector<TypedName> parse_typed_list(const Node& list, std::size_t first = 0) {
  if (!list.is_list) fail(list, "expected a typed list");
  std::vector<TypedName> out;
  std::size_t pending_from = 0;
  for (std::size_t i = first; i < list.items.size(); ++i) {
    const Node& item = list.items[i];
    const std::string& sym = expect_symbol(item, "a name in typed list");
    if (sym == "-") {
      if (i + 1 >= list.items.size()) fail(item, "missing type after '-'");
      if (pending_from == out.size()) fail(item, "type without preceding names");
      const std::string& type = expect_symbol(list.items[i + 1], "a type name");
      for (std::size_t k = pending_from; k < out.size(); ++k) out[k].type = type;
      pending_from = out.size();
      ++i;
      continue;
    }
    out.push_back({sym, "object"});
  }
  return out;
}

Atom parse_atom(const Node& node) {
  if (!node.is_list || node.items.empty()) fail(node, "expected an atom");
  Atom atom;
  atom.predicate = expect_symbol(node.items.front(), "a predicate name");
  for (std::size_t i = 1; i < node.items.size(); ++i) {
    atom.arguments.push_back(expect_symbol(node.items[i], "an atom argument"));
  }
  return atom;
}

bool reserved_head(const Node& node) {
  static const std::set<std::string, std::less<>> kKeywords = {
      "and", "or", "not", "forall", "exists", "oneof", "when", "imply", "probabilistic"};
  return node.is_list && !node.items.empty() && node.items.front().is_symbol() &&
         kKeywords.count(node.items.front().symbol) > 0;
}

Effect parse_literal_effect(const Node& node) {
  Effect e;
  e.kind = Effect::Kind::kLiteral;
  if (node.headed_by("not")) {
    if (node.items.size() != 2) fail(node, "'not' takes exactly one atom");
    if (reserved_head(node.items[1])) fail(node.items[1], "expected an atom under 'not'");
    e.atom = parse_atom(node.items[1]);
    e.positive = false;
    return e;
  }
  if (reserved_head(node)) fail(node, "expected a literal");
  e.atom = parse_atom(node);
  return e;
}

Effect parse_literal_conjunction(const Node& node) {
  if (!node.headed_by("and")) return parse_literal_effect(node);
  Effect e;
  e.kind = Effect::Kind::kAnd;
  for (std::size_t i = 1; i < node.items.size(); ++i) {
    e.children.push_back(parse_literal_effect(node.items[i]));
  }
  return e;
}

Effect parse_oneof(const Node& node) {
  if (node.items.size() < 2) fail(node, "'oneof' needs at least one outcome");
  Effect e;
  e.kind = Effect::Kind::kOneof;
  for (std::size_t i = 1; i < node.items.size(); ++i) {
    const Node& child = node.items[i];
    if (child.headed_by("oneof")) fail(child, "nested 'oneof' is not supported");
    e.children.push_back(parse_literal_conjunction(child));
  }
  return e;
}

void print_typed_list(std::string& out, const std::vector<TypedName>& names, bool typed = true) {
  // Consecutive names sharing a type are grouped: `?a ?b - t`.
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += " ";
    out += names[i].name;
    const bool last_of_group = i + 1 == names.size() || names[i + 1].type != names[i].type;
    if (typed && last_of_group) out += " - " + names[i].type;
  }
}

std::string print_atom(const Atom& a) {
  std::string out = "(" + a.predicate;
  for (const auto& arg : a.arguments) out += " " + arg;
  return out + ")";
}

// Declaration checking.

/// Source positions of declaration sections and actions, when known.
struct Positions {
  std::map<std::string, const Node*> sections;
  std::vector<const Node*> actions;

  const Node* section(const std::string& key) const {
    auto it = sections.find(key);
    return it == sections.end() ? nullptr : it->second;
  }
  const Node* action(std::size_t i) const { return i < actions.size() ? actions[i] : nullptr; }
};

class DomainChecker {
 public:
  explicit DomainChecker(const LiftedDomain& d, Positions at = {}) : domain_(d), at_(std::move(at)) {}

  void run() {
    located(at_.section(":types"), [&] { check_types(); });
    located(at_.section(":constants"), [&] { check_constants(); });
    located(at_.section(":predicates"), [&] { check_predicates(); });
    for (std::size_t i = 0; i < domain_.actions.size(); ++i)
      located(at_.action(i), [&] { check_action(domain_.actions[i]); });
  }

 private:
  void check_types() {
    for (const auto& r : domain_.requirements) {
      if (kRequirements.count(r) == 0) throw ParseError("unknown requirement flag '" + r + "'");
    }
    std::set<std::string> types;
    for (const auto& t : domain_.types) {
      if (t != "object" && !types.insert(t).second) throw ParseError("duplicate type '" + t + "'");
    }
  }

  void check_constants() {
    for (const auto& c : domain_.constants) {
      check_type(c.type, "constant " + c.name);
      if (!constants_.emplace(c.name, c.type).second) {
        throw ParseError("duplicate constant '" + c.name + "'");
      }
    }
  }

  void check_predicates() {
    std::set<std::string> predicates;
    for (const auto& p : domain_.predicates) {
      if (!predicates.insert(p.name).second) throw ParseError("duplicate predicate '" + p.name + "'");
      for (const auto& param : p.parameters) check_type(param.type, "predicate " + p.name);
    }
  }

  void check_action(const ActionSchema& a) {
    if (!actions_.insert(a.name).second) throw ParseError("duplicate action '" + a.name + "'");
    std::map<std::string, std::string> scope;
    for (const auto& param : a.parameters) {
      if (!is_variable(param.name)) {
        throw ParseError("parameter '" + param.name + "' of " + a.name + " must start with '?'");
      }
      check_type(param.type, "action " + a.name);
      if (!scope.emplace(param.name, param.type).second) {
        throw ParseError("duplicate parameter '" + param.name + "' in " + a.name);
      }
    }
    check_condition(a.precondition, scope, a.name);
    check_effect(a.effect, scope, a.name);
  }

 public:
  void check_type(const std::string& type, const std::string& where) const {
    if (type == "object") return;
    if (!domain_.has_type(type)) throw ParseError("undeclared type '" + type + "' in " + where);
  }

  void check_atom(const Atom& atom, const std::map<std::string, std::string>& scope,
                  const std::string& where) const {
    const Predicate* p = domain_.find_predicate(atom.predicate);
    if (p == nullptr) {
      throw ParseError("undeclared predicate '" + atom.predicate + "' in " + where);
    }
    if (p->parameters.size() != atom.arguments.size()) {
      throw ParseError("predicate '" + atom.predicate + "' expects " +
                       std::to_string(p->parameters.size()) + " argument(s) in " + where);
    }
    for (std::size_t i = 0; i < atom.arguments.size(); ++i) {
      const std::string& arg = atom.arguments[i];
      std::string type;
      if (is_variable(arg)) {
        auto it = scope.find(arg);
        if (it == scope.end()) throw ParseError("unbound variable '" + arg + "' in " + where);
        type = it->second;
      } else {
        auto it = constants_.find(arg);
        if (it == constants_.end()) throw ParseError("unknown constant '" + arg + "' in " + where);
        type = it->second;
      }
      const std::string& want = p->parameters[i].type;
      if (want != "object" && want != type) {
        throw ParseError("argument '" + arg + "' of " + atom.predicate + " has type " + type +
                         ", expected " + want + " in " + where);
      }
    }
  }

  void check_condition(const Condition& c, std::map<std::string, std::string> scope,
                       const std::string& where) const {
    switch (c.kind) {
      case Condition::Kind::kAtom:
        check_atom(c.atom, scope, where);
        return;
      case Condition::Kind::kForallNot:
        check_type(c.bound.type, where);
        scope[c.bound.name] = c.bound.type;
        check_atom(c.atom, scope, where);
        return;
      default:
        for (const auto& child : c.children) check_condition(child, scope, where);
    }
  }

  void check_effect(const Effect& e, const std::map<std::string, std::string>& scope,
                    const std::string& where) const {
    if (e.kind == Effect::Kind::kLiteral) {
      check_atom(e.atom, scope, where);
      return;
    }
    for (const auto& child : e.children) check_effect(child, scope, where);
  }

  const std::map<std::string, std::string>& constants() const { return constants_; }

 private:
  const LiftedDomain& domain_;
  Positions at_;
  std::map<std::string, std::string> constants_;
  std::set<std::string> actions_;
};

}  // namespace

// Condition helpers

Condition Condition::make_atom(Atom a) {
  Condition c;
  c.kind = Kind::kAtom;
  c.atom = std::move(a);
  return c;
}

Condition Condition::make_not(Condition child) {
  Condition c;
  c.kind = Kind::kNot;
  c.children.push_back(std::move(child));
  return c;
}

Condition Condition::make_and(std::vector<Condition> cs) {
  Condition c;
  c.kind = Kind::kAnd;
  c.children = std::move(cs);
  return c;
}

const Predicate* LiftedDomain::find_predicate(std::string_view n) const {
  for (const auto& p : predicates) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

const ActionSchema* LiftedDomain::find_action(std::string_view n) const {
  for (const auto& a : actions) {
    if (a.name == n) return &a;
  }
  return nullptr;
}

bool LiftedDomain::has_type(std::string_view type) const {
  return type == "object" || std::find(types.begin(), types.end(), type) != types.end();
}

// Readers

Condition parse_condition(const Node& node) {
  if (!node.is_list) fail(node, "expected a condition, found symbol '" + node.symbol + "'");
  if (node.items.empty()) fail(node, "empty condition");
  if (node.headed_by("and") || node.headed_by("or")) {
    Condition c;
    c.kind = node.headed_by("and") ? Condition::Kind::kAnd : Condition::Kind::kOr;
    for (std::size_t i = 1; i < node.items.size(); ++i) {
      c.children.push_back(parse_condition(node.items[i]));
    }
    return c;
  }
  if (node.headed_by("not")) {
    if (node.items.size() != 2) fail(node, "'not' takes exactly one argument");
    return Condition::make_not(parse_condition(node.items[1]));
  }
  if (node.headed_by("forall")) {
    if (node.items.size() != 3) fail(node, "'forall' takes a variable list and a body");
    auto vars = parse_typed_list(node.items[1]);
    if (vars.size() != 1 || !is_variable(vars.front().name)) {
      fail(node.items[1], "'forall' binds exactly one variable");
    }
    const Node& body = node.items[2];
    if (!body.headed_by("not") || body.items.size() != 2 || reserved_head(body.items[1])) {
      fail(body, "'forall' body must be a negated atom");
    }
    Condition c;
    c.kind = Condition::Kind::kForallNot;
    c.bound = vars.front();
    c.atom = parse_atom(body.items[1]);
    return c;
  }
  if (reserved_head(node)) fail(node, "unsupported construct '" + node.items.front().symbol + "'");
  return Condition::make_atom(parse_atom(node));
}

Effect parse_effect(const Node& node) {
  if (!node.is_list) fail(node, "expected an effect");
  if (node.headed_by("oneof")) return parse_oneof(node);
  if (node.headed_by("and")) {
    Effect e;
    e.kind = Effect::Kind::kAnd;
    for (std::size_t i = 1; i < node.items.size(); ++i) {
      const Node& child = node.items[i];
      if (child.headed_by("oneof")) {
        e.children.push_back(parse_oneof(child));
      } else {
        e.children.push_back(parse_literal_conjunction(child));
      }
    }
    return e;
  }
  if (reserved_head(node) && !node.headed_by("not")) {
    fail(node, "unsupported effect '" + node.items.front().symbol + "'");
  }
  return parse_literal_effect(node);
}

Condition parse_condition(std::string_view text) { return parse_condition(sexpr::read_one(text)); }
Effect parse_effect(std::string_view text) { return parse_effect(sexpr::read_one(text)); }

void check_domain(const LiftedDomain& domain) { DomainChecker(domain).run(); }

LiftedDomain parse_domain(std::string_view text) {
  const auto nodes = sexpr::read_all(text);
  if (nodes.size() != 1) throw ParseError("expected exactly one (define ...) form");
  const Node& root = nodes.front();
  if (!root.headed_by("define") || root.items.size() < 2) fail(root, "expected (define (domain NAME) ...)");
  const Node& header = root.items[1];
  if (!header.headed_by("domain") || header.items.size() != 2) fail(header, "expected (domain NAME)");

  LiftedDomain d;
  Positions at;
  d.name = expect_symbol(header.items[1], "a domain name");
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const Node& section = root.items[i];
    if (!section.is_list || section.items.empty() || !section.items.front().is_symbol()) {
      fail(section, "expected a domain section");
    }
    const std::string& key = section.items.front().symbol;
    at.sections.emplace(key, &section);
    if (key == ":requirements") {
      for (std::size_t k = 1; k < section.items.size(); ++k) {
        const std::string& flag = expect_symbol(section.items[k], "a requirement flag");
        if (kRequirements.count(flag) == 0) fail(section.items[k], "unknown requirement flag '" + flag + "'");
        d.requirements.push_back(flag);
      }
    } else if (key == ":types") {
      for (const auto& t : parse_typed_list(section, 1)) {
        if (t.type != "object") fail(section, "type hierarchies are not supported");
        d.types.push_back(t.name);
      }
    } else if (key == ":constants") {
      d.constants = parse_typed_list(section, 1);
    } else if (key == ":predicates") {
      for (std::size_t k = 1; k < section.items.size(); ++k) {
        const Node& p = section.items[k];
        if (!p.is_list || p.items.empty()) fail(p, "expected a predicate declaration");
        Predicate pred;
        pred.name = expect_symbol(p.items.front(), "a predicate name");
        pred.parameters = parse_typed_list(p, 1);
        d.predicates.push_back(std::move(pred));
      }
    } else if (key == ":action") {
      if (section.items.size() < 2) fail(section, "action without a name");
      ActionSchema a;
      a.name = expect_symbol(section.items[1], "an action name");
      bool has_effect = false;
      for (std::size_t k = 2; k < section.items.size(); k += 2) {
        const std::string& slot = expect_symbol(section.items[k], "an action keyword");
        if (k + 1 >= section.items.size()) fail(section.items[k], "missing value for " + slot);
        const Node& value = section.items[k + 1];
        if (slot == ":parameters") {
          a.parameters = parse_typed_list(value);
        } else if (slot == ":precondition") {
          a.precondition = parse_condition(value);
        } else if (slot == ":effect") {
          a.effect = parse_effect(value);
          has_effect = true;
        } else if (slot == ":kind") {
          try {
            a.kind = action_kind_from_string(expect_symbol(value, "an action kind"));
          } catch (const StructuralError& e) {
            fail(value, e.what());
          }
        } else {
          fail(section.items[k], "unknown action keyword '" + slot + "'");
        }
      }
      if (!has_effect) fail(section, "action '" + a.name + "' has no :effect");
      d.actions.push_back(std::move(a));
      at.actions.push_back(&section);
    } else {
      fail(section, "unknown domain section '" + key + "'");
    }
  }
  DomainChecker(d, std::move(at)).run();
  return d;
}

LiftedProblem parse_problem(std::string_view text, const LiftedDomain& domain) {
  const auto nodes = sexpr::read_all(text);
  if (nodes.size() != 1) throw ParseError("expected exactly one (define ...) form");
  const Node& root = nodes.front();
  if (!root.headed_by("define") || root.items.size() < 2) fail(root, "expected (define (problem NAME) ...)");
  const Node& header = root.items[1];
  if (!header.headed_by("problem") || header.items.size() != 2) fail(header, "expected (problem NAME)");

  LiftedProblem p;
  p.name = expect_symbol(header.items[1], "a problem name");
  bool has_goal = false;
  const Node* objects_at = nullptr;
  const Node* goal_at = nullptr;
  std::vector<const Node*> init_at;
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const Node& section = root.items[i];
    if (!section.is_list || section.items.empty() || !section.items.front().is_symbol()) {
      fail(section, "expected a problem section");
    }
    const std::string& key = section.items.front().symbol;
    if (key == ":domain") {
      if (section.items.size() != 2) fail(section, "expected (:domain NAME)");
      p.domain = expect_symbol(section.items[1], "a domain name");
      if (p.domain != domain.name) fail(section, "problem is for domain '" + p.domain + "', not '" + domain.name + "'");
    } else if (key == ":objects") {
      p.objects = parse_typed_list(section, 1);
      objects_at = &section;
    } else if (key == ":init") {
      for (std::size_t k = 1; k < section.items.size(); ++k) {
        if (reserved_head(section.items[k])) fail(section.items[k], "initial state holds atoms only");
        p.init.push_back(parse_atom(section.items[k]));
        init_at.push_back(&section.items[k]);
      }
    } else if (key == ":goal") {
      if (section.items.size() != 2) fail(section, "expected (:goal CONDITION)");
      p.goal = parse_condition(section.items[1]);
      goal_at = &section.items[1];
      has_goal = true;
    } else {
      fail(section, "unknown problem section '" + key + "'");
    }
  }
  if (!has_goal) fail(root, "problem has no :goal");

  // Objects, init and goal against the domain. Objects join the constants
  // as the checker's constant table.
  LiftedDomain scope = domain;
  scope.actions.clear();
  DomainChecker checker(scope);
  located(objects_at, [&] {
    for (const auto& o : p.objects) {
      if (!domain.has_type(o.type)) throw ParseError("undeclared object type '" + o.type + "' for " + o.name);
      scope.constants.push_back(o);
    }
    checker.run();
  });
  for (std::size_t i = 0; i < p.init.size(); ++i) {
    located(init_at[i], [&] {
      for (const auto& arg : p.init[i].arguments) {
        if (is_variable(arg)) throw ParseError("variable '" + arg + "' in initial state");
      }
      checker.check_atom(p.init[i], {}, "initial state");
    });
  }
  located(goal_at, [&] { checker.check_condition(p.goal, {}, "goal"); });
  return p;
}

// Printers

std::string print_condition(const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::kAtom:
      return print_atom(c.atom);
    case Condition::Kind::kNot:
      return "(not " + print_condition(c.children.front()) + ")";
    case Condition::Kind::kForallNot:
      return "(forall (" + c.bound.name + " - " + c.bound.type + ") (not " + print_atom(c.atom) + "))";
    case Condition::Kind::kAnd:
    case Condition::Kind::kOr: {
      std::string out = c.kind == Condition::Kind::kAnd ? "(and" : "(or";
      for (const auto& child : c.children) out += " " + print_condition(child);
      return out + ")";
    }
  }
  return {};
}

std::string print_effect(const Effect& e) {
  switch (e.kind) {
    case Effect::Kind::kLiteral:
      return e.positive ? print_atom(e.atom) : "(not " + print_atom(e.atom) + ")";
    case Effect::Kind::kAnd:
    case Effect::Kind::kOneof: {
      std::string out = e.kind == Effect::Kind::kAnd ? "(and" : "(oneof";
      for (const auto& child : e.children) out += " " + print_effect(child);
      return out + ")";
    }
  }
  return {};
}

std::string print_domain(const LiftedDomain& d) {
  std::string out = "(define (domain " + d.name + ")\n";
  out += "  (:requirements";
  for (const auto& r : d.requirements) out += " " + r;
  out += ")\n";
  if (!d.types.empty()) {
    out += "  (:types";
    for (const auto& t : d.types) out += " " + t;
    out += ")\n";
  }
  if (!d.constants.empty()) {
    out += "  (:constants ";
    print_typed_list(out, d.constants);
    out += ")\n";
  }
  out += "  (:predicates";
  for (const auto& p : d.predicates) {
    out += "\n    (" + p.name;
    if (!p.parameters.empty()) {
      out += " ";
      print_typed_list(out, p.parameters);
    }
    out += ")";
  }
  out += ")\n";
  for (const auto& a : d.actions) {
    out += "\n  (:action " + a.name + "\n";
    if (a.kind != ActionKind::kDialogue) out += "    :kind " + std::string(to_string(a.kind)) + "\n";
    out += "    :parameters (";
    print_typed_list(out, a.parameters);
    out += ")\n";
    out += "    :precondition " + print_condition(a.precondition) + "\n";
    out += "    :effect " + print_effect(a.effect) + ")\n";
  }
  return out + ")\n";
}

std::string print_problem(const LiftedProblem& p) {
  std::string out = "(define (problem " + p.name + ")\n";
  out += "  (:domain " + p.domain + ")\n";
  out += "  (:objects";
  if (!p.objects.empty()) {
    out += " ";
    print_typed_list(out, p.objects);
  }
  out += ")\n  (:init";
  for (const auto& a : p.init) out += "\n    " + print_atom(a);
  out += ")\n";
  out += "  (:goal " + print_condition(p.goal) + "))\n";
  return out;
}

// Grounding

std::string ground_fluent_name(std::string_view predicate, const std::vector<std::string>& args) {
  std::string out(predicate);
  for (const auto& a : args) out += "-" + a;
  return out;
}

std::string ground_action_name(std::string_view schema, const std::vector<std::string>& args) {
  std::string out(schema);
  if (args.empty()) return out;
  out += "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out += ",";
    out += args[i];
  }
  return out + ")";
}

std::pair<std::string, std::vector<std::string>> split_ground_action_name(std::string_view name) {
  const auto open = name.find('(');
  if (open == std::string_view::npos || name.back() != ')') return {std::string(name), {}};
  std::vector<std::string> args;
  std::string current;
  for (char c : name.substr(open + 1, name.size() - open - 2)) {
    if (c == ',') {
      args.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  args.push_back(current);
  return {std::string(name.substr(0, open)), args};
}

std::vector<std::vector<std::pair<Atom, bool>>> flatten_effect(const Effect& effect) {
  using Outcomes = std::vector<std::vector<std::pair<Atom, bool>>>;
  switch (effect.kind) {
    case Effect::Kind::kLiteral:
      return Outcomes{{{effect.atom, effect.positive}}};
    case Effect::Kind::kOneof: {
      Outcomes out;
      for (const auto& child : effect.children) {
        for (auto& o : flatten_effect(child)) out.push_back(std::move(o));
      }
      return out;
    }
    case Effect::Kind::kAnd: {
      Outcomes acc{{}};
      for (const auto& child : effect.children) {
        const Outcomes part = flatten_effect(child);
        Outcomes next;
        next.reserve(acc.size() * part.size());
        for (const auto& left : acc) {
          for (const auto& right : part) {
            auto merged = left;
            merged.insert(merged.end(), right.begin(), right.end());
            next.push_back(std::move(merged));
          }
        }
        acc = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

namespace {

using Substitution = std::map<std::string, std::string>;

class Grounder {
 public:
  Grounder(const LiftedDomain& d, const LiftedProblem& p, const GroundOptions& o)
      : domain_(d), problem_(p), options_(o) {
    auto add_object = [&](const TypedName& obj) {
      objects_by_type_[obj.type].push_back(obj.name);
      if (obj.type != "object") objects_by_type_["object"].push_back(obj.name);
    };
    for (const auto& c : d.constants) add_object(c);
    for (const auto& obj : p.objects) add_object(obj);
  }

  FondProblem run() {
    FondProblem out;
    for (const auto& pred : domain_.predicates) {
      for_each_tuple(pred.parameters, [&](const std::vector<std::string>& args) {
        const std::string name = ground_fluent_name(pred.name, args);
        if (out.fluents.find(name)) {
          throw StructuralError("ground fluent name collision: '" + name + "'");
        }
        out.fluents.declare(name);
        return true;
      });
    }
    table_ = &out.fluents;

    for (const auto& atom : problem_.init) out.init.insert(fluent(atom, {}));
    out.goal = condition(problem_.goal, {});

    std::size_t total = 0;
    for (const auto& schema : domain_.actions) {
      std::size_t tuples = 1;
      for (const auto& param : schema.parameters) {
        tuples *= objects(param.type).size();
        if (tuples > options_.max_ground_actions) break;
      }
      total += tuples;
      if (total > options_.max_ground_actions) {
        throw ResourceError("grounding schema '" + schema.name + "' exceeds the cap of " +
                            std::to_string(options_.max_ground_actions) + " ground actions");
      }
      const auto outcomes = flatten_effect(schema.effect);
      for_each_tuple(schema.parameters, [&](const std::vector<std::string>& args) {
        Substitution sub;
        for (std::size_t i = 0; i < args.size(); ++i) sub[schema.parameters[i].name] = args[i];
        NDAction a;
        a.name = ground_action_name(schema.name, args);
        a.kind = schema.kind;
        a.precondition = condition(schema.precondition, sub);
        for (const auto& lits : outcomes) a.outcomes.push_back(outcome(lits, sub));
        out.actions.push_back(std::move(a));
        return true;
      });
    }

    if (options_.prune_static) prune(out);
    out.check();
    return out;
  }

 private:
  const std::vector<std::string>& objects(const std::string& type) const {
    static const std::vector<std::string> kNone;
    auto it = objects_by_type_.find(type);
    return it == objects_by_type_.end() ? kNone : it->second;
  }

  template <typename Fn>
  void for_each_tuple(const std::vector<TypedName>& params, Fn&& fn) const {
    std::vector<const std::vector<std::string>*> pools;
    for (const auto& p : params) {
      pools.push_back(&objects(p.type));
      if (pools.back()->empty()) return;
    }
    std::vector<std::size_t> index(params.size(), 0);
    std::vector<std::string> args(params.size());
    while (true) {
      for (std::size_t i = 0; i < params.size(); ++i) args[i] = (*pools[i])[index[i]];
      if (!fn(args)) return;
      // Odometer with the last position varying fastest.
      std::size_t pos = params.size();
      while (pos > 0) {
        --pos;
        if (++index[pos] < pools[pos]->size()) break;
        index[pos] = 0;
        if (pos == 0) return;
      }
      if (params.empty()) return;
    }
  }

  std::vector<std::string> substitute(const Atom& atom, const Substitution& sub) const {
    std::vector<std::string> args;
    for (const auto& a : atom.arguments) {
      auto it = sub.find(a);
      args.push_back(it == sub.end() ? a : it->second);
    }
    return args;
  }

  FluentId fluent(const Atom& atom, const Substitution& sub) const {
    return table_->at(ground_fluent_name(atom.predicate, substitute(atom, sub)));
  }

  Formula condition(const Condition& c, const Substitution& sub) const {
    switch (c.kind) {
      case Condition::Kind::kAtom:
        return Formula::atom(fluent(c.atom, sub));
      case Condition::Kind::kNot:
        return Formula::negation(condition(c.children.front(), sub));
      case Condition::Kind::kForallNot: {
        std::vector<Formula> parts;
        for (const auto& obj : objects(c.bound.type)) {
          Substitution inner = sub;
          inner[c.bound.name] = obj;
          parts.push_back(Formula::negation(Formula::atom(fluent(c.atom, inner))));
        }
        if (parts.empty()) return Formula::truth();
        return Formula::conjunction(std::move(parts));
      }
      case Condition::Kind::kAnd:
      case Condition::Kind::kOr: {
        if (c.children.empty()) {
          return c.kind == Condition::Kind::kAnd ? Formula::truth()
                                                 : Formula::negation(Formula::truth());
        }
        std::vector<Formula> parts;
        for (const auto& child : c.children) parts.push_back(condition(child, sub));
        return c.kind == Condition::Kind::kAnd ? Formula::conjunction(std::move(parts))
                                               : Formula::disjunction(std::move(parts));
      }
    }
    return Formula::truth();
  }

  Outcome outcome(const std::vector<std::pair<Atom, bool>>& literals, const Substitution& sub) const {
    State adds;
    State deletes;
    for (const auto& [atom, positive] : literals) {
      if (!positive) deletes.insert(fluent(atom, sub));
    }
    // Delete-then-add: a fluent both added and deleted ends up true.
    for (const auto& [atom, positive] : literals) {
      if (positive) {
        const FluentId id = fluent(atom, sub);
        adds.insert(id);
        deletes.erase(id);
      }
    }
    return Outcome(std::move(adds), std::move(deletes));
  }

  /// nullopt when the value depends on a fluent some action changes.
  static std::optional<bool> static_value(const Formula& f, const State& init, const State& dynamic) {
    switch (f.kind()) {
      case Formula::Kind::kTrue:
        return true;
      case Formula::Kind::kAtom:
        if (dynamic.contains(f.fluent())) return std::nullopt;
        return init.contains(f.fluent());
      case Formula::Kind::kNot: {
        auto v = static_value(f.children().front(), init, dynamic);
        if (!v) return std::nullopt;
        return !*v;
      }
      case Formula::Kind::kAnd:
      case Formula::Kind::kOr: {
        const bool is_and = f.kind() == Formula::Kind::kAnd;
        bool unknown = false;
        for (const auto& c : f.children()) {
          auto v = static_value(c, init, dynamic);
          if (!v) {
            unknown = true;
          } else if (*v != is_and) {
            return !is_and;
          }
        }
        if (unknown) return std::nullopt;
        return is_and;
      }
      case Formula::Kind::kForallNot:
        return std::nullopt;
    }
    return std::nullopt;
  }

  void prune(FondProblem& p) const {
    State dynamic;
    for (const auto& a : p.actions) {
      for (const auto& o : a.outcomes) {
        for (FluentId id : o.adds().ids()) dynamic.insert(id);
        for (FluentId id : o.deletes().ids()) dynamic.insert(id);
      }
    }
    std::erase_if(p.actions, [&](const NDAction& a) {
      auto v = static_value(a.precondition, p.init, dynamic);
      return v.has_value() && !*v;
    });
  }

  const LiftedDomain& domain_;
  const LiftedProblem& problem_;
  const GroundOptions& options_;
  std::map<std::string, std::vector<std::string>> objects_by_type_;
  const FluentTable* table_ = nullptr;
};

}  // namespace

FondProblem ground(const LiftedDomain& domain, const LiftedProblem& problem, const GroundOptions& options) {
  return Grounder(domain, problem, options).run();
}

}  // namespace dialoplan::pddl
