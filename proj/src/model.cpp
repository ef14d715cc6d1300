#include "dialoplan/model.hpp"

#include <algorithm>
#include <bit>
#include <functional>

#include "dialoplan/error.hpp"

namespace dialoplan {

// FluentTable

bool FluentTable::valid_name(std::string_view name) {
  if (name.empty() || name.front() < 'a' || name.front() > 'z') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
  });
}

FluentId FluentTable::intern(std::string_view name) {
  if (auto id = find(name)) return *id;
  if (!valid_name(name)) throw StructuralError("invalid fluent name '" + std::string(name) + "'");
  const auto id = static_cast<FluentId>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

FluentId FluentTable::declare(std::string_view name) {
  if (find(name)) throw StructuralError("duplicate fluent '" + std::string(name) + "'");
  return intern(name);
}

std::optional<FluentId> FluentTable::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FluentId FluentTable::at(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw StructuralError("undeclared fluent '" + std::string(name) + "'");
}

// State

State::State(std::initializer_list<FluentId> ids) {
  for (FluentId id : ids) insert(id);
}

State State::from_ids(const std::vector<FluentId>& ids) {
  State s;
  for (FluentId id : ids) s.insert(id);
  return s;
}

bool State::contains(FluentId id) const {
  const std::size_t word = id / 64;
  return word < words_.size() && ((words_[word] >> (id % 64)) & 1U) != 0;
}

void State::insert(FluentId id) {
  const std::size_t word = id / 64;
  if (word >= words_.size()) words_.resize(word + 1, 0);
  words_[word] |= std::uint64_t{1} << (id % 64);
}

void State::erase(FluentId id) {
  const std::size_t word = id / 64;
  if (word >= words_.size()) return;
  words_[word] &= ~(std::uint64_t{1} << (id % 64));
  trim();
}

std::size_t State::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<FluentId> State::ids() const {
  std::vector<FluentId> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits != 0) {
      const int bit = std::countr_zero(bits);
      out.push_back(static_cast<FluentId>(w * 64 + static_cast<std::size_t>(bit)));
      bits &= bits - 1;
    }
  }
  return out;
}

bool State::disjoint(const State& other) const {
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if ((words_[i] & other.words_[i]) != 0) return false;
  }
  return true;
}

bool State::subset_of(const State& other) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    const std::uint64_t theirs = i < other.words_.size() ? other.words_[i] : 0;
    if ((words_[i] & ~theirs) != 0) return false;
  }
  return true;
}

State State::with(const State& adds, const State& deletes) const {
  State out;
  out.words_.resize(std::max(words_.size(), adds.words_.size()), 0);
  for (std::size_t i = 0; i < out.words_.size(); ++i) {
    std::uint64_t w = i < words_.size() ? words_[i] : 0;
    if (i < deletes.words_.size()) w &= ~deletes.words_[i];
    if (i < adds.words_.size()) w |= adds.words_[i];
    out.words_[i] = w;
  }
  out.trim();
  return out;
}

std::size_t State::hash() const {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (auto w : words_) {
    h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

std::strong_ordering operator<=>(const State& a, const State& b) {
  // Compare as sorted id sequences so ordering matches the textual one.
  const auto ia = a.ids();
  const auto ib = b.ids();
  return std::lexicographical_compare_three_way(ia.begin(), ia.end(), ib.begin(), ib.end());
}

void State::trim() {
  while (!words_.empty() && words_.back() == 0) words_.pop_back();
}

// Formula

Formula Formula::atom(FluentId fluent) {
  Formula f;
  f.kind_ = Kind::kAtom;
  f.fluent_ = fluent;
  return f;
}

Formula Formula::literal(Literal lit) {
  return lit.positive ? atom(lit.fluent) : negation(atom(lit.fluent));
}

Formula Formula::negation(Formula child) {
  Formula f;
  f.kind_ = Kind::kNot;
  f.children_.push_back(std::move(child));
  return f;
}

Formula Formula::conjunction(std::vector<Formula> children) {
  Formula f;
  f.kind_ = Kind::kAnd;
  f.children_ = std::move(children);
  return f;
}

Formula Formula::disjunction(std::vector<Formula> children) {
  Formula f;
  f.kind_ = Kind::kOr;
  f.children_ = std::move(children);
  return f;
}

Formula Formula::forall_not(Quantifier quantifier) {
  Formula f;
  f.kind_ = Kind::kForallNot;
  f.quantifier_ = std::make_shared<const Quantifier>(std::move(quantifier));
  return f;
}

Formula Formula::of_literals(const std::vector<Literal>& literals) {
  if (literals.empty()) return truth();
  if (literals.size() == 1) return literal(literals.front());
  std::vector<Formula> parts;
  parts.reserve(literals.size());
  for (const auto& lit : literals) parts.push_back(literal(lit));
  return conjunction(std::move(parts));
}

bool Formula::ground() const {
  if (kind_ == Kind::kForallNot) return false;
  return std::all_of(children_.begin(), children_.end(), [](const Formula& c) { return c.ground(); });
}

std::optional<std::vector<Literal>> Formula::conjunct_literals() const {
  auto as_literal = [](const Formula& f) -> std::optional<Literal> {
    if (f.kind_ == Kind::kAtom) return Literal{f.fluent_, true};
    if (f.kind_ == Kind::kNot && f.children_.front().kind_ == Kind::kAtom) {
      return Literal{f.children_.front().fluent_, false};
    }
    return std::nullopt;
  };
  std::vector<Literal> out;
  if (kind_ == Kind::kTrue) return out;
  if (auto lit = as_literal(*this)) return std::vector<Literal>{*lit};
  if (kind_ != Kind::kAnd) return std::nullopt;
  for (const auto& c : children_) {
    auto lit = as_literal(c);
    if (!lit) return std::nullopt;
    out.push_back(*lit);
  }
  return out;
}

void Formula::collect_fluents(std::vector<FluentId>& out) const {
  if (kind_ == Kind::kAtom) out.push_back(fluent_);
  for (const auto& c : children_) c.collect_fluents(out);
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.kind_ != b.kind_ || a.fluent_ != b.fluent_ || a.children_ != b.children_) return false;
  if (a.quantifier_ == b.quantifier_) return true;
  if (!a.quantifier_ || !b.quantifier_) return false;
  return *a.quantifier_ == *b.quantifier_;
}

bool eval_formula(const Formula& f, const State& s) {
  switch (f.kind()) {
    case Formula::Kind::kTrue:
      return true;
    case Formula::Kind::kAtom:
      return s.contains(f.fluent());
    case Formula::Kind::kNot:
      return !eval_formula(f.children().front(), s);
    case Formula::Kind::kAnd:
      return std::all_of(f.children().begin(), f.children().end(),
                         [&](const Formula& c) { return eval_formula(c, s); });
    case Formula::Kind::kOr:
      return std::any_of(f.children().begin(), f.children().end(),
                         [&](const Formula& c) { return eval_formula(c, s); });
    case Formula::Kind::kForallNot:
      throw StructuralError("cannot evaluate unground formula (forall over " +
                            f.quantifier()->type + ")");
  }
  return false;
}

std::string render_formula(const Formula& f, const FluentTable& fluents) {
  auto nary = [&](std::string_view op) {
    std::string out = "(";
    out += op;
    for (const auto& c : f.children()) out += " " + render_formula(c, fluents);
    return out + ")";
  };
  switch (f.kind()) {
    case Formula::Kind::kTrue:
      return "true";
    case Formula::Kind::kAtom:
      return fluents.name(f.fluent());
    case Formula::Kind::kNot:
      return "(not " + render_formula(f.children().front(), fluents) + ")";
    case Formula::Kind::kAnd:
      return nary("and");
    case Formula::Kind::kOr:
      return nary("or");
    case Formula::Kind::kForallNot: {
      const auto* q = f.quantifier();
      std::string atom = "(" + q->predicate;
      for (const auto& arg : q->arguments) atom += " " + arg;
      atom += ")";
      return "(forall (" + q->variable + " - " + q->type + ") (not " + atom + "))";
    }
  }
  return {};
}

// Outcome / actions

Outcome::Outcome(State adds, State deletes) : adds_(std::move(adds)), deletes_(std::move(deletes)) {
  if (!adds_.disjoint(deletes_)) throw StructuralError("outcome adds and deletes the same fluent");
}

std::vector<Literal> Outcome::literals() const {
  std::vector<Literal> out;
  for (FluentId id : adds_.ids()) out.push_back({id, true});
  for (FluentId id : deletes_.ids()) out.push_back({id, false});
  return out;
}

State apply_outcome(const State& s, const Outcome& o) { return s.with(o.adds(), o.deletes()); }

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::kDialogue:
      return "dialogue";
    case ActionKind::kService:
      return "service";
    case ActionKind::kSystem:
      return "system";
  }
  return "dialogue";
}

ActionKind action_kind_from_string(std::string_view name) {
  if (name == "dialogue") return ActionKind::kDialogue;
  if (name == "service") return ActionKind::kService;
  if (name == "system") return ActionKind::kSystem;
  throw StructuralError("unknown action kind '" + std::string(name) + "'");
}

bool applicable(const NDAction& a, const State& s) { return eval_formula(a.precondition, s); }

std::optional<std::size_t> FondProblem::find_action(std::string_view name) const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].name == name) return i;
  }
  return std::nullopt;
}

void FondProblem::check() const {
  const auto limit = static_cast<FluentId>(fluents.size());
  auto check_state = [&](const State& s, const std::string& where) {
    for (FluentId id : s.ids()) {
      if (id >= limit) throw StructuralError("undeclared fluent id in " + where);
    }
  };
  auto check_formula = [&](const Formula& f, const std::string& where) {
    std::vector<FluentId> ids;
    f.collect_fluents(ids);
    for (FluentId id : ids) {
      if (id >= limit) throw StructuralError("undeclared fluent id in " + where);
    }
  };
  check_state(init, "initial state");
  check_formula(goal, "goal");
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& a : actions) {
    if (a.name == kDoneAction) throw StructuralError("action name 'Done' is reserved");
    if (!seen.emplace(a.name, 0).second) throw StructuralError("duplicate action '" + a.name + "'");
    if (a.outcomes.empty()) throw StructuralError("action '" + a.name + "' has no outcomes");
    check_formula(a.precondition, "precondition of " + a.name);
    for (const auto& o : a.outcomes) {
      check_state(o.adds(), "outcome of " + a.name);
      check_state(o.deletes(), "outcome of " + a.name);
    }
  }
}

}  // namespace dialoplan
