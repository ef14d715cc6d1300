#pragma once

// Propositional FOND model: fluents, states, formulas, non-deterministic
// actions and problems. Everything here is an immutable value type once built.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dialoplan {

using FluentId = std::uint32_t;

/// Bidirectional fluent name <-> id mapping. Ids are dense and assigned in
/// insertion order.
class FluentTable {
 public:
  FluentId intern(std::string_view name);
  /// Throws StructuralError on duplicates or names outside `[a-z][a-z0-9-]*`.
  FluentId declare(std::string_view name);
  std::optional<FluentId> find(std::string_view name) const;
  /// Throws StructuralError if the name is not declared.
  FluentId at(std::string_view name) const;
  const std::string& name(FluentId id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  static bool valid_name(std::string_view name);

  friend bool operator==(const FluentTable& a, const FluentTable& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, FluentId> index_;
};

/// Set of true fluents under the closed-world assumption. Stored as a bitset
/// with trailing zero words trimmed, so equality and hashing are canonical
/// regardless of how large the set has ever grown.
class State {
 public:
  State() = default;
  State(std::initializer_list<FluentId> ids);
  static State from_ids(const std::vector<FluentId>& ids);

  bool contains(FluentId id) const;
  void insert(FluentId id);
  void erase(FluentId id);
  bool empty() const { return words_.empty(); }
  std::size_t count() const;
  std::vector<FluentId> ids() const;

  /// this ∩ other = ∅
  bool disjoint(const State& other) const;
  /// (this \ deletes) ∪ adds
  State with(const State& adds, const State& deletes) const;
  bool subset_of(const State& other) const;

  std::size_t hash() const;

  friend bool operator==(const State&, const State&) = default;
  friend std::strong_ordering operator<=>(const State& a, const State& b);

 private:
  void trim();

  std::vector<std::uint64_t> words_;
};

struct StateHash {
  std::size_t operator()(const State& s) const { return s.hash(); }
};

struct Literal {
  FluentId fluent = 0;
  bool positive = true;

  friend bool operator==(const Literal&, const Literal&) = default;
};

/// Boolean formula over fluents. `kForallNot` is the lifted universally
/// quantified negated atom; it survives only in unground formulas and makes
/// evaluation fail.
class Formula {
 public:
  enum class Kind { kTrue, kAtom, kNot, kAnd, kOr, kForallNot };

  struct Quantifier {
    std::string variable;
    std::string type;
    std::string predicate;
    std::vector<std::string> arguments;

    friend bool operator==(const Quantifier&, const Quantifier&) = default;
  };

  Formula() = default;

  static Formula truth() { return Formula(); }
  static Formula atom(FluentId fluent);
  static Formula literal(Literal lit);
  static Formula negation(Formula child);
  static Formula conjunction(std::vector<Formula> children);
  static Formula disjunction(std::vector<Formula> children);
  static Formula forall_not(Quantifier quantifier);
  static Formula of_literals(const std::vector<Literal>& literals);

  Kind kind() const { return kind_; }
  FluentId fluent() const { return fluent_; }
  const std::vector<Formula>& children() const { return children_; }
  const Quantifier* quantifier() const { return quantifier_.get(); }

  bool ground() const;
  /// Literals of a formula shaped as a (possibly singleton or empty)
  /// conjunction of literals; nullopt for any other shape.
  std::optional<std::vector<Literal>> conjunct_literals() const;
  /// Every fluent mentioned anywhere in the formula.
  void collect_fluents(std::vector<FluentId>& out) const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  Kind kind_ = Kind::kTrue;
  FluentId fluent_ = 0;
  std::vector<Formula> children_;
  std::shared_ptr<const Quantifier> quantifier_;
};

/// Closed-world evaluation. Throws StructuralError for unground formulas.
bool eval_formula(const Formula& f, const State& s);

/// `(and ...)`, `(or ...)`, `(not ...)`, bare fluent names, `true`.
std::string render_formula(const Formula& f, const FluentTable& fluents);

class Outcome {
 public:
  Outcome() = default;
  /// Throws StructuralError when adds and deletes overlap.
  Outcome(State adds, State deletes);

  const State& adds() const { return adds_; }
  const State& deletes() const { return deletes_; }
  bool empty() const { return adds_.empty() && deletes_.empty(); }
  std::vector<Literal> literals() const;

  friend bool operator==(const Outcome&, const Outcome&) = default;

 private:
  State adds_;
  State deletes_;
};

State apply_outcome(const State& s, const Outcome& o);

enum class ActionKind { kDialogue, kService, kSystem };

std::string_view to_string(ActionKind kind);
/// Throws StructuralError on unknown names.
ActionKind action_kind_from_string(std::string_view name);

struct NDAction {
  std::string name;
  ActionKind kind = ActionKind::kDialogue;
  Formula precondition;
  std::vector<Outcome> outcomes;

  bool deterministic() const { return outcomes.size() == 1; }
};

bool applicable(const NDAction& a, const State& s);

inline constexpr std::string_view kDoneAction = "Done";

struct FondProblem {
  FluentTable fluents;
  State init;
  std::vector<NDAction> actions;
  Formula goal;

  /// Index of the named action, if any.
  std::optional<std::size_t> find_action(std::string_view name) const;
  /// Checks declared-fluent references and unique action names. Throws
  /// StructuralError naming the offending item.
  void check() const;
};

}  // namespace dialoplan
