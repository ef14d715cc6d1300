#pragma once

// Execution context: a partial assignment to declared dialogue variables, and
// the rules that read planning fluents off it.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dialoplan/model.hpp"

namespace dialoplan {

using Value = std::variant<std::string, double, bool, std::vector<std::string>>;

nlohmann::json value_to_json(const Value& v);
/// Strings, numbers, booleans and string arrays; anything else throws ConfigError.
Value value_from_json(const nlohmann::json& j);
std::string value_to_string(const Value& v);

class Context {
 public:
  Context() = default;
  explicit Context(std::set<std::string> declared) : declared_(std::move(declared)) {}

  void declare(const std::string& variable) { declared_.insert(variable); }
  bool declared(const std::string& variable) const { return declared_.count(variable) > 0; }
  const std::set<std::string>& variables() const { return declared_; }

  /// Overwrites any previous value. Throws ConfigError for undeclared names.
  void set(const std::string& variable, Value value);
  void erase(const std::string& variable) { values_.erase(variable); }
  bool has(const std::string& variable) const { return values_.count(variable) > 0; }
  const Value* get(const std::string& variable) const;
  const std::map<std::string, Value>& values() const { return values_; }

  nlohmann::json to_json() const;

  friend bool operator==(const Context&, const Context&) = default;

 private:
  std::set<std::string> declared_;
  std::map<std::string, Value> values_;
};

/// Predicate over a context. Must be total: absent variables are simply false
/// (or whatever the rule says), never an error.
struct FluentRule {
  std::string description;
  std::function<bool(const Context&)> test;
};

namespace rules {
/// Variable has any value.
FluentRule present(const std::string& variable);
/// Variable is bound to exactly `value`.
FluentRule equals(const std::string& variable, Value value);
/// Variable is the boolean `true`.
FluentRule is_true(const std::string& variable);
/// Fluent backed by a boolean variable of the same name.
FluentRule mirror(const std::string& fluent);
}  // namespace rules

/// fluent name -> rule
using RuleSet = std::map<std::string, FluentRule>;

/// Throws ConfigError listing the fluents of `fluents` that have no rule.
void check_rules(const RuleSet& rules, const FluentTable& fluents);

/// fluent ∈ result ⟺ its rule holds on ctx. Fluents without a rule are false;
/// call check_rules first to rule that out.
State evaluate_state(const RuleSet& rules, const Context& ctx, const FluentTable& fluents);

}  // namespace dialoplan
