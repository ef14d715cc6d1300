#include "dialoplan/context.hpp"

#include <cmath>
#include <sstream>

#include "dialoplan/error.hpp"

namespace dialoplan {

nlohmann::json value_to_json(const Value& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

Value value_from_json(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_array()) {
    std::vector<std::string> out;
    for (const auto& item : j) {
      if (!item.is_string()) throw ConfigError("list values must hold strings only");
      out.push_back(item.get<std::string>());
    }
    return out;
  }
  throw ConfigError("unsupported context value " + j.dump());
}

std::string value_to_string(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* d = std::get_if<double>(&v)) {
    if (std::floor(*d) == *d && std::abs(*d) < 1e15) return std::to_string(static_cast<long long>(*d));
    std::ostringstream os;
    os << *d;
    return os.str();
  }
  std::string out;
  for (const auto& s : std::get<std::vector<std::string>>(v)) out += (out.empty() ? "" : ", ") + s;
  return out;
}

void Context::set(const std::string& variable, Value value) {
  if (!declared(variable)) throw ConfigError("undeclared context variable '" + variable + "'");
  values_[variable] = std::move(value);
}

const Value* Context::get(const std::string& variable) const {
  auto it = values_.find(variable);
  return it == values_.end() ? nullptr : &it->second;
}

nlohmann::json Context::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, v] : values_) out[k] = value_to_json(v);
  return out;
}

namespace rules {

FluentRule present(const std::string& variable) {
  return {"present(" + variable + ")", [variable](const Context& c) { return c.has(variable); }};
}

FluentRule equals(const std::string& variable, Value value) {
  std::string desc = variable + " == " + value_to_json(value).dump();
  return {desc, [variable, value = std::move(value)](const Context& c) {
            const Value* v = c.get(variable);
            return v && *v == value;
          }};
}

FluentRule is_true(const std::string& variable) {
  return {variable + " == true", [variable](const Context& c) {
            const Value* v = c.get(variable);
            return v && std::holds_alternative<bool>(*v) && std::get<bool>(*v);
          }};
}

FluentRule mirror(const std::string& fluent) { return is_true(fluent); }

}  // namespace rules

void check_rules(const RuleSet& rules, const FluentTable& fluents) {
  std::string missing;
  for (const auto& name : fluents.names())
    if (!rules.count(name)) missing += (missing.empty() ? "" : ", ") + name;
  if (!missing.empty()) throw ConfigError("no evaluation rule for fluent(s): " + missing);
}

State evaluate_state(const RuleSet& rules, const Context& ctx, const FluentTable& fluents) {
  State s;
  for (FluentId id = 0; id < fluents.size(); ++id) {
    auto it = rules.find(fluents.name(id));
    if (it != rules.end() && it->second.test(ctx)) s.insert(id);
  }
  return s;
}

}  // namespace dialoplan
