#pragma once

// Deterministic pattern-based stand-in for intent classification and entity
// extraction.

#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include "dialoplan/context.hpp"

namespace dialoplan {

struct Classification {
  std::optional<std::string> intent;
  /// entity name (e.g. `@place`) -> value, in extractor order
  std::vector<std::pair<std::string, Value>> assignments;

  const Value* entity(const std::string& name) const;
};

class Nlu {
 public:
  /// Patterns are case-insensitive ECMAScript regexes searched anywhere in the
  /// utterance. Higher priority wins; ties go to the earlier rule.
  Nlu& add_intent(const std::string& intent, const std::vector<std::string>& patterns, int priority = 0);
  /// Canonical names matched case-insensitively on word boundaries; the
  /// first one found (by position) is assigned.
  Nlu& add_gazetteer(const std::string& entity, const std::vector<std::string>& names);
  /// Digits or number words (zero to twenty) as a number.
  Nlu& add_number(const std::string& entity);
  /// First match of `pattern` (group 1 if present, else the whole match) as a string.
  Nlu& add_pattern(const std::string& entity, const std::string& pattern);

  Classification classify(const std::string& utterance) const;
  std::vector<std::string> intents() const;

 private:
  struct IntentRule {
    std::string intent;
    std::vector<std::regex> patterns;
    int priority;
  };
  struct Extractor {
    enum class Kind { kGazetteer, kNumber, kPattern } kind;
    std::string entity;
    std::vector<std::pair<std::string, std::regex>> names;
    std::regex pattern;
  };

  std::vector<IntentRule> intents_;
  std::vector<Extractor> extractors_;
};

}  // namespace dialoplan
