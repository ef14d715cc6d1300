#include "dialoplan/nlu.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace dialoplan {

namespace {

constexpr auto kFlags = std::regex::ECMAScript | std::regex::icase;

constexpr std::array<const char*, 21> kNumberWords = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};

std::string escape(const std::string& s) {
  static const std::string special = R"(\^$.|?*+()[]{})";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string::npos) out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

const Value* Classification::entity(const std::string& name) const {
  for (const auto& [k, v] : assignments)
    if (k == name) return &v;
  return nullptr;
}

Nlu& Nlu::add_intent(const std::string& intent, const std::vector<std::string>& patterns, int priority) {
  IntentRule rule{intent, {}, priority};
  for (const auto& p : patterns) rule.patterns.emplace_back(p, kFlags);
  intents_.push_back(std::move(rule));
  // stable: equal priorities keep insertion order
  std::stable_sort(intents_.begin(), intents_.end(),
                   [](const IntentRule& a, const IntentRule& b) { return a.priority > b.priority; });
  return *this;
}

Nlu& Nlu::add_gazetteer(const std::string& entity, const std::vector<std::string>& names) {
  Extractor ex{Extractor::Kind::kGazetteer, entity, {}, {}};
  for (const auto& n : names) ex.names.emplace_back(n, std::regex("\\b" + escape(n) + "\\b", kFlags));
  extractors_.push_back(std::move(ex));
  return *this;
}

Nlu& Nlu::add_number(const std::string& entity) {
  std::string alt = "\\d+";
  for (const char* w : kNumberWords) alt += std::string("|") + w;
  extractors_.push_back({Extractor::Kind::kNumber, entity, {}, std::regex("\\b(" + alt + ")\\b", kFlags)});
  return *this;
}

Nlu& Nlu::add_pattern(const std::string& entity, const std::string& pattern) {
  extractors_.push_back({Extractor::Kind::kPattern, entity, {}, std::regex(pattern, kFlags)});
  return *this;
}

Classification Nlu::classify(const std::string& utterance) const {
  Classification out;
  for (const auto& rule : intents_) {
    const bool hit = std::any_of(rule.patterns.begin(), rule.patterns.end(),
                                 [&](const std::regex& re) { return std::regex_search(utterance, re); });
    if (hit) {
      out.intent = rule.intent;
      break;
    }
  }

  for (const auto& ex : extractors_) {
    std::smatch m;
    switch (ex.kind) {
      case Extractor::Kind::kGazetteer: {
        std::optional<std::pair<long, std::string>> best;
        for (const auto& [name, re] : ex.names)
          if (std::regex_search(utterance, m, re) && (!best || m.position(0) < best->first))
            best = std::pair{static_cast<long>(m.position(0)), name};
        if (best) out.assignments.emplace_back(ex.entity, best->second);
        break;
      }
      case Extractor::Kind::kNumber:
        if (std::regex_search(utterance, m, ex.pattern)) {
          std::string tok = m.str(1);
          std::transform(tok.begin(), tok.end(), tok.begin(), [](unsigned char c) { return std::tolower(c); });
          double value = 0;
          if (std::isdigit(static_cast<unsigned char>(tok[0]))) {
            value = std::stod(tok);
          } else {
            for (std::size_t i = 0; i < kNumberWords.size(); ++i)
              if (tok == kNumberWords[i]) value = static_cast<double>(i);
          }
          out.assignments.emplace_back(ex.entity, value);
        }
        break;
      case Extractor::Kind::kPattern:
        if (std::regex_search(utterance, m, ex.pattern))
          out.assignments.emplace_back(ex.entity, m.size() > 1 && m[1].matched ? m.str(1) : m.str(0));
        break;
    }
  }
  return out;
}

std::vector<std::string> Nlu::intents() const {
  std::vector<std::string> out;
  for (const auto& r : intents_) out.push_back(r.intent);
  return out;
}

}  // namespace dialoplan
