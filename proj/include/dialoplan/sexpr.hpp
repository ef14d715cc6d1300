#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dialoplan::sexpr {

/// One s-expression: an atom (symbol) or a parenthesised list. Symbols are
/// lower-cased on read; `;` starts a comment running to end of line.
struct Node {
  bool is_list = false;
  std::string symbol;
  std::vector<Node> items;
  std::size_t line = 0;
  std::size_t column = 0;

  bool is_symbol() const { return !is_list; }
  bool is_symbol(std::string_view s) const { return !is_list && symbol == s; }
  /// True for a list whose first item is the given keyword symbol.
  bool headed_by(std::string_view keyword) const {
    return is_list && !items.empty() && items.front().is_symbol(keyword);
  }
};

/// Reads every top-level expression. Throws ParseError with line/column.
std::vector<Node> read_all(std::string_view text);
/// Reads exactly one expression.
Node read_one(std::string_view text);

std::string to_string(const Node& node);

}  // namespace dialoplan::sexpr
