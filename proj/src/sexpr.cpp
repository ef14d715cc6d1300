#include "dialoplan/sexpr.hpp"

#include <cctype>

#include "dialoplan/error.hpp"

namespace dialoplan::sexpr {
namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  Node read() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_, column_);
    const char c = text_[pos_];
    if (c == ')') throw ParseError("unbalanced ')'", line_, column_);
    Node node;
    node.line = line_;
    node.column = column_;
    if (c == '(') {
      node.is_list = true;
      advance();
      while (true) {
        skip_space();
        if (pos_ >= text_.size()) {
          throw ParseError("missing ')' for list opened here", node.line, node.column);
        }
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        node.items.push_back(read());
      }
      return node;
    }
    while (pos_ < text_.size()) {
      const char ch = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(ch)) || ch == '(' || ch == ')' || ch == ';') break;
      node.symbol.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      advance();
    }
    return node;
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

}  // namespace

std::vector<Node> read_all(std::string_view text) {
  Reader reader(text);
  std::vector<Node> out;
  while (!reader.at_end()) out.push_back(reader.read());
  return out;
}

Node read_one(std::string_view text) {
  auto nodes = read_all(text);
  if (nodes.size() != 1) {
    throw ParseError("expected exactly one expression, found " + std::to_string(nodes.size()));
  }
  return std::move(nodes.front());
}

std::string to_string(const Node& node) {
  if (!node.is_list) return node.symbol;
  std::string out = "(";
  for (std::size_t i = 0; i < node.items.size(); ++i) {
    if (i > 0) out += " ";
    out += to_string(node.items[i]);
  }
  return out + ")";
}

}  // namespace dialoplan::sexpr
