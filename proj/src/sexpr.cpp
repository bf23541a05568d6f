#include "chcind/sexpr.hpp"

#include <sstream>

namespace chcind {

namespace {

struct Lexer {
  const std::string& text;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& t) : text(t) {}

  int peek() const { return pos < text.size() ? (unsigned char)text[pos] : -1; }

  void advance() {
    if (pos >= text.size()) return;
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_ws() {
    for (;;) {
      int c = peek();
      if (c == ';') {
        while (peek() != -1 && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        return;
      }
    }
  }
};

bool is_delim(int c) {
  return c == -1 || c == '(' || c == ')' || c == ';' || c == ' ' ||
         c == '\t' || c == '\r' || c == '\n';
}

SExpr parse_one(Lexer& lx);

SExpr parse_list(Lexer& lx) {
  SExpr e;
  e.line = lx.line;
  e.col = lx.col;
  lx.advance();  // '('
  for (;;) {
    lx.skip_ws();
    int c = lx.peek();
    if (c == -1) throw ParseError("unbalanced parenthesis", e.line, e.col);
    if (c == ')') {
      lx.advance();
      return e;
    }
    e.list.push_back(parse_one(lx));
  }
}

SExpr parse_one(Lexer& lx) {
  lx.skip_ws();
  int c = lx.peek();
  if (c == -1) throw ParseError("unexpected end of input", lx.line, lx.col);
  if (c == '(') return parse_list(lx);
  if (c == ')') throw ParseError("unexpected ')'", lx.line, lx.col);
  SExpr e;
  e.is_atom = true;
  e.line = lx.line;
  e.col = lx.col;
  while (!is_delim(lx.peek())) {
    e.atom.push_back((char)lx.peek());
    lx.advance();
  }
  return e;
}

}  // namespace

std::vector<SExpr> parse_sexprs(const std::string& text) {
  Lexer lx(text);
  std::vector<SExpr> out;
  for (;;) {
    lx.skip_ws();
    if (lx.peek() == -1) return out;
    out.push_back(parse_one(lx));
  }
}

std::string to_string(const SExpr& e) {
  if (e.is_atom) return e.atom;
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < e.list.size(); ++i) {
    if (i) os << ' ';
    os << to_string(e.list[i]);
  }
  os << ')';
  return os.str();
}

}  // namespace chcind
