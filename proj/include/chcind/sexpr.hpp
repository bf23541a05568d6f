#ifndef CHCIND_SEXPR_HPP
#define CHCIND_SEXPR_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace chcind {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " at line " + std::to_string(line_) +
                           ", column " + std::to_string(col_)),
        line(line_),
        col(col_) {}
};

// Plain s-expression: either a token or a list. Positions are 1-based.
struct SExpr {
  bool is_atom = false;
  std::string atom;
  std::vector<SExpr> list;
  int line = 0, col = 0;

  bool is_list() const { return !is_atom; }
  bool is_sym(const std::string& s) const { return is_atom && atom == s; }
  size_t size() const { return list.size(); }
  const SExpr& operator[](size_t i) const { return list[i]; }
};

// Parses a whole stream of s-expressions. Comments run from ';' to end of
// line. Throws ParseError with a position on malformed input.
std::vector<SExpr> parse_sexprs(const std::string& text);

std::string to_string(const SExpr& e);

}  // namespace chcind

#endif
