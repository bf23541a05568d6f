#ifndef CHCIND_EVAL_HPP
#define CHCIND_EVAL_HPP

#include "chcind/ast.hpp"

#include <stdexcept>

namespace chcind {

// Exact ground evaluation over big integers. Quantifiers and unbound
// variables are evaluation errors; callers supply complete environments.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Env = std::map<Ident, Int>;

Int eval_term(const Term& t, const Env& env);
bool eval_formula(const Formula& f, const Env& env);

// True when the formula contains a quantifier anywhere.
bool has_quantifier(const Formula& f);

}  // namespace chcind

#endif
