#ifndef CHCIND_PROBLEM_HPP
#define CHCIND_PROBLEM_HPP

#include "chcind/hccs.hpp"
#include "chcind/sexpr.hpp"

namespace chcind {

struct ProblemFile {
  HCCS hccs;
  std::vector<GammaEntry> lemmas;              // all with guard •
  std::map<std::string, std::string> options;  // embedded directives
};

// Accepts the native s-expression format or the SMT-LIB2 HORN shape
// (detected by a leading set-logic form). Lemmas and options are native-only.
ProblemFile parse_problem(const std::string& text);

// parse_problem(print_problem(p)) equals p up to variable renaming.
std::string print_problem(const ProblemFile& p);

bool equal_upto_renaming(const ProblemFile& a, const ProblemFile& b);

// Shared helpers between the problem parser and the certificate reader.
Term parse_term(const SExpr& e, const std::set<Ident>& scope);
Formula parse_formula(const SExpr& e, const std::set<Ident>& scope,
                      const std::map<Ident, int>& preds);

// Permissive variants for trusted internal text (certificates, models):
// no scope tracking, reserved names allowed, quantifiers accepted.
Term parse_term_any(const SExpr& e);
Formula parse_formula_any(const SExpr& e);

}  // namespace chcind

#endif
