#ifndef CHCIND_HCCS_HPP
#define CHCIND_HCCS_HPP

#include "chcind/ast.hpp"

#include <optional>

namespace chcind {

struct HccsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// head == nullopt means the clause head is bottom (a goal clause).
struct HornClause {
  std::optional<Atom> head;
  std::vector<Atom> body_atoms;
  Formula body_formula;
  std::set<Ident> vars;  // the clause's universally quantified scope

  bool is_definite() const { return head.has_value(); }
};

struct HCCS {
  std::map<Ident, int> predicates;  // symbol -> arity
  std::vector<HornClause> definite;
  std::vector<HornClause> goals;

  int arity_of(Ident p) const;
  bool declared(Ident p) const { return predicates.count(p) != 0; }
};

// Splits clauses into definite/goal, checks declarations and arities, and
// freshens each clause's variables so the per-clause scopes are pairwise
// disjoint. Freshening is deterministic in the input order.
HCCS normalize_hccs(const std::vector<HornClause>& raw,
                    const std::map<Ident, int>& decls);

// One branch per defining clause of a predicate:
//   H(P) = lambda params. \/_i exists ys_i. (formula_i /\ atoms_i)
// Head equalities params = args are solved into the branch by substitution
// where an argument is a variable not used earlier, and kept as explicit
// equality conjuncts otherwise.
struct DefinitionBranch {
  std::vector<Ident> exists;
  Formula formula;
  std::vector<Atom> atoms;
};

struct DefinitionDisjunction {
  Ident predicate;
  std::vector<Ident> params;
  std::vector<DefinitionBranch> branches;
};

DefinitionDisjunction build_definition(const HCCS& hccs, Ident p);

// Re-expands a definition into one clause per branch (test oracle for the
// round-trip property; also used nowhere else in the solve path).
std::vector<HornClause> expand_definition(const DefinitionDisjunction& d);

/* -------------------------------------------------------------------- */
/* Gamma entries: user lemmas and induction hypotheses                   */
/* -------------------------------------------------------------------- */

// Premise atoms are kept normalized: every argument is a variable and no
// variable occurs twice as an argument across the premise list; displaced
// argument terms live on as equality conjuncts inside premise_formula.
// pivot == -1 marks a user lemma (guard •); otherwise the guard is
// alpha |> premises[pivot].
struct GammaEntry {
  int uid = -1;                   // stable handle for memoization
  std::optional<Ident> alpha;     // induction identifier, engaged iff pivot >= 0
  int pivot = -1;
  std::vector<Atom> premises;
  Formula premise_formula;
  std::optional<Atom> conclusion;  // nullopt = bottom

  bool is_lemma() const { return pivot < 0; }
};

// Rewrites premise atoms to the distinct-variable form, pushing residual
// equalities u = t into the formula. Idempotent.
void normalize_entry_premises(GammaEntry& e, FreshSource& fresh);

/* -------------------------------------------------------------------- */
/* IN / SUB encodings                                                    */
/* -------------------------------------------------------------------- */

// Atom list element as seen by the encodings: an atom plus its mark set.
struct MarkedAtom {
  Atom atom;
  const std::set<Ident>* marks = nullptr;  // may be null (no marks)
};

// |P(t) in A| = \/ over same-predicate atoms of componentwise equality.
Formula in_encoding(const Atom& target, const std::vector<MarkedAtom>& a);
// |alpha |> P(t) in A|: the disjunction ranges only over atoms marked alpha.
Formula in_encoding_marked(const Atom& target, Ident alpha,
                           const std::vector<MarkedAtom>& a);
// |bullet in A| is true by definition.
Formula in_encoding_bullet();
// |A1 subseteq A2| = /\ in_encoding.
Formula sub_encoding(const std::vector<Atom>& a1,
                     const std::vector<MarkedAtom>& a2);

// Fast path used by rule checks: true when some disjunct consists solely of
// syntactically reflexive equalities (so the encoding is trivially valid).
bool encoding_trivially_valid(const Formula& f);

}  // namespace chcind

#endif
