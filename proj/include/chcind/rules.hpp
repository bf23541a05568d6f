#ifndef CHCIND_RULES_HPP
#define CHCIND_RULES_HPP

#include "chcind/judgment.hpp"
#include "chcind/smt.hpp"

namespace chcind {

// Counters shared along one goal derivation. Induction identifiers and fresh
// variables are minted deterministically so replays regenerate the same
// names.
struct DeriveContext {
  FreshSource vars{"g"};
  int alphas = 0;
  Ident fresh_alpha() { return intern("@a" + std::to_string(alphas++)); }
};

// A candidate substitution for Apply-bottom / Apply-P / Fold: sigma plus the
// judgment atom position matched by each premise.
struct Instantiation {
  Substitution subst;
  std::vector<int> matched;
  std::string key;  // (source, sigma) memo key
};

// Definite clause recast in entry form for the shared matching machinery:
// premises = body atoms (normalized), conclusion = head.
GammaEntry fold_template(const HCCS& defs, int clause_index);

// Enumerates candidate substitutions per the assignment search: premise
// atoms matched syntactically against judgment atoms (the pivot only against
// atoms marked with the entry's identifier), completed on conclusion-only
// variables, then filtered by the SMT side conditions: consistency of the
// instantiated premise with the knowledge for bottom-concluding sources, and
// phi => exists x.(sigma phi') for atom-concluding ones. Already applied
// (source, sigma) pairs are excluded.
std::vector<Instantiation> find_instantiations(const Judgment& j,
                                               const GammaEntry& source,
                                               SmtSession& smt);

/* Rule operations. Each returns the transformed judgment(s) or nullopt when
   the rule's side conditions fail; they re-verify those conditions even for
   instantiations coming from find_instantiations, so certificate replay can
   call them directly. */

std::optional<Judgment> apply_induct(const Judgment& j, int occ,
                                     DeriveContext& ctx, Ident* alpha_out);

std::vector<Judgment> apply_unfold(const Judgment& j, int occ,
                                   DeriveContext& ctx);

std::optional<Judgment> apply_bot(const Judgment& j, int entry_index,
                                  const Instantiation& inst, SmtSession& smt);

std::optional<Judgment> apply_p(const Judgment& j, int entry_index,
                                const Instantiation& inst, bool replace,
                                SmtSession& smt);

std::optional<Judgment> apply_fold(const Judgment& j, int clause_index,
                                   const Instantiation& inst, SmtSession& smt);

bool check_valid_bot(const Judgment& j, SmtSession& smt);
bool check_valid_p(const Judgment& j, SmtSession& smt);

// Rebuilds sigma and its memo key for a recorded premise->atom matching;
// shared by the strategy and certificate replay. Returns nullopt when the
// shapes do not line up or a conclusion variable cannot be completed.
std::optional<Instantiation> instantiation_from_matches(
    const Judgment& j, const GammaEntry& source, const std::vector<int>& matched);

}  // namespace chcind

#endif
