#ifndef CHCIND_JUDGMENT_HPP
#define CHCIND_JUDGMENT_HPP

#include "chcind/hccs.hpp"

namespace chcind {

// P^{M,alpha}(t): marks M name the inductions whose hypotheses may be
// applied to this occurrence; inducted is the induction performed on it
// (nullopt until Induct). The unfolded flag records that Unfold has case-
// analyzed this occurrence; refutation detection requires it on every atom.
struct AnnotatedAtom {
  Atom atom;
  std::set<Ident> marks;
  std::optional<Ident> inducted;
  bool unfolded = false;
  int seq = 0;          // creation order, drives the breadth-first selection
  int lemma_depth = 0;  // 0 for atoms from the goal or Unfold
};

struct SearchLimits {
  int max_inductions = 4;
  int max_unfolds_per_branch = 8;
  long max_rule_applications = 10000;
};

// Proof state D; Gamma; A; phi |- h. Children copy their parent and extend
// it; terms are shared, so copies stay cheap.
struct Judgment {
  const HCCS* defs = nullptr;
  std::vector<GammaEntry> gamma;  // verified lemmas first, then hypotheses
  std::vector<AnnotatedAtom> atoms;
  std::vector<Formula> knowledge;    // conjuncts
  std::optional<Atom> target;        // nullopt = bottom
  std::vector<Ident> cex_vars;       // goal-clause variables, for models
  std::set<std::string> applied;     // (source, sigma) memo keys
  std::set<std::string> atom_seen;   // atom keys ever present
  std::set<std::string> know_keys;   // dedup keys of knowledge conjuncts
  int next_seq = 0;

  Formula knowledge_conj() const { return conjoin(knowledge); }

  std::vector<MarkedAtom> marked_view() const {
    std::vector<MarkedAtom> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) out.push_back(MarkedAtom{a.atom, &a.marks});
    return out;
  }

  bool has_atom(const Atom& a) const { return atom_seen.count(atom_key(a)); }

  void push_atom(Atom a, std::set<Ident> marks, int lemma_depth) {
    AnnotatedAtom aa;
    aa.atom = std::move(a);
    aa.marks = std::move(marks);
    aa.seq = next_seq++;
    aa.lemma_depth = lemma_depth;
    atom_seen.insert(atom_key(aa.atom));
    atoms.push_back(std::move(aa));
  }

  // Appends a conjunct unless one with the same dedup key is present.
  bool add_knowledge(const Formula& f) {
    std::string key = dedup_key(f);
    if (!know_keys.insert(key).second) return false;
    knowledge.push_back(f);
    return true;
  }
};

}  // namespace chcind

#endif
