#ifndef CHCIND_CERTIFICATE_HPP
#define CHCIND_CERTIFICATE_HPP

#include "chcind/problem.hpp"
#include "chcind/rules.hpp"

namespace chcind {

enum class Rule { Induct, Unfold, ApplyBot, ApplyP, Fold, ValidBot, ValidP };

const char* rule_name(Rule r);

// Malformed input or version mismatch; distinct from a Rejected replay.
struct CertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural image of the judgment at a node. Derived deterministically, so
// replay compares it for exact equality with its own reconstruction.
struct Snapshot {
  struct SAtom {
    Atom atom;
    std::set<Ident> marks;
    std::optional<Ident> inducted;
    bool unfolded = false;
  };
  std::vector<SAtom> atoms;
  std::vector<Formula> knowledge;
  std::optional<Atom> target;
};

Snapshot snapshot_of(const Judgment& j);
bool equal(const Snapshot& a, const Snapshot& b);

// One derivation node. During search only the payload fields are filled
// (entry_uid identifies gamma entries); deriving the certificate resolves
// entries to gamma indices, records the substitution, and attaches
// snapshots.
struct ProofNode {
  Rule rule{};
  int occ = -1;               // Induct / Unfold: atom position
  int entry = -1;             // ApplyBot / ApplyP: gamma index
  int clause = -1;            // Fold: definite clause index
  int entry_uid = -1;         // search-time handle; not serialized
  std::vector<int> matched;   // premise -> atom position
  Substitution subst;
  bool replace = false;
  std::optional<Snapshot> state;
  std::vector<ProofNode> children;
};

struct Certificate {
  int version = 1;
  std::vector<std::pair<int, ProofNode>> lemma_proofs;
  std::vector<std::pair<int, ProofNode>> goal_proofs;
};

// Removes Induct nodes whose hypothesis is never applied in their subtree.
// The result derives the same judgments minus the unused entries.
void prune_unused_inductions(ProofNode& tree);

// Recomputes every judgment of the (possibly pruned) tree from the root via
// the rule operations, resolving entry uids, recording substitutions and
// snapshots. Throws CertificateError if the tree does not re-derive, which
// indicates a solver bug.
void derive_snapshots(ProofNode& tree, const Judgment& root, SmtSession& smt);

std::string serialize(const Certificate& cert);
Certificate parse_certificate(const std::string& text);

struct ReplayResult {
  bool verified = false;
  std::string reason;  // empty when verified
  std::string path;    // node path like "goal 0 / unfold.1 / apply-bot"
};

// Independent re-check: rebuilds each node's judgment from the recorded
// payloads with the rule operations, requires structural agreement with the
// stored snapshots, re-verifies every SMT side condition, and checks the
// roots against the problem's lemmas and goals.
ReplayResult replay(const Certificate& cert, const ProblemFile& problem,
                    SmtSession& smt);

// Initial judgments of the Theorem-2 reduction and of lemma checking.
Judgment initial_goal_judgment(const HCCS& defs,
                               const std::vector<GammaEntry>& gamma0,
                               const HornClause& goal);
Judgment initial_lemma_judgment(const HCCS& defs,
                                const std::vector<GammaEntry>& prior,
                                const GammaEntry& lemma);

}  // namespace chcind

#endif
