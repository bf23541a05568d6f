#ifndef CHCIND_SOLVE_HPP
#define CHCIND_SOLVE_HPP

#include "chcind/certificate.hpp"
#include "chcind/oracle.hpp"

#include <chrono>

namespace chcind {

struct SolverOptions {
  SearchLimits limits;
  bool apply_p_replace = false;
  bool unfold_without_induct = false;
  int max_lemma_depth = 2;   // chain length cap for ApplyP/Fold-added atoms
  int validation_depth = 64;
  int jobs = 1;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Merges embedded (option k v) directives from a problem file into the run
// configuration. Command-line settings win where both are given.
void apply_file_options(const std::map<std::string, std::string>& options,
                        SolverOptions& opts, SmtConfig& smt);

struct GoalOutcome {
  enum Kind { Proved, Refuted, Unknown } kind = Unknown;
  std::optional<ProofNode> tree;      // Proved: pruned, without snapshots yet
  std::optional<Counterexample> cex;  // Refuted: validated model
  std::string reason;                 // Unknown
  long rule_applications = 0;
};

GoalOutcome solve_goal(const HCCS& defs, const std::vector<GammaEntry>& gamma0,
                       const HornClause& goal, int goal_index,
                       const SolverOptions& opts, SmtSession& smt);

// Checks D; prior; A; phi |- h for a user lemma. Fold is enabled, restricted
// to clauses whose head predicate matches an atom conclusion; it stays off
// for bottom conclusions.
GoalOutcome check_lemma(const HCCS& defs, const GammaEntry& lemma,
                        const std::vector<GammaEntry>& prior,
                        const SolverOptions& opts, SmtSession& smt);

enum class Verdict { Solvable, Unsolvable, Unknown, LemmaRejected };

struct SolveReport {
  Verdict verdict = Verdict::Unknown;
  std::vector<GoalOutcome> lemma_results;
  std::vector<GoalOutcome> goal_results;
  std::optional<Certificate> certificate;       // Solvable
  std::optional<Counterexample> counterexample; // Unsolvable
  std::string detail;
};

// Checks user lemmas first (aborting with LemmaRejected when one fails),
// then decides every goal clause with the verified lemmas as the initial
// gamma. Solvable iff all goals proved; Unsolvable iff some goal is refuted
// with a validated counterexample.
SolveReport solve_hccs(const ProblemFile& problem, const SolverOptions& opts,
                       SmtSession& smt);

// Convenience wrapper owning the solver sessions; honors opts.jobs.
SolveReport solve_hccs(const ProblemFile& problem, const SolverOptions& opts,
                       const SmtConfig& smt_config);

}  // namespace chcind

#endif
