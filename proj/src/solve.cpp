#include "chcind/solve.hpp"

#include <algorithm>
#include <future>
#include <sstream>

namespace chcind {

void apply_file_options(const std::map<std::string, std::string>& options,
                        SolverOptions& opts, SmtConfig& smt) {
  auto truthy = [](const std::string& v) {
    return v == "true" || v == "1" || v == "on" || v == "yes";
  };
  for (const auto& [k, v] : options) {
    if (k == "apply-p-replace") opts.apply_p_replace = truthy(v);
    else if (k == "unfold-without-induct") opts.unfold_without_induct = truthy(v);
    else if (k == "max-inductions") opts.limits.max_inductions = std::stoi(v);
    else if (k == "max-unfolds") opts.limits.max_unfolds_per_branch = std::stoi(v);
    else if (k == "max-rules") opts.limits.max_rule_applications = std::stol(v);
    else if (k == "max-lemma-depth") opts.max_lemma_depth = std::stoi(v);
    else if (k == "smt-timeout") smt.timeout_ms = std::stoi(v);
    // unknown keys are ignored so files stay forward compatible
  }
}

namespace {

struct Search {
  const SolverOptions& opts;
  SmtSession& smt;
  DeriveContext ctx;
  long rule_apps = 0;
  // Fold configuration (lemma checking only): clause indices whose head
  // predicate matches the conclusion.
  std::vector<int> fold_clauses;
  std::vector<GammaEntry> fold_templates;

  struct Result {
    GoalOutcome::Kind kind;
    std::optional<ProofNode> tree;
    std::optional<Model> model;
    std::string reason;
  };

  bool out_of_budget(std::string* why) {
    if (rule_apps > opts.limits.max_rule_applications) {
      *why = "rule application limit";
      return true;
    }
    if (opts.deadline && std::chrono::steady_clock::now() > *opts.deadline) {
      *why = "timeout";
      return true;
    }
    return false;
  }

  // Applies one saturation rule if any candidate yields something new.
  // Applications that add no knowledge still record their memo key in j.
  std::optional<ProofNode> saturation_step(Judgment& j) {
    for (int index = 0; index < (int)j.gamma.size(); ++index) {
      const GammaEntry& e = j.gamma[index];
      std::vector<Instantiation> insts = find_instantiations(j, e, smt);
      for (const auto& inst : insts) {
        if (!e.conclusion) {
          auto child = apply_bot(j, index, inst, smt);
          if (!child) continue;
          bool grew = child->knowledge.size() > j.knowledge.size();
          j = std::move(*child);
          if (!grew) continue;
          ProofNode n;
          n.rule = Rule::ApplyBot;
          n.entry_uid = e.uid;
          n.matched = inst.matched;
          return n;
        }
        Atom added = inst.subst.apply(*e.conclusion);
        if (j.has_atom(added)) continue;
        int depth = 0;
        for (int pos : inst.matched)
          depth = std::max(depth, j.atoms[pos].lemma_depth);
        if (depth + 1 > opts.max_lemma_depth) continue;
        auto child = apply_p(j, index, inst, opts.apply_p_replace, smt);
        if (!child) continue;
        j = std::move(*child);
        ProofNode n;
        n.rule = Rule::ApplyP;
        n.entry_uid = e.uid;
        n.matched = inst.matched;
        n.replace = opts.apply_p_replace;
        return n;
      }
    }
    if (j.target) {
      for (size_t fi = 0; fi < fold_clauses.size(); ++fi) {
        const GammaEntry& tmpl = fold_templates[fi];
        std::vector<Instantiation> insts = find_instantiations(j, tmpl, smt);
        for (const auto& inst : insts) {
          Atom added = inst.subst.apply(*tmpl.conclusion);
          if (j.has_atom(added)) continue;
          int depth = 0;
          for (int pos : inst.matched)
            depth = std::max(depth, j.atoms[pos].lemma_depth);
          if (depth + 1 > opts.max_lemma_depth) continue;
          auto child = apply_fold(j, fold_clauses[fi], inst, smt);
          if (!child) continue;
          j = std::move(*child);
          ProofNode n;
          n.rule = Rule::Fold;
          n.clause = fold_clauses[fi];
          n.matched = inst.matched;
          return n;
        }
      }
    }
    return std::nullopt;
  }

  // Oldest never-unfolded atom, by creation order.
  int select_expansion(const Judgment& j) const {
    int best = -1;
    for (int i = 0; i < (int)j.atoms.size(); ++i) {
      if (j.atoms[i].unfolded) continue;
      if (best < 0 || j.atoms[i].seq < j.atoms[best].seq) best = i;
    }
    return best;
  }

  Result unknown(const std::string& why) {
    return Result{GoalOutcome::Unknown, std::nullopt, std::nullopt, why};
  }

  static ProofNode wrap_chain(std::vector<ProofNode> chain, ProofNode leaf) {
    ProofNode node = std::move(leaf);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      it->children.clear();
      it->children.push_back(std::move(node));
      node = std::move(*it);
    }
    return node;
  }

  Result search(Judgment j, int unfolds, int inducts) {
    std::vector<ProofNode> chain;
    for (;;) {
      std::string why;
      if (out_of_budget(&why)) return unknown(why);

      // Close the branch when the knowledge already suffices.
      if (!j.target) {
        if (check_valid_bot(j, smt)) {
          ProofNode leaf;
          leaf.rule = Rule::ValidBot;
          return Result{GoalOutcome::Proved,
                        wrap_chain(std::move(chain), std::move(leaf)),
                        std::nullopt,
                        ""};
        }
      } else if (check_valid_p(j, smt)) {
        ProofNode leaf;
        leaf.rule = Rule::ValidP;
        return Result{GoalOutcome::Proved,
                      wrap_chain(std::move(chain), std::move(leaf)),
                      std::nullopt,
                      ""};
      }

      // Exploit gamma and the definite clauses until quiescence.
      if (auto node = saturation_step(j)) {
        ++rule_apps;
        chain.push_back(std::move(*node));
        continue;
      }

      int occ = select_expansion(j);
      if (occ < 0) {
        // Everything is unfolded: a satisfiable knowledge refutes the goal.
        if (!j.target) {
          if (auto model = detect_refutation(j, smt))
            return Result{GoalOutcome::Refuted, std::nullopt, model, ""};
          return unknown("knowledge satisfiability undetermined");
        }
        return unknown("no rule applies");
      }
      if (unfolds >= opts.limits.max_unfolds_per_branch)
        return unknown("unfold limit");

      if (!j.atoms[occ].inducted && !opts.unfold_without_induct &&
          inducts < opts.limits.max_inductions) {
        // Induction first, so the unfolding's sub-derivations come marked.
        ProofNode n;
        n.rule = Rule::Induct;
        n.occ = occ;
        Ident alpha;
        auto inducted = apply_induct(j, occ, ctx, &alpha);
        if (inducted) {
          j = std::move(*inducted);
          n.entry_uid = j.gamma.back().uid;
          chain.push_back(std::move(n));
          ++rule_apps;
          ++inducts;
        }
      }

      std::vector<Judgment> children = apply_unfold(j, occ, ctx);
      ++rule_apps;
      ProofNode un;
      un.rule = Rule::Unfold;
      un.occ = occ;
      bool all_proved = true;
      std::string first_reason;
      for (auto& child : children) {
        Result r = search(std::move(child), unfolds + 1, inducts);
        if (r.kind == GoalOutcome::Refuted) return r;
        if (r.kind == GoalOutcome::Proved) {
          un.children.push_back(std::move(*r.tree));
        } else {
          all_proved = false;
          if (first_reason.empty()) first_reason = r.reason;
        }
      }
      if (!all_proved) return unknown(first_reason);
      return Result{GoalOutcome::Proved,
                    wrap_chain(std::move(chain), std::move(un)), std::nullopt,
                    ""};
    }
  }
};

GoalOutcome run_search(const HCCS& defs, Judgment root,
                       const std::optional<Ident>& fold_pred,
                       const SolverOptions& opts, SmtSession& smt) {
  Search s{opts, smt, DeriveContext{}, 0, {}, {}};
  if (fold_pred) {
    for (int i = 0; i < (int)defs.definite.size(); ++i) {
      if (defs.definite[i].head->pred != *fold_pred) continue;
      s.fold_clauses.push_back(i);
      s.fold_templates.push_back(fold_template(defs, i));
    }
  }
  Search::Result r = s.search(std::move(root), 0, 0);
  GoalOutcome out;
  out.kind = r.kind;
  out.reason = r.reason;
  out.rule_applications = s.rule_apps;
  if (r.kind == GoalOutcome::Proved) {
    prune_unused_inductions(*r.tree);
    out.tree = std::move(r.tree);
  } else if (r.kind == GoalOutcome::Refuted) {
    Counterexample cex;
    cex.model = std::move(*r.model);
    out.cex = std::move(cex);
  }
  return out;
}

}  // namespace

GoalOutcome solve_goal(const HCCS& defs, const std::vector<GammaEntry>& gamma0,
                       const HornClause& goal, int goal_index,
                       const SolverOptions& opts, SmtSession& smt) {
  Judgment root = initial_goal_judgment(defs, gamma0, goal);
  GoalOutcome out = run_search(defs, std::move(root), std::nullopt, opts, smt);
  if (out.cex) out.cex->goal_index = goal_index;
  return out;
}

GoalOutcome check_lemma(const HCCS& defs, const GammaEntry& lemma,
                        const std::vector<GammaEntry>& prior,
                        const SolverOptions& opts, SmtSession& smt) {
  Judgment root = initial_lemma_judgment(defs, prior, lemma);
  std::optional<Ident> fold_pred;
  if (lemma.conclusion) fold_pred = lemma.conclusion->pred;
  return run_search(defs, std::move(root), fold_pred, opts, smt);
}

namespace {

// A refuted lemma validates like a refuted goal clause.
HornClause lemma_as_goal(const GammaEntry& lemma) {
  HornClause g;
  g.head = std::nullopt;
  g.body_atoms = lemma.premises;
  g.body_formula = lemma.premise_formula;
  for (const auto& a : lemma.premises) collect_fvs(a, g.vars);
  collect_fvs(lemma.premise_formula, g.vars);
  return g;
}

}  // namespace

SolveReport solve_hccs(const ProblemFile& problem, const SolverOptions& opts,
                       SmtSession& smt) {
  SolveReport report;
  const HCCS& hccs = problem.hccs;

  std::vector<GammaEntry> verified;
  for (size_t i = 0; i < problem.lemmas.size(); ++i) {
    GoalOutcome r = check_lemma(hccs, problem.lemmas[i], verified, opts, smt);
    report.lemma_results.push_back(r);
    if (r.kind != GoalOutcome::Proved) {
      report.verdict = Verdict::LemmaRejected;
      std::ostringstream os;
      os << "lemma " << i << " ";
      if (r.kind == GoalOutcome::Refuted) {
        os << "refuted";
        if (r.cex && !problem.lemmas[i].conclusion) {
          // Only bottom-concluding lemma refutations carry a model.
          bool ok = validate_counterexample(
              hccs, lemma_as_goal(problem.lemmas[i]), *r.cex,
              opts.validation_depth, &smt);
          os << (ok ? " (witness validated)" : " (witness unvalidated)");
        }
      } else {
        os << "not proved: " << r.reason;
      }
      report.detail = os.str();
      return report;
    }
    verified.push_back(problem.lemmas[i]);
  }

  report.goal_results.resize(hccs.goals.size());
  for (size_t i = 0; i < hccs.goals.size(); ++i) {
    report.goal_results[i] =
        solve_goal(hccs, verified, hccs.goals[i], (int)i, opts, smt);
  }

  bool all_proved = true;
  for (size_t i = 0; i < hccs.goals.size(); ++i) {
    GoalOutcome& r = report.goal_results[i];
    if (r.kind == GoalOutcome::Refuted) {
      bool ok = validate_counterexample(hccs, hccs.goals[i], *r.cex,
                                        opts.validation_depth, &smt,
                                        &r.cex->derivations);
      if (ok) {
        report.verdict = Verdict::Unsolvable;
        report.counterexample = r.cex;
        return report;
      }
      // A model that fails validation is discarded rather than reported.
      r.kind = GoalOutcome::Unknown;
      r.reason = "refutation model failed validation";
      r.cex.reset();
    }
    if (r.kind != GoalOutcome::Proved) all_proved = false;
  }

  if (!all_proved) {
    report.verdict = Verdict::Unknown;
    for (const auto& r : report.goal_results)
      if (r.kind == GoalOutcome::Unknown && report.detail.empty())
        report.detail = r.reason;
    return report;
  }

  report.verdict = Verdict::Solvable;
  Certificate cert;
  for (size_t i = 0; i < problem.lemmas.size(); ++i) {
    ProofNode tree = *report.lemma_results[i].tree;
    std::vector<GammaEntry> prior(problem.lemmas.begin(),
                                  problem.lemmas.begin() + i);
    Judgment root = initial_lemma_judgment(hccs, prior, problem.lemmas[i]);
    derive_snapshots(tree, root, smt);
    cert.lemma_proofs.emplace_back((int)i, std::move(tree));
  }
  for (size_t i = 0; i < hccs.goals.size(); ++i) {
    ProofNode tree = *report.goal_results[i].tree;
    Judgment root = initial_goal_judgment(hccs, verified, hccs.goals[i]);
    derive_snapshots(tree, root, smt);
    cert.goal_proofs.emplace_back((int)i, std::move(tree));
  }
  report.certificate = std::move(cert);
  return report;
}

SolveReport solve_hccs(const ProblemFile& problem, const SolverOptions& opts,
                       const SmtConfig& smt_config) {
  if (opts.jobs <= 1 || problem.hccs.goals.size() <= 1) {
    SmtSession smt(smt_config);
    return solve_hccs(problem, opts, smt);
  }

  // Goal-level parallelism: lemmas first on one session, then goals on
  // worker sessions; results merged in goal order for determinism.
  SolveReport report;
  const HCCS& hccs = problem.hccs;
  SmtSession lemma_smt(smt_config);
  std::vector<GammaEntry> verified;
  for (size_t i = 0; i < problem.lemmas.size(); ++i) {
    GoalOutcome r =
        check_lemma(hccs, problem.lemmas[i], verified, opts, lemma_smt);
    report.lemma_results.push_back(r);
    if (r.kind != GoalOutcome::Proved) {
      report.verdict = Verdict::LemmaRejected;
      report.detail = "lemma " + std::to_string(i) + " not proved";
      return report;
    }
    verified.push_back(problem.lemmas[i]);
  }

  report.goal_results.resize(hccs.goals.size());
  std::vector<std::future<GoalOutcome>> futures(hccs.goals.size());
  for (size_t i = 0; i < hccs.goals.size(); ++i) {
    futures[i] = std::async(std::launch::async, [&, i] {
      SmtSession smt(smt_config);
      return solve_goal(hccs, verified, hccs.goals[i], (int)i, opts, smt);
    });
  }
  for (size_t i = 0; i < hccs.goals.size(); ++i)
    report.goal_results[i] = futures[i].get();

  bool all_proved = true;
  for (size_t i = 0; i < hccs.goals.size(); ++i) {
    GoalOutcome& r = report.goal_results[i];
    if (r.kind == GoalOutcome::Refuted) {
      bool ok = validate_counterexample(hccs, hccs.goals[i], *r.cex,
                                        opts.validation_depth, &lemma_smt,
                                        &r.cex->derivations);
      if (ok) {
        report.verdict = Verdict::Unsolvable;
        report.counterexample = r.cex;
        return report;
      }
      r.kind = GoalOutcome::Unknown;
      r.reason = "refutation model failed validation";
      r.cex.reset();
    }
    if (r.kind != GoalOutcome::Proved) all_proved = false;
  }
  if (!all_proved) {
    report.verdict = Verdict::Unknown;
    return report;
  }
  report.verdict = Verdict::Solvable;
  Certificate cert;
  for (size_t i = 0; i < problem.lemmas.size(); ++i) {
    ProofNode tree = *report.lemma_results[i].tree;
    std::vector<GammaEntry> prior(problem.lemmas.begin(),
                                  problem.lemmas.begin() + i);
    Judgment root = initial_lemma_judgment(hccs, prior, problem.lemmas[i]);
    derive_snapshots(tree, root, lemma_smt);
    cert.lemma_proofs.emplace_back((int)i, std::move(tree));
  }
  for (size_t i = 0; i < hccs.goals.size(); ++i) {
    ProofNode tree = *report.goal_results[i].tree;
    Judgment root = initial_goal_judgment(hccs, verified, hccs.goals[i]);
    derive_snapshots(tree, root, lemma_smt);
    cert.goal_proofs.emplace_back((int)i, std::move(tree));
  }
  report.certificate = std::move(cert);
  return report;
}

}  // namespace chcind
