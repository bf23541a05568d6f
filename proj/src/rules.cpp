#include "chcind/rules.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace chcind {

namespace {

std::set<Ident> premise_vars(const GammaEntry& e) {
  std::set<Ident> vars;
  for (const auto& a : e.premises) collect_fvs(a, vars);
  return vars;
}

std::string sigma_key(int uid, const Substitution& s) {
  std::ostringstream os;
  os << uid << '|';
  for (const auto& [v, t] : s.map) os << name_of(v) << '=' << to_string(t) << ';';
  return os.str();
}

// sigma phi' with syntactically reflexive equality conjuncts dropped.
Formula instantiated_premise_formula(const GammaEntry& e,
                                     const Substitution& sigma) {
  Formula inst = sigma.apply(e.premise_formula);
  auto reflexive = [](const Formula& c) {
    return c->kind == FormKind::Cmp && c->op == CmpOp::Eq &&
           equal(c->lhs, c->rhs);
  };
  if (inst->kind == FormKind::And) {
    std::vector<Formula> kept;
    for (const auto& k : inst->kids)
      if (!reflexive(k)) kept.push_back(k);
    return conjoin(kept);
  }
  if (reflexive(inst)) return ftrue();
  return inst;
}

Formula negate(const Formula& f) {
  switch (f->kind) {
    case FormKind::True: return ffalse();
    case FormKind::False: return ftrue();
    case FormKind::Cmp:
      switch (f->op) {
        case CmpOp::Eq: return fcmp(CmpOp::Ne, f->lhs, f->rhs);
        case CmpOp::Ne: return fcmp(CmpOp::Eq, f->lhs, f->rhs);
        case CmpOp::Le: return fcmp(CmpOp::Lt, f->rhs, f->lhs);
        case CmpOp::Lt: return fcmp(CmpOp::Le, f->rhs, f->lhs);
      }
      return fnot(f);
    case FormKind::Not: return f->kids[0];
    default: return fnot(f);
  }
}

// Residual variables of the instantiated premise formula, universally
// quantified by Apply-bottom and existentially by the Apply-P/Fold check.
std::vector<Ident> leftover_vars(const GammaEntry& e, const Substitution& s) {
  std::set<Ident> vars = fvs(e.premise_formula);
  std::vector<Ident> out;
  for (Ident v : vars)
    if (!s.contains(v)) out.push_back(v);
  return out;
}

bool entailed(const Formula& hypothesis, const Formula& claim, SmtSession& smt) {
  if (encoding_trivially_valid(claim) || claim->kind == FormKind::True)
    return true;
  return smt.check_valid(hypothesis, claim).kind == SmtVerdict::Valid;
}

// Fig. 3 membership/containment premises for one instantiated source.
bool side_conditions_hold(const Judgment& j, const GammaEntry& e,
                          const Substitution& sigma, SmtSession& smt) {
  Formula phi = j.knowledge_conj();
  auto view = j.marked_view();
  if (!e.is_lemma()) {
    Atom pivot = sigma.apply(e.premises[e.pivot]);
    Formula in = in_encoding_marked(pivot, *e.alpha, view);
    if (!entailed(phi, in, smt)) return false;
  }
  for (const auto& prem : e.premises) {
    Formula in = in_encoding(sigma.apply(prem), view);
    if (!entailed(phi, in, smt)) return false;
  }
  return true;
}

bool exists_check_holds(const Judgment& j, const GammaEntry& e,
                        const Substitution& sigma, SmtSession& smt) {
  Formula inst = instantiated_premise_formula(e, sigma);
  if (inst->kind == FormKind::True) return true;
  std::vector<Ident> leftover = leftover_vars(e, sigma);
  Formula claim =
      leftover.empty() ? inst : fquant(false, leftover, inst);
  return smt.check_valid(j.knowledge_conj(), claim).kind == SmtVerdict::Valid;
}

bool dom_matches(const Substitution& s, const std::set<Ident>& want) {
  if (s.map.size() != want.size()) return false;
  for (const auto& [v, t] : s.map) {
    (void)t;
    if (!want.count(v)) return false;
  }
  return true;
}

}  // namespace

GammaEntry fold_template(const HCCS& defs, int clause_index) {
  const HornClause& hc = defs.definite.at(clause_index);
  GammaEntry e;
  e.uid = -1000 - clause_index;  // distinct key space from gamma entries
  e.pivot = -1;
  e.premises = hc.body_atoms;
  e.premise_formula = hc.body_formula;
  e.conclusion = hc.head;
  FreshSource fresh("f" + std::to_string(clause_index) + "x");
  normalize_entry_premises(e, fresh);
  return e;
}

std::optional<Instantiation> instantiation_from_matches(
    const Judgment& j, const GammaEntry& source,
    const std::vector<int>& matched) {
  if (matched.size() != source.premises.size()) return std::nullopt;
  Instantiation inst;
  inst.matched = matched;
  for (size_t i = 0; i < matched.size(); ++i) {
    int pos = matched[i];
    if (pos < 0 || pos >= (int)j.atoms.size()) return std::nullopt;
    const Atom& concrete = j.atoms[pos].atom;
    const Atom& pattern = source.premises[i];
    if (pattern.pred != concrete.pred ||
        pattern.args.size() != concrete.args.size())
      return std::nullopt;
    for (size_t k = 0; k < pattern.args.size(); ++k) {
      if (pattern.args[k]->kind != TermKind::Var) return std::nullopt;
      inst.subst.map[pattern.args[k]->var] = concrete.args[k];
    }
  }

  if (source.conclusion) {
    // Complete sigma on conclusion-only variables: first solve equality
    // conjuncts of the premise formula whose other side is already
    // determined, then align the conclusion with the judgment's target.
    std::set<Ident> todo;
    for (Ident v : fvs(*source.conclusion))
      if (!inst.subst.contains(v)) todo.insert(v);
    bool progress = true;
    while (!todo.empty() && progress) {
      progress = false;
      std::vector<Formula> conjs;
      if (source.premise_formula->kind == FormKind::And)
        conjs = source.premise_formula->kids;
      else
        conjs = {source.premise_formula};
      for (const auto& c : conjs) {
        if (c->kind != FormKind::Cmp || c->op != CmpOp::Eq) continue;
        for (bool flip : {false, true}) {
          const Term& l = flip ? c->rhs : c->lhs;
          const Term& r = flip ? c->lhs : c->rhs;
          if (l->kind != TermKind::Var || !todo.count(l->var)) continue;
          std::set<Ident> rv = fvs(r);
          bool ready = std::all_of(rv.begin(), rv.end(), [&](Ident v) {
            return inst.subst.contains(v);
          });
          if (!ready) continue;
          inst.subst.map[l->var] = inst.subst.apply(r);
          todo.erase(l->var);
          progress = true;
          break;
        }
      }
    }
    if (!todo.empty() && j.target && j.target->pred == source.conclusion->pred) {
      for (size_t k = 0; k < source.conclusion->args.size(); ++k) {
        const Term& arg = source.conclusion->args[k];
        if (arg->kind == TermKind::Var && todo.count(arg->var)) {
          inst.subst.map[arg->var] = j.target->args[k];
          todo.erase(arg->var);
        }
      }
    }
    if (!todo.empty()) return std::nullopt;
  }

  inst.key = sigma_key(source.uid, inst.subst);
  return inst;
}

std::vector<Instantiation> find_instantiations(const Judgment& j,
                                               const GammaEntry& source,
                                               SmtSession& smt) {
  constexpr size_t kMaxCandidates = 4096;
  std::vector<Instantiation> out;

  // Positions each premise can match.
  std::vector<std::vector<int>> options(source.premises.size());
  for (size_t i = 0; i < source.premises.size(); ++i) {
    for (int pos = 0; pos < (int)j.atoms.size(); ++pos) {
      const AnnotatedAtom& aa = j.atoms[pos];
      if (aa.atom.pred != source.premises[i].pred) continue;
      if ((int)i == source.pivot && source.alpha &&
          !aa.marks.count(*source.alpha))
        continue;
      options[i].push_back(pos);
    }
    if (options[i].empty()) return out;
  }

  std::vector<int> cursor(source.premises.size(), 0);
  size_t seen = 0;
  for (;;) {
    if (++seen > kMaxCandidates) break;
    std::vector<int> matched(source.premises.size());
    for (size_t i = 0; i < matched.size(); ++i)
      matched[i] = options[i][cursor[i]];
    if (auto inst = instantiation_from_matches(j, source, matched)) {
      if (!j.applied.count(inst->key)) {
        bool ok;
        if (source.conclusion) {
          ok = exists_check_holds(j, source, inst->subst, smt);
        } else {
          // Keep only candidates whose instantiated premise is consistent
          // with the knowledge; the rest cannot add anything.
          Formula prem = instantiated_premise_formula(source, inst->subst);
          std::vector<Formula> conj = j.knowledge;
          if (prem->kind != FormKind::True) conj.push_back(prem);
          ok = smt.check_sat(conjoin(conj)).kind == SatResult::Sat;
        }
        if (ok) out.push_back(std::move(*inst));
      }
    }
    // next combination (first premise varies slowest)
    size_t i = cursor.size();
    for (;;) {
      if (i == 0) return out;
      --i;
      if (++cursor[i] < (int)options[i].size()) break;
      cursor[i] = 0;
      if (i == 0) return out;
    }
    if (source.premises.empty()) return out;  // single empty combination
  }
  return out;
}

std::optional<Judgment> apply_induct(const Judgment& j, int occ,
                                     DeriveContext& ctx, Ident* alpha_out) {
  if (occ < 0 || occ >= (int)j.atoms.size()) return std::nullopt;
  if (j.atoms[occ].inducted) return std::nullopt;

  Ident alpha = ctx.fresh_alpha();
  GammaEntry entry;
  entry.uid = 1000000 + ctx.alphas;
  entry.alpha = alpha;
  entry.pivot = occ;
  for (const auto& aa : j.atoms) entry.premises.push_back(aa.atom);
  entry.premise_formula = j.knowledge_conj();
  entry.conclusion = j.target;

  // Close the entry over fresh variables.
  std::set<Ident> vars = premise_vars(entry);
  collect_fvs(entry.premise_formula, vars);
  if (entry.conclusion) collect_fvs(*entry.conclusion, vars);
  Substitution rename;
  for (Ident v : vars) rename.map.emplace(v, tvar(ctx.vars.fresh(v)));
  for (auto& a : entry.premises) a = rename.apply(a);
  entry.premise_formula = rename.apply(entry.premise_formula);
  if (entry.conclusion) entry.conclusion = rename.apply(*entry.conclusion);
  normalize_entry_premises(entry, ctx.vars);

  Judgment child = j;
  child.gamma.push_back(std::move(entry));
  child.atoms[occ].inducted = alpha;
  if (alpha_out) *alpha_out = alpha;
  return child;
}

std::vector<Judgment> apply_unfold(const Judgment& j, int occ,
                                   DeriveContext& ctx) {
  const AnnotatedAtom& selected = j.atoms.at(occ);
  DefinitionDisjunction def = build_definition(*j.defs, selected.atom.pred);

  Substitution at_args;
  for (size_t i = 0; i < def.params.size(); ++i)
    at_args.map.emplace(def.params[i], selected.atom.args[i]);

  std::set<Ident> child_marks = selected.marks;
  if (selected.inducted) child_marks.insert(*selected.inducted);

  std::vector<Judgment> children;
  for (const auto& br : def.branches) {
    Substitution inst = at_args;
    for (Ident v : br.exists) inst.map.emplace(v, tvar(ctx.vars.fresh(v)));

    Judgment child = j;
    child.atoms[occ].unfolded = true;
    Formula f = inst.apply(br.formula);
    if (f->kind == FormKind::And) {
      for (const auto& k : f->kids) child.add_knowledge(k);
    } else if (f->kind != FormKind::True) {
      child.add_knowledge(f);
    }
    for (const auto& a : br.atoms) child.push_atom(inst.apply(a), child_marks, 0);
    children.push_back(std::move(child));
  }
  return children;
}

std::optional<Judgment> apply_bot(const Judgment& j, int entry_index,
                                  const Instantiation& inst, SmtSession& smt) {
  if (entry_index < 0 || entry_index >= (int)j.gamma.size()) return std::nullopt;
  const GammaEntry& e = j.gamma[entry_index];
  if (e.conclusion) return std::nullopt;
  if (!dom_matches(inst.subst, premise_vars(e))) return std::nullopt;
  if (!side_conditions_hold(j, e, inst.subst, smt)) return std::nullopt;

  Formula prem = instantiated_premise_formula(e, inst.subst);
  std::vector<Ident> leftover = leftover_vars(e, inst.subst);
  Formula gained = negate(prem);
  if (!leftover.empty()) gained = fquant(true, leftover, fnot(prem));

  Judgment child = j;
  child.applied.insert(inst.key);
  child.add_knowledge(gained);
  return child;
}

namespace {

std::optional<Judgment> apply_conclusion_source(const Judgment& j,
                                                const GammaEntry& e,
                                                const Instantiation& inst,
                                                bool replace, SmtSession& smt) {
  std::set<Ident> want = premise_vars(e);
  collect_fvs(*e.conclusion, want);
  if (!dom_matches(inst.subst, want)) return std::nullopt;
  if (!side_conditions_hold(j, e, inst.subst, smt)) return std::nullopt;
  if (!exists_check_holds(j, e, inst.subst, smt)) return std::nullopt;

  int depth = 0;
  for (int pos : inst.matched)
    depth = std::max(depth, j.atoms.at(pos).lemma_depth);

  Judgment child = j;
  child.applied.insert(inst.key);
  if (replace && !inst.matched.empty()) {
    int victim = inst.matched[e.pivot >= 0 ? e.pivot : 0];
    child.atoms.erase(child.atoms.begin() + victim);
  }
  child.push_atom(inst.subst.apply(*e.conclusion), {}, depth + 1);
  return child;
}

}  // namespace

std::optional<Judgment> apply_p(const Judgment& j, int entry_index,
                                const Instantiation& inst, bool replace,
                                SmtSession& smt) {
  if (entry_index < 0 || entry_index >= (int)j.gamma.size()) return std::nullopt;
  const GammaEntry& e = j.gamma[entry_index];
  if (!e.conclusion) return std::nullopt;
  return apply_conclusion_source(j, e, inst, replace, smt);
}

std::optional<Judgment> apply_fold(const Judgment& j, int clause_index,
                                   const Instantiation& inst, SmtSession& smt) {
  if (clause_index < 0 || clause_index >= (int)j.defs->definite.size())
    return std::nullopt;
  GammaEntry e = fold_template(*j.defs, clause_index);
  return apply_conclusion_source(j, e, inst, /*replace=*/false, smt);
}

bool check_valid_bot(const Judgment& j, SmtSession& smt) {
  assert(!j.target);
  for (const auto& f : j.knowledge)
    if (f->kind == FormKind::False) return true;
  return smt.check_valid(j.knowledge_conj(), ffalse()).kind == SmtVerdict::Valid;
}

bool check_valid_p(const Judgment& j, SmtSession& smt) {
  assert(j.target);
  Formula in = in_encoding(*j.target, j.marked_view());
  if (encoding_trivially_valid(in)) return true;
  if (in->kind == FormKind::False) return false;
  return smt.check_valid(j.knowledge_conj(), in).kind == SmtVerdict::Valid;
}

}  // namespace chcind
