#include "chcind/hccs.hpp"

#include <algorithm>

namespace chcind {

int HCCS::arity_of(Ident p) const {
  auto found = predicates.find(p);
  if (found == predicates.end())
    throw HccsError("undeclared predicate " + name_of(p));
  return found->second;
}

namespace {

void check_clause_atoms(const HornClause& hc, const std::map<Ident, int>& decls) {
  auto check = [&](const Atom& a) {
    auto found = decls.find(a.pred);
    if (found == decls.end())
      throw HccsError("undeclared predicate " + name_of(a.pred));
    if ((int)a.args.size() != found->second)
      throw HccsError("arity mismatch for " + name_of(a.pred) + ": expected " +
                      std::to_string(found->second) + ", got " +
                      std::to_string(a.args.size()));
  };
  if (hc.head) check(*hc.head);
  for (const auto& a : hc.body_atoms) check(a);
}

}  // namespace

HCCS normalize_hccs(const std::vector<HornClause>& raw,
                    const std::map<Ident, int>& decls) {
  HCCS out;
  out.predicates = decls;
  FreshSource fresh("n");
  for (const auto& hc : raw) {
    check_clause_atoms(hc, decls);
    std::set<Ident> used = hc.vars;
    collect_fvs(hc.body_formula, used);
    for (const auto& a : hc.body_atoms) collect_fvs(a, used);
    if (hc.head) collect_fvs(*hc.head, used);

    Substitution rename;
    HornClause fresh_hc;
    for (Ident v : used) {
      Ident nv = fresh.fresh(v);
      rename.map.emplace(v, tvar(nv));
      fresh_hc.vars.insert(nv);
    }
    fresh_hc.body_formula = rename.apply(hc.body_formula);
    fresh_hc.body_atoms = rename.apply(hc.body_atoms);
    if (hc.head) fresh_hc.head = rename.apply(*hc.head);
    if (fresh_hc.is_definite())
      out.definite.push_back(std::move(fresh_hc));
    else
      out.goals.push_back(std::move(fresh_hc));
  }
  return out;
}

DefinitionDisjunction build_definition(const HCCS& hccs, Ident p) {
  int arity = hccs.arity_of(p);
  DefinitionDisjunction def;
  def.predicate = p;
  FreshSource fresh("p");
  for (int i = 0; i < arity; ++i)
    def.params.push_back(fresh.fresh(intern("x")));

  for (const auto& hc : hccs.definite) {
    if (hc.head->pred != p) continue;
    DefinitionBranch br;
    Substitution solved;  // clause var -> param
    std::vector<Formula> residual;
    for (int i = 0; i < arity; ++i) {
      Term arg = solved.apply(hc.head->args[i]);
      if (arg->kind == TermKind::Var && !solved.contains(arg->var) &&
          hc.vars.count(arg->var)) {
        solved.map.emplace(arg->var, tvar(def.params[i]));
      } else {
        residual.push_back(fcmp(CmpOp::Eq, tvar(def.params[i]), arg));
      }
    }
    std::vector<Formula> conj;
    Formula body = solved.apply(hc.body_formula);
    if (body->kind != FormKind::True) conj.push_back(body);
    for (auto& r : residual) conj.push_back(solved.apply(r));
    br.formula = conjoin(conj);
    br.atoms = solved.apply(hc.body_atoms);
    for (Ident v : hc.vars)
      if (!solved.contains(v)) br.exists.push_back(v);
    def.branches.push_back(std::move(br));
  }
  return def;
}

std::vector<HornClause> expand_definition(const DefinitionDisjunction& d) {
  std::vector<HornClause> out;
  for (const auto& br : d.branches) {
    HornClause hc;
    Atom head{d.predicate, {}};
    for (Ident p : d.params) head.args.push_back(tvar(p));
    hc.head = head;
    hc.body_formula = br.formula;
    hc.body_atoms = br.atoms;
    hc.vars.insert(d.params.begin(), d.params.end());
    hc.vars.insert(br.exists.begin(), br.exists.end());
    out.push_back(std::move(hc));
  }
  return out;
}

void normalize_entry_premises(GammaEntry& e, FreshSource& fresh) {
  std::set<Ident> seen;
  std::vector<Formula> residual;
  for (auto& atom : e.premises) {
    for (auto& arg : atom.args) {
      if (arg->kind == TermKind::Var && !seen.count(arg->var)) {
        seen.insert(arg->var);
        continue;
      }
      Ident u = fresh.fresh(intern("u"));
      seen.insert(u);
      residual.push_back(fcmp(CmpOp::Eq, tvar(u), arg));
      arg = tvar(u);
    }
  }
  if (!residual.empty()) {
    std::vector<Formula> conj;
    if (e.premise_formula->kind != FormKind::True)
      conj.push_back(e.premise_formula);
    for (auto& r : residual) conj.push_back(std::move(r));
    e.premise_formula = conjoin(conj);
  }
}

/* -------------------------------------------------------------------- */
/* IN / SUB encodings                                                    */
/* -------------------------------------------------------------------- */

namespace {

Formula tuple_eq(const std::vector<Term>& a, const std::vector<Term>& b) {
  std::vector<Formula> conj;
  for (size_t i = 0; i < a.size(); ++i)
    conj.push_back(fcmp(CmpOp::Eq, a[i], b[i]));
  return conjoin(conj);
}

Formula in_encoding_impl(const Atom& target, const std::vector<MarkedAtom>& a,
                         const std::optional<Ident>& alpha) {
  std::vector<Formula> disj;
  for (const auto& ma : a) {
    if (ma.atom.pred != target.pred) continue;
    if (alpha && (!ma.marks || !ma.marks->count(*alpha))) continue;
    disj.push_back(tuple_eq(target.args, ma.atom.args));
  }
  if (disj.empty()) return ffalse();
  if (disj.size() == 1) return disj[0];
  return for_(std::move(disj));
}

}  // namespace

Formula in_encoding(const Atom& target, const std::vector<MarkedAtom>& a) {
  return in_encoding_impl(target, a, std::nullopt);
}

Formula in_encoding_marked(const Atom& target, Ident alpha,
                           const std::vector<MarkedAtom>& a) {
  return in_encoding_impl(target, a, alpha);
}

Formula in_encoding_bullet() { return ftrue(); }

Formula sub_encoding(const std::vector<Atom>& a1,
                     const std::vector<MarkedAtom>& a2) {
  std::vector<Formula> conj;
  for (const auto& atom : a1) conj.push_back(in_encoding(atom, a2));
  return conjoin(conj);
}

bool encoding_trivially_valid(const Formula& f) {
  auto reflexive_conj = [](const Formula& g) {
    auto refl = [](const Formula& c) {
      return c->kind == FormKind::Cmp && c->op == CmpOp::Eq &&
             equal(c->lhs, c->rhs);
    };
    if (g->kind == FormKind::True) return true;
    if (g->kind == FormKind::Cmp) return refl(g);
    if (g->kind != FormKind::And) return false;
    return std::all_of(g->kids.begin(), g->kids.end(), refl);
  };
  if (f->kind == FormKind::Or)
    return std::any_of(f->kids.begin(), f->kids.end(), reflexive_conj);
  return reflexive_conj(f);
}

}  // namespace chcind
