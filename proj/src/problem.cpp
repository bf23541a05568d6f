#include "chcind/problem.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace chcind {

namespace {

[[noreturn]] void fail(const SExpr& at, const std::string& msg) {
  throw ParseError(msg, at.line, at.col);
}

bool is_integer(const std::string& s) {
  size_t i = (s.size() > 1 && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  if (i >= s.size()) return false;
  return std::all_of(s.begin() + i, s.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

Ident checked_ident(const SExpr& e) {
  if (!e.is_atom) fail(e, "expected an identifier");
  if (is_integer(e.atom)) fail(e, "expected an identifier, got a number");
  if (is_reserved_name(e.atom))
    fail(e, "identifier '" + e.atom + "' uses the reserved '$' prefix");
  return intern(e.atom);
}

struct BodyParts {
  std::vector<Atom> atoms;
  std::vector<Formula> formula;
};

Atom parse_atom(const SExpr& e, const std::set<Ident>& scope,
                const std::map<Ident, int>& preds) {
  Ident p = intern(e[0].atom);
  auto found = preds.find(p);
  if (found == preds.end()) fail(e, "undeclared predicate " + e[0].atom);
  if ((int)e.size() - 1 != found->second)
    fail(e, "arity mismatch for " + e[0].atom + ": expected " +
                std::to_string(found->second) + " arguments, got " +
                std::to_string(e.size() - 1));
  Atom a{p, {}};
  for (size_t i = 1; i < e.size(); ++i)
    a.args.push_back(parse_term(e[i], scope));
  return a;
}

bool is_pred_application(const SExpr& e, const std::map<Ident, int>& preds) {
  return e.is_list() && !e.list.empty() && e[0].is_atom &&
         !is_integer(e[0].atom) && preds.count(intern(e[0].atom));
}

void forbid_nested_atoms(const SExpr& e, const std::map<Ident, int>& preds) {
  if (is_pred_application(e, preds))
    fail(e, "predicate application in a non-positive position");
  if (e.is_list())
    for (const auto& k : e.list) forbid_nested_atoms(k, preds);
}

// Splits a body expression into positive atoms (top-level conjuncts that are
// predicate applications) and the residual constraint formula.
BodyParts parse_body(const SExpr& e, const std::set<Ident>& scope,
                     const std::map<Ident, int>& preds) {
  BodyParts out;
  std::vector<const SExpr*> work{&e};
  std::vector<const SExpr*> conjuncts;
  while (!work.empty()) {
    const SExpr* cur = work.back();
    work.pop_back();
    if (cur->is_list() && !cur->list.empty() && cur->list[0].is_sym("and")) {
      for (size_t i = cur->size(); i > 1; --i) work.push_back(&(*cur)[i - 1]);
    } else {
      conjuncts.push_back(cur);
    }
  }
  for (const SExpr* c : conjuncts) {
    if (is_pred_application(*c, preds))
      out.atoms.push_back(parse_atom(*c, scope, preds));
    else {
      forbid_nested_atoms(*c, preds);
      out.formula.push_back(parse_formula(*c, scope, preds));
    }
  }
  return out;
}

std::set<Ident> parse_var_list(const SExpr& e, bool sorted) {
  if (!e.is_list()) fail(e, "expected a variable list");
  std::set<Ident> scope;
  for (const auto& v : e.list) {
    if (sorted) {
      // SMT-LIB style (x Int) pairs
      if (!v.is_list() || v.size() != 2)
        fail(v, "expected a sorted variable (x Int)");
      if (!v[1].is_sym("Int")) fail(v[1], "only Int variables are supported");
      scope.insert(checked_ident(v[0]));
    } else {
      scope.insert(checked_ident(v));
    }
  }
  return scope;
}

HornClause parse_clause_expr(const SExpr& e, const std::map<Ident, int>& preds,
                             bool sorted_vars) {
  const SExpr* body_head = &e;
  std::set<Ident> scope;
  if (e.is_list() && !e.list.empty() && e[0].is_sym("forall")) {
    if (e.size() != 3) fail(e, "forall expects a variable list and a body");
    scope = parse_var_list(e[1], sorted_vars);
    body_head = &e[2];
  }
  HornClause hc;
  hc.vars = scope;
  const SExpr& bh = *body_head;
  const SExpr* head = &bh;
  if (bh.is_list() && !bh.list.empty() && bh.list[0].is_sym("=>")) {
    if (bh.size() != 3) fail(bh, "=> expects two arguments");
    BodyParts body = parse_body(bh[1], scope, preds);
    hc.body_atoms = std::move(body.atoms);
    hc.body_formula = conjoin(body.formula);
    head = &bh[2];
  } else {
    hc.body_formula = ftrue();
  }
  if (head->is_sym("false")) {
    hc.head = std::nullopt;
  } else if (is_pred_application(*head, preds)) {
    hc.head = parse_atom(*head, scope, preds);
  } else {
    fail(*head, "clause head must be a predicate application or false");
  }
  return hc;
}

GammaEntry parse_lemma_expr(const SExpr& e, const std::map<Ident, int>& preds) {
  const SExpr* inner = &e;
  std::set<Ident> scope;
  if (e.is_list() && !e.list.empty() && e[0].is_sym("forall")) {
    if (e.size() != 3) fail(e, "forall expects a variable list and a body");
    scope = parse_var_list(e[1], false);
    inner = &e[2];
  }
  if (!inner->is_list() || inner->list.empty() || !inner->list[0].is_sym("=>") ||
      inner->size() != 3)
    fail(*inner, "lemma body must be (=> premise conclusion)");
  BodyParts prem = parse_body((*inner)[1], scope, preds);
  GammaEntry entry;
  entry.premises = std::move(prem.atoms);
  std::vector<Formula> formula = std::move(prem.formula);
  const SExpr& concl = (*inner)[2];
  if (concl.is_sym("false")) {
    entry.conclusion = std::nullopt;
  } else if (is_pred_application(concl, preds)) {
    entry.conclusion = parse_atom(concl, scope, preds);
  } else {
    // Formula conclusions fold into the premise as a negation; the entry
    // then concludes bottom.
    forbid_nested_atoms(concl, preds);
    formula.push_back(fnot(parse_formula(concl, scope, preds)));
    entry.conclusion = std::nullopt;
  }
  entry.premise_formula = conjoin(formula);
  return entry;
}

ProblemFile finish_problem(std::vector<HornClause> raw,
                           std::map<Ident, int> decls,
                           std::vector<GammaEntry> lemmas,
                           std::map<std::string, std::string> options) {
  ProblemFile out;
  out.hccs = normalize_hccs(raw, decls);
  out.options = std::move(options);
  FreshSource fresh("l");
  int uid = 0;
  for (auto& e : lemmas) {
    // Close the entry: freshen all of its variables, then normalize the
    // premise arguments.
    std::set<Ident> vars;
    for (const auto& a : e.premises) collect_fvs(a, vars);
    collect_fvs(e.premise_formula, vars);
    if (e.conclusion) collect_fvs(*e.conclusion, vars);
    Substitution rename;
    for (Ident v : vars) rename.map.emplace(v, tvar(fresh.fresh(v)));
    for (auto& a : e.premises) a = rename.apply(a);
    e.premise_formula = rename.apply(e.premise_formula);
    if (e.conclusion) e.conclusion = rename.apply(*e.conclusion);
    normalize_entry_premises(e, fresh);
    e.uid = uid++;
    e.pivot = -1;
    out.lemmas.push_back(std::move(e));
  }
  return out;
}

ProblemFile parse_native(const std::vector<SExpr>& forms) {
  std::map<Ident, int> decls;
  std::vector<HornClause> raw;
  std::vector<GammaEntry> lemmas;
  std::map<std::string, std::string> options;
  for (const auto& f : forms) {
    if (!f.is_list() || f.list.empty() || !f[0].is_atom)
      fail(f, "expected a top-level form");
    const std::string& tag = f[0].atom;
    if (tag == "declare-pred") {
      if (f.size() < 2) fail(f, "declare-pred expects a name");
      Ident p = checked_ident(f[1]);
      for (size_t i = 2; i < f.size(); ++i)
        if (!f[i].is_sym("Int")) fail(f[i], "only Int sorts are supported");
      if (decls.count(p)) fail(f[1], "duplicate predicate " + f[1].atom);
      decls[p] = (int)f.size() - 2;
    } else if (tag == "clause") {
      if (f.size() != 2) fail(f, "clause expects one expression");
      raw.push_back(parse_clause_expr(f[1], decls, false));
    } else if (tag == "lemma") {
      if (f.size() != 2) fail(f, "lemma expects one expression");
      lemmas.push_back(parse_lemma_expr(f[1], decls));
    } else if (tag == "option") {
      if (f.size() != 3 || !f[1].is_atom || !f[2].is_atom)
        fail(f, "option expects a key and a value");
      options[f[1].atom] = f[2].atom;
    } else {
      fail(f, "unknown form '" + tag + "'");
    }
  }
  return finish_problem(std::move(raw), std::move(decls), std::move(lemmas),
                        std::move(options));
}

ProblemFile parse_smt2(const std::vector<SExpr>& forms) {
  std::map<Ident, int> decls;
  std::vector<HornClause> raw;
  for (const auto& f : forms) {
    if (!f.is_list() || f.list.empty() || !f[0].is_atom)
      fail(f, "expected a top-level form");
    const std::string& tag = f[0].atom;
    if (tag == "set-logic" || tag == "set-info" || tag == "set-option" ||
        tag == "check-sat" || tag == "exit" || tag == "get-model") {
      continue;
    } else if (tag == "declare-fun") {
      if (f.size() != 4 || !f[2].is_list() || !f[3].is_sym("Bool"))
        fail(f, "expected (declare-fun P (Int ...) Bool)");
      Ident p = checked_ident(f[1]);
      for (const auto& s : f[2].list)
        if (!s.is_sym("Int")) fail(s, "only Int argument sorts are supported");
      decls[p] = (int)f[2].size();
    } else if (tag == "assert") {
      if (f.size() != 2) fail(f, "assert expects one formula");
      const SExpr& a = f[1];
      // (not (exists (...) body)) is an accepted goal shape.
      if (a.is_list() && !a.list.empty() && a[0].is_sym("not") &&
          a.size() == 2 && a[1].is_list() && !a[1].list.empty() &&
          a[1][0].is_sym("exists")) {
        const SExpr& ex = a[1];
        if (ex.size() != 3) fail(ex, "exists expects a variable list and body");
        HornClause hc;
        hc.vars = parse_var_list(ex[1], true);
        BodyParts body = parse_body(ex[2], hc.vars, decls);
        hc.body_atoms = std::move(body.atoms);
        hc.body_formula = conjoin(body.formula);
        hc.head = std::nullopt;
        raw.push_back(std::move(hc));
      } else {
        raw.push_back(parse_clause_expr(a, decls, true));
      }
    } else {
      fail(f, "unknown form '" + tag + "'");
    }
  }
  return finish_problem(std::move(raw), std::move(decls), {}, {});
}

}  // namespace

namespace {

// scope == nullptr accepts any symbol as a variable, including reserved
// internal names; used by the certificate reader.
Term parse_term_impl(const SExpr& e, const std::set<Ident>* scope) {
  if (e.is_atom) {
    if (is_integer(e.atom)) return tlit(Int(e.atom));
    if (!scope) return tvar(intern(e.atom));
    Ident v = checked_ident(e);
    if (!scope->count(v)) fail(e, "unbound variable '" + e.atom + "'");
    return tvar(v);
  }
  if (e.list.empty() || !e[0].is_atom) fail(e, "expected a term");
  const std::string& op = e[0].atom;
  if (op == "+" || op == "*") {
    if (e.size() < 3) fail(e, "'" + op + "' expects at least two arguments");
    Term acc = parse_term_impl(e[1], scope);
    for (size_t i = 2; i < e.size(); ++i) {
      Term rhs = parse_term_impl(e[i], scope);
      acc = op == "+" ? tadd(acc, rhs) : tmul(acc, rhs);
    }
    return acc;
  }
  if (op == "-") {
    // (- n) with a numeral is the canonical negative literal.
    if (e.size() == 2 && e[1].is_atom && is_integer(e[1].atom))
      return tlit(-Int(e[1].atom));
    if (e.size() == 2) return tneg(parse_term_impl(e[1], scope));
    if (e.size() < 3) fail(e, "'-' expects arguments");
    Term acc = parse_term_impl(e[1], scope);
    for (size_t i = 2; i < e.size(); ++i)
      acc = tsub(acc, parse_term_impl(e[i], scope));
    return acc;
  }
  fail(e, "unknown term operator '" + op + "'");
}

}  // namespace

Term parse_term(const SExpr& e, const std::set<Ident>& scope) {
  return parse_term_impl(e, &scope);
}

Term parse_term_any(const SExpr& e) { return parse_term_impl(e, nullptr); }

namespace {

Formula parse_formula_impl(const SExpr& e, const std::set<Ident>* scope) {
  if (e.is_sym("true")) return ftrue();
  if (e.is_sym("false")) return ffalse();
  if (e.is_atom) fail(e, "expected a formula");
  if (e.list.empty() || !e[0].is_atom) fail(e, "expected a formula");
  const std::string& op = e[0].atom;
  auto cmp2 = [&](CmpOp c, bool flip) {
    if (e.size() < 3) fail(e, "'" + op + "' expects two arguments");
    std::vector<Formula> chain;
    for (size_t i = 1; i + 1 < e.size(); ++i) {
      Term l = parse_term_impl(e[i], scope);
      Term r = parse_term_impl(e[i + 1], scope);
      chain.push_back(flip ? fcmp(c, r, l) : fcmp(c, l, r));
    }
    return conjoin(chain);
  };
  if (op == "<=") return cmp2(CmpOp::Le, false);
  if (op == "<") return cmp2(CmpOp::Lt, false);
  if (op == ">=") return cmp2(CmpOp::Le, true);
  if (op == ">") return cmp2(CmpOp::Lt, true);
  if (op == "=") return cmp2(CmpOp::Eq, false);
  if (op == "distinct") return cmp2(CmpOp::Ne, false);
  if (op == "not") {
    if (e.size() != 2) fail(e, "not expects one argument");
    return fnot(parse_formula_impl(e[1], scope));
  }
  if (op == "and" || op == "or") {
    std::vector<Formula> kids;
    for (size_t i = 1; i < e.size(); ++i)
      kids.push_back(parse_formula_impl(e[i], scope));
    if (kids.empty()) return op == "and" ? ftrue() : ffalse();
    if (kids.size() == 1) return kids[0];
    return op == "and" ? fand(std::move(kids)) : for_(std::move(kids));
  }
  if (op == "=>") {
    if (e.size() != 3) fail(e, "=> expects two arguments");
    Formula a = parse_formula_impl(e[1], scope);
    Formula b = parse_formula_impl(e[2], scope);
    return for_({fnot(a), b});
  }
  if (op == "forall" || op == "exists") {
    if (scope) fail(e, "quantifiers are not allowed in clause bodies");
    if (e.size() != 3 || !e[1].is_list())
      fail(e, "quantifier expects a sorted variable list and a body");
    std::vector<Ident> bound;
    for (const auto& v : e[1].list) {
      if (!v.is_list() || v.size() != 2 || !v[0].is_atom)
        fail(v, "expected a sorted variable (x Int)");
      bound.push_back(intern(v[0].atom));
    }
    return fquant(op == "forall", std::move(bound),
                  parse_formula_impl(e[2], nullptr));
  }
  fail(e, "unknown formula operator '" + op + "'");
}

}  // namespace

Formula parse_formula(const SExpr& e, const std::set<Ident>& scope,
                      const std::map<Ident, int>& preds) {
  (void)preds;
  return parse_formula_impl(e, &scope);
}

Formula parse_formula_any(const SExpr& e) {
  return parse_formula_impl(e, nullptr);
}

ProblemFile parse_problem(const std::string& text) {
  std::vector<SExpr> forms = parse_sexprs(text);
  bool smt2 = !forms.empty() && forms[0].is_list() && !forms[0].list.empty() &&
              forms[0][0].is_sym("set-logic");
  return smt2 ? parse_smt2(forms) : parse_native(forms);
}

/* -------------------------------------------------------------------- */
/* Printing                                                              */
/* -------------------------------------------------------------------- */

namespace {

// Readable per-clause display names: strip the internal "$tagN_" prefix and
// dedupe within the clause.
std::map<Ident, std::string> display_names(const std::set<Ident>& vars,
                                           const std::map<Ident, int>& preds) {
  std::map<Ident, std::string> out;
  std::set<std::string> used;
  for (const auto& [p, a] : preds) {
    (void)a;
    used.insert(name_of(p));
  }
  for (Ident v : vars) {
    std::string base = name_of(v);
    if (!base.empty() && base[0] == '$') {
      auto us = base.find('_');
      base = (us == std::string::npos) ? base.substr(1) : base.substr(us + 1);
    }
    if (base.empty()) base = "v";
    std::string cand = base;
    int k = 2;
    while (used.count(cand)) cand = base + std::to_string(k++);
    used.insert(cand);
    out[v] = cand;
  }
  return out;
}

Substitution renaming_subst(const std::map<Ident, std::string>& names) {
  Substitution s;
  for (const auto& [v, nm] : names) s.map.emplace(v, tvar(intern(nm)));
  return s;
}

void print_clause_body(std::ostream& os, const std::vector<Atom>& atoms,
                       const Formula& formula, const Substitution& rn) {
  std::vector<std::string> parts;
  for (const auto& a : atoms) parts.push_back(to_string(rn.apply(a)));
  Formula f = rn.apply(formula);
  if (f->kind == FormKind::And) {
    for (const auto& k : f->kids) parts.push_back(to_string(k));
  } else if (f->kind != FormKind::True) {
    parts.push_back(to_string(f));
  }
  if (parts.empty()) {
    os << "true";
  } else if (parts.size() == 1) {
    os << parts[0];
  } else {
    os << "(and";
    for (const auto& p : parts) os << ' ' << p;
    os << ')';
  }
}

void print_quantified(std::ostream& os, const std::set<Ident>& vars,
                      const std::map<Ident, std::string>& names,
                      const std::function<void()>& body) {
  os << "(forall (";
  bool first = true;
  for (Ident v : vars) {
    if (!first) os << ' ';
    first = false;
    os << names.at(v);
  }
  os << ") ";
  body();
  os << ')';
}

void print_clause(std::ostream& os, const HornClause& hc,
                  const std::map<Ident, int>& preds) {
  auto names = display_names(hc.vars, preds);
  Substitution rn = renaming_subst(names);
  os << "(clause ";
  print_quantified(os, hc.vars, names, [&] {
    os << "(=> ";
    print_clause_body(os, hc.body_atoms, hc.body_formula, rn);
    os << ' ';
    if (hc.head)
      os << to_string(rn.apply(*hc.head));
    else
      os << "false";
    os << ')';
  });
  os << ")\n";
}

}  // namespace

std::string print_problem(const ProblemFile& p) {
  std::ostringstream os;
  for (const auto& [pred, arity] : p.hccs.predicates) {
    os << "(declare-pred " << name_of(pred);
    for (int i = 0; i < arity; ++i) os << " Int";
    os << ")\n";
  }
  for (const auto& [k, v] : p.options) os << "(option " << k << ' ' << v << ")\n";
  for (const auto& hc : p.hccs.definite) print_clause(os, hc, p.hccs.predicates);
  for (const auto& hc : p.hccs.goals) print_clause(os, hc, p.hccs.predicates);
  for (const auto& e : p.lemmas) {
    std::set<Ident> vars;
    for (const auto& a : e.premises) collect_fvs(a, vars);
    collect_fvs(e.premise_formula, vars);
    if (e.conclusion) collect_fvs(*e.conclusion, vars);
    auto names = display_names(vars, p.hccs.predicates);
    Substitution rn = renaming_subst(names);
    os << "(lemma ";
    print_quantified(os, vars, names, [&] {
      os << "(=> ";
      print_clause_body(os, e.premises, e.premise_formula, rn);
      os << ' ';
      if (e.conclusion)
        os << to_string(rn.apply(*e.conclusion));
      else
        os << "false";
      os << ')';
    });
    os << ")\n";
  }
  return os.str();
}

/* -------------------------------------------------------------------- */
/* Equality up to renaming                                               */
/* -------------------------------------------------------------------- */

namespace {

struct Bijection {
  std::map<Ident, Ident> fwd, bwd;
  bool add(Ident a, Ident b) {
    auto f = fwd.find(a);
    auto g = bwd.find(b);
    if (f == fwd.end() && g == bwd.end()) {
      fwd[a] = b;
      bwd[b] = a;
      return true;
    }
    return f != fwd.end() && f->second == b && g != bwd.end() &&
           g->second == a;
  }
};

bool alpha_eq(const Term& a, const Term& b, Bijection& bij) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Var: return bij.add(a->var, b->var);
    case TermKind::Lit: return a->lit == b->lit;
    case TermKind::Add:
    case TermKind::Mul:
      return alpha_eq(a->a, b->a, bij) && alpha_eq(a->b, b->b, bij);
    case TermKind::Neg: return alpha_eq(a->a, b->a, bij);
  }
  return false;
}

bool alpha_eq(const Formula& a, const Formula& b, Bijection& bij) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FormKind::Cmp:
      return a->op == b->op && alpha_eq(a->lhs, b->lhs, bij) &&
             alpha_eq(a->rhs, b->rhs, bij);
    case FormKind::True:
    case FormKind::False: return true;
    case FormKind::Not:
    case FormKind::And:
    case FormKind::Or: {
      if (a->kids.size() != b->kids.size()) return false;
      for (size_t i = 0; i < a->kids.size(); ++i)
        if (!alpha_eq(a->kids[i], b->kids[i], bij)) return false;
      return true;
    }
    case FormKind::Quant: {
      if (a->is_forall != b->is_forall || a->bound.size() != b->bound.size())
        return false;
      for (size_t i = 0; i < a->bound.size(); ++i)
        if (!bij.add(a->bound[i], b->bound[i])) return false;
      return alpha_eq(a->body, b->body, bij);
    }
  }
  return false;
}

bool alpha_eq(const Atom& a, const Atom& b, Bijection& bij) {
  if (a.pred != b.pred || a.args.size() != b.args.size()) return false;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!alpha_eq(a.args[i], b.args[i], bij)) return false;
  return true;
}

bool alpha_eq(const HornClause& a, const HornClause& b) {
  Bijection bij;
  if (a.head.has_value() != b.head.has_value()) return false;
  if (a.body_atoms.size() != b.body_atoms.size()) return false;
  if (a.head && !alpha_eq(*a.head, *b.head, bij)) return false;
  for (size_t i = 0; i < a.body_atoms.size(); ++i)
    if (!alpha_eq(a.body_atoms[i], b.body_atoms[i], bij)) return false;
  return alpha_eq(a.body_formula, b.body_formula, bij);
}

bool alpha_eq(const GammaEntry& a, const GammaEntry& b) {
  Bijection bij;
  if (a.premises.size() != b.premises.size() || a.pivot != b.pivot)
    return false;
  if (a.conclusion.has_value() != b.conclusion.has_value()) return false;
  for (size_t i = 0; i < a.premises.size(); ++i)
    if (!alpha_eq(a.premises[i], b.premises[i], bij)) return false;
  if (a.conclusion && !alpha_eq(*a.conclusion, *b.conclusion, bij))
    return false;
  return alpha_eq(a.premise_formula, b.premise_formula, bij);
}

}  // namespace

bool equal_upto_renaming(const ProblemFile& a, const ProblemFile& b) {
  if (a.hccs.predicates != b.hccs.predicates) return false;
  if (a.options != b.options) return false;
  if (a.hccs.definite.size() != b.hccs.definite.size()) return false;
  if (a.hccs.goals.size() != b.hccs.goals.size()) return false;
  if (a.lemmas.size() != b.lemmas.size()) return false;
  for (size_t i = 0; i < a.hccs.definite.size(); ++i)
    if (!alpha_eq(a.hccs.definite[i], b.hccs.definite[i])) return false;
  for (size_t i = 0; i < a.hccs.goals.size(); ++i)
    if (!alpha_eq(a.hccs.goals[i], b.hccs.goals[i])) return false;
  for (size_t i = 0; i < a.lemmas.size(); ++i)
    if (!alpha_eq(a.lemmas[i], b.lemmas[i])) return false;
  return true;
}

}  // namespace chcind
