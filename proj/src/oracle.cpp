#include "chcind/oracle.hpp"

#include "chcind/eval.hpp"

#include <algorithm>
#include <sstream>

namespace chcind {

bool GroundAtomSet::subset_of(const GroundAtomSet& other) const {
  for (const auto& [p, s] : tuples)
    for (const auto& t : s)
      if (!other.contains(p, t)) return false;
  return true;
}

std::string GroundAtomSet::dump() const {
  std::vector<std::string> lines;
  for (const auto& [p, s] : tuples) {
    for (const auto& t : s) {
      std::ostringstream os;
      os << name_of(p) << '(';
      for (size_t i = 0; i < t.size(); ++i) {
        if (i) os << ',';
        os << t[i];
      }
      os << ')';
      lines.push_back(os.str());
    }
  }
  std::sort(lines.begin(), lines.end());
  std::ostringstream os;
  for (const auto& l : lines) os << l << '\n';
  return os.str();
}

namespace {

// term = sum of coeff*var over unbound vars, plus a constant. nullopt when
// the unbound part is nonlinear (a product of two unbound variables).
struct LinearForm {
  std::map<Ident, Int> coeffs;
  Int constant;
};

std::optional<LinearForm> linearize(const Term& t, const Env& env) {
  switch (t->kind) {
    case TermKind::Var: {
      auto found = env.find(t->var);
      LinearForm lf;
      if (found != env.end())
        lf.constant = found->second;
      else
        lf.coeffs[t->var] = 1;
      return lf;
    }
    case TermKind::Lit: return LinearForm{{}, t->lit};
    case TermKind::Neg: {
      auto a = linearize(t->a, env);
      if (!a) return std::nullopt;
      for (auto& [v, c] : a->coeffs) {
        (void)v;
        c = -c;
      }
      a->constant = -a->constant;
      return a;
    }
    case TermKind::Add: {
      auto a = linearize(t->a, env);
      auto b = linearize(t->b, env);
      if (!a || !b) return std::nullopt;
      for (const auto& [v, c] : b->coeffs) {
        a->coeffs[v] += c;
        if (a->coeffs[v] == 0) a->coeffs.erase(v);
      }
      a->constant += b->constant;
      return a;
    }
    case TermKind::Mul: {
      auto a = linearize(t->a, env);
      auto b = linearize(t->b, env);
      if (!a || !b) return std::nullopt;
      if (!a->coeffs.empty() && !b->coeffs.empty()) return std::nullopt;
      const LinearForm& lin = a->coeffs.empty() ? *b : *a;
      const Int k = a->coeffs.empty() ? a->constant : b->constant;
      LinearForm out;
      out.constant = lin.constant * k;
      if (k != 0)
        for (const auto& [v, c] : lin.coeffs) out.coeffs[v] = c * k;
      return out;
    }
  }
  return std::nullopt;
}

enum class MatchResult { Fail, Ok, Ambiguous };

// Forces term == value under env, binding at most one variable.
MatchResult match_value(const Term& t, const Int& value, Env& env) {
  auto lf = linearize(t, env);
  if (!lf) return MatchResult::Ambiguous;
  if (lf->coeffs.empty()) return lf->constant == value ? MatchResult::Ok
                                                       : MatchResult::Fail;
  if (lf->coeffs.size() > 1) return MatchResult::Ambiguous;
  auto [v, c] = *lf->coeffs.begin();
  Int num = value - lf->constant;
  if (num % c != 0) return MatchResult::Fail;
  env[v] = num / c;
  return MatchResult::Ok;
}

std::vector<Formula> conjuncts_of(const Formula& f) {
  if (f->kind == FormKind::And) return f->kids;
  if (f->kind == FormKind::True) return {};
  return {f};
}

// Binds variables forced by equality conjuncts; false on a refuted conjunct.
bool propagate_equalities(const std::vector<Formula>& conjs, Env& env) {
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& c : conjs) {
      if (c->kind != FormKind::Cmp || c->op != CmpOp::Eq) continue;
      auto l = linearize(c->lhs, env);
      auto r = linearize(c->rhs, env);
      if (!l || !r) continue;
      // l - r == 0
      LinearForm d = *l;
      for (const auto& [v, k] : r->coeffs) {
        d.coeffs[v] -= k;
        if (d.coeffs[v] == 0) d.coeffs.erase(v);
      }
      d.constant -= r->constant;
      if (d.coeffs.empty()) {
        if (d.constant != 0) return false;
        continue;
      }
      if (d.coeffs.size() == 1) {
        auto [v, k] = *d.coeffs.begin();
        if (d.constant % k != 0) return false;
        env[v] = -d.constant / k;
        progress = true;
      }
    }
  }
  return true;
}

bool all_bound(const std::set<Ident>& vars, const Env& env) {
  return std::all_of(vars.begin(), vars.end(),
                     [&](Ident v) { return env.count(v) != 0; });
}

/* ------------------------- bottom-up fixpoint ------------------------- */

struct BottomUp {
  const HCCS& defs;
  const Int& bound;
  GroundAtomSet current;
  GroundAtomSet next;

  bool in_box(const Int& v) const { return v >= -bound && v <= bound; }

  template <typename K>
  void enumerate_then(const std::vector<Ident>& todo, size_t i, Env env,
                      const K& k) {
    if (i == todo.size()) {
      k(env);
      return;
    }
    if (env.count(todo[i])) {
      enumerate_then(todo, i + 1, std::move(env), k);
      return;
    }
    for (Int v = -bound; v <= bound; ++v) {
      env[todo[i]] = v;
      enumerate_then(todo, i + 1, env, k);
    }
  }

  void finalize(const HornClause& hc, Env env) {
    std::set<Ident> remaining;
    collect_fvs(hc.body_formula, remaining);
    collect_fvs(*hc.head, remaining);
    std::vector<Ident> todo;
    for (Ident v : remaining)
      if (!env.count(v)) todo.push_back(v);
    enumerate_then(todo, 0, std::move(env), [&](const Env& full) {
      if (!eval_formula(hc.body_formula, full)) return;
      std::vector<Int> tuple;
      for (const auto& arg : hc.head->args) {
        Int v = eval_term(arg, full);
        if (!in_box(v)) return;
        tuple.push_back(std::move(v));
      }
      next.tuples[hc.head->pred].insert(std::move(tuple));
    });
  }

  // Matches argument positions k.. of one body atom against a known tuple,
  // then continues with the next atom.
  void match_atom(const HornClause& hc, size_t atom_idx,
                  const std::vector<Int>& tuple, size_t k, Env env) {
    const Atom& a = hc.body_atoms[atom_idx];
    if (k == a.args.size()) {
      join(hc, atom_idx + 1, std::move(env));
      return;
    }
    switch (match_value(a.args[k], tuple[k], env)) {
      case MatchResult::Fail: return;
      case MatchResult::Ok:
        match_atom(hc, atom_idx, tuple, k + 1, std::move(env));
        return;
      case MatchResult::Ambiguous: {
        std::set<Ident> vs = fvs(a.args[k]);
        std::vector<Ident> todo(vs.begin(), vs.end());
        enumerate_then(todo, 0, std::move(env), [&](const Env& full) {
          if (eval_term(a.args[k], full) == tuple[k])
            match_atom(hc, atom_idx, tuple, k + 1, full);
        });
        return;
      }
    }
  }

  void join(const HornClause& hc, size_t atom_idx, Env env) {
    if (atom_idx == hc.body_atoms.size()) {
      finalize(hc, std::move(env));
      return;
    }
    auto found = current.tuples.find(hc.body_atoms[atom_idx].pred);
    if (found == current.tuples.end()) return;
    for (const auto& tuple : found->second)
      match_atom(hc, atom_idx, tuple, 0, env);
  }

  void step() {
    next = current;
    for (const auto& hc : defs.definite) join(hc, 0, Env{});
    current = std::move(next);
  }
};

}  // namespace

GroundAtomSet bounded_least_model(const HCCS& defs, const Int& bound,
                                  int iterations) {
  BottomUp bu{defs, bound, {}, {}};
  for (int i = 0; i < iterations; ++i) {
    size_t before = bu.current.total();
    bu.step();
    if (bu.current.total() == before) break;  // fixpoint on the box
  }
  return bu.current;
}

/* ------------------------- top-down validation ------------------------ */

namespace {

std::string trace_line(Ident pred, const std::vector<Int>& values,
                       size_t clause_idx) {
  std::ostringstream os;
  os << name_of(pred) << '(';
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) os << ',';
    os << values[i];
  }
  os << ") by clause " << clause_idx;
  return os.str();
}

struct TopDown {
  const HCCS& defs;
  SmtSession* smt;
  std::vector<std::string>* traces;

  bool derive(Ident pred, const std::vector<Int>& values, int depth);

  bool try_clause(const HornClause& hc, const std::vector<Int>& values,
                  int depth) {
    if (!hc.body_atoms.empty() && depth <= 0) return false;
    Env env;
    std::vector<Formula> constraints = conjuncts_of(hc.body_formula);
    for (size_t i = 0; i < values.size(); ++i)
      constraints.push_back(
          fcmp(CmpOp::Eq, hc.head->args[i], tlit(values[i])));
    if (!propagate_equalities(constraints, env)) return false;

    std::set<Ident> vars = hc.vars;
    if (all_bound(vars, env)) {
      for (const auto& c : constraints)
        if (!eval_formula(c, env)) return false;
      return recurse(hc, env, depth);
    }

    if (!smt) return false;
    // Ask the solver for assignments of the undetermined variables, blocking
    // failed ones.
    std::vector<Formula> query = constraints;
    for (const auto& [v, n] : env)
      query.push_back(fcmp(CmpOp::Eq, tvar(v), tlit(n)));
    for (int attempt = 0; attempt < 8; ++attempt) {
      SatResult r = smt->check_sat(conjoin(query));
      if (r.kind != SatResult::Sat) return false;
      Env full;
      for (Ident v : vars) {
        auto found = r.model.find(v);
        full[v] = found == r.model.end() ? Int(0) : found->second;
      }
      bool ok = true;
      for (const auto& c : constraints)
        if (!eval_formula(c, full)) ok = false;
      if (ok && recurse(hc, full, depth)) return true;
      std::vector<Formula> block;
      for (Ident v : vars)
        block.push_back(fcmp(CmpOp::Ne, tvar(v), tlit(full[v])));
      query.push_back(block.size() == 1 ? block[0] : for_(block));
    }
    return false;
  }

  bool recurse(const HornClause& hc, const Env& env, int depth) {
    for (const auto& a : hc.body_atoms) {
      std::vector<Int> vals;
      for (const auto& arg : a.args) vals.push_back(eval_term(arg, env));
      if (!derive(a.pred, vals, depth - 1)) return false;
    }
    return true;
  }
};

bool TopDown::derive(Ident pred, const std::vector<Int>& values, int depth) {
  if (depth < 0) return false;
  for (size_t i = 0; i < defs.definite.size(); ++i) {
    const HornClause& hc = defs.definite[i];
    if (hc.head->pred != pred) continue;
    if (try_clause(hc, values, depth)) {
      if (traces) traces->push_back(trace_line(pred, values, i));
      return true;
    }
  }
  return false;
}

}  // namespace

bool derivable(const HCCS& defs, Ident pred, const std::vector<Int>& values,
               int depth, SmtSession* smt, std::vector<std::string>* traces) {
  TopDown td{defs, smt, traces};
  return td.derive(pred, values, depth);
}

bool validate_counterexample(const HCCS& defs, const HornClause& goal,
                             const Counterexample& cex, int depth,
                             SmtSession* smt,
                             std::vector<std::string>* traces) {
  Env env;
  for (Ident v : goal.vars) {
    auto found = cex.model.find(v);
    if (found == cex.model.end()) return false;
    env[v] = found->second;
  }
  if (!eval_formula(goal.body_formula, env)) return false;
  for (const auto& a : goal.body_atoms) {
    std::vector<Int> vals;
    for (const auto& arg : a.args) vals.push_back(eval_term(arg, env));
    if (!derivable(defs, a.pred, vals, depth, smt, traces)) return false;
  }
  return true;
}

std::optional<Model> detect_refutation(const Judgment& j, SmtSession& smt) {
  if (j.target) return std::nullopt;
  for (const auto& aa : j.atoms)
    if (!aa.unfolded) return std::nullopt;
  SatResult r = smt.check_sat(j.knowledge_conj());
  if (r.kind != SatResult::Sat) return std::nullopt;
  Model restricted;
  for (Ident v : j.cex_vars) {
    auto found = r.model.find(v);
    restricted[v] = found == r.model.end() ? Int(0) : found->second;
  }
  return restricted;
}

}  // namespace chcind
