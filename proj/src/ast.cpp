#include "chcind/ast.hpp"

#include <mutex>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace chcind {

/* -------------------------------------------------------------------- */
/* Interner                                                              */
/* -------------------------------------------------------------------- */

namespace {
struct Interner {
  std::mutex mu;
  std::vector<std::string> names;
  std::unordered_map<std::string, uint32_t> index;
};
Interner& interner() {
  static Interner it;
  return it;
}
}  // namespace

Ident intern(const std::string& name) {
  Interner& it = interner();
  std::lock_guard<std::mutex> lock(it.mu);
  auto found = it.index.find(name);
  if (found != it.index.end()) return Ident{found->second};
  uint32_t id = static_cast<uint32_t>(it.names.size());
  it.names.push_back(name);
  it.index.emplace(name, id);
  return Ident{id};
}

const std::string& name_of(Ident id) {
  Interner& it = interner();
  std::lock_guard<std::mutex> lock(it.mu);
  return it.names.at(id.id);
}

bool is_reserved_name(const std::string& name) {
  return !name.empty() && name[0] == '$';
}

Ident FreshSource::fresh(Ident base) {
  const std::string& full = name_of(base);
  // Strip a previous "$<tag><n>_" prefix so refreshing stays readable.
  std::string stem = full;
  if (!stem.empty() && stem[0] == '$') {
    auto us = stem.find('_');
    stem = (us == std::string::npos) ? stem.substr(1) : stem.substr(us + 1);
  }
  if (stem.empty()) stem = "v";
  std::ostringstream os;
  os << '$' << tag_ << counter_++ << '_' << stem;
  return intern(os.str());
}

/* -------------------------------------------------------------------- */
/* Constructors                                                          */
/* -------------------------------------------------------------------- */

Term tvar(Ident v) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Var;
  n->var = v;
  return n;
}
Term tvar(const std::string& v) { return tvar(intern(v)); }
Term tlit(Int n) {
  auto t = std::make_shared<TermNode>();
  t->kind = TermKind::Lit;
  t->lit = std::move(n);
  return t;
}
Term tlit(long n) { return tlit(Int(n)); }
Term tadd(Term a, Term b) {
  auto t = std::make_shared<TermNode>();
  t->kind = TermKind::Add;
  t->a = std::move(a);
  t->b = std::move(b);
  return t;
}
Term tmul(Term a, Term b) {
  auto t = std::make_shared<TermNode>();
  t->kind = TermKind::Mul;
  t->a = std::move(a);
  t->b = std::move(b);
  return t;
}
Term tneg(Term a) {
  auto t = std::make_shared<TermNode>();
  t->kind = TermKind::Neg;
  t->a = std::move(a);
  return t;
}
Term tsub(Term a, Term b) { return tadd(std::move(a), tneg(std::move(b))); }

Formula ftrue() {
  static Formula f = [] {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FormKind::True;
    return n;
  }();
  return f;
}
Formula ffalse() {
  static Formula f = [] {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FormKind::False;
    return n;
  }();
  return f;
}
Formula fcmp(CmpOp op, Term l, Term r) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = FormKind::Cmp;
  n->op = op;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}
Formula fnot(Formula f) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = FormKind::Not;
  n->kids.push_back(std::move(f));
  return n;
}
Formula fand(std::vector<Formula> kids) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = FormKind::And;
  n->kids = std::move(kids);
  return n;
}
Formula for_(std::vector<Formula> kids) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = FormKind::Or;
  n->kids = std::move(kids);
  return n;
}
Formula fquant(bool is_forall, std::vector<Ident> bound, Formula body) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = FormKind::Quant;
  n->is_forall = is_forall;
  n->bound = std::move(bound);
  n->body = std::move(body);
  return n;
}

Formula conjoin(const std::vector<Formula>& fs) {
  if (fs.empty()) return ftrue();
  if (fs.size() == 1) return fs[0];
  return fand(fs);
}

/* -------------------------------------------------------------------- */
/* Free variables                                                        */
/* -------------------------------------------------------------------- */

void collect_fvs(const Term& t, std::set<Ident>& out) {
  switch (t->kind) {
    case TermKind::Var: out.insert(t->var); break;
    case TermKind::Lit: break;
    case TermKind::Add:
    case TermKind::Mul:
      collect_fvs(t->a, out);
      collect_fvs(t->b, out);
      break;
    case TermKind::Neg: collect_fvs(t->a, out); break;
  }
}

void collect_fvs(const Formula& f, std::set<Ident>& out) {
  switch (f->kind) {
    case FormKind::Cmp:
      collect_fvs(f->lhs, out);
      collect_fvs(f->rhs, out);
      break;
    case FormKind::True:
    case FormKind::False: break;
    case FormKind::Not:
    case FormKind::And:
    case FormKind::Or:
      for (const auto& k : f->kids) collect_fvs(k, out);
      break;
    case FormKind::Quant: {
      std::set<Ident> inner;
      collect_fvs(f->body, inner);
      for (Ident b : f->bound) inner.erase(b);
      out.insert(inner.begin(), inner.end());
      break;
    }
  }
}

void collect_fvs(const Atom& a, std::set<Ident>& out) {
  for (const auto& t : a.args) collect_fvs(t, out);
}

std::set<Ident> fvs(const Term& t) {
  std::set<Ident> s;
  collect_fvs(t, s);
  return s;
}
std::set<Ident> fvs(const Formula& f) {
  std::set<Ident> s;
  collect_fvs(f, s);
  return s;
}
std::set<Ident> fvs(const Atom& a) {
  std::set<Ident> s;
  collect_fvs(a, s);
  return s;
}

/* -------------------------------------------------------------------- */
/* Substitution                                                          */
/* -------------------------------------------------------------------- */

Term Substitution::apply(const Term& t) const {
  switch (t->kind) {
    case TermKind::Var: {
      auto found = map.find(t->var);
      return found == map.end() ? t : found->second;
    }
    case TermKind::Lit: return t;
    case TermKind::Add: return tadd(apply(t->a), apply(t->b));
    case TermKind::Mul: return tmul(apply(t->a), apply(t->b));
    case TermKind::Neg: return tneg(apply(t->a));
  }
  return t;
}

Formula Substitution::apply(const Formula& f) const {
  switch (f->kind) {
    case FormKind::Cmp: return fcmp(f->op, apply(f->lhs), apply(f->rhs));
    case FormKind::True:
    case FormKind::False: return f;
    case FormKind::Not: return fnot(apply(f->kids[0]));
    case FormKind::And:
    case FormKind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f->kids.size());
      for (const auto& k : f->kids) kids.push_back(apply(k));
      return f->kind == FormKind::And ? fand(std::move(kids))
                                      : for_(std::move(kids));
    }
    case FormKind::Quant: {
      Substitution inner = *this;
      for (Ident b : f->bound) inner.map.erase(b);
      // Capture check: replacement terms must not mention a bound variable.
      std::set<Ident> range_vars;
      for (const auto& [v, t] : inner.map) {
        (void)v;
        collect_fvs(t, range_vars);
      }
      std::vector<Ident> bound = f->bound;
      Formula body = f->body;
      for (Ident& b : bound) {
        if (range_vars.count(b)) {
          static FreshSource cap_source("c");
          Ident nb = cap_source.fresh(b);
          Substitution rename;
          rename.map.emplace(b, tvar(nb));
          body = rename.apply(body);
          b = nb;
        }
      }
      if (inner.map.empty()) return fquant(f->is_forall, bound, body);
      return fquant(f->is_forall, bound, inner.apply(body));
    }
  }
  return f;
}

Atom Substitution::apply(const Atom& a) const {
  Atom out{a.pred, {}};
  out.args.reserve(a.args.size());
  for (const auto& t : a.args) out.args.push_back(apply(t));
  return out;
}

std::vector<Atom> Substitution::apply(const std::vector<Atom>& as) const {
  std::vector<Atom> out;
  out.reserve(as.size());
  for (const auto& a : as) out.push_back(apply(a));
  return out;
}

/* -------------------------------------------------------------------- */
/* Equality                                                              */
/* -------------------------------------------------------------------- */

bool equal(const Term& a, const Term& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Var: return a->var == b->var;
    case TermKind::Lit: return a->lit == b->lit;
    case TermKind::Add:
    case TermKind::Mul: return equal(a->a, b->a) && equal(a->b, b->b);
    case TermKind::Neg: return equal(a->a, b->a);
  }
  return false;
}

bool equal(const Formula& a, const Formula& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FormKind::Cmp:
      return a->op == b->op && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    case FormKind::True:
    case FormKind::False: return true;
    case FormKind::Not:
    case FormKind::And:
    case FormKind::Or: {
      if (a->kids.size() != b->kids.size()) return false;
      for (size_t i = 0; i < a->kids.size(); ++i)
        if (!equal(a->kids[i], b->kids[i])) return false;
      return true;
    }
    case FormKind::Quant:
      return a->is_forall == b->is_forall && a->bound == b->bound &&
             equal(a->body, b->body);
  }
  return false;
}

bool equal(const Atom& a, const Atom& b) {
  if (a.pred != b.pred || a.args.size() != b.args.size()) return false;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!equal(a.args[i], b.args[i])) return false;
  return true;
}

/* -------------------------------------------------------------------- */
/* Printing                                                              */
/* -------------------------------------------------------------------- */

namespace {

void print_term(std::ostream& os, const Term& t) {
  switch (t->kind) {
    case TermKind::Var: os << name_of(t->var); break;
    case TermKind::Lit:
      if (t->lit < 0)
        os << "(- " << -t->lit << ")";
      else
        os << t->lit;
      break;
    case TermKind::Add:
      os << "(+ ";
      print_term(os, t->a);
      os << ' ';
      print_term(os, t->b);
      os << ')';
      break;
    case TermKind::Mul:
      os << "(* ";
      print_term(os, t->a);
      os << ' ';
      print_term(os, t->b);
      os << ')';
      break;
    case TermKind::Neg:
      os << "(- ";
      print_term(os, t->a);
      os << ')';
      break;
  }
}

// renames, when non-null, maps bound variables to positional names so the
// printed key is alpha-invariant.
void print_formula(std::ostream& os, const Formula& f,
                   std::map<Ident, std::string>* renames, int* next_bound,
                   bool canonical_eq);

void print_term_renamed(std::ostream& os, const Term& t,
                        std::map<Ident, std::string>* renames) {
  if (!renames) {
    print_term(os, t);
    return;
  }
  switch (t->kind) {
    case TermKind::Var: {
      auto found = renames->find(t->var);
      os << (found != renames->end() ? found->second : name_of(t->var));
      break;
    }
    case TermKind::Lit: print_term(os, t); break;
    case TermKind::Add:
    case TermKind::Mul:
      os << (t->kind == TermKind::Add ? "(+ " : "(* ");
      print_term_renamed(os, t->a, renames);
      os << ' ';
      print_term_renamed(os, t->b, renames);
      os << ')';
      break;
    case TermKind::Neg:
      os << "(- ";
      print_term_renamed(os, t->a, renames);
      os << ')';
      break;
  }
}

void print_formula(std::ostream& os, const Formula& f,
                   std::map<Ident, std::string>* renames, int* next_bound,
                   bool canonical_eq) {
  switch (f->kind) {
    case FormKind::Cmp: {
      std::ostringstream l, r;
      print_term_renamed(l, f->lhs, renames);
      print_term_renamed(r, f->rhs, renames);
      std::string ls = l.str(), rs = r.str();
      bool symmetric = f->op == CmpOp::Eq || f->op == CmpOp::Ne;
      if (canonical_eq && symmetric && rs < ls) std::swap(ls, rs);
      switch (f->op) {
        case CmpOp::Le: os << "(<= " << ls << ' ' << rs << ')'; break;
        case CmpOp::Lt: os << "(< " << ls << ' ' << rs << ')'; break;
        case CmpOp::Eq: os << "(= " << ls << ' ' << rs << ')'; break;
        case CmpOp::Ne: os << "(not (= " << ls << ' ' << rs << "))"; break;
      }
      break;
    }
    case FormKind::True: os << "true"; break;
    case FormKind::False: os << "false"; break;
    case FormKind::Not:
      os << "(not ";
      print_formula(os, f->kids[0], renames, next_bound, canonical_eq);
      os << ')';
      break;
    case FormKind::And:
    case FormKind::Or: {
      if (f->kids.empty()) {
        os << (f->kind == FormKind::And ? "true" : "false");
        break;
      }
      if (f->kids.size() == 1) {
        print_formula(os, f->kids[0], renames, next_bound, canonical_eq);
        break;
      }
      os << (f->kind == FormKind::And ? "(and" : "(or");
      for (const auto& k : f->kids) {
        os << ' ';
        print_formula(os, k, renames, next_bound, canonical_eq);
      }
      os << ')';
      break;
    }
    case FormKind::Quant: {
      os << (f->is_forall ? "(forall (" : "(exists (");
      std::map<Ident, std::string> local;
      std::map<Ident, std::string>* rn = renames;
      if (renames && next_bound) {
        local = *renames;
        rn = &local;
      }
      bool first = true;
      for (Ident b : f->bound) {
        if (!first) os << ' ';
        first = false;
        std::string nm = name_of(b);
        if (rn && next_bound) {
          nm = "?b" + std::to_string((*next_bound)++);
          (*rn)[b] = nm;
        }
        os << '(' << nm << " Int)";
      }
      os << ") ";
      print_formula(os, f->body, rn, next_bound, canonical_eq);
      os << ')';
      break;
    }
  }
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t);
  return os.str();
}

std::string to_string(const Formula& f) {
  std::ostringstream os;
  print_formula(os, f, nullptr, nullptr, false);
  return os.str();
}

std::string to_string(const Atom& a) {
  std::ostringstream os;
  os << '(' << name_of(a.pred);
  for (const auto& t : a.args) {
    os << ' ';
    print_term(os, t);
  }
  os << ')';
  return os.str();
}

std::string dedup_key(const Formula& f) {
  std::ostringstream os;
  std::map<Ident, std::string> renames;
  int next_bound = 0;
  print_formula(os, f, &renames, &next_bound, true);
  return os.str();
}

std::string atom_key(const Atom& a) { return to_string(a); }

}  // namespace chcind
