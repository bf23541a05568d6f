#include "chcind/eval.hpp"

namespace chcind {

Int eval_term(const Term& t, const Env& env) {
  switch (t->kind) {
    case TermKind::Var: {
      auto found = env.find(t->var);
      if (found == env.end())
        throw EvalError("unbound variable " + name_of(t->var));
      return found->second;
    }
    case TermKind::Lit: return t->lit;
    case TermKind::Add: return eval_term(t->a, env) + eval_term(t->b, env);
    case TermKind::Mul: return eval_term(t->a, env) * eval_term(t->b, env);
    case TermKind::Neg: return -eval_term(t->a, env);
  }
  throw EvalError("bad term");
}

bool eval_formula(const Formula& f, const Env& env) {
  switch (f->kind) {
    case FormKind::Cmp: {
      Int l = eval_term(f->lhs, env);
      Int r = eval_term(f->rhs, env);
      switch (f->op) {
        case CmpOp::Le: return l <= r;
        case CmpOp::Lt: return l < r;
        case CmpOp::Eq: return l == r;
        case CmpOp::Ne: return l != r;
      }
      return false;
    }
    case FormKind::True: return true;
    case FormKind::False: return false;
    case FormKind::Not: return !eval_formula(f->kids[0], env);
    case FormKind::And:
      for (const auto& k : f->kids)
        if (!eval_formula(k, env)) return false;
      return true;
    case FormKind::Or:
      for (const auto& k : f->kids)
        if (eval_formula(k, env)) return true;
      return false;
    case FormKind::Quant:
      throw EvalError("cannot ground-evaluate a quantified formula");
  }
  throw EvalError("bad formula");
}

bool has_quantifier(const Formula& f) {
  switch (f->kind) {
    case FormKind::Quant: return true;
    case FormKind::Not:
    case FormKind::And:
    case FormKind::Or:
      for (const auto& k : f->kids)
        if (has_quantifier(k)) return true;
      return false;
    default: return false;
  }
}

}  // namespace chcind
