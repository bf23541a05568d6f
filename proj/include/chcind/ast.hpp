#ifndef CHCIND_AST_HPP
#define CHCIND_AST_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace chcind {

using Int = boost::multiprecision::cpp_int;

// Interned identifier. All variable and predicate names live in one global
// namespace; comparison is by index. Names starting with '$' are reserved
// for internally generated variables and rejected by the parser.
struct Ident {
  uint32_t id = 0;
  auto operator<=>(const Ident&) const = default;
};

Ident intern(const std::string& name);
const std::string& name_of(Ident id);
bool is_reserved_name(const std::string& name);

// Deterministic source of fresh identifiers: "$<tag><counter>_<base>".
// Counters are scope-local so that independently derived goals (and replays
// of their certificates) mint identical names.
class FreshSource {
 public:
  explicit FreshSource(std::string tag) : tag_(std::move(tag)) {}
  Ident fresh(Ident base);
  int counter() const { return counter_; }

 private:
  std::string tag_;
  int counter_ = 0;
};

/* -------------------------------------------------------------------- */
/* Terms                                                                 */
/* -------------------------------------------------------------------- */

enum class TermKind { Var, Lit, Add, Mul, Neg };

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

struct TermNode {
  TermKind kind;
  Ident var{};   // Var
  Int lit;       // Lit
  Term a, b;     // Add/Mul both, Neg uses a
};

Term tvar(Ident v);
Term tvar(const std::string& v);
Term tlit(Int n);
Term tlit(long n);
Term tadd(Term a, Term b);
Term tmul(Term a, Term b);
Term tneg(Term a);
Term tsub(Term a, Term b);  // a + (- b)

/* -------------------------------------------------------------------- */
/* Formulas                                                              */
/* -------------------------------------------------------------------- */

enum class CmpOp { Le, Lt, Eq, Ne };
enum class FormKind { Cmp, True, False, Not, And, Or, Quant };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  FormKind kind;
  CmpOp op{};                 // Cmp
  Term lhs, rhs;              // Cmp
  std::vector<Formula> kids;  // Not (1), And, Or
  bool is_forall = false;     // Quant
  std::vector<Ident> bound;   // Quant
  Formula body;               // Quant
};

Formula ftrue();
Formula ffalse();
Formula fcmp(CmpOp op, Term l, Term r);
Formula fnot(Formula f);
Formula fand(std::vector<Formula> kids);
Formula for_(std::vector<Formula> kids);
Formula fquant(bool is_forall, std::vector<Ident> bound, Formula body);

// Conjunction of a list without changing shape of the pieces; empty -> true,
// singleton -> the piece itself.
Formula conjoin(const std::vector<Formula>& fs);

/* -------------------------------------------------------------------- */
/* Atoms                                                                 */
/* -------------------------------------------------------------------- */

struct Atom {
  Ident pred;
  std::vector<Term> args;
};

/* -------------------------------------------------------------------- */
/* Free variables, substitution, equality                                */
/* -------------------------------------------------------------------- */

void collect_fvs(const Term& t, std::set<Ident>& out);
void collect_fvs(const Formula& f, std::set<Ident>& out);
void collect_fvs(const Atom& a, std::set<Ident>& out);
std::set<Ident> fvs(const Term& t);
std::set<Ident> fvs(const Formula& f);
std::set<Ident> fvs(const Atom& a);

// Simultaneous capture-avoiding substitution.
struct Substitution {
  std::map<Ident, Term> map;

  bool contains(Ident v) const { return map.count(v) != 0; }
  Term apply(const Term& t) const;
  Formula apply(const Formula& f) const;
  Atom apply(const Atom& a) const;
  std::vector<Atom> apply(const std::vector<Atom>& as) const;
};

bool equal(const Term& a, const Term& b);
bool equal(const Formula& a, const Formula& b);
bool equal(const Atom& a, const Atom& b);

/* -------------------------------------------------------------------- */
/* Printing                                                              */
/* -------------------------------------------------------------------- */

// Canonical s-expression text, SMT-LIB compatible for quantifier-free parts
// (Ne prints as (not (= ...)), quantifiers as (forall ((x Int) ...) ...)).
std::string to_string(const Term& t);
std::string to_string(const Formula& f);
std::string to_string(const Atom& a);

// Key used for syntactic "new knowledge" detection: like to_string but
// equalities/disequalities order their operands canonically and quantified
// variables are renamed positionally.
std::string dedup_key(const Formula& f);

// Key identifying an atom up to annotations.
std::string atom_key(const Atom& a);

}  // namespace chcind

#endif
