#ifndef CHCIND_ORACLE_HPP
#define CHCIND_ORACLE_HPP

#include "chcind/judgment.hpp"
#include "chcind/smt.hpp"

namespace chcind {

struct GroundAtomSet {
  std::map<Ident, std::set<std::vector<Int>>> tuples;

  bool contains(Ident p, const std::vector<Int>& t) const {
    auto found = tuples.find(p);
    return found != tuples.end() && found->second.count(t) != 0;
  }
  size_t total() const {
    size_t n = 0;
    for (const auto& [p, s] : tuples) {
      (void)p;
      n += s.size();
    }
    return n;
  }
  bool subset_of(const GroundAtomSet& other) const;
  // Sorted text lines "P(v1,...,vn)", one per tuple.
  std::string dump() const;
};

// k-fold application of the one-step consequence operator starting from the
// empty interpretation, truncated to tuples whose components lie in
// [-bound, bound]. Monotone in k; an under-approximation of the least model
// intersected with the box whenever derivations stay inside the box.
GroundAtomSet bounded_least_model(const HCCS& defs, const Int& bound,
                                  int iterations);

struct Counterexample {
  int goal_index = -1;
  Model model;                           // goal-clause variables -> values
  std::vector<std::string> derivations;  // optional per-atom traces
};

// True iff the goal's constraint evaluates true under the model and every
// body atom's ground instance is derivable from the definite clauses within
// the given depth (top-down search; SMT only for clause variables that
// constraint propagation cannot determine).
bool validate_counterexample(const HCCS& defs, const HornClause& goal,
                             const Counterexample& cex, int depth,
                             SmtSession* smt = nullptr,
                             std::vector<std::string>* traces = nullptr);

// Ground derivability of a single atom, exposed for the oracle agreement
// tests.
bool derivable(const HCCS& defs, Ident pred, const std::vector<Int>& values,
               int depth, SmtSession* smt = nullptr,
               std::vector<std::string>* traces = nullptr);

// A judgment with bottom target refutes its goal once every atom occurrence
// has been unfolded and the knowledge is satisfiable; the model (restricted
// to the goal-clause variables) is the counterexample.
std::optional<Model> detect_refutation(const Judgment& j, SmtSession& smt);

}  // namespace chcind

#endif
