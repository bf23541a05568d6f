#include "chcind/certificate.hpp"

#include <algorithm>
#include <sstream>

namespace chcind {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Induct: return "induct";
    case Rule::Unfold: return "unfold";
    case Rule::ApplyBot: return "apply-bot";
    case Rule::ApplyP: return "apply-p";
    case Rule::Fold: return "fold";
    case Rule::ValidBot: return "valid-bot";
    case Rule::ValidP: return "valid-p";
  }
  return "?";
}

Snapshot snapshot_of(const Judgment& j) {
  Snapshot s;
  for (const auto& aa : j.atoms)
    s.atoms.push_back(Snapshot::SAtom{aa.atom, aa.marks, aa.inducted, aa.unfolded});
  s.knowledge = j.knowledge;
  s.target = j.target;
  return s;
}

bool equal(const Snapshot& a, const Snapshot& b) {
  if (a.atoms.size() != b.atoms.size()) return false;
  if (a.knowledge.size() != b.knowledge.size()) return false;
  if (a.target.has_value() != b.target.has_value()) return false;
  if (a.target && !equal(*a.target, *b.target)) return false;
  for (size_t i = 0; i < a.atoms.size(); ++i) {
    const auto& x = a.atoms[i];
    const auto& y = b.atoms[i];
    if (!equal(x.atom, y.atom) || x.marks != y.marks ||
        x.inducted != y.inducted || x.unfolded != y.unfolded)
      return false;
  }
  for (size_t i = 0; i < a.knowledge.size(); ++i)
    if (!equal(a.knowledge[i], b.knowledge[i])) return false;
  return true;
}

/* -------------------------------------------------------------------- */
/* Initial judgments                                                     */
/* -------------------------------------------------------------------- */

Judgment initial_goal_judgment(const HCCS& defs,
                               const std::vector<GammaEntry>& gamma0,
                               const HornClause& goal) {
  Judgment j;
  j.defs = &defs;
  j.gamma = gamma0;
  j.target = goal.head;  // nullopt for goal clauses
  for (const auto& a : goal.body_atoms) j.push_atom(a, {}, 0);
  Formula f = goal.body_formula;
  if (f->kind == FormKind::And) {
    for (const auto& k : f->kids) j.add_knowledge(k);
  } else if (f->kind != FormKind::True) {
    j.add_knowledge(f);
  }
  j.cex_vars.assign(goal.vars.begin(), goal.vars.end());
  return j;
}

Judgment initial_lemma_judgment(const HCCS& defs,
                                const std::vector<GammaEntry>& prior,
                                const GammaEntry& lemma) {
  HornClause as_goal;
  as_goal.head = lemma.conclusion;
  as_goal.body_atoms = lemma.premises;
  as_goal.body_formula = lemma.premise_formula;
  for (const auto& a : lemma.premises) collect_fvs(a, as_goal.vars);
  collect_fvs(lemma.premise_formula, as_goal.vars);
  if (lemma.conclusion) collect_fvs(*lemma.conclusion, as_goal.vars);
  return initial_goal_judgment(defs, prior, as_goal);
}

/* -------------------------------------------------------------------- */
/* Pruning                                                               */
/* -------------------------------------------------------------------- */

namespace {

void collect_used_entries(const ProofNode& n, std::set<int>& used) {
  if (n.rule == Rule::ApplyBot || n.rule == Rule::ApplyP)
    used.insert(n.entry_uid);
  for (const auto& c : n.children) collect_used_entries(c, used);
}

void prune_rec(ProofNode& n, const std::set<int>& used) {
  while (n.rule == Rule::Induct && !used.count(n.entry_uid)) {
    ProofNode child = std::move(n.children.at(0));
    n = std::move(child);
  }
  for (auto& c : n.children) prune_rec(c, used);
}

}  // namespace

void prune_unused_inductions(ProofNode& tree) {
  std::set<int> used;
  collect_used_entries(tree, used);
  prune_rec(tree, used);
}

/* -------------------------------------------------------------------- */
/* Derivation walk (shared by certificate building and replay)           */
/* -------------------------------------------------------------------- */

namespace {

struct Reject {
  std::string reason;
  std::string path;
};

struct Walker {
  SmtSession& smt;
  bool replaying;  // replay checks stored data; derive records it
  DeriveContext ctx;
  std::map<int, int> uid_to_index;

  [[noreturn]] void bail(const std::string& reason, const std::string& path) {
    if (replaying) throw Reject{reason, path};
    throw CertificateError("cannot derive certificate: " + reason + " at " +
                           path);
  }

  void walk(ProofNode& n, const Judgment& j, const std::string& path) {
    Snapshot snap = snapshot_of(j);
    if (replaying) {
      if (!n.state || !equal(*n.state, snap))
        bail("state snapshot does not match the derived judgment", path);
    } else {
      n.state = snap;
    }

    auto expect_children = [&](size_t k) {
      if (n.children.size() != k)
        bail("expected " + std::to_string(k) + " children, certificate has " +
                 std::to_string(n.children.size()),
             path);
    };

    switch (n.rule) {
      case Rule::ValidBot: {
        expect_children(0);
        if (j.target) bail("valid-bot with an atom target", path);
        if (!check_valid_bot(j, smt))
          bail("knowledge is not contradictory", path);
        return;
      }
      case Rule::ValidP: {
        expect_children(0);
        if (!j.target) bail("valid-p with bottom target", path);
        if (!check_valid_p(j, smt))
          bail("target atom is not entailed by the knowledge", path);
        return;
      }
      case Rule::Induct: {
        expect_children(1);
        auto child = apply_induct(j, n.occ, ctx, nullptr);
        if (!child) bail("induct is not applicable here", path);
        int index = (int)child->gamma.size() - 1;
        if (!replaying) {
          uid_to_index[n.entry_uid] = index;
          n.entry = index;
        } else if (n.entry != index) {
          bail("induct entry index mismatch", path);
        }
        walk(n.children[0], *child, path + " / induct");
        return;
      }
      case Rule::Unfold: {
        if (n.occ < 0 || n.occ >= (int)j.atoms.size())
          bail("unfold occurrence out of range", path);
        std::vector<Judgment> kids = apply_unfold(j, n.occ, ctx);
        expect_children(kids.size());
        for (size_t i = 0; i < kids.size(); ++i)
          walk(n.children[i], kids[i],
               path + " / unfold." + std::to_string(i));
        return;
      }
      case Rule::ApplyBot:
      case Rule::ApplyP: {
        expect_children(1);
        int index = n.entry;
        if (!replaying) {
          index = n.entry_uid < 1000000 ? n.entry_uid
                                        : uid_to_index.at(n.entry_uid);
          n.entry = index;
        }
        if (index < 0 || index >= (int)j.gamma.size())
          bail("gamma entry index out of range", path);
        Instantiation inst;
        inst.matched = n.matched;
        if (!replaying) {
          auto built =
              instantiation_from_matches(j, j.gamma[index], n.matched);
          if (!built) bail("cannot rebuild the substitution", path);
          inst = *built;
          n.subst = inst.subst;
        } else {
          inst.subst = n.subst;
          inst.key = "replay";
        }
        std::optional<Judgment> child;
        if (n.rule == Rule::ApplyBot)
          child = apply_bot(j, index, inst, smt);
        else
          child = apply_p(j, index, inst, n.replace, smt);
        if (!child) bail("rule side conditions fail", path);
        walk(n.children[0], *child,
             path + " / " + rule_name(n.rule));
        return;
      }
      case Rule::Fold: {
        expect_children(1);
        if (n.clause < 0 || n.clause >= (int)j.defs->definite.size())
          bail("fold clause index out of range", path);
        Instantiation inst;
        inst.matched = n.matched;
        if (!replaying) {
          GammaEntry tmpl = fold_template(*j.defs, n.clause);
          auto built = instantiation_from_matches(j, tmpl, n.matched);
          if (!built) bail("cannot rebuild the substitution", path);
          inst = *built;
          n.subst = inst.subst;
        } else {
          inst.subst = n.subst;
          inst.key = "replay";
        }
        auto child = apply_fold(j, n.clause, inst, smt);
        if (!child) bail("rule side conditions fail", path);
        walk(n.children[0], *child, path + " / fold");
        return;
      }
    }
    bail("unknown rule", path);
  }
};

}  // namespace

void derive_snapshots(ProofNode& tree, const Judgment& root, SmtSession& smt) {
  Walker w{smt, /*replaying=*/false, DeriveContext{}, {}};
  w.walk(tree, root, "root");
}

/* -------------------------------------------------------------------- */
/* Serialization                                                         */
/* -------------------------------------------------------------------- */

namespace {

void write_state(std::ostream& os, const Snapshot& s, int indent) {
  std::string pad(indent, ' ');
  os << pad << "(state\n" << pad << " (atoms";
  for (const auto& a : s.atoms) {
    os << "\n" << pad << "  (atom " << to_string(a.atom) << " (marks";
    for (Ident m : a.marks) os << ' ' << name_of(m);
    os << ") (inducted " << (a.inducted ? name_of(*a.inducted) : "none")
       << ") (unfolded " << (a.unfolded ? 1 : 0) << "))";
  }
  os << ")\n" << pad << " (knowledge";
  for (const auto& f : s.knowledge) os << "\n" << pad << "  " << to_string(f);
  os << ")\n" << pad << " (target "
     << (s.target ? to_string(*s.target) : "false") << "))\n";
}

void write_node(std::ostream& os, const ProofNode& n, int indent) {
  std::string pad(indent, ' ');
  os << pad << '(' << rule_name(n.rule) << '\n';
  switch (n.rule) {
    case Rule::Induct:
    case Rule::Unfold:
      os << pad << " (occ " << n.occ << ")\n";
      break;
    case Rule::ApplyBot:
    case Rule::ApplyP:
    case Rule::Fold: {
      if (n.rule == Rule::Fold)
        os << pad << " (clause " << n.clause << ")\n";
      else
        os << pad << " (entry " << n.entry << ")\n";
      os << pad << " (matched";
      for (int m : n.matched) os << ' ' << m;
      os << ")\n" << pad << " (subst";
      for (const auto& [v, t] : n.subst.map)
        os << " (" << name_of(v) << ' ' << to_string(t) << ')';
      os << ")\n";
      if (n.rule == Rule::ApplyP)
        os << pad << " (replace " << (n.replace ? 1 : 0) << ")\n";
      break;
    }
    default: break;
  }
  write_state(os, *n.state, indent + 1);
  if (n.rule == Rule::Unfold) {
    os << pad << " (children";
    if (n.children.empty()) {
      os << ')';
    } else {
      os << '\n';
      for (size_t i = 0; i < n.children.size(); ++i) {
        write_node(os, n.children[i], indent + 2);
        if (i + 1 < n.children.size()) os << '\n';
      }
      os << pad << " )";
    }
    os << '\n';
  } else {
    for (const auto& c : n.children) write_node(os, c, indent + 1);
  }
  os << pad << ")\n";
}

}  // namespace

std::string serialize(const Certificate& cert) {
  std::ostringstream os;
  os << "(certificate\n (version " << cert.version << ")\n";
  for (const auto& [idx, tree] : cert.lemma_proofs) {
    os << " (lemma-proof " << idx << '\n';
    write_node(os, tree, 2);
    os << " )\n";
  }
  for (const auto& [idx, tree] : cert.goal_proofs) {
    os << " (goal-proof " << idx << '\n';
    write_node(os, tree, 2);
    os << " )\n";
  }
  os << ")\n";
  return os.str();
}

/* -------------------------------------------------------------------- */
/* Parsing                                                               */
/* -------------------------------------------------------------------- */

namespace {

[[noreturn]] void bad(const SExpr& at, const std::string& msg) {
  throw CertificateError(msg + " at line " + std::to_string(at.line) +
                         ", column " + std::to_string(at.col));
}

int to_int(const SExpr& e) {
  if (!e.is_atom) bad(e, "expected an integer");
  try {
    return std::stoi(e.atom);
  } catch (...) {
    bad(e, "expected an integer");
  }
}

Atom parse_cert_atom(const SExpr& e) {
  if (!e.is_list() || e.list.empty() || !e[0].is_atom)
    bad(e, "expected an atom");
  Atom a{intern(e[0].atom), {}};
  for (size_t i = 1; i < e.size(); ++i) a.args.push_back(parse_term_any(e[i]));
  return a;
}

const SExpr* field(const SExpr& e, const std::string& tag) {
  for (const auto& k : e.list)
    if (k.is_list() && !k.list.empty() && k.list[0].is_sym(tag)) return &k;
  return nullptr;
}

Snapshot parse_state(const SExpr& e) {
  Snapshot s;
  const SExpr* atoms = field(e, "atoms");
  const SExpr* knowledge = field(e, "knowledge");
  const SExpr* target = field(e, "target");
  if (!atoms || !knowledge || !target || target->size() != 2)
    bad(e, "malformed state");
  for (size_t i = 1; i < atoms->size(); ++i) {
    const SExpr& a = (*atoms)[i];
    if (!a.is_list() || a.size() != 5 || !a[0].is_sym("atom"))
      bad(a, "malformed state atom");
    Snapshot::SAtom sa;
    sa.atom = parse_cert_atom(a[1]);
    const SExpr& marks = a[2];
    for (size_t m = 1; m < marks.size(); ++m)
      sa.marks.insert(intern(marks[m].atom));
    const SExpr& ind = a[3];
    if (ind.size() != 2) bad(ind, "malformed inducted field");
    if (!ind[1].is_sym("none")) sa.inducted = intern(ind[1].atom);
    const SExpr& unf = a[4];
    if (unf.size() != 2) bad(unf, "malformed unfolded field");
    sa.unfolded = to_int(unf[1]) != 0;
    s.atoms.push_back(std::move(sa));
  }
  for (size_t i = 1; i < knowledge->size(); ++i)
    s.knowledge.push_back(parse_formula_any((*knowledge)[i]));
  if ((*target)[1].is_sym("false"))
    s.target = std::nullopt;
  else
    s.target = parse_cert_atom((*target)[1]);
  return s;
}

ProofNode parse_node(const SExpr& e) {
  if (!e.is_list() || e.list.empty() || !e[0].is_atom)
    bad(e, "expected a proof node");
  ProofNode n;
  const std::string& tag = e[0].atom;
  if (tag == "induct") n.rule = Rule::Induct;
  else if (tag == "unfold") n.rule = Rule::Unfold;
  else if (tag == "apply-bot") n.rule = Rule::ApplyBot;
  else if (tag == "apply-p") n.rule = Rule::ApplyP;
  else if (tag == "fold") n.rule = Rule::Fold;
  else if (tag == "valid-bot") n.rule = Rule::ValidBot;
  else if (tag == "valid-p") n.rule = Rule::ValidP;
  else bad(e, "unknown rule '" + tag + "'");

  const SExpr* st = field(e, "state");
  if (!st) bad(e, "node without state");
  n.state = parse_state(*st);

  if (const SExpr* occ = field(e, "occ")) n.occ = to_int((*occ)[1]);
  if (const SExpr* en = field(e, "entry")) n.entry = to_int((*en)[1]);
  if (const SExpr* cl = field(e, "clause")) n.clause = to_int((*cl)[1]);
  if (const SExpr* re = field(e, "replace")) n.replace = to_int((*re)[1]) != 0;
  if (const SExpr* ma = field(e, "matched"))
    for (size_t i = 1; i < ma->size(); ++i)
      n.matched.push_back(to_int((*ma)[i]));
  if (const SExpr* su = field(e, "subst"))
    for (size_t i = 1; i < su->size(); ++i) {
      const SExpr& pair = (*su)[i];
      if (!pair.is_list() || pair.size() != 2 || !pair[0].is_atom)
        bad(pair, "malformed substitution entry");
      n.subst.map[intern(pair[0].atom)] = parse_term_any(pair[1]);
    }

  if (n.rule == Rule::Unfold) {
    const SExpr* ch = field(e, "children");
    if (!ch) bad(e, "unfold without children list");
    for (size_t i = 1; i < ch->size(); ++i)
      n.children.push_back(parse_node((*ch)[i]));
  } else if (n.rule != Rule::ValidBot && n.rule != Rule::ValidP) {
    // the single child is the last non-field list element
    for (const auto& k : e.list) {
      if (!k.is_list() || k.list.empty() || !k.list[0].is_atom) continue;
      const std::string& t = k.list[0].atom;
      if (t == "occ" || t == "entry" || t == "clause" || t == "matched" ||
          t == "subst" || t == "replace" || t == "state")
        continue;
      if (&k == &e.list[0]) continue;
      n.children.push_back(parse_node(k));
    }
    if (n.children.size() != 1) bad(e, "expected exactly one child node");
  }
  return n;
}

}  // namespace

Certificate parse_certificate(const std::string& text) {
  std::vector<SExpr> forms;
  try {
    forms = parse_sexprs(text);
  } catch (const ParseError& e) {
    throw CertificateError(std::string("malformed certificate: ") + e.what());
  }
  if (forms.size() != 1 || !forms[0].is_list() || forms[0].list.empty() ||
      !forms[0][0].is_sym("certificate"))
    throw CertificateError("not a certificate document");
  const SExpr& doc = forms[0];
  Certificate cert;
  const SExpr* ver = field(doc, "version");
  if (!ver || ver->size() != 2) throw CertificateError("missing version");
  cert.version = to_int((*ver)[1]);
  if (cert.version != 1)
    throw CertificateError("unsupported certificate version " +
                           std::to_string(cert.version));
  for (size_t i = 1; i < doc.size(); ++i) {
    const SExpr& f = doc[i];
    if (!f.is_list() || f.list.empty() || !f[0].is_atom) continue;
    if (f[0].is_sym("version")) continue;
    bool lemma = f[0].is_sym("lemma-proof");
    bool goal = f[0].is_sym("goal-proof");
    if (!lemma && !goal) bad(f, "unknown certificate section");
    if (f.size() != 3) bad(f, "proof section expects an index and a tree");
    int idx = to_int(f[1]);
    ProofNode tree = parse_node(f[2]);
    if (lemma)
      cert.lemma_proofs.emplace_back(idx, std::move(tree));
    else
      cert.goal_proofs.emplace_back(idx, std::move(tree));
  }
  return cert;
}

/* -------------------------------------------------------------------- */
/* Replay                                                                */
/* -------------------------------------------------------------------- */

ReplayResult replay(const Certificate& cert, const ProblemFile& problem,
                    SmtSession& smt) {
  auto run_tree = [&](const ProofNode& tree, const Judgment& root,
                      const std::string& what) -> std::optional<ReplayResult> {
    ProofNode copy = tree;
    Walker w{smt, /*replaying=*/true, DeriveContext{}, {}};
    try {
      w.walk(copy, root, what);
    } catch (const Reject& r) {
      return ReplayResult{false, r.reason, r.path};
    } catch (const std::exception& e) {
      return ReplayResult{false, std::string("replay failure: ") + e.what(),
                          what};
    }
    return std::nullopt;
  };

  // Every lemma and every goal must be covered exactly once.
  std::set<int> lemma_seen, goal_seen;
  for (const auto& [idx, tree] : cert.lemma_proofs) {
    (void)tree;
    if (idx < 0 || idx >= (int)problem.lemmas.size())
      return ReplayResult{false, "lemma index out of range (root mismatch)",
                          "lemma " + std::to_string(idx)};
    if (!lemma_seen.insert(idx).second)
      return ReplayResult{false, "duplicate lemma proof",
                          "lemma " + std::to_string(idx)};
  }
  for (const auto& [idx, tree] : cert.goal_proofs) {
    (void)tree;
    if (idx < 0 || idx >= (int)problem.hccs.goals.size())
      return ReplayResult{false, "goal index out of range (root mismatch)",
                          "goal " + std::to_string(idx)};
    if (!goal_seen.insert(idx).second)
      return ReplayResult{false, "duplicate goal proof",
                          "goal " + std::to_string(idx)};
  }
  if ((int)lemma_seen.size() != (int)problem.lemmas.size())
    return ReplayResult{false, "certificate does not cover all lemmas", ""};
  if ((int)goal_seen.size() != (int)problem.hccs.goals.size())
    return ReplayResult{false, "certificate does not cover all goals", ""};

  for (const auto& [idx, tree] : cert.lemma_proofs) {
    std::vector<GammaEntry> prior(problem.lemmas.begin(),
                                  problem.lemmas.begin() + idx);
    Judgment root =
        initial_lemma_judgment(problem.hccs, prior, problem.lemmas[idx]);
    if (auto r = run_tree(tree, root, "lemma " + std::to_string(idx)))
      return *r;
  }
  for (const auto& [idx, tree] : cert.goal_proofs) {
    Judgment root = initial_goal_judgment(problem.hccs, problem.lemmas,
                                          problem.hccs.goals[idx]);
    if (auto r = run_tree(tree, root, "goal " + std::to_string(idx)))
      return *r;
  }
  return ReplayResult{true, "", ""};
}

}  // namespace chcind
