#include "chcind/solve.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace chcind;

namespace {

constexpr int kExitSat = 0;
constexpr int kExitUnsat = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitLemmaRejected = 3;
constexpr int kExitUsage = 4;
constexpr int kExitIo = 5;
constexpr int kExitInfra = 6;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct CommonArgs {
  std::string solver_cmd;
  int smt_timeout_ms = 2000;
  long timeout_s = 60;
  SolverOptions opts;
};

void add_solver_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--solver", args.solver_cmd,
                  "SMT solver command (default: z3 -in, or $CHCIND_SOLVER)");
  cmd->add_option("--smt-timeout", args.smt_timeout_ms,
                  "per-query SMT timeout in milliseconds");
  cmd->add_option("--timeout", args.timeout_s, "whole-run timeout in seconds");
  cmd->add_option("--max-inductions", args.opts.limits.max_inductions,
                  "inductions per branch");
  cmd->add_option("--max-unfolds", args.opts.limits.max_unfolds_per_branch,
                  "unfoldings per branch");
  cmd->add_option("--max-rules", args.opts.limits.max_rule_applications,
                  "total rule applications per goal");
  cmd->add_option("--max-lemma-depth", args.opts.max_lemma_depth,
                  "chain length for lemma/fold-added atoms");
  cmd->add_flag("--apply-p-replace", args.opts.apply_p_replace,
                "replace the matched atom instead of keeping it");
  cmd->add_flag("--unfold-without-induct", args.opts.unfold_without_induct,
                "do not pair Unfold with a preceding Induct");
  cmd->add_option("--jobs", args.opts.jobs, "parallel goal workers");
}

SmtConfig make_smt_config(const CommonArgs& args, bool validate_models) {
  SmtConfig cfg;
  std::string cmd = args.solver_cmd;
  if (cmd.empty()) {
    const char* env = std::getenv("CHCIND_SOLVER");
    cmd = env ? env : "z3 -in";
  }
  cfg.command = split_command(cmd);
  cfg.timeout_ms = args.smt_timeout_ms;
  cfg.validate_models = validate_models;
  return cfg;
}

std::string verdict_line(Verdict v) {
  switch (v) {
    case Verdict::Solvable: return "result: sat";
    case Verdict::Unsolvable: return "result: unsat";
    default: return "result: unknown";
  }
}

std::string cex_to_text(const ProblemFile& problem, const Counterexample& cex) {
  std::ostringstream os;
  os << "(counterexample\n (goal " << cex.goal_index << ")\n (model";
  for (const auto& [v, n] : cex.model) {
    os << " (" << name_of(v) << ' ';
    if (n < 0)
      os << "(- " << -n << ')';
    else
      os << n;
    os << ')';
  }
  os << "))\n";
  (void)problem;
  for (const auto& line : cex.derivations) os << "; " << line << '\n';
  return os.str();
}

int run_solve(const std::string& input, CommonArgs& args,
              const std::string& cert_path, const std::string& cex_path,
              bool lemmas_only, int verbosity) {
  ProblemFile problem = parse_problem(read_file(input));
  SmtConfig smt_cfg = make_smt_config(args, false);
  apply_file_options(problem.options, args.opts, smt_cfg);
  args.opts.deadline = std::chrono::steady_clock::now() +
                       std::chrono::seconds(args.timeout_s);

  if (lemmas_only) {
    SmtSession smt(smt_cfg);
    std::vector<GammaEntry> verified;
    for (size_t i = 0; i < problem.lemmas.size(); ++i) {
      GoalOutcome r =
          check_lemma(problem.hccs, problem.lemmas[i], verified, args.opts, smt);
      std::cout << "lemma " << i << ": "
                << (r.kind == GoalOutcome::Proved   ? "verified"
                    : r.kind == GoalOutcome::Refuted ? "refuted"
                                                     : "unknown")
                << '\n';
      if (r.kind != GoalOutcome::Proved) {
        std::cout << "result: unknown\n";
        return kExitLemmaRejected;
      }
      verified.push_back(problem.lemmas[i]);
    }
    std::cout << "all lemmas verified\nresult: unknown\n";
    return kExitUnknown;
  }

  SolveReport report = solve_hccs(problem, args.opts, smt_cfg);

  if (verbosity > 0) {
    for (size_t i = 0; i < report.lemma_results.size(); ++i)
      std::cout << "lemma " << i << ": "
                << (report.lemma_results[i].kind == GoalOutcome::Proved
                        ? "verified"
                        : "failed")
                << '\n';
    for (size_t i = 0; i < report.goal_results.size(); ++i) {
      const auto& r = report.goal_results[i];
      std::cout << "goal " << i << ": "
                << (r.kind == GoalOutcome::Proved   ? "proved"
                    : r.kind == GoalOutcome::Refuted ? "refuted"
                                                     : "unknown")
                << (r.reason.empty() ? "" : " (" + r.reason + ")") << '\n';
    }
  }

  switch (report.verdict) {
    case Verdict::Solvable: {
      std::cout << "solvable: every goal clause holds in the least model\n";
      if (!cert_path.empty() && report.certificate)
        write_file(cert_path, serialize(*report.certificate));
      std::cout << verdict_line(report.verdict) << '\n';
      return kExitSat;
    }
    case Verdict::Unsolvable: {
      std::cout << "unsolvable: counterexample found for goal "
                << report.counterexample->goal_index << '\n';
      if (!cex_path.empty())
        write_file(cex_path, cex_to_text(problem, *report.counterexample));
      std::cout << verdict_line(report.verdict) << '\n';
      return kExitUnsat;
    }
    case Verdict::LemmaRejected: {
      std::cout << "lemma rejected: " << report.detail << '\n';
      std::cout << "result: unknown\n";
      return kExitLemmaRejected;
    }
    default: {
      std::cout << "unknown"
                << (report.detail.empty() ? "" : ": " + report.detail) << '\n';
      std::cout << verdict_line(report.verdict) << '\n';
      return kExitUnknown;
    }
  }
}

int run_replay(const std::string& cert_path, const std::string& problem_path,
               CommonArgs& args) {
  ProblemFile problem = parse_problem(read_file(problem_path));
  Certificate cert = parse_certificate(read_file(cert_path));
  SmtConfig cfg = make_smt_config(args, false);
  apply_file_options(problem.options, args.opts, cfg);
  SmtSession smt(cfg);
  ReplayResult r = replay(cert, problem, smt);
  if (r.verified) {
    std::cout << "certificate verified\nresult: sat\n";
    return kExitSat;
  }
  std::cout << "certificate rejected: " << r.reason << " [" << r.path
            << "]\nresult: unknown\n";
  return kExitUnsat;
}

int run_oracle(const std::string& input, long bound, int iters) {
  ProblemFile problem = parse_problem(read_file(input));
  GroundAtomSet model = bounded_least_model(problem.hccs, Int(bound), iters);
  std::cout << model.dump();
  return kExitSat;
}

int run_bench(const std::string& dir, CommonArgs& args, int verbosity) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".ihcs" ||
        entry.path().extension() == ".smt2")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::cout << "id\tresult\ttime(s)\n";
  for (const auto& f : files) {
    CommonArgs local = args;
    ProblemFile problem = parse_problem(read_file(f.string()));
    SmtConfig cfg = make_smt_config(local, false);
    apply_file_options(problem.options, local.opts, cfg);
    local.opts.deadline = std::chrono::steady_clock::now() +
                          std::chrono::seconds(local.timeout_s);
    auto t0 = std::chrono::steady_clock::now();
    std::string verdict;
    try {
      SolveReport report = solve_hccs(problem, local.opts, cfg);
      switch (report.verdict) {
        case Verdict::Solvable: verdict = "sat"; break;
        case Verdict::Unsolvable: verdict = "unsat"; break;
        case Verdict::LemmaRejected: verdict = "lemma-rejected"; break;
        default: verdict = "unknown"; break;
      }
    } catch (const std::exception& e) {
      verdict = "error";
      if (verbosity > 0) std::cerr << f.stem().string() << ": " << e.what() << '\n';
    }
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
    std::ostringstream time;
    time.setf(std::ios::fixed);
    time.precision(3);
    time << dt.count();
    std::cout << f.stem().string() << '\t' << verdict << '\t' << time.str()
              << '\n';
  }
  return kExitSat;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chcind: a Horn clause constraint solver based on induction "
               "over derivations"};
  app.require_subcommand(1);

  CommonArgs args;
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "verbose output");

  std::string input, cert_path, cex_path, problem_path, bench_dir;
  long bound = 4;
  int iters = 6;

  CLI::App* solve = app.add_subcommand("solve", "decide an HCCS problem file");
  solve->add_option("input", input, "problem file (.ihcs or .smt2)")
      ->required();
  solve->add_option("--certificate", cert_path, "write the proof certificate");
  solve->add_option("--cex", cex_path, "write the counterexample");
  add_solver_flags(solve, args);

  CLI::App* lemmas =
      app.add_subcommand("check-lemmas", "verify the file's lemmas only");
  lemmas->add_option("input", input, "problem file")->required();
  add_solver_flags(lemmas, args);

  CLI::App* rep = app.add_subcommand("replay", "re-verify a certificate");
  rep->add_option("certificate", cert_path, "certificate file (.ihcp)")
      ->required();
  rep->add_option("--problem", problem_path, "the problem file")->required();
  add_solver_flags(rep, args);

  CLI::App* oracle =
      app.add_subcommand("oracle", "dump the bounded least model");
  oracle->add_option("input", input, "problem file")->required();
  oracle->add_option("--bound", bound, "argument box half-width");
  oracle->add_option("--iters", iters, "fixpoint iterations");

  CLI::App* bench =
      app.add_subcommand("bench", "solve every problem in a directory");
  bench->add_option("dir", bench_dir, "benchmark directory")->required();
  add_solver_flags(bench, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (solve->parsed())
      return run_solve(input, args, cert_path, cex_path, false, verbosity);
    if (lemmas->parsed()) return run_solve(input, args, "", "", true, verbosity);
    if (rep->parsed()) return run_replay(cert_path, problem_path, args);
    if (oracle->parsed()) return run_oracle(input, bound, iters);
    if (bench->parsed()) return run_bench(bench_dir, args, verbosity);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CertificateError& e) {
    std::cerr << "certificate error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SmtError& e) {
    std::cerr << "smt error: " << e.what() << '\n';
    return kExitInfra;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
