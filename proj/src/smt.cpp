#include "chcind/smt.hpp"

#include "chcind/sexpr.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <sstream>

namespace chcind {

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> out;
  std::istringstream is(cmd);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

SmtSession::SmtSession(SmtConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.timeout_ms <= 0) throw SmtError("per-query timeout must be > 0");
  spawn();
}

SmtSession::~SmtSession() { shutdown(); }

void SmtSession::spawn() {
  if (cfg_.command.empty()) throw SmtError("empty solver command");
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw SmtError("pipe() failed");
  pid_t pid = fork();
  if (pid < 0) throw SmtError("fork() failed");
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    std::vector<char*> argv;
    for (const auto& a : cfg_.command) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buf_.clear();

  std::ostringstream pre;
  pre << "(set-option :print-success false)\n";
  pre << "(set-option :timeout " << cfg_.timeout_ms << ")\n";
  if (!cfg_.logic.empty()) pre << "(set-logic " << cfg_.logic << ")\n";
  send(pre.str());
}

void SmtSession::shutdown() {
  if (pid_ > 0) {
    kill(pid_, SIGKILL);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
}

void SmtSession::send(const std::string& s) {
  const char* p = s.data();
  size_t left = s.size();
  while (left > 0) {
    ssize_t n = write(to_child_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SmtError(std::string("write to solver failed: ") + strerror(errno));
    }
    p += n;
    left -= (size_t)n;
  }
}

bool SmtSession::fill_buffer(std::chrono::steady_clock::time_point deadline) {
  auto now = std::chrono::steady_clock::now();
  if (now >= deadline) return false;
  struct pollfd pfd{from_child_, POLLIN, 0};
  int wait_ms = (int)std::chrono::duration_cast<std::chrono::milliseconds>(
                    deadline - now)
                    .count();
  int rc = poll(&pfd, 1, wait_ms);
  if (rc <= 0) return false;
  char chunk[4096];
  ssize_t n = read(from_child_, chunk, sizeof chunk);
  if (n <= 0) throw SmtError("solver process closed its output");
  buf_.append(chunk, (size_t)n);
  return true;
}

std::string SmtSession::read_line(std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    auto nl = buf_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buf_.substr(0, nl);
      buf_.erase(0, nl + 1);
      while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
        line.pop_back();
      if (line.empty()) continue;
      return line;
    }
    if (!fill_buffer(deadline)) return "";
  }
}

std::string SmtSession::read_balanced(
    std::chrono::steady_clock::time_point deadline) {
  size_t scanned = 0;
  int depth = 0;
  bool started = false;
  for (;;) {
    for (; scanned < buf_.size(); ++scanned) {
      char c = buf_[scanned];
      if (c == '(') {
        depth++;
        started = true;
      } else if (c == ')') {
        depth--;
      }
      if (started && depth == 0) {
        std::string out = buf_.substr(0, scanned + 1);
        buf_.erase(0, scanned + 1);
        return out;
      }
    }
    if (!fill_buffer(deadline)) return "";
  }
}

namespace {

void declare_consts(std::ostream& os, const std::set<Ident>& vars) {
  for (Ident v : vars) os << "(declare-const " << name_of(v) << " Int)";
}

}  // namespace

SatResult SmtSession::raw_check_sat(const Formula& f) {
  std::set<Ident> vars = fvs(f);
  std::ostringstream q;
  q << "(push 1)";
  declare_consts(q, vars);
  q << "(assert " << to_string(f) << ")(check-sat)\n";
  std::string query = q.str();

  auto cached = cache_.find(query);
  if (cached != cache_.end()) {
    ++cache_hits_;
    return cached->second.result;
  }

  ++queries_;
  send(query);
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(cfg_.timeout_ms + 250);
  std::string line;
  int stray = 0;
  for (;;) {
    line = read_line(deadline);
    if (line == "sat" || line == "unsat" || line == "unknown") break;
    if (line.empty()) {
      // Deadline passed with the solver still working: restart the process
      // so the session stays usable, and report unknown.
      shutdown();
      spawn();
      return SatResult{SatResult::Unknown, {}, "timeout"};
    }
    if (++stray > 8) {
      shutdown();
      spawn();
      throw SmtError("solver protocol desync, got: " + line);
    }
  }

  SatResult out;
  if (line == "unsat") {
    out.kind = SatResult::Unsat;
  } else if (line == "unknown") {
    out.kind = SatResult::Unknown;
    out.reason = "solver reported unknown";
  } else {
    out.kind = SatResult::Sat;
    send("(get-model)\n");
    std::string model_text = read_balanced(deadline);
    if (model_text.empty()) {
      shutdown();
      spawn();
      return SatResult{SatResult::Unknown, {}, "timeout reading model"};
    }
    out.model = parse_model(model_text, vars);
    if (cfg_.validate_models && !has_quantifier(f)) {
      Env env;
      for (const auto& [v, n] : out.model) env[v] = n;
      for (Ident v : vars)
        if (!env.count(v)) env[v] = 0;
      if (!eval_formula(f, env))
        throw SmtError("solver returned a model that fails ground evaluation");
    }
  }
  send("(pop 1)\n");
  if (out.kind != SatResult::Unknown) cache_.emplace(query, CacheEntry{out});
  return out;
}

Model SmtSession::parse_model(const std::string& text,
                              const std::set<Ident>& vars) {
  Model model;
  std::vector<SExpr> forms;
  try {
    forms = parse_sexprs(text);
  } catch (const ParseError& e) {
    throw SmtError(std::string("cannot parse solver model: ") + e.what());
  }
  if (forms.size() != 1 || !forms[0].is_list())
    throw SmtError("unexpected model shape from solver");
  const SExpr& m = forms[0];
  size_t start = 0;
  if (m.size() > 0 && m[0].is_sym("model")) start = 1;
  for (size_t i = start; i < m.size(); ++i) {
    const SExpr& d = m[i];
    if (!d.is_list() || d.size() < 5 || !d[0].is_sym("define-fun")) continue;
    if (!d[1].is_atom || !d[2].is_list() || !d[2].list.empty()) continue;
    if (!d[3].is_sym("Int")) continue;
    const SExpr& val = d[4];
    Int value;
    if (val.is_atom) {
      value = Int(val.atom);
    } else if (val.size() == 2 && val[0].is_sym("-") && val[1].is_atom) {
      value = -Int(val[1].atom);
    } else {
      throw SmtError("unsupported model value for " + d[1].atom);
    }
    Ident v = intern(d[1].atom);
    if (vars.count(v)) model[v] = value;
  }
  // Variables the solver omitted are unconstrained; fix them at zero.
  for (Ident v : vars)
    if (!model.count(v)) model[v] = 0;
  return model;
}

SatResult SmtSession::check_sat(const Formula& f) { return raw_check_sat(f); }

SmtVerdict SmtSession::check_valid(const Formula& hypothesis,
                                   const Formula& conclusion) {
  std::vector<Formula> parts;
  if (hypothesis->kind != FormKind::True) parts.push_back(hypothesis);
  parts.push_back(fnot(conclusion));
  SatResult r = raw_check_sat(conjoin(parts));
  switch (r.kind) {
    case SatResult::Unsat: return SmtVerdict{SmtVerdict::Valid, {}, {}};
    case SatResult::Sat: return SmtVerdict{SmtVerdict::Invalid, r.model, {}};
    default: return SmtVerdict{SmtVerdict::Unknown, {}, r.reason};
  }
}

}  // namespace chcind
