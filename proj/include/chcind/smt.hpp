#ifndef CHCIND_SMT_HPP
#define CHCIND_SMT_HPP

#include "chcind/ast.hpp"
#include "chcind/eval.hpp"

#include <chrono>
#include <unordered_map>

namespace chcind {

// Process spawn/IO failures and protocol desyncs. Distinct from Unknown,
// which covers solver timeouts and incompleteness.
struct SmtError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SmtConfig {
  std::vector<std::string> command{"z3", "-in"};
  int timeout_ms = 2000;    // per query
  std::string logic = "ALL";
  bool validate_models = false;  // ground-check every model before returning
};

// Splits a solver command line on whitespace.
std::vector<std::string> split_command(const std::string& cmd);

using Model = std::map<Ident, Int>;

struct SmtVerdict {
  enum Kind { Valid, Invalid, Unknown } kind;
  Model model;         // Invalid only
  std::string reason;  // Unknown only
};

struct SatResult {
  enum Kind { Sat, Unsat, Unknown } kind;
  Model model;  // Sat only
  std::string reason;
};

// One external solver process speaking SMT-LIB2 over stdin/stdout. Queries
// run inside push/pop, so they are independent; results keyed by the printed
// query text are cached. The session is single-owner.
class SmtSession {
 public:
  explicit SmtSession(SmtConfig cfg);
  ~SmtSession();
  SmtSession(const SmtSession&) = delete;
  SmtSession& operator=(const SmtSession&) = delete;

  // Valid iff hypothesis => conclusion in the theory, via unsatisfiability
  // of hypothesis /\ not(conclusion).
  SmtVerdict check_valid(const Formula& hypothesis, const Formula& conclusion);
  SatResult check_sat(const Formula& f);

  const SmtConfig& config() const { return cfg_; }
  long queries_sent() const { return queries_; }
  long cache_hits() const { return cache_hits_; }

 private:
  struct CacheEntry {
    SatResult result;
  };

  void spawn();
  void shutdown();
  void send(const std::string& s);
  std::string read_line(std::chrono::steady_clock::time_point deadline);
  std::string read_balanced(std::chrono::steady_clock::time_point deadline);
  bool fill_buffer(std::chrono::steady_clock::time_point deadline);
  SatResult raw_check_sat(const Formula& f);
  Model parse_model(const std::string& text, const std::set<Ident>& vars);

  SmtConfig cfg_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buf_;
  std::unordered_map<std::string, CacheEntry> cache_;
  long queries_ = 0;
  long cache_hits_ = 0;
};

}  // namespace chcind

#endif
