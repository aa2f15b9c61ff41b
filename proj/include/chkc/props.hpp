#pragma once
// Property harness: evaluates generated programs and checks progress,
// preservation, blame, and source/target simulation on every adjacent
// pair of configurations, producing a mergeable line-oriented report.

#include "chkc/compile.hpp"
#include "chkc/gen.hpp"
#include "chkc/semantics.hpp"

namespace chkc {

enum class PropOutcome { Pass, Fail, Inconclusive, Skip };

/***** Per-term checking *****/

struct TermChecks {
  PropOutcome welltyped = PropOutcome::Skip;
  PropOutcome progress = PropOutcome::Skip;
  PropOutcome preservation = PropOutcome::Skip;
  PropOutcome blame = PropOutcome::Skip;
  PropOutcome simulation = PropOutcome::Skip;
  std::string detail; // first failure description
};

struct CheckOptions {
  Int fuel = 10000;         // source evaluation budget
  Int target_fuel = 200000; // per-config compiled-run budget
  CompileOptions compile;
  bool check_progress = true;
  bool check_preservation = true;
  bool check_simulation = true;
};

// Run every applicable property on one program.  `injected` marks blame
// corpus members: they get the blame check instead of progress,
// preservation, and simulation (those theorems quantify over fully
// checked programs).
TermChecks check_term(const Program& p, bool injected,
                      const CheckOptions& opts);

// Compile one source configuration to a runnable target configuration:
// types from stack annotations, shadow variables seeded from the (closed)
// annotation bounds.  Returns false with a message on compile failure.
bool compile_config(const Program& p, const Config& c,
                    const CompileOptions& opts, CConfig* out,
                    std::string* err);

/***** Reports *****/

struct PropCount {
  long long pass = 0, fail = 0, inconclusive = 0;
};

struct Counterexample {
  std::string property;
  uint64_t index = 0;
  std::string program;
  std::string detail;
};

struct PropertyReport {
  std::map<std::string, PropCount> props;
  std::vector<Counterexample> cexs;
  size_t max_cexs = 10;

  void add(const std::string& prop, PropOutcome o);
  void merge(const PropertyReport& other);
  bool any_fail() const;
  std::string to_text() const;
};

// Generate cfg.count terms and check them, spread over `workers` threads
// (shards merge deterministically by index).
PropertyReport run_properties(const GenConfig& cfg, const CheckOptions& opts,
                              int workers = 0);

} // namespace chkc
