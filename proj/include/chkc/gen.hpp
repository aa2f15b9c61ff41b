#pragma once
// Random generation of well-typed (and deliberately near-ill-typed)
// source programs by inverting the typing rules, with a deterministic
// splittable random stream so every term is replayable from (seed,
// index) alone.

#include "chkc/ast.hpp"
#include "chkc/typing.hpp"

#include <cstdint>
#include <functional>

namespace chkc {

/***** Deterministic random stream *****/

// splitmix64: each term derives an independent stream from (seed, index).
struct Rng {
  uint64_t s = 0;

  explicit Rng(uint64_t seed) : s(seed) {}
  static Rng split(uint64_t seed, uint64_t index);

  uint64_t next();
  uint64_t below(uint64_t n);                 // uniform in [0, n)
  Int range(Int lo, Int hi);                  // uniform in [lo, hi]
  bool chance(int percent);                   // true with given probability
};

/***** Configuration *****/

struct GenConfig {
  uint64_t seed = 0;
  int depth = 9;       // recursion fuel for a single term
  Int count = 20000;   // number of terms in a property run
  std::map<std::string, double> weights; // rule name -> weight override
  int inject_rate = 10; // percent of terms receiving an unchecked wrapper

  enum class Mode { WellTyped, NearIllTyped } mode = Mode::WellTyped;
};

/***** Generation *****/

struct GenResult {
  Program program;
  bool injected = false;     // carries an unchecked legacy-pointer region
  std::string relax_site;    // rule whose premise was relaxed, if any
};

class Generator {
 public:
  explicit Generator(GenConfig cfg) : cfg_(std::move(cfg)) {}

  // One term of the configured stream.  Injection (for blame testing) and
  // premise relaxation (NearIllTyped mode) are decided per index.
  GenResult gen_term(uint64_t index);

  // Forced variants used by focused test runs.
  Program gen_well_typed(uint64_t index);
  Program gen_blame(uint64_t index, bool* injected);
  Program gen_near_ill_typed(uint64_t index, std::string* site);

  // Expression-level entry point (used by unit tests): generate at the
  // given goal under an environment.
  ExprPtr gen_expr(Rng& rng, const TypeEnv& G, const WordType& goal,
                   int fuel);

  // Telemetry: how often each generation rule fired.
  const std::map<std::string, long long>& rule_counts() const {
    return counts_;
  }

  const GenConfig& config() const { return cfg_; }

 private:
  struct State;
  GenConfig cfg_;
  std::map<std::string, long long> counts_;

  double weight(const std::string& rule, double dflt) const;
  Program gen_program(Rng& rng, State& st);
  ExprPtr gen(State& st, const WordType& goal, int fuel);
  ExprPtr gen_int(State& st, int fuel);
};

/***** Counterexample shrinking *****/

// Greedily applies structure-reducing rewrites to the program's main
// expression (hoist a subterm, drop a dead let, take one branch of an
// if, shrink literals toward 0) while `still_fails` keeps returning
// true.  Returns a local minimum.
Program shrink(const Program& p,
               const std::function<bool(const Program&)>& still_fails);

} // namespace chkc
