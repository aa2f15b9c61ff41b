#pragma once
// Small-step operational semantics for the source language: redex
// decomposition (with the special whole-conditional treatment of
// `if (*x) ...` guards on null-terminated array pointers), the
// computation steps, and a fueled evaluator that can retain the full
// trace of configurations.

#include "chkc/ast.hpp"
#include "chkc/typing.hpp"

#include <functional>

namespace chkc {

/***** Decomposition *****/

struct Decomp {
  bool is_value = false;
  ExprPtr redex;                              // when !is_value
  Mode mode = Mode::C;                        // mode of the hole
  std::function<ExprPtr(ExprPtr)> plug;       // rebuilds the whole term
};

// Decomposes e into an evaluation context and a redex.  `m` is the mode of
// the surrounding context (checked at top level).
Decomp decompose(const ExprPtr& e, Mode m);

/***** Stepping *****/

struct StepRes {
  enum class K { Expr, Null, Bounds, Stuck } k;
  ExprPtr e; // when K::Expr: the contractum
};

// Applies one computation step to a redex, updating phi and H in place.
StepRes step_redex(const FunEnv& funs, const StructEnv& structs, Stack& phi,
                   Heap& H, const ExprPtr& redex);

/***** Evaluation *****/

struct Config {
  Stack phi;
  Heap heap;
  ExprPtr e;
};

struct StepRec {
  Mode mode;
  std::string redex;
  std::string result;
};

struct EvalOutcome {
  enum class Kind { Value, Null, Bounds, Stuck, Fuel } kind;
  Int value = 0;          // when Kind::Value
  WordType value_type;    // when Kind::Value
  Config final_config;    // configuration at termination
  std::vector<StepRec> steps;
  std::vector<Config> trace;      // configs c_0..c_k (when requested)
  std::vector<Mode> step_modes;   // mode of each step taken
};

struct EvalOptions {
  Int fuel = 10000;
  bool keep_trace = false; // retain every intermediate configuration
};

EvalOutcome eval_expr(const FunEnv& funs, const StructEnv& structs,
                      const Config& start, const EvalOptions& opts);
EvalOutcome eval_program(const Program& p, const EvalOptions& opts);

// One-word outcome as used in tool output: value/null/bounds/stuck/fuel.
std::string outcome_word(const EvalOutcome& o);

} // namespace chkc
