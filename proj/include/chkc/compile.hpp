#pragma once
// Type-directed translation from the annotated source language into the
// erased target language.  Checked pointer operations grow explicit null
// and bounds checks; checked null-terminated array variables get a pair
// of shadow variables that dynamic widening keeps in sync with the
// operational bounds.

#include "chkc/ast.hpp"
#include "chkc/corec.hpp"
#include "chkc/typing.hpp"

#include <stdexcept>

namespace chkc {

/***** One-hole target contexts *****/

// A composable context over target expressions.  Frames are stored
// outside-in; plugging folds them around the filler.
class Closure {
 public:
  struct Frame {
    enum class K { Let, IfThen, IfElse } k;
    std::string x; // Let binder
    CAtom guard;   // If guard
    CExprPtr e;    // Let rhs, or the branch that is not the hole
  };

  static Closure hole() { return Closure{}; }
  // let x = rhs in HOLE
  static Closure let(std::string x, CExprPtr rhs);
  // if a then HOLE else els
  static Closure if_then(CAtom a, CExprPtr els);
  // if a then thn else HOLE
  static Closure if_else(CAtom a, CExprPtr thn);

  // this[inner[HOLE]]
  Closure then(const Closure& inner) const;
  CExprPtr plug(CExprPtr e) const;
  CExprPtr plug(const CAtom& a) const;

  bool is_hole() const { return frames_.empty(); }
  const std::vector<Frame>& frames() const { return frames_; }

 private:
  std::vector<Frame> frames_;
};

/***** Shadow bounds variables *****/

struct ShadowPair {
  std::string lo, hi;
};
// Maps each checked NT-array-typed source variable to its shadow pair.
using ShadowMap = std::map<std::string, ShadowPair>;

/***** Options *****/

// Knobs that disable individual check/widening insertions.  All default
// to the faithful translation; turning one off is used to demonstrate
// that the simulation property actually depends on that insertion.
struct CompileOptions {
  bool insert_null_checks = true;
  bool insert_widen_deref = true;
  bool strict_write_bounds = true;
};

struct CompileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/***** Compilation *****/

struct Compiled {
  Closure code;
  CAtom atom;
  WordType type;
};

class Compiler {
 public:
  Compiler(const FunEnv& funs, const StructEnv& structs,
           CompileOptions opts = {})
      : funs_(funs), structs_(structs), opts_(opts) {}

  // Fresh names are drawn from the reserved "$k" namespace; source
  // programs cannot contain '$' in identifiers.
  std::string fresh();

  // Dynamic-check metafunctions.  `key` is the source subexpression whose
  // value is being checked: a variable tracked in rho uses its shadow
  // bounds, anything else takes bounds from the static type.
  Closure check_null(const CAtom& a, Mode m);
  Closure check_bounds(const ShadowMap& rho, const ExprPtr& key,
                       const WordType& t, const CAtom& idx);
  Closure check_bounds_w(const ShadowMap& rho, const ExprPtr& key,
                         const WordType& t, const CAtom& idx);
  Closure check_bounds_dyn(const ShadowMap& rho, const ExprPtr& key,
                           const WordType& target, const WordType& source);
  std::pair<Closure, ShadowMap> extend_rho(const ShadowMap& rho,
                                           const std::string& x,
                                           const WordType& t);
  Closure widen_deref(const ShadowMap& rho, const std::string& x);
  Closure widen_strlen(const ShadowMap& rho, const ExprPtr& key,
                       const CAtom& result);

  // Compile one expression.  Throws CompileError on input that does not
  // type-check (compilation is type-directed).  theta carries the
  // nonnegativity facts needed to reproduce typing's branch joins; it
  // never influences emitted code.
  Compiled compile(const TypeEnv& G, const PredEnv& theta,
                   const ShadowMap& rho, const ExprPtr& e);

  // Stack snapshot used only for bound decisions in branch joins,
  // mirroring the typing context when compiling mid-evaluation states.
  IntStack phi;

 private:
  const FunEnv& funs_;
  const StructEnv& structs_;
  CompileOptions opts_;
  Int counter_ = 0;

  Closure bind_bound(const Bound& b, std::string* var_out);
  Closure size_of(const Type& omega, CAtom* out);
  WordType join_or_throw(const WordType& a, const WordType& b,
                         const PredEnv& theta);
};

// Whole-program translation: every function body is compiled under its
// parameter environment with shadow initialization for NT parameters
// (bounds are not passed as extra arguments), then main under empty
// environments.
CProgram compile_program(const Program& p, CompileOptions opts = {});

} // namespace chkc
