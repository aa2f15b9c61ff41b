#pragma once
// The erased target language: annotation-free A-normal-form expressions
// with explicit bounds/null failure forms, plus its small-step
// interpreter.  Failed heap accesses are genuinely stuck here; only the
// boundsfail/nullfail forms step to error outcomes.

#include "chkc/ast.hpp"
#include "chkc/parser.hpp"
#include "chkc/typing.hpp"

namespace chkc {

/***** Syntax *****/

struct CAtom {
  bool is_num = true;
  Int n = 0;
  std::string x;

  bool operator==(const CAtom& o) const {
    return is_num == o.is_num && (is_num ? n == o.n : x == o.x);
  }
};

inline CAtom ca_num(Int n) { return CAtom{true, n, ""}; }
inline CAtom ca_var(std::string x) { return CAtom{false, 0, std::move(x)}; }

struct CExpr;
using CExprPtr = std::shared_ptr<const CExpr>;

enum class COp { Add, Sub, Le };

struct CSaved {
  bool present = false;
  Int n = 0;
};

struct CExpr {
  enum class Tag {
    Atom,        // n | x
    Strlen,      // strlen a
    Malloc,      // malloc a
    Call,        // call f a...
    Binop,       // a op a
    Deref,       // *a
    Assign,      // a := a  (heap)
    StackAssign, // x := a  (stack, innermost live binding)
    If,          // if a e e
    BoundsFail,
    NullFail,
    Ret,         // ret(x, mu, e)
    Let          // let x = c in e
  } tag;

  CAtom a1, a2;
  COp op = COp::Add;
  std::string x, f;
  std::vector<CAtom> args;
  CExprPtr e1, e2; // Let: e1 rhs, e2 body; If: e1 then, e2 else; Ret: e1
  CSaved saved;
};

CExprPtr c_atom(CAtom a);
CExprPtr c_num(Int n);
CExprPtr c_var(std::string x);
CExprPtr c_strlen(CAtom a);
CExprPtr c_malloc(CAtom a);
CExprPtr c_call(std::string f, std::vector<CAtom> args);
CExprPtr c_binop(CAtom a, COp op, CAtom b);
CExprPtr c_deref(CAtom a);
CExprPtr c_assign(CAtom a, CAtom b);
CExprPtr c_stackassign(std::string x, CAtom a);
CExprPtr c_if(CAtom a, CExprPtr t, CExprPtr f);
CExprPtr c_boundsfail();
CExprPtr c_nullfail();
CExprPtr c_ret(std::string x, CSaved mu, CExprPtr e);
CExprPtr c_let(std::string x, CExprPtr rhs, CExprPtr body);

std::string print_cexpr(const CExprPtr& e);

// Structural check that e conforms to the static A-normal-form grammar
// (let right-hand sides are simple expressions, operands are atoms).
bool is_anf(const CExprPtr& e);

/***** Programs *****/

struct CFun {
  std::vector<std::string> params;
  CExprPtr body;
};
using CFunEnv = std::map<std::string, CFun>;

struct CProgram {
  CFunEnv funs;
  CExprPtr main;
};

std::string print_cprogram(const CProgram& p);
CProgram parse_cprogram(const std::string& text); // throws ParseError

/***** Erasure *****/

using CStack = std::map<std::string, Int>;

struct CHeap {
  std::map<Int, Int> cells;
  Int next = 1;
};

CStack erase_stack(const Stack& phi);
CHeap erase_heap(const Heap& H);

/***** Interpretation *****/

struct CConfig {
  CStack phi;
  CHeap heap;
  CExprPtr e;
};

struct COutcome {
  enum class Kind { Value, Null, Bounds, Stuck, Fuel } kind;
  Int value = 0;
  CConfig final_config;
};

COutcome eval_corec(const CFunEnv& funs, const CConfig& start, Int fuel);
COutcome eval_corec(const CProgram& p, Int fuel);

std::string outcome_word(const COutcome& o);

} // namespace chkc
