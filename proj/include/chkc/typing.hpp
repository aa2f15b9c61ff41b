#pragma once
// Static semantics: bound comparison under predicate and stack contexts,
// subtyping, type joins, heap-aware literal typing, and the expression
// type checker.

#include "chkc/ast.hpp"

#include <variant>

namespace chkc {

/***** Contexts *****/

// Predicate context: records which integer variables are known >= 0.
enum class Pred { Top, GeZero };
using PredEnv = std::map<std::string, Pred>;

// Restricted stack snapshot: integer values of in-scope variables, used to
// decide bound comparisons during evaluation.
using IntStack = std::map<std::string, Int>;

/***** Heap view for literal typing *****/

// A heap cell: value plus type annotation.
struct HeapCell {
  Int val = 0;
  WordType annot;
};

struct Heap {
  std::map<Int, HeapCell> cells;
  Int next = 1; // bump cursor; cell 0 is never allocated

  bool has(Int a) const { return cells.count(a) > 0; }
};

/***** Results *****/

struct TypeError {
  std::string rule;    // name of the violated side condition's rule
  std::string message;

  std::string to_string() const { return rule + ": " + message; }
};

using TypeResult = std::variant<WordType, TypeError>;

inline bool ok(const TypeResult& r) { return r.index() == 0; }
inline const WordType& type_of(const TypeResult& r) { return std::get<0>(r); }
inline const TypeError& error_of(const TypeResult& r) { return std::get<1>(r); }

/***** Bound comparison and subtyping *****/

// b1 <= b2 under predicates Theta and stack snapshot phi.
bool bound_le(const Bound& b1, const Bound& b2, const PredEnv& theta,
              const IntStack& phi);

// tau' <= tau (subtype) under Theta/phi, with struct declarations D.
bool subtype(const WordType& sub, const WordType& sup, const PredEnv& theta,
             const IntStack& phi, const StructEnv& D);

// Least upper bound of two word types, if one exists.
std::optional<WordType> type_join(const WordType& a, const WordType& b,
                                  const PredEnv& theta, const IntStack& phi,
                                  const StructEnv& D);

/***** Literal typing *****/

// H; sigma |- n : tau.  sigma is the coinductive scope set of (value, type)
// pairs already assumed, enabling cyclic heap structures.
using ScopeSet = std::set<std::pair<Int, std::string>>; // (n, printed type)

bool type_literal(const Heap& H, const StructEnv& D, Int n, const WordType& t);
bool type_literal_scoped(const Heap& H, const StructEnv& D, ScopeSet& sigma,
                         Int n, const WordType& t);

/***** Expression typing *****/

struct TypingCtx {
  const FunEnv* funs = nullptr;
  const StructEnv* structs = nullptr;
  const Heap* heap = nullptr;   // for literal typing; empty heap if null
  IntStack phi;                 // stack snapshot for bound decisions
};

TypeResult type_expr(const TypingCtx& ctx, const TypeEnv& G,
                     const PredEnv& theta, Mode m, const ExprPtr& e);

// Whole-program check: each function body checks in checked mode against
// its declared result type, and main checks in checked mode under empty
// environments.  Returns the type of main or the first error.
TypeResult check_program(const Program& p);

/***** Consistency relations between static and dynamic worlds *****/

// Stack of the operational semantics: maps variables to annotated values.
struct StackVal {
  Int n = 0;
  WordType annot;
};
using Stack = std::map<std::string, StackVal>;

// Every variable constrained by Theta agrees between Gamma and the stack,
// and stack annotations are subtypes of their static types.
bool stack_consistent(const TypeEnv& G, const PredEnv& theta,
                      const Stack& phi, const StructEnv& D);

// Every stack value is well typed in the heap.
bool stack_heap_consistent(const Heap& H, const Stack& phi,
                           const StructEnv& D);

// Every annotated cell of H remains well typed in H'.
bool heap_heap_consistent(const Heap& H, const Heap& Hp, const StructEnv& D);

} // namespace chkc
