#pragma once
// Abstract syntax for the checked source language: modes, bounds, word
// types, object types, expressions, plus the function/struct environments
// and the basic operations on them (free variables, substitution, sizing,
// well-formedness, printing).

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace chkc {

using Int = long long;

/***** Modes *****/

enum class Mode : uint8_t { U = 0, C = 1 }; // total order: U < C

inline bool mode_le(Mode a, Mode b) {
  return static_cast<uint8_t>(a) <= static_cast<uint8_t>(b);
}
inline const char* mode_name(Mode m) { return m == Mode::C ? "c" : "u"; }

/***** Bounds *****/

// A bound is either a constant n or a variable-plus-offset x + n.
struct Bound {
  std::string var; // empty => constant
  Int off = 0;

  bool is_const() const { return var.empty(); }
  bool operator==(const Bound& o) const { return var == o.var && off == o.off; }
  bool operator!=(const Bound& o) const { return !(*this == o); }
};

inline Bound bconst(Int n) { return Bound{"", n}; }
inline Bound bvar(std::string x, Int n = 0) { return Bound{std::move(x), n}; }

struct BoundPair {
  Bound lo, hi;
  bool operator==(const BoundPair& o) const { return lo == o.lo && hi == o.hi; }
  bool operator!=(const BoundPair& o) const { return !(*this == o); }
};

/***** Types *****/

struct Type;
using TypePtr = std::shared_ptr<const Type>;

// Word type: int or a pointer with a mode.
struct WordType {
  bool is_int = true;
  Mode mode = Mode::C; // pointer mode (when !is_int)
  TypePtr pointee;     // pointed-to object type (when !is_int)

  bool operator==(const WordType& o) const;
  bool operator!=(const WordType& o) const { return !(*this == o); }
};

// Object type: a word type, an array with bounds and an NT flag, or a
// struct reference.
struct Type {
  enum class Tag { Word, Array, Struct } tag = Tag::Word;

  // Word
  WordType word;
  // Array
  BoundPair bounds;
  WordType elem;
  bool nt = false;
  // Struct
  std::string struct_name;

  bool operator==(const Type& o) const;
  bool operator!=(const Type& o) const { return !(*this == o); }
};

WordType wt_int();
WordType wt_ptr(Mode m, Type pointee);
Type ty_word(WordType w);
Type ty_array(BoundPair b, WordType elem, bool nt);
Type ty_struct(std::string name);

// Convenience predicates on word types.
bool is_ptr(const WordType& t);
bool is_ptr_to_word(const WordType& t);   // ptr^m tau
bool is_ptr_to_array(const WordType& t);  // ptr^m [beta tau]^kappa
bool is_ptr_to_struct(const WordType& t);
bool is_checked_nt_ptr(const WordType& t); // ptr^c nt-array

/***** Expressions *****/

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Saved stack binding carried by the runtime-only ret form.
struct SavedBinding {
  bool present = false;
  Int n = 0;
  WordType annot;
};

struct Expr {
  enum class Tag {
    Lit,       // n : tau
    Var,       // x
    Malloc,    // malloc(omega)
    Let,       // let x = e1 in e2
    Cast,      // cast tau e1
    DynCast,   // dyncast tau e1
    Call,      // f(args...)
    Strlen,    // strlen(x)
    Add,       // e1 + e2
    Deref,     // *e1
    Assign,    // e1 := e2
    Unchecked, // unchecked e1
    If,        // if e1 then e2 else e3
    FieldAddr, // &e1 -> f
    Ret        // ret(x, mu, e1)   (runtime only)
  } tag;

  Int n = 0;             // Lit
  WordType annot;        // Lit
  std::string x;         // Var / Let / Strlen / Ret
  Type omega;            // Malloc
  WordType cast_ty;      // Cast / DynCast
  std::string f;         // Call function name / FieldAddr field name
  std::vector<ExprPtr> args; // Call
  ExprPtr e1, e2, e3;
  SavedBinding saved;    // Ret
};

ExprPtr mk_lit(Int n, WordType t);
ExprPtr mk_var(std::string x);
ExprPtr mk_malloc(Type omega);
ExprPtr mk_let(std::string x, ExprPtr e1, ExprPtr e2);
ExprPtr mk_cast(WordType t, ExprPtr e);
ExprPtr mk_dyncast(WordType t, ExprPtr e);
ExprPtr mk_call(std::string f, std::vector<ExprPtr> args);
ExprPtr mk_strlen(std::string x);
ExprPtr mk_add(ExprPtr e1, ExprPtr e2);
ExprPtr mk_deref(ExprPtr e);
ExprPtr mk_assign(ExprPtr e1, ExprPtr e2);
ExprPtr mk_unchecked(ExprPtr e);
ExprPtr mk_if(ExprPtr c, ExprPtr t, ExprPtr f);
ExprPtr mk_fieldaddr(ExprPtr e, std::string f);
ExprPtr mk_ret(std::string x, SavedBinding saved, ExprPtr e);

inline bool is_value(const Expr& e) { return e.tag == Expr::Tag::Lit; }
inline bool is_value(const ExprPtr& e) { return e && is_value(*e); }

/***** Environments *****/

struct FunDef {
  WordType ret;
  std::vector<std::pair<std::string, WordType>> params;
  ExprPtr body;
};
using FunEnv = std::map<std::string, FunDef>;

using FieldList = std::vector<std::pair<std::string, WordType>>;
using StructEnv = std::map<std::string, FieldList>;

struct Program {
  FunEnv funs;
  StructEnv structs;
  ExprPtr main;
};

/***** Free variables and substitution *****/

void free_type_vars(const Type& t, std::set<std::string>& out);
void free_type_vars(const WordType& t, std::set<std::string>& out);
bool type_is_closed(const WordType& t);
bool type_is_closed(const Type& t);

using BoundSubst = std::map<std::string, Bound>;

Bound subst_bound(const Bound& b, const BoundSubst& s);
Type subst_type(const Type& t, const BoundSubst& s);
WordType subst_type(const WordType& t, const BoundSubst& s);

// Recognizes expressions that syntactically match the structure of a
// bound: a literal int, a variable, or a variable plus a literal int.
std::optional<Bound> expr_as_bound(const ExprPtr& e);

/***** Sizing *****/

// Number of heap cells an object type occupies.  Bound variables are
// resolved through `resolve` (values of in-scope integer variables).
struct SizeError {
  std::string message;
};
std::optional<Int> type_size(const Type& omega, const StructEnv& D,
                             const std::map<std::string, Int>& resolve,
                             std::string* err = nullptr);

/***** Well-formedness *****/

using TypeEnv = std::map<std::string, WordType>;

bool wf_bound(const TypeEnv& G, const Bound& b);
bool wf_type(const TypeEnv& G, const Type& t, const StructEnv& D);
bool wf_type(const TypeEnv& G, const WordType& t, const StructEnv& D);

/***** Printing *****/

std::string print_bound(const Bound& b);
std::string print_type(const Type& t);
std::string print_type(const WordType& t);
std::string print_expr(const ExprPtr& e);
std::string print_program(const Program& p);

} // namespace chkc
