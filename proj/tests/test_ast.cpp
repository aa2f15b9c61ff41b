#include "doctest.h"

#include "chkc/ast.hpp"
#include "chkc/parser.hpp"

#include <random>

using namespace chkc;

namespace {

WordType nt_ptr(Int lo, Int hi) {
  return wt_ptr(Mode::C, ty_array({bconst(lo), bconst(hi)}, wt_int(), true));
}

/***** Random generators for round-trip testing *****/

struct Rnd {
  std::mt19937_64 eng;
  explicit Rnd(uint64_t seed) : eng(seed) {}
  Int num(Int lo, Int hi) {
    return std::uniform_int_distribution<Int>(lo, hi)(eng);
  }
  std::string var() {
    static const char* names[] = {"x", "y", "z", "p", "q", "n"};
    return names[num(0, 5)];
  }
  Bound bound() {
    if (num(0, 1)) return bconst(num(-3, 5));
    return bvar(var(), num(-2, 3));
  }
  WordType word_type(int depth);
  Type obj_type(int depth) {
    switch (num(0, 3)) {
      case 0:
        return ty_array({bound(), bound()}, word_type(depth - 1), false);
      case 1:
        return ty_array({bound(), bound()}, word_type(depth - 1), true);
      case 2:
        return ty_struct(var());
      default:
        return ty_word(word_type(depth - 1));
    }
  }
  ExprPtr expr(int depth);
};

WordType Rnd::word_type(int depth) {
  if (depth <= 0 || num(0, 1)) return wt_int();
  return wt_ptr(num(0, 1) ? Mode::C : Mode::U, obj_type(depth - 1));
}

ExprPtr Rnd::expr(int depth) {
  if (depth <= 0) {
    if (num(0, 1)) return mk_lit(num(-5, 9), word_type(1));
    return mk_var(var());
  }
  switch (num(0, 13)) {
    case 0: return mk_lit(num(-5, 9), word_type(2));
    case 1: return mk_var(var());
    case 2: return mk_malloc(obj_type(2));
    case 3: return mk_let(var(), expr(depth - 1), expr(depth - 1));
    case 4: return mk_cast(word_type(2), expr(depth - 1));
    case 5: return mk_dyncast(word_type(2), expr(depth - 1));
    case 6: {
      std::vector<ExprPtr> args;
      for (Int i = 0, k = num(0, 3); i < k; i++) args.push_back(expr(depth - 1));
      return mk_call(var(), std::move(args));
    }
    case 7: return mk_strlen(var());
    case 8: return mk_add(expr(depth - 1), expr(depth - 1));
    case 9: return mk_deref(expr(depth - 1));
    case 10: return mk_assign(expr(depth - 1), expr(depth - 1));
    case 11: return mk_unchecked(expr(depth - 1));
    case 12: return mk_if(expr(depth - 1), expr(depth - 1), expr(depth - 1));
    default: return mk_fieldaddr(expr(depth - 1), var());
  }
}

} // namespace

TEST_CASE("type printing") {
  CHECK(print_type(wt_int()) == "int");
  CHECK(print_type(wt_ptr(Mode::C, ty_word(wt_int()))) == "(ptr c int)");
  CHECK(print_type(nt_ptr(0, 5)) == "(ptr c (ntarray 0 5 int))");
  WordType t = wt_ptr(Mode::U, ty_array({bvar("n", -1), bconst(2)}, wt_int(), false));
  CHECK(print_type(t) == "(ptr u (array (+ n -1) 2 int))");
  CHECK(print_type(ty_struct("T")) == "(struct T)");
}

TEST_CASE("expression parsing and printing") {
  const char* text =
      "(let x (strlen p) (if x (deref (+ p (lit 1 int))) (lit 0 int)))";
  ExprPtr e = parse_expr(std::string(text));
  CHECK(print_expr(e) == text);
  CHECK(e->tag == Expr::Tag::Let);
  CHECK(e->e1->tag == Expr::Tag::Strlen);
}

TEST_CASE("program parsing") {
  Program p = parse_program(std::string(
      "(defs (struct T (a int) (b (ptr c int)))"
      " (fun f ((n int) (p (ptr c (ntarray 0 (+ n 0) int)))) int"
      "  (if (deref p) (deref (+ p (lit 1 int))) (lit 0 int)))"
      " (main (call f (lit 5 int) (lit 0 (ptr c (ntarray 0 5 int))))))"));
  CHECK(p.structs.count("T") == 1);
  CHECK(p.structs["T"].size() == 2);
  REQUIRE(p.funs.count("f") == 1);
  CHECK(p.funs["f"].params.size() == 2);
  CHECK(p.funs["f"].ret.is_int);
  REQUIRE(p.main);
  CHECK(p.main->tag == Expr::Tag::Call);
  // Full round trip through the printer.
  Program p2 = parse_program(print_program(p));
  CHECK(print_program(p2) == print_program(p));
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_expr(std::string("(let x)")), ParseError);
  CHECK_THROWS_AS(parse_expr(std::string("(deref")), ParseError);
  CHECK_THROWS_AS(parse_expr(std::string("42")), ParseError);
  try {
    parse_expr(std::string("(deref\n  (unknownform))"));
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("print/parse round trip on random expressions") {
  Rnd r(12345);
  for (int i = 0; i < 500; i++) {
    ExprPtr e = r.expr(4);
    std::string s1 = print_expr(e);
    ExprPtr e2 = parse_expr(s1);
    CHECK(print_expr(e2) == s1);
  }
}

TEST_CASE("substitution and free variables") {
  WordType t = wt_ptr(Mode::C, ty_array({bconst(0), bvar("n", 2)}, wt_int(), true));
  std::set<std::string> fv;
  free_type_vars(t, fv);
  CHECK(fv == std::set<std::string>{"n"});
  BoundSubst s{{"n", bconst(5)}};
  WordType t2 = subst_type(t, s);
  CHECK(print_type(t2) == "(ptr c (ntarray 0 7 int))");
  BoundSubst s2{{"n", bvar("m", 1)}};
  CHECK(print_type(subst_type(t, s2)) == "(ptr c (ntarray 0 (+ m 3) int))");
}

TEST_CASE("expressions in bound position") {
  CHECK(*expr_as_bound(mk_lit(3, wt_int())) == bconst(3));
  CHECK(*expr_as_bound(mk_var("x")) == bvar("x", 0));
  CHECK(*expr_as_bound(mk_add(mk_var("x"), mk_lit(2, wt_int()))) ==
        bvar("x", 2));
  CHECK(!expr_as_bound(mk_add(mk_lit(1, wt_int()), mk_lit(2, wt_int()))));
  CHECK(!expr_as_bound(mk_lit(3, wt_ptr(Mode::C, ty_word(wt_int())))));
}

TEST_CASE("type sizes") {
  StructEnv D{{"T", {{"a", wt_int()}, {"b", wt_int()}, {"c", wt_int()}}}};
  std::map<std::string, Int> vals{{"n", 4}};
  CHECK(*type_size(ty_word(wt_int()), D, {}) == 1);
  CHECK(*type_size(ty_array({bconst(0), bconst(5)}, wt_int(), false), D, {}) == 5);
  CHECK(*type_size(ty_array({bconst(0), bconst(5)}, wt_int(), true), D, {}) == 6);
  CHECK(*type_size(ty_array({bconst(0), bvar("n", 1)}, wt_int(), false), D, vals) == 5);
  CHECK(*type_size(ty_struct("T"), D, {}) == 3);
  CHECK(!type_size(ty_struct("U"), D, {}));
  CHECK(!type_size(ty_array({bconst(0), bvar("m", 0)}, wt_int(), false), D, vals));
}

TEST_CASE("well-formed types") {
  StructEnv D{{"T", {{"a", wt_int()}}}};
  TypeEnv G{{"n", wt_int()}, {"p", wt_ptr(Mode::C, ty_word(wt_int()))}};
  CHECK(wf_type(G, ty_array({bconst(0), bvar("n", 0)}, wt_int(), true), D));
  CHECK(!wf_type(G, ty_array({bconst(0), bvar("p", 0)}, wt_int(), true), D));
  CHECK(!wf_type(G, ty_array({bconst(0), bvar("m", 0)}, wt_int(), true), D));
  CHECK(wf_type(G, ty_struct("T"), D));
  CHECK(!wf_type(G, ty_struct("U"), D));
}
