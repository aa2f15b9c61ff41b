#include "doctest.h"

#include "chkc/compile.hpp"
#include "chkc/semantics.hpp"

using namespace chkc;

namespace {

// Evaluate a closure plugged with a final atom under a given target state.
COutcome run_closure(const Closure& c, CAtom result, CStack phi = {},
                     CHeap heap = {}) {
  CConfig start{std::move(phi), std::move(heap), c.plug(result)};
  return eval_corec(CFunEnv{}, start, 10000);
}

// Source-side and compiled-side whole-program evaluation.
EvalOutcome srun(const std::string& text) {
  return eval_program(parse_program(text), EvalOptions{});
}
COutcome crun(const std::string& text, CompileOptions opts = {}) {
  CProgram cp = compile_program(parse_program(text), opts);
  return eval_corec(cp, 100000);
}

WordType nt_ptr(Bound lo, Bound hi) {
  return wt_ptr(Mode::C, ty_array({std::move(lo), std::move(hi)}, wt_int(), true));
}
WordType arr_ptr(Bound lo, Bound hi, Mode m = Mode::C) {
  return wt_ptr(m, ty_array({std::move(lo), std::move(hi)}, wt_int(), false));
}

// All let binders introduced by an expression.
void collect_binders(const CExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->tag == CExpr::Tag::Let) out.insert(e->x);
  collect_binders(e->e1, out);
  collect_binders(e->e2, out);
}

} // namespace

TEST_CASE("null checks") {
  Compiler cc({}, {});
  CHECK(cc.check_null(ca_var("x"), Mode::U).is_hole());

  // Passing pointer: the closure is transparent.
  Closure c = cc.check_null(ca_var("x"), Mode::C);
  CHECK(!c.is_hole());
  COutcome o = run_closure(c, ca_num(42), {{"x", 7}});
  CHECK(o.kind == COutcome::Kind::Value);
  CHECK(o.value == 42);

  // Null pointer: the inserted check fires.
  o = run_closure(c, ca_num(42), {{"x", 0}});
  CHECK(o.kind == COutcome::Kind::Null);

  o = run_closure(cc.check_null(ca_num(5), Mode::C), ca_num(1));
  CHECK(o.value == 1);
  o = run_closure(cc.check_null(ca_num(0), Mode::C), ca_num(1));
  CHECK(o.kind == COutcome::Kind::Null);
}

TEST_CASE("read bounds checks") {
  Compiler cc({}, {});
  // Unchecked pointers are never checked.
  CHECK(cc.check_bounds({}, mk_var("p"), arr_ptr(bconst(0), bconst(3), Mode::U),
                        ca_num(7))
            .is_hole());

  // Tracked NT variable: comparisons run against the shadow pair, and the
  // terminator position (index = hi) is readable.
  ShadowMap rho{{"p", ShadowPair{"p_lo", "p_hi"}}};
  Closure c = cc.check_bounds(rho, mk_var("p"), nt_ptr(bconst(0), bconst(0)),
                              ca_num(0));
  CStack sh{{"p", 1}, {"p_lo", 0}, {"p_hi", 0}};
  COutcome o = run_closure(c, ca_num(11), sh);
  CHECK(o.kind == COutcome::Kind::Value);
  CHECK(o.value == 11);

  // Past the shadow hi: bounds.
  c = cc.check_bounds(rho, mk_var("p"), nt_ptr(bconst(0), bconst(0)), ca_num(1));
  CHECK(run_closure(c, ca_num(11), sh).kind == COutcome::Kind::Bounds);
  // ...unless the shadow was widened.
  sh["p_hi"] = 1;
  CHECK(run_closure(c, ca_num(11), sh).value == 11);

  // Untracked plain array: bounds come from the static type and the upper
  // end is strict.
  c = cc.check_bounds({}, mk_var("q"), arr_ptr(bconst(0), bconst(3)), ca_num(3));
  CHECK(run_closure(c, ca_num(1), {{"q", 1}}).kind == COutcome::Kind::Bounds);
  c = cc.check_bounds({}, mk_var("q"), arr_ptr(bconst(0), bconst(3)), ca_num(2));
  CHECK(run_closure(c, ca_num(1), {{"q", 1}}).value == 1);
  c = cc.check_bounds({}, mk_var("q"), arr_ptr(bconst(0), bconst(3)), ca_num(-1));
  CHECK(run_closure(c, ca_num(1), {{"q", 1}}).kind == COutcome::Kind::Bounds);
}

TEST_CASE("write bounds checks are strict for both array kinds") {
  Compiler cc({}, {});
  ShadowMap rho{{"p", ShadowPair{"p_lo", "p_hi"}}};
  CStack sh{{"p", 1}, {"p_lo", 0}, {"p_hi", 2}};

  // Writing at hi would clobber the terminator: bounds.
  Closure c = cc.check_bounds_w(rho, mk_var("p"), nt_ptr(bconst(0), bconst(2)),
                                ca_num(2));
  CHECK(run_closure(c, ca_num(1), sh).kind == COutcome::Kind::Bounds);
  c = cc.check_bounds_w(rho, mk_var("p"), nt_ptr(bconst(0), bconst(2)), ca_num(1));
  CHECK(run_closure(c, ca_num(1), sh).value == 1);

  CHECK(cc.check_bounds_w({}, mk_var("p"),
                          arr_ptr(bconst(0), bconst(3), Mode::U), ca_num(9))
            .is_hole());

  c = cc.check_bounds_w({}, mk_var("q"), arr_ptr(bconst(0), bconst(3)), ca_num(2));
  CHECK(run_closure(c, ca_num(5), {{"q", 1}}).value == 5);
}

TEST_CASE("dynamic cast bounds checks") {
  Compiler cc({}, {});
  // Narrowing passes.
  Closure c = cc.check_bounds_dyn({}, mk_var("p"), arr_ptr(bconst(0), bconst(3)),
                                  arr_ptr(bconst(0), bconst(5)));
  CHECK(run_closure(c, ca_num(1), {{"p", 1}}).value == 1);

  // Widening fails.
  c = cc.check_bounds_dyn({}, mk_var("p"), arr_ptr(bconst(0), bconst(5)),
                          arr_ptr(bconst(0), bconst(3)));
  CHECK(run_closure(c, ca_num(1), {{"p", 1}}).kind == COutcome::Kind::Bounds);

  // Tracked shadows: reflexive bounds pass while unwidened.
  ShadowMap rho{{"p", ShadowPair{"p_lo", "p_hi"}}};
  c = cc.check_bounds_dyn(rho, mk_var("p"), nt_ptr(bconst(0), bvar("n")),
                          nt_ptr(bconst(0), bvar("n")));
  CHECK(run_closure(c, ca_num(1), {{"p", 1}, {"p_lo", 0}, {"p_hi", 4}, {"n", 4}})
            .value == 1);
}

TEST_CASE("shadow variable introduction") {
  Compiler cc({}, {});
  // Checked NT pointer: two shadow lets plus a map entry.
  auto [c, rho] = cc.extend_rho({}, "p", nt_ptr(bconst(0), bvar("n")));
  REQUIRE(rho.count("p"));
  CHECK(c.frames().size() == 2);
  // Evaluate the binding closure and read back the shadows through a
  // reference to the hi shadow.
  COutcome o = run_closure(c, ca_var(rho.at("p").hi), {{"n", 7}});
  CHECK(o.value == 7);
  o = run_closure(c, ca_var(rho.at("p").lo), {{"n", 7}});
  CHECK(o.value == 0);

  // Non-pointers and plain arrays get no shadows.
  CHECK(cc.extend_rho({}, "x", wt_int()).first.is_hole());
  CHECK(cc.extend_rho({}, "x", wt_int()).second.empty());
  CHECK(cc.extend_rho({}, "q", arr_ptr(bconst(0), bconst(3))).first.is_hole());
}

TEST_CASE("widening insertions") {
  Compiler cc({}, {});
  ShadowMap rho{{"p", ShadowPair{"p_lo", "p_hi"}}};

  // Guard widening: hi goes 0 -> 1, and saturates otherwise.
  Closure c = cc.widen_deref(rho, "p");
  COutcome o = run_closure(c, ca_var("p_hi"), {{"p_lo", 0}, {"p_hi", 0}});
  CHECK(o.value == 1);
  o = run_closure(c, ca_var("p_hi"), {{"p_lo", 0}, {"p_hi", 4}});
  CHECK(o.value == 4);
  CHECK(cc.widen_deref({}, "p").is_hole());

  // strlen widening: hi := max(hi, result).
  CHECK(cc.widen_strlen({}, mk_var("q"), ca_num(5)).is_hole());
  c = cc.widen_strlen(rho, mk_var("p"), ca_num(5));
  CHECK(run_closure(c, ca_var("p_hi"), {{"p_lo", 0}, {"p_hi", 0}}).value == 5);
  c = cc.widen_strlen(rho, mk_var("p"), ca_num(2));
  CHECK(run_closure(c, ca_var("p_hi"), {{"p_lo", 0}, {"p_hi", 7}}).value == 7);
}

TEST_CASE("simple expression compilation") {
  Compiler cc({}, {});
  Compiled r = cc.compile({}, {}, {}, mk_lit(5, wt_int()));
  CHECK(r.code.is_hole());
  CHECK(r.atom == ca_num(5));
  CHECK(r.type == wt_int());

  r = cc.compile({}, {}, {},
                 mk_add(mk_lit(1, wt_int()), mk_lit(2, wt_int())));
  CHECK(!r.code.is_hole());
  COutcome o = run_closure(r.code, r.atom);
  CHECK(o.value == 3);

  TypeEnv G{{"x", wt_int()}};
  r = cc.compile(G, {}, {}, mk_var("x"));
  CHECK(r.code.is_hole());
  CHECK(r.atom == ca_var("x"));

  CHECK_THROWS_AS(cc.compile({}, {}, {}, mk_var("nope")), CompileError);
}

TEST_CASE("whole programs agree with the source semantics on values") {
  const char* progs[] = {
      "(lit 42 int)",
      "(let x (lit 1 int) (+ x (lit 2 int)))",
      "(let p (malloc (array 0 3 int))"
      " (let w (assign (+ p (lit 1 int)) (lit 8 int))"
      "  (deref (+ p (lit 1 int)))))",
      "(let p (malloc (ntarray 0 2 int)) (strlen p))",
      "(if (lit 0 int) (lit 1 int) (lit 2 int))",
      "(let s (malloc (struct pair))"
      " (let w (assign (fieldaddr s snd) (lit 6 int))"
      "  (deref (fieldaddr s snd))))",
  };
  for (const char* body : progs) {
    std::string text =
        std::string("(defs (struct pair (fst int) (snd int)) (main ") + body +
        "))";
    CAPTURE(body);
    EvalOutcome s = srun(text);
    COutcome c = crun(text);
    REQUIRE(s.kind == EvalOutcome::Kind::Value);
    REQUIRE(c.kind == COutcome::Kind::Value);
    CHECK(s.value == c.value);
  }
}

TEST_CASE("whole programs agree with the source semantics on error kinds") {
  struct Case {
    const char* body;
    EvalOutcome::Kind skind;
    COutcome::Kind ckind;
  };
  const Case cases[] = {
      // Null dereference of a word pointer.
      {"(deref (lit 0 (ptr c int)))", EvalOutcome::Kind::Null,
       COutcome::Kind::Null},
      // Out-of-bounds read, including a shifted-to-zero address.
      {"(let p (malloc (array 0 2 int)) (deref (+ p (lit 5 int))))",
       EvalOutcome::Kind::Bounds, COutcome::Kind::Bounds},
      {"(let p (malloc (array 0 2 int)) (deref (+ p (lit -1 int))))",
       EvalOutcome::Kind::Bounds, COutcome::Kind::Bounds},
      // Write at the terminator of an NT array.
      {"(let p (malloc (ntarray 0 2 int))"
       " (assign (+ p (lit 2 int)) (lit 1 int)))",
       EvalOutcome::Kind::Bounds, COutcome::Kind::Bounds},
      // Empty-window direct deref of a null array pointer.
      {"(deref (lit 0 (ptr c (array 0 0 int))))", EvalOutcome::Kind::Bounds,
       COutcome::Kind::Bounds},
      // In-window null array pointer.
      {"(deref (lit 0 (ptr c (array 0 2 int))))", EvalOutcome::Kind::Null,
       COutcome::Kind::Null},
      // Widening dynamic cast.
      {"(let p (malloc (array 0 2 int))"
       " (deref (dyncast (ptr c (array 0 5 int)) p)))",
       EvalOutcome::Kind::Bounds, COutcome::Kind::Bounds},
      // Malloc with an empty window.
      {"(malloc (array 0 0 int))", EvalOutcome::Kind::Bounds,
       COutcome::Kind::Bounds},
      // Null struct pointer.
      {"(deref (fieldaddr (lit 0 (ptr c (struct pair))) fst))",
       EvalOutcome::Kind::Null, COutcome::Kind::Null},
  };
  for (const Case& c : cases) {
    std::string text =
        std::string("(defs (struct pair (fst int) (snd int)) (main ") +
        c.body + "))";
    CAPTURE(c.body);
    CHECK(srun(text).kind == c.skind);
    CHECK(crun(text).kind == c.ckind);
  }
}

TEST_CASE("dependent NT function: widening guard then read past the bound") {
  // Fill an NT array with 1..5 and call a function whose parameter has
  // static bound n; the guard read widens, making *(p+1) safe.
  const char* text =
      "(defs"
      " (fun deref_array ((n int) (p (ptr c (ntarray 0 (+ n 0) int)))) int"
      "  (if (deref p) (deref (+ p (lit 1 int))) (lit 0 int)))"
      " (main (let p0 (malloc (ntarray 0 5 int))"
      "  (let i0 (assign (+ p0 (lit 0 int)) (lit 1 int))"
      "  (let i1 (assign (+ p0 (lit 1 int)) (lit 2 int))"
      "  (let i2 (assign (+ p0 (lit 2 int)) (lit 3 int))"
      "  (let i3 (assign (+ p0 (lit 3 int)) (lit 4 int))"
      "  (let i4 (assign (+ p0 (lit 4 int)) (lit 5 int))"
      "   (call deref_array (lit 5 int) p0)))))))))";
  EvalOutcome s = srun(text);
  REQUIRE(s.kind == EvalOutcome::Kind::Value);
  CHECK(s.value == 2);

  CProgram cp = compile_program(parse_program(text));
  // The callee initializes its own shadow pair: body starts with two lets
  // binding the parameter bounds 0 and n.
  const CExprPtr& body = cp.funs.at("deref_array").body;
  REQUIRE(body->tag == CExpr::Tag::Let);
  CHECK(body->e1->tag == CExpr::Tag::Atom);
  CHECK(body->e1->a1 == ca_num(0));
  REQUIRE(body->e2->tag == CExpr::Tag::Let);
  CHECK(body->e2->e1->a1 == ca_var("n"));
  // Bounds are not extra parameters.
  CHECK(cp.funs.at("deref_array").params ==
        std::vector<std::string>{"n", "p"});

  COutcome c = eval_corec(cp, 100000);
  REQUIRE(c.kind == COutcome::Kind::Value);
  CHECK(c.value == 2);
}

TEST_CASE("guard widening via cast to a zero bound") {
  const char* text =
      "(let p (malloc (ntarray 0 1 int))"
      " (let i0 (assign p (lit 9 int))"
      "  (let q (cast (ptr c (ntarray 0 0 int)) p)"
      "   (if (deref q) (deref (+ q (lit 1 int))) (lit 7 int)))))";
  EvalOutcome s = srun(text);
  REQUIRE(s.kind == EvalOutcome::Kind::Value);
  CHECK(s.value == 0);
  COutcome c = crun(text);
  REQUIRE(c.kind == COutcome::Kind::Value);
  CHECK(c.value == 0);

  // Without guard widening the shadow bound stays 0, so the read at
  // index 1 that the source permits becomes a bounds failure: the
  // simulation property genuinely depends on the insertion.
  CompileOptions no_widen;
  no_widen.insert_widen_deref = false;
  CHECK(crun(text, no_widen).kind == COutcome::Kind::Bounds);
}

TEST_CASE("strlen widening persists in the shadow variables") {
  // Heap: "hi\0" at addresses 1..3; p is a pre-bound NT pointer with
  // static bound 0.  After strlen, the guarded read at offset 1 succeeds
  // and the hi shadow holds the scanned length.
  Compiler cc({}, {});
  TypeEnv G{{"p", nt_ptr(bconst(0), bconst(0))}};
  ShadowMap rho{{"p", ShadowPair{"p$lo", "p$hi"}}};
  CStack stack{{"p", 1}, {"p$lo", 0}, {"p$hi", 0}};
  CHeap heap;
  heap.cells = {{1, 104}, {2, 105}, {3, 0}};
  heap.next = 4;

  ExprPtr e = parse_expr(
      "(let x (strlen p)"
      " (if (deref p) (deref (+ p (lit 1 int))) (lit 0 int)))");
  Compiled r = cc.compile(G, {}, rho, e);
  CConfig start{stack, heap, r.code.plug(r.atom)};
  COutcome o = eval_corec(CFunEnv{}, start, 10000);
  REQUIRE(o.kind == COutcome::Kind::Value);
  CHECK(o.value == 105);
  CHECK(o.final_config.phi.at("p$hi") == 2);

  // The widened shadow outlives the scope of the strlen-bound variable.
  ExprPtr e2 = parse_expr(
      "(let d (let x (strlen p) (lit 0 int))"
      " (deref (+ p (lit 1 int))))");
  Compiled r2 = cc.compile(G, {}, rho, e2);
  CConfig start2{stack, heap, r2.code.plug(r2.atom)};
  o = eval_corec(CFunEnv{}, start2, 10000);
  REQUIRE(o.kind == COutcome::Kind::Value);
  CHECK(o.value == 105);
  CHECK(o.final_config.phi.at("p$hi") == 2);

  // Matching source run: annotation widening mirrors the shadow.
  Stack sphi{{"p", StackVal{1, nt_ptr(bconst(0), bconst(0))}}};
  Heap sheap;
  sheap.cells = {{1, {104, wt_int()}}, {2, {105, wt_int()}}, {3, {0, wt_int()}}};
  sheap.next = 4;
  EvalOutcome so =
      eval_expr(FunEnv{}, StructEnv{}, Config{sphi, sheap, e}, EvalOptions{});
  REQUIRE(so.kind == EvalOutcome::Kind::Value);
  CHECK(so.value == 105);
}

TEST_CASE("copying a widened pointer preserves its shadow bounds") {
  // let q = p rebinds the tracked pointer; q's shadows must alias p's
  // widened values, not the static zero bound.
  Compiler cc({}, {});
  TypeEnv G{{"p", nt_ptr(bconst(0), bconst(0))}};
  ShadowMap rho{{"p", ShadowPair{"p$lo", "p$hi"}}};
  CStack stack{{"p", 1}, {"p$lo", 0}, {"p$hi", 0}};
  CHeap heap;
  heap.cells = {{1, 104}, {2, 105}, {3, 0}};
  heap.next = 4;

  ExprPtr e = parse_expr(
      "(let n (strlen p)"
      " (let q p (deref (+ q (lit 1 int)))))");
  Compiled r = cc.compile(G, {}, rho, e);
  COutcome o = eval_corec(CFunEnv{}, CConfig{stack, heap, r.code.plug(r.atom)},
                          10000);
  REQUIRE(o.kind == COutcome::Kind::Value);
  CHECK(o.value == 105);
}

TEST_CASE("unchecked pointers compile without checks") {
  Compiler cc({}, {});
  TypeEnv G{{"u", wt_ptr(Mode::U, ty_word(wt_int()))}};
  Compiled r = cc.compile(G, {}, {}, mk_unchecked(mk_deref(mk_var("u"))));
  // Exactly one frame: the deref binding itself, no null check.
  CHECK(r.code.frames().size() == 1);
}

TEST_CASE("compiled output is A-normal and hygienic") {
  const char* text =
      "(defs"
      " (fun f ((n int) (p (ptr c (ntarray 0 (+ n 0) int)))) int"
      "  (let m (strlen p) (if (deref p) m (lit 0 int))))"
      " (main (let p0 (malloc (ntarray 0 3 int))"
      "  (let w (assign p0 (lit 1 int))"
      "   (call f (lit 3 int) p0)))))";
  Program p = parse_program(text);
  CProgram cp = compile_program(p);
  CHECK(is_anf(cp.main));
  for (const auto& [name, def] : cp.funs) CHECK(is_anf(def.body));

  // Every generated binder either repeats a source variable or lives in
  // the reserved '$' namespace.
  std::set<std::string> binders;
  collect_binders(cp.main, binders);
  for (const auto& [name, def] : cp.funs) collect_binders(def.body, binders);
  std::set<std::string> source{"n", "p", "m", "p0", "w"};
  for (const std::string& b : binders)
    CHECK((source.count(b) || b[0] == '$'));
}

TEST_CASE("disabling null checks breaks error fidelity") {
  const char* text = "(deref (lit 0 (ptr c int)))";
  CompileOptions no_null;
  no_null.insert_null_checks = false;
  CHECK(srun(text).kind == EvalOutcome::Kind::Null);
  // Without the inserted check the target blindly dereferences address 0,
  // which is genuinely stuck.
  CHECK(crun(text, no_null).kind == COutcome::Kind::Stuck);
}

TEST_CASE("disabling strict write bounds breaks terminator protection") {
  const char* text =
      "(let p (malloc (ntarray 0 2 int))"
      " (assign (+ p (lit 2 int)) (lit 1 int)))";
  CHECK(srun(text).kind == EvalOutcome::Kind::Bounds);
  CHECK(crun(text).kind == COutcome::Kind::Bounds);
  CompileOptions lax;
  lax.strict_write_bounds = false;
  // The lax compiler lets the write at hi through; the source still calls
  // it a bounds error.
  CHECK(crun(text, lax).kind == COutcome::Kind::Value);
}
