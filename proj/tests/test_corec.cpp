#include "doctest.h"

#include "chkc/corec.hpp"

using namespace chkc;

namespace {
COutcome run(const std::string& text, Int fuel = 10000) {
  return eval_corec(parse_cprogram(text), fuel);
}
} // namespace

TEST_CASE("erasure drops annotations pointwise") {
  Stack phi{{"x", StackVal{5, wt_int()}}};
  CStack ephi = erase_stack(phi);
  CHECK(ephi == CStack{{"x", 5}});

  Heap H;
  H.cells[1] = HeapCell{0, wt_int()};
  H.cells[2] = HeapCell{9, wt_ptr(Mode::C, ty_word(wt_int()))};
  H.next = 3;
  CHeap eH = erase_heap(H);
  CHECK(eH.cells == std::map<Int, Int>{{1, 0}, {2, 9}});
  CHECK(eH.next == 3);

  CHECK(erase_stack(Stack{}).empty());
  CHECK(erase_heap(Heap{}).cells.empty());
}

TEST_CASE("basic target evaluation") {
  CHECK(run("3").kind == COutcome::Kind::Value);
  CHECK(run("3").value == 3);
  CHECK(run("(<= 3 5)").value == 1);
  CHECK(run("(<= 5 3)").value == 0);
  CHECK(run("(- 5 3)").value == 2);
  CHECK(run("(let x 4 (+ x x))").value == 8);

  // Failed accesses are genuinely stuck: address 0 is never bound.
  CHECK(run("(deref 0)").kind == COutcome::Kind::Stuck);
  CHECK(run("(assign 7 1)").kind == COutcome::Kind::Stuck);

  // Failure forms are terminal errors, even in binding position.
  CHECK(run("(let x (boundsfail) x)").kind == COutcome::Kind::Bounds);
  CHECK(run("(nullfail)").kind == COutcome::Kind::Null);
}

TEST_CASE("stack assignment updates the innermost live binding") {
  COutcome o = run("(let x 1 (let r (let x 2 (stackassign x 5)) (+ x r)))");
  REQUIRE(o.kind == COutcome::Kind::Value);
  CHECK(o.value == 6); // inner x became 5, outer x still 1

  // Assigning an unbound variable is stuck.
  CHECK(run("(stackassign y 1)").kind == COutcome::Kind::Stuck);
}

TEST_CASE("malloc, strlen, and heap access") {
  COutcome o = run(
      "(let p (malloc 4)"
      " (let a (assign p 104)"
      "  (let q (+ p 1)"
      "   (let b (assign q 105)"
      "    (strlen p)))))");
  REQUIRE(o.kind == COutcome::Kind::Value);
  CHECK(o.value == 2);
  CHECK(o.final_config.heap.cells.at(1) == 104);
  CHECK(o.final_config.heap.next == 5);

  // Scanning off the bound domain is stuck.
  o = run(
      "(let p (malloc 2)"
      " (let a (assign p 1) (let b (+ p 1) (let c (assign b 1) (strlen p)))))");
  CHECK(o.kind == COutcome::Kind::Stuck);

  CHECK(run("(malloc 0)").kind == COutcome::Kind::Stuck);
}

TEST_CASE("calls expand to parameter bindings") {
  COutcome o = run(
      "(defs (fun add2 (a b) (+ a b))"
      " (main (let r (call add2 3 4) r)))");
  REQUIRE(o.kind == COutcome::Kind::Value);
  CHECK(o.value == 7);
  CHECK(o.final_config.phi.empty()); // all bindings popped

  CHECK(run("(call nosuch 1)").kind == COutcome::Kind::Stuck);
}

TEST_CASE("printer and parser round trip") {
  const char* text =
      "(defs (fun f (x) (if x (let y (+ x 1) y) (ret z bot 0)))"
      " (main (let w (call f 3) (stackassign w 2))))";
  CProgram p = parse_cprogram(std::string(text));
  CHECK(print_cprogram(p) == text);
}

TEST_CASE("grammatical A-normal form check") {
  CHECK(is_anf(parse_cprogram("(let x (+ 1 2) (let y (deref x) y))").main));
  CHECK(is_anf(parse_cprogram("(if 1 (let x 2 x) (boundsfail))").main));
  // A let whose right-hand side is itself a let is not grammatical.
  CHECK(!is_anf(parse_cprogram("(let x (let y 1 y) x)").main));
}
