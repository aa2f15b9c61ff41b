#include "doctest.h"

#include "chkc/emit.hpp"
#include "chkc/gen.hpp"
#include "chkc/parser.hpp"

using namespace chkc;

TEST_CASE("null checked pointer becomes a ptr<int> initializer") {
  Program p = parse_program("(let x (lit 0 (ptr c int)) (lit 1 int))");
  std::string txt = emit_checkedc(p);
  CHECK(txt.find("ptr<int> x = 0;") != std::string::npos);
  CHECK(txt.find("return") != std::string::npos);
}

TEST_CASE("array declarations carry count annotations") {
  Program p = parse_program("(let x (malloc (ntarray 0 3 int)) "
                            "(deref (+ x (lit 1 int))))");
  std::string txt = emit_checkedc(p);
  CHECK(txt.find("nt_array_ptr<int> x : count(3) = "
                 "malloc((3 + 1) * sizeof(int));") != std::string::npos);

  Program q = parse_program("(let x (malloc (array 0 2 int)) (lit 0 int))");
  std::string tq = emit_checkedc(q);
  CHECK(tq.find("array_ptr<int> x : count(2) = malloc(2 * sizeof(int));") !=
        std::string::npos);
}

TEST_CASE("dynamic casts use the dyn_bounds_cast form") {
  Program p = parse_program(
      "(let x (dyncast (ptr c (array 0 2 int)) (malloc (array 0 4 int))) "
      "(lit 0 int))");
  std::string txt = emit_checkedc(p);
  CHECK(txt.find("dyn_bounds_cast<array_ptr<int>>(malloc(4 * sizeof(int)), "
                 "count(2))") != std::string::npos);
}

TEST_CASE("unchecked regions become unchecked blocks") {
  Program p = parse_program(
      "(unchecked (deref (cast (ptr u int) (lit 5 int))))");
  std::string txt = emit_checkedc(p);
  CHECK(txt.find("unchecked {") != std::string::npos);
  CHECK(txt.find("(*((int *)5))") != std::string::npos);
}

TEST_CASE("nt-guard conditionals keep their surface shape") {
  Program p = parse_program(
      "(let p (malloc (ntarray 0 0 int)) "
      "(if (deref p) (deref (+ p (lit 1 int))) (lit 0 int)))");
  std::string txt = emit_checkedc(p);
  CHECK(txt.find("if (*p) {") != std::string::npos);
}

TEST_CASE("functions emit checked parameter declarations") {
  Program p = parse_program(
      "(defs (fun fnt ((n int) (p (ptr c (ntarray 0 (+ n 0) int)))) int "
      "(strlen p)) (main (call fnt (lit 2 int) (malloc (ntarray 0 2 int)))))");
  std::string txt = emit_checkedc(p);
  CHECK(txt.find("int fnt(int n, nt_array_ptr<int> p : count(n)) {") !=
        std::string::npos);
  CHECK(txt.find("strlen(p)") != std::string::npos);
  CHECK(txt.find("fnt(2, malloc((2 + 1) * sizeof(int)))") !=
        std::string::npos);
}

TEST_CASE("struct access renders through member pointers") {
  Program p = parse_program(
      "(defs (struct pair (fst int) (snd int)) "
      "(main (let s (malloc (struct pair)) "
      "(deref (fieldaddr s fst)))))");
  std::string txt = emit_checkedc(p);
  CHECK(txt.find("struct pair { int fst; int snd; };") != std::string::npos);
  CHECK(txt.find("(*(&(s)->fst))") != std::string::npos);
  CHECK(txt.find("ptr<struct pair> s = malloc(sizeof(struct pair));") !=
        std::string::npos);
}

TEST_CASE("runtime-only forms are rejected") {
  Program p;
  p.main = mk_ret("x", SavedBinding{}, mk_lit(0, wt_int()));
  CHECK_THROWS_AS(emit_checkedc(p), EmitError);
}

TEST_CASE("emission is deterministic and total over generated programs") {
  GenConfig cfg;
  cfg.seed = 41;
  cfg.depth = 6;
  cfg.inject_rate = 25;
  Generator g(cfg);
  for (uint64_t i = 0; i < 100; i++) {
    GenResult r = g.gen_term(i);
    std::string a = emit_checkedc(r.program);
    std::string b = emit_checkedc(r.program);
    CHECK(a == b);
    CHECK(!a.empty());
  }
}
