#include "doctest.h"

#include "chkc/gen.hpp"
#include "chkc/parser.hpp"
#include "chkc/props.hpp"
#include "chkc/semantics.hpp"

#include <set>

using namespace chkc;

namespace {

GenConfig small_cfg(uint64_t seed = 7, int depth = 6) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.depth = depth;
  cfg.inject_rate = 0;
  return cfg;
}

} // namespace

TEST_CASE("random stream is replayable and index-split") {
  Rng a = Rng::split(42, 3);
  Rng b = Rng::split(42, 3);
  for (int i = 0; i < 100; i++) CHECK(a.next() == b.next());

  Rng c = Rng::split(42, 4);
  Rng d = Rng::split(42, 3);
  bool diverged = false;
  for (int i = 0; i < 10; i++) diverged |= c.next() != d.next();
  CHECK(diverged);
}

TEST_CASE("range and chance stay in bounds") {
  Rng r(123);
  for (int i = 0; i < 500; i++) {
    Int v = r.range(-2, 5);
    CHECK(v >= -2);
    CHECK(v <= 5);
  }
  int hits = 0;
  for (int i = 0; i < 2000; i++) hits += r.chance(25) ? 1 : 0;
  CHECK(hits > 300);
  CHECK(hits < 700);
}

TEST_CASE("same seed and index reproduce the same program") {
  Generator g1(small_cfg());
  Generator g2(small_cfg());
  for (uint64_t i = 0; i < 30; i++)
    CHECK(print_program(g1.gen_well_typed(i)) ==
          print_program(g2.gen_well_typed(i)));

  Generator g3(small_cfg(8));
  bool differs = false;
  for (uint64_t i = 0; i < 30; i++)
    differs |= print_program(g1.gen_well_typed(i)) !=
               print_program(g3.gen_well_typed(i));
  CHECK(differs);
}

TEST_CASE("generated programs type-check") {
  Generator g(small_cfg(11, 7));
  for (uint64_t i = 0; i < 300; i++) {
    Program p = g.gen_well_typed(i);
    TypeResult r = check_program(p);
    if (!ok(r)) {
      CAPTURE(i);
      CAPTURE(print_program(p));
      CAPTURE(error_of(r).to_string());
      CHECK(ok(r));
    }
  }
}

TEST_CASE("generated programs round-trip through the printer") {
  Generator g(small_cfg(5, 6));
  for (uint64_t i = 0; i < 50; i++) {
    Program p = g.gen_well_typed(i);
    std::string s = print_program(p);
    CHECK(print_program(parse_program(s)) == s);
  }
}

TEST_CASE("injected programs still type-check and carry unchecked code") {
  Generator g(small_cfg(13, 7));
  int injected_count = 0;
  for (uint64_t i = 0; i < 100; i++) {
    bool inj = false;
    Program p = g.gen_blame(i, &inj);
    CHECK(inj); // forced injection always fires (root fallback)
    injected_count++;
    CHECK(ok(check_program(p)));
    CHECK(print_program(p).find("unchecked") != std::string::npos);
  }
  CHECK(injected_count == 100);
}

TEST_CASE("mode and cast relaxations are always rejected") {
  Generator g(small_cfg(17, 6));
  std::set<std::string> seen;
  for (uint64_t i = 0; i < 300; i++) {
    std::string site;
    Program p = g.gen_near_ill_typed(i, &site);
    CHECK(!site.empty());
    seen.insert(site);
    if (site == "T-Def-mode" || site == "T-Cast-checked" ||
        site == "T-Assign-subtype") {
      TypeResult r = check_program(p);
      if (ok(r)) {
        CAPTURE(site);
        CAPTURE(print_program(p));
        CHECK(!ok(r));
      }
    }
  }
  // All four relaxation sites occur across the sample.
  CHECK(seen.count("T-Def-mode"));
  CHECK(seen.count("T-Cast-checked"));
  CHECK(seen.count("T-Assign-subtype"));
  CHECK(seen.count("G-ASTR-offbyone"));
}

TEST_CASE("initialized strings usually have a nonzero head") {
  GenConfig cfg = small_cfg(23, 5);
  cfg.weights["G-ASTR"] = 50; // crowd out the other producers
  Generator g(cfg);
  WordType goal =
      wt_ptr(Mode::C, ty_array({bconst(0), bconst(0)}, wt_int(), true));
  int nonzero = 0, total = 0;
  for (uint64_t i = 0; i < 200; i++) {
    Rng rng = Rng::split(cfg.seed, i);
    ExprPtr e = g.gen_expr(rng, TypeEnv{}, goal, 5);
    Program p;
    p.structs["pair"] = {{"fst", wt_int()}, {"snd", wt_int()}};
    p.main = mk_deref(e); // offset 0 of an NT array is always readable
    if (!ok(check_program(p))) continue;
    EvalOutcome out = eval_program(p, EvalOptions{});
    if (out.kind != EvalOutcome::Kind::Value) continue;
    total++;
    if (out.value != 0) nonzero++;
  }
  CHECK(total > 100);
  CHECK(nonzero * 100 >= total * 30);
}

TEST_CASE("rule telemetry shows the core rules firing") {
  Generator g(small_cfg(29, 8));
  for (uint64_t i = 0; i < 400; i++) g.gen_term(i);
  const auto& counts = g.rule_counts();
  for (const char* rule :
       {"T-Const", "T-Let", "T-If", "T-Add", "T-Ind", "T-IfNT", "T-Str",
        "T-LetStr", "T-Mac", "T-Cast", "T-DynCast", "G-ASTR", "T-Fun",
        "T-IndAssign"}) {
    CAPTURE(rule);
    CHECK(counts.count(rule));
  }
}

TEST_CASE("shrink removes dead lets and reaches a fixed point") {
  // main: let x = 5 in *(0 : ptr c int)  -- fails with null
  Program p;
  p.main = mk_let("x", mk_lit(5, wt_int()),
                  mk_deref(mk_lit(0, wt_ptr(Mode::C, ty_word(wt_int())))));
  auto fails_null = [](const Program& q) {
    if (!ok(check_program(q))) return false;
    return eval_program(q, EvalOptions{}).kind == EvalOutcome::Kind::Null;
  };
  REQUIRE(fails_null(p));
  Program s = shrink(p, fails_null);
  CHECK(fails_null(s));
  CHECK(s.main->tag == Expr::Tag::Deref); // the dead let is gone
  // Idempotent at the local minimum.
  Program s2 = shrink(s, fails_null);
  CHECK(print_program(s2) == print_program(s));
}

TEST_CASE("shrink only keeps failing candidates") {
  // An if whose then-branch is the failure: shrinking must keep it.
  Program p;
  p.main = mk_if(mk_lit(1, wt_int()),
                 mk_deref(mk_lit(0, wt_ptr(Mode::C, ty_word(wt_int())))),
                 mk_lit(7, wt_int()));
  auto fails_null = [](const Program& q) {
    if (!ok(check_program(q))) return false;
    return eval_program(q, EvalOptions{}).kind == EvalOutcome::Kind::Null;
  };
  REQUIRE(fails_null(p));
  Program s = shrink(p, fails_null);
  CHECK(fails_null(s));
  CHECK(s.main->tag == Expr::Tag::Deref);
}

TEST_CASE("check_term passes on a simple checked program") {
  Program p = parse_program("(let x (malloc (array 0 3 int)) "
                            "(deref (+ x (lit 1 int))))");
  TermChecks tc = check_term(p, false, CheckOptions{});
  CHECK(tc.welltyped == PropOutcome::Pass);
  CHECK(tc.progress == PropOutcome::Pass);
  CHECK(tc.preservation == PropOutcome::Pass);
  CHECK(tc.simulation == PropOutcome::Pass);
  CHECK(tc.blame == PropOutcome::Skip);
}

TEST_CASE("check_term tracks source errors through the compiled runs") {
  // Null deref of a word pointer: both sides report null.
  Program p = parse_program("(deref (lit 0 (ptr c int)))");
  TermChecks tc = check_term(p, false, CheckOptions{});
  CHECK(tc.progress == PropOutcome::Pass);
  CHECK(tc.simulation == PropOutcome::Pass);

  // Out-of-window array deref: both sides report bounds.
  Program q = parse_program("(let x (malloc (array 0 2 int)) "
                            "(deref (+ x (lit 2 int))))");
  TermChecks tq = check_term(q, false, CheckOptions{});
  CHECK(tq.progress == PropOutcome::Pass);
  CHECK(tq.simulation == PropOutcome::Pass);
}

TEST_CASE("check_term flags ill-typed input") {
  Program p = parse_program("(deref (cast (ptr u int) (lit 3 int)))");
  TermChecks tc = check_term(p, false, CheckOptions{});
  CHECK(tc.welltyped == PropOutcome::Fail);
  CHECK(!tc.detail.empty());
}

TEST_CASE("blame check accepts injected misuse and flags checked stuckness") {
  // Unchecked misuse: may stick, but only inside the unchecked region.
  Program p = parse_program(
      "(unchecked (deref (cast (ptr u int) (lit 5 int))))");
  TermChecks tc = check_term(p, true, CheckOptions{});
  CHECK(tc.welltyped == PropOutcome::Pass);
  CHECK(tc.blame == PropOutcome::Pass);
  CHECK(tc.progress == PropOutcome::Skip);
}

TEST_CASE("compile_config seeds shadows from mid-trace stack annotations") {
  // A stack with a widened NT pointer: the compiled deref of (p + 1) must
  // succeed because the shadow upper bound carries the widened value.
  Program p;
  p.structs["pair"] = {{"fst", wt_int()}, {"snd", wt_int()}};
  Config c;
  WordType widened =
      wt_ptr(Mode::C, ty_array({bconst(0), bconst(2)}, wt_int(), true));
  c.phi["p"] = StackVal{1, widened};
  c.heap.cells[1] = {104, wt_int()};
  c.heap.cells[2] = {105, wt_int()};
  c.heap.cells[3] = {0, wt_int()};
  c.heap.next = 4;
  c.e = parse_expr("(deref (+ p (lit 2 int)))");

  CConfig cc;
  std::string err;
  REQUIRE(compile_config(p, c, CompileOptions{}, &cc, &err));
  CHECK(cc.phi.at("p$l") == 0);
  CHECK(cc.phi.at("p$h") == 2);
  COutcome out = eval_corec(CFunEnv{}, cc, 10000);
  CHECK(out.kind == COutcome::Kind::Value);
  CHECK(out.value == 0); // the terminator cell, readable at the bound
}

TEST_CASE("compile_config rejects open bounds on the stack") {
  Program p;
  Config c;
  c.phi["p"] = StackVal{
      1, wt_ptr(Mode::C, ty_array({bconst(0), bvar("n", 0)}, wt_int(), true))};
  c.e = mk_lit(0, wt_int());
  CConfig cc;
  std::string err;
  CHECK(!compile_config(p, c, CompileOptions{}, &cc, &err));
  CHECK(err.find("open bounds") != std::string::npos);
}

TEST_CASE("report text is ordered, counted, and capped") {
  PropertyReport r;
  r.add("simulation", PropOutcome::Pass);
  r.add("welltyped", PropOutcome::Pass);
  r.add("welltyped", PropOutcome::Fail);
  r.add("progress", PropOutcome::Inconclusive);
  r.add("blame", PropOutcome::Skip); // skips are not counted
  std::string txt = r.to_text();
  CHECK(txt == "PROP welltyped PASS 1 FAIL 1 INCONCLUSIVE 0\n"
               "PROP progress PASS 0 FAIL 0 INCONCLUSIVE 1\n"
               "PROP simulation PASS 1 FAIL 0 INCONCLUSIVE 0\n");

  PropertyReport a, b;
  a.max_cexs = 2;
  for (uint64_t i : {9u, 1u}) a.cexs.push_back({"progress", i, "pa", ""});
  b.cexs.push_back({"progress", 4, "pb", ""});
  a.merge(b);
  REQUIRE(a.cexs.size() == 2);
  CHECK(a.cexs[0].index == 1);
  CHECK(a.cexs[1].index == 4);
}

TEST_CASE("property run over a small corpus is clean and deterministic") {
  GenConfig cfg = small_cfg(31, 7);
  cfg.count = 60;
  cfg.inject_rate = 20;
  CheckOptions opts;
  PropertyReport r1 = run_properties(cfg, opts, 1);
  PropertyReport r4 = run_properties(cfg, opts, 4);
  CHECK(r1.to_text() == r4.to_text());
  CHECK(!r1.any_fail());
  CHECK(r1.props.at("welltyped").fail == 0);
  CHECK(r1.props.at("blame").pass + r1.props.at("blame").inconclusive > 0);
  CHECK(r1.props.at("simulation").pass > 0);
}

TEST_CASE("dropping null checks is caught by the simulation property") {
  GenConfig cfg = small_cfg(37, 7);
  cfg.count = 300;
  CheckOptions opts;
  opts.compile.insert_null_checks = false;
  opts.check_preservation = false; // isolate the simulation check
  PropertyReport r = run_properties(cfg, opts, 4);
  CHECK(r.props.at("simulation").fail > 0);
  CHECK(!r.cexs.empty());
}
