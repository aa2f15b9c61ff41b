#include "chkc/gen.hpp"

namespace chkc {

/***** Random stream *****/

uint64_t Rng::next() {
  s += 0x9E3779B97F4A7C15ULL;
  uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng Rng::split(uint64_t seed, uint64_t index) {
  // Mix seed and index through one round so adjacent indices diverge.
  Rng r(seed ^ (index * 0xA24BAED4963EE407ULL + 0x9FB21C651E98DF25ULL));
  r.next();
  return r;
}

uint64_t Rng::below(uint64_t n) { return n == 0 ? 0 : next() % n; }

Int Rng::range(Int lo, Int hi) {
  if (hi <= lo) return lo;
  return lo + static_cast<Int>(below(static_cast<uint64_t>(hi - lo + 1)));
}

bool Rng::chance(int percent) {
  return static_cast<int>(below(100)) < percent;
}

/***** Goal helpers *****/

namespace {

WordType g_int() { return wt_int(); }
WordType g_ptr_int(Mode m = Mode::C) { return wt_ptr(m, ty_word(wt_int())); }
WordType g_arr(Int hi, bool nt) {
  return wt_ptr(Mode::C, ty_array({bconst(0), bconst(hi)}, wt_int(), nt));
}
WordType g_struct() { return wt_ptr(Mode::C, ty_struct("pair")); }

bool is_const_arr_goal(const WordType& t) {
  return is_ptr_to_array(t) && t.pointee->bounds.lo.is_const() &&
         t.pointee->bounds.hi.is_const();
}

} // namespace

/***** Generator state *****/

struct Generator::State {
  Rng rng;
  TypeEnv G;
  bool allow_calls = true;
  bool has_fid = false, has_fnt = false;
  int nvar = 0;

  bool want_inject = false;
  bool injected = false;

  enum class Relax { None, Mode, Cast, Assign, Astr };
  Relax relax = Relax::None;
  bool relaxed = false;
  std::string relax_site;

  explicit State(Rng r) : rng(std::move(r)) {}

  std::string fresh() { return "g" + std::to_string(nvar++); }
};

double Generator::weight(const std::string& rule, double dflt) const {
  auto it = cfg_.weights.find(rule);
  return it == cfg_.weights.end() ? dflt : it->second;
}

namespace {

// Variables of exactly the given type.
std::vector<std::string> vars_exact(const TypeEnv& G, const WordType& t) {
  std::vector<std::string> out;
  for (const auto& [x, xt] : G)
    if (xt == t) out.push_back(x);
  return out;
}

std::vector<std::string> vars_nt(const TypeEnv& G) {
  std::vector<std::string> out;
  for (const auto& [x, xt] : G)
    if (is_checked_nt_ptr(xt)) out.push_back(x);
  return out;
}

// The unchecked legacy-pointer misuse used for blame testing: an
// arbitrary address is cast to an unchecked pointer and dereferenced
// inside an unchecked region.  Wrapping already-checked code would never
// introduce stuck states (checks are keyed on pointer modes), so the
// injection has to bring its own unchecked pointer.
ExprPtr inject_snippet(Rng& rng) {
  return mk_unchecked(mk_deref(
      mk_cast(g_ptr_int(Mode::U), mk_lit(rng.range(0, 6), wt_int()))));
}

} // namespace

/***** Expression generation *****/

ExprPtr Generator::gen_int(State& st, int fuel) {
  Rng& rng = st.rng;

  if (st.want_inject && !st.injected && fuel < cfg_.depth &&
      rng.chance(34)) {
    st.injected = true;
    counts_["inject"]++;
    return inject_snippet(rng);
  }
  if (st.relax != State::Relax::None && !st.relaxed && rng.chance(34)) {
    st.relaxed = true;
    switch (st.relax) {
      case State::Relax::Mode:
        // Dereference of an unchecked pointer outside any unchecked
        // region: the mode premise of the dereference rule is violated.
        st.relax_site = "T-Def-mode";
        counts_["relax-mode"]++;
        return mk_deref(
            mk_cast(g_ptr_int(Mode::U), mk_lit(rng.range(1, 6), wt_int())));
      case State::Relax::Cast:
        // Cast of an integer to a checked pointer in checked mode: the
        // subtype premise of the checked-cast rule is violated.
        st.relax_site = "T-Cast-checked";
        counts_["relax-cast"]++;
        return mk_deref(
            mk_cast(g_ptr_int(Mode::C), mk_lit(rng.range(1, 6), wt_int())));
      case State::Relax::Assign: {
        // Assigned value is not a subtype of the target type.
        st.relax_site = "T-Assign-subtype";
        counts_["relax-assign"]++;
        return mk_assign(mk_malloc(ty_word(wt_int())),
                         mk_lit(0, g_ptr_int(Mode::C)));
      }
      case State::Relax::Astr: {
        // Initialized-string rule with the target bound off by one: the
        // cast claims one readable cell past the guaranteed minimum.
        // This may be accepted (the terminator is readable); acceptance
        // is surfaced through the recorded site for triage.
        st.relax_site = "G-ASTR-offbyone";
        counts_["relax-astr"]++;
        std::string s = st.fresh();
        ExprPtr body = mk_cast(g_arr(1, true), mk_var(s));
        body = mk_let(st.fresh(),
                      mk_assign(mk_add(mk_var(s), mk_lit(0, wt_int())),
                                mk_lit(rng.range(1, 9), wt_int())),
                      body);
        ExprPtr str =
            mk_let(s, mk_malloc(ty_array({bconst(0), bconst(1)}, wt_int(), true)),
                   body);
        return mk_let(st.fresh(), str, mk_lit(0, wt_int()));
      }
      case State::Relax::None:
        break;
    }
  }

  return gen(st, g_int(), fuel);
}

ExprPtr Generator::gen(State& st, const WordType& goal, int fuel) {
  Rng& rng = st.rng;

  struct Cand {
    const char* name;
    double w;
    std::function<ExprPtr()> fn;
  };
  std::vector<Cand> cands;
  double tw = fuel <= 2 ? 2.0 : 1.0; // terminal boost near the leaves

  auto lit_fallback = [&]() -> ExprPtr {
    if (goal.is_int) return mk_lit(rng.range(-3, 9), goal);
    return mk_lit(0, goal); // null is typable at every pointer type
  };

  cands.push_back({"T-Const", weight("T-Const", tw), lit_fallback});
  cands.push_back({"T-Var", weight("T-Var", tw), [&]() -> ExprPtr {
                     auto vs = vars_exact(st.G, goal);
                     if (vs.empty()) return nullptr;
                     return mk_var(vs[rng.below(vs.size())]);
                   }});

  if (fuel > 0) {
    // Binding forms apply at every goal.
    cands.push_back({"T-Let", weight("T-Let", 1), [&]() -> ExprPtr {
                       static const int kPal = 6;
                       WordType pal[kPal] = {g_int(),       g_ptr_int(),
                                             g_arr(0, true), g_arr(2, true),
                                             g_arr(2, false), g_struct()};
                       WordType bt = pal[rng.below(kPal)];
                       ExprPtr rhs = gen(st, bt, fuel - 1);
                       std::string x = st.fresh();
                       TypeEnv saved = st.G;
                       st.G[x] = bt;
                       ExprPtr body = gen(st, goal, fuel - 1);
                       st.G = saved;
                       ExprPtr e = mk_let(x, rhs, body);
                       // Results of binding forms at checked array-pointer
                       // goals are cast back to the goal so the runtime
                       // annotation matches the static type exactly.
                       if (is_const_arr_goal(goal)) e = mk_cast(goal, e);
                       return e;
                     }});
    cands.push_back({"T-If", weight("T-If", 1), [&]() -> ExprPtr {
                       ExprPtr g = gen_int(st, fuel - 1);
                       ExprPtr t = gen(st, goal, fuel - 1);
                       ExprPtr f = gen(st, goal, fuel - 1);
                       ExprPtr e = mk_if(g, t, f);
                       if (is_const_arr_goal(goal)) e = mk_cast(goal, e);
                       return e;
                     }});
  }

  if (goal.is_int) {
    if (fuel > 0) {
      cands.push_back({"T-Add", weight("T-Add", 1), [&]() {
                         return mk_add(gen_int(st, fuel - 1),
                                       gen_int(st, fuel - 1));
                       }});
      cands.push_back({"T-Str", weight("T-Str", 2), [&]() -> ExprPtr {
                         auto vs = vars_nt(st.G);
                         if (vs.empty()) return nullptr;
                         return mk_strlen(vs[rng.below(vs.size())]);
                       }});
      cands.push_back({"T-Def", weight("T-Def", 1), [&]() {
                         return mk_deref(gen(st, g_ptr_int(), fuel - 1));
                       }});
      cands.push_back({"T-DefArr", weight("T-DefArr", 1), [&]() {
                         return mk_deref(gen(st,
                                             g_arr(rng.range(0, 3),
                                                   rng.chance(50)),
                                             fuel - 1));
                       }});
      cands.push_back({"T-Ind", weight("T-Ind", 3), [&]() {
                         Int hi = rng.range(0, 3);
                         ExprPtr p = gen(st, g_arr(hi, rng.chance(50)),
                                         fuel - 1);
                         ExprPtr i = mk_lit(rng.range(-1, hi + 1), wt_int());
                         return mk_deref(mk_add(p, i));
                       }});
      cands.push_back({"T-Assign", weight("T-Assign", 1), [&]() {
                         ExprPtr p = gen(st, g_ptr_int(), fuel - 1);
                         return mk_assign(p, gen_int(st, fuel - 1));
                       }});
      cands.push_back({"T-AssignArr", weight("T-AssignArr", 1), [&]() {
                         ExprPtr p = gen(st,
                                         g_arr(rng.range(0, 3),
                                               rng.chance(50)),
                                         fuel - 1);
                         return mk_assign(p, gen_int(st, fuel - 1));
                       }});
      cands.push_back({"T-IndAssign", weight("T-IndAssign", 2), [&]() {
                         Int hi = rng.range(0, 3);
                         ExprPtr p = gen(st, g_arr(hi, rng.chance(50)),
                                         fuel - 1);
                         ExprPtr i = mk_lit(rng.range(-1, hi + 1), wt_int());
                         return mk_assign(mk_add(p, i),
                                          gen_int(st, fuel - 1));
                       }});
      cands.push_back({"T-IfNT", weight("T-IfNT", 3), [&]() -> ExprPtr {
                         auto vs = vars_nt(st.G);
                         if (vs.empty()) return nullptr;
                         std::string y = vs[rng.below(vs.size())];
                         const WordType& yt = st.G.at(y);
                         ExprPtr guard = mk_deref(mk_var(y));
                         TypeEnv saved = st.G;
                         bool widened = yt.pointee->bounds.hi == bconst(0);
                         if (widened)
                           st.G[y] = wt_ptr(
                               Mode::C, ty_array({yt.pointee->bounds.lo,
                                                  bconst(1)},
                                                 yt.pointee->elem, true));
                         // Half of the widened guards read the newly
                         // exposed cell directly: the idiom the widening
                         // exists for composes too rarely by chance.
                         ExprPtr t =
                             widened && rng.chance(50)
                                 ? mk_deref(mk_add(mk_var(y),
                                                   mk_lit(1, wt_int())))
                                 : gen_int(st, fuel - 1);
                         st.G = saved;
                         ExprPtr f = gen_int(st, fuel - 1);
                         return mk_if(guard, t, f);
                       }});
      cands.push_back({"T-LetStr", weight("T-LetStr", 2), [&]() -> ExprPtr {
                         auto vs = vars_nt(st.G);
                         if (vs.empty()) return nullptr;
                         std::string y = vs[rng.below(vs.size())];
                         std::string x = st.fresh();
                         const WordType& yt = st.G.at(y);
                         TypeEnv saved = st.G;
                         st.G[x] = wt_int();
                         st.G[y] = wt_ptr(
                             Mode::C, ty_array({yt.pointee->bounds.lo,
                                                bvar(x, 0)},
                                               yt.pointee->elem, true));
                         ExprPtr body = gen_int(st, fuel - 1);
                         st.G = saved;
                         return mk_let(x, mk_strlen(y), body);
                       }});
      cands.push_back({"T-StructRead", weight("T-Struct", 1), [&]() {
                         ExprPtr s = gen(st, g_struct(), fuel - 1);
                         const char* f = rng.chance(50) ? "fst" : "snd";
                         return mk_deref(mk_fieldaddr(s, f));
                       }});
      cands.push_back({"T-StructWrite", weight("T-Struct", 1), [&]() {
                         ExprPtr s = gen(st, g_struct(), fuel - 1);
                         const char* f = rng.chance(50) ? "fst" : "snd";
                         return mk_assign(mk_fieldaddr(s, f),
                                          gen_int(st, fuel - 1));
                       }});
      if (st.allow_calls && (st.has_fid || st.has_fnt))
        cands.push_back({"T-Fun", weight("T-Fun", 2), [&]() -> ExprPtr {
                           bool use_fnt =
                               st.has_fnt && (!st.has_fid || rng.chance(50));
                           if (use_fnt) {
                             Int k = rng.range(1, 3);
                             ExprPtr p = gen(st, g_arr(k, true), fuel - 1);
                             return mk_call(
                                 "fnt", {mk_lit(k, wt_int()), std::move(p)});
                           }
                           return mk_call("fid", {gen_int(st, fuel - 1)});
                         }});
    }
  } else if (is_ptr_to_word(goal)) {
    if (fuel > 0) {
      cands.push_back({"T-Mac", weight("T-Mac", 1), [&]() {
                         return mk_malloc(ty_word(wt_int()));
                       }});
      cands.push_back({"T-StructAddr", weight("T-Struct", 1), [&]() {
                         ExprPtr s = gen(st, g_struct(), fuel - 1);
                         const char* f = rng.chance(50) ? "fst" : "snd";
                         return mk_fieldaddr(s, f);
                       }});
    }
  } else if (is_ptr_to_array(goal)) {
    // The candidate lambdas run from the selection loop after this block
    // scope has ended, so everything they need is captured by value.
    const Type& arr = *goal.pointee;
    Int hi = arr.bounds.hi.is_const() ? arr.bounds.hi.off : 1;
    bool nt = arr.nt;
    if (fuel > 0) {
      cands.push_back({"T-Mac", weight("T-Mac", hi > 0 ? 1.0 : 0.3), [&]() {
                         return mk_malloc(*goal.pointee);
                       }});
      cands.push_back({"T-DynCast", weight("T-DynCast", 1), [&, nt]() {
                         Int srchi = rng.range(0, 4);
                         ExprPtr src = gen(st, g_arr(srchi, nt), fuel - 1);
                         return mk_dyncast(goal, std::move(src));
                       }});
      cands.push_back({"T-Cast", weight("T-Cast", 1), [&, hi, nt]() {
                         // Static narrowing from a wider array of the same
                         // kind; always a subtype of the goal.
                         Int srchi = hi + rng.range(0, 2);
                         ExprPtr src = gen(st, g_arr(srchi, nt), fuel - 1);
                         return mk_cast(goal, std::move(src));
                       }});
      if (nt && arr.bounds.hi == bconst(0))
        cands.push_back({"G-ASTR", weight("G-ASTR", 3), [&]() {
                           // An initialized nonempty string, statically
                           // cast down to bounds (0,0): dereferencing the
                           // head then has a high chance of seeing a
                           // nonzero value.
                           Int len = rng.range(1, 5);
                           std::string s = st.fresh();
                           ExprPtr body = mk_cast(goal, mk_var(s));
                           for (Int j = len - 1; j >= 0; j--)
                             body = mk_let(
                                 st.fresh(),
                                 mk_assign(
                                     mk_add(mk_var(s), mk_lit(j, wt_int())),
                                     mk_lit(rng.range(1, 9), wt_int())),
                                 body);
                           return mk_let(
                               s,
                               mk_malloc(ty_array({bconst(0), bconst(len)},
                                                  wt_int(), true)),
                               body);
                         }});
    }
  } else if (is_ptr_to_struct(goal)) {
    if (fuel > 0)
      cands.push_back({"T-Mac", weight("T-Mac", 2), [&]() {
                         return mk_malloc(ty_struct("pair"));
                       }});
  }

  double total = 0;
  for (const Cand& c : cands) total += c.w > 0 ? c.w : 0;
  for (int attempt = 0; attempt < 50 && total > 0; attempt++) {
    double r = static_cast<double>(rng.below(1 << 20)) / (1 << 20) * total;
    const Cand* chosen = &cands.back();
    for (const Cand& c : cands) {
      if (c.w <= 0) continue;
      if (r < c.w) {
        chosen = &c;
        break;
      }
      r -= c.w;
    }
    ExprPtr e = chosen->fn();
    if (e) {
      counts_[chosen->name]++;
      return e;
    }
  }
  counts_["T-Const"]++;
  return lit_fallback();
}

/***** Program generation *****/

Program Generator::gen_program(Rng& rng, State& st) {
  Program p;
  p.structs["pair"] = {{"fst", wt_int()}, {"snd", wt_int()}};

  if (rng.chance(50)) {
    FunDef d;
    d.ret = wt_int();
    d.params = {{"a", wt_int()}};
    TypeEnv saved = st.G;
    st.G = {{"a", wt_int()}};
    st.allow_calls = false;
    d.body = gen_int(st, std::min(4, cfg_.depth));
    st.G = saved;
    p.funs["fid"] = d;
    st.has_fid = true;
  }
  if (rng.chance(50)) {
    FunDef d;
    d.ret = wt_int();
    WordType pt =
        wt_ptr(Mode::C, ty_array({bconst(0), bvar("n", 0)}, wt_int(), true));
    d.params = {{"n", wt_int()}, {"p", pt}};
    TypeEnv saved = st.G;
    st.G = {{"n", wt_int()}, {"p", pt}};
    st.allow_calls = false;
    d.body = gen_int(st, std::min(4, cfg_.depth));
    st.G = saved;
    p.funs["fnt"] = d;
    st.has_fnt = true;
  }

  st.allow_calls = true;
  st.G = {};
  ExprPtr main = gen_int(st, cfg_.depth);

  // Pending injection or relaxation that never fired lands at the root.
  if (st.want_inject && !st.injected) {
    st.injected = true;
    counts_["inject"]++;
    main = mk_let(st.fresh(), inject_snippet(st.rng), main);
  }
  if (st.relax != State::Relax::None && !st.relaxed) {
    // Force one relaxed node by regenerating just the snippet.
    st.relaxed = false;
    ExprPtr snip;
    {
      // Reuse the in-generation construction with a guaranteed fire.
      State tmp = st;
      tmp.relaxed = false;
      while (!tmp.relaxed) snip = gen_int(tmp, 0);
      st.relax_site = tmp.relax_site;
      st.relaxed = true;
      st.nvar = tmp.nvar;
    }
    main = mk_let(st.fresh(), snip, main);
  }

  p.main = main;
  return p;
}

GenResult Generator::gen_term(uint64_t index) {
  State st(Rng::split(cfg_.seed, index));
  if (cfg_.mode == GenConfig::Mode::NearIllTyped) {
    st.relax = static_cast<State::Relax>(1 + st.rng.below(4));
  } else {
    st.want_inject = cfg_.inject_rate > 0 && st.rng.chance(cfg_.inject_rate);
  }
  GenResult out;
  out.program = gen_program(st.rng, st);
  out.injected = st.injected;
  out.relax_site = st.relax_site;
  return out;
}

Program Generator::gen_well_typed(uint64_t index) {
  State st(Rng::split(cfg_.seed, index));
  return gen_program(st.rng, st);
}

Program Generator::gen_blame(uint64_t index, bool* injected) {
  State st(Rng::split(cfg_.seed, index));
  st.want_inject = true;
  Program p = gen_program(st.rng, st);
  if (injected) *injected = st.injected;
  return p;
}

Program Generator::gen_near_ill_typed(uint64_t index, std::string* site) {
  State st(Rng::split(cfg_.seed, index));
  st.relax = static_cast<State::Relax>(1 + st.rng.below(4));
  Program p = gen_program(st.rng, st);
  if (site) *site = st.relax_site;
  return p;
}

ExprPtr Generator::gen_expr(Rng& rng, const TypeEnv& G, const WordType& goal,
                            int fuel) {
  State st(rng);
  st.G = G;
  st.allow_calls = false;
  ExprPtr e = gen(st, goal, fuel);
  rng = st.rng;
  return e;
}

/***** Shrinking *****/

namespace {

Int node_count(const ExprPtr& e) {
  if (!e) return 0;
  Int n = 1 + node_count(e->e1) + node_count(e->e2) + node_count(e->e3);
  for (const auto& a : e->args) n += node_count(a);
  return n;
}

Int lit_weight(const ExprPtr& e) {
  if (!e) return 0;
  Int n = e->tag == Expr::Tag::Lit ? std::abs(e->n) : 0;
  n += lit_weight(e->e1) + lit_weight(e->e2) + lit_weight(e->e3);
  for (const auto& a : e->args) n += lit_weight(a);
  return n;
}

// Conservative occurrence check (ignores shadowing).
bool uses_var(const ExprPtr& e, const std::string& x) {
  if (!e) return false;
  if ((e->tag == Expr::Tag::Var || e->tag == Expr::Tag::Strlen ||
       e->tag == Expr::Tag::Ret) &&
      e->x == x)
    return true;
  std::set<std::string> tv;
  if (e->tag == Expr::Tag::Lit) free_type_vars(e->annot, tv);
  if (e->tag == Expr::Tag::Cast || e->tag == Expr::Tag::DynCast)
    free_type_vars(e->cast_ty, tv);
  if (e->tag == Expr::Tag::Malloc) free_type_vars(e->omega, tv);
  if (tv.count(x)) return true;
  if (uses_var(e->e1, x) || uses_var(e->e2, x) || uses_var(e->e3, x))
    return true;
  for (const auto& a : e->args)
    if (uses_var(a, x)) return true;
  return false;
}

// Replace the child in the given slot (0..2 are e1..e3, 10+i are args).
ExprPtr with_child(const ExprPtr& e, int slot, ExprPtr c) {
  Expr t = *e;
  if (slot == 0)
    t.e1 = std::move(c);
  else if (slot == 1)
    t.e2 = std::move(c);
  else if (slot == 2)
    t.e3 = std::move(c);
  else
    t.args[slot - 10] = std::move(c);
  return std::make_shared<const Expr>(std::move(t));
}

std::vector<int> child_slots(const ExprPtr& e) {
  std::vector<int> out;
  if (e->e1) out.push_back(0);
  if (e->e2) out.push_back(1);
  if (e->e3) out.push_back(2);
  for (size_t i = 0; i < e->args.size(); i++)
    out.push_back(10 + static_cast<int>(i));
  return out;
}

// Single-node replacement candidates, smaller-first.
std::vector<ExprPtr> local_candidates(const ExprPtr& e) {
  std::vector<ExprPtr> out;
  if (e->tag == Expr::Tag::Lit) {
    if (e->n != 0) {
      out.push_back(mk_lit(0, e->annot));
      if (e->n / 2 != 0) out.push_back(mk_lit(e->n / 2, e->annot));
    }
    return out;
  }
  out.push_back(mk_lit(0, wt_int()));
  if (e->tag == Expr::Tag::Let && !uses_var(e->e2, e->x))
    out.push_back(e->e2);
  if (e->tag == Expr::Tag::If) {
    out.push_back(e->e2);
    out.push_back(e->e3);
  }
  // Hoist any child into this position.
  for (int s : child_slots(e)) {
    if (s == 0) out.push_back(e->e1);
    else if (s == 1) out.push_back(e->e2);
    else if (s == 2) out.push_back(e->e3);
    else out.push_back(e->args[s - 10]);
  }
  return out;
}

struct Shrinker {
  const Program& base;
  const std::function<bool(const Program&)>& still_fails;
  Int best_nodes, best_lits;
  Program result;
  bool improved = false;

  bool accept(ExprPtr main) {
    Int n = node_count(main);
    Int l = lit_weight(main);
    if (n > best_nodes || (n == best_nodes && l >= best_lits)) return false;
    Program q = base;
    q.main = std::move(main);
    if (!still_fails(q)) return false;
    best_nodes = n;
    best_lits = l;
    result = std::move(q);
    improved = true;
    return true;
  }

  // Try rewrites at e's position; `plug` rebuilds the whole main.
  bool visit(const ExprPtr& e,
             const std::function<ExprPtr(ExprPtr)>& plug) {
    for (const ExprPtr& c : local_candidates(e))
      if (accept(plug(c))) return true;
    for (int s : child_slots(e)) {
      ExprPtr child = s == 0   ? e->e1
                      : s == 1 ? e->e2
                      : s == 2 ? e->e3
                               : e->args[s - 10];
      auto sub = [&, s](ExprPtr r) { return plug(with_child(e, s, r)); };
      if (visit(child, sub)) return true;
    }
    return false;
  }
};

} // namespace

Program shrink(const Program& p,
               const std::function<bool(const Program&)>& still_fails) {
  Program cur = p;
  for (;;) {
    Shrinker s{cur, still_fails, node_count(cur.main), lit_weight(cur.main),
               cur, false};
    auto id = [](ExprPtr e) { return e; };
    s.visit(cur.main, id);
    if (!s.improved) return cur;
    cur = s.result;
  }
}

} // namespace chkc
