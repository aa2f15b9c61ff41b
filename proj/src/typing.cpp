#include "chkc/typing.hpp"

namespace chkc {

/***** Bound comparison *****/

namespace {

Bound resolve_bound(const Bound& b, const IntStack& phi) {
  if (!b.is_const()) {
    auto it = phi.find(b.var);
    if (it != phi.end()) return bconst(it->second + b.off);
  }
  return b;
}

} // namespace

bool bound_le(const Bound& b1, const Bound& b2, const PredEnv& theta,
              const IntStack& phi) {
  Bound a = resolve_bound(b1, phi);
  Bound b = resolve_bound(b2, phi);
  if (a.is_const() && b.is_const()) return a.off <= b.off;
  if (!a.is_const() && !b.is_const() && a.var == b.var) return a.off <= b.off;
  if (a.is_const() && !b.is_const()) {
    auto it = theta.find(b.var);
    if (it != theta.end() && it->second == Pred::GeZero)
      return a.off <= b.off;
  }
  return false;
}

/***** Subtyping *****/

bool subtype(const WordType& sub, const WordType& sup, const PredEnv& theta,
             const IntStack& phi, const StructEnv& D) {
  if (sub == sup) return true;
  if (sub.is_int || sup.is_int) return sub.is_int && sup.is_int;
  if (sub.mode != sup.mode) return false;
  const Type& o1 = *sub.pointee;
  const Type& o2 = *sup.pointee;
  auto ble = [&](const Bound& a, const Bound& b) {
    return bound_le(a, b, theta, phi);
  };

  if (o1.tag == Type::Tag::Word && o2.tag == Type::Tag::Array) {
    // A singleton pointer can be viewed as a plain array covering [lo, hi)
    // with 0 <= lo and hi <= 1.
    return !o2.nt && o2.elem == o1.word &&
           ble(bconst(0), o2.bounds.lo) && ble(o2.bounds.hi, bconst(1));
  }
  if (o1.tag == Type::Tag::Array && o2.tag == Type::Tag::Word) {
    // An array covering at least [0, 1) can be viewed as a singleton.
    return o1.elem == o2.word && ble(o1.bounds.lo, bconst(0)) &&
           ble(bconst(1), o1.bounds.hi);
  }
  if (o1.tag == Type::Tag::Array && o2.tag == Type::Tag::Array) {
    // Bounds may shrink; null-terminated arrays may forget termination.
    bool kind_ok = (o1.nt == o2.nt) || (o1.nt && !o2.nt);
    return kind_ok && o1.elem == o2.elem &&
           ble(o1.bounds.lo, o2.bounds.lo) && ble(o2.bounds.hi, o1.bounds.hi);
  }
  if (o1.tag == Type::Tag::Struct) {
    auto it = D.find(o1.struct_name);
    if (it == D.end() || it->second.empty()) return false;
    bool first_int = it->second.front().second.is_int;
    if (o2.tag == Type::Tag::Word)
      return first_int && o2.word.is_int;
    if (o2.tag == Type::Tag::Array)
      return first_int && !o2.nt && o2.elem.is_int &&
             ble(bconst(0), o2.bounds.lo) && ble(o2.bounds.hi, bconst(1));
  }
  return false;
}

std::optional<WordType> type_join(const WordType& a, const WordType& b,
                                  const PredEnv& theta, const IntStack& phi,
                                  const StructEnv& D) {
  if (subtype(a, b, theta, phi, D)) return b;
  if (subtype(b, a, theta, phi, D)) return a;
  if (!a.is_int && !b.is_int && a.mode == b.mode &&
      a.pointee->tag == Type::Tag::Array &&
      b.pointee->tag == Type::Tag::Array) {
    const Type& o1 = *a.pointee;
    const Type& o2 = *b.pointee;
    if (o1.elem != o2.elem) return std::nullopt;
    auto ble = [&](const Bound& x, const Bound& y) {
      return bound_le(x, y, theta, phi);
    };
    Bound lo, hi;
    if (ble(o1.bounds.lo, o2.bounds.lo))
      lo = o2.bounds.lo;
    else if (ble(o2.bounds.lo, o1.bounds.lo))
      lo = o1.bounds.lo;
    else
      return std::nullopt;
    if (ble(o1.bounds.hi, o2.bounds.hi))
      hi = o1.bounds.hi;
    else if (ble(o2.bounds.hi, o1.bounds.hi))
      hi = o2.bounds.hi;
    else
      return std::nullopt;
    WordType r = wt_ptr(a.mode, ty_array({lo, hi}, o1.elem, o1.nt && o2.nt));
    if (subtype(a, r, theta, phi, D) && subtype(b, r, theta, phi, D))
      return r;
  }
  return std::nullopt;
}

/***** Literal typing *****/

bool type_literal_scoped(const Heap& H, const StructEnv& D, ScopeSet& sigma,
                         Int n, const WordType& t) {
  if (t.is_int) return true;
  if (t.mode == Mode::U) return true;
  if (n == 0) return true;
  auto key = std::make_pair(n, print_type(t));
  if (sigma.count(key)) return true;

  // Determine the cell region covered by the pointer.  For arrays this is
  // the annotated [lo, hi) window relative to the pointer (plus the
  // terminator cell when null-terminated), so shifted pointers into the
  // middle of an array re-type at their shifted bounds.
  const Type& w = *t.pointee;
  Int lo = 0, hi = 0;
  switch (w.tag) {
    case Type::Tag::Word:
      lo = 0;
      hi = 1;
      break;
    case Type::Tag::Struct: {
      auto it = D.find(w.struct_name);
      if (it == D.end()) return false;
      lo = 0;
      hi = static_cast<Int>(it->second.size());
      break;
    }
    case Type::Tag::Array: {
      if (!w.bounds.lo.is_const() || !w.bounds.hi.is_const()) return false;
      lo = w.bounds.lo.off;
      hi = w.bounds.hi.off + (w.nt ? 1 : 0);
      break;
    }
  }

  // Assume the pointer itself is well typed while checking what it points
  // to; each reachable cell is checked at its own annotation.
  sigma.insert(key);
  for (Int i = lo; i < hi; i++) {
    auto it = H.cells.find(n + i);
    if (it == H.cells.end() ||
        !type_literal_scoped(H, D, sigma, it->second.val, it->second.annot)) {
      sigma.erase(key);
      return false;
    }
  }
  return true;
}

bool type_literal(const Heap& H, const StructEnv& D, Int n,
                  const WordType& t) {
  ScopeSet sigma;
  return type_literal_scoped(H, D, sigma, n, t);
}

/***** Expression typing *****/

namespace {

TypeResult err(const std::string& rule, const std::string& msg) {
  return TypeError{rule, msg};
}

const Heap& heap_or_empty(const TypingCtx& ctx) {
  static const Heap empty;
  return ctx.heap ? *ctx.heap : empty;
}

const StructEnv& structs_or_empty(const TypingCtx& ctx) {
  static const StructEnv empty;
  return ctx.structs ? *ctx.structs : empty;
}

const FunEnv& funs_or_empty(const TypingCtx& ctx) {
  static const FunEnv empty;
  return ctx.funs ? *ctx.funs : empty;
}

bool is_nt_guard(const TypeEnv& G, const ExprPtr& guard, std::string* var) {
  if (guard->tag != Expr::Tag::Deref || guard->e1->tag != Expr::Tag::Var)
    return false;
  auto it = G.find(guard->e1->x);
  if (it == G.end() || !is_checked_nt_ptr(it->second)) return false;
  if (var) *var = guard->e1->x;
  return true;
}

} // namespace

TypeResult type_expr(const TypingCtx& ctx, const TypeEnv& G,
                     const PredEnv& theta, Mode m, const ExprPtr& e) {
  const StructEnv& D = structs_or_empty(ctx);
  auto sub = [&](const WordType& a, const WordType& b) {
    return subtype(a, b, theta, ctx.phi, D);
  };

  switch (e->tag) {
    case Expr::Tag::Lit: {
      if (!type_is_closed(e->annot))
        return err("T-Const", "literal annotation has free variables");
      if (!type_literal(heap_or_empty(ctx), D, e->n, e->annot))
        return err("T-Const", "literal " + std::to_string(e->n) +
                                  " is not well typed at " +
                                  print_type(e->annot));
      return e->annot;
    }

    case Expr::Tag::Var: {
      auto it = G.find(e->x);
      if (it == G.end()) return err("T-Var", "unbound variable " + e->x);
      return it->second;
    }

    case Expr::Tag::Strlen: {
      auto it = G.find(e->x);
      if (it == G.end()) return err("T-Str", "unbound variable " + e->x);
      const WordType& t = it->second;
      if (t.is_int || t.pointee->tag != Type::Tag::Array || !t.pointee->nt)
        return err("T-Str", "strlen requires a null-terminated array pointer");
      if (t.mode != m)
        return err("T-Str", "strlen pointer mode does not match context");
      return wt_int();
    }

    case Expr::Tag::Add: {
      TypeResult t1 = type_expr(ctx, G, theta, m, e->e1);
      if (!ok(t1)) return t1;
      TypeResult t2 = type_expr(ctx, G, theta, m, e->e2);
      if (!ok(t2)) return t2;
      if (!type_of(t1).is_int || !type_of(t2).is_int)
        return err("T-Add", "addition requires integer operands");
      return wt_int();
    }

    case Expr::Tag::Deref: {
      const ExprPtr& inner = e->e1;
      if (inner->tag == Expr::Tag::Add) {
        TypeResult t1 = type_expr(ctx, G, theta, m, inner->e1);
        if (!ok(t1)) return t1;
        if (is_ptr_to_array(type_of(t1))) {
          TypeResult t2 = type_expr(ctx, G, theta, m, inner->e2);
          if (!ok(t2)) return t2;
          if (!type_of(t2).is_int)
            return err("T-Ind", "array index must be an integer");
          if (!mode_le(m, type_of(t1).mode))
            return err("T-Ind", "checked context requires a checked pointer");
          return type_of(t1).pointee->elem;
        }
        // Fall through: the sum itself must type as a pointer (it cannot),
        // so report through the plain dereference rules.
      }
      TypeResult t = type_expr(ctx, G, theta, m, inner);
      if (!ok(t)) return t;
      const WordType& wt = type_of(t);
      if (wt.is_int)
        return err("T-Def", "dereference of a non-pointer");
      if (!mode_le(m, wt.mode))
        return err("T-Def", "checked context requires a checked pointer");
      switch (wt.pointee->tag) {
        case Type::Tag::Word:
          return wt.pointee->word;
        case Type::Tag::Array:
          return wt.pointee->elem;
        case Type::Tag::Struct:
          return err("T-Def", "dereference of a struct pointer");
      }
      return err("T-Def", "dereference of a non-pointer");
    }

    case Expr::Tag::Assign: {
      const ExprPtr& lhs = e->e1;
      if (lhs->tag == Expr::Tag::Add) {
        TypeResult t1 = type_expr(ctx, G, theta, m, lhs->e1);
        if (!ok(t1)) return t1;
        if (!is_ptr_to_array(type_of(t1)))
          return err("T-IndAssign", "indexed assignment requires an array pointer");
        TypeResult t2 = type_expr(ctx, G, theta, m, lhs->e2);
        if (!ok(t2)) return t2;
        if (!type_of(t2).is_int)
          return err("T-IndAssign", "array index must be an integer");
        if (!mode_le(m, type_of(t1).mode))
          return err("T-IndAssign", "checked context requires a checked pointer");
        TypeResult t3 = type_expr(ctx, G, theta, m, e->e2);
        if (!ok(t3)) return t3;
        WordType elem = type_of(t1).pointee->elem;
        if (!sub(type_of(t3), elem))
          return err("T-IndAssign", "assigned value is not a subtype of the element type");
        return elem;
      }
      TypeResult t1 = type_expr(ctx, G, theta, m, lhs);
      if (!ok(t1)) return t1;
      const WordType& wt = type_of(t1);
      if (wt.is_int) return err("T-Assign", "assignment through a non-pointer");
      if (!mode_le(m, wt.mode))
        return err("T-Assign", "checked context requires a checked pointer");
      TypeResult t2 = type_expr(ctx, G, theta, m, e->e2);
      if (!ok(t2)) return t2;
      switch (wt.pointee->tag) {
        case Type::Tag::Word: {
          if (!sub(type_of(t2), wt.pointee->word))
            return err("T-Assign", "assigned value is not a subtype of the target type");
          return wt.pointee->word;
        }
        case Type::Tag::Array: {
          if (!sub(type_of(t2), wt.pointee->elem))
            return err("T-AssignArr", "assigned value is not a subtype of the element type");
          return wt.pointee->elem;
        }
        case Type::Tag::Struct:
          return err("T-Assign", "assignment through a struct pointer");
      }
      return err("T-Assign", "assignment through a non-pointer");
    }

    case Expr::Tag::Malloc: {
      if (!wf_type(G, e->omega, D))
        return err("T-Mac", "malloc type is not well formed");
      return wt_ptr(Mode::C, e->omega);
    }

    case Expr::Tag::Unchecked:
      return type_expr(ctx, G, theta, Mode::U, e->e1);

    case Expr::Tag::Cast: {
      if (!wf_type(G, e->cast_ty, D))
        return err("T-Cast", "cast type is not well formed");
      TypeResult t = type_expr(ctx, G, theta, m, e->e1);
      if (!ok(t)) return t;
      if (m == Mode::C && !e->cast_ty.is_int && e->cast_ty.mode == Mode::C) {
        if (!sub(type_of(t), e->cast_ty))
          return err("T-CastCheckedPtr",
                     "cast to a checked pointer requires a subtype source");
      }
      return e->cast_ty;
    }

    case Expr::Tag::DynCast: {
      if (!wf_type(G, e->cast_ty, D))
        return err("T-DynCast", "cast type is not well formed");
      const WordType& tt = e->cast_ty;
      if (tt.is_int || tt.pointee->tag != Type::Tag::Array)
        return err("T-DynCast", "dynamic cast target must be an array pointer");
      TypeResult t = type_expr(ctx, G, theta, m, e->e1);
      if (!ok(t)) return t;
      const WordType& st = type_of(t);
      if (st.is_int || st.pointee->tag != Type::Tag::Array)
        return err("T-DynCast", "dynamic cast source must be an array pointer");
      if (st.pointee->nt != tt.pointee->nt ||
          st.pointee->elem != tt.pointee->elem)
        return err("T-DynCast", "dynamic cast must preserve array kind and element type");
      if (tt.mode != m || st.mode != m)
        return err("T-DynCast", "dynamic cast pointer modes must match context");
      return tt;
    }

    case Expr::Tag::FieldAddr: {
      TypeResult t = type_expr(ctx, G, theta, m, e->e1);
      if (!ok(t)) return t;
      const WordType& st = type_of(t);
      if (st.is_int || st.pointee->tag != Type::Tag::Struct)
        return err("T-Struct", "field address requires a struct pointer");
      if (st.mode != m)
        return err("T-Struct", "struct pointer mode must match context");
      auto it = D.find(st.pointee->struct_name);
      if (it == D.end())
        return err("T-Struct", "unknown struct " + st.pointee->struct_name);
      for (const auto& [f, ft] : it->second)
        if (f == e->f) return wt_ptr(st.mode, ty_word(ft));
      return err("T-Struct", "struct " + st.pointee->struct_name +
                                 " has no field " + e->f);
    }

    case Expr::Tag::If: {
      std::string ntvar;
      if (is_nt_guard(G, e->e1, &ntvar)) {
        const WordType& pt = G.at(ntvar);
        const Type& arr = *pt.pointee;
        if (arr.bounds.hi == bconst(0)) {
          // Successful guard proves at least one more readable cell, so the
          // then branch sees the upper bound widened to 1.
          TypeEnv Gt = G;
          Gt[ntvar] =
              wt_ptr(Mode::C, ty_array({arr.bounds.lo, bconst(1)}, arr.elem, true));
          TypeResult t2 = type_expr(ctx, Gt, theta, m, e->e2);
          if (!ok(t2)) return t2;
          TypeResult t3 = type_expr(ctx, G, theta, m, e->e3);
          if (!ok(t3)) return t3;
          auto j = type_join(type_of(t2), type_of(t3), theta, ctx.phi, D);
          if (!j) return err("T-IfNT", "branch types have no join");
          return *j;
        }
      }
      TypeResult t1 = type_expr(ctx, G, theta, m, e->e1);
      if (!ok(t1)) return t1;
      TypeResult t2 = type_expr(ctx, G, theta, m, e->e2);
      if (!ok(t2)) return t2;
      TypeResult t3 = type_expr(ctx, G, theta, m, e->e3);
      if (!ok(t3)) return t3;
      auto j = type_join(type_of(t2), type_of(t3), theta, ctx.phi, D);
      if (!j) return err("T-If", "branch types have no join");
      return *j;
    }

    case Expr::Tag::Let: {
      const std::string& x = e->x;
      // A strlen binding of a checked NT pointer refines the pointer's
      // upper bound to the bound variable within the body.
      if (e->e1->tag == Expr::Tag::Strlen && x != e->e1->x) {
        const std::string& y = e->e1->x;
        auto it = G.find(y);
        if (it != G.end() && is_checked_nt_ptr(it->second)) {
          const Type& arr = *it->second.pointee;
          TypeEnv Gp = G;
          Gp[x] = wt_int();
          Gp[y] =
              wt_ptr(Mode::C, ty_array({arr.bounds.lo, bvar(x, 0)}, arr.elem, true));
          PredEnv thp = theta;
          thp[x] = Pred::GeZero;
          TypeResult tb = type_expr(ctx, Gp, thp, m, e->e2);
          // The refinement is a strengthening, not an obligation: when
          // the body only types under y's original bound, or the bound
          // variable would escape in the result, the binding is treated
          // as an ordinary let below.
          if (ok(tb)) {
            std::set<std::string> fv;
            free_type_vars(type_of(tb), fv);
            if (!fv.count(x)) return tb;
          }
        }
      }
      TypeResult t1 = type_expr(ctx, G, theta, m, e->e1);
      if (!ok(t1)) return t1;
      TypeEnv Gp = G;
      Gp[x] = type_of(t1);
      PredEnv thp = theta;
      thp.erase(x);
      TypeResult tb = type_expr(ctx, Gp, thp, m, e->e2);
      if (!ok(tb)) return tb;
      std::set<std::string> fv;
      free_type_vars(type_of(tb), fv);
      if (fv.count(x)) {
        auto b = expr_as_bound(e->e1);
        if (!type_of(t1).is_int || !b)
          return err("T-Let",
                     "dependent let requires an integer bound expression");
        BoundSubst s{{x, *b}};
        return subst_type(type_of(tb), s);
      }
      return type_of(tb);
    }

    case Expr::Tag::Ret: {
      if (!G.count(e->x))
        return err("T-Ret", "returned variable " + e->x + " is not in scope");
      return type_expr(ctx, G, theta, m, e->e1);
    }

    case Expr::Tag::Call: {
      const FunEnv& funs = funs_or_empty(ctx);
      auto it = funs.find(e->f);
      if (it == funs.end())
        return err("T-Fun", "unknown function " + e->f);
      const FunDef& def = it->second;
      if (def.params.size() != e->args.size())
        return err("T-Fun", "wrong number of arguments to " + e->f);

      // Which parameters occur free in the signature's types?
      std::set<std::string> needed;
      {
        std::set<std::string> fv;
        for (const auto& [p, pt] : def.params) free_type_vars(pt, fv);
        free_type_vars(def.ret, fv);
        for (const auto& [p, pt] : def.params)
          if (fv.count(p)) needed.insert(p);
      }
      BoundSubst s;
      for (size_t i = 0; i < def.params.size(); i++) {
        if (!needed.count(def.params[i].first)) continue;
        auto b = expr_as_bound(e->args[i]);
        if (!b)
          return err("T-Fun", "argument for dependent parameter " +
                                  def.params[i].first +
                                  " must be a bound expression");
        s[def.params[i].first] = *b;
      }
      for (size_t i = 0; i < def.params.size(); i++) {
        TypeResult ta = type_expr(ctx, G, theta, m, e->args[i]);
        if (!ok(ta)) return ta;
        WordType want = subst_type(def.params[i].second, s);
        if (!sub(type_of(ta), want))
          return err("T-Fun", "argument " + std::to_string(i + 1) + " to " +
                                  e->f + " has type " +
                                  print_type(type_of(ta)) +
                                  " which is not a subtype of " +
                                  print_type(want));
      }
      return subst_type(def.ret, s);
    }
  }
  return err("T-Internal", "unhandled expression form");
}

TypeResult check_program(const Program& p) {
  TypingCtx ctx;
  ctx.funs = &p.funs;
  ctx.structs = &p.structs;

  for (const auto& [name, fields] : p.structs) {
    for (const auto& [f, ft] : fields)
      if (!wf_type(TypeEnv{}, ft, p.structs))
        return TypeError{"T-StructDef",
                         "field " + f + " of struct " + name +
                             " has an ill-formed type"};
  }
  for (const auto& [name, def] : p.funs) {
    TypeEnv G;
    for (const auto& [x, t] : def.params) G[x] = t;
    for (const auto& [x, t] : def.params)
      if (!wf_type(G, t, p.structs))
        return TypeError{"T-FunDef", "parameter " + x + " of " + name +
                                         " has an ill-formed type"};
    if (!wf_type(G, def.ret, p.structs))
      return TypeError{"T-FunDef",
                       "result type of " + name + " is ill-formed"};
    TypeResult tb = type_expr(ctx, G, PredEnv{}, Mode::C, def.body);
    if (!ok(tb)) return tb;
    if (!(type_of(tb) == def.ret) &&
        !subtype(type_of(tb), def.ret, PredEnv{}, IntStack{}, p.structs))
      return TypeError{"T-FunDef",
                       "body of " + name + " has type " +
                           print_type(type_of(tb)) +
                           " which does not match declared " +
                           print_type(def.ret)};
  }
  return type_expr(ctx, TypeEnv{}, PredEnv{}, Mode::C, p.main);
}

/***** Consistency relations *****/

bool stack_consistent(const TypeEnv& G, const PredEnv& theta,
                      const Stack& phi, const StructEnv& D) {
  IntStack ints;
  for (const auto& [x, v] : phi)
    if (v.annot.is_int) ints[x] = v.n;
  for (const auto& [x, t] : G) {
    auto it = phi.find(x);
    if (it == phi.end()) return false;
    if (!subtype(it->second.annot, t, theta, ints, D)) return false;
  }
  for (const auto& [x, pred] : theta) {
    if (pred != Pred::GeZero) continue;
    auto it = phi.find(x);
    if (it == phi.end() || it->second.n < 0) return false;
  }
  return true;
}

bool stack_heap_consistent(const Heap& H, const Stack& phi,
                           const StructEnv& D) {
  for (const auto& [x, v] : phi)
    if (!type_literal(H, D, v.n, v.annot)) return false;
  return true;
}

bool heap_heap_consistent(const Heap& H, const Heap& Hp, const StructEnv& D) {
  for (const auto& [a, cell] : H.cells)
    if (!type_literal(Hp, D, cell.val, cell.annot)) return false;
  return true;
}

} // namespace chkc
