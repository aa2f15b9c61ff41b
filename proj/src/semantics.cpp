#include "chkc/semantics.hpp"

namespace chkc {

/***** Decomposition *****/

namespace {

// True when the guard has the shape *x for a stack variable x; such
// conditionals step as a whole so the guard's read can refine x.
bool nt_guard_shape(const ExprPtr& guard) {
  return guard->tag == Expr::Tag::Deref && guard->e1->tag == Expr::Tag::Var;
}

Decomp self_redex(const ExprPtr& e, Mode m) {
  Decomp d;
  d.redex = e;
  d.mode = m;
  d.plug = [](ExprPtr h) { return h; };
  return d;
}

Decomp wrap(Decomp inner, std::function<ExprPtr(ExprPtr)> outer) {
  Decomp d = std::move(inner);
  auto prev = std::move(d.plug);
  d.plug = [prev, outer](ExprPtr h) { return outer(prev(h)); };
  return d;
}

} // namespace

Decomp decompose(const ExprPtr& e, Mode m) {
  switch (e->tag) {
    case Expr::Tag::Lit: {
      Decomp d;
      d.is_value = true;
      return d;
    }
    case Expr::Tag::Var:
    case Expr::Tag::Malloc:
    case Expr::Tag::Strlen:
      return self_redex(e, m);

    case Expr::Tag::Let: {
      Decomp d = decompose(e->e1, m);
      if (d.is_value) return self_redex(e, m);
      std::string x = e->x;
      ExprPtr body = e->e2;
      return wrap(std::move(d),
                  [x, body](ExprPtr h) { return mk_let(x, h, body); });
    }
    case Expr::Tag::Ret: {
      Decomp d = decompose(e->e1, m);
      if (d.is_value) return self_redex(e, m);
      std::string x = e->x;
      SavedBinding mu = e->saved;
      return wrap(std::move(d),
                  [x, mu](ExprPtr h) { return mk_ret(x, mu, h); });
    }
    case Expr::Tag::Cast: {
      Decomp d = decompose(e->e1, m);
      if (d.is_value) return self_redex(e, m);
      WordType t = e->cast_ty;
      return wrap(std::move(d), [t](ExprPtr h) { return mk_cast(t, h); });
    }
    case Expr::Tag::DynCast: {
      Decomp d = decompose(e->e1, m);
      if (d.is_value) return self_redex(e, m);
      WordType t = e->cast_ty;
      return wrap(std::move(d), [t](ExprPtr h) { return mk_dyncast(t, h); });
    }
    case Expr::Tag::Unchecked: {
      Decomp d = decompose(e->e1, Mode::U);
      if (d.is_value) return self_redex(e, m);
      return wrap(std::move(d), [](ExprPtr h) { return mk_unchecked(h); });
    }
    case Expr::Tag::Deref: {
      Decomp d = decompose(e->e1, m);
      if (d.is_value) return self_redex(e, m);
      return wrap(std::move(d), [](ExprPtr h) { return mk_deref(h); });
    }
    case Expr::Tag::FieldAddr: {
      Decomp d = decompose(e->e1, m);
      if (d.is_value) return self_redex(e, m);
      std::string f = e->f;
      return wrap(std::move(d),
                  [f](ExprPtr h) { return mk_fieldaddr(h, f); });
    }
    case Expr::Tag::Add: {
      Decomp d1 = decompose(e->e1, m);
      if (!d1.is_value) {
        ExprPtr rhs = e->e2;
        return wrap(std::move(d1),
                    [rhs](ExprPtr h) { return mk_add(h, rhs); });
      }
      Decomp d2 = decompose(e->e2, m);
      if (!d2.is_value) {
        ExprPtr lhs = e->e1;
        return wrap(std::move(d2),
                    [lhs](ExprPtr h) { return mk_add(lhs, h); });
      }
      return self_redex(e, m);
    }
    case Expr::Tag::Assign: {
      Decomp d1 = decompose(e->e1, m);
      if (!d1.is_value) {
        ExprPtr rhs = e->e2;
        return wrap(std::move(d1),
                    [rhs](ExprPtr h) { return mk_assign(h, rhs); });
      }
      Decomp d2 = decompose(e->e2, m);
      if (!d2.is_value) {
        ExprPtr lhs = e->e1;
        return wrap(std::move(d2),
                    [lhs](ExprPtr h) { return mk_assign(lhs, h); });
      }
      return self_redex(e, m);
    }
    case Expr::Tag::Call: {
      for (size_t i = 0; i < e->args.size(); i++) {
        Decomp d = decompose(e->args[i], m);
        if (d.is_value) continue;
        std::string f = e->f;
        std::vector<ExprPtr> args = e->args;
        size_t idx = i;
        return wrap(std::move(d), [f, args, idx](ExprPtr h) {
          std::vector<ExprPtr> a = args;
          a[idx] = h;
          return mk_call(f, std::move(a));
        });
      }
      return self_redex(e, m);
    }
    case Expr::Tag::If: {
      if (nt_guard_shape(e->e1)) return self_redex(e, m);
      Decomp d = decompose(e->e1, m);
      if (d.is_value) return self_redex(e, m);
      ExprPtr t = e->e2, f = e->e3;
      return wrap(std::move(d),
                  [t, f](ExprPtr h) { return mk_if(h, t, f); });
    }
  }
  return self_redex(e, m);
}

/***** Computation steps *****/

namespace {

StepRes stuck() { return StepRes{StepRes::K::Stuck, nullptr}; }
StepRes null_err() { return StepRes{StepRes::K::Null, nullptr}; }
StepRes bounds_err() { return StepRes{StepRes::K::Bounds, nullptr}; }
StepRes stepped(ExprPtr e) { return StepRes{StepRes::K::Expr, std::move(e)}; }

// phi(tau): substitute the integer values of stack variables into bounds.
std::optional<WordType> resolve_type(const WordType& t, const Stack& phi) {
  BoundSubst s;
  std::set<std::string> fv;
  free_type_vars(t, fv);
  for (const auto& x : fv) {
    auto it = phi.find(x);
    if (it == phi.end()) return std::nullopt;
    s[x] = bconst(it->second.n);
  }
  WordType r = subst_type(t, s);
  if (!type_is_closed(r)) return std::nullopt;
  return r;
}

std::optional<Type> resolve_type(const Type& t, const Stack& phi) {
  BoundSubst s;
  std::set<std::string> fv;
  free_type_vars(t, fv);
  for (const auto& x : fv) {
    auto it = phi.find(x);
    if (it == phi.end()) return std::nullopt;
    s[x] = bconst(it->second.n);
  }
  Type r = subst_type(t, s);
  if (!type_is_closed(r)) return std::nullopt;
  return r;
}

struct ConstBounds {
  Int lo, hi;
};

std::optional<ConstBounds> const_bounds(const Type& arr) {
  if (!arr.bounds.lo.is_const() || !arr.bounds.hi.is_const())
    return std::nullopt;
  return ConstBounds{arr.bounds.lo.off, arr.bounds.hi.off};
}

// Result of dereferencing an annotated pointer value.
struct DerefOut {
  StepRes::K k = StepRes::K::Expr;
  Int val = 0;
  WordType cell_type;
};

DerefOut deref_value(const Heap& H, Int n, const WordType& t) {
  DerefOut out;
  if (t.is_int) {
    out.k = StepRes::K::Stuck;
    return out;
  }
  const Type& o = *t.pointee;
  bool checked = t.mode == Mode::C;
  WordType cell;
  if (o.tag == Type::Tag::Word) {
    if (checked && n == 0) {
      out.k = StepRes::K::Null;
      return out;
    }
    cell = o.word;
  } else if (o.tag == Type::Tag::Array) {
    auto b = const_bounds(o);
    if (!b) {
      out.k = StepRes::K::Stuck;
      return out;
    }
    // For array pointers the bounds window is judged before nullness: a
    // shifted pointer that left its window reports a bounds violation even
    // when the shifted address happens to be 0.
    if (checked) {
      bool in_range = o.nt ? (b->lo <= 0 && 0 <= b->hi)
                           : (b->lo <= 0 && 0 < b->hi);
      if (!in_range) {
        out.k = StepRes::K::Bounds;
        return out;
      }
      if (n == 0) {
        out.k = StepRes::K::Null;
        return out;
      }
    }
    cell = o.elem;
  } else { // struct pointers are read through field addresses only
    out.k = StepRes::K::Stuck;
    return out;
  }
  auto it = H.cells.find(n);
  if (it == H.cells.end()) {
    out.k = StepRes::K::Stuck;
    return out;
  }
  out.val = it->second.val;
  out.cell_type = cell;
  return out;
}

} // namespace

StepRes step_redex(const FunEnv& funs, const StructEnv& structs, Stack& phi,
                   Heap& H, const ExprPtr& r) {
  switch (r->tag) {
    case Expr::Tag::Lit:
      return stuck(); // values are not redexes

    case Expr::Tag::Var: {
      auto it = phi.find(r->x);
      if (it == phi.end()) return stuck();
      return stepped(mk_lit(it->second.n, it->second.annot));
    }

    case Expr::Tag::Strlen: {
      auto it = phi.find(r->x);
      if (it == phi.end()) return stuck();
      Int n = it->second.n;
      const WordType& t = it->second.annot;
      if (t.is_int || t.pointee->tag != Type::Tag::Array) return stuck();
      auto b = const_bounds(*t.pointee);
      if (!b) return stuck();
      bool checked = t.mode == Mode::C;
      if (checked) {
        if (n == 0) return null_err();
        if (!(b->lo <= 0 && 0 <= b->hi)) return bounds_err();
      }
      Int a = 0;
      while (true) {
        auto c = H.cells.find(n + a);
        if (c == H.cells.end()) return stuck(); // scan left the heap
        if (c->second.val == 0) break;
        a++;
      }
      if (checked && t.pointee->nt && a > b->hi) {
        StackVal v = it->second;
        Type arr = *v.annot.pointee;
        arr.bounds.hi = bconst(a);
        v.annot = wt_ptr(Mode::C, arr);
        phi[r->x] = v;
      }
      return stepped(mk_lit(a, wt_int()));
    }

    case Expr::Tag::Malloc: {
      auto omega = resolve_type(r->omega, phi);
      if (!omega) return stuck();
      if (omega->tag == Type::Tag::Array) {
        auto b = const_bounds(*omega);
        if (!b || b->lo != 0 || b->hi <= 0) return bounds_err();
      }
      std::map<std::string, Int> none;
      auto size = type_size(*omega, structs, none);
      if (!size) return stuck();
      Int addr = H.next;
      std::vector<WordType> cells;
      switch (omega->tag) {
        case Type::Tag::Word:
          cells.push_back(omega->word);
          break;
        case Type::Tag::Array:
          for (Int i = 0; i < *size; i++) cells.push_back(omega->elem);
          break;
        case Type::Tag::Struct: {
          for (const auto& [f, ft] : structs.at(omega->struct_name))
            cells.push_back(ft);
          break;
        }
      }
      for (Int i = 0; i < *size; i++)
        H.cells[addr + i] = HeapCell{0, cells[static_cast<size_t>(i)]};
      H.next += *size;
      return stepped(mk_lit(addr, wt_ptr(Mode::C, *omega)));
    }

    case Expr::Tag::Let: {
      const Expr& v = *r->e1;
      if (!is_value(v)) return stuck();
      SavedBinding mu;
      auto it = phi.find(r->x);
      if (it != phi.end()) {
        mu.present = true;
        mu.n = it->second.n;
        mu.annot = it->second.annot;
      }
      phi[r->x] = StackVal{v.n, v.annot};
      return stepped(mk_ret(r->x, mu, r->e2));
    }

    case Expr::Tag::Ret: {
      const Expr& v = *r->e1;
      if (!is_value(v)) return stuck();
      if (r->saved.present)
        phi[r->x] = StackVal{r->saved.n, r->saved.annot};
      else
        phi.erase(r->x);
      return stepped(r->e1);
    }

    case Expr::Tag::Cast: {
      const Expr& v = *r->e1;
      if (!is_value(v)) return stuck();
      auto t = resolve_type(r->cast_ty, phi);
      if (!t) return stuck();
      return stepped(mk_lit(v.n, *t));
    }

    case Expr::Tag::DynCast: {
      const Expr& v = *r->e1;
      if (!is_value(v)) return stuck();
      auto t = resolve_type(r->cast_ty, phi);
      if (!t) return stuck();
      if (t->is_int || t->pointee->tag != Type::Tag::Array) return stuck();
      if (v.annot.is_int || v.annot.pointee->tag != Type::Tag::Array)
        return stuck();
      auto tgt = const_bounds(*t->pointee);
      auto src = const_bounds(*v.annot.pointee);
      if (!tgt || !src) return stuck();
      // Narrowing succeeds: the target range must lie within the range the
      // value is known to cover.
      if (src->lo <= tgt->lo && tgt->hi <= src->hi)
        return stepped(mk_lit(v.n, *t));
      return bounds_err();
    }

    case Expr::Tag::Call: {
      auto it = funs.find(r->f);
      if (it == funs.end()) return stuck();
      const FunDef& def = it->second;
      if (def.params.size() != r->args.size()) return stuck();
      BoundSubst s;
      for (size_t i = 0; i < r->args.size(); i++) {
        if (!is_value(r->args[i])) return stuck();
        s[def.params[i].first] = bconst(r->args[i]->n);
      }
      WordType retty = subst_type(def.ret, s);
      if (!type_is_closed(retty)) return stuck();
      ExprPtr body = mk_cast(retty, def.body);
      for (size_t i = def.params.size(); i-- > 0;) {
        WordType pt = subst_type(def.params[i].second, s);
        if (!type_is_closed(pt)) return stuck();
        body = mk_let(def.params[i].first,
                      mk_lit(r->args[i]->n, pt), body);
      }
      return stepped(body);
    }

    case Expr::Tag::Add: {
      const Expr& v1 = *r->e1;
      const Expr& v2 = *r->e2;
      if (!is_value(v1) || !is_value(v2)) return stuck();
      if (v1.annot.is_int && v2.annot.is_int)
        return stepped(mk_lit(v1.n + v2.n, wt_int()));
      if (is_ptr_to_array(v1.annot) && v2.annot.is_int) {
        auto b = const_bounds(*v1.annot.pointee);
        if (!b) return stuck();
        if (v1.n == 0 && v1.annot.mode == Mode::C) return null_err();
        Type arr = *v1.annot.pointee;
        arr.bounds.lo = bconst(b->lo - v2.n);
        arr.bounds.hi = bconst(b->hi - v2.n);
        return stepped(mk_lit(v1.n + v2.n, wt_ptr(v1.annot.mode, arr)));
      }
      return stuck();
    }

    case Expr::Tag::Deref: {
      const Expr& v = *r->e1;
      if (!is_value(v)) return stuck();
      DerefOut d = deref_value(H, v.n, v.annot);
      switch (d.k) {
        case StepRes::K::Expr:
          return stepped(mk_lit(d.val, d.cell_type));
        case StepRes::K::Null: return null_err();
        case StepRes::K::Bounds: return bounds_err();
        default: return stuck();
      }
    }

    case Expr::Tag::Assign: {
      const Expr& v1 = *r->e1;
      const Expr& v2 = *r->e2;
      if (!is_value(v1) || !is_value(v2)) return stuck();
      const WordType& t = v1.annot;
      if (t.is_int) return stuck();
      const Type& o = *t.pointee;
      bool checked = t.mode == Mode::C;
      WordType cell;
      if (o.tag == Type::Tag::Word) {
        if (checked && v1.n == 0) return null_err();
        cell = o.word;
      } else if (o.tag == Type::Tag::Array) {
        auto b = const_bounds(o);
        if (!b) return stuck();
        // Bounds before nullness, as in reads.  Writes never touch the
        // null terminator: the range is strict at the top for both array
        // kinds.
        if (checked && !(b->lo <= 0 && 0 < b->hi)) return bounds_err();
        if (checked && v1.n == 0) return null_err();
        cell = o.elem;
      } else {
        return stuck();
      }
      auto it = H.cells.find(v1.n);
      if (it == H.cells.end()) return stuck();
      it->second.val = v2.n;
      it->second.annot = cell;
      return stepped(mk_lit(v2.n, cell));
    }

    case Expr::Tag::Unchecked: {
      if (!is_value(r->e1)) return stuck();
      return stepped(r->e1);
    }

    case Expr::Tag::If: {
      if (nt_guard_shape(r->e1)) {
        const std::string& x = r->e1->e1->x;
        auto it = phi.find(x);
        if (it == phi.end()) return stuck();
        Int n = it->second.n;
        const WordType& t = it->second.annot;
        DerefOut d = deref_value(H, n, t);
        switch (d.k) {
          case StepRes::K::Null: return null_err();
          case StepRes::K::Bounds: return bounds_err();
          case StepRes::K::Stuck: return stuck();
          case StepRes::K::Expr: break;
        }
        if (is_checked_nt_ptr(t) && t.pointee->bounds.hi == bconst(0) &&
            d.val != 0) {
          // The read proved the cell at offset 0 is not the terminator, so
          // one more cell is readable.
          StackVal v = it->second;
          Type arr = *v.annot.pointee;
          arr.bounds.hi = bconst(1);
          v.annot = wt_ptr(Mode::C, arr);
          phi[x] = v;
          return stepped(r->e2);
        }
        return stepped(d.val != 0 ? r->e2 : r->e3);
      }
      const Expr& v = *r->e1;
      if (!is_value(v)) return stuck();
      return stepped(v.n != 0 ? r->e2 : r->e3);
    }

    case Expr::Tag::FieldAddr: {
      const Expr& v = *r->e1;
      if (!is_value(v)) return stuck();
      const WordType& t = v.annot;
      if (t.is_int || t.pointee->tag != Type::Tag::Struct) return stuck();
      auto it = structs.find(t.pointee->struct_name);
      if (it == structs.end()) return stuck();
      Int idx = -1;
      WordType fty;
      for (size_t j = 0; j < it->second.size(); j++) {
        if (it->second[j].first == r->f) {
          idx = static_cast<Int>(j);
          fty = it->second[j].second;
          break;
        }
      }
      if (idx < 0) return stuck();
      if (t.mode == Mode::C) {
        if (v.n == 0) return null_err();
        return stepped(mk_lit(v.n + idx, wt_ptr(Mode::C, ty_word(fty))));
      }
      return stepped(mk_lit(v.n + idx, wt_ptr(Mode::U, ty_word(fty))));
    }
  }
  return stuck();
}

/***** Evaluation *****/

EvalOutcome eval_expr(const FunEnv& funs, const StructEnv& structs,
                      const Config& start, const EvalOptions& opts) {
  EvalOutcome out;
  Config cur = start;
  if (opts.keep_trace) out.trace.push_back(cur);
  for (Int k = 0; k < opts.fuel; k++) {
    Decomp d = decompose(cur.e, Mode::C);
    if (d.is_value) {
      out.kind = EvalOutcome::Kind::Value;
      out.value = cur.e->n;
      out.value_type = cur.e->annot;
      out.final_config = cur;
      return out;
    }
    Stack phi = cur.phi;
    Heap H = cur.heap;
    StepRes r = step_redex(funs, structs, phi, H, d.redex);
    StepRec rec;
    rec.mode = d.mode;
    rec.redex = print_expr(d.redex);
    out.step_modes.push_back(d.mode);
    switch (r.k) {
      case StepRes::K::Expr: {
        rec.result = print_expr(r.e);
        out.steps.push_back(std::move(rec));
        cur = Config{std::move(phi), std::move(H), d.plug(r.e)};
        if (opts.keep_trace) out.trace.push_back(cur);
        break;
      }
      case StepRes::K::Null:
      case StepRes::K::Bounds:
      case StepRes::K::Stuck: {
        rec.result = r.k == StepRes::K::Null
                         ? "null"
                         : (r.k == StepRes::K::Bounds ? "bounds" : "stuck");
        out.steps.push_back(std::move(rec));
        out.kind = r.k == StepRes::K::Null
                       ? EvalOutcome::Kind::Null
                       : (r.k == StepRes::K::Bounds ? EvalOutcome::Kind::Bounds
                                                    : EvalOutcome::Kind::Stuck);
        // Errors and stuck states keep the pre-step configuration.
        out.final_config = cur;
        return out;
      }
    }
  }
  out.kind = EvalOutcome::Kind::Fuel;
  out.final_config = cur;
  return out;
}

EvalOutcome eval_program(const Program& p, const EvalOptions& opts) {
  Config start;
  start.e = p.main;
  return eval_expr(p.funs, p.structs, start, opts);
}

std::string outcome_word(const EvalOutcome& o) {
  switch (o.kind) {
    case EvalOutcome::Kind::Value: return "value " + std::to_string(o.value);
    case EvalOutcome::Kind::Null: return "null";
    case EvalOutcome::Kind::Bounds: return "bounds";
    case EvalOutcome::Kind::Stuck: return "stuck";
    case EvalOutcome::Kind::Fuel: return "fuel";
  }
  return "?";
}

} // namespace chkc
