#include "chkc/compile.hpp"

namespace chkc {

/***** Closures *****/

Closure Closure::let(std::string x, CExprPtr rhs) {
  Closure c;
  c.frames_.push_back(Frame{Frame::K::Let, std::move(x), CAtom{}, std::move(rhs)});
  return c;
}

Closure Closure::if_then(CAtom a, CExprPtr els) {
  Closure c;
  c.frames_.push_back(Frame{Frame::K::IfThen, "", std::move(a), std::move(els)});
  return c;
}

Closure Closure::if_else(CAtom a, CExprPtr thn) {
  Closure c;
  c.frames_.push_back(Frame{Frame::K::IfElse, "", std::move(a), std::move(thn)});
  return c;
}

Closure Closure::then(const Closure& inner) const {
  Closure c = *this;
  c.frames_.insert(c.frames_.end(), inner.frames_.begin(), inner.frames_.end());
  return c;
}

CExprPtr Closure::plug(CExprPtr e) const {
  for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
    switch (it->k) {
      case Frame::K::Let:
        e = c_let(it->x, it->e, std::move(e));
        break;
      case Frame::K::IfThen:
        e = c_if(it->guard, std::move(e), it->e);
        break;
      case Frame::K::IfElse:
        e = c_if(it->guard, it->e, std::move(e));
        break;
    }
  }
  return e;
}

CExprPtr Closure::plug(const CAtom& a) const { return plug(c_atom(a)); }

/***** Helpers *****/

namespace {

[[noreturn]] void fail(const std::string& msg) { throw CompileError(msg); }

// Target expression computing the value of a bound.
CExprPtr bound_rhs(const Bound& b) {
  if (b.is_const()) return c_atom(ca_num(b.off));
  if (b.off == 0) return c_atom(ca_var(b.var));
  return c_binop(ca_var(b.var), COp::Add, ca_num(b.off));
}

// let g = (a <= b) in let f = (if g then pass else fail) in HOLE.
Closure le_branch(Compiler& cc, const CAtom& a, const CAtom& b, CExprPtr pass,
                  CExprPtr failure) {
  std::string g = cc.fresh();
  return Closure::let(g, c_binop(a, COp::Le, b))
      .then(Closure::let(cc.fresh(),
                         c_if(ca_var(g), std::move(pass), std::move(failure))));
}

// Check a <= b, failing with boundsfail.
Closure assert_le(Compiler& cc, const CAtom& a, const CAtom& b) {
  return le_branch(cc, a, b, c_num(0), c_boundsfail());
}

// Check a < b, encoded as "if b <= a then boundsfail else 0".
Closure assert_lt(Compiler& cc, const CAtom& a, const CAtom& b) {
  return le_branch(cc, b, a, c_boundsfail(), c_num(0));
}

// Tracked variable lookup: a shadow pair applies when the checked
// subexpression is exactly a variable in the map's domain.
const ShadowPair* tracked(const ShadowMap& rho, const ExprPtr& key) {
  if (!key || key->tag != Expr::Tag::Var) return nullptr;
  auto it = rho.find(key->x);
  return it == rho.end() ? nullptr : &it->second;
}

// Atoms naming the lo/hi bounds of an array-pointer operand: shadow
// variables when tracked, otherwise freshly bound from the static type.
struct BoundAtoms {
  Closure bind;
  CAtom lo, hi;
};

BoundAtoms bound_atoms(Compiler& cc, const ShadowMap& rho, const ExprPtr& key,
                       const WordType& t) {
  BoundAtoms out;
  if (const ShadowPair* sh = tracked(rho, key)) {
    out.lo = ca_var(sh->lo);
    out.hi = ca_var(sh->hi);
    return out;
  }
  std::string lo = cc.fresh();
  std::string hi = cc.fresh();
  out.bind = Closure::let(lo, bound_rhs(t.pointee->bounds.lo))
                 .then(Closure::let(hi, bound_rhs(t.pointee->bounds.hi)));
  out.lo = ca_var(lo);
  out.hi = ca_var(hi);
  return out;
}

} // namespace

/***** Compiler *****/

std::string Compiler::fresh() { return "$" + std::to_string(counter_++); }

Closure Compiler::check_null(const CAtom& a, Mode m) {
  if (m == Mode::U || !opts_.insert_null_checks) return Closure::hole();
  return Closure::let(fresh(), c_if(a, c_num(0), c_nullfail()));
}

Closure Compiler::check_bounds(const ShadowMap& rho, const ExprPtr& key,
                               const WordType& t, const CAtom& idx) {
  if (t.mode == Mode::U) return Closure::hole();
  BoundAtoms b = bound_atoms(*this, rho, key, t);
  Closure lo = assert_le(*this, b.lo, idx);
  // Reads may touch the terminator of an NT array (inclusive upper
  // bound); plain arrays are strict at the top.
  Closure hi = t.pointee->nt ? assert_le(*this, idx, b.hi)
                             : assert_lt(*this, idx, b.hi);
  return b.bind.then(lo).then(hi);
}

Closure Compiler::check_bounds_w(const ShadowMap& rho, const ExprPtr& key,
                                 const WordType& t, const CAtom& idx) {
  if (t.mode == Mode::U) return Closure::hole();
  BoundAtoms b = bound_atoms(*this, rho, key, t);
  Closure lo = assert_le(*this, b.lo, idx);
  // Writes never touch the terminator: strict upper bound for both array
  // kinds.
  Closure hi = opts_.strict_write_bounds ? assert_lt(*this, idx, b.hi)
                                         : assert_le(*this, idx, b.hi);
  return b.bind.then(lo).then(hi);
}

Closure Compiler::check_bounds_dyn(const ShadowMap& rho, const ExprPtr& key,
                                   const WordType& target,
                                   const WordType& source) {
  std::string tl = fresh();
  std::string th = fresh();
  Closure bind_t = Closure::let(tl, bound_rhs(target.pointee->bounds.lo))
                       .then(Closure::let(th, bound_rhs(target.pointee->bounds.hi)));
  BoundAtoms s = bound_atoms(*this, rho, key, source);
  // Narrowing succeeds: the target window must lie inside the source's.
  Closure lo = assert_le(*this, s.lo, ca_var(tl));
  Closure hi = assert_le(*this, ca_var(th), s.hi);
  return bind_t.then(s.bind).then(lo).then(hi);
}

std::pair<Closure, ShadowMap> Compiler::extend_rho(const ShadowMap& rho,
                                                   const std::string& x,
                                                   const WordType& t) {
  if (!is_checked_nt_ptr(t)) return {Closure::hole(), rho};
  std::string xl = fresh();
  std::string xh = fresh();
  Closure c = Closure::let(xl, bound_rhs(t.pointee->bounds.lo))
                  .then(Closure::let(xh, bound_rhs(t.pointee->bounds.hi)));
  ShadowMap rho2 = rho;
  rho2[x] = ShadowPair{xl, xh};
  return {c, rho2};
}

Closure Compiler::widen_deref(const ShadowMap& rho, const std::string& x) {
  if (!opts_.insert_widen_deref) return Closure::hole();
  auto it = rho.find(x);
  if (it == rho.end()) return Closure::hole();
  const std::string& hi = it->second.hi;
  // The guard just read a nonzero cell at offset 0, so when the tracked
  // upper bound is still 0 one more cell is known readable.
  return Closure::let(fresh(), c_if(ca_var(hi), c_num(0),
                                    c_stackassign(hi, ca_num(1))));
}

Closure Compiler::widen_strlen(const ShadowMap& rho, const ExprPtr& key,
                               const CAtom& result) {
  const ShadowPair* sh = tracked(rho, key);
  if (!sh) return Closure::hole();
  // hi := max(hi, result)
  return le_branch(*this, result, ca_var(sh->hi), c_num(0),
                   c_stackassign(sh->hi, result));
}

Closure Compiler::bind_bound(const Bound& b, std::string* var_out) {
  std::string v = fresh();
  Closure c = Closure::let(v, bound_rhs(b));
  *var_out = v;
  return c;
}

Closure Compiler::size_of(const Type& omega, CAtom* out) {
  switch (omega.tag) {
    case Type::Tag::Word:
      *out = ca_num(1);
      return Closure::hole();
    case Type::Tag::Struct: {
      auto it = structs_.find(omega.struct_name);
      if (it == structs_.end())
        fail("malloc of unknown struct " + omega.struct_name);
      *out = ca_num(static_cast<Int>(it->second.size()));
      return Closure::hole();
    }
    case Type::Tag::Array: {
      std::string lo, hi;
      Closure c = bind_bound(omega.bounds.lo, &lo)
                      .then(bind_bound(omega.bounds.hi, &hi));
      // Allocation requires lo = 0 and hi > 0; anything else is a bounds
      // violation before the allocation happens.
      c = c.then(Closure::let(fresh(),
                              c_if(ca_var(lo), c_boundsfail(), c_num(0))));
      c = c.then(assert_lt(*this, ca_num(0), ca_var(hi)));
      if (omega.nt) {
        std::string sz = fresh();
        c = c.then(Closure::let(sz, c_binop(ca_var(hi), COp::Add, ca_num(1))));
        *out = ca_var(sz);
      } else {
        *out = ca_var(hi);
      }
      return c;
    }
  }
  fail("malloc of malformed type");
}

WordType Compiler::join_or_throw(const WordType& a, const WordType& b,
                                 const PredEnv& theta) {
  auto j = type_join(a, b, theta, phi, structs_);
  if (!j) fail("branch types have no join");
  return *j;
}

/***** Expression compilation *****/

Compiled Compiler::compile(const TypeEnv& G, const PredEnv& theta,
                           const ShadowMap& rho, const ExprPtr& e) {
  if (!e) fail("empty expression");
  switch (e->tag) {
    case Expr::Tag::Lit:
      return {Closure::hole(), ca_num(e->n), e->annot};

    case Expr::Tag::Var: {
      auto it = G.find(e->x);
      if (it == G.end()) fail("unbound variable " + e->x);
      return {Closure::hole(), ca_var(e->x), it->second};
    }

    case Expr::Tag::Strlen: {
      auto it = G.find(e->x);
      if (it == G.end()) fail("unbound variable " + e->x);
      const WordType& t = it->second;
      if (t.is_int || t.pointee->tag != Type::Tag::Array || !t.pointee->nt)
        fail("strlen requires a null-terminated array pointer");
      CAtom ax = ca_var(e->x);
      ExprPtr key = mk_var(e->x);
      Closure cn = check_null(ax, t.mode);
      Closure cb = check_bounds(rho, key, t, ca_num(0));
      std::string x2 = fresh();
      Closure c2 = Closure::let(x2, c_strlen(ax));
      Closure cw = widen_strlen(rho, key, ca_var(x2));
      return {cn.then(cb).then(c2).then(cw), ca_var(x2), wt_int()};
    }

    case Expr::Tag::Add: {
      Compiled r1 = compile(G, theta, rho, e->e1);
      Compiled r2 = compile(G, theta, rho, e->e2);
      if (!r1.type.is_int || !r2.type.is_int)
        fail("addition requires integer operands");
      std::string x3 = fresh();
      Closure c3 = Closure::let(x3, c_binop(r1.atom, COp::Add, r2.atom));
      return {r1.code.then(r2.code).then(c3), ca_var(x3), wt_int()};
    }

    case Expr::Tag::Deref: {
      const ExprPtr& inner = e->e1;
      if (inner->tag == Expr::Tag::Add) {
        Compiled r1 = compile(G, theta, rho, inner->e1);
        if (is_ptr_to_array(r1.type)) {
          Compiled r2 = compile(G, theta, rho, inner->e2);
          if (!r2.type.is_int) fail("array index must be an integer");
          Closure cn = check_null(r1.atom, r1.type.mode);
          std::string x3 = fresh();
          Closure c3 =
              Closure::let(x3, c_binop(r1.atom, COp::Add, r2.atom));
          Closure cb = check_bounds(rho, inner->e1, r1.type, r2.atom);
          std::string x4 = fresh();
          Closure c4 = Closure::let(x4, c_deref(ca_var(x3)));
          return {r1.code.then(r2.code).then(cn).then(c3).then(cb).then(c4),
                  ca_var(x4), r1.type.pointee->elem};
        }
      }
      Compiled r = compile(G, theta, rho, inner);
      const WordType& t = r.type;
      if (t.is_int) fail("dereference of a non-pointer");
      switch (t.pointee->tag) {
        case Type::Tag::Word: {
          Closure cn = check_null(r.atom, t.mode);
          std::string x2 = fresh();
          Closure c2 = Closure::let(x2, c_deref(r.atom));
          return {r.code.then(cn).then(c2), ca_var(x2), t.pointee->word};
        }
        case Type::Tag::Array: {
          // Bounds before nullness: a pointer whose window has drifted off
          // its allocation reports bounds even when its address is 0.
          Closure cb = check_bounds(rho, inner, t, ca_num(0));
          Closure cn = check_null(r.atom, t.mode);
          std::string x2 = fresh();
          Closure c2 = Closure::let(x2, c_deref(r.atom));
          return {r.code.then(cb).then(cn).then(c2), ca_var(x2),
                  t.pointee->elem};
        }
        case Type::Tag::Struct:
          fail("dereference of a struct pointer");
      }
      fail("dereference of a non-pointer");
    }

    case Expr::Tag::Assign: {
      const ExprPtr& lhs = e->e1;
      if (lhs->tag == Expr::Tag::Add) {
        Compiled r1 = compile(G, theta, rho, lhs->e1);
        if (!is_ptr_to_array(r1.type))
          fail("indexed assignment requires an array pointer");
        Compiled r2 = compile(G, theta, rho, lhs->e2);
        if (!r2.type.is_int) fail("array index must be an integer");
        Closure cn = check_null(r1.atom, r1.type.mode);
        Compiled r3 = compile(G, theta, rho, e->e2);
        std::string x4 = fresh();
        Closure c4 = Closure::let(x4, c_binop(r1.atom, COp::Add, r2.atom));
        Closure cb = check_bounds_w(rho, lhs->e1, r1.type, r2.atom);
        std::string x5 = fresh();
        Closure c5 = Closure::let(x5, c_assign(ca_var(x4), r3.atom));
        return {r1.code.then(r2.code).then(cn).then(r3.code).then(c4)
                    .then(cb).then(c5),
                ca_var(x5), r1.type.pointee->elem};
      }
      Compiled r1 = compile(G, theta, rho, lhs);
      const WordType& t = r1.type;
      if (t.is_int) fail("assignment through a non-pointer");
      Compiled r2 = compile(G, theta, rho, e->e2);
      switch (t.pointee->tag) {
        case Type::Tag::Word: {
          Closure cn = check_null(r1.atom, t.mode);
          std::string x3 = fresh();
          Closure c3 = Closure::let(x3, c_assign(r1.atom, r2.atom));
          return {r1.code.then(r2.code).then(cn).then(c3), ca_var(x3),
                  t.pointee->word};
        }
        case Type::Tag::Array: {
          // Bounds before nullness, as in reads.
          Closure cb = check_bounds_w(rho, lhs, t, ca_num(0));
          Closure cn = check_null(r1.atom, t.mode);
          std::string x3 = fresh();
          Closure c3 = Closure::let(x3, c_assign(r1.atom, r2.atom));
          return {r1.code.then(r2.code).then(cb).then(cn).then(c3),
                  ca_var(x3), t.pointee->elem};
        }
        case Type::Tag::Struct:
          fail("assignment through a struct pointer");
      }
      fail("assignment through a non-pointer");
    }

    case Expr::Tag::Malloc: {
      CAtom sz;
      Closure c1 = size_of(e->omega, &sz);
      std::string x2 = fresh();
      Closure c2 = Closure::let(x2, c_malloc(sz));
      return {c1.then(c2), ca_var(x2), wt_ptr(Mode::C, e->omega)};
    }

    case Expr::Tag::Unchecked:
      // Checks are keyed on pointer modes, so unchecked regions need no
      // special handling here: their unchecked pointers already compile
      // without checks.
      return compile(G, theta, rho, e->e1);

    case Expr::Tag::Cast: {
      Compiled r = compile(G, theta, rho, e->e1);
      return {r.code, r.atom, e->cast_ty};
    }

    case Expr::Tag::DynCast: {
      const WordType& tt = e->cast_ty;
      Compiled r = compile(G, theta, rho, e->e1);
      if (tt.is_int || tt.pointee->tag != Type::Tag::Array ||
          r.type.is_int || r.type.pointee->tag != Type::Tag::Array)
        fail("dynamic cast requires array pointers");
      Closure cb = check_bounds_dyn(rho, e->e1, tt, r.type);
      return {r.code.then(cb), r.atom, tt};
    }

    case Expr::Tag::FieldAddr: {
      Compiled r = compile(G, theta, rho, e->e1);
      const WordType& t = r.type;
      if (t.is_int || t.pointee->tag != Type::Tag::Struct)
        fail("field address requires a struct pointer");
      auto it = structs_.find(t.pointee->struct_name);
      if (it == structs_.end())
        fail("unknown struct " + t.pointee->struct_name);
      Int idx = -1;
      WordType ft;
      for (size_t i = 0; i < it->second.size(); i++)
        if (it->second[i].first == e->f) {
          idx = static_cast<Int>(i);
          ft = it->second[i].second;
          break;
        }
      if (idx < 0)
        fail("struct " + t.pointee->struct_name + " has no field " + e->f);
      Closure cn = check_null(r.atom, t.mode);
      std::string x2 = fresh();
      Closure c2 = Closure::let(x2, c_binop(r.atom, COp::Add, ca_num(idx)));
      return {r.code.then(cn).then(c2), ca_var(x2),
              wt_ptr(t.mode, ty_word(ft))};
    }

    case Expr::Tag::If: {
      // Guard of the shape *x with x a checked NT pointer: compile the
      // dereference, widen the tracked upper bound inside the then branch,
      // and let the then branch's typing see the widened bound when the
      // static bound is exactly 0.
      if (e->e1->tag == Expr::Tag::Deref &&
          e->e1->e1->tag == Expr::Tag::Var) {
        const std::string& x = e->e1->e1->x;
        auto it = G.find(x);
        if (it != G.end() && is_checked_nt_ptr(it->second)) {
          const WordType& pt = it->second;
          const Type& arr = *pt.pointee;
          CAtom ax = ca_var(x);
          ExprPtr key = mk_var(x);
          Closure cb = check_bounds(rho, key, pt, ca_num(0));
          Closure cn = check_null(ax, pt.mode);
          std::string xg = fresh();
          Closure cg = Closure::let(xg, c_deref(ax));
          Closure guard = cb.then(cn).then(cg);

          TypeEnv Gt = G;
          if (arr.bounds.hi == bconst(0))
            Gt[x] = wt_ptr(Mode::C,
                           ty_array({arr.bounds.lo, bconst(1)}, arr.elem, true));
          Closure cw = widen_deref(rho, x);
          Compiled r2 = compile(Gt, theta, rho, e->e2);
          Compiled r3 = compile(G, theta, rho, e->e3);
          std::string x4 = fresh();
          Closure c4 = Closure::let(
              x4, c_if(ca_var(xg), cw.then(r2.code).plug(r2.atom),
                       r3.code.plug(r3.atom)));
          return {guard.then(c4), ca_var(x4),
                  join_or_throw(r2.type, r3.type, theta)};
        }
      }
      Compiled r1 = compile(G, theta, rho, e->e1);
      Compiled r2 = compile(G, theta, rho, e->e2);
      Compiled r3 = compile(G, theta, rho, e->e3);
      std::string x4 = fresh();
      Closure c4 = Closure::let(x4, c_if(r1.atom, r2.code.plug(r2.atom),
                                         r3.code.plug(r3.atom)));
      return {r1.code.then(c4), ca_var(x4),
              join_or_throw(r2.type, r3.type, theta)};
    }

    case Expr::Tag::Let: {
      const std::string& x = e->x;
      // A strlen binding refines the scanned pointer's static upper bound
      // to the bound variable inside the body; no extra code beyond the
      // compiled strlen and the binding itself.
      if (e->e1->tag == Expr::Tag::Strlen && x != e->e1->x) {
        const std::string& y = e->e1->x;
        auto it = G.find(y);
        if (it != G.end() && is_checked_nt_ptr(it->second)) {
          // The refinement is optional, matching the type checker: when
          // the body only compiles under y's original bound, or the
          // bound variable escapes, fall through to the ordinary let.
          try {
            Compiled r1 = compile(G, theta, rho, e->e1);
            Closure c2 = Closure::let(x, c_atom(r1.atom));
            const Type& arr = *it->second.pointee;
            TypeEnv Gp = G;
            Gp[x] = wt_int();
            Gp[y] = wt_ptr(
                Mode::C,
                ty_array({arr.bounds.lo, bvar(x, 0)}, arr.elem, true));
            PredEnv thp = theta;
            thp[x] = Pred::GeZero;
            Compiled rb = compile(Gp, thp, rho, e->e2);
            std::set<std::string> fv;
            free_type_vars(rb.type, fv);
            if (!fv.count(x))
              return {r1.code.then(c2).then(rb.code), rb.atom, rb.type};
          } catch (const CompileError&) {
          }
        }
      }
      Compiled r1 = compile(G, theta, rho, e->e1);
      Closure c2;
      ShadowMap rho2 = rho;
      if (const ShadowPair* sh = tracked(rho, e->e1);
          sh && is_checked_nt_ptr(r1.type)) {
        // Copying a tracked pointer aliases its shadow bounds so that
        // widening already performed on the source carries over.
        std::string xl = fresh();
        std::string xh = fresh();
        c2 = Closure::let(xl, c_atom(ca_var(sh->lo)))
                 .then(Closure::let(xh, c_atom(ca_var(sh->hi))));
        rho2[x] = ShadowPair{xl, xh};
      } else {
        auto [cx, rx] = extend_rho(rho, x, r1.type);
        c2 = cx;
        rho2 = rx;
      }
      Closure c3 = Closure::let(x, c_atom(r1.atom));
      TypeEnv Gp = G;
      Gp[x] = r1.type;
      PredEnv thp = theta;
      thp.erase(x);
      Compiled rb = compile(Gp, thp, rho2, e->e2);
      WordType rt = rb.type;
      std::set<std::string> fv;
      free_type_vars(rt, fv);
      if (fv.count(x)) {
        auto b = expr_as_bound(e->e1);
        if (!r1.type.is_int || !b)
          fail("dependent let requires an integer bound expression");
        BoundSubst s{{x, *b}};
        rt = subst_type(rt, s);
      }
      return {r1.code.then(c2).then(c3).then(rb.code), rb.atom, rt};
    }

    case Expr::Tag::Ret: {
      if (!G.count(e->x)) fail("returned variable " + e->x + " not in scope");
      Compiled r = compile(G, theta, rho, e->e1);
      CSaved mu{e->saved.present, e->saved.n};
      std::string x2 = fresh();
      Closure c2 =
          Closure::let(x2, c_ret(e->x, mu, r.code.plug(r.atom)));
      return {c2, ca_var(x2), r.type};
    }

    case Expr::Tag::Call: {
      auto it = funs_.find(e->f);
      if (it == funs_.end()) fail("unknown function " + e->f);
      const FunDef& def = it->second;
      if (def.params.size() != e->args.size())
        fail("wrong number of arguments to " + e->f);
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
          fail("argument for dependent parameter " + def.params[i].first +
               " must be a bound expression");
        s[def.params[i].first] = *b;
      }
      Closure code;
      std::vector<CAtom> atoms;
      for (const auto& a : e->args) {
        Compiled r = compile(G, theta, rho, a);
        code = code.then(r.code);
        atoms.push_back(r.atom);
      }
      std::string xf = fresh();
      Closure cf = Closure::let(xf, c_call(e->f, std::move(atoms)));
      return {code.then(cf), ca_var(xf), subst_type(def.ret, s)};
    }
  }
  fail("unhandled expression form");
}

/***** Programs *****/

CProgram compile_program(const Program& p, CompileOptions opts) {
  Compiler cc(p.funs, p.structs, opts);
  CProgram out;
  for (const auto& [name, def] : p.funs) {
    TypeEnv G;
    std::vector<std::string> params;
    for (const auto& [x, t] : def.params) {
      G[x] = t;
      params.push_back(x);
    }
    // Shadow bounds for NT parameters are initialized inside the callee;
    // they are not passed as extra arguments.
    Closure init;
    ShadowMap rho;
    for (const auto& [x, t] : def.params) {
      auto [c, r] = cc.extend_rho(rho, x, t);
      init = init.then(c);
      rho = r;
    }
    Compiled body = cc.compile(G, PredEnv{}, rho, def.body);
    out.funs[name] = CFun{std::move(params),
                          init.then(body.code).plug(body.atom)};
  }
  Compiled m = cc.compile(TypeEnv{}, PredEnv{}, ShadowMap{}, p.main);
  out.main = m.code.plug(m.atom);
  return out;
}

} // namespace chkc
