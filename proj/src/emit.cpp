#include "chkc/emit.hpp"

#include "chkc/typing.hpp"

#include <sstream>

namespace chkc {

namespace {

std::string bound_text(const Bound& b) {
  if (b.is_const()) return std::to_string(b.off);
  if (b.off == 0) return b.var;
  if (b.off > 0) return b.var + " + " + std::to_string(b.off);
  return b.var + " - " + std::to_string(-b.off);
}

// The type's surface spelling without any count annotation (counts attach
// to declarations, not types).
std::string base_type_text(const WordType& t) {
  if (t.is_int) return "int";
  const Type& o = *t.pointee;
  if (t.mode == Mode::U) {
    // Legacy pointers print as plain C pointers.
    std::string inner =
        o.tag == Type::Tag::Word
            ? base_type_text(o.word)
            : (o.tag == Type::Tag::Struct ? "struct " + o.struct_name
                                          : base_type_text(o.elem));
    return inner + " *";
  }
  switch (o.tag) {
    case Type::Tag::Word:
      return "ptr<" + base_type_text(o.word) + ">";
    case Type::Tag::Struct:
      return "ptr<struct " + o.struct_name + ">";
    case Type::Tag::Array:
      return std::string(o.nt ? "nt_array_ptr<" : "array_ptr<") +
             base_type_text(o.elem) + ">";
  }
  return "int";
}

// The count annotation (empty for non-array types).  Only the count(n)
// bounds form exists on the surface, so the window must start at zero.
std::string count_text(const WordType& t) {
  if (!is_ptr_to_array(t) || t.mode == Mode::U) return "";
  const Type& o = *t.pointee;
  if (o.bounds.lo != bconst(0))
    throw EmitError("array bounds with nonzero lower end have no count() form");
  return " : count(" + bound_text(o.bounds.hi) + ")";
}

std::string decl_text(const WordType& t, const std::string& name) {
  std::string base = base_type_text(t);
  std::string sep = base.back() == '*' ? "" : " ";
  return base + sep + name + count_text(t);
}

class Emitter {
 public:
  explicit Emitter(const Program& p) : p_(p) {
    ctx_.funs = &p_.funs;
    ctx_.structs = &p_.structs;
  }

  std::string run() {
    line("#include <stdchecked.h>");
    line("#include <stdlib.h>");
    line("#include <string.h>");
    line("");
    for (const auto& [name, fields] : p_.structs) {
      std::string s = "struct " + name + " {";
      for (const auto& [f, t] : fields) s += " " + decl_text(t, f) + ";";
      line(s + " };");
      line("");
    }
    for (const auto& [name, def] : p_.funs) {
      std::string sig = base_type_text(def.ret) + " " + name + "(";
      for (size_t i = 0; i < def.params.size(); i++) {
        if (i) sig += ", ";
        sig += decl_text(def.params[i].second, def.params[i].first);
      }
      if (def.params.empty()) sig += "void";
      sig += ")" + count_text(def.ret) + " {";
      line(sig);
      indent_++;
      TypeEnv G;
      PredEnv theta;
      for (const auto& [x, t] : def.params) G[x] = t;
      std::string v = emit(G, theta, Mode::C, def.body);
      line("return " + v + ";");
      indent_--;
      line("}");
      line("");
    }
    line("int main(void) {");
    indent_++;
    TypeEnv G;
    PredEnv theta;
    WordType mt = type_of(G, theta, Mode::C, p_.main);
    std::string v = emit(G, theta, Mode::C, p_.main);
    if (mt.is_int) {
      line("return " + v + ";");
    } else {
      line(decl_text(mt, fresh()) + " = " + v + ";");
      line("return 0;");
    }
    indent_--;
    line("}");
    std::ostringstream os;
    for (const std::string& l : lines_) os << l << "\n";
    return os.str();
  }

 private:
  const Program& p_;
  TypingCtx ctx_;
  std::vector<std::string> lines_;
  int indent_ = 0;
  Int tmp_ = 0;

  std::string fresh() { return "_t" + std::to_string(tmp_++); }

  void line(std::string s) {
    lines_.push_back(std::string(2 * indent_, ' ') + std::move(s));
  }

  WordType type_of(const TypeEnv& G, const PredEnv& theta, Mode m,
                   const ExprPtr& e) {
    TypeResult r = type_expr(ctx_, G, theta, m, e);
    if (!ok(r))
      throw EmitError("subexpression does not type-check: " +
                      error_of(r).to_string());
    return chkc::type_of(r); // the free accessor, not this member
  }

  // Flow-sensitive refinements the type checker applies to conditional
  // branches and strlen bindings, mirrored so inner declarations get the
  // refined types.
  static void widen_guard_env(TypeEnv& G, const ExprPtr& guard) {
    if (guard->tag != Expr::Tag::Deref ||
        guard->e1->tag != Expr::Tag::Var)
      return;
    const std::string& y = guard->e1->x;
    auto it = G.find(y);
    if (it == G.end() || !is_checked_nt_ptr(it->second)) return;
    const Type& arr = *it->second.pointee;
    if (arr.bounds.hi == bconst(0))
      it->second = wt_ptr(
          Mode::C, ty_array({arr.bounds.lo, bconst(1)}, arr.elem, true));
  }

  static void strlen_env(TypeEnv& G, const std::string& x,
                         const std::string& y) {
    auto it = G.find(y);
    if (it == G.end() || !is_checked_nt_ptr(it->second) || x == y) return;
    const Type& arr = *it->second.pointee;
    it->second =
        wt_ptr(Mode::C, ty_array({arr.bounds.lo, bvar(x, 0)}, arr.elem, true));
  }

  std::string emit_malloc(const Type& omega) {
    switch (omega.tag) {
      case Type::Tag::Word:
        return "malloc(sizeof(" + base_type_text(omega.word) + "))";
      case Type::Tag::Struct:
        return "malloc(sizeof(struct " + omega.struct_name + "))";
      case Type::Tag::Array: {
        if (omega.bounds.lo != bconst(0))
          throw EmitError("allocation with nonzero lower bound");
        std::string n = bound_text(omega.bounds.hi);
        if (omega.nt) n = "(" + n + " + 1)";
        return "malloc(" + n + " * sizeof(" + base_type_text(omega.elem) +
               "))";
      }
    }
    return "";
  }

  // Emits statements for e and returns the C expression holding its value.
  std::string emit(TypeEnv& G, PredEnv& theta, Mode m, const ExprPtr& e) {
    switch (e->tag) {
      case Expr::Tag::Lit:
        if (!e->annot.is_int && e->n != 0)
          throw EmitError("nonzero pointer literal has no surface form");
        return std::to_string(e->n);
      case Expr::Tag::Var:
        return e->x;
      case Expr::Tag::Malloc:
        return emit_malloc(e->omega);
      case Expr::Tag::Strlen:
        return "strlen(" + e->x + ")";
      case Expr::Tag::Add:
        return "(" + emit(G, theta, m, e->e1) + " + " + emit(G, theta, m, e->e2) + ")";
      case Expr::Tag::Deref:
        return "(*" + emit(G, theta, m, e->e1) + ")";
      case Expr::Tag::Assign: {
        std::string p = emit(G, theta, m, e->e1);
        std::string v = emit(G, theta, m, e->e2);
        return "(*" + p + " = " + v + ")";
      }
      case Expr::Tag::FieldAddr:
        return "(&(" + emit(G, theta, m, e->e1) + ")->" + e->f + ")";
      case Expr::Tag::Cast:
        return "((" + base_type_text(e->cast_ty) + ")" +
               emit(G, theta, m, e->e1) + ")";
      case Expr::Tag::DynCast: {
        if (!is_ptr_to_array(e->cast_ty))
          throw EmitError("dynamic cast to a non-array type");
        const Type& arr = *e->cast_ty.pointee;
        if (arr.bounds.lo != bconst(0))
          throw EmitError(
              "array bounds with nonzero lower end have no count() form");
        return "dyn_bounds_cast<" + base_type_text(e->cast_ty) + ">(" +
               emit(G, theta, m, e->e1) + ", count(" + bound_text(arr.bounds.hi) +
               "))";
      }
      case Expr::Tag::Call: {
        std::string s = e->f + "(";
        for (size_t i = 0; i < e->args.size(); i++) {
          if (i) s += ", ";
          s += emit(G, theta, m, e->args[i]);
        }
        return s + ")";
      }
      case Expr::Tag::Unchecked: {
        std::string t = fresh();
        line(decl_text(type_of(G, theta, m, e), t) + ";");
        line("unchecked {");
        indent_++;
        std::string v = emit(G, theta, Mode::U, e->e1);
        line(t + " = " + v + ";");
        indent_--;
        line("}");
        return t;
      }
      case Expr::Tag::Let: {
        std::string t = fresh();
        line(decl_text(type_of(G, theta, m, e), t) + ";");
        line("{");
        indent_++;
        std::string rhs = emit(G, theta, m, e->e1);
        WordType xt = type_of(G, theta, m, e->e1);
        line(decl_text(xt, e->x) + " = " + rhs + ";");
        TypeEnv G2 = G;
        G2[e->x] = xt;
        PredEnv th2 = theta;
        th2.erase(e->x);
        if (e->e1->tag == Expr::Tag::Strlen) {
          // Refine only when the body types under the refinement, the
          // same fallback the checker applies.
          TypeEnv G3 = G2;
          strlen_env(G3, e->x, e->e1->x);
          PredEnv th3 = theta;
          th3[e->x] = Pred::GeZero;
          TypeResult tb = type_expr(ctx_, G3, th3, m, e->e2);
          if (ok(tb)) {
            std::set<std::string> fv;
            free_type_vars(chkc::type_of(tb), fv);
            if (!fv.count(e->x)) {
              G2 = G3;
              th2 = th3;
            }
          }
        }
        std::string body = emit(G2, th2, m, e->e2);
        line(t + " = " + body + ";");
        indent_--;
        line("}");
        return t;
      }
      case Expr::Tag::If: {
        std::string t = fresh();
        line(decl_text(type_of(G, theta, m, e), t) + ";");
        // An `if (*x)` guard keeps its surface shape so an external
        // compiler sees the widening idiom; other guards are hoisted.
        bool nt_guard = e->e1->tag == Expr::Tag::Deref &&
                        e->e1->e1->tag == Expr::Tag::Var;
        std::string cond = nt_guard ? "*" + e->e1->e1->x : emit(G, theta, m, e->e1);
        line("if (" + cond + ") {");
        indent_++;
        TypeEnv Gt = G;
        widen_guard_env(Gt, e->e1);
        line(t + " = " + emit(Gt, theta, m, e->e2) + ";");
        indent_--;
        line("} else {");
        indent_++;
        line(t + " = " + emit(G, theta, m, e->e3) + ";");
        indent_--;
        line("}");
        return t;
      }
      case Expr::Tag::Ret:
        throw EmitError("runtime-only ret form has no surface syntax");
    }
    throw EmitError("unknown expression form");
  }
};

} // namespace

std::string emit_checkedc(const Program& p) { return Emitter(p).run(); }

} // namespace chkc
