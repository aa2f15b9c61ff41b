#include "chkc/ast.hpp"

#include <sstream>

namespace chkc {

/***** Equality *****/

bool WordType::operator==(const WordType& o) const {
  if (is_int != o.is_int) return false;
  if (is_int) return true;
  if (mode != o.mode) return false;
  if (!pointee || !o.pointee) return pointee == o.pointee;
  return *pointee == *o.pointee;
}

bool Type::operator==(const Type& o) const {
  if (tag != o.tag) return false;
  switch (tag) {
    case Tag::Word: return word == o.word;
    case Tag::Array:
      return bounds == o.bounds && elem == o.elem && nt == o.nt;
    case Tag::Struct: return struct_name == o.struct_name;
  }
  return false;
}

/***** Constructors *****/

WordType wt_int() { return WordType{}; }

WordType wt_ptr(Mode m, Type pointee) {
  WordType t;
  t.is_int = false;
  t.mode = m;
  t.pointee = std::make_shared<const Type>(std::move(pointee));
  return t;
}

Type ty_word(WordType w) {
  Type t;
  t.tag = Type::Tag::Word;
  t.word = std::move(w);
  return t;
}

Type ty_array(BoundPair b, WordType elem, bool nt) {
  Type t;
  t.tag = Type::Tag::Array;
  t.bounds = std::move(b);
  t.elem = std::move(elem);
  t.nt = nt;
  return t;
}

Type ty_struct(std::string name) {
  Type t;
  t.tag = Type::Tag::Struct;
  t.struct_name = std::move(name);
  return t;
}

bool is_ptr(const WordType& t) { return !t.is_int; }

bool is_ptr_to_word(const WordType& t) {
  return !t.is_int && t.pointee->tag == Type::Tag::Word;
}

bool is_ptr_to_array(const WordType& t) {
  return !t.is_int && t.pointee->tag == Type::Tag::Array;
}

bool is_ptr_to_struct(const WordType& t) {
  return !t.is_int && t.pointee->tag == Type::Tag::Struct;
}

bool is_checked_nt_ptr(const WordType& t) {
  return is_ptr_to_array(t) && t.mode == Mode::C && t.pointee->nt;
}

/***** Expression constructors *****/

static ExprPtr mk(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

ExprPtr mk_lit(Int n, WordType t) {
  Expr e;
  e.tag = Expr::Tag::Lit;
  e.n = n;
  e.annot = std::move(t);
  return mk(std::move(e));
}
ExprPtr mk_var(std::string x) {
  Expr e;
  e.tag = Expr::Tag::Var;
  e.x = std::move(x);
  return mk(std::move(e));
}
ExprPtr mk_malloc(Type omega) {
  Expr e;
  e.tag = Expr::Tag::Malloc;
  e.omega = std::move(omega);
  return mk(std::move(e));
}
ExprPtr mk_let(std::string x, ExprPtr e1, ExprPtr e2) {
  Expr e;
  e.tag = Expr::Tag::Let;
  e.x = std::move(x);
  e.e1 = std::move(e1);
  e.e2 = std::move(e2);
  return mk(std::move(e));
}
ExprPtr mk_cast(WordType t, ExprPtr e1) {
  Expr e;
  e.tag = Expr::Tag::Cast;
  e.cast_ty = std::move(t);
  e.e1 = std::move(e1);
  return mk(std::move(e));
}
ExprPtr mk_dyncast(WordType t, ExprPtr e1) {
  Expr e;
  e.tag = Expr::Tag::DynCast;
  e.cast_ty = std::move(t);
  e.e1 = std::move(e1);
  return mk(std::move(e));
}
ExprPtr mk_call(std::string f, std::vector<ExprPtr> args) {
  Expr e;
  e.tag = Expr::Tag::Call;
  e.f = std::move(f);
  e.args = std::move(args);
  return mk(std::move(e));
}
ExprPtr mk_strlen(std::string x) {
  Expr e;
  e.tag = Expr::Tag::Strlen;
  e.x = std::move(x);
  return mk(std::move(e));
}
ExprPtr mk_add(ExprPtr e1, ExprPtr e2) {
  Expr e;
  e.tag = Expr::Tag::Add;
  e.e1 = std::move(e1);
  e.e2 = std::move(e2);
  return mk(std::move(e));
}
ExprPtr mk_deref(ExprPtr e1) {
  Expr e;
  e.tag = Expr::Tag::Deref;
  e.e1 = std::move(e1);
  return mk(std::move(e));
}
ExprPtr mk_assign(ExprPtr e1, ExprPtr e2) {
  Expr e;
  e.tag = Expr::Tag::Assign;
  e.e1 = std::move(e1);
  e.e2 = std::move(e2);
  return mk(std::move(e));
}
ExprPtr mk_unchecked(ExprPtr e1) {
  Expr e;
  e.tag = Expr::Tag::Unchecked;
  e.e1 = std::move(e1);
  return mk(std::move(e));
}
ExprPtr mk_if(ExprPtr c, ExprPtr t, ExprPtr f) {
  Expr e;
  e.tag = Expr::Tag::If;
  e.e1 = std::move(c);
  e.e2 = std::move(t);
  e.e3 = std::move(f);
  return mk(std::move(e));
}
ExprPtr mk_fieldaddr(ExprPtr e1, std::string f) {
  Expr e;
  e.tag = Expr::Tag::FieldAddr;
  e.e1 = std::move(e1);
  e.f = std::move(f);
  return mk(std::move(e));
}
ExprPtr mk_ret(std::string x, SavedBinding saved, ExprPtr e1) {
  Expr e;
  e.tag = Expr::Tag::Ret;
  e.x = std::move(x);
  e.saved = std::move(saved);
  e.e1 = std::move(e1);
  return mk(std::move(e));
}

/***** Free variables / substitution *****/

static void free_bound_vars(const Bound& b, std::set<std::string>& out) {
  if (!b.is_const()) out.insert(b.var);
}

void free_type_vars(const WordType& t, std::set<std::string>& out) {
  if (!t.is_int) free_type_vars(*t.pointee, out);
}

void free_type_vars(const Type& t, std::set<std::string>& out) {
  switch (t.tag) {
    case Type::Tag::Word:
      free_type_vars(t.word, out);
      break;
    case Type::Tag::Array:
      free_bound_vars(t.bounds.lo, out);
      free_bound_vars(t.bounds.hi, out);
      free_type_vars(t.elem, out);
      break;
    case Type::Tag::Struct:
      break;
  }
}

bool type_is_closed(const WordType& t) {
  std::set<std::string> fv;
  free_type_vars(t, fv);
  return fv.empty();
}

bool type_is_closed(const Type& t) {
  std::set<std::string> fv;
  free_type_vars(t, fv);
  return fv.empty();
}

Bound subst_bound(const Bound& b, const BoundSubst& s) {
  if (b.is_const()) return b;
  auto it = s.find(b.var);
  if (it == s.end()) return b;
  Bound r = it->second;
  r.off += b.off;
  return r;
}

WordType subst_type(const WordType& t, const BoundSubst& s) {
  if (t.is_int) return t;
  WordType r = t;
  r.pointee = std::make_shared<const Type>(subst_type(*t.pointee, s));
  return r;
}

Type subst_type(const Type& t, const BoundSubst& s) {
  switch (t.tag) {
    case Type::Tag::Word: {
      Type r = t;
      r.word = subst_type(t.word, s);
      return r;
    }
    case Type::Tag::Array: {
      Type r = t;
      r.bounds.lo = subst_bound(t.bounds.lo, s);
      r.bounds.hi = subst_bound(t.bounds.hi, s);
      r.elem = subst_type(t.elem, s);
      return r;
    }
    case Type::Tag::Struct:
      return t;
  }
  return t;
}

std::optional<Bound> expr_as_bound(const ExprPtr& e) {
  if (!e) return std::nullopt;
  switch (e->tag) {
    case Expr::Tag::Lit:
      if (e->annot.is_int) return bconst(e->n);
      return std::nullopt;
    case Expr::Tag::Var:
      return bvar(e->x, 0);
    case Expr::Tag::Add:
      if (e->e1->tag == Expr::Tag::Var && e->e2->tag == Expr::Tag::Lit &&
          e->e2->annot.is_int)
        return bvar(e->e1->x, e->e2->n);
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

/***** Sizing *****/

std::optional<Int> type_size(const Type& omega, const StructEnv& D,
                             const std::map<std::string, Int>& resolve,
                             std::string* err) {
  auto resolve_bound = [&](const Bound& b) -> std::optional<Int> {
    if (b.is_const()) return b.off;
    auto it = resolve.find(b.var);
    if (it == resolve.end()) {
      if (err) *err = "unresolved bound variable " + b.var;
      return std::nullopt;
    }
    return it->second + b.off;
  };
  switch (omega.tag) {
    case Type::Tag::Word:
      return 1;
    case Type::Tag::Array: {
      auto hi = resolve_bound(omega.bounds.hi);
      if (!hi) return std::nullopt;
      return *hi + (omega.nt ? 1 : 0);
    }
    case Type::Tag::Struct: {
      auto it = D.find(omega.struct_name);
      if (it == D.end()) {
        if (err) *err = "unknown struct " + omega.struct_name;
        return std::nullopt;
      }
      return static_cast<Int>(it->second.size());
    }
  }
  return std::nullopt;
}

/***** Well-formedness *****/

bool wf_bound(const TypeEnv& G, const Bound& b) {
  if (b.is_const()) return true;
  auto it = G.find(b.var);
  return it != G.end() && it->second.is_int;
}

bool wf_type(const TypeEnv& G, const WordType& t, const StructEnv& D) {
  if (t.is_int) return true;
  return wf_type(G, *t.pointee, D);
}

bool wf_type(const TypeEnv& G, const Type& t, const StructEnv& D) {
  switch (t.tag) {
    case Type::Tag::Word:
      return wf_type(G, t.word, D);
    case Type::Tag::Array:
      return wf_bound(G, t.bounds.lo) && wf_bound(G, t.bounds.hi) &&
             wf_type(G, t.elem, D);
    case Type::Tag::Struct:
      return D.count(t.struct_name) > 0;
  }
  return false;
}

/***** Printing *****/

std::string print_bound(const Bound& b) {
  if (b.is_const()) return std::to_string(b.off);
  return "(+ " + b.var + " " + std::to_string(b.off) + ")";
}

std::string print_type(const WordType& t) {
  if (t.is_int) return "int";
  return "(ptr " + std::string(mode_name(t.mode)) + " " +
         print_type(*t.pointee) + ")";
}

std::string print_type(const Type& t) {
  switch (t.tag) {
    case Type::Tag::Word:
      return print_type(t.word);
    case Type::Tag::Array:
      return std::string(t.nt ? "(ntarray " : "(array ") +
             print_bound(t.bounds.lo) + " " + print_bound(t.bounds.hi) + " " +
             print_type(t.elem) + ")";
    case Type::Tag::Struct:
      return "(struct " + t.struct_name + ")";
  }
  return "?";
}

std::string print_expr(const ExprPtr& e) {
  if (!e) return "<null>";
  switch (e->tag) {
    case Expr::Tag::Lit:
      return "(lit " + std::to_string(e->n) + " " + print_type(e->annot) + ")";
    case Expr::Tag::Var:
      return e->x;
    case Expr::Tag::Malloc:
      return "(malloc " + print_type(e->omega) + ")";
    case Expr::Tag::Let:
      return "(let " + e->x + " " + print_expr(e->e1) + " " +
             print_expr(e->e2) + ")";
    case Expr::Tag::Cast:
      return "(cast " + print_type(e->cast_ty) + " " + print_expr(e->e1) + ")";
    case Expr::Tag::DynCast:
      return "(dyncast " + print_type(e->cast_ty) + " " + print_expr(e->e1) +
             ")";
    case Expr::Tag::Call: {
      std::string s = "(call " + e->f;
      for (const auto& a : e->args) s += " " + print_expr(a);
      return s + ")";
    }
    case Expr::Tag::Strlen:
      return "(strlen " + e->x + ")";
    case Expr::Tag::Add:
      return "(+ " + print_expr(e->e1) + " " + print_expr(e->e2) + ")";
    case Expr::Tag::Deref:
      return "(deref " + print_expr(e->e1) + ")";
    case Expr::Tag::Assign:
      return "(assign " + print_expr(e->e1) + " " + print_expr(e->e2) + ")";
    case Expr::Tag::Unchecked:
      return "(unchecked " + print_expr(e->e1) + ")";
    case Expr::Tag::If:
      return "(if " + print_expr(e->e1) + " " + print_expr(e->e2) + " " +
             print_expr(e->e3) + ")";
    case Expr::Tag::FieldAddr:
      return "(fieldaddr " + print_expr(e->e1) + " " + e->f + ")";
    case Expr::Tag::Ret: {
      std::string mu = e->saved.present
                           ? "(val " + std::to_string(e->saved.n) + " " +
                                 print_type(e->saved.annot) + ")"
                           : "bot";
      return "(ret " + e->x + " " + mu + " " + print_expr(e->e1) + ")";
    }
  }
  return "?";
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  os << "(defs";
  for (const auto& [name, fields] : p.structs) {
    os << " (struct " << name;
    for (const auto& [f, t] : fields) os << " (" << f << " " << print_type(t) << ")";
    os << ")";
  }
  for (const auto& [name, def] : p.funs) {
    os << " (fun " << name << " (";
    bool first = true;
    for (const auto& [x, t] : def.params) {
      if (!first) os << " ";
      first = false;
      os << "(" << x << " " << print_type(t) << ")";
    }
    os << ") " << print_type(def.ret) << " " << print_expr(def.body) << ")";
  }
  os << " (main " << print_expr(p.main) << "))";
  return os.str();
}

} // namespace chkc
