#include "chkc/corec.hpp"

#include <functional>

namespace chkc {

/***** Constructors *****/

namespace {
CExprPtr mkc(CExpr e) { return std::make_shared<const CExpr>(std::move(e)); }
} // namespace

CExprPtr c_atom(CAtom a) {
  CExpr e;
  e.tag = CExpr::Tag::Atom;
  e.a1 = std::move(a);
  return mkc(std::move(e));
}
CExprPtr c_num(Int n) { return c_atom(ca_num(n)); }
CExprPtr c_var(std::string x) { return c_atom(ca_var(std::move(x))); }
CExprPtr c_strlen(CAtom a) {
  CExpr e;
  e.tag = CExpr::Tag::Strlen;
  e.a1 = std::move(a);
  return mkc(std::move(e));
}
CExprPtr c_malloc(CAtom a) {
  CExpr e;
  e.tag = CExpr::Tag::Malloc;
  e.a1 = std::move(a);
  return mkc(std::move(e));
}
CExprPtr c_call(std::string f, std::vector<CAtom> args) {
  CExpr e;
  e.tag = CExpr::Tag::Call;
  e.f = std::move(f);
  e.args = std::move(args);
  return mkc(std::move(e));
}
CExprPtr c_binop(CAtom a, COp op, CAtom b) {
  CExpr e;
  e.tag = CExpr::Tag::Binop;
  e.a1 = std::move(a);
  e.op = op;
  e.a2 = std::move(b);
  return mkc(std::move(e));
}
CExprPtr c_deref(CAtom a) {
  CExpr e;
  e.tag = CExpr::Tag::Deref;
  e.a1 = std::move(a);
  return mkc(std::move(e));
}
CExprPtr c_assign(CAtom a, CAtom b) {
  CExpr e;
  e.tag = CExpr::Tag::Assign;
  e.a1 = std::move(a);
  e.a2 = std::move(b);
  return mkc(std::move(e));
}
CExprPtr c_stackassign(std::string x, CAtom a) {
  CExpr e;
  e.tag = CExpr::Tag::StackAssign;
  e.x = std::move(x);
  e.a1 = std::move(a);
  return mkc(std::move(e));
}
CExprPtr c_if(CAtom a, CExprPtr t, CExprPtr f) {
  CExpr e;
  e.tag = CExpr::Tag::If;
  e.a1 = std::move(a);
  e.e1 = std::move(t);
  e.e2 = std::move(f);
  return mkc(std::move(e));
}
CExprPtr c_boundsfail() {
  CExpr e;
  e.tag = CExpr::Tag::BoundsFail;
  return mkc(std::move(e));
}
CExprPtr c_nullfail() {
  CExpr e;
  e.tag = CExpr::Tag::NullFail;
  return mkc(std::move(e));
}
CExprPtr c_ret(std::string x, CSaved mu, CExprPtr body) {
  CExpr e;
  e.tag = CExpr::Tag::Ret;
  e.x = std::move(x);
  e.saved = mu;
  e.e1 = std::move(body);
  return mkc(std::move(e));
}
CExprPtr c_let(std::string x, CExprPtr rhs, CExprPtr body) {
  CExpr e;
  e.tag = CExpr::Tag::Let;
  e.x = std::move(x);
  e.e1 = std::move(rhs);
  e.e2 = std::move(body);
  return mkc(std::move(e));
}

/***** Printing *****/

namespace {
std::string print_catom(const CAtom& a) {
  return a.is_num ? std::to_string(a.n) : a.x;
}
const char* op_name(COp op) {
  switch (op) {
    case COp::Add: return "+";
    case COp::Sub: return "-";
    case COp::Le: return "<=";
  }
  return "?";
}
} // namespace

std::string print_cexpr(const CExprPtr& e) {
  if (!e) return "<null>";
  switch (e->tag) {
    case CExpr::Tag::Atom: return print_catom(e->a1);
    case CExpr::Tag::Strlen: return "(strlen " + print_catom(e->a1) + ")";
    case CExpr::Tag::Malloc: return "(malloc " + print_catom(e->a1) + ")";
    case CExpr::Tag::Call: {
      std::string s = "(call " + e->f;
      for (const auto& a : e->args) s += " " + print_catom(a);
      return s + ")";
    }
    case CExpr::Tag::Binop:
      return "(" + std::string(op_name(e->op)) + " " + print_catom(e->a1) +
             " " + print_catom(e->a2) + ")";
    case CExpr::Tag::Deref: return "(deref " + print_catom(e->a1) + ")";
    case CExpr::Tag::Assign:
      return "(assign " + print_catom(e->a1) + " " + print_catom(e->a2) + ")";
    case CExpr::Tag::StackAssign:
      return "(stackassign " + e->x + " " + print_catom(e->a1) + ")";
    case CExpr::Tag::If:
      return "(if " + print_catom(e->a1) + " " + print_cexpr(e->e1) + " " +
             print_cexpr(e->e2) + ")";
    case CExpr::Tag::BoundsFail: return "(boundsfail)";
    case CExpr::Tag::NullFail: return "(nullfail)";
    case CExpr::Tag::Ret: {
      std::string mu =
          e->saved.present ? std::to_string(e->saved.n) : std::string("bot");
      return "(ret " + e->x + " " + mu + " " + print_cexpr(e->e1) + ")";
    }
    case CExpr::Tag::Let:
      return "(let " + e->x + " " + print_cexpr(e->e1) + " " +
             print_cexpr(e->e2) + ")";
  }
  return "?";
}

/***** ANF check *****/

namespace {
bool is_simple(const CExprPtr& e);

bool is_body(const CExprPtr& e) {
  if (!e) return false;
  if (e->tag == CExpr::Tag::Let)
    return is_simple(e->e1) && is_body(e->e2);
  return is_simple(e);
}

bool is_simple(const CExprPtr& e) {
  if (!e) return false;
  switch (e->tag) {
    case CExpr::Tag::Atom:
    case CExpr::Tag::Strlen:
    case CExpr::Tag::Malloc:
    case CExpr::Tag::Call:
    case CExpr::Tag::Binop:
    case CExpr::Tag::Deref:
    case CExpr::Tag::Assign:
    case CExpr::Tag::StackAssign:
    case CExpr::Tag::BoundsFail:
    case CExpr::Tag::NullFail:
      return true;
    case CExpr::Tag::If:
      return is_body(e->e1) && is_body(e->e2);
    case CExpr::Tag::Ret:
      return is_body(e->e1);
    case CExpr::Tag::Let:
      return false;
  }
  return false;
}
} // namespace

bool is_anf(const CExprPtr& e) { return is_body(e); }

/***** Program printing/parsing *****/

std::string print_cprogram(const CProgram& p) {
  std::string s = "(defs";
  for (const auto& [name, def] : p.funs) {
    s += " (fun " + name + " (";
    for (size_t i = 0; i < def.params.size(); i++) {
      if (i) s += " ";
      s += def.params[i];
    }
    s += ") " + print_cexpr(def.body) + ")";
  }
  s += " (main " + print_cexpr(p.main) + "))";
  return s;
}

namespace {

[[noreturn]] void cfail(const Sexp& s, const std::string& msg) {
  throw ParseError(msg, s.line, s.col);
}

bool is_int_text(const std::string& a) {
  size_t i = (a.size() > 1 && (a[0] == '-' || a[0] == '+')) ? 1 : 0;
  if (i >= a.size()) return false;
  for (; i < a.size(); i++)
    if (!isdigit(static_cast<unsigned char>(a[i]))) return false;
  return true;
}

CAtom parse_catom(const Sexp& s) {
  if (!s.is_atom) cfail(s, "expected atom");
  if (is_int_text(s.atom)) return ca_num(std::stoll(s.atom));
  return ca_var(s.atom);
}

CExprPtr parse_ce(const Sexp& s) {
  if (s.is_atom) return c_atom(parse_catom(s));
  if (s.items.empty() || !s.items[0].is_atom) cfail(s, "expected form");
  const std::string& h = s.items[0].atom;
  auto need = [&](size_t n) {
    if (s.items.size() != n) cfail(s, "malformed " + h);
  };
  if (h == "strlen") { need(2); return c_strlen(parse_catom(s.items[1])); }
  if (h == "malloc") { need(2); return c_malloc(parse_catom(s.items[1])); }
  if (h == "call") {
    if (s.items.size() < 2 || !s.items[1].is_atom) cfail(s, "malformed call");
    std::vector<CAtom> args;
    for (size_t i = 2; i < s.items.size(); i++)
      args.push_back(parse_catom(s.items[i]));
    return c_call(s.items[1].atom, std::move(args));
  }
  if (h == "+" || h == "-" || h == "<=") {
    need(3);
    COp op = h == "+" ? COp::Add : (h == "-" ? COp::Sub : COp::Le);
    return c_binop(parse_catom(s.items[1]), op, parse_catom(s.items[2]));
  }
  if (h == "deref") { need(2); return c_deref(parse_catom(s.items[1])); }
  if (h == "assign") {
    need(3);
    return c_assign(parse_catom(s.items[1]), parse_catom(s.items[2]));
  }
  if (h == "stackassign") {
    need(3);
    if (!s.items[1].is_atom) cfail(s, "malformed stackassign");
    return c_stackassign(s.items[1].atom, parse_catom(s.items[2]));
  }
  if (h == "if") {
    need(4);
    return c_if(parse_catom(s.items[1]), parse_ce(s.items[2]),
                parse_ce(s.items[3]));
  }
  if (h == "boundsfail") { need(1); return c_boundsfail(); }
  if (h == "nullfail") { need(1); return c_nullfail(); }
  if (h == "ret") {
    need(4);
    CSaved mu;
    const Sexp& ms = s.items[2];
    if (ms.is_atom && ms.atom == "bot") {
      mu.present = false;
    } else if (ms.is_atom && is_int_text(ms.atom)) {
      mu.present = true;
      mu.n = std::stoll(ms.atom);
    } else {
      cfail(ms, "expected integer or bot");
    }
    if (!s.items[1].is_atom) cfail(s, "malformed ret");
    return c_ret(s.items[1].atom, mu, parse_ce(s.items[3]));
  }
  if (h == "let") {
    need(4);
    if (!s.items[1].is_atom) cfail(s, "malformed let");
    return c_let(s.items[1].atom, parse_ce(s.items[2]), parse_ce(s.items[3]));
  }
  cfail(s, "unknown form '" + h + "'");
}

} // namespace

CProgram parse_cprogram(const std::string& text) {
  Sexp s = read_sexp(text);
  CProgram p;
  if (s.is_atom || s.items.empty() || !s.items[0].is_atom ||
      s.items[0].atom != "defs") {
    p.main = parse_ce(s);
    return p;
  }
  bool have_main = false;
  for (size_t i = 1; i < s.items.size(); i++) {
    const Sexp& d = s.items[i];
    if (d.is_atom || d.items.empty() || !d.items[0].is_atom)
      cfail(d, "expected (fun ...) or (main ...)");
    if (d.items[0].atom == "fun") {
      if (d.items.size() != 4 || !d.items[1].is_atom)
        cfail(d, "malformed function definition");
      CFun def;
      if (d.items[2].is_atom) cfail(d, "expected parameter list");
      for (const Sexp& pr : d.items[2].items) {
        if (!pr.is_atom) cfail(pr, "expected parameter name");
        def.params.push_back(pr.atom);
      }
      def.body = parse_ce(d.items[3]);
      p.funs[d.items[1].atom] = std::move(def);
    } else if (d.items[0].atom == "main") {
      if (d.items.size() != 2) cfail(d, "malformed main");
      p.main = parse_ce(d.items[1]);
      have_main = true;
    } else {
      cfail(d, "unknown definition form");
    }
  }
  if (!have_main) cfail(s, "program has no main");
  return p;
}

/***** Erasure *****/

CStack erase_stack(const Stack& phi) {
  CStack r;
  for (const auto& [x, v] : phi) r[x] = v.n;
  return r;
}

CHeap erase_heap(const Heap& H) {
  CHeap r;
  for (const auto& [a, c] : H.cells) r.cells[a] = c.val;
  r.next = H.next;
  return r;
}

/***** Interpretation *****/

namespace {

struct CDecomp {
  bool is_value = false;
  CExprPtr redex;
  std::function<CExprPtr(CExprPtr)> plug;
};

CDecomp cdecompose(const CExprPtr& e) {
  if (e->tag == CExpr::Tag::Atom && e->a1.is_num) {
    CDecomp d;
    d.is_value = true;
    return d;
  }
  if (e->tag == CExpr::Tag::Let) {
    CDecomp d = cdecompose(e->e1);
    if (!d.is_value) {
      std::string x = e->x;
      CExprPtr body = e->e2;
      auto prev = std::move(d.plug);
      d.plug = [x, body, prev](CExprPtr h) {
        return c_let(x, prev(h), body);
      };
      return d;
    }
    // fall through: the let itself is the redex
  } else if (e->tag == CExpr::Tag::Ret) {
    CDecomp d = cdecompose(e->e1);
    if (!d.is_value) {
      std::string x = e->x;
      CSaved mu = e->saved;
      auto prev = std::move(d.plug);
      d.plug = [x, mu, prev](CExprPtr h) { return c_ret(x, mu, prev(h)); };
      return d;
    }
  }
  CDecomp d;
  d.redex = e;
  d.plug = [](CExprPtr h) { return h; };
  return d;
}

struct CStepRes {
  enum class K { Expr, Null, Bounds, Stuck } k;
  CExprPtr e;
};

CStepRes cstuck() { return {CStepRes::K::Stuck, nullptr}; }

CStepRes cstep(const CFunEnv& funs, CStack& phi, CHeap& H,
               const CExprPtr& r) {
  auto resolve = [&](const CAtom& a) -> std::optional<Int> {
    if (a.is_num) return a.n;
    auto it = phi.find(a.x);
    if (it == phi.end()) return std::nullopt;
    return it->second;
  };
  auto stepped = [](CExprPtr e) { return CStepRes{CStepRes::K::Expr, e}; };

  switch (r->tag) {
    case CExpr::Tag::Atom: {
      auto v = resolve(r->a1);
      if (!v) return cstuck();
      return stepped(c_num(*v));
    }
    case CExpr::Tag::Strlen: {
      auto n = resolve(r->a1);
      if (!n) return cstuck();
      Int a = 0;
      while (true) {
        auto it = H.cells.find(*n + a);
        if (it == H.cells.end()) return cstuck();
        if (it->second == 0) break;
        a++;
      }
      return stepped(c_num(a));
    }
    case CExpr::Tag::Malloc: {
      auto n = resolve(r->a1);
      if (!n || *n <= 0) return cstuck();
      Int addr = H.next;
      for (Int i = 0; i < *n; i++) H.cells[addr + i] = 0;
      H.next += *n;
      return stepped(c_num(addr));
    }
    case CExpr::Tag::Call: {
      auto it = funs.find(r->f);
      if (it == funs.end() || it->second.params.size() != r->args.size())
        return cstuck();
      CExprPtr body = it->second.body;
      for (size_t i = it->second.params.size(); i-- > 0;) {
        auto v = resolve(r->args[i]);
        if (!v) return cstuck();
        body = c_let(it->second.params[i], c_num(*v), body);
      }
      return stepped(body);
    }
    case CExpr::Tag::Binop: {
      auto a = resolve(r->a1), b = resolve(r->a2);
      if (!a || !b) return cstuck();
      Int v = 0;
      switch (r->op) {
        case COp::Add: v = *a + *b; break;
        case COp::Sub: v = *a - *b; break;
        case COp::Le: v = (*a <= *b) ? 1 : 0; break;
      }
      return stepped(c_num(v));
    }
    case CExpr::Tag::Deref: {
      auto n = resolve(r->a1);
      if (!n) return cstuck();
      auto it = H.cells.find(*n);
      if (it == H.cells.end()) return cstuck();
      return stepped(c_num(it->second));
    }
    case CExpr::Tag::Assign: {
      auto n = resolve(r->a1), v = resolve(r->a2);
      if (!n || !v) return cstuck();
      auto it = H.cells.find(*n);
      if (it == H.cells.end()) return cstuck();
      it->second = *v;
      return stepped(c_num(*v));
    }
    case CExpr::Tag::StackAssign: {
      auto v = resolve(r->a1);
      if (!v) return cstuck();
      auto it = phi.find(r->x);
      if (it == phi.end()) return cstuck();
      it->second = *v;
      return stepped(c_num(*v));
    }
    case CExpr::Tag::If: {
      auto g = resolve(r->a1);
      if (!g) return cstuck();
      return stepped(*g != 0 ? r->e1 : r->e2);
    }
    case CExpr::Tag::BoundsFail:
      return {CStepRes::K::Bounds, nullptr};
    case CExpr::Tag::NullFail:
      return {CStepRes::K::Null, nullptr};
    case CExpr::Tag::Ret: {
      const CExpr& body = *r->e1;
      if (!(body.tag == CExpr::Tag::Atom && body.a1.is_num)) return cstuck();
      if (r->saved.present)
        phi[r->x] = r->saved.n;
      else
        phi.erase(r->x);
      return stepped(r->e1);
    }
    case CExpr::Tag::Let: {
      const CExpr& rhs = *r->e1;
      if (!(rhs.tag == CExpr::Tag::Atom && rhs.a1.is_num)) return cstuck();
      CSaved mu;
      auto it = phi.find(r->x);
      if (it != phi.end()) {
        mu.present = true;
        mu.n = it->second;
      }
      phi[r->x] = rhs.a1.n;
      return stepped(c_ret(r->x, mu, r->e2));
    }
  }
  return cstuck();
}

} // namespace

COutcome eval_corec(const CFunEnv& funs, const CConfig& start, Int fuel) {
  COutcome out;
  CConfig cur = start;
  for (Int k = 0; k < fuel; k++) {
    CDecomp d = cdecompose(cur.e);
    if (d.is_value) {
      out.kind = COutcome::Kind::Value;
      out.value = cur.e->a1.n;
      out.final_config = cur;
      return out;
    }
    CStepRes r = cstep(funs, cur.phi, cur.heap, d.redex);
    switch (r.k) {
      case CStepRes::K::Expr:
        cur.e = d.plug(r.e);
        break;
      case CStepRes::K::Null:
        out.kind = COutcome::Kind::Null;
        out.final_config = cur;
        return out;
      case CStepRes::K::Bounds:
        out.kind = COutcome::Kind::Bounds;
        out.final_config = cur;
        return out;
      case CStepRes::K::Stuck:
        out.kind = COutcome::Kind::Stuck;
        out.final_config = cur;
        return out;
    }
  }
  out.kind = COutcome::Kind::Fuel;
  out.final_config = cur;
  return out;
}

COutcome eval_corec(const CProgram& p, Int fuel) {
  CConfig start;
  start.e = p.main;
  return eval_corec(p.funs, start, fuel);
}

std::string outcome_word(const COutcome& o) {
  switch (o.kind) {
    case COutcome::Kind::Value: return "value " + std::to_string(o.value);
    case COutcome::Kind::Null: return "null";
    case COutcome::Kind::Bounds: return "bounds";
    case COutcome::Kind::Stuck: return "stuck";
    case COutcome::Kind::Fuel: return "fuel";
  }
  return "?";
}

} // namespace chkc
