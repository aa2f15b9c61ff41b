#include "chkc/parser.hpp"

#include <cctype>

namespace chkc {

/***** Tokenizer / reader *****/

namespace {

struct Reader {
  const std::string& text;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Reader(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line, col);
  }

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void advance() {
    if (text[pos] == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
    pos++;
  }

  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (c == ';') { // comment to end of line
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  static bool atom_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' &&
           c != ')' && c != ';';
  }

  Sexp read() {
    skip_ws();
    if (eof()) fail("unexpected end of input");
    Sexp s;
    s.line = line;
    s.col = col;
    if (peek() == '(') {
      advance();
      while (true) {
        skip_ws();
        if (eof()) fail("unterminated list");
        if (peek() == ')') {
          advance();
          break;
        }
        s.items.push_back(read());
      }
      return s;
    }
    if (peek() == ')') fail("unexpected ')'");
    s.is_atom = true;
    while (!eof() && atom_char(peek())) {
      s.atom += peek();
      advance();
    }
    if (s.atom.empty()) fail("empty atom");
    return s;
  }
};

[[noreturn]] void fail_at(const Sexp& s, const std::string& msg) {
  throw ParseError(msg, s.line, s.col);
}

bool is_int_atom(const std::string& a) {
  size_t i = (a.size() > 1 && (a[0] == '-' || a[0] == '+')) ? 1 : 0;
  if (i >= a.size()) return false;
  for (; i < a.size(); i++)
    if (!std::isdigit(static_cast<unsigned char>(a[i]))) return false;
  return true;
}

Int int_atom(const Sexp& s) {
  if (!s.is_atom || !is_int_atom(s.atom)) fail_at(s, "expected integer");
  try {
    return std::stoll(s.atom);
  } catch (const std::exception&) {
    fail_at(s, "integer out of range");
  }
}

std::string ident(const Sexp& s, const char* what) {
  if (!s.is_atom || is_int_atom(s.atom))
    fail_at(s, std::string("expected ") + what);
  return s.atom;
}

Mode parse_mode(const Sexp& s) {
  if (s.is_atom && s.atom == "c") return Mode::C;
  if (s.is_atom && s.atom == "u") return Mode::U;
  fail_at(s, "expected mode 'c' or 'u'");
}

const Sexp& nth(const Sexp& s, size_t i) { return s.items[i]; }

void expect_len(const Sexp& s, size_t n, const char* what) {
  if (s.is_atom || s.items.size() != n)
    fail_at(s, std::string("malformed ") + what);
}

} // namespace

Sexp read_sexp(const std::string& text) {
  Reader r(text);
  Sexp s = r.read();
  r.skip_ws();
  if (!r.eof()) r.fail("trailing input after expression");
  return s;
}

/***** Types *****/

Bound parse_bound(const Sexp& s) {
  if (s.is_atom) return bconst(int_atom(s));
  expect_len(s, 3, "bound");
  if (!nth(s, 0).is_atom || nth(s, 0).atom != "+")
    fail_at(s, "expected bound (+ x n)");
  return bvar(ident(nth(s, 1), "variable"), int_atom(nth(s, 2)));
}

WordType parse_word_type(const Sexp& s) {
  if (s.is_atom) {
    if (s.atom == "int") return wt_int();
    fail_at(s, "expected type");
  }
  if (!s.items.empty() && nth(s, 0).is_atom && nth(s, 0).atom == "ptr") {
    expect_len(s, 3, "pointer type");
    return wt_ptr(parse_mode(nth(s, 1)), parse_obj_type(nth(s, 2)));
  }
  fail_at(s, "expected word type");
}

Type parse_obj_type(const Sexp& s) {
  if (!s.is_atom && !s.items.empty() && nth(s, 0).is_atom) {
    const std::string& h = nth(s, 0).atom;
    if (h == "array" || h == "ntarray") {
      expect_len(s, 4, "array type");
      BoundPair b{parse_bound(nth(s, 1)), parse_bound(nth(s, 2))};
      return ty_array(b, parse_word_type(nth(s, 3)), h == "ntarray");
    }
    if (h == "struct") {
      expect_len(s, 2, "struct type");
      return ty_struct(ident(nth(s, 1), "struct name"));
    }
  }
  return ty_word(parse_word_type(s));
}

/***** Expressions *****/

ExprPtr parse_expr(const Sexp& s) {
  if (s.is_atom) {
    if (is_int_atom(s.atom))
      fail_at(s, "bare integer; use (lit n type)");
    return mk_var(s.atom);
  }
  if (s.items.empty()) fail_at(s, "empty expression");
  const Sexp& h0 = nth(s, 0);
  if (!h0.is_atom) fail_at(s, "expected expression head");
  const std::string& h = h0.atom;
  if (h == "lit") {
    expect_len(s, 3, "lit");
    return mk_lit(int_atom(nth(s, 1)), parse_word_type(nth(s, 2)));
  }
  if (h == "malloc") {
    expect_len(s, 2, "malloc");
    return mk_malloc(parse_obj_type(nth(s, 1)));
  }
  if (h == "let") {
    expect_len(s, 4, "let");
    return mk_let(ident(nth(s, 1), "variable"), parse_expr(nth(s, 2)),
                  parse_expr(nth(s, 3)));
  }
  if (h == "cast") {
    expect_len(s, 3, "cast");
    return mk_cast(parse_word_type(nth(s, 1)), parse_expr(nth(s, 2)));
  }
  if (h == "dyncast") {
    expect_len(s, 3, "dyncast");
    return mk_dyncast(parse_word_type(nth(s, 1)), parse_expr(nth(s, 2)));
  }
  if (h == "call") {
    if (s.items.size() < 2) fail_at(s, "malformed call");
    std::vector<ExprPtr> args;
    for (size_t i = 2; i < s.items.size(); i++)
      args.push_back(parse_expr(nth(s, i)));
    return mk_call(ident(nth(s, 1), "function name"), std::move(args));
  }
  if (h == "strlen") {
    expect_len(s, 2, "strlen");
    return mk_strlen(ident(nth(s, 1), "variable"));
  }
  if (h == "+") {
    expect_len(s, 3, "+");
    return mk_add(parse_expr(nth(s, 1)), parse_expr(nth(s, 2)));
  }
  if (h == "deref") {
    expect_len(s, 2, "deref");
    return mk_deref(parse_expr(nth(s, 1)));
  }
  if (h == "assign") {
    expect_len(s, 3, "assign");
    return mk_assign(parse_expr(nth(s, 1)), parse_expr(nth(s, 2)));
  }
  if (h == "unchecked") {
    expect_len(s, 2, "unchecked");
    return mk_unchecked(parse_expr(nth(s, 1)));
  }
  if (h == "if") {
    expect_len(s, 4, "if");
    return mk_if(parse_expr(nth(s, 1)), parse_expr(nth(s, 2)),
                 parse_expr(nth(s, 3)));
  }
  if (h == "fieldaddr") {
    expect_len(s, 3, "fieldaddr");
    return mk_fieldaddr(parse_expr(nth(s, 1)), ident(nth(s, 2), "field name"));
  }
  if (h == "ret") {
    expect_len(s, 4, "ret");
    SavedBinding mu;
    const Sexp& ms = nth(s, 2);
    if (ms.is_atom && ms.atom == "bot") {
      mu.present = false;
    } else {
      expect_len(ms, 3, "saved binding");
      if (!nth(ms, 0).is_atom || nth(ms, 0).atom != "val")
        fail_at(ms, "expected (val n type) or bot");
      mu.present = true;
      mu.n = int_atom(nth(ms, 1));
      mu.annot = parse_word_type(nth(ms, 2));
    }
    return mk_ret(ident(nth(s, 1), "variable"), mu, parse_expr(nth(s, 3)));
  }
  fail_at(h0, "unknown expression form '" + h + "'");
}

/***** Programs *****/

Program parse_program(const Sexp& s) {
  Program p;
  if (s.is_atom || s.items.empty() || !nth(s, 0).is_atom ||
      nth(s, 0).atom != "defs") {
    // Convenience: a bare expression is a program with only a main.
    p.main = parse_expr(s);
    return p;
  }
  bool have_main = false;
  for (size_t i = 1; i < s.items.size(); i++) {
    const Sexp& d = nth(s, i);
    if (d.is_atom || d.items.empty() || !nth(d, 0).is_atom)
      fail_at(d, "expected (struct ...), (fun ...) or (main ...)");
    const std::string& h = nth(d, 0).atom;
    if (h == "struct") {
      if (d.items.size() < 2) fail_at(d, "malformed struct definition");
      std::string name = ident(nth(d, 1), "struct name");
      FieldList fields;
      for (size_t j = 2; j < d.items.size(); j++) {
        const Sexp& fs = nth(d, j);
        expect_len(fs, 2, "field");
        fields.emplace_back(ident(nth(fs, 0), "field name"),
                            parse_word_type(nth(fs, 1)));
      }
      if (!p.structs.emplace(name, std::move(fields)).second)
        fail_at(d, "duplicate struct " + name);
    } else if (h == "fun") {
      expect_len(d, 5, "function definition");
      std::string name = ident(nth(d, 1), "function name");
      FunDef def;
      const Sexp& ps = nth(d, 2);
      if (ps.is_atom) fail_at(ps, "expected parameter list");
      for (const Sexp& pr : ps.items) {
        expect_len(pr, 2, "parameter");
        def.params.emplace_back(ident(nth(pr, 0), "parameter name"),
                                parse_word_type(nth(pr, 1)));
      }
      def.ret = parse_word_type(nth(d, 3));
      def.body = parse_expr(nth(d, 4));
      if (!p.funs.emplace(name, std::move(def)).second)
        fail_at(d, "duplicate function " + name);
    } else if (h == "main") {
      expect_len(d, 2, "main");
      if (have_main) fail_at(d, "duplicate main");
      p.main = parse_expr(nth(d, 1));
      have_main = true;
    } else {
      fail_at(d, "unknown definition form '" + h + "'");
    }
  }
  if (!have_main) fail_at(s, "program has no main");
  return p;
}

Program parse_program(const std::string& text) {
  return parse_program(read_sexp(text));
}
ExprPtr parse_expr(const std::string& text) {
  return parse_expr(read_sexp(text));
}
WordType parse_word_type(const std::string& text) {
  return parse_word_type(read_sexp(text));
}

} // namespace chkc
