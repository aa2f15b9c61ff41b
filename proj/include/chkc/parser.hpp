#pragma once
// S-expression reader and parsers for the source language.  Parse errors
// carry line/column positions.

#include "chkc/ast.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace chkc {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line), col(col) {}
};

// Generic s-expression tree with source positions.
struct Sexp {
  bool is_atom = false;
  std::string atom;
  std::vector<Sexp> items;
  int line = 1, col = 1;
};

// Reads a single s-expression; throws ParseError on malformed input or
// trailing garbage.
Sexp read_sexp(const std::string& text);

// Parsers for the source language.  All throw ParseError.
Bound parse_bound(const Sexp& s);
WordType parse_word_type(const Sexp& s);
Type parse_obj_type(const Sexp& s);
ExprPtr parse_expr(const Sexp& s);
Program parse_program(const Sexp& s);
Program parse_program(const std::string& text);
ExprPtr parse_expr(const std::string& text);
WordType parse_word_type(const std::string& text);

} // namespace chkc
