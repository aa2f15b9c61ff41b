#pragma once
// Surface-syntax emitter: renders a type-checked source program as
// Checked-C-style C text (ptr<T>, array_ptr<T> : count(n),
// nt_array_ptr<T> : count(n), dyn_bounds_cast, unchecked blocks) for
// cross-checking with an external compiler.  The encodings of expression
// results as block-scoped temporaries are our own and non-normative.

#include "chkc/ast.hpp"

#include <stdexcept>

namespace chkc {

struct EmitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic text for a program that type-checks.  Throws EmitError on
// constructs with no surface form: the runtime-only ret expression,
// nonzero pointer literals, and array bounds with a nonzero lower end
// (only the count(n) bounds form is emitted).
std::string emit_checkedc(const Program& p);

} // namespace chkc
