#pragma once

#include <string_view>

#include "rdsym/expr.hpp"

namespace rdsym {

/// Parses the expression grammar: infix + - * / ^ (right-assoc), functions
/// exp, ln, sin, cos, tan, tanh, sqrt, opaque applications f(...) and formal
/// derivatives f'(...), f''(...). Reserved identifiers are t, x, u, v and the
/// second-order jet coordinates; every other identifier is a parameter.
/// Integer literals are exact; literals with a decimal point or exponent are
/// floating point. Throws SyntaxError with the offending position.
Expr parse(std::string_view text);

/// Inverse of parse up to structural normalization: parse(serialize(e))
/// structurally equals e for normalized e.
std::string serialize(const Expr& e);

}  // namespace rdsym
