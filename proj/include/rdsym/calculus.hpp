#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rdsym/binding.hpp"
#include "rdsym/expr.hpp"

namespace rdsym {

/// Partial derivative treating all other symbols as independent. Opaque
/// applications differentiate through the chain rule into formal derivatives.
Expr differentiate(const Expr& e, Symbol s);

enum class DVar { T, X };

/// A field over (t, x) whose derivatives participate in total derivatives,
/// capped at second order. u and v are built in; side-constraint unknowns
/// (e.g. p2) register their own family explicitly.
struct FieldExtension {
  Symbol base, d_t, d_x, d_xx, d_xt, d_tt;
  static FieldExtension make(std::string_view base_name);
};

/// Total derivative on the second-order jet space. Promotion beyond the
/// fixed table throws OrderOverflow.
Expr total_derivative(const Expr& e, DVar wrt, std::span<const FieldExtension> extensions = {});

/// Simultaneous substitution of the symbolic bindings in b. With
/// `fixpoint`, substitution repeats until the tree stabilizes (required by
/// manifold elimination). Cyclic bindings are rejected.
Expr substitute(const Expr& e, const Binding& b, bool fixpoint = false);

}  // namespace rdsym
