#pragma once

#include <map>
#include <span>
#include <vector>

#include "rdsym/expr.hpp"

namespace rdsym {

/// Distributes products over sums and expands small integer powers of sums.
/// Throws NotPolynomial when the expansion would exceed `term_limit` terms.
Expr expand(const Expr& e, std::size_t term_limit = 50000);

struct Collected {
  // monomial -> coefficient, keyed by the normalized monomial expression
  std::vector<std::pair<Expr, Expr>> groups;
  Expr remainder;
};

/// Writes e as sum(coeff * monomial) + remainder where the monomials are the
/// given basis (products/powers of jet coordinates or formal-derivative
/// atoms) and coefficients plus remainder are free of the basis symbols.
/// Throws NotPolynomial when e is not polynomial in the basis.
Collected collect(const Expr& e, std::span<const Expr> basis);

/// Like collect but discovers the monomials present; atoms are given instead
/// of full monomials. Used for deciding "identically zero in free jets".
Collected collect_auto(const Expr& e, std::span<const Expr> atoms);

}  // namespace rdsym
