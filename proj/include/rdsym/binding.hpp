#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <unordered_map>

#include "rdsym/dual.hpp"
#include "rdsym/expr.hpp"

namespace rdsym {

/// Concrete realization of an opaque unary function: either a closed-form
/// expression in one variable (differentiated symbolically for formal
/// derivatives) or a callable giving the k-th derivative at a point.
class Realization {
 public:
  Realization() = default;
  static Realization closed_form(Symbol var, Expr body);
  static Realization callable(std::function<double(double, int)> fn);

  bool valid() const { return body_ || fn_; }
  bool is_closed_form() const { return static_cast<bool>(body_); }
  /// Closed-form body differentiated `order` times (cached).
  const Expr& derivative(int order) const;
  Symbol var() const { return var_; }
  double call(double x, int order) const { return fn_(x, order); }

 private:
  Symbol var_ = Symbol::from_id(0);
  std::shared_ptr<std::vector<Expr>> body_;  // body_[k] = k-th derivative
  std::function<double(double, int)> fn_;
};

/// Symbol environment for substitution and evaluation. Symbolic bindings
/// drive substitute(); numeric values and opaque-function realizations drive
/// evaluate(). A numeric evaluation fails loudly on any unbound symbol.
struct Binding {
  std::unordered_map<Symbol, Expr, SymbolHash> exprs;
  std::unordered_map<Symbol, double, SymbolHash> values;
  std::unordered_map<Symbol, Realization, SymbolHash> realizations;

  Binding& set(Symbol s, Expr e) {
    exprs.insert_or_assign(s, std::move(e));
    return *this;
  }
  Binding& set(Symbol s, double v) {
    values.insert_or_assign(s, v);
    return *this;
  }
  Binding& realize(Symbol f, Realization r) {
    realizations.insert_or_assign(f, std::move(r));
    return *this;
  }
};

double evaluate(const Expr& e, const Binding& b);

/// Dual-mode evaluation: value plus derivative with respect to `seed`.
Dual evaluate_dual(const Expr& e, const Binding& b, Symbol seed);

}  // namespace rdsym
