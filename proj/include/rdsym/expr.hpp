#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rdsym/rational.hpp"
#include "rdsym/symbol.hpp"

namespace rdsym {

enum class Kind : std::uint8_t {
  Constant,
  Sym,
  Sum,
  Prod,
  Pow,
  Exp,
  Ln,
  Sin,
  Cos,
  Tan,
  Tanh,
  Apply,   // opaque function application f(arg)
  FDeriv,  // formal derivative f^(n)(arg) of an opaque function
};

/// Immutable expression tree handle. All constructors normalize: sums and
/// products are flattened and sorted, constants fold, like terms merge.
/// Simplification is deliberately weak beyond that.
class Expr {
 public:
  Expr();  // the constant 0

  Kind kind() const;
  const Num& num() const;          // Constant
  Symbol symbol() const;           // Sym, Apply, FDeriv
  int fd_order() const;            // FDeriv
  const std::vector<Expr>& kids() const;
  std::size_t hash() const;

  bool same(const Expr& o) const;  // structural equality
  bool is_zero() const;
  bool is_one() const;
  bool is_const() const { return kind() == Kind::Constant; }

  /// Canonical total order used for sorting sum terms and product factors.
  static int compare(const Expr& a, const Expr& b);

  bool contains(Symbol s) const;
  bool contains_subtree(const Expr& e) const;
  std::size_t node_count() const;

  std::string str() const;

  struct Node;
  const Node* node() const { return p_.get(); }

 private:
  explicit Expr(std::shared_ptr<const Node> p) : p_(std::move(p)) {}
  std::shared_ptr<const Node> p_;
  friend Expr make_node(Kind, Num, Symbol, int, std::vector<Expr>);
};

struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};
struct ExprEq {
  bool operator()(const Expr& a, const Expr& b) const { return a.same(b); }
};

// Builders. Children are assumed normalized (guaranteed when built via these).
Expr num(std::int64_t n);
Expr num(const Rational& q);
Expr num(const Num& n);
Expr floating(double v);
Expr rational(std::int64_t n, std::int64_t d);
Expr sym(Symbol s);
Expr sym(std::string_view name, SymbolKind kind);

Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow(const Expr& base, const Expr& exponent);
Expr quotient(const Expr& a, const Expr& b);  // represented as a * b^-1
Expr neg(const Expr& a);

Expr exp(const Expr& a);
Expr ln(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr tan(const Expr& a);
Expr tanh(const Expr& a);
Expr sqrt(const Expr& a);  // represented as a^(1/2)

Expr apply(Symbol f, const Expr& arg);
Expr fderiv(Symbol f, int order, const Expr& arg);

inline Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) { return add({a, neg(b)}); }
inline Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) { return quotient(a, b); }
inline Expr operator-(const Expr& a) { return neg(a); }
inline Expr operator+(const Expr& a, std::int64_t b) { return a + num(b); }
inline Expr operator+(std::int64_t a, const Expr& b) { return num(a) + b; }
inline Expr operator-(const Expr& a, std::int64_t b) { return a - num(b); }
inline Expr operator-(std::int64_t a, const Expr& b) { return num(a) - b; }
inline Expr operator*(const Expr& a, std::int64_t b) { return a * num(b); }
inline Expr operator*(std::int64_t a, const Expr& b) { return num(a) * b; }
inline Expr operator/(const Expr& a, std::int64_t b) { return a / num(b); }
inline Expr operator/(std::int64_t a, const Expr& b) { return num(a) / b; }

/// Splits a normalized term into (numeric coefficient, non-constant core).
/// The core of a bare constant is 1.
std::pair<Num, Expr> coeff_core(const Expr& term);

/// Additive terms of a normalized expression (a single term if not a Sum).
std::vector<Expr> terms_of(const Expr& e);
/// Multiplicative factors (a single factor if not a Prod).
std::vector<Expr> factors_of(const Expr& e);

/// Views a factor as base^exponent (exponent 1 if not a Pow).
std::pair<Expr, Expr> base_exponent(const Expr& factor);

}  // namespace rdsym
