#pragma once

#include <cmath>

#include "rdsym/errors.hpp"

namespace rdsym {

/// Forward-mode dual number carrying a value and the derivative with respect
/// to one seed symbol. Used to cross-check symbolic differentiation.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  Dual(double value) : v(value), d(0.0) {}
  Dual(double value, double deriv) : v(value), d(deriv) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }

inline Dual operator/(Dual a, Dual b) {
  if (b.v == 0.0) throw DomainError("division by zero");
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

inline Dual exp(Dual a) {
  double e = std::exp(a.v);
  return {e, e * a.d};
}

inline Dual log(Dual a) {
  if (a.v <= 0.0) throw DomainError("ln of non-positive value");
  return {std::log(a.v), a.d / a.v};
}

inline Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }

inline Dual tan(Dual a) {
  double c = std::cos(a.v);
  if (c == 0.0) throw DomainError("tan at a pole");
  return {std::tan(a.v), a.d / (c * c)};
}

inline Dual tanh(Dual a) {
  double th = std::tanh(a.v);
  return {th, (1.0 - th * th) * a.d};
}

inline Dual pow(Dual a, Dual b) {
  if (a.v > 0.0) {
    double p = std::pow(a.v, b.v);
    return {p, p * (b.d * std::log(a.v) + b.v * a.d / a.v)};
  }
  // Non-positive base: only meaningful for constant exponents.
  if (b.d != 0.0) throw DomainError("non-constant exponent over non-positive base");
  if (a.v == 0.0) {
    if (b.v <= 0.0) throw DomainError("zero base with non-positive exponent");
    if (b.v == 1.0) return {0.0, a.d};
    if (b.v > 1.0) return {0.0, 0.0};
    throw DomainError("derivative of x^p singular at zero for p < 1");
  }
  double n;
  if (std::modf(b.v, &n) != 0.0) throw DomainError("fractional power of negative base");
  double p = std::pow(a.v, b.v);
  double dp = b.v == 0.0 ? 0.0 : b.v * std::pow(a.v, b.v - 1.0) * a.d;
  return {p, dp};
}

}  // namespace rdsym
