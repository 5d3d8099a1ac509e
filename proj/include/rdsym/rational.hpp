#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

namespace rdsym {

/// Exact rational over int64 with overflow-checked arithmetic. Operations
/// that would overflow return nullopt; callers fall back to floating point.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(std::int64_t n) : num_(n), den_(1) {}
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == 1 && den_ == 1; }
  bool is_integer() const { return den_ == 1; }
  bool is_negative() const { return num_ < 0; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  static std::optional<Rational> checked(__int128 n, __int128 d);

  std::optional<Rational> add(const Rational& o) const {
    return checked(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
                   static_cast<__int128>(den_) * o.den_);
  }
  std::optional<Rational> mul(const Rational& o) const {
    return checked(static_cast<__int128>(num_) * o.num_, static_cast<__int128>(den_) * o.den_);
  }
  std::optional<Rational> div(const Rational& o) const {
    if (o.num_ == 0) return std::nullopt;
    return checked(static_cast<__int128>(num_) * o.den_, static_cast<__int128>(den_) * o.num_);
  }
  std::optional<Rational> neg() const { return checked(-static_cast<__int128>(num_), den_); }

  /// Integer power; exponent may be negative when the base is nonzero.
  std::optional<Rational> pow_int(std::int64_t e) const;

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const {
    return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
  }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  std::int64_t num_;
  std::int64_t den_;  // > 0
};

inline std::optional<Rational> Rational::checked(__int128 n, __int128 d) {
  if (d == 0) return std::nullopt;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 an = n < 0 ? -n : n;
  __int128 g = 1;
  {
    __int128 a = an, b = d;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    g = a == 0 ? 1 : a;
  }
  n /= g;
  d /= g;
  constexpr __int128 lo = INT64_MIN, hi = INT64_MAX;
  if (n < lo || n > hi || d > hi) return std::nullopt;
  Rational r;
  r.num_ = static_cast<std::int64_t>(n);
  r.den_ = static_cast<std::int64_t>(d);
  if (r.num_ == 0) r.den_ = 1;
  return r;
}

inline std::optional<Rational> Rational::pow_int(std::int64_t e) const {
  if (e == 0) return Rational(1);
  Rational base = *this;
  if (e < 0) {
    if (num_ == 0) return std::nullopt;
    auto inv = Rational(1).div(base);
    if (!inv) return std::nullopt;
    base = *inv;
    e = -e;
  }
  if (e > 256) return std::nullopt;
  Rational acc(1);
  while (e > 0) {
    if (e & 1) {
      auto p = acc.mul(base);
      if (!p) return std::nullopt;
      acc = *p;
    }
    e >>= 1;
    if (e) {
      auto s = base.mul(base);
      if (!s) return std::nullopt;
      base = *s;
    }
  }
  return acc;
}

/// Numeric constant: exact rational until any float enters, then sticky float.
class Num {
 public:
  Num() : exact_(true), q_(0), f_(0) {}
  Num(const Rational& q) : exact_(true), q_(q), f_(0) {}
  Num(std::int64_t n) : exact_(true), q_(n), f_(0) {}
  static Num from_double(double v) {
    Num n;
    n.exact_ = false;
    n.f_ = v;
    return n;
  }

  bool exact() const { return exact_; }
  const Rational& rat() const { return q_; }
  double value() const { return exact_ ? q_.to_double() : f_; }

  bool is_zero() const { return exact_ ? q_.is_zero() : f_ == 0.0; }
  bool is_one() const { return exact_ ? q_.is_one() : f_ == 1.0; }
  bool is_negative() const { return exact_ ? q_.is_negative() : f_ < 0.0; }
  bool is_integer() const { return exact_ && q_.is_integer(); }

  Num operator+(const Num& o) const {
    if (exact_ && o.exact_) {
      if (auto r = q_.add(o.q_)) return Num(*r);
    }
    return from_double(value() + o.value());
  }
  Num operator*(const Num& o) const {
    if (exact_ && o.exact_) {
      if (auto r = q_.mul(o.q_)) return Num(*r);
    }
    return from_double(value() * o.value());
  }
  Num negated() const {
    if (exact_) {
      if (auto r = q_.neg()) return Num(*r);
    }
    return from_double(-value());
  }

  bool operator==(const Num& o) const {
    if (exact_ != o.exact_) return false;
    return exact_ ? q_ == o.q_ : f_ == o.f_;
  }

 private:
  bool exact_;
  Rational q_;
  double f_;
};

}  // namespace rdsym
