#include <cmath>

#include "rdsym/binding.hpp"
#include "rdsym/calculus.hpp"
#include "rdsym/errors.hpp"

namespace rdsym {

Realization Realization::closed_form(Symbol var, Expr body) {
  Realization r;
  r.var_ = var;
  r.body_ = std::make_shared<std::vector<Expr>>();
  r.body_->push_back(std::move(body));
  return r;
}

Realization Realization::callable(std::function<double(double, int)> fn) {
  Realization r;
  r.fn_ = std::move(fn);
  return r;
}

const Expr& Realization::derivative(int order) const {
  auto& derivs = *body_;
  while (static_cast<int>(derivs.size()) <= order)
    derivs.push_back(differentiate(derivs.back(), var_));
  return derivs[order];
}

namespace {

template <typename T>
struct Scalar;

template <>
struct Scalar<double> {
  static double constant(double v) { return v; }
  static double d_exp(double x) { return std::exp(x); }
  static double d_ln(double x) {
    if (x <= 0.0) throw DomainError("ln of non-positive value");
    return std::log(x);
  }
  static double d_sin(double x) { return std::sin(x); }
  static double d_cos(double x) { return std::cos(x); }
  static double d_tan(double x) { return std::tan(x); }
  static double d_tanh(double x) { return std::tanh(x); }
  static double d_pow(double b, double e) {
    if (b == 0.0 && e <= 0.0) throw DomainError("zero base with non-positive exponent");
    if (b < 0.0) {
      double n;
      if (std::modf(e, &n) != 0.0) throw DomainError("fractional power of negative base");
    }
    return std::pow(b, e);
  }
};

template <>
struct Scalar<Dual> {
  static Dual constant(double v) { return Dual(v); }
  static Dual d_exp(Dual x) { return exp(x); }
  static Dual d_ln(Dual x) { return log(x); }
  static Dual d_sin(Dual x) { return sin(x); }
  static Dual d_cos(Dual x) { return cos(x); }
  static Dual d_tan(Dual x) { return tan(x); }
  static Dual d_tanh(Dual x) { return tanh(x); }
  static Dual d_pow(Dual b, Dual e) { return pow(b, e); }
};

using Overrides = std::vector<std::pair<Symbol, double>>;

double eval_plain(const Expr& e, const Binding& b, Overrides& ov);

template <typename T>
class Evaluator {
 public:
  Evaluator(const Binding& b, std::optional<Symbol> seed, Overrides& ov) : b_(b), seed_(seed), ov_(ov) {}

  T eval(const Expr& e) {
    using S = Scalar<T>;
    switch (e.kind()) {
      case Kind::Constant:
        return S::constant(e.num().value());
      case Kind::Sym: {
        Symbol s = e.symbol();
        for (auto it = ov_.rbegin(); it != ov_.rend(); ++it)
          if (it->first == s) return S::constant(it->second);
        auto it = b_.values.find(s);
        if (it == b_.values.end()) throw UnboundSymbolError("unbound symbol '" + s.name() + "'");
        if constexpr (std::is_same_v<T, Dual>) {
          return Dual(it->second, seed_ && *seed_ == s ? 1.0 : 0.0);
        } else {
          return it->second;
        }
      }
      case Kind::Sum: {
        T acc = S::constant(0.0);
        for (const auto& k : e.kids()) acc = acc + eval(k);
        return acc;
      }
      case Kind::Prod: {
        T acc = S::constant(1.0);
        for (const auto& k : e.kids()) acc = acc * eval(k);
        return acc;
      }
      case Kind::Pow:
        return S::d_pow(eval(e.kids()[0]), eval(e.kids()[1]));
      case Kind::Exp:
        return S::d_exp(eval(e.kids()[0]));
      case Kind::Ln:
        return S::d_ln(eval(e.kids()[0]));
      case Kind::Sin:
        return S::d_sin(eval(e.kids()[0]));
      case Kind::Cos:
        return S::d_cos(eval(e.kids()[0]));
      case Kind::Tan:
        return S::d_tan(eval(e.kids()[0]));
      case Kind::Tanh:
        return S::d_tanh(eval(e.kids()[0]));
      case Kind::Apply:
        return call(e.symbol(), 0, eval(e.kids()[0]));
      case Kind::FDeriv:
        return call(e.symbol(), e.fd_order(), eval(e.kids()[0]));
    }
    throw Error("unreachable expression kind");
  }

 private:
  T call(Symbol f, int order, T arg) {
    auto it = b_.realizations.find(f);
    if (it == b_.realizations.end() || !it->second.valid())
      throw UnboundSymbolError("opaque function '" + f.name() + "' has no realization");
    const Realization& r = it->second;
    double x = value_of(arg);
    double v, dv;
    if (r.is_closed_form()) {
      ov_.emplace_back(r.var(), x);
      v = eval_plain(r.derivative(order), b_, ov_);
      if constexpr (std::is_same_v<T, Dual>) dv = eval_plain(r.derivative(order + 1), b_, ov_);
      ov_.pop_back();
    } else {
      v = r.call(x, order);
      if constexpr (std::is_same_v<T, Dual>) dv = r.call(x, order + 1);
    }
    if constexpr (std::is_same_v<T, Dual>) {
      return Dual(v, dv * arg.d);
    } else {
      return v;
    }
  }

  static double value_of(double v) { return v; }
  static double value_of(Dual v) { return v.v; }

  const Binding& b_;
  std::optional<Symbol> seed_;
  Overrides& ov_;
};

double eval_plain(const Expr& e, const Binding& b, Overrides& ov) {
  return Evaluator<double>(b, std::nullopt, ov).eval(e);
}

}  // namespace

double evaluate(const Expr& e, const Binding& b) {
  Overrides ov;
  double v = Evaluator<double>(b, std::nullopt, ov).eval(e);
  if (std::isinf(v) || std::isnan(v)) throw DomainError("evaluation produced a non-finite value");
  return v;
}

Dual evaluate_dual(const Expr& e, const Binding& b, Symbol seed) {
  Overrides ov;
  Dual v = Evaluator<Dual>(b, seed, ov).eval(e);
  if (!std::isfinite(v.v) || !std::isfinite(v.d)) throw DomainError("evaluation produced a non-finite value");
  return v;
}

}  // namespace rdsym
