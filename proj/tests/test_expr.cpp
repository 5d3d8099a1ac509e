#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rdsym/binding.hpp"
#include "rdsym/calculus.hpp"
#include "rdsym/collect.hpp"
#include "rdsym/errors.hpp"
#include "rdsym/parse.hpp"

using namespace rdsym;

namespace {

Expr S(const char* text) { return parse(text); }

Symbol param(const char* n) { return Symbol::intern(n, SymbolKind::Parameter); }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
}

}  // namespace

TEST_CASE("constant folding and normalization") {
  CHECK(S("1+2").same(num(3)));
  CHECK(S("2*3/4").same(rational(3, 2)));
  CHECK(S("x+x").same(S("2*x")));
  CHECK(S("x-x").is_zero());
  CHECK(S("x*x").same(S("x^2")));
  CHECK(S("x/x").is_one());
  CHECK(S("x^2*x^-2").is_one());
  CHECK(S("exp(x)*exp(-x)").is_one());
  CHECK(S("exp(x)*exp(y)").same(S("exp(x+y)")));
  CHECK(S("(2*x)^2").same(S("4*x^2")));
  CHECK(S("sqrt(4)").same(num(2)));
  CHECK(S("0^0").is_one());
  CHECK(S("u+v-(v+u)").is_zero());
  CHECK(S("(x^2)^3").same(S("x^6")));
  CHECK(S("ln(1)").is_zero());
  CHECK(S("ln(exp(x))").same(S("x")));
}

TEST_CASE("exact rationals stay exact, floats are sticky") {
  Expr a = S("1/3+1/6");
  REQUIRE(a.kind() == Kind::Constant);
  CHECK(a.num().exact());
  CHECK(a.num().rat() == Rational(1, 2));
  Expr b = S("0.5+1/2");
  REQUIRE(b.kind() == Kind::Constant);
  CHECK(!b.num().exact());
  CHECK(b.num().value() == doctest::Approx(1.0));
}

TEST_CASE("differentiate: elementary rules") {
  Symbol x = vars().x;
  // d/dx exp(2x) = 2 exp(2x)
  CHECK(differentiate(S("exp(2*x)"), x).same(S("2*exp(2*x)")));
  // d/dv u^-k (v-u) = u^-k   (omega of Table 1 case 1)
  CHECK(differentiate(S("u^(-k)*(v-u)"), vars().v).same(S("u^(-k)")));
  // chain rule through an opaque function, omega of case 5
  CHECK(differentiate(S("f(u^2-2*v)"), vars().v).same(S("-2*f'(u^2-2*v)")));
  // parameters are independent symbols
  CHECK(differentiate(S("a*x^2"), param("a")).same(S("x^2")));
  CHECK(differentiate(S("exp(x)"), vars().t).is_zero());
}

TEST_CASE("total_derivative: jet promotion and the fixed table") {
  Symbol dummy = param("eta_dummy");
  (void)dummy;
  // D_t of eta1(t,x,u,v)-shaped expression
  Expr eta1 = S("t*x + u^2 + 3*v");
  Expr dt = total_derivative(eta1, DVar::T);
  CHECK(dt.same(S("x + 2*u*u_t + 3*v_t")));
  CHECK(total_derivative(S("u_x"), DVar::X).same(S("u_xx")));
  CHECK(total_derivative(S("u_x"), DVar::T).same(S("u_xt")));
  CHECK(total_derivative(S("u_t"), DVar::T).same(S("u_tt")));
  CHECK_THROWS_AS(total_derivative(S("u_xx"), DVar::X), OrderOverflowError);
  CHECK_THROWS_AS(total_derivative(S("u_xt + 1"), DVar::T), OrderOverflowError);
}

TEST_CASE("total_derivative commutation inside the table") {
  std::mt19937_64 rng(7);
  const char* exprs[] = {"u*v + t*x", "u^2*x + v*t", "exp(u)*x", "u*v*t*x", "sin(u) + cos(v)"};
  for (const char* s : exprs) {
    Expr e = S(s);
    Expr dxdt = total_derivative(total_derivative(e, DVar::T), DVar::X);
    Expr dtdx = total_derivative(total_derivative(e, DVar::X), DVar::T);
    CHECK((dxdt - dtdx).is_zero());
  }
  (void)rng;
}

TEST_CASE("substitute: simultaneous and fixpoint") {
  Binding b;
  b.set(vars().u_xx, S("u_t + C1"));
  CHECK(substitute(S("u_xx"), b).same(S("u_t + C1")));

  Binding empty;
  CHECK(substitute(S("x+y"), empty).same(S("x+y")));

  // simultaneous: u->v, v->u swaps rather than chains
  Binding swap;
  swap.set(vars().u, sym(vars().v)).set(vars().v, sym(vars().u));
  CHECK(substitute(S("u - 2*v"), swap).same(S("v - 2*u")));

  // fixpoint: u_xx -> u_t + u, u_t -> q  (acyclic chain)
  Binding chain;
  chain.set(vars().u_xx, S("u_t + u")).set(vars().u_t, S("q"));
  CHECK(substitute(S("u_xx"), chain, true).same(S("q + u")));

  Binding cyc;
  cyc.set(vars().u, S("u + 1"));
  CHECK_THROWS_AS(substitute(S("u"), cyc, true), CyclicBindingError);
  Binding mutual;
  mutual.set(vars().u, S("v")).set(vars().v, S("u + 1"));
  CHECK_THROWS_AS(substitute(S("u"), mutual, true), CyclicBindingError);
}

TEST_CASE("evaluate: plain, errors, dual") {
  Binding b;
  b.set(vars().u, 1.0).set(vars().v, 3.0).set(param("k"), 2.0);
  CHECK(evaluate(S("u^(-k)*(v-u)"), b) == doctest::Approx(2.0));

  Binding z;
  z.set(vars().u, 0.0);
  CHECK_THROWS_AS(evaluate(S("ln(u)"), z), DomainError);
  CHECK_THROWS_AS(evaluate(S("1/u"), z), DomainError);

  Binding unb;
  CHECK_THROWS_AS(evaluate(S("u+q"), unb), UnboundSymbolError);

  Binding t0;
  t0.set(vars().t, 0.0);
  Dual d = evaluate_dual(S("exp(3*t)"), t0, vars().t);
  CHECK(d.v == doctest::Approx(1.0));
  CHECK(d.d == doctest::Approx(3.0));
}

TEST_CASE("evaluate: opaque realizations, closed form and callable") {
  Symbol f = Symbol::intern("f", SymbolKind::OpaqueFn);
  Symbol w = param("w");
  Binding b;
  b.set(vars().u, 2.0);
  b.realize(f, Realization::closed_form(w, S("w^3")));
  CHECK(evaluate(S("f(u)"), b) == doctest::Approx(8.0));
  CHECK(evaluate(S("f'(u)"), b) == doctest::Approx(12.0));
  CHECK(evaluate(S("f''(u)"), b) == doctest::Approx(12.0));

  Binding c;
  c.set(vars().u, 0.5);
  c.realize(f, Realization::callable([](double x, int k) {
    // exp(2x): k-th derivative is 2^k exp(2x)
    return std::pow(2.0, k) * std::exp(2.0 * x);
  }));
  CHECK(evaluate(S("f(u)"), c) == doctest::Approx(std::exp(1.0)));
  Dual d = evaluate_dual(S("f(u^2)"), c, vars().u);
  CHECK(d.v == doctest::Approx(std::exp(0.5)));
  CHECK(d.d == doctest::Approx(2.0 * std::exp(0.5) * 2.0 * 0.5));
}

TEST_CASE("collect: examples") {
  std::vector<Expr> basis = {S("u_x"), S("u_x^2")};
  Collected c = collect(S("a*u_x^2 + b*u_x"), basis);
  REQUIRE(c.groups.size() == 2);
  CHECK(c.remainder.is_zero());
  bool saw_a = false, saw_b = false;
  for (auto& [m, co] : c.groups) {
    if (m.same(S("u_x"))) {
      CHECK(co.same(S("b")));
      saw_b = true;
    }
    if (m.same(S("u_x^2"))) {
      CHECK(co.same(S("a")));
      saw_a = true;
    }
  }
  CHECK(saw_a);
  CHECK(saw_b);

  CHECK_THROWS_AS(collect(S("sin(u_x)"), std::vector<Expr>{S("u_x")}), NotPolynomialError);

  Collected z = collect(num(0), basis);
  CHECK(z.groups.empty());
  CHECK(z.remainder.is_zero());

  // mixed monomials via collect_auto
  std::vector<Expr> atoms = {S("u_x"), S("v_x")};
  Collected m = collect_auto(S("(u_x + v_x)^2 + t*u_x"), atoms);
  CHECK(m.groups.size() == 4);  // u_x^2, u_x v_x, v_x^2, u_x
}

TEST_CASE("parse: grammar cases and errors") {
  CHECK_NOTHROW(S("u*f(u^(-k)*(v-u))"));
  CHECK_NOTHROW(S("exp(-x^2/(4*t))"));
  CHECK_THROWS_AS(S("u +"), SyntaxError);
  CHECK_THROWS_AS(S("(u"), SyntaxError);
  CHECK_THROWS_AS(S("2..5"), SyntaxError);
  // reserved identifiers keep their kinds; unknown names become parameters
  Expr e = S("alpha*u_xt + lambda1");
  CHECK(e.contains(vars().u_xt));
  CHECK(e.contains(param("alpha")));
  // unary minus and right-associative power
  CHECK(S("-x^2").same(neg(S("x^2"))));
  CHECK(S("2^3^2").same(num(512)));
  CHECK(S("x^-1").same(pow(sym(vars().x), num(-1))));
}

TEST_CASE("parse/serialize round-trip on structured expressions") {
  const char* samples[] = {
      "u*f(u^(-k)*(v-u))",
      "exp(-x^2/(4*t))",
      "1/2*u + 3/4*v^2 - x",
      "(u+v)*(g(u)+alpha*ln(u+v))-f(u)",
      "2*t^(5/2) - x/(4*t)",
      "f''(u^2-2*v)*u_x^2",
      "-3.25*x + 1.5e-3",
      "tanh(x)*tan(t)/sqrt(1+x^2)",
      "lambda2*exp(lambda1*x+((lambda1^2-alpha)/d)*t)",
  };
  for (const char* s : samples) {
    Expr e = S(s);
    Expr back = parse(serialize(e));
    CHECK_MESSAGE(back.same(e), "round-trip failed for: ", s, " -> ", serialize(e));
  }
}

TEST_CASE("property: random round-trips") {
  std::mt19937_64 rng(2024);
  Symbol syms[3] = {vars().x, vars().u, param("a")};
  std::function<Expr(int)> gen = [&](int depth) -> Expr {
    int pick = static_cast<int>(rng() % (depth <= 0 ? 2 : 8));
    switch (pick) {
      case 0:
        return num(static_cast<std::int64_t>(rng() % 7) - 3);
      case 1:
        return sym(syms[rng() % 3]);
      case 2:
        return gen(depth - 1) + gen(depth - 1);
      case 3:
        return gen(depth - 1) * gen(depth - 1);
      case 4:
        return gen(depth - 1) - gen(depth - 1);
      case 5:
        return pow(sym(syms[rng() % 3]), num(static_cast<std::int64_t>(rng() % 5) - 2));
      case 6:
        return exp(gen(depth - 1));
      default:
        return cos(gen(depth - 1));
    }
  };
  for (int i = 0; i < 500; ++i) {
    Expr e = gen(3);
    CHECK(parse(serialize(e)).same(e));
  }
}

TEST_CASE("property: derivative matches central finite differences") {
  std::mt19937_64 rng(99);
  Symbol a = param("a");
  Symbol b = param("b");
  Symbol w = param("w");
  Symbol fs = Symbol::intern("f", SymbolKind::OpaqueFn);
  Symbol syms[3] = {a, b, vars().x};

  std::function<Expr(int)> gen = [&](int depth) -> Expr {
    int pick = static_cast<int>(rng() % (depth <= 0 ? 2 : 10));
    switch (pick) {
      case 0: {
        std::int64_t n = static_cast<std::int64_t>(rng() % 9) - 4;
        return rng() % 2 ? num(n) : rational(n, 2);
      }
      case 1:
        return sym(syms[rng() % 3]);
      case 2:
        return gen(depth - 1) + gen(depth - 1);
      case 3:
        return gen(depth - 1) * gen(depth - 1);
      case 4:
        return gen(depth - 1) - gen(depth - 1);
      case 5:
        return pow(sym(syms[rng() % 3]), num(static_cast<std::int64_t>(rng() % 4) - 1));
      case 6:
        return exp(mul({rational(1, 2), gen(depth - 1)}));
      case 7:
        return sin(gen(depth - 1));
      case 8:
        return tanh(gen(depth - 1));
      default:
        return apply(fs, gen(depth - 1));
    }
  };

  int tested = 0;
  int attempts = 0;
  while (tested < 1000 && attempts < 20000) {
    ++attempts;
    Expr e = gen(3);
    Expr de = differentiate(e, a);
    Binding env;
    double pa = uniform(rng, 0.3, 1.7);
    env.set(a, pa).set(b, uniform(rng, 0.3, 1.7)).set(vars().x, uniform(rng, 0.3, 1.7));
    env.realize(fs, Realization::closed_form(w, parse("1/2*w^3 - w + 2")));
    const double h = 1e-5;
    double fp, fm, fd, sym_d;
    try {
      Binding ep = env, em = env;
      ep.set(a, pa + h);
      em.set(a, pa - h);
      fp = evaluate(e, ep);
      fm = evaluate(e, em);
      if (std::abs(fp) > 1e3 || std::abs(fm) > 1e3) continue;
      fd = (fp - fm) / (2 * h);
      sym_d = evaluate(de, env);
    } catch (const Error&) {
      continue;
    }
    double tol = 1e-6 * (1.0 + std::abs(sym_d));
    CHECK_MESSAGE(std::abs(sym_d - fd) <= tol, "expr: ", e.str(), " d: ", sym_d, " fd: ", fd);
    ++tested;
  }
  CHECK(tested == 1000);
}

TEST_CASE("property: substitute-then-evaluate equals evaluate with composed bindings") {
  std::mt19937_64 rng(41);
  Symbol p = param("p");
  Symbol q = param("q");
  for (int i = 0; i < 100; ++i) {
    Expr e = S("p^2*x + exp(p) - q*x");
    Binding sb;
    sb.set(p, S("q + 1"));
    Expr sub = substitute(e, sb);
    double qv = uniform(rng, -1.0, 1.5), xv = uniform(rng, 0.1, 2.0);
    Binding n1;
    n1.set(q, qv).set(vars().x, xv);
    Binding n2 = n1;
    n2.set(p, qv + 1.0);
    CHECK(evaluate(sub, n1) == doctest::Approx(evaluate(e, n2)).epsilon(1e-12));
  }
}

TEST_CASE("dual evaluation agrees with symbolic differentiation") {
  std::mt19937_64 rng(5150);
  Expr e = S("x*exp(x/2) + tan(x/4) - x^3/(1+x^2)");
  Expr de = differentiate(e, vars().x);
  for (int i = 0; i < 50; ++i) {
    double xv = uniform(rng, 0.1, 2.0);
    Binding b;
    b.set(vars().x, xv);
    Dual d = evaluate_dual(e, b, vars().x);
    CHECK(d.v == doctest::Approx(evaluate(e, b)).epsilon(1e-12));
    CHECK(d.d == doctest::Approx(evaluate(de, b)).epsilon(1e-10));
  }
}
