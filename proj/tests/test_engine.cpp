#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rdsym/errors.hpp"
#include "rdsym/parse.hpp"
#include "rdsym/collect.hpp"
#include "rdsym/residuals.hpp"

using namespace rdsym;

namespace {

Expr S(const char* text) { return parse(text); }

SampleConfig fast_cfg(std::uint64_t seed = 7) {
  SampleConfig cfg;
  cfg.n_points = 60;
  cfg.seed = seed;
  return cfg;
}

// Table 1 case 5 with f(w) = w, g(w) = 1, d = 2:
//   C1 = u^2 - 2v, C2 = u*(u^2-2v) + 1 - u, Q = dt + du + u dv.
RDSystem case5_system() {
  return RDSystem(num(2), S("u^2-2*v"), S("u*(u^2-2*v)+1+(1-2)*u"));
}
SymmetryOperator case5_operator() { return SymmetryOperator(num(1), num(0), num(1), S("u")); }

}  // namespace

TEST_CASE("prolong2: examples") {
  // constant-coefficient operator: all prolongation coefficients vanish
  SymmetryOperator q1(num(1), num(0), num(1), num(0));
  ProlongationCoefficients p1 = prolong2(q1);
  CHECK(p1.rho_t1.is_zero());
  CHECK(p1.sigma_xx1.is_zero());

  // Q = dt + alpha u du: rho_t1 = alpha u_t, sigma_xx1 = alpha u_xx
  SymmetryOperator q2(num(1), num(0), S("alpha*u"), num(0));
  ProlongationCoefficients p2 = prolong2(q2);
  CHECK(p2.rho_t1.same(S("alpha*u_t")));
  CHECK(p2.sigma_xx1.same(S("alpha*u_xx")));

  // eta2 = q(t,x) u: sigma_xx2 contains q_xx u + 2 q_x u_x + q u_xx
  SymmetryOperator q3(num(1), num(0), num(0), S("exp(2*x+t)*u"));
  ProlongationCoefficients p3 = prolong2(q3);
  Expr expect = S("4*exp(2*x+t)*u + 2*2*exp(2*x+t)*u_x + exp(2*x+t)*u_xx");
  CHECK((p3.sigma_xx2 - expect).is_zero());
}

TEST_CASE("prolong2: linearity") {
  SymmetryOperator qa(S("t"), S("x^2"), S("u*x"), S("u+v"));
  SymmetryOperator qb(S("1"), S("t*x"), S("v"), S("exp(x)*u"));
  Expr a = rational(3, 2), b = num(-2);
  SymmetryOperator qc = qa.scaled(a) + qb.scaled(b);
  ProlongationCoefficients pa = prolong2(qa), pb = prolong2(qb), pc = prolong2(qc);
  auto zero = [](const Expr& e) { return expand(e).is_zero(); };
  CHECK(zero(pc.rho_t1 - (a * pa.rho_t1 + b * pb.rho_t1)));
  CHECK(zero(pc.rho_x2 - (a * pa.rho_x2 + b * pb.rho_x2)));
  CHECK(zero(pc.sigma_xx1 - (a * pa.sigma_xx1 + b * pb.sigma_xx1)));
  CHECK(zero(pc.sigma_xx2 - (a * pa.sigma_xx2 + b * pb.sigma_xx2)));
}

TEST_CASE("manifold_reduce: examples") {
  RDSystem sys = case5_system();
  SymmetryOperator Q = case5_operator();

  // on M, u_xx rewrites to u_t + C1
  Expr r = manifold_reduce(S("u_xx"), sys, Q, ManifoldSpec::lie());
  CHECK((r - (sym(vars().u_t) + sys.C1)).is_zero());

  // on M1-u with xi0 = 1: u_t -> eta1 - xi1 u_x
  Expr r2 = manifold_reduce(S("u_t"), sys, Q, ManifoldSpec::first_u());
  CHECK(r2.same(num(1)));  // eta1 = 1, xi1 = 0

  // membership: Q(u) = xi0 u_t + xi1 u_x - eta1 reduces to zero
  Expr qu = S("u_t - 1");
  CHECK(manifold_reduce(qu, sys, Q, ManifoldSpec::first_u()).is_zero());

  // degenerate operator
  SymmetryOperator bad(num(0), num(1), num(0), num(0));
  CHECK_THROWS_AS(manifold_reduce(S("u_t"), sys, bad, ManifoldSpec::first_u()),
                  DegenerateOperatorError);
}

TEST_CASE("invariance_residuals: case 5 passes on M1-u, M2; perturbation fails") {
  RDSystem sys = case5_system();
  SymmetryOperator Q = case5_operator();
  SampleConfig cfg = fast_cfg();

  ResidualReport first = invariance_residuals(sys, Q, ManifoldSpec::first_u(), {}, cfg);
  CHECK(first.zero());

  ResidualReport second = invariance_residuals(sys, Q, ManifoldSpec::second(), {}, cfg);
  CHECK(second.zero());

  SymmetryOperator bad(num(1), num(0), num(1), S("u+1"));
  ResidualReport broken = invariance_residuals(sys, bad, ManifoldSpec::first_u(), {}, cfg);
  CHECK(!broken.zero());
}

TEST_CASE("invariance_residuals: case 5 with opaque f, g") {
  // arbitrary f, g: C1 = f(w), C2 = u f(w) + g(w) + (1-d) u, w = u^2 - 2v
  Binding fixed;
  fixed.set(Symbol::intern("d", SymbolKind::Parameter), 2.0);
  RDSystem sys(S("d"), S("f(u^2-2*v)"), S("u*f(u^2-2*v)+g(u^2-2*v)+(1-d)*u"));
  SymmetryOperator Q = case5_operator();
  ResidualReport rep = invariance_residuals(sys, Q, ManifoldSpec::first_u(), fixed, fast_cfg());
  CHECK(rep.zero());
}

TEST_CASE("invariance_residuals: x-translation is a Lie symmetry of any autonomous system") {
  RDSystem sys(num(3), S("u^2*v"), S("exp(u)+v"));
  SymmetryOperator Q(num(0), num(1), num(0), num(0));
  ResidualReport rep = invariance_residuals(sys, Q, ManifoldSpec::lie(), {}, fast_cfg());
  CHECK(rep.zero());
  CHECK(rep.verdict == Verdict::ProvedZero);
}

TEST_CASE("lie_residuals: examples") {
  SampleConfig cfg = fast_cfg();
  // time translation on any autonomous system
  RDSystem sys(num(2), S("u*f(u)"), S("v*(f(u)+alpha)"));
  SymmetryOperator dt_op(num(1), num(0), num(0), num(0));
  CHECK(lie_residuals(sys, dt_op, {}, cfg).zero());

  // v dv on u_xx = u_t + u f(u), v_xx = d v_t + v (f(u) + alpha)
  SymmetryOperator vdv(num(0), num(0), num(0), S("v"));
  CHECK(lie_residuals(sys, vdv, {}, cfg).zero());

  // Table 1 case 1 operator: eta2_u = alpha(1-k) != 0 violates (113)
  Binding fixed;
  fixed.set(Symbol::intern("alpha", SymbolKind::Parameter), 1.0)
      .set(Symbol::intern("k", SymbolKind::Parameter), 2.0)
      .set(Symbol::intern("d", SymbolKind::Parameter), 3.0);
  RDSystem c1sys(S("d"), S("u*f(u^(-k)*(v-u))"),
                 S("u^k*g(u^(-k)*(v-u))+u*(f(u^(-k)*(v-u))+alpha*(1-d))"));
  SymmetryOperator c1op(num(1), num(0), S("alpha*u"), S("alpha*((1-k)*u+k*v)"));
  ResidualReport rep = lie_residuals(c1sys, c1op, fixed, cfg);
  CHECK(!rep.zero());
  for (const auto& eq : rep.equations)
    if (eq.id == "113:eta2_u") CHECK(eq.verdict == Verdict::Nonzero);
}

TEST_CASE("structured_residuals: case 1 instantiation") {
  // alpha=1, k=2, d=3, f=w, g=w^2 (concrete), operator of case 1
  Binding fixed;
  RDSystem sys(num(3), S("u*(u^(-2)*(v-u))"), S("u^2*(u^(-2)*(v-u))^2+u*(u^(-2)*(v-u)+1*(1-3))"));
  LinearCoefficientForm form = LinearCoefficientForm::from_operator(
      SymmetryOperator(num(1), num(0), S("u"), S("(1-2)*u+2*v")));
  ResidualReport rep = structured_residuals(sys, form, ManifoldSpec::first_u(), fixed, fast_cfg());
  CHECK(rep.zero());
}

TEST_CASE("structured/direct agreement on case 5 and a perturbation") {
  SampleConfig cfg = fast_cfg(11);
  RDSystem sys = case5_system();
  SymmetryOperator Q = case5_operator();
  LinearCoefficientForm form = LinearCoefficientForm::from_operator(Q);
  CHECK(structured_residuals(sys, form, ManifoldSpec::first_u(), {}, cfg).zero() ==
        invariance_residuals(sys, Q, ManifoldSpec::first_u(), {}, cfg).zero());

  SymmetryOperator bad(num(1), num(0), num(1), S("u+x"));
  LinearCoefficientForm badform = LinearCoefficientForm::from_operator(bad);
  bool s = structured_residuals(sys, badform, ManifoldSpec::first_u(), {}, cfg).zero();
  bool d = invariance_residuals(sys, bad, ManifoldSpec::first_u(), {}, cfg).zero();
  CHECK(s == d);
  CHECK(!s);
}

TEST_CASE("linear coefficient form round-trip") {
  SymmetryOperator Q(S("2*t"), S("x"), S("exp(t)*u + t*x"), S("exp(x)*u + 3*v + t^2"));
  LinearCoefficientForm f = LinearCoefficientForm::from_operator(Q);
  CHECK(f.r1.same(S("exp(t)")));
  CHECK(f.p1.same(S("t*x")));
  CHECK(f.q.same(S("exp(x)")));
  CHECK(f.r2.same(num(3)));
  CHECK(f.p2.same(S("t^2")));
  SymmetryOperator back = f.to_operator();
  CHECK((back.eta1 - Q.eta1).is_zero());
  CHECK((back.eta2 - Q.eta2).is_zero());
  CHECK(f.purely_conditional_flag());

  CHECK_THROWS(LinearCoefficientForm::from_operator(
      SymmetryOperator(num(1), num(0), S("u^2"), num(0))));
}

TEST_CASE("is_purely_conditional: examples") {
  SampleConfig cfg = fast_cfg();
  // case 2 operator: eta2 = alpha (u + v)
  SymmetryOperator c2(num(1), num(0), S("alpha*u"), S("alpha*(u+v)"));
  CHECK(is_purely_conditional(c2, {}, cfg));
  SymmetryOperator trans(num(1), num(1), num(0), num(0));
  CHECK(!is_purely_conditional(trans, {}, cfg));
  SymmetryOperator vdv(num(1), num(0), num(0), S("v"));
  CHECK(!is_purely_conditional(vdv, {}, cfg));
}

TEST_CASE("combine_with_lie_tail: statement closure on case 6 with g = 0") {
  SampleConfig cfg = fast_cfg(3);
  // case 6 with g = 0: C1 = u f(u), C2 = v f(u) + alpha v
  Binding fixed;
  fixed.set(Symbol::intern("alpha", SymbolKind::Parameter), 0.7)
      .set(Symbol::intern("lambda1", SymbolKind::Parameter), 0.5)
      .set(Symbol::intern("lambda2", SymbolKind::Parameter), 1.3)
      .set(Symbol::intern("d", SymbolKind::Parameter), 2.0);
  RDSystem sys(S("d"), S("u*f(u)"), S("v*f(u)+alpha*v"));
  SymmetryOperator q1(num(1), S("2*lambda1/(1-d)"), num(0),
                      S("lambda2*exp(lambda1*x+((lambda1^2-alpha)/d)*t)*u"));
  CHECK(invariance_residuals(sys, q1, ManifoldSpec::first_u(), fixed, cfg).zero());

  LieTailOperator X{num(1), num(0)};  // v dv
  SymmetryOperator combined =
      combine_with_lie_tail(sys, q1, X, rational(3, 2), rational(-2, 3), fixed, cfg);
  CHECK(invariance_residuals(sys, combined, ManifoldSpec::first_u(), fixed, cfg).zero());

  CHECK_THROWS_AS(combine_with_lie_tail(sys, q1, X, num(1), num(0), fixed, cfg),
                  ConstraintViolationError);
  CHECK_THROWS_AS(LieTailOperator::from_operator(SymmetryOperator(num(0), num(0), num(0), S("u"))),
                  NotLieTailError);
}

TEST_CASE("hierarchy: Lie pass implies first-type pass implies second-type pass") {
  SampleConfig cfg = fast_cfg(21);
  RDSystem sys(num(2), S("u*f(u)"), S("v*(f(u)+alpha)"));
  SymmetryOperator ops[] = {
      SymmetryOperator(num(1), num(0), num(0), num(0)),   // dt: Lie
      SymmetryOperator(num(0), num(0), num(0), S("v")),   // v dv: Lie
      SymmetryOperator(num(1), num(1), num(0), num(0)),   // dt + dx: Lie
  };
  for (const auto& Q : ops) {
    bool lie = lie_residuals(sys, Q, {}, cfg).zero();
    CHECK(lie);
    if (Q.xi0.is_zero()) continue;  // first-type manifold needs xi0 != 0
    bool first = invariance_residuals(sys, Q, ManifoldSpec::first_u(), {}, cfg).zero();
    bool second = invariance_residuals(sys, Q, ManifoldSpec::second(), {}, cfg).zero();
    CHECK(first);
    CHECK(second);
  }
}
