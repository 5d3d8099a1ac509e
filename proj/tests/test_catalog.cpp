#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rdsym/catalog.hpp"
#include "rdsym/errors.hpp"
#include "rdsym/parse.hpp"

using namespace rdsym;

namespace {

SampleConfig fast_cfg(std::uint64_t seed = 17) {
  SampleConfig cfg;
  cfg.n_points = 50;
  cfg.seed = seed;
  return cfg;
}

ParameterAssignment pa_of(std::initializer_list<std::pair<const char*, Expr>> vals,
                          std::initializer_list<std::pair<const char*, const char*>> fg = {}) {
  ParameterAssignment pa;
  for (auto& [k, v] : vals) pa.values[k] = v;
  for (auto& [k, v] : fg) pa.fg[k] = v;
  return pa;
}

}  // namespace

TEST_CASE("registry loads all 26 rows") {
  CHECK(catalog().size() == 26);
  CHECK_THROWS_AS(catalog_entry(27), ConstraintViolationError);
  CHECK(catalog_entry(24).c2.find("ln(u+v)") != std::string::npos);
}

TEST_CASE("instantiate: case 1 produces the documented concrete system") {
  auto pa = pa_of({{"alpha", num(1)}, {"k", num(2)}, {"d", num(3)}},
                  {{"f", "w"}, {"g", "w^2"}});
  Instantiated inst = instantiate(1, pa);
  // C1 = u * omega with omega = u^-2 (v-u)
  Expr omega = parse("u^(-2)*(v-u)");
  CHECK((substitute(parse("u*f(u^(-2)*(v-u))"), {}) , true));
  // operator: dt + u du + (-u + 2v) dv
  CHECK(inst.op.xi0.same(num(1)));
  CHECK(inst.op.xi1.is_zero());
  CHECK(inst.op.eta1.same(parse("u")));
  CHECK((inst.op.eta2 - parse("-u+2*v")).is_zero());
  (void)omega;
}

TEST_CASE("instantiate: constraint violations are hard errors") {
  // case 10 requires alpha1 alpha2 alpha4 != 0
  auto pa = pa_of({{"alpha1", num(0)}, {"alpha2", num(1)}, {"alpha3", num(1)},
                   {"alpha4", num(1)}, {"d", num(2)}});
  CHECK_THROWS_AS(instantiate(10, pa), ConstraintViolationError);
  // fixed d mismatches are rejected
  auto pa25 = pa_of({{"d", num(2)}});
  CHECK_THROWS_AS(instantiate(25, pa25), ConstraintViolationError);
}

TEST_CASE("phi10 closed form: alpha3 != 0 branch") {
  auto pa = pa_of({{"alpha1", num(1)}, {"alpha3", num(2)}, {"alpha4", num(1)},
                   {"lambda2", num(1)}, {"lambda3", num(1)}, {"d", num(2)}});
  Instantiated inst = instantiate(23, pa);
  // eta2 = phi10(t) u + lambda2 v + p2, phi10 = lambda3 exp(-alpha3 t / d) + alpha4 lambda2/alpha3
  Expr expected_phi10 = parse("exp(-t)+1/2");
  Expr got = differentiate(inst.op.eta2, vars().u);
  CHECK((got - expected_phi10).is_zero());
}

TEST_CASE("verify_case: case 5 (f=w, g=1, d=2)") {
  auto pa = pa_of({{"d", num(2)}}, {{"f", "w"}, {"g", "1"}});
  ResidualReport rep = verify_case(5, pa, fast_cfg());
  CHECK(rep.zero());
}

TEST_CASE("verify_case: case 24 (alpha1=1, alpha2=1, lambda=1, d=2)") {
  auto pa = pa_of({{"alpha1", num(1)}, {"alpha2", num(1)}, {"lambda", num(1)}, {"d", num(2)}});
  ResidualReport rep = verify_case(24, pa, fast_cfg());
  CHECK(rep.zero());
}

TEST_CASE("verify_case: wrong sign in C2 is detected") {
  // deliberately break case 1 by flipping the sign of the coupling in eta2
  auto pa = pa_of({{"alpha", num(1)}, {"k", num(2)}, {"d", num(3)}},
                  {{"f", "w"}, {"g", "w^2"}});
  Instantiated inst = instantiate(1, pa);
  RDSystem broken(inst.sys.d, inst.sys.C1, neg(inst.sys.C2));
  ResidualReport rep = invariance_residuals(broken, inst.op, inst.manifold, inst.fixed, fast_cfg());
  CHECK(!rep.zero());
}

TEST_CASE("verify_case: exponential-particular p2 rows (9, 17, 18)") {
  auto pa9 = pa_of({{"alpha1", rational(1, 2)}, {"alpha2", num(1)}, {"alpha3", rational(-1, 2)},
                    {"lambda1", rational(1, 2)}, {"lambda2", num(1)}, {"d", num(2)}});
  Instantiated inst9 = instantiate(9, pa9);
  CHECK(inst9.note.find("p2=exp-particular") != std::string::npos);
  CHECK(invariance_residuals(inst9.sys, inst9.op, inst9.manifold, inst9.fixed, fast_cfg()).zero());

  auto pa17 = pa_of({{"alpha3", num(1)}, {"lambda1", rational(1, 2)}, {"lambda2", num(1)},
                     {"lambda3", num(1)}, {"d", num(2)}});
  Instantiated inst17 = instantiate(17, pa17);
  CHECK(inst17.note.find("p2=exp-particular") != std::string::npos);
  CHECK(invariance_residuals(inst17.sys, inst17.op, inst17.manifold, inst17.fixed, fast_cfg()).zero());

  auto pa18 = pa_of({{"alpha2", num(1)}, {"alpha3", rational(1, 2)}, {"alpha4", num(1)},
                     {"lambda2", rational(1, 2)}, {"lambda3", num(1)}, {"d", num(2)}});
  CHECK(verify_case(18, pa18, fast_cfg()).zero());
}

TEST_CASE("verify_case: symbolically carried p2 rows (21, 22, 23)") {
  auto pa22 = pa_of({{"alpha3", rational(1, 2)}, {"lambda1", rational(1, 2)},
                     {"lambda2", rational(3, 4)}, {"lambda3", num(1)}, {"d", num(2)}});
  Instantiated inst22 = instantiate(22, pa22);
  CHECK(inst22.note.find("p2=carried-symbolically") != std::string::npos);
  CHECK(invariance_residuals(inst22.sys, inst22.op, inst22.manifold, inst22.fixed, fast_cfg()).zero());

  auto pa23 = pa_of({{"alpha1", rational(1, 2)}, {"alpha3", num(1)}, {"alpha4", num(1)},
                     {"lambda2", rational(1, 2)}, {"lambda3", num(1)}, {"d", num(2)}});
  CHECK(verify_case(23, pa23, fast_cfg()).zero());

  auto pa21 = pa_of({{"alpha1", rational(1, 2)}, {"alpha2", num(1)}, {"alpha3", rational(-1, 2)},
                     {"lambda1", rational(1, 2)}, {"d", num(2)}});
  CHECK(verify_case(21, pa21, fast_cfg()).zero());
}

TEST_CASE("verify_case: aux-ODE rows (8, 10, 11, 20)") {
  auto pa8 = pa_of({{"alpha1", rational(1, 2)}, {"alpha2", num(1)}, {"lambda1", rational(1, 2)},
                    {"d", num(2)}});
  CHECK(verify_case(8, pa8, fast_cfg()).zero());

  auto pa10 = pa_of({{"alpha1", rational(1, 2)}, {"alpha2", rational(1, 2)},
                     {"alpha3", rational(1, 4)}, {"alpha4", num(1)}, {"d", num(2)}});
  CHECK(verify_case(10, pa10, fast_cfg()).zero());

  auto pa11 = pa_of({{"alpha1", rational(1, 2)}, {"alpha2", num(1)}, {"alpha3", rational(1, 4)},
                     {"alpha4", rational(1, 2)}, {"d", num(2)}});
  CHECK(verify_case(11, pa11, fast_cfg()).zero());

  auto pa20 = pa_of({{"alpha1", rational(1, 2)}, {"alpha2", num(1)}, {"alpha3", rational(1, 2)},
                     {"lambda", num(1)}, {"d", num(2)}});
  CHECK(verify_case(20, pa20, fast_cfg()).zero());
}

TEST_CASE("verify_case: scaling rows 25 and 26 with non-constant xi0") {
  auto pa25 = pa_of({});
  Instantiated inst25 = instantiate(25, pa25);
  CHECK(inst25.note.find("p2=carried-symbolically") != std::string::npos);
  CHECK(invariance_residuals(inst25.sys, inst25.op, inst25.manifold, inst25.fixed, fast_cfg()).zero());

  auto pa26 = pa_of({{"lambda", rational(3, 4)}});
  ResidualReport rep26 = verify_case(26, pa26, fast_cfg());
  CHECK(rep26.zero());
}

TEST_CASE("aux ODE solutions satisfy their defining equations") {
  auto pa = pa_of({{"alpha1", rational(1, 2)}, {"alpha2", num(1)}, {"lambda1", rational(1, 2)},
                   {"d", num(2)}});
  Instantiated inst = instantiate(8, pa);
  Symbol phi1 = Symbol::intern("phi1", SymbolKind::OpaqueFn);
  const Realization& r = inst.fixed.realizations.at(phi1);
  // d phi'' - (2 l1^2 + a2) phi' + ((l1^4 + a2 l1^2 + a1)/d) phi = 0
  double l1 = 0.5, a2 = 1.0, a1 = 0.5, d = 2.0;
  for (double t : {0.3, 0.9, 1.7}) {
    double res = d * r.call(t, 2) - (2 * l1 * l1 + a2) * r.call(t, 1) +
                 ((std::pow(l1, 4) + a2 * l1 * l1 + a1) / d) * r.call(t, 0);
    CHECK(std::abs(res) <= 1e-8);
  }
}

TEST_CASE("phi3 branches agree near the branch point") {
  // exp branch with D = alpha2 - alpha3 + lambda2(1-d) small vs linear branch at D = 0
  double a4 = 1.0, l2 = 0.5, l3 = 1.0, k = 0.5, d = 2.0;
  double eps = 1e-3;
  // alpha2 = alpha3 - lambda2(1-d) + eps
  double a3 = 0.25;
  double a2 = a3 - l2 * (1 - d) + eps;
  auto phi_exp = [&](double t) {
    double D = a2 - a3 + l2 * (1 - d);
    return l3 * std::exp((D / d) * t) + a4 * l2 * (1 - k) / D;
  };
  auto phi_lin = [&](double t) { return -(a4 * l2 * (1 - k) / d) * t + l3; };
  // The exp branch diverges like 1/D as D -> 0; the difference of the two
  // general-solution members with the same lambda3 differs by a constant
  // drift. Compare derivatives, which converge branch-to-branch.
  double t = 0.8;
  double h = 1e-4;
  double slope_exp = (phi_exp(t + h) - phi_exp(t - h)) / (2 * h);
  double slope_lin = (phi_lin(t + h) - phi_lin(t - h)) / (2 * h);
  CHECK(std::abs(slope_exp - slope_lin) <= 1e-2 * (1 + std::abs(slope_lin)) * 10);
}

TEST_CASE("sweep: a handful of ids, reproducible") {
  SampleConfig cfg = fast_cfg(99);
  cfg.n_points = 40;
  std::vector<int> ids = {1, 5, 9, 16, 24};
  SweepResult a = sweep(ids, 1, cfg);
  SweepResult b = sweep(ids, 1, cfg);
  CHECK(a.passed_ids == static_cast<int>(ids.size()));
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].max_ratio == b.rows[i].max_ratio);
    CHECK(a.rows[i].params == b.rows[i].params);
    CHECK(a.rows[i].purely_conditional);
  }
}
