#include "rdsym/system.hpp"

#include <unordered_set>

#include "rdsym/errors.hpp"

namespace rdsym {

namespace {

void require_no_derivative_jets(const Expr& e, const std::string& who) {
  const Vars& w = vars();
  for (Symbol s : {w.u_t, w.v_t, w.u_x, w.v_x, w.u_xx, w.v_xx, w.u_xt, w.v_xt, w.u_tt, w.v_tt})
    if (e.contains(s)) throw Error(who + ": coefficient contains jet coordinate '" + s.name() + "'");
}

void require_reaction_shape(const Expr& e, const std::string& who) {
  require_no_derivative_jets(e, who);
  if (e.contains(vars().t) || e.contains(vars().x))
    throw Error(who + ": reaction term depends on t or x");
}

}  // namespace

RDSystem::RDSystem(Expr d_, Expr c1, Expr c2) : d(std::move(d_)), C1(std::move(c1)), C2(std::move(c2)) {
  require_reaction_shape(C1, "RDSystem C1");
  require_reaction_shape(C2, "RDSystem C2");
}

bool RDSystem::d_is_one() const { return d.kind() == Kind::Constant && d.num().value() == 1.0; }

void RDSystem::require_d_not_one(const std::string& who) const {
  if (d_is_one()) throw ConstraintViolationError(who + ": requires d != 1");
}

SymmetryOperator::SymmetryOperator(Expr xi0_, Expr xi1_, Expr eta1_, Expr eta2_)
    : xi0(std::move(xi0_)), xi1(std::move(xi1_)), eta1(std::move(eta1_)), eta2(std::move(eta2_)) {
  require_no_derivative_jets(xi0, "SymmetryOperator xi0");
  require_no_derivative_jets(xi1, "SymmetryOperator xi1");
  require_no_derivative_jets(eta1, "SymmetryOperator eta1");
  require_no_derivative_jets(eta2, "SymmetryOperator eta2");
}

SymmetryOperator SymmetryOperator::scaled(const Expr& c) const {
  return SymmetryOperator(c * xi0, c * xi1, c * eta1, c * eta2);
}

SymmetryOperator operator+(const SymmetryOperator& a, const SymmetryOperator& b) {
  return SymmetryOperator(a.xi0 + b.xi0, a.xi1 + b.xi1, a.eta1 + b.eta1, a.eta2 + b.eta2);
}

SymmetryOperator LinearCoefficientForm::to_operator() const {
  const Vars& w = vars();
  return SymmetryOperator(xi0, xi1, r1 * sym(w.u) + p1, q * sym(w.u) + r2 * sym(w.v) + p2);
}

LinearCoefficientForm LinearCoefficientForm::from_operator(const SymmetryOperator& Q) {
  const Vars& w = vars();
  auto check_tx_only = [](const Expr& e, const char* what) {
    if (e.contains(vars().u) || e.contains(vars().v))
      throw Error(std::string("operator is not of linear-coefficient shape: ") + what +
                  " depends on u or v");
  };
  LinearCoefficientForm f;
  f.xi0 = Q.xi0;
  if (f.xi0.contains(w.x) || f.xi0.contains(w.u) || f.xi0.contains(w.v))
    throw Error("operator is not of linear-coefficient shape: xi0 must depend on t only");
  f.xi1 = Q.xi1;
  check_tx_only(f.xi1, "xi1");
  f.r1 = differentiate(Q.eta1, w.u);
  check_tx_only(f.r1, "r1");
  if (!differentiate(Q.eta1, w.v).is_zero())
    throw Error("operator is not of linear-coefficient shape: eta1 depends on v");
  f.p1 = Q.eta1 - f.r1 * sym(w.u);
  check_tx_only(f.p1, "p1");
  f.q = differentiate(Q.eta2, w.u);
  check_tx_only(f.q, "q");
  f.r2 = differentiate(Q.eta2, w.v);
  check_tx_only(f.r2, "r2");
  f.p2 = Q.eta2 - f.q * sym(w.u) - f.r2 * sym(w.v);
  check_tx_only(f.p2, "p2");
  return f;
}

bool LinearCoefficientForm::purely_conditional_flag() const { return !q.is_zero(); }

SymmetryOperator LieTailOperator::to_operator() const {
  return SymmetryOperator(num(0), num(0), num(0), h1 * sym(vars().v) + h0);
}

LieTailOperator LieTailOperator::from_operator(const SymmetryOperator& X) {
  const Vars& w = vars();
  if (!X.xi0.is_zero() || !X.xi1.is_zero() || !X.eta1.is_zero())
    throw NotLieTailError("operator has components outside dv");
  Expr h1 = differentiate(X.eta2, w.v);
  if (h1.contains(w.u) || h1.contains(w.v))
    throw NotLieTailError("eta2 is not of the shape h1(t,x) v + h0(t,x)");
  Expr h0 = X.eta2 - h1 * sym(w.v);
  if (h0.contains(w.u) || h0.contains(w.v))
    throw NotLieTailError("eta2 is not of the shape h1(t,x) v + h0(t,x)");
  return LieTailOperator{h1, h0};
}

ProlongationCoefficients prolong2(const SymmetryOperator& Q) {
  const Vars& w = vars();
  auto Dt = [](const Expr& e) { return total_derivative(e, DVar::T); };
  auto Dx = [](const Expr& e) { return total_derivative(e, DVar::X); };
  Expr ut = sym(w.u_t), ux = sym(w.u_x), vt = sym(w.v_t), vx = sym(w.v_x);

  ProlongationCoefficients p;
  p.rho_t1 = Dt(Q.eta1) - ut * Dt(Q.xi0) - ux * Dt(Q.xi1);
  p.rho_x1 = Dx(Q.eta1) - ut * Dx(Q.xi0) - ux * Dx(Q.xi1);
  p.sigma_xx1 = Dx(p.rho_x1) - sym(w.u_xt) * Dx(Q.xi0) - sym(w.u_xx) * Dx(Q.xi1);
  p.rho_t2 = Dt(Q.eta2) - vt * Dt(Q.xi0) - vx * Dt(Q.xi1);
  p.rho_x2 = Dx(Q.eta2) - vt * Dx(Q.xi0) - vx * Dx(Q.xi1);
  p.sigma_xx2 = Dx(p.rho_x2) - sym(w.v_xt) * Dx(Q.xi0) - sym(w.v_xx) * Dx(Q.xi1);
  return p;
}

std::vector<Symbol> free_jets(ManifoldKind kind) {
  const Vars& w = vars();
  switch (kind) {
    case ManifoldKind::M:
      return {w.u_t, w.v_t, w.u_x, w.v_x, w.u_xt, w.v_xt, w.u_tt, w.v_tt};
    case ManifoldKind::M1u:
      return {w.u_x, w.v_x, w.v_t, w.v_xt, w.v_tt};
    case ManifoldKind::M1v:
      return {w.u_x, w.v_x, w.u_t, w.u_xt, w.u_tt};
    case ManifoldKind::M2:
      return {w.u_x, w.v_x};
  }
  return {};
}

namespace {

// Rewrites formal derivatives phi^(n) for n >= rule order by differentiating
// the rule right-hand side; terminates because rule rhs only holds lower
// orders.
Expr reduce_aux(const Expr& e, const ManifoldSpec& m, bool& changed) {
  if (e.kind() == Kind::FDeriv) {
    for (const auto& sc : m.constraints) {
      if (sc.leading.kind() != Kind::FDeriv) continue;
      if (sc.leading.symbol() != e.symbol()) continue;
      if (!sc.leading.kids()[0].same(e.kids()[0])) continue;
      int n0 = sc.leading.fd_order();
      if (e.fd_order() < n0) continue;
      DVar wrt = sc.leading.kids()[0].same(sym(vars().x)) ? DVar::X : DVar::T;
      Expr r = sc.rhs;
      for (int k = n0; k < e.fd_order(); ++k) r = partial_tx(r, wrt, m.fields);
      changed = true;
      return r;
    }
  }
  if (e.kids().empty()) return e;
  std::vector<Expr> ks;
  bool any = false;
  for (const auto& k : e.kids()) {
    bool ch = false;
    Expr nk = reduce_aux(k, m, ch);
    any = any || ch;
    ks.push_back(nk);
  }
  if (!any) return e;
  changed = true;
  switch (e.kind()) {
    case Kind::Sum:
      return add(std::move(ks));
    case Kind::Prod:
      return mul(std::move(ks));
    case Kind::Pow:
      return pow(ks[0], ks[1]);
    case Kind::Exp:
      return exp(ks[0]);
    case Kind::Ln:
      return ln(ks[0]);
    case Kind::Sin:
      return sin(ks[0]);
    case Kind::Cos:
      return cos(ks[0]);
    case Kind::Tan:
      return tan(ks[0]);
    case Kind::Tanh:
      return tanh(ks[0]);
    case Kind::Apply:
      return apply(e.symbol(), ks[0]);
    case Kind::FDeriv:
      return fderiv(e.symbol(), e.fd_order(), ks[0]);
    default:
      return e;
  }
}

}  // namespace

Expr apply_side_constraints(const Expr& e, const ManifoldSpec& m) {
  if (m.constraints.empty()) return e;
  Binding symrules;
  bool have_sym = false;
  for (const auto& sc : m.constraints) {
    if (sc.leading.kind() == Kind::Sym) {
      symrules.set(sc.leading.symbol(), sc.rhs);
      have_sym = true;
    }
  }
  Expr cur = e;
  for (int i = 0; i < 16; ++i) {
    Expr next = have_sym ? substitute(cur, symrules, true) : cur;
    bool changed = false;
    next = reduce_aux(next, m, changed);
    if (next.same(cur)) return next;
    cur = next;
  }
  throw Error("side-constraint rewriting did not stabilize");
}

Expr manifold_reduce(const Expr& e, const RDSystem& sys, const SymmetryOperator& Q,
                     const ManifoldSpec& m) {
  const Vars& w = vars();
  std::span<const FieldExtension> fields(m.fields);
  Binding jets;

  bool need_u_relation = m.kind == ManifoldKind::M1u || m.kind == ManifoldKind::M2;
  bool need_v_relation = m.kind == ManifoldKind::M1v || m.kind == ManifoldKind::M2;
  if ((need_u_relation || need_v_relation) && Q.xi0.is_zero())
    throw DegenerateOperatorError("xi0 vanishes identically; the invariant-surface relation "
                                  "cannot be solved for the time derivative");

  if (need_u_relation) {
    Expr Ru = (Q.eta1 - Q.xi1 * sym(w.u_x)) / Q.xi0;
    jets.set(w.u_t, Ru);
    jets.set(w.u_xt, total_derivative(Ru, DVar::X, fields));
    jets.set(w.u_tt, total_derivative(Ru, DVar::T, fields));
  }
  if (need_v_relation) {
    Expr Rv = (Q.eta2 - Q.xi1 * sym(w.v_x)) / Q.xi0;
    jets.set(w.v_t, Rv);
    jets.set(w.v_xt, total_derivative(Rv, DVar::X, fields));
    jets.set(w.v_tt, total_derivative(Rv, DVar::T, fields));
  }
  jets.set(w.u_xx, sym(w.u_t) + sys.C1);
  jets.set(w.v_xx, sys.d * sym(w.v_t) + sys.C2);

  Expr cur = e;
  for (int i = 0; i < 16; ++i) {
    Expr next = substitute(cur, jets, true);
    next = apply_side_constraints(next, m);
    if (next.same(cur)) return next;
    cur = next;
  }
  throw Error("manifold elimination did not stabilize");
}

namespace {

Expr partial_rec(const Expr& e, DVar wrt, std::span<const FieldExtension> fields) {
  switch (e.kind()) {
    case Kind::Constant:
      return num(0);
    case Kind::Sym: {
      Symbol s = e.symbol();
      const Vars& w = vars();
      if (s == w.t) return num(wrt == DVar::T ? 1 : 0);
      if (s == w.x) return num(wrt == DVar::X ? 1 : 0);
      for (const auto& f : fields) {
        if (s == f.base) return sym(wrt == DVar::T ? f.d_t : f.d_x);
        if (s == f.d_x) return sym(wrt == DVar::T ? f.d_xt : f.d_xx);
        if (s == f.d_t) return sym(wrt == DVar::T ? f.d_tt : f.d_xt);
        if (s == f.d_xx || s == f.d_xt || s == f.d_tt)
          throw OrderOverflowError("partial derivative of '" + s.name() +
                                   "' leaves the second-order field family");
      }
      return num(0);
    }
    case Kind::Sum: {
      std::vector<Expr> ts;
      for (const auto& k : e.kids()) ts.push_back(partial_rec(k, wrt, fields));
      return add(std::move(ts));
    }
    case Kind::Prod: {
      std::vector<Expr> ts;
      const auto& ks = e.kids();
      for (std::size_t i = 0; i < ks.size(); ++i) {
        std::vector<Expr> fs;
        for (std::size_t j = 0; j < ks.size(); ++j)
          fs.push_back(i == j ? partial_rec(ks[j], wrt, fields) : ks[j]);
        ts.push_back(mul(std::move(fs)));
      }
      return add(std::move(ts));
    }
    case Kind::Pow: {
      const Expr& b = e.kids()[0];
      const Expr& x = e.kids()[1];
      Expr db = partial_rec(b, wrt, fields);
      Expr dx = partial_rec(x, wrt, fields);
      if (dx.is_zero()) return mul({x, pow(b, x - 1), db});
      return mul({e, add({mul({dx, ln(b)}), mul({x, db, pow(b, num(-1))})})});
    }
    case Kind::Exp:
      return mul({e, partial_rec(e.kids()[0], wrt, fields)});
    case Kind::Ln:
      return mul({partial_rec(e.kids()[0], wrt, fields), pow(e.kids()[0], num(-1))});
    case Kind::Sin:
      return mul({cos(e.kids()[0]), partial_rec(e.kids()[0], wrt, fields)});
    case Kind::Cos:
      return mul({num(-1), sin(e.kids()[0]), partial_rec(e.kids()[0], wrt, fields)});
    case Kind::Tan:
      return mul({pow(cos(e.kids()[0]), num(-2)), partial_rec(e.kids()[0], wrt, fields)});
    case Kind::Tanh:
      return mul({add({num(1), neg(pow(tanh(e.kids()[0]), num(2)))}),
                  partial_rec(e.kids()[0], wrt, fields)});
    case Kind::Apply:
      return mul({fderiv(e.symbol(), 1, e.kids()[0]), partial_rec(e.kids()[0], wrt, fields)});
    case Kind::FDeriv:
      return mul({fderiv(e.symbol(), e.fd_order() + 1, e.kids()[0]),
                  partial_rec(e.kids()[0], wrt, fields)});
  }
  return num(0);
}

}  // namespace

Expr partial_tx(const Expr& e, DVar wrt, std::span<const FieldExtension> fields) {
  return partial_rec(e, wrt, fields);
}

}  // namespace rdsym
