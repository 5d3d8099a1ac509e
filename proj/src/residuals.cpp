#include "rdsym/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rdsym/collect.hpp"
#include "rdsym/errors.hpp"

namespace rdsym {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ProvedZero:
      return "proved-zero";
    case Verdict::NumericallyZero:
      return "numerically-zero";
    case Verdict::Nonzero:
      return "nonzero";
  }
  return "?";
}

namespace {

void gather_symbols(const Expr& e, std::set<Symbol>& syms, std::set<Symbol>& fns) {
  if (e.kind() == Kind::Sym) syms.insert(e.symbol());
  if (e.kind() == Kind::Apply || e.kind() == Kind::FDeriv) fns.insert(e.symbol());
  for (const auto& k : e.kids()) gather_symbols(k, syms, fns);
}

bool in_fields(Symbol s, const ManifoldSpec* m) {
  if (!m) return false;
  for (const auto& f : m->fields)
    if (s == f.base || s == f.d_t || s == f.d_x || s == f.d_xx || s == f.d_xt || s == f.d_tt)
      return true;
  return false;
}

struct SampledSymbol {
  Symbol s;
  SampleBox box;
  bool signed_draw;
};

std::vector<SampledSymbol> plan_samples(const Expr& e, const Binding& fixed, const ManifoldSpec* m,
                                        const SampleConfig& cfg, std::set<Symbol>& fns_out) {
  std::set<Symbol> syms;
  gather_symbols(e, syms, fns_out);
  const Vars& w = vars();
  std::vector<SampledSymbol> plan;
  for (Symbol s : syms) {
    if (fixed.values.count(s)) continue;
    if (s == w.t) {
      plan.push_back({s, cfg.t_box, false});
    } else if (s == w.x) {
      plan.push_back({s, cfg.x_box, false});
    } else if (s == w.u || s == w.v) {
      plan.push_back({s, cfg.uv_box, false});
    } else if (s.kind() == SymbolKind::Jet) {
      plan.push_back({s, cfg.jet_box, false});
    } else if (in_fields(s, m)) {
      plan.push_back({s, cfg.field_box, false});
    } else {
      plan.push_back({s, cfg.param_box, true});
    }
  }
  std::sort(plan.begin(), plan.end(), [](const SampledSymbol& a, const SampledSymbol& b) {
    return a.s.id() < b.s.id();
  });
  return plan;
}

/// Realization sets for opaque functions lacking a fixed realization:
/// three random cubics with coefficients in [-2, 2], then exp(0.3 w).
std::vector<Binding> realization_sets(const std::set<Symbol>& fns, const Binding& fixed,
                                      const SampleConfig& cfg, Rng& rng) {
  std::vector<Symbol> missing;
  for (Symbol f : fns)
    if (!fixed.realizations.count(f)) missing.push_back(f);
  std::sort(missing.begin(), missing.end(), [](Symbol a, Symbol b) { return a.id() < b.id(); });
  if (missing.empty() || !cfg.opaque_realizations) return {fixed};

  Symbol wv = Symbol::intern("_rw", SymbolKind::Parameter);
  std::vector<Binding> sets;
  for (int i = 0; i < 3; ++i) {
    Binding b = fixed;
    for (Symbol f : missing) {
      Expr body = floating(rng.uniform(-2, 2)) + floating(rng.uniform(-2, 2)) * sym(wv) +
                  floating(rng.uniform(-2, 2)) * pow(sym(wv), num(2)) +
                  floating(rng.uniform(-2, 2)) * pow(sym(wv), num(3));
      b.realize(f, Realization::closed_form(wv, body));
    }
    sets.push_back(std::move(b));
  }
  Binding b = fixed;
  for (Symbol f : missing)
    b.realize(f, Realization::closed_form(wv, exp(rational(3, 10) * sym(wv))));
  sets.push_back(std::move(b));
  return sets;
}

}  // namespace

EquationReport decide_zero(const std::string& id, const Expr& residual, const Binding& fixed,
                           std::span<const Symbol> collect_atoms, const ManifoldSpec* m,
                           const SampleConfig& cfg, Rng& rng) {
  EquationReport rep;
  rep.id = id;
  rep.symbolic = residual;

  bool proved = residual.is_zero();
  if (!proved && !collect_atoms.empty()) {
    std::vector<Expr> atoms;
    for (Symbol s : collect_atoms)
      if (residual.contains(s)) atoms.push_back(sym(s));
    if (!atoms.empty()) {
      try {
        Collected c = collect_auto(residual, atoms);
        proved = c.remainder.is_zero();
        for (const auto& [mono, coeff] : c.groups) {
          (void)mono;
          proved = proved && coeff.is_zero();
        }
      } catch (const NotPolynomialError&) {
        proved = false;
      }
    }
  }

  std::set<Symbol> fns;
  auto plan = plan_samples(residual, fixed, m, cfg, fns);
  auto sets = realization_sets(fns, fixed, cfg, rng);
  std::vector<Expr> terms = terms_of(residual);

  for (const auto& env0 : sets) {
    for (int i = 0; i < cfg.n_points; ++i) {
      int attempts = 0;
      for (;;) {
        Binding env = env0;
        std::vector<std::pair<std::string, double>> assignment;
        for (const auto& ss : plan) {
          double v = ss.signed_draw ? rng.signed_uniform(ss.box.lo, ss.box.hi)
                                    : rng.uniform(ss.box.lo, ss.box.hi);
          env.set(ss.s, v);
          assignment.emplace_back(ss.s.name(), v);
        }
        try {
          double sum = 0.0, scale = 0.0;
          for (const auto& t : terms) {
            double v = evaluate(t, env);
            sum += v;
            scale = std::max(scale, std::abs(v));
          }
          double ratio = std::abs(sum) / (1.0 + scale);
          ++rep.n_samples;
          rep.max_abs = std::max(rep.max_abs, std::abs(sum));
          if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.worst.assignment = std::move(assignment);
            rep.worst.value = sum;
            rep.worst.scale = scale;
          }
          break;
        } catch (const DomainError&) {
          if (++attempts > cfg.max_retries) throw;
        } catch (const UnboundSymbolError&) {
          throw;
        }
      }
    }
  }

  bool numerically_zero = rep.max_ratio <= cfg.tol;
  if (proved && numerically_zero)
    rep.verdict = Verdict::ProvedZero;
  else if (numerically_zero)
    rep.verdict = Verdict::NumericallyZero;
  else
    rep.verdict = Verdict::Nonzero;
  return rep;
}

namespace {

Verdict combine_verdicts(const std::vector<EquationReport>& eqs) {
  Verdict v = Verdict::ProvedZero;
  for (const auto& e : eqs) {
    if (e.verdict == Verdict::Nonzero) return Verdict::Nonzero;
    if (e.verdict == Verdict::NumericallyZero) v = Verdict::NumericallyZero;
  }
  return v;
}

}  // namespace

ResidualReport invariance_residuals(const RDSystem& sys, const SymmetryOperator& Q,
                                    const ManifoldSpec& m, const Binding& fixed,
                                    const SampleConfig& cfg) {
  if ((m.kind == ManifoldKind::M1u || m.kind == ManifoldKind::M1v) && sys.d_is_one())
    sys.require_d_not_one("first-type invariance verification");

  const Vars& w = vars();
  ProlongationCoefficients p = prolong2(Q);
  Expr r1 = p.sigma_xx1 - p.rho_t1 - Q.eta1 * differentiate(sys.C1, w.u) -
            Q.eta2 * differentiate(sys.C1, w.v);
  Expr r2 = p.sigma_xx2 - sys.d * p.rho_t2 - Q.eta1 * differentiate(sys.C2, w.u) -
            Q.eta2 * differentiate(sys.C2, w.v);
  r1 = manifold_reduce(r1, sys, Q, m);
  r2 = manifold_reduce(r2, sys, Q, m);

  std::vector<Symbol> atoms = free_jets(m.kind);

  ResidualReport rep;
  rep.seed = cfg.seed;
  rep.note = "invariant-surface relation solved for the time derivative (divided by xi0); "
             "operator coefficients used unrescaled in the prolongation";
  Rng rng(cfg.seed);
  rep.equations.push_back(decide_zero("Q2(S1)", r1, fixed, atoms, &m, cfg, rng));
  rep.equations.push_back(decide_zero("Q2(S2)", r2, fixed, atoms, &m, cfg, rng));
  rep.verdict = combine_verdicts(rep.equations);
  return rep;
}

ResidualReport lie_residuals(const RDSystem& sys, const SymmetryOperator& Q, const Binding& fixed,
                             const SampleConfig& cfg, std::span<const FieldExtension> fields) {
  const Vars& w = vars();
  auto du = [&](const Expr& e) { return differentiate(e, w.u); };
  auto dv = [&](const Expr& e) { return differentiate(e, w.v); };
  auto dx = [&](const Expr& e) { return partial_tx(e, DVar::X, fields); };
  auto dt = [&](const Expr& e) { return partial_tx(e, DVar::T, fields); };

  std::vector<std::pair<std::string, Expr>> eqs;
  eqs.emplace_back("112:xi0_x", dx(Q.xi0));
  eqs.emplace_back("112:xi0_u", du(Q.xi0));
  eqs.emplace_back("112:xi0_v", dv(Q.xi0));
  eqs.emplace_back("112:xi1_u", du(Q.xi1));
  eqs.emplace_back("112:xi1_v", dv(Q.xi1));
  eqs.emplace_back("113:eta1_v", dv(Q.eta1));
  eqs.emplace_back("113:eta2_u", du(Q.eta2));
  eqs.emplace_back("113:eta1_uu", du(du(Q.eta1)));
  eqs.emplace_back("113:eta2_vv", dv(dv(Q.eta2)));
  eqs.emplace_back("114", 2 * dx(Q.xi1) - dt(Q.xi0));
  eqs.emplace_back("116", 2 * du(dx(Q.eta1)) + dt(Q.xi1));
  eqs.emplace_back("117", 2 * dv(dx(Q.eta2)) + sys.d * dt(Q.xi1));
  eqs.emplace_back("118", Q.eta1 * du(sys.C1) + Q.eta2 * dv(sys.C1) +
                              (2 * dx(Q.xi1) - du(Q.eta1)) * sys.C1 -
                              (dx(dx(Q.eta1)) - dt(Q.eta1)));
  eqs.emplace_back("119", Q.eta1 * du(sys.C2) + Q.eta2 * dv(sys.C2) +
                              (2 * dx(Q.xi1) - dv(Q.eta2)) * sys.C2 -
                              (dx(dx(Q.eta2)) - sys.d * dt(Q.eta2)));

  ManifoldSpec aux;
  aux.kind = ManifoldKind::M;
  aux.fields.assign(fields.begin(), fields.end());

  ResidualReport rep;
  rep.seed = cfg.seed;
  Rng rng(cfg.seed);
  for (auto& [id, e] : eqs)
    rep.equations.push_back(decide_zero(id, e, fixed, {}, &aux, cfg, rng));
  rep.verdict = combine_verdicts(rep.equations);
  return rep;
}

ResidualReport structured_residuals(const RDSystem& sys, const LinearCoefficientForm& form,
                                    const ManifoldSpec& m, const Binding& fixed,
                                    const SampleConfig& cfg) {
  sys.require_d_not_one("structured first-type residuals");
  const Vars& w = vars();
  std::span<const FieldExtension> fields(m.fields);
  auto dx = [&](const Expr& e) { return partial_tx(e, DVar::X, fields); };
  auto dt = [&](const Expr& e) { return partial_tx(e, DVar::T, fields); };
  Expr u = sym(w.u), v = sym(w.v);
  Expr d = sys.d;

  Expr eta1 = form.r1 * u + form.p1;
  Expr eta2 = form.q * u + form.r2 * v + form.p2;

  std::vector<std::pair<std::string, Expr>> eqs;
  eqs.emplace_back("12", 2 * form.xi0 * dx(form.q) + form.xi1 * (d - 1) * form.q);
  eqs.emplace_back("13", 2 * dx(form.r1) + dt(form.xi1));
  eqs.emplace_back("14", 2 * dx(form.r2) + d * dt(form.xi1));
  eqs.emplace_back("15", 2 * dx(form.xi1) - dt(form.xi0));
  eqs.emplace_back("16", eta1 * differentiate(sys.C1, w.u) + eta2 * differentiate(sys.C1, w.v) +
                             (2 * dx(form.xi1) - form.r1) * sys.C1 -
                             (dx(dx(form.r1)) - dt(form.r1)) * u - (dx(dx(form.p1)) - dt(form.p1)));
  eqs.emplace_back("17", eta1 * differentiate(sys.C2, w.u) + eta2 * differentiate(sys.C2, w.v) +
                             (2 * dx(form.xi1) - form.r2) * sys.C2 - form.q * sys.C1 -
                             (eta1 / form.xi0) * form.q * (1 - d) -
                             (dx(dx(form.r2)) - d * dt(form.r2)) * v -
                             (dx(dx(form.q)) - d * dt(form.q)) * u -
                             (dx(dx(form.p2)) - d * dt(form.p2)));

  ResidualReport rep;
  rep.seed = cfg.seed;
  Rng rng(cfg.seed);
  for (auto& [id, e] : eqs) {
    Expr reduced = apply_side_constraints(e, m);
    rep.equations.push_back(decide_zero(id, reduced, fixed, {}, &m, cfg, rng));
  }
  rep.verdict = combine_verdicts(rep.equations);
  return rep;
}

bool is_purely_conditional(const SymmetryOperator& Q, const Binding& fixed, const SampleConfig& cfg) {
  Expr eta2_u = differentiate(Q.eta2, vars().u);
  Rng rng(cfg.seed);
  EquationReport rep = decide_zero("eta2_u", eta2_u, fixed, {}, nullptr, cfg, rng);
  return rep.verdict == Verdict::Nonzero;
}

SymmetryOperator combine_with_lie_tail(const RDSystem& sys, const SymmetryOperator& Q1,
                                       const LieTailOperator& X, const Expr& c1, const Expr& c2,
                                       const Binding& fixed, const SampleConfig& cfg) {
  if (c1.is_zero() || c2.is_zero())
    throw ConstraintViolationError("combine_with_lie_tail requires nonzero c1 and c2");
  ResidualReport lie = lie_residuals(sys, X.to_operator(), fixed, cfg);
  if (!lie.zero())
    throw ConstraintViolationError("X is not a Lie symmetry of the target system");
  return Q1.scaled(c1) + X.to_operator().scaled(c2);
}

}  // namespace rdsym
