#include "rdsym/catalog.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>

#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include "rdsym/collect.hpp"
#include "rdsym/errors.hpp"
#include "rdsym/parse.hpp"

namespace rdsym {

namespace {

using nlohmann::json;

std::string data_file_path() {
  if (const char* env = std::getenv("RDSYM_CATALOG")) return env;
  return std::string(RDSYM_DATA_DIR) + "/catalog.json";
}

std::vector<CatalogEntry> load_entries() {
  std::ifstream in(data_file_path());
  if (!in) throw Error("cannot open catalog registry at " + data_file_path());
  json j;
  in >> j;
  std::vector<CatalogEntry> out;
  for (const auto& je : j.at("entries")) {
    CatalogEntry e;
    e.id = je.at("id").get<int>();
    e.c1 = je.at("c1").get<std::string>();
    e.c2 = je.at("c2").get<std::string>();
    if (je.contains("omega")) e.omega = je.at("omega").get<std::string>();
    e.xi0 = je.at("xi0").get<std::string>();
    e.xi1 = je.at("xi1").get<std::string>();
    e.eta1 = je.at("eta1").get<std::string>();
    e.eta2 = je.at("eta2").get<std::string>();
    if (je.contains("defs"))
      for (auto& [k, v] : je.at("defs").items()) e.defs[k] = v.get<std::string>();
    if (je.contains("fields"))
      for (auto& f : je.at("fields")) e.fields.push_back(f.get<std::string>());
    if (je.contains("side_constraints"))
      for (auto& s : je.at("side_constraints"))
        e.side_constraints.push_back({s.at("solve").get<std::string>(), s.at("eq").get<std::string>()});
    if (je.contains("aux"))
      for (auto& a : je.at("aux")) {
        AuxFunctionDef d;
        d.name = a.at("name").get<std::string>();
        d.var = a.at("var").get<std::string>();
        d.kind = a.at("kind").get<std::string>();
        if (d.kind == "ode1") d.rhs = a.at("yp").get<std::string>();
        if (d.kind == "ode2") d.rhs = a.at("ypp").get<std::string>();
        if (d.kind == "closed")
          for (auto& b : a.at("branches")) {
            AuxFunctionDef::Branch br;
            if (b.contains("nonzero")) br.guard = b.at("nonzero").get<std::string>();
            br.expr = b.at("expr").get<std::string>();
            d.branches.push_back(br);
          }
        e.aux.push_back(d);
      }
    for (auto& p : je.at("params")) e.params.push_back(p.get<std::string>());
    if (je.contains("fixed"))
      for (auto& [k, v] : je.at("fixed").items()) e.fixed[k] = v.get<std::string>();
    if (je.contains("constraints"))
      for (auto& c : je.at("constraints")) e.constraints.push_back({c.at("nonzero").get<std::string>()});
    if (je.contains("opaque"))
      for (auto& f : je.at("opaque")) e.opaque.push_back(f.get<std::string>());
    out.push_back(std::move(e));
  }
  return out;
}

Symbol param_symbol(const std::string& name) { return Symbol::intern(name, SymbolKind::Parameter); }
Symbol fn_symbol(const std::string& name) { return Symbol::intern(name, SymbolKind::OpaqueFn); }

// ---------------------------------------------------------------------------
// Opaque-function replacement: phi(t) -> body(t), phi'(t) -> body'(t), ...

Expr replace_opaque(const Expr& e, Symbol f, Symbol var, const Expr& body) {
  if ((e.kind() == Kind::Apply || e.kind() == Kind::FDeriv) && e.symbol() == f) {
    Expr arg = replace_opaque(e.kids()[0], f, var, body);
    Expr value = body;
    for (int i = 0; i < e.fd_order(); ++i) value = differentiate(value, var);
    Binding b;
    b.set(var, arg);
    return substitute(value, b);
  }
  if (e.kids().empty()) return e;
  std::vector<Expr> ks;
  for (const auto& k : e.kids()) ks.push_back(replace_opaque(k, f, var, body));
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

// ---------------------------------------------------------------------------
// ODE-backed realizations (canonical data: value 1, slope 0 at the origin)

struct OdeCache {
  std::map<double, std::array<double, 2>> states{{0.0, {1.0, 0.0}}};
};

Realization make_ode_realization(int ode_order, const Expr& rhs, Symbol var, Binding params) {
  Symbol ysym = param_symbol("y");
  Symbol ypsym = param_symbol("yp");
  auto cache = std::make_shared<OdeCache>();

  // Closed-form expressions for the low-order derivatives via the ODE.
  auto d_state = [=](double tv, double yv, double ypv) {
    Binding b = params;
    b.set(var, tv).set(ysym, yv).set(ypsym, ypv);
    return evaluate(rhs, b);
  };
  // d/dt of the rhs along solutions, used for one extra derivative order.
  Expr rhs_dot = differentiate(rhs, var) + differentiate(rhs, ysym) * sym(ypsym) +
                 (ode_order == 2 ? differentiate(rhs, ypsym) * rhs : differentiate(rhs, ysym) * rhs);
  if (ode_order == 1) rhs_dot = differentiate(rhs, var) + differentiate(rhs, ysym) * rhs;

  auto solve_to = [=](double tv) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 2>;
    auto it = cache->states.upper_bound(tv);
    double t0;
    State s0;
    if (it == cache->states.begin()) {
      t0 = cache->states.begin()->first;
      s0 = cache->states.begin()->second;
    } else {
      --it;
      t0 = it->first;
      s0 = it->second;
    }
    if (t0 == tv) return s0;
    State s = s0;
    auto rhs_fn = [&](const State& y, State& dydt, double tt) {
      if (ode_order == 2) {
        dydt[0] = y[1];
        dydt[1] = d_state(tt, y[0], y[1]);
      } else {
        dydt[0] = d_state(tt, y[0], 0.0);
        dydt[1] = 0.0;
      }
    };
    auto stepper = odeint::make_controlled(1e-12, 1e-12,
                                           odeint::runge_kutta_fehlberg78<State>());
    double span = tv - t0;
    odeint::integrate_adaptive(stepper, rhs_fn, s, t0, tv, span / 64.0);
    cache->states[tv] = s;
    return s;
  };

  return Realization::callable([=](double tv, int order) -> double {
    auto s = solve_to(tv);
    double yv = s[0], ypv = ode_order == 2 ? s[1] : 0.0;
    if (order == 0) return yv;
    if (ode_order == 1) {
      if (order == 1) return d_state(tv, yv, 0.0);
      if (order == 2) {
        Binding b = params;
        b.set(var, tv).set(ysym, yv);
        return evaluate(rhs_dot, b);
      }
    } else {
      if (order == 1) return ypv;
      if (order == 2) return d_state(tv, yv, ypv);
      if (order == 3) {
        Binding b = params;
        b.set(var, tv).set(ysym, yv).set(ypsym, ypv);
        return evaluate(rhs_dot, b);
      }
    }
    throw Error("auxiliary ODE realization: derivative order not supported");
  });
}

// ---------------------------------------------------------------------------
// Exponential particular solutions for p2-style constraints

// Tries p2 = sum_i T_i / (a_i^2 - cd*b_i - ca) for source terms T_i of the
// shape const*exp(a x + b t). Returns nullopt when the constraint does not
// admit this form (non-exponential source or resonant denominator).
std::optional<Expr> exponential_particular(const Expr& rhs, Symbol p2, Symbol p2_t) {
  const Vars& w = vars();
  Expr cd = differentiate(rhs, p2_t);
  Expr ca = differentiate(rhs, p2);
  if (cd.kind() != Kind::Constant || ca.kind() != Kind::Constant) return std::nullopt;
  Binding zero;
  zero.set(p2, num(0)).set(p2_t, num(0));
  Expr source = substitute(rhs, zero);
  if (source.is_zero()) return num(0);

  std::vector<Expr> parts;
  for (const Expr& term : terms_of(source)) {
    Expr a = num(0), b = num(0);
    bool ok = true;
    for (const Expr& f : factors_of(term)) {
      if (f.kind() == Kind::Constant) continue;
      if (f.kind() == Kind::Exp) {
        Expr arg = f.kids()[0];
        a = differentiate(arg, w.x);
        b = differentiate(arg, w.t);
        if (a.kind() != Kind::Constant || b.kind() != Kind::Constant) ok = false;
        Expr rest = arg - a * sym(w.x) - b * sym(w.t);
        if (rest.kind() != Kind::Constant || !rest.is_zero()) ok = false;
        continue;
      }
      ok = false;
    }
    if (!ok) return std::nullopt;
    Expr denom = a * a - cd * b - ca;
    if (denom.kind() != Kind::Constant) return std::nullopt;
    if (std::abs(denom.num().value()) < 1e-12) return std::nullopt;  // resonant
    parts.push_back(term / denom);
  }
  return add(std::move(parts));
}

std::once_flag g_load_flag;
std::vector<CatalogEntry>* g_entries = nullptr;

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  std::call_once(g_load_flag, [] { g_entries = new std::vector<CatalogEntry>(load_entries()); });
  return *g_entries;
}

const CatalogEntry& catalog_entry(int id) {
  for (const auto& e : catalog())
    if (e.id == id) return e;
  throw ConstraintViolationError("unknown catalog id " + std::to_string(id));
}

Instantiated instantiate(int id, const ParameterAssignment& pa) {
  const CatalogEntry& entry = catalog_entry(id);
  vars();

  // Full parameter map: fixed values take precedence and must not conflict.
  std::map<std::string, Expr> values = pa.values;
  for (const auto& [name, text] : entry.fixed) {
    Expr v = parse(text);
    auto it = values.find(name);
    if (it != values.end() && !(it->second - v).is_zero())
      throw ConstraintViolationError("case " + std::to_string(id) + ": parameter '" + name +
                                     "' is fixed to " + text);
    values[name] = v;
  }
  for (const auto& p : entry.params)
    if (!values.count(p))
      throw ConstraintViolationError("case " + std::to_string(id) + ": missing parameter '" + p + "'");

  Binding numeric;  // numeric view of the parameters
  Binding par_subst;
  for (const auto& [name, v] : values) {
    Symbol s = param_symbol(name);
    par_subst.set(s, v);
    numeric.set(s, evaluate(v, {}));
  }

  // Hard parameter constraints.
  for (const auto& c : entry.constraints) {
    double v = evaluate(substitute(parse(c.nonzero), par_subst), {});
    if (std::abs(v) <= 1e-9)
      throw ConstraintViolationError("case " + std::to_string(id) + ": constraint " + c.nonzero +
                                     " != 0 violated");
  }

  auto prep = [&](const std::string& text) { return parse(text); };
  Expr c1 = prep(entry.c1), c2 = prep(entry.c2);
  Expr xi0 = prep(entry.xi0), xi1 = prep(entry.xi1);
  Expr eta1 = prep(entry.eta1), eta2 = prep(entry.eta2);
  std::vector<std::pair<Expr, Expr>> sides;  // (leading symbol expr, rhs)
  for (const auto& s : entry.side_constraints)
    sides.emplace_back(sym(param_symbol(s.solve)), prep(s.eq));

  // omega into the reaction templates
  if (!entry.omega.empty()) {
    Binding om;
    om.set(param_symbol("omega"), prep(entry.omega));
    c1 = substitute(c1, om);
    c2 = substitute(c2, om);
  }
  // named definitions into operator coefficients and side constraints
  if (!entry.defs.empty()) {
    Binding defs;
    for (const auto& [name, text] : entry.defs) defs.set(param_symbol(name), prep(text));
    eta1 = substitute(eta1, defs);
    eta2 = substitute(eta2, defs);
    for (auto& [lead, rhs] : sides) rhs = substitute(rhs, defs);
  }

  // auxiliary functions
  std::string note;
  ManifoldSpec manifold = ManifoldSpec::first_u();
  Binding fixed = numeric;
  for (const auto& aux : entry.aux) {
    Symbol f = fn_symbol(aux.name);
    Symbol var = aux.var == "x" ? vars().x : vars().t;
    if (aux.kind == "closed") {
      Expr body;
      bool chosen = false;
      for (const auto& br : aux.branches) {
        if (br.guard.empty()) {
          body = substitute(prep(br.expr), par_subst);
          chosen = true;
          break;
        }
        double g = evaluate(substitute(prep(br.guard), par_subst), {});
        if (std::abs(g) > 1e-9) {
          body = substitute(prep(br.expr), par_subst);
          chosen = true;
          break;
        }
      }
      if (!chosen) throw Error("no closed-form branch selected for " + aux.name);
      eta1 = replace_opaque(eta1, f, var, body);
      eta2 = replace_opaque(eta2, f, var, body);
      for (auto& [lead, rhs] : sides) rhs = replace_opaque(rhs, f, var, body);
      note += aux.name + "=closed-form; ";
    } else {
      Expr rhs = substitute(prep(aux.rhs), par_subst);
      int order = aux.kind == "ode2" ? 2 : 1;
      // symbolic rewrite through the defining relation
      Expr lead = fderiv(f, order, sym(var));
      Binding yb;
      yb.set(param_symbol("y"), apply(f, sym(var)));
      yb.set(param_symbol("yp"), fderiv(f, 1, sym(var)));
      manifold.constraints.push_back({lead, substitute(rhs, yb)});
      fixed.realize(f, make_ode_realization(order, rhs, var, numeric));
      note += aux.name + "=ode" + std::to_string(order) + "; ";
    }
  }

  // parameter substitution (exact where the assignment is exact)
  c1 = substitute(c1, par_subst);
  c2 = substitute(c2, par_subst);
  xi0 = substitute(xi0, par_subst);
  xi1 = substitute(xi1, par_subst);
  eta1 = substitute(eta1, par_subst);
  eta2 = substitute(eta2, par_subst);
  for (auto& [lead, rhs] : sides) rhs = substitute(rhs, par_subst);

  // constraint-defined p2: exponential particular solution or symbolic field
  for (const auto& field_name : entry.fields) {
    Symbol p2 = param_symbol(field_name);
    FieldExtension fe = FieldExtension::make(field_name);
    bool solved = false;
    for (auto it = sides.begin(); it != sides.end(); ++it) {
      if (!it->first.same(sym(fe.d_xx))) continue;
      auto particular = exponential_particular(it->second, p2, fe.d_t);
      if (particular) {
        Binding sub;
        sub.set(p2, *particular);
        eta1 = substitute(eta1, sub);
        eta2 = substitute(eta2, sub);
        sides.erase(it);
        note += field_name + "=exp-particular; ";
        solved = true;
      }
      break;
    }
    if (!solved) {
      manifold.fields.push_back(fe);
      note += field_name + "=carried-symbolically; ";
    }
  }
  for (auto& [lead, rhs] : sides) manifold.constraints.push_back({lead, rhs});

  Instantiated inst{RDSystem(substitute(prep("d"), par_subst), c1, c2),
                    SymmetryOperator(xi0, xi1, eta1, eta2),
                    manifold,
                    fixed,
                    {},
                    note};

  // concrete or randomized realizations for the arbitrary functions
  Symbol wv = param_symbol("w");
  for (const auto& name : entry.opaque) {
    Symbol f = fn_symbol(name);
    auto it = pa.fg.find(name);
    if (it != pa.fg.end())
      inst.fixed.realize(f, Realization::closed_form(wv, substitute(parse(it->second), par_subst)));
    else
      inst.opaque_fns.push_back(f);
  }
  return inst;
}

ResidualReport verify_case(int id, const ParameterAssignment& pa, const SampleConfig& cfg) {
  Instantiated inst = instantiate(id, pa);
  ResidualReport rep = invariance_residuals(inst.sys, inst.op, inst.manifold, inst.fixed, cfg);
  rep.note += " [case " + std::to_string(id) + ": " + inst.note + "]";
  return rep;
}

ParameterAssignment draw_parameters(const CatalogEntry& entry, Rng& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    ParameterAssignment pa;
    for (const auto& name : entry.params) {
      if (entry.fixed.count(name)) continue;
      if (name == "d") {
        std::int64_t n;
        do {
          n = 8 + static_cast<std::int64_t>(rng.next() % 41);  // d in [1/2, 3]
        } while (std::abs(n - 16) < 3);                        // keep away from d = 1
        pa.values[name] = rational(n, 16);
      } else if (name == "k") {
        std::int64_t n;
        do {
          n = -12 + static_cast<std::int64_t>(rng.next() % 33);  // k in [-3/2, 5/2]
        } while (std::abs(n - 8) < 2);                           // keep away from k = 1
        pa.values[name] = rational(n, 8);
      } else {
        std::int64_t n = 4 + static_cast<std::int64_t>(rng.next() % 21);  // |v| in [1/4, 3/2]
        bool negative = rng.next() & 1;
        pa.values[name] = rational(negative ? -n : n, 16);
      }
    }
    // margin test: redraw when a constraint expression lands near zero
    bool ok = true;
    Binding sub;
    for (const auto& [name, v] : pa.values) sub.set(param_symbol(name), v);
    for (const auto& [name, text] : entry.fixed) sub.set(param_symbol(name), parse(text));
    for (const auto& c : entry.constraints) {
      double v = evaluate(substitute(parse(c.nonzero), sub), {});
      if (std::abs(v) < 0.1) ok = false;
    }
    if (ok) return pa;
  }
  throw Error("could not draw parameters for case " + std::to_string(entry.id));
}

SweepResult sweep(const std::vector<int>& ids, int trials, const SampleConfig& cfg) {
  SweepResult result;
  result.seed = cfg.seed;
  result.total_ids = static_cast<int>(ids.size());
  for (int id : ids) {
    const CatalogEntry& entry = catalog_entry(id);
    bool id_passed = true;
    for (int trial = 0; trial < trials; ++trial) {
      Rng rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(id * 1000 + trial + 1)));
      ParameterAssignment pa = draw_parameters(entry, rng);
      SampleConfig trial_cfg = cfg;
      trial_cfg.seed = rng.next();
      SweepRow row;
      row.id = id;
      row.trial = trial;
      for (const auto& [name, v] : pa.values) row.params[name] = evaluate(v, {});
      Instantiated inst = instantiate(id, pa);
      ResidualReport rep = invariance_residuals(inst.sys, inst.op, inst.manifold, inst.fixed, trial_cfg);
      row.verdict = rep.verdict;
      for (const auto& eq : rep.equations) row.max_ratio = std::max(row.max_ratio, eq.max_ratio);
      SampleConfig pc_cfg = trial_cfg;
      pc_cfg.n_points = 40;
      row.purely_conditional = is_purely_conditional(inst.op, inst.fixed, pc_cfg);
      row.note = inst.note;
      id_passed = id_passed && rep.zero() && row.purely_conditional;
      result.rows.push_back(std::move(row));
    }
    if (id_passed) ++result.passed_ids;
  }
  return result;
}

}  // namespace rdsym
