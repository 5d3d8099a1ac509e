#include "rdsym/expr.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include "rdsym/errors.hpp"

namespace rdsym {

struct Expr::Node {
  Kind kind = Kind::Constant;
  Num value;
  std::uint32_t sym_id = 0;
  int order = 0;  // FDeriv order
  std::vector<Expr> kids;
  std::size_t hash = 0;
};

namespace {

std::size_t hash_combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t hash_num(const Num& n) {
  if (n.exact()) {
    std::size_t h = hash_combine(0x517cc1b7, static_cast<std::size_t>(n.rat().num()));
    return hash_combine(h, static_cast<std::size_t>(n.rat().den()));
  }
  double d = n.value();
  std::size_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  return hash_combine(0x27220a95, bits);
}

}  // namespace

Expr make_node(Kind kind, Num value, Symbol s, int order, std::vector<Expr> kids) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->value = value;
  n->sym_id = s.id();
  n->order = order;
  n->kids = std::move(kids);
  std::size_t h = hash_combine(0x9ddfea08, static_cast<std::size_t>(kind));
  if (kind == Kind::Constant) h = hash_combine(h, hash_num(value));
  h = hash_combine(h, n->sym_id);
  h = hash_combine(h, static_cast<std::size_t>(order));
  for (const auto& k : n->kids) h = hash_combine(h, k.hash());
  n->hash = h;
  return Expr(std::move(n));
}

namespace {

Symbol dummy_symbol() { return vars().t; }

Expr make_const(const Num& n) { return make_node(Kind::Constant, n, dummy_symbol(), 0, {}); }
Expr make_sym(Symbol s) { return make_node(Kind::Sym, Num(), s, 0, {}); }

}  // namespace

Expr::Expr() : p_(rdsym::num(0).p_) {}

Kind Expr::kind() const { return p_->kind; }
const Num& Expr::num() const { return p_->value; }
Symbol Expr::symbol() const { return Symbol::from_id(p_->sym_id); }
int Expr::fd_order() const { return p_->order; }
const std::vector<Expr>& Expr::kids() const { return p_->kids; }
std::size_t Expr::hash() const { return p_->hash; }

bool Expr::is_zero() const { return p_->kind == Kind::Constant && p_->value.is_zero(); }
bool Expr::is_one() const { return p_->kind == Kind::Constant && p_->value.is_one(); }

bool Expr::same(const Expr& o) const {
  if (p_ == o.p_) return true;
  if (p_->hash != o.p_->hash) return false;
  return compare(*this, o) == 0;
}

int Expr::compare(const Expr& a, const Expr& b) {
  if (a.p_ == b.p_) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  switch (a.kind()) {
    case Kind::Constant: {
      const Num& x = a.num();
      const Num& y = b.num();
      if (x.exact() != y.exact()) return x.exact() ? -1 : 1;
      if (x.exact()) {
        if (x.rat() == y.rat()) return 0;
        return x.rat() < y.rat() ? -1 : 1;
      }
      if (x.value() == y.value()) return 0;
      return x.value() < y.value() ? -1 : 1;
    }
    case Kind::Sym:
      if (a.p_->sym_id == b.p_->sym_id) return 0;
      return a.p_->sym_id < b.p_->sym_id ? -1 : 1;
    default:
      break;
  }
  if (a.p_->sym_id != b.p_->sym_id) return a.p_->sym_id < b.p_->sym_id ? -1 : 1;
  if (a.p_->order != b.p_->order) return a.p_->order < b.p_->order ? -1 : 1;
  if (a.kids().size() != b.kids().size()) return a.kids().size() < b.kids().size() ? -1 : 1;
  for (std::size_t i = 0; i < a.kids().size(); ++i) {
    int c = compare(a.kids()[i], b.kids()[i]);
    if (c != 0) return c;
  }
  return 0;
}

bool Expr::contains(Symbol s) const {
  if (p_->kind == Kind::Sym || p_->kind == Kind::Apply || p_->kind == Kind::FDeriv) {
    if (p_->sym_id == s.id()) return true;
  }
  for (const auto& k : kids())
    if (k.contains(s)) return true;
  return false;
}

bool Expr::contains_subtree(const Expr& e) const {
  if (same(e)) return true;
  for (const auto& k : kids())
    if (k.contains_subtree(e)) return true;
  return false;
}

std::size_t Expr::node_count() const {
  std::size_t n = 1;
  for (const auto& k : kids()) n += k.node_count();
  return n;
}

// ---------------------------------------------------------------------------
// Builders

Expr num(std::int64_t n) { return make_const(Num(n)); }
Expr num(const Rational& q) { return make_const(Num(q)); }
Expr num(const Num& n) { return make_const(n); }
Expr floating(double v) { return make_const(Num::from_double(v)); }
Expr rational(std::int64_t n, std::int64_t d) { return make_const(Num(Rational(n, d))); }
Expr sym(Symbol s) { return make_sym(s); }
Expr sym(std::string_view name, SymbolKind kind) { return make_sym(Symbol::intern(name, kind)); }

std::pair<Num, Expr> coeff_core(const Expr& term) {
  if (term.kind() == Kind::Constant) return {term.num(), num(1)};
  if (term.kind() == Kind::Prod && term.kids()[0].kind() == Kind::Constant) {
    const auto& kids = term.kids();
    if (kids.size() == 2) return {kids[0].num(), kids[1]};
    std::vector<Expr> rest(kids.begin() + 1, kids.end());
    return {kids[0].num(), make_node(Kind::Prod, Num(), dummy_symbol(), 0, std::move(rest))};
  }
  return {Num(1), term};
}

std::vector<Expr> terms_of(const Expr& e) {
  if (e.kind() == Kind::Sum) return e.kids();
  return {e};
}

std::vector<Expr> factors_of(const Expr& e) {
  if (e.kind() == Kind::Prod) return e.kids();
  return {e};
}

std::pair<Expr, Expr> base_exponent(const Expr& factor) {
  if (factor.kind() == Kind::Pow) return {factor.kids()[0], factor.kids()[1]};
  return {factor, num(1)};
}

Expr add(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  flat.reserve(terms.size());
  for (auto& t : terms) {
    if (t.kind() == Kind::Sum)
      for (const auto& k : t.kids()) flat.push_back(k);
    else
      flat.push_back(std::move(t));
  }
  Num const_acc(0);
  std::vector<std::pair<Expr, Num>> order;  // core -> coefficient, insertion order
  std::unordered_map<Expr, std::size_t, ExprHash, ExprEq> index;
  for (const auto& t : flat) {
    if (t.kind() == Kind::Constant) {
      const_acc = const_acc + t.num();
      continue;
    }
    auto [c, core] = coeff_core(t);
    auto it = index.find(core);
    if (it == index.end()) {
      index.emplace(core, order.size());
      order.emplace_back(core, c);
    } else {
      order[it->second].second = order[it->second].second + c;
    }
  }
  std::vector<Expr> out;
  out.reserve(order.size() + 1);
  for (auto& [core, c] : order) {
    if (c.is_zero()) continue;
    if (c.is_one())
      out.push_back(core);
    else
      out.push_back(mul({num(c), core}));
  }
  if (!const_acc.is_zero()) out.push_back(num(const_acc));
  if (out.empty()) return num(const_acc);  // exact or float zero
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return Expr::compare(a, b) < 0; });
  return make_node(Kind::Sum, Num(), dummy_symbol(), 0, std::move(out));
}

namespace {
// Negates a Sum term-by-term without re-entering product normalization.
Expr negate_sum(const Expr& s) {
  std::vector<Expr> ts;
  ts.reserve(s.kids().size());
  for (const auto& t : s.kids()) {
    auto [c, core] = coeff_core(t);
    Num nc = c.negated();
    if (core.is_one())
      ts.push_back(num(nc));
    else if (nc.is_one())
      ts.push_back(core);
    else
      ts.push_back(mul({num(nc), core}));
  }
  return add(std::move(ts));
}
}  // namespace

Expr mul(std::vector<Expr> factors) {
  for (int round = 0; round < 16; ++round) {
    Num coeff(1);
    std::vector<Expr> exp_args;
    std::vector<std::pair<Expr, std::vector<Expr>>> slots;  // base -> exponent terms
    std::unordered_map<Expr, std::size_t, ExprHash, ExprEq> index;

    std::vector<Expr> work = std::move(factors);
    for (std::size_t i = 0; i < work.size(); ++i) {
      Expr f = work[i];
      switch (f.kind()) {
        case Kind::Constant:
          coeff = coeff * f.num();
          break;
        case Kind::Prod:
          for (const auto& k : f.kids()) work.push_back(k);
          break;
        case Kind::Exp:
          exp_args.push_back(f.kids()[0]);
          break;
        default: {
          auto [base, e] = base_exponent(f);
          auto it = index.find(base);
          if (it == index.end()) {
            index.emplace(base, slots.size());
            slots.emplace_back(base, std::vector<Expr>{e});
          } else {
            slots[it->second].second.push_back(e);
          }
        }
      }
    }
    if (coeff.is_zero()) return num(0);

    std::vector<Expr> pieces;
    bool redo = false;
    for (auto& [base, exps] : slots) {
      Expr e = exps.size() == 1 ? exps[0] : add(std::move(exps));
      if (e.is_zero()) continue;
      if (e.is_one() && base.kind() == Kind::Sum) {
        // Canonical sign for sum factors: the sign lives in the coefficient.
        Expr nb = negate_sum(base);
        if (Expr::compare(nb, base) < 0) {
          coeff = coeff.negated();
          pieces.push_back(nb);
          continue;
        }
      }
      Expr p = e.is_one() ? base : pow(base, e);
      if (p.kind() == Kind::Constant) {
        coeff = coeff * p.num();
        if (coeff.is_zero()) return num(0);
      } else if (p.kind() == Kind::Prod || p.kind() == Kind::Exp) {
        redo = true;
        pieces.push_back(p);
      } else {
        pieces.push_back(p);
      }
    }
    if (!exp_args.empty()) {
      Expr s = exp_args.size() == 1 ? exp_args[0] : add(std::move(exp_args));
      Expr p = exp(s);
      if (p.kind() == Kind::Constant)
        coeff = coeff * p.num();
      else
        pieces.push_back(p);
    }
    if (redo) {
      pieces.push_back(num(coeff));
      factors = std::move(pieces);
      continue;
    }
    if (pieces.empty()) return num(coeff);
    if (coeff.is_one() && pieces.size() == 1) return pieces[0];
    // A constant times a sum distributes, keeping the normal form unique
    // (needed so that -(a+b) cancels against a+b).
    if (pieces.size() == 1 && pieces[0].kind() == Kind::Sum) {
      std::vector<Expr> ts;
      for (const auto& t : pieces[0].kids()) ts.push_back(mul({num(coeff), t}));
      return add(std::move(ts));
    }
    std::sort(pieces.begin(), pieces.end(), [](const Expr& a, const Expr& b) { return Expr::compare(a, b) < 0; });
    if (!coeff.is_one()) pieces.insert(pieces.begin(), num(coeff));
    if (pieces.size() == 1) return pieces[0];
    return make_node(Kind::Prod, Num(), dummy_symbol(), 0, std::move(pieces));
  }
  throw Error("product normalization did not stabilize");
}

namespace {

bool small_int(const Expr& e, std::int64_t& out) {
  if (e.kind() != Kind::Constant || !e.num().is_integer()) return false;
  out = e.num().rat().num();
  return out > -4096 && out < 4096;
}

// Exact q-th root of a nonnegative integer, if one exists.
bool exact_root(std::int64_t v, std::int64_t q, std::int64_t& out) {
  if (v < 0) return false;
  double guess = std::pow(static_cast<double>(v), 1.0 / static_cast<double>(q));
  for (std::int64_t c = static_cast<std::int64_t>(guess) - 1; c <= static_cast<std::int64_t>(guess) + 1; ++c) {
    if (c < 0) continue;
    __int128 p = 1;
    for (std::int64_t i = 0; i < q; ++i) {
      p *= c;
      if (p > INT64_MAX) break;
    }
    if (p == v) {
      out = c;
      return true;
    }
  }
  return false;
}

}  // namespace

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_zero()) return num(1);
  if (exponent.is_one()) return base;
  if (base.is_one()) return num(1);
  if (base.is_zero()) {
    if (exponent.kind() == Kind::Constant && !exponent.num().is_negative() && !exponent.num().is_zero())
      return num(0);
    return make_node(Kind::Pow, Num(), dummy_symbol(), 0, {base, exponent});
  }
  std::int64_t ie = 0;
  bool int_exp = small_int(exponent, ie);

  if (base.kind() == Kind::Constant && exponent.kind() == Kind::Constant) {
    const Num& b = base.num();
    const Num& e = exponent.num();
    if (b.exact() && e.exact()) {
      if (e.is_integer() && int_exp) {
        if (auto r = b.rat().pow_int(ie)) return num(*r);
        return make_node(Kind::Pow, Num(), dummy_symbol(), 0, {base, exponent});
      }
      // Perfect roots of nonnegative rationals, e.g. sqrt(4) or 8^(2/3).
      if (!b.is_negative()) {
        std::int64_t q = e.rat().den(), p = e.rat().num();
        std::int64_t rn, rd;
        if (q <= 6 && exact_root(b.rat().num(), q, rn) && exact_root(b.rat().den(), q, rd)) {
          if (auto r = Rational(rn, rd).pow_int(p)) return num(*r);
        }
      }
      return make_node(Kind::Pow, Num(), dummy_symbol(), 0, {base, exponent});
    }
    double bv = b.value(), ev = e.value();
    if (bv < 0.0) {
      double n;
      if (std::modf(ev, &n) != 0.0) return make_node(Kind::Pow, Num(), dummy_symbol(), 0, {base, exponent});
    }
    return floating(std::pow(bv, ev));
  }

  if (base.kind() == Kind::Pow && int_exp) return pow(base.kids()[0], mul({base.kids()[1], exponent}));
  if (base.kind() == Kind::Exp) return exp(mul({base.kids()[0], exponent}));
  if (base.kind() == Kind::Prod && int_exp) {
    std::vector<Expr> fs;
    for (const auto& f : base.kids()) fs.push_back(pow(f, exponent));
    return mul(std::move(fs));
  }
  if (base.kind() == Kind::Sum && int_exp) {
    Expr nb = negate_sum(base);
    if (Expr::compare(nb, base) < 0) {
      Expr p = make_node(Kind::Pow, Num(), dummy_symbol(), 0, {nb, exponent});
      return (ie % 2 != 0) ? neg(p) : p;
    }
  }
  return make_node(Kind::Pow, Num(), dummy_symbol(), 0, {base, exponent});
}

Expr quotient(const Expr& a, const Expr& b) { return mul({a, pow(b, num(-1))}); }

Expr neg(const Expr& a) { return mul({num(-1), a}); }

Expr exp(const Expr& a) {
  if (a.is_zero()) return num(1);
  if (a.kind() == Kind::Constant && !a.num().exact()) return floating(std::exp(a.num().value()));
  if (a.kind() == Kind::Ln) return a.kids()[0];
  return make_node(Kind::Exp, Num(), dummy_symbol(), 0, {a});
}

Expr ln(const Expr& a) {
  if (a.is_one()) return num(0);
  if (a.kind() == Kind::Constant && !a.num().exact() && a.num().value() > 0.0)
    return floating(std::log(a.num().value()));
  if (a.kind() == Kind::Exp) return a.kids()[0];
  return make_node(Kind::Ln, Num(), dummy_symbol(), 0, {a});
}

namespace {
Expr unary(Kind k, const Expr& a, double (*f)(double), bool zero_is_zero, double at_zero) {
  if (a.is_zero()) return zero_is_zero ? num(0) : num(static_cast<std::int64_t>(at_zero));
  if (a.kind() == Kind::Constant && !a.num().exact()) return floating(f(a.num().value()));
  return make_node(k, Num(), dummy_symbol(), 0, {a});
}
}  // namespace

Expr sin(const Expr& a) { return unary(Kind::Sin, a, std::sin, true, 0); }
Expr cos(const Expr& a) { return unary(Kind::Cos, a, std::cos, false, 1); }
Expr tan(const Expr& a) { return unary(Kind::Tan, a, std::tan, true, 0); }
Expr tanh(const Expr& a) { return unary(Kind::Tanh, a, std::tanh, true, 0); }

Expr sqrt(const Expr& a) { return pow(a, rational(1, 2)); }

Expr apply(Symbol f, const Expr& arg) {
  if (f.kind() != SymbolKind::OpaqueFn)
    throw KindConflictError("apply: '" + f.name() + "' is not an opaque function symbol");
  return make_node(Kind::Apply, Num(), f, 0, {arg});
}

Expr fderiv(Symbol f, int order, const Expr& arg) {
  if (f.kind() != SymbolKind::OpaqueFn)
    throw KindConflictError("fderiv: '" + f.name() + "' is not an opaque function symbol");
  if (order <= 0) return apply(f, arg);
  return make_node(Kind::FDeriv, Num(), f, order, {arg});
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr int kPrecSum = 1;
constexpr int kPrecProd = 2;
constexpr int kPrecPow = 3;
constexpr int kPrecAtom = 4;

int prec_of(const Expr& e) {
  switch (e.kind()) {
    case Kind::Sum:
      return kPrecSum;
    case Kind::Prod:
      return kPrecProd;
    case Kind::Pow:
      return kPrecPow;
    default:
      return kPrecAtom;
  }
}

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, p);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

std::string fmt_num(const Num& n) { return n.exact() ? n.rat().str() : fmt_double(n.value()); }

std::string render(const Expr& e, int parent);

std::string render_pow_tail(const Expr& base, const Num& abs_exp) {
  // base^|e| with |e| a positive constant; used for denominators.
  std::string b = render(base, kPrecPow + (base.kind() == Kind::Pow ? 1 : 0));
  if (base.kind() == Kind::Pow || prec_of(base) < kPrecPow) b = "(" + render(base, 0) + ")";
  if (abs_exp.is_one()) return b;
  if (abs_exp.exact() && abs_exp.rat() == Rational(1, 2)) return "sqrt(" + render(base, 0) + ")";
  std::string es = fmt_num(abs_exp);
  if (abs_exp.exact() && !abs_exp.is_integer()) es = "(" + es + ")";
  return b + "^" + es;
}

std::string render_prod(const Expr& e) {
  Num coeff(1);
  std::vector<Expr> numer, denom_base;
  std::vector<Num> denom_exp;
  for (const auto& f : e.kids()) {
    if (f.kind() == Kind::Constant) {
      coeff = f.num();
      continue;
    }
    if (f.kind() == Kind::Pow && f.kids()[1].kind() == Kind::Constant && f.kids()[1].num().is_negative()) {
      denom_base.push_back(f.kids()[0]);
      denom_exp.push_back(f.kids()[1].num().negated());
      continue;
    }
    numer.push_back(f);
  }
  std::string out;
  bool neg_coeff = coeff.is_negative();
  Num abs_coeff = neg_coeff ? coeff.negated() : coeff;
  std::vector<std::string> nparts;
  if (!abs_coeff.is_one() || numer.empty()) nparts.push_back(fmt_num(abs_coeff));
  for (const auto& f : numer) nparts.push_back(render(f, kPrecProd));
  for (std::size_t i = 0; i < nparts.size(); ++i) {
    if (i) out += "*";
    out += nparts[i];
  }
  if (!denom_base.empty()) {
    std::vector<std::string> dparts;
    for (std::size_t i = 0; i < denom_base.size(); ++i)
      dparts.push_back(render_pow_tail(denom_base[i], denom_exp[i]));
    out += "/";
    if (dparts.size() > 1) {
      out += "(";
      for (std::size_t i = 0; i < dparts.size(); ++i) {
        if (i) out += "*";
        out += dparts[i];
      }
      out += ")";
    } else {
      out += dparts[0];
    }
  }
  if (neg_coeff) out = "-" + out;
  return out;
}

std::string render(const Expr& e, int parent) {
  std::string out;
  switch (e.kind()) {
    case Kind::Constant: {
      out = fmt_num(e.num());
      if ((e.num().is_negative() || (e.num().exact() && !e.num().is_integer())) && parent >= kPrecProd)
        out = "(" + out + ")";
      return out;
    }
    case Kind::Sym:
      return e.symbol().name();
    case Kind::Sum: {
      bool first = true;
      for (const auto& t : e.kids()) {
        auto [c, core] = coeff_core(t);
        bool negc = c.is_negative();
        Num absc = negc ? c.negated() : c;
        Expr piece = core.is_one() ? num(absc) : (absc.is_one() ? core : mul({num(absc), core}));
        std::string ps = render(piece, kPrecSum);
        if (first) {
          out = negc ? "-" + ps : ps;
          first = false;
        } else {
          out += negc ? " - " : " + ";
          out += ps;
        }
      }
      if (parent > kPrecSum) out = "(" + out + ")";
      return out;
    }
    case Kind::Prod: {
      out = render_prod(e);
      if (parent > kPrecProd || (parent == kPrecProd && !out.empty() && out[0] == '-'))
        out = "(" + out + ")";
      return out;
    }
    case Kind::Pow: {
      const Expr& b = e.kids()[0];
      const Expr& x = e.kids()[1];
      if (x.kind() == Kind::Constant) {
        const Num& n = x.num();
        if (n.exact() && n.rat() == Rational(1, 2)) return "sqrt(" + render(b, 0) + ")";
        if (n.is_negative()) {
          out = "1/" + render_pow_tail(b, n.negated());
          if (parent > kPrecProd) out = "(" + out + ")";
          return out;
        }
      }
      std::string bs = render(b, kPrecPow);
      if (b.kind() == Kind::Pow || prec_of(b) < kPrecPow) bs = "(" + render(b, 0) + ")";
      std::string es = render(x, kPrecPow);
      if (x.kind() == Kind::Constant && x.num().exact() && !x.num().is_integer()) es = "(" + es + ")";
      return bs + "^" + es;
    }
    case Kind::Exp:
      return "exp(" + render(e.kids()[0], 0) + ")";
    case Kind::Ln:
      return "ln(" + render(e.kids()[0], 0) + ")";
    case Kind::Sin:
      return "sin(" + render(e.kids()[0], 0) + ")";
    case Kind::Cos:
      return "cos(" + render(e.kids()[0], 0) + ")";
    case Kind::Tan:
      return "tan(" + render(e.kids()[0], 0) + ")";
    case Kind::Tanh:
      return "tanh(" + render(e.kids()[0], 0) + ")";
    case Kind::Apply:
      return e.symbol().name() + "(" + render(e.kids()[0], 0) + ")";
    case Kind::FDeriv: {
      out = e.symbol().name();
      for (int i = 0; i < e.fd_order(); ++i) out += "'";
      return out + "(" + render(e.kids()[0], 0) + ")";
    }
  }
  return out;
}

}  // namespace

std::string Expr::str() const { return render(*this, 0); }

}  // namespace rdsym
