#include "rdsym/calculus.hpp"

#include <functional>
#include <unordered_map>

#include "rdsym/errors.hpp"

namespace rdsym {

namespace {

using Cache = std::unordered_map<const Expr::Node*, Expr>;

Expr diff_rec(const Expr& e, Symbol s, Cache& cache) {
  if (!e.contains(s)) return num(0);
  auto it = cache.find(e.node());
  if (it != cache.end()) return it->second;
  Expr out;
  switch (e.kind()) {
    case Kind::Constant:
      out = num(0);
      break;
    case Kind::Sym:
      out = e.symbol() == s ? num(1) : num(0);
      break;
    case Kind::Sum: {
      std::vector<Expr> ts;
      for (const auto& k : e.kids()) ts.push_back(diff_rec(k, s, cache));
      out = add(std::move(ts));
      break;
    }
    case Kind::Prod: {
      std::vector<Expr> ts;
      const auto& ks = e.kids();
      for (std::size_t i = 0; i < ks.size(); ++i) {
        if (!ks[i].contains(s)) continue;
        std::vector<Expr> fs;
        for (std::size_t j = 0; j < ks.size(); ++j) fs.push_back(i == j ? diff_rec(ks[j], s, cache) : ks[j]);
        ts.push_back(mul(std::move(fs)));
      }
      out = add(std::move(ts));
      break;
    }
    case Kind::Pow: {
      const Expr& b = e.kids()[0];
      const Expr& x = e.kids()[1];
      Expr db = diff_rec(b, s, cache);
      if (!x.contains(s)) {
        // d(b^c) = c * b^(c-1) * b'
        out = mul({x, pow(b, x - 1), db});
      } else {
        Expr dx = diff_rec(x, s, cache);
        out = mul({e, add({mul({dx, ln(b)}), mul({x, db, pow(b, num(-1))})})});
      }
      break;
    }
    case Kind::Exp:
      out = mul({e, diff_rec(e.kids()[0], s, cache)});
      break;
    case Kind::Ln:
      out = mul({diff_rec(e.kids()[0], s, cache), pow(e.kids()[0], num(-1))});
      break;
    case Kind::Sin:
      out = mul({cos(e.kids()[0]), diff_rec(e.kids()[0], s, cache)});
      break;
    case Kind::Cos:
      out = mul({num(-1), sin(e.kids()[0]), diff_rec(e.kids()[0], s, cache)});
      break;
    case Kind::Tan: {
      Expr sec2 = pow(cos(e.kids()[0]), num(-2));
      out = mul({sec2, diff_rec(e.kids()[0], s, cache)});
      break;
    }
    case Kind::Tanh: {
      Expr one_minus = add({num(1), neg(pow(tanh(e.kids()[0]), num(2)))});
      out = mul({one_minus, diff_rec(e.kids()[0], s, cache)});
      break;
    }
    case Kind::Apply:
      out = mul({fderiv(e.symbol(), 1, e.kids()[0]), diff_rec(e.kids()[0], s, cache)});
      break;
    case Kind::FDeriv:
      out = mul({fderiv(e.symbol(), e.fd_order() + 1, e.kids()[0]), diff_rec(e.kids()[0], s, cache)});
      break;
  }
  cache.emplace(e.node(), out);
  return out;
}

}  // namespace

Expr differentiate(const Expr& e, Symbol s) {
  Cache cache;
  return diff_rec(e, s, cache);
}

FieldExtension FieldExtension::make(std::string_view base_name) {
  std::string n(base_name);
  auto p = [](const std::string& name) { return Symbol::intern(name, SymbolKind::Parameter); };
  return FieldExtension{p(n), p(n + "_t"), p(n + "_x"), p(n + "_xx"), p(n + "_xt"), p(n + "_tt")};
}

namespace {

// Promotion result: engaged => the promoted symbol, disengaged => not part of
// any field family (rate zero). Overflow throws.
std::optional<Symbol> promote(Symbol s, DVar wrt, std::span<const FieldExtension> exts) {
  const Vars& w = vars();
  auto overflow = [](Symbol from) -> std::optional<Symbol> {
    throw OrderOverflowError("total derivative of '" + from.name() +
                             "' leaves the second-order jet space");
  };
  if (s == w.u) return wrt == DVar::T ? w.u_t : w.u_x;
  if (s == w.v) return wrt == DVar::T ? w.v_t : w.v_x;
  if (s == w.u_x) return wrt == DVar::T ? w.u_xt : w.u_xx;
  if (s == w.v_x) return wrt == DVar::T ? w.v_xt : w.v_xx;
  if (s == w.u_t) return wrt == DVar::T ? w.u_tt : w.u_xt;
  if (s == w.v_t) return wrt == DVar::T ? w.v_tt : w.v_xt;
  if (s == w.u_xx || s == w.v_xx || s == w.u_xt || s == w.v_xt || s == w.u_tt || s == w.v_tt)
    return overflow(s);
  for (const auto& f : exts) {
    if (s == f.base) return wrt == DVar::T ? f.d_t : f.d_x;
    if (s == f.d_x) return wrt == DVar::T ? f.d_xt : f.d_xx;
    if (s == f.d_t) return wrt == DVar::T ? f.d_tt : f.d_xt;
    if (s == f.d_xx || s == f.d_xt || s == f.d_tt) return overflow(s);
  }
  return std::nullopt;
}

Expr total_rec(const Expr& e, DVar wrt, std::span<const FieldExtension> exts, Cache& cache) {
  auto it = cache.find(e.node());
  if (it != cache.end()) return it->second;
  Expr out;
  switch (e.kind()) {
    case Kind::Constant:
      out = num(0);
      break;
    case Kind::Sym: {
      Symbol s = e.symbol();
      const Vars& w = vars();
      if (s == w.t) {
        out = num(wrt == DVar::T ? 1 : 0);
      } else if (s == w.x) {
        out = num(wrt == DVar::X ? 1 : 0);
      } else if (auto p = promote(s, wrt, exts)) {
        out = sym(*p);
      } else {
        out = num(0);  // parameter
      }
      break;
    }
    case Kind::Sum: {
      std::vector<Expr> ts;
      for (const auto& k : e.kids()) ts.push_back(total_rec(k, wrt, exts, cache));
      out = add(std::move(ts));
      break;
    }
    case Kind::Prod: {
      std::vector<Expr> ts;
      const auto& ks = e.kids();
      for (std::size_t i = 0; i < ks.size(); ++i) {
        std::vector<Expr> fs;
        for (std::size_t j = 0; j < ks.size(); ++j)
          fs.push_back(i == j ? total_rec(ks[j], wrt, exts, cache) : ks[j]);
        ts.push_back(mul(std::move(fs)));
      }
      out = add(std::move(ts));
      break;
    }
    case Kind::Pow: {
      const Expr& b = e.kids()[0];
      const Expr& x = e.kids()[1];
      Expr db = total_rec(b, wrt, exts, cache);
      Expr dx = total_rec(x, wrt, exts, cache);
      if (dx.is_zero()) {
        out = mul({x, pow(b, x - 1), db});
      } else {
        out = mul({e, add({mul({dx, ln(b)}), mul({x, db, pow(b, num(-1))})})});
      }
      break;
    }
    case Kind::Exp:
      out = mul({e, total_rec(e.kids()[0], wrt, exts, cache)});
      break;
    case Kind::Ln:
      out = mul({total_rec(e.kids()[0], wrt, exts, cache), pow(e.kids()[0], num(-1))});
      break;
    case Kind::Sin:
      out = mul({cos(e.kids()[0]), total_rec(e.kids()[0], wrt, exts, cache)});
      break;
    case Kind::Cos:
      out = mul({num(-1), sin(e.kids()[0]), total_rec(e.kids()[0], wrt, exts, cache)});
      break;
    case Kind::Tan:
      out = mul({pow(cos(e.kids()[0]), num(-2)), total_rec(e.kids()[0], wrt, exts, cache)});
      break;
    case Kind::Tanh:
      out = mul({add({num(1), neg(pow(tanh(e.kids()[0]), num(2)))}),
                 total_rec(e.kids()[0], wrt, exts, cache)});
      break;
    case Kind::Apply:
      out = mul({fderiv(e.symbol(), 1, e.kids()[0]), total_rec(e.kids()[0], wrt, exts, cache)});
      break;
    case Kind::FDeriv:
      out = mul({fderiv(e.symbol(), e.fd_order() + 1, e.kids()[0]),
                 total_rec(e.kids()[0], wrt, exts, cache)});
      break;
  }
  cache.emplace(e.node(), out);
  return out;
}

}  // namespace

Expr total_derivative(const Expr& e, DVar wrt, std::span<const FieldExtension> extensions) {
  Cache cache;
  return total_rec(e, wrt, extensions, cache);
}

namespace {

Expr subst_once(const Expr& e, const Binding& b, Cache& cache, bool& changed) {
  if (e.kind() == Kind::Sym) {
    auto it = b.exprs.find(e.symbol());
    if (it != b.exprs.end()) {
      changed = true;
      return it->second;
    }
    return e;
  }
  if (e.kids().empty()) return e;
  auto it = cache.find(e.node());
  if (it != cache.end()) {
    if (!it->second.same(e)) changed = true;
    return it->second;
  }
  std::vector<Expr> ks;
  ks.reserve(e.kids().size());
  bool any = false;
  for (const auto& k : e.kids()) {
    bool ch = false;
    ks.push_back(subst_once(k, b, cache, ch));
    any = any || ch;
  }
  Expr out = e;
  if (any) {
    changed = true;
    switch (e.kind()) {
      case Kind::Sum:
        out = add(std::move(ks));
        break;
      case Kind::Prod:
        out = mul(std::move(ks));
        break;
      case Kind::Pow:
        out = pow(ks[0], ks[1]);
        break;
      case Kind::Exp:
        out = exp(ks[0]);
        break;
      case Kind::Ln:
        out = ln(ks[0]);
        break;
      case Kind::Sin:
        out = sin(ks[0]);
        break;
      case Kind::Cos:
        out = cos(ks[0]);
        break;
      case Kind::Tan:
        out = tan(ks[0]);
        break;
      case Kind::Tanh:
        out = tanh(ks[0]);
        break;
      case Kind::Apply:
        out = apply(e.symbol(), ks[0]);
        break;
      case Kind::FDeriv:
        out = fderiv(e.symbol(), e.fd_order(), ks[0]);
        break;
      default:
        break;
    }
  }
  cache.emplace(e.node(), out);
  return out;
}

void check_acyclic(const Binding& b) {
  // Depth-first search over the dependency graph restricted to bound symbols.
  enum class Mark { White, Grey, Black };
  std::unordered_map<Symbol, Mark, SymbolHash> marks;
  std::function<void(Symbol)> visit = [&](Symbol s) {
    auto& m = marks[s];
    if (m == Mark::Grey) throw CyclicBindingError("cyclic binding through '" + s.name() + "'");
    if (m == Mark::Black) return;
    m = Mark::Grey;
    auto it = b.exprs.find(s);
    if (it != b.exprs.end()) {
      for (const auto& [other, rhs] : b.exprs) {
        (void)rhs;
        if (it->second.contains(other)) visit(other);
      }
    }
    marks[s] = Mark::Black;
  };
  for (const auto& [s, rhs] : b.exprs) {
    (void)rhs;
    visit(s);
  }
}

}  // namespace

Expr substitute(const Expr& e, const Binding& b, bool fixpoint) {
  if (b.exprs.empty()) return e;
  // One simultaneous pass is well-defined for any bindings (swaps included);
  // repeated application to a fixpoint requires an acyclic dependency graph.
  if (fixpoint) check_acyclic(b);
  Expr cur = e;
  int limit = fixpoint ? 64 : 1;
  for (int i = 0; i < limit; ++i) {
    Cache cache;
    bool changed = false;
    Expr next = subst_once(cur, b, cache, changed);
    if (!changed || next.same(cur)) return next;
    cur = next;
  }
  if (fixpoint) throw CyclicBindingError("fixpoint substitution did not stabilize");
  return cur;
}

}  // namespace rdsym
