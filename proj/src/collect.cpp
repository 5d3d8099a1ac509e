#include "rdsym/collect.hpp"

#include <algorithm>
#include <unordered_map>

#include "rdsym/errors.hpp"

namespace rdsym {

namespace {

std::size_t count_terms(const Expr& e) { return e.kind() == Kind::Sum ? e.kids().size() : 1; }

Expr expand_rec(const Expr& e, std::size_t limit);

// Expands a product of already-expanded factors by distribution.
Expr distribute(const std::vector<Expr>& factors, std::size_t limit) {
  std::vector<Expr> acc{num(1)};
  for (const auto& f : factors) {
    std::vector<Expr> fterms = terms_of(f);
    if (acc.size() * fterms.size() > limit)
      throw NotPolynomialError("expansion exceeds the term limit");
    std::vector<Expr> next;
    next.reserve(acc.size() * fterms.size());
    for (const auto& a : acc)
      for (const auto& t : fterms) next.push_back(mul({a, t}));
    acc = std::move(next);
  }
  return add(std::move(acc));
}

Expr expand_rec(const Expr& e, std::size_t limit) {
  switch (e.kind()) {
    case Kind::Sum: {
      std::vector<Expr> ts;
      for (const auto& k : e.kids()) ts.push_back(expand_rec(k, limit));
      return add(std::move(ts));
    }
    case Kind::Prod: {
      std::vector<Expr> fs;
      for (const auto& k : e.kids()) fs.push_back(expand_rec(k, limit));
      return distribute(fs, limit);
    }
    case Kind::Pow: {
      const Expr& x = e.kids()[1];
      Expr b = expand_rec(e.kids()[0], limit);
      if (x.kind() == Kind::Constant && x.num().is_integer()) {
        std::int64_t n = x.num().rat().num();
        if (n >= 2 && n <= 16 && b.kind() == Kind::Sum && count_terms(b) <= 64) {
          std::vector<Expr> fs(static_cast<std::size_t>(n), b);
          return distribute(fs, limit);
        }
      }
      return pow(b, x);
    }
    default:
      return e;
  }
}

bool contains_any(const Expr& e, std::span<const Expr> atoms) {
  for (const auto& a : atoms)
    if (e.contains_subtree(a)) return true;
  return false;
}

// Monomial key: sorted (atom, integer exponent) list.
using MonoKey = std::vector<std::pair<Expr, std::int64_t>>;

struct MonoKeyHash {
  std::size_t operator()(const MonoKey& k) const {
    std::size_t h = 0x2545f491;
    for (const auto& [e, n] : k) h ^= e.hash() + 0x9e3779b9 + (h << 6) + (h >> 2) + static_cast<std::size_t>(n);
    return h;
  }
};
struct MonoKeyEq {
  bool operator()(const MonoKey& a, const MonoKey& b) const {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].second != b[i].second || !a[i].first.same(b[i].first)) return false;
    return true;
  }
};

// Splits one expanded term into (monomial key over atoms, coefficient).
std::pair<MonoKey, Expr> split_term(const Expr& term, std::span<const Expr> atoms) {
  MonoKey key;
  std::vector<Expr> coeff_factors;
  for (const auto& f : factors_of(term)) {
    auto [base, e] = base_exponent(f);
    bool base_is_atom = false;
    for (const auto& a : atoms)
      if (base.same(a)) {
        base_is_atom = true;
        break;
      }
    if (base_is_atom) {
      if (e.kind() != Kind::Constant || !e.num().is_integer() || e.num().is_negative())
        throw NotPolynomialError("atom '" + base.str() + "' carries a non-polynomial exponent");
      key.emplace_back(base, e.num().rat().num());
      continue;
    }
    if (contains_any(f, atoms))
      throw NotPolynomialError("non-polynomial dependence on atom inside '" + f.str() + "'");
    coeff_factors.push_back(f);
  }
  std::sort(key.begin(), key.end(),
            [](const auto& a, const auto& b) { return Expr::compare(a.first, b.first) < 0; });
  return {std::move(key), mul(std::move(coeff_factors))};
}

Expr key_to_expr(const MonoKey& key) {
  std::vector<Expr> fs;
  for (const auto& [a, n] : key) fs.push_back(pow(a, num(n)));
  return mul(std::move(fs));
}

Collected collect_impl(const Expr& e, std::span<const Expr> atoms) {
  Expr x = expand(e);
  std::vector<std::pair<MonoKey, std::vector<Expr>>> order;
  std::unordered_map<MonoKey, std::size_t, MonoKeyHash, MonoKeyEq> index;
  std::vector<Expr> remainder_terms;
  for (const auto& t : terms_of(x)) {
    if (!contains_any(t, atoms)) {
      remainder_terms.push_back(t);
      continue;
    }
    auto [key, coeff] = split_term(t, atoms);
    if (key.empty()) {
      remainder_terms.push_back(t);
      continue;
    }
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, order.size());
      order.emplace_back(key, std::vector<Expr>{coeff});
    } else {
      order[it->second].second.push_back(coeff);
    }
  }
  Collected out;
  out.remainder = add(std::move(remainder_terms));
  for (auto& [key, coeffs] : order) out.groups.emplace_back(key_to_expr(key), add(std::move(coeffs)));
  std::sort(out.groups.begin(), out.groups.end(),
            [](const auto& a, const auto& b) { return Expr::compare(a.first, b.first) < 0; });
  return out;
}

}  // namespace

Expr expand(const Expr& e, std::size_t term_limit) { return expand_rec(e, term_limit); }

Collected collect(const Expr& e, std::span<const Expr> basis) {
  // Atoms are the bases appearing in the basis monomials.
  std::vector<Expr> atoms;
  for (const auto& m : basis)
    for (const auto& f : factors_of(m)) {
      Expr base = base_exponent(f).first;
      bool seen = false;
      for (const auto& a : atoms)
        if (a.same(base)) seen = true;
      if (!seen) atoms.push_back(base);
    }
  Collected c = collect_impl(e, atoms);
  for (const auto& [mono, coeff] : c.groups) {
    (void)coeff;
    bool in_basis = false;
    for (const auto& b : basis)
      if (mono.same(b)) in_basis = true;
    if (!in_basis)
      throw NotPolynomialError("monomial '" + mono.str() + "' is outside the requested basis");
  }
  return c;
}

Collected collect_auto(const Expr& e, std::span<const Expr> atoms) { return collect_impl(e, atoms); }

}  // namespace rdsym
