#pragma once

#include <string>
#include <vector>

#include "rdsym/calculus.hpp"
#include "rdsym/expr.hpp"

namespace rdsym {

/// Reaction-diffusion system in the canonical arrangement
///   u_xx = u_t + C1(u, v),  v_xx = d*v_t + C2(u, v).
struct RDSystem {
  Expr d;
  Expr C1, C2;

  RDSystem() = default;
  RDSystem(Expr d_, Expr c1, Expr c2);

  /// True when d is a known constant equal to 1 (first-type classification
  /// operations refuse such systems).
  bool d_is_one() const;
  void require_d_not_one(const std::string& who) const;
};

/// Infinitesimal operator Q = xi0 dt + xi1 dx + eta1 du + eta2 dv with
/// point coefficients in (t, x, u, v).
struct SymmetryOperator {
  Expr xi0, xi1, eta1, eta2;

  SymmetryOperator() = default;
  SymmetryOperator(Expr xi0_, Expr xi1_, Expr eta1_, Expr eta2_);

  SymmetryOperator scaled(const Expr& c) const;
};

SymmetryOperator operator+(const SymmetryOperator& a, const SymmetryOperator& b);

/// Operator shape with eta1 = r1*u + p1 and eta2 = q*u + r2*v + p2, the
/// integrated form of the first-type determining system.
struct LinearCoefficientForm {
  Expr xi0;           // function of t
  Expr xi1;           // function of (t, x)
  Expr r1, p1;        // functions of (t, x)
  Expr q, r2, p2;     // functions of (t, x)

  SymmetryOperator to_operator() const;
  static LinearCoefficientForm from_operator(const SymmetryOperator& Q);
  bool purely_conditional_flag() const;  // q not identically zero
};

/// Lie tail X = (h1(t,x) v + h0(t,x)) dv.
struct LieTailOperator {
  Expr h1, h0;
  SymmetryOperator to_operator() const;
  static LieTailOperator from_operator(const SymmetryOperator& X);  // throws NotLieTail
};

/// Second-prolongation coefficients.
struct ProlongationCoefficients {
  Expr rho_t1, rho_t2;
  Expr rho_x1, rho_x2;
  Expr sigma_xx1, sigma_xx2;
};

ProlongationCoefficients prolong2(const SymmetryOperator& Q);

enum class ManifoldKind { M, M1u, M1v, M2 };

/// Rewrite rule attached to a manifold: the leading term (a field-jet symbol
/// such as p2_xx, or a formal derivative of an auxiliary function) is solved
/// for and replaced by rhs during elimination.
struct SideConstraint {
  Expr leading;
  Expr rhs;
};

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::M1u;
  std::vector<FieldExtension> fields;       // auxiliary (t,x)-field families
  std::vector<SideConstraint> constraints;  // solved for their leading terms

  static ManifoldSpec lie() { return {ManifoldKind::M, {}, {}}; }
  static ManifoldSpec first_u() { return {ManifoldKind::M1u, {}, {}}; }
  static ManifoldSpec first_v() { return {ManifoldKind::M1v, {}, {}}; }
  static ManifoldSpec second() { return {ManifoldKind::M2, {}, {}}; }
};

/// Free jet coordinates remaining after elimination on the given manifold.
std::vector<Symbol> free_jets(ManifoldKind kind);

/// Eliminates jet coordinates on the manifold: the invariant-surface
/// relation is solved for u_t (and/or v_t), its total derivatives remove
/// u_xt, u_tt, the system equations remove u_xx, v_xx, and side constraints
/// rewrite their leading terms, all to a fixpoint.
Expr manifold_reduce(const Expr& e, const RDSystem& sys, const SymmetryOperator& Q,
                     const ManifoldSpec& m);

/// Partial derivative of a coefficient function of (t, x) that may contain
/// auxiliary field symbols: fields promote, u and v do not.
Expr partial_tx(const Expr& e, DVar wrt, std::span<const FieldExtension> fields);

/// Applies side-constraint rewrites (field leading terms and auxiliary
/// function derivative rules) to a fixpoint.
Expr apply_side_constraints(const Expr& e, const ManifoldSpec& m);

}  // namespace rdsym
