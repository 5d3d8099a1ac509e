#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdsym/binding.hpp"
#include "rdsym/system.hpp"

namespace rdsym {

/// Deterministic splitmix64 generator; identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * ((next() >> 11) * 0x1.0p-53); }
  /// Uniform magnitude in [lo, hi] with a random sign.
  double signed_uniform(double lo, double hi) {
    double v = uniform(lo, hi);
    return (next() & 1) ? v : -v;
  }

 private:
  std::uint64_t state_;
};

enum class Verdict { ProvedZero, NumericallyZero, Nonzero };

const char* verdict_name(Verdict v);

struct SampleBox {
  double lo, hi;
};

struct SampleConfig {
  int n_points = 200;
  int max_retries = 10;
  double tol = 1e-9;  // scale-free threshold |residual| / (1 + max |term|)
  SampleBox t_box{0.1, 2.0};
  SampleBox x_box{0.1, 2.0};
  SampleBox uv_box{0.2, 3.0};
  SampleBox jet_box{-1.0, 1.0};
  SampleBox field_box{-1.0, 1.0};
  SampleBox param_box{0.3, 1.7};  // magnitude; sign is drawn
  std::uint64_t seed = 20240817;
  bool opaque_realizations = true;  // 3 random cubics plus exp(0.3 w)
};

struct SamplePoint {
  std::vector<std::pair<std::string, double>> assignment;
  double value = 0.0;
  double scale = 0.0;
};

struct EquationReport {
  std::string id;
  Expr symbolic;
  Verdict verdict = Verdict::Nonzero;
  double max_abs = 0.0;
  double max_ratio = 0.0;
  int n_samples = 0;
  SamplePoint worst;
};

struct ResidualReport {
  std::vector<EquationReport> equations;
  Verdict verdict = Verdict::Nonzero;
  std::uint64_t seed = 0;
  std::string note;

  bool zero() const { return verdict != Verdict::Nonzero; }
};

/// Decides whether `residual` vanishes identically: first structurally, then
/// by collecting over the free-jet monomials, finally by randomized sampling
/// with the scale-free tolerance. Unbound symbols are sampled from the boxes;
/// opaque functions without a fixed realization get randomized realizations.
EquationReport decide_zero(const std::string& id, const Expr& residual, const Binding& fixed,
                           std::span<const Symbol> collect_atoms, const ManifoldSpec* m,
                           const SampleConfig& cfg, Rng& rng);

/// Invariance residuals Q2(S1), Q2(S2) reduced on the manifold of the given
/// kind (Definitions 1-2). The operator itself is not rescaled; only the
/// invariant-surface relation is solved for the time derivative.
ResidualReport invariance_residuals(const RDSystem& sys, const SymmetryOperator& Q,
                                    const ManifoldSpec& m, const Binding& fixed = {},
                                    const SampleConfig& cfg = {});

/// The Lie determining equations (112)-(119) evaluated as residuals.
ResidualReport lie_residuals(const RDSystem& sys, const SymmetryOperator& Q,
                             const Binding& fixed = {}, const SampleConfig& cfg = {},
                             std::span<const FieldExtension> fields = {});

/// The first-type determining equations (12)-(17) for operators of
/// linear-coefficient shape; side constraints of m rewrite p2-style terms.
ResidualReport structured_residuals(const RDSystem& sys, const LinearCoefficientForm& form,
                                    const ManifoldSpec& m = ManifoldSpec::first_u(),
                                    const Binding& fixed = {}, const SampleConfig& cfg = {});

/// True iff d(eta2)/du is not identically zero (decided by collect plus
/// sampling): the operator is not reducible to a Lie symmetry.
bool is_purely_conditional(const SymmetryOperator& Q, const Binding& fixed = {},
                           const SampleConfig& cfg = {});

/// Linear combination c1*Q1 + c2*X of a first-type operator with a Lie tail
/// X = (h1 v + h0) dv. Requires c1, c2 nonzero and X to pass the Lie check
/// on the system.
SymmetryOperator combine_with_lie_tail(const RDSystem& sys, const SymmetryOperator& Q1,
                                       const LieTailOperator& X, const Expr& c1, const Expr& c2,
                                       const Binding& fixed = {}, const SampleConfig& cfg = {});

}  // namespace rdsym
