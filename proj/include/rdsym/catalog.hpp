#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rdsym/residuals.hpp"

namespace rdsym {

/// One auxiliary function of a Table-1 row: defined by a linear or nonlinear
/// ODE (realized numerically, rewritten symbolically through its defining
/// relation) or by a closed form with branches.
struct AuxFunctionDef {
  std::string name;
  std::string var;                       // "t" or "x"
  std::string kind;                      // "ode1", "ode2", "closed"
  std::string rhs;                       // ode1: y' = rhs; ode2: y'' = rhs (in y, yp)
  struct Branch {
    std::string guard;                   // nonzero guard; empty = else-branch
    std::string expr;
  };
  std::vector<Branch> branches;          // closed kind
};

/// One Table-1 row, held as grammar text and parsed at instantiation.
struct CatalogEntry {
  int id = 0;
  std::string c1, c2;
  std::string omega;                     // empty when absent
  std::string xi0, xi1, eta1, eta2;
  std::map<std::string, std::string> defs;
  std::vector<std::string> fields;       // constraint-defined unknowns (p2)
  struct Side {
    std::string solve;                   // leading term, e.g. "p2_xx"
    std::string eq;                      // right-hand side
  };
  std::vector<Side> side_constraints;
  std::vector<AuxFunctionDef> aux;
  std::vector<std::string> params;
  std::map<std::string, std::string> fixed;  // pinned parameters (d=3, d=5)
  struct Constraint {
    std::string nonzero;
  };
  std::vector<Constraint> constraints;
  std::vector<std::string> opaque;       // arbitrary functions f, g
};

/// The registry, loaded once from the versioned JSON data file.
const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(int id);  // throws ConstraintViolation for unknown id

/// Parameter values (exact rationals preferred) plus optional concrete
/// realizations for the arbitrary functions, written in the variable w.
struct ParameterAssignment {
  std::map<std::string, Expr> values;
  std::map<std::string, std::string> fg;  // e.g. {"f": "w"}, {"g": "w^2"}
};

struct Instantiated {
  RDSystem sys;
  SymmetryOperator op;
  ManifoldSpec manifold;
  Binding fixed;                    // numeric parameters and aux realizations
  std::vector<Symbol> opaque_fns;   // functions left for randomized realization
  std::string note;
};

/// Builds the concrete system/operator/manifold for one row. Exponential
/// particular solutions c*exp(ax+bt) are constructed for constraint-defined
/// p2 by coefficient matching when the constraint admits one; otherwise the
/// constraint is carried symbolically as a rewrite rule.
Instantiated instantiate(int id, const ParameterAssignment& pa);

ResidualReport verify_case(int id, const ParameterAssignment& pa, const SampleConfig& cfg = {});

ParameterAssignment draw_parameters(const CatalogEntry& entry, Rng& rng);

struct SweepRow {
  int id = 0;
  int trial = 0;
  std::map<std::string, double> params;
  Verdict verdict = Verdict::Nonzero;
  double max_ratio = 0.0;
  bool purely_conditional = false;
  std::string note;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int passed_ids = 0;
  int total_ids = 0;
  std::uint64_t seed = 0;
  bool all_passed() const { return passed_ids == total_ids; }
};

SweepResult sweep(const std::vector<int>& ids, int trials, const SampleConfig& cfg = {});

}  // namespace rdsym
