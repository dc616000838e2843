#pragma once

#include "rdro/function.hpp"

#include <map>
#include <string>
#include <vector>

namespace rdro {

enum class Domain { free, nonneg, soc };  // soc: ||head|| <= last entry

struct VarBlock {
  std::string name;
  std::string symbol;  // which symbol the block houses (w, lambda, y, nu, ...)
  int offset = 0;
  int size = 0;
  Domain domain = Domain::free;
};

// f(A v + b) over the stacked program variables v
struct Term {
  FunctionExpr f;
  Mat A;
  Vec b;
};

// sum of terms + lin'v + c0 <= 0
struct Constraint {
  std::vector<Term> terms;
  Vec lin;
  double c0 = 0.0;
  std::string label;
};

enum class Sense { minimize, maximize };

struct FiniteConvexProgram {
  std::string provenance;
  Sense sense = Sense::minimize;
  std::vector<VarBlock> blocks;
  int num_vars = 0;
  // minimize:  obj_lin'v + obj_const + sum(obj_terms)
  // maximize:  obj_lin'v + obj_const - sum(obj_terms)
  Vec obj_lin;
  double obj_const = 0.0;
  std::vector<Term> obj_terms;
  std::vector<Constraint> constraints;
  Mat eq_A;
  Vec eq_b;
  std::vector<std::string> eq_labels;

  int add_block(const std::string& name, const std::string& symbol, int size, Domain domain = Domain::free);
  const VarBlock& block(const std::string& name) const;
  bool has_block(const std::string& name) const;
  // finalizes matrix sizes after all blocks are known
  void seal();
  // rows selecting the given blocks, stacked in order
  Mat select(const std::vector<std::string>& names) const;
  Term term(const FunctionExpr& f, const std::vector<std::string>& names) const;
  Term term(const FunctionExpr& f, const Mat& A, const Vec& b) const;
  void add_equality(const Vec& row, double rhs, const std::string& label = "");
  void add_equalities(const Mat& rows, const Vec& rhs, const std::string& label = "");
  void add_constraint(Constraint c);
  Vec zero_lin() const { return Vec::Zero(num_vars); }

  ExtReal objective_value(const Vec& v) const;
  // largest violation of constraints, equalities and block domains (+inf outside a domain)
  double max_violation(const Vec& v) const;
  void validate() const;
  int num_equalities() const { return static_cast<int>(eq_A.rows()); }
};

enum class Status { optimal, eps_optimal, unbounded, infeasible, stalled };
const char* status_name(Status s);

struct Solution {
  Status status = Status::stalled;
  ExtReal objective;
  Vec x;
  std::vector<VarBlock> blocks;
  double kkt_residual = 0.0;  // barrier duality-gap bound
  int iterations = 0;
  double max_violation = 0.0;
  std::string note;

  Vec value(const std::string& block) const;
  bool solved() const { return status == Status::optimal || status == Status::eps_optimal; }
};

struct SolverOptions {
  double gap_tol = 1e-10;
  double ball_radius = 1e6;
  int max_newton = 3000;
};

Solution solve(const FiniteConvexProgram& P, const Tolerances& tol = {}, const SolverOptions& opt = {});

struct FeasibilityResult {
  enum class Kind { feasible, infeasible, inconclusive } kind = Kind::inconclusive;
  Vec point;
  double slack = 0.0;
};
// maximizes a common slack of the non-indicator constraints (capped at 1)
FeasibilityResult feasibility(const FiniteConvexProgram& P, const Tolerances& tol = {});

struct SlaterResult {
  bool found = false;
  Vec point;
  double margin = 0.0;            // all non-indicator constraints strict
  double margin_nonlinear = 0.0;  // only nonlinear constraints strict
  bool strict(const Tolerances& tol) const { return found && margin > tol.feas_tol; }
  bool plain(const Tolerances& tol) const { return found && margin_nonlinear > tol.feas_tol; }
};
SlaterResult slater_search(const FiniteConvexProgram& P, const Tolerances& tol = {});

struct ProbeResult {
  enum class Kind { bounded, unbounded, inconclusive } kind = Kind::inconclusive;
  Vec base;
  Vec ray;
};
ProbeResult unboundedness_probe(const FiniteConvexProgram& P, double cap = 1e6, const Tolerances& tol = {});
// v0 + s d feasible for s on a geometric grid up to cap
bool ray_is_feasible(const FiniteConvexProgram& P, const Vec& v0, const Vec& d, double cap,
                     const Tolerances& tol = {});

bool is_indicator_expr(const FunctionExpr& f);

}  // namespace rdro
