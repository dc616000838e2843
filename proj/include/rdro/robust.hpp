#pragma once

// Robust problems  min_x sup_z f0(x, z)  s.t.  sup_z fi(x, z) <= 0  and their
// finite convex reformulations (primal worst / dual best).

#include "rdro/program.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rdro {

// { z : c_l(z) <= 0 for all l }
struct UncertaintySet {
  int dim = 0;
  std::vector<FunctionExpr> constraints;

  void validate() const;
  bool contains(const Vec& z, double tol) const;
  // program over one block "z" with the set's constraints and a zero objective
  FiniteConvexProgram as_program() const;
};

UncertaintySet box_set(const Vec& lo, const Vec& hi);

struct RobustProblem {
  SaddleFunction objective;
  std::vector<SaddleFunction> constraints;
  // one shared set, or one per index 0..I (objective first)
  std::vector<UncertaintySet> sets;

  int num_constraints() const { return static_cast<int>(constraints.size()); }
  const SaddleFunction& fn(int i) const { return i == 0 ? objective : constraints[i - 1]; }
  const UncertaintySet& set(int i) const { return sets.size() == 1 ? sets[0] : sets[i]; }
  void validate() const;
};

FiniteConvexProgram build_primal_worst_cvx(const RobustProblem& P);
FiniteConvexProgram build_dual_best_cvx(const RobustProblem& P);

// objective of the unconvexified dual best problem at (w_i, z_i, lambda)
ExtReal dual_best_objective(const RobustProblem& P, const std::vector<Vec>& w, const std::vector<Vec>& z,
                            const Vec& lambda);
// feasibility of such a point: coupling sum w_i = 0 and z_i in the sets
bool dual_best_feasible(const RobustProblem& P, const std::vector<Vec>& w, const std::vector<Vec>& z,
                        const Vec& lambda, double tol);
// maps (w, z, lambda) with lambda > 0 to the reformulated variables (upsilon_i = lambda_i z_i)
Vec dual_best_lift(const RobustProblem& P, const FiniteConvexProgram& db, const std::vector<Vec>& w,
                   const std::vector<Vec>& z, const Vec& lambda);

bool recession_check(const UncertaintySet& Z, const Vec& v, const Tolerances& tol = {});

struct SetSlater {
  bool found = false;
  Vec point;
  double margin = 0.0;
};
SetSlater slater_search(const UncertaintySet& Z, const Tolerances& tol = {});

enum class SlaterFlag { strict, plain, none, unknown };
enum class Verdict { strong_duality_certified, weak_only, inconclusive };
const char* slater_flag_name(SlaterFlag f);
const char* verdict_name(Verdict v);

struct DualityReport {
  ExtReal pw_value;
  ExtReal db_value;
  double gap = 0.0;  // pw - db; 0 when both agree on the same infinity
  SlaterFlag slater_primal = SlaterFlag::unknown;
  SlaterFlag slater_dual = SlaterFlag::unknown;
  bool z_bounded = false;
  Verdict verdict = Verdict::inconclusive;
  Status pw_status = Status::stalled;
  Status db_status = Status::stalled;
  std::vector<std::string> notes;
};

DualityReport duality_report(const RobustProblem& P, const Tolerances& tol = {});

}  // namespace rdro
