#pragma once

// Optimal transport balls around a discrete nominal distribution.

#include "rdro/dro.hpp"

#include <string>
#include <vector>

namespace rdro {

// d(z, z') = c(z - z') for a convex displacement cost c
struct TransportCost {
  FunctionExpr displacement;
  bool identity_of_indiscernibles = false;
  bool superlinear = false;
  std::string kind = "custom";  // or "wasserstein"
  double p = 0.0;               // wasserstein order
  Norm norm = Norm::l2;

  int dim() const { return displacement.dim(); }
  // d(., zhat)
  FunctionExpr at(const Vec& zhat) const;
  // y -> d^{*1}(y, zhat)
  FunctionExpr conj_at(const Vec& zhat) const;
  ExtReal eval(const Vec& z, const Vec& zhat) const;
};

// ||z - z'||^p; p = inf gives the unit-ball indicator
TransportCost wasserstein_cost(int dim, double p, Norm norm = Norm::l2);

struct OTAmbiguity {
  DiscreteDistribution nominal;
  TransportCost cost;
  double eps = 0.0;
  UncertaintySet support;

  int dim() const { return support.dim; }
  int num_atoms() const { return nominal.size(); }
  void validate(double tol = 1e-7) const;
};

// I_k: pieces whose domain meets dom d(., zhat_k)
std::vector<std::vector<int>> ot_piece_sets(const OTAmbiguity& O, const Disutility& g, const Tolerances& tol = {});

FiniteConvexProgram build_ot_primal_cvx(const OTAmbiguity& O, const Disutility& g);
FiniteConvexProgram build_ot_dual_cvx_explicit(const OTAmbiguity& O, const Disutility& g);

// min_x sup_P E[max_i g_i(x, z)] over x with x_constraints(x) <= 0
struct OTDecision {
  int dim = 0;
  std::vector<SaddleFunction> pieces;
  std::vector<FunctionExpr> x_constraints;
};
FiniteConvexProgram build_ot_primal_cvx(const OTAmbiguity& O, const OTDecision& D);

struct OTSolve {
  FiniteConvexProgram program;
  Solution solution;
  bool solvable_flag = false;  // identity of indiscernibles
  bool polished = false;
  std::vector<std::string> notes;
};

// explicit program, then one re-solve with tiny lambdas pinned at zero
OTSolve solve_ot_explicit(const OTAmbiguity& O, const Disutility& g, const Tolerances& tol = {},
                          const SolverOptions& opt = {});

// strict when slater_search finds a point of the explicit program with every
// lambda positive; unknown otherwise (absence is never asserted)
SlaterFlag ot_slater_flag(const FiniteConvexProgram& explicit_prog, int K, int I, const Tolerances& tol = {});

struct IndexPartition {
  std::vector<std::vector<int>> plus, zero, inf;  // per k, original piece indices
  bool has_escapes() const;
};

struct OTPoint {
  std::vector<std::vector<int>> pieces;     // I_k
  std::vector<std::vector<double>> lambda;  // aligned with pieces
  std::vector<std::vector<Vec>> v;
};
OTPoint read_ot_point(const FiniteConvexProgram& explicit_prog, const Vec& x, int K, int I);

IndexPartition classify_indices(const OTAmbiguity& O, const OTPoint& pt, const Tolerances& tol = {});
DiscreteDistribution optimal_distribution(const OTAmbiguity& O, const OTPoint& pt, const Tolerances& tol = {});
DiscreteDistribution asymptotic_distribution(const OTAmbiguity& O, const OTPoint& pt, int n,
                                             const Tolerances& tol = {});

// transport cost of moving each atom from its nominal source; distributions from the
// two builders above list atoms grouped by k in order
double ot_plan_cost(const OTAmbiguity& O, const OTPoint& pt, int n = 0, const Tolerances& tol = {});

}  // namespace rdro
