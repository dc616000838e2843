#pragma once

// Moment ambiguity sets, worst-case expectation programs and the
// component/cone generalization.

#include "rdro/cone.hpp"
#include "rdro/robust.hpp"

#include <string>
#include <vector>

namespace rdro {

struct Moment {
  FunctionExpr h;  // convex
  double mu = 0.0;
};

// { P on S : E[h_j] <= mu_j }
struct AmbiguitySet {
  UncertaintySet support;
  std::vector<Moment> moments;

  int dim() const { return support.dim; }
  int num_moments() const { return static_cast<int>(moments.size()); }
  void validate() const;
};

// g = max_i g_i, stored as the convex functions -g_i
struct Disutility {
  std::vector<FunctionExpr> neg_pieces;

  int size() const { return static_cast<int>(neg_pieces.size()); }
  int dim() const { return neg_pieces.empty() ? 0 : neg_pieces[0].dim(); }
  ExtReal piece(int i, const Vec& z) const;
  ExtReal eval(const Vec& z) const;
  // first maximizing piece, -1 when g(z) = -inf
  int argmax(const Vec& z) const;
  void validate() const;
};

struct DiscreteDistribution {
  std::vector<Vec> atoms;
  std::vector<double> probs;

  int size() const { return static_cast<int>(atoms.size()); }
  // sum of probabilities and support membership
  void validate(const UncertaintySet* support = nullptr, double tol = 1e-7) const;
  // E[f] with +inf dominating (for convex f)
  ExtReal expect_convex(const FunctionExpr& f) const;
  // E[g] with -inf dominating
  ExtReal expect(const Disutility& g) const;
};

// pieces whose effective support is nonempty
std::vector<int> nonempty_pieces(const AmbiguitySet& A, const Disutility& g, const Tolerances& tol = {});
// drops pieces with an empty effective support; throws AssumptionSViolated when none is left
Disutility enforce_assumption_s(const AmbiguitySet& A, const Disutility& g, std::vector<std::string>* warnings,
                                const Tolerances& tol = {});

FiniteConvexProgram build_apw_cvx(const AmbiguitySet& A, const Disutility& g);
FiniteConvexProgram build_adb_cvx(const AmbiguitySet& A, const Disutility& g);

// atoms v_i / lambda_i with probability lambda_i
DiscreteDistribution extract_distribution(const AmbiguitySet& A, const Disutility& g,
                                          const FiniteConvexProgram& adb, const Vec& x,
                                          const Tolerances& tol = {});
// blends an eps-optimal point with a point that has lambda > 0
DiscreteDistribution epsilon_optimal_distribution(const AmbiguitySet& A, const Disutility& g,
                                                  const FiniteConvexProgram& adb, const Vec& x,
                                                  const Vec& slater_x, double eps, double* theta_out = nullptr,
                                                  const Tolerances& tol = {});

struct SlaterCandidate {
  std::vector<double> weights;  // per piece
  std::vector<Vec> means;       // per piece
  // E[h_j] and E[c_l] under the candidate, when known
  std::vector<double> moment_expectations;
  std::vector<double> support_expectations;
  bool absolutely_continuous = false;  // declared, never checked
};

struct SlaterDistributionReport {
  bool ok = false;
  bool positive_weights = false;
  bool moments_ok = false;
  bool support_ok = false;
  bool absolutely_continuous_declared = false;
  std::vector<std::string> notes;
  Vec adb_point;  // over the AD-B' variables when ok
};

SlaterDistributionReport slater_distribution_check(const AmbiguitySet& A, const Disutility& g,
                                                   const SlaterCandidate& c, const Tolerances& tol = {});

// merges atoms that share a maximizing piece into their weighted mean
DiscreteDistribution jensen_merge(const Disutility& g, const DiscreteDistribution& d);

// ---------------------------------------------------------------- generalized

struct SupportComponent {
  std::vector<CConvexFunction> constraints;  // c_lk(z) in -C_lk
  double prob = 1.0;
  std::vector<FunctionExpr> neg_pieces;  // -g_ik
};

struct ConeMoment {
  ProperCone cone;
  Vec mu;
  std::vector<CConvexFunction> h;  // one per component
};

struct GeneralizedAmbiguitySet {
  int dim = 0;
  std::vector<SupportComponent> components;
  std::vector<ConeMoment> moments;

  int num_components() const { return static_cast<int>(components.size()); }
  void validate() const;
};

// one component, orthant cones of dimension one
GeneralizedAmbiguitySet generalize(const AmbiguitySet& A, const Disutility& g);

FiniteConvexProgram build_apw_cvx_g(const GeneralizedAmbiguitySet& A);
FiniteConvexProgram build_adb_cvx_g(const GeneralizedAmbiguitySet& A);

}  // namespace rdro
