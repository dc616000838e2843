#pragma once

#include "rdro/foundation.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace rdro {

enum class Norm { l1, l2, linf };

Norm dual_norm(Norm n);
double norm_value(const Vec& x, Norm n);
const char* norm_name(Norm n);

enum class NodeKind {
  // atoms
  Affine,
  IndicatorSingleton,
  IndicatorBox,
  IndicatorNormBall,
  NormPower,
  QuadOverLin,
  Exponential,
  NegLog,
  NegEntropy,
  SupportOfBox,
  // combinators
  AffinePrecompose,
  NonnegScale,
  AddAffine,
  SumDisjointBlocks,
  Perspective,
  EpiIndicator,
  LiftedInf,
  MaxOfConcave,
};

const char* node_kind_name(NodeKind k);
bool is_atom_kind(NodeKind k);

struct Node;

class FunctionExpr {
 public:
  FunctionExpr() = default;
  explicit FunctionExpr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  bool valid() const { return static_cast<bool>(n_); }
  const Node& node() const;
  NodeKind kind() const;
  int dim() const;
  bool proper() const;
  bool closed() const;
  bool convex() const;
  const FunctionExpr& kid(std::size_t i = 0) const;

 private:
  std::shared_ptr<const Node> n_;
};

// Unused fields stay empty / zero.
struct Node {
  NodeKind kind = NodeKind::Affine;
  int dim = 0;
  Vec a;       // Affine / AddAffine slope, LiftedInf linear cost
  double b = 0;  // Affine / AddAffine constant
  Vec center;  // singleton point, ball center
  Vec lo, hi;  // box bounds (may be infinite)
  double radius = 0;
  double p = 1;       // norm power exponent (inf allowed)
  double weight = 1;  // norm power weight
  Norm norm = Norm::l2;
  double s = 1;  // exponential sign / rate
  double t = 1;  // nonneg scale
  Mat A;         // precompose matrix, LiftedInf constraint matrix M
  Vec offset;    // precompose offset
  std::vector<FunctionExpr> kids;
  std::vector<std::vector<int>> blocks;
  bool proper = true, closed = true, convex = true;
};

// atoms
FunctionExpr affine(const Vec& a, double b);
FunctionExpr zero_function(int dim);
FunctionExpr indicator_singleton(const Vec& x0);
FunctionExpr indicator_box(const Vec& lo, const Vec& hi);
FunctionExpr indicator_norm_ball(const Vec& center, double radius, Norm norm = Norm::l2);
// weight * ||x||^p; p = inf is the unit-ball indicator (weight ignored)
FunctionExpr norm_power(int dim, double p, double weight = 1.0, Norm norm = Norm::l2);
// ||x_{1..n-1}||^2 / x_n, closed at x_n = 0
FunctionExpr quad_over_lin(int dim);
FunctionExpr exponential(double s);
FunctionExpr neg_log();
// y log y - y on y >= 0
FunctionExpr neg_entropy();
FunctionExpr support_of_box(const Vec& lo, const Vec& hi);

// combinators
FunctionExpr precompose(const FunctionExpr& f, const Mat& A, const Vec& b);
FunctionExpr shift(const FunctionExpr& f, const Vec& b);  // f(x + b)
FunctionExpr scale(double t, const FunctionExpr& f);
FunctionExpr add_affine(const FunctionExpr& f, const Vec& a, double b);
FunctionExpr sum_blocks(const std::vector<std::pair<FunctionExpr, std::vector<int>>>& parts, int dim);
// sum of functions of the same argument, expressed as a precompose of disjoint blocks
FunctionExpr sum_shared(const std::vector<FunctionExpr>& fs);
FunctionExpr perspective(const FunctionExpr& f);
// delta{(w, s) : g(w) + s <= 0}
FunctionExpr epi_indicator(const FunctionExpr& g);
// w -> inf_y { g(y) + c'y : M y = w }
FunctionExpr lifted_inf(const FunctionExpr& g, const Mat& M, const Vec& c);
// g = max_i (-neg_pieces[i]); concave, never conjugated
FunctionExpr max_of_concave(const std::vector<FunctionExpr>& neg_pieces);

ExtReal eval(const FunctionExpr& f, const Vec& x);
bool in_domain(const FunctionExpr& f, const Vec& x);
ExtReal perspective_eval(const FunctionExpr& f, const Vec& x, double t);
ExtReal recession_value(const FunctionExpr& f, const Vec& x);

bool is_affine_expr(const FunctionExpr& f);
bool is_nonnegative(const FunctionExpr& f);
// dom f = whole space, by structure
bool has_full_domain(const FunctionExpr& f);

struct ConjugateResult {
  enum class Exactness { closed_form, epigraph_lifted };
  FunctionExpr expr;
  Exactness exactness = Exactness::closed_form;
};

ConjugateResult conjugate(const FunctionExpr& f);
// (t f)^*
ConjugateResult scale_conjugate(double t, const FunctionExpr& f);
// (t f(./t))^* = t f^*
ConjugateResult perspective_slice_conjugate(double t, const FunctionExpr& f);

struct NormPowerConjugate {
  double q;    // conjugate exponent, inf for p = 1
  double phi;  // (q-1)^(q-1) / q^q, 0 when q = inf
};
NormPowerConjugate norm_power_conjugate(double p);

// f(x, z) = p(x) + x'Qz - neg_q(z)
struct SaddleFunction {
  FunctionExpr p;
  Mat Q;
  FunctionExpr neg_q;

  int dim_x() const { return p.dim(); }
  int dim_z() const { return neg_q.dim(); }
  void validate(bool require_real_valued = true) const;
  ExtReal eval(const Vec& x, const Vec& z) const;
};

SaddleFunction bi_affine(const Vec& a, double a0, const Mat& Q, const Vec& c);

ExtReal partial_conjugate_1(const SaddleFunction& f, const Vec& w, const Vec& z);
ExtReal partial_conjugate_2(const SaddleFunction& f, const Vec& x, const Vec& y);
// f^{*1} as a function of the stacked (w, z)
FunctionExpr partial_conjugate_1_expr(const SaddleFunction& f);
// (-f)^{*2} as a function of the stacked (x, y)
FunctionExpr partial_conjugate_2_expr(const SaddleFunction& f);
// w -> f^{*1}(w, z) for fixed z
FunctionExpr partial_conjugate_1_at(const SaddleFunction& f, const Vec& z);

// membership slack used by indicator evaluation
constexpr double kEvalTol = 1e-9;

}  // namespace rdro
