#include "rdro/function.hpp"

#include <cmath>
#include <limits>

namespace rdro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Exactness = ConjugateResult::Exactness;

struct Conj {
  FunctionExpr f;
  bool lifted = false;
};

Mat eye(int n) { return Mat::Identity(n, n); }

double phi(double q) { return std::pow(q - 1, q - 1) / std::pow(q, q); }

Conj conj(const FunctionExpr& f);

Conj conj_norm_power(const Node& n) {
  const int d = n.dim;
  const Norm dn = dual_norm(n.norm);
  if (std::isinf(n.p)) return {norm_power(d, 1.0, 1.0, dn)};
  if (n.weight == 0) return {indicator_singleton(Vec::Zero(d))};
  if (n.p == 1) return {indicator_norm_ball(Vec::Zero(d), n.weight, dn)};
  const double q = n.p / (n.p - 1);
  return {norm_power(d, q, std::pow(n.weight, 1 - q) * phi(q), dn)};
}

Conj conj_precompose(const Node& n) {
  Conj inner = conj(n.kids[0]);
  const Mat& A = n.A;
  if (A.rows() == A.cols()) {
    Eigen::FullPivLU<Mat> lu(A);
    if (lu.isInvertible()) {
      Mat Ainv = lu.inverse();
      Mat AinvT = Ainv.transpose();
      Vec c = -(Ainv * n.offset);
      return {add_affine(precompose(inner.f, AinvT, Vec::Zero(A.rows())), c, 0.0), inner.lifted};
    }
  }
  // g(x) = f(Ax + b):  g*(w) = inf { f*(y) - b'y : A'y = w }
  return {lifted_inf(inner.f, A.transpose(), -n.offset), true};
}

Conj conj(const FunctionExpr& f) {
  const Node& n = f.node();
  const int d = n.dim;
  switch (n.kind) {
    case NodeKind::Affine: return {add_affine(indicator_singleton(n.a), Vec::Zero(d), -n.b)};
    case NodeKind::IndicatorSingleton: return {affine(n.center, 0.0)};
    case NodeKind::IndicatorBox: return {support_of_box(n.lo, n.hi)};
    case NodeKind::SupportOfBox: return {indicator_box(n.lo, n.hi)};
    case NodeKind::IndicatorNormBall:
      if (n.radius == 0) return {affine(n.center, 0.0)};
      return {add_affine(norm_power(d, 1.0, n.radius, dual_norm(n.norm)), n.center, 0.0)};
    case NodeKind::NormPower: return conj_norm_power(n);
    case NodeKind::QuadOverLin: return {epi_indicator(norm_power(d - 1, 2.0, 0.25, Norm::l2))};
    case NodeKind::Exponential:
      if (n.s == 0) return {add_affine(indicator_singleton(Vec::Zero(1)), Vec::Zero(1), -1.0)};
      return {precompose(neg_entropy(), Mat::Constant(1, 1, 1.0 / n.s), Vec::Zero(1))};
    case NodeKind::NegEntropy: return {exponential(1.0)};
    case NodeKind::NegLog:
      return {add_affine(precompose(neg_log(), Mat::Constant(1, 1, -1.0), Vec::Zero(1)), Vec::Zero(1), -1.0)};
    case NodeKind::AffinePrecompose: return conj_precompose(n);
    case NodeKind::NonnegScale: {
      Conj inner = conj(n.kids[0]);
      return {scale(n.t, precompose(inner.f, eye(d) / n.t, Vec::Zero(d))), inner.lifted};
    }
    case NodeKind::AddAffine: {
      Conj inner = conj(n.kids[0]);
      FunctionExpr g = n.a.isZero(0.0) ? inner.f : precompose(inner.f, eye(d), -n.a);
      return {add_affine(g, Vec::Zero(d), -n.b), inner.lifted};
    }
    case NodeKind::SumDisjointBlocks: {
      std::vector<std::pair<FunctionExpr, std::vector<int>>> parts;
      std::vector<bool> covered(d, false);
      bool lifted = false;
      for (std::size_t k = 0; k < n.kids.size(); ++k) {
        Conj c = conj(n.kids[k]);
        lifted = lifted || c.lifted;
        parts.emplace_back(c.f, n.blocks[k]);
        for (int i : n.blocks[k]) covered[i] = true;
      }
      // uncovered coordinates carry the zero function, whose conjugate pins them to 0
      std::vector<int> rest;
      for (int i = 0; i < d; ++i)
        if (!covered[i]) rest.push_back(i);
      if (!rest.empty())
        parts.emplace_back(indicator_singleton(Vec::Zero(static_cast<int>(rest.size()))), rest);
      return {sum_blocks(parts, d), lifted};
    }
    case NodeKind::Perspective: {
      Conj inner = conj(n.kids[0]);
      return {epi_indicator(inner.f), inner.lifted};
    }
    case NodeKind::EpiIndicator: {
      Conj inner = conj(n.kids[0]);
      return {perspective(inner.f), inner.lifted};
    }
    case NodeKind::LiftedInf: {
      Conj inner = conj(n.kids[0]);
      return {precompose(inner.f, n.A.transpose(), -n.a), inner.lifted};
    }
    case NodeKind::MaxOfConcave:
      throw Error(ErrorKind::UnsupportedComposition, "max of concave pieces has no convex conjugate");
  }
  throw Error(ErrorKind::UnsupportedComposition, "no conjugate rule");
}

}  // namespace

ConjugateResult conjugate(const FunctionExpr& f) {
  if (!f.convex() || !f.proper() || !f.closed())
    throw Error(ErrorKind::UnsupportedComposition, "conjugate needs a proper closed convex expression");
  Conj c = conj(f);
  return {c.f, c.lifted ? Exactness::epigraph_lifted : Exactness::closed_form};
}

ConjugateResult scale_conjugate(double t, const FunctionExpr& f) {
  if (!(t > 0)) throw Error(ErrorKind::NonpositiveScale, "scale_conjugate needs t > 0");
  return conjugate(scale(t, f));
}

ConjugateResult perspective_slice_conjugate(double t, const FunctionExpr& f) {
  if (!(t > 0)) throw Error(ErrorKind::NonpositiveScale, "perspective_slice_conjugate needs t > 0");
  ConjugateResult c = conjugate(f);
  c.expr = scale(t, c.expr);
  return c;
}

NormPowerConjugate norm_power_conjugate(double p) {
  if (!(p >= 1)) throw Error(ErrorKind::InvalidArgument, "norm power exponent must be >= 1");
  if (p == 1) return {kInf, 0.0};
  if (std::isinf(p)) return {1.0, 1.0};
  double q = p / (p - 1);
  return {q, phi(q)};
}

// ---------------------------------------------------------------- partial conjugates

FunctionExpr partial_conjugate_1_expr(const SaddleFunction& f) {
  const int dx = f.dim_x(), dz = f.dim_z();
  FunctionExpr ps = conjugate(f.p).expr;
  if (dz == 0) return ps;
  std::vector<int> bx(dx), bz(dz);
  for (int i = 0; i < dx; ++i) bx[i] = i;
  for (int i = 0; i < dz; ++i) bz[i] = dx + i;
  FunctionExpr h = sum_blocks({{ps, bx}, {f.neg_q, bz}}, dx + dz);
  Mat T = Mat::Identity(dx + dz, dx + dz);
  T.block(0, dx, dx, dz) = -f.Q;
  return precompose(h, T, Vec::Zero(dx + dz));
}

FunctionExpr partial_conjugate_2_expr(const SaddleFunction& f) {
  const int dx = f.dim_x(), dz = f.dim_z();
  if (dz == 0) return f.p;
  FunctionExpr nqs = conjugate(f.neg_q).expr;
  std::vector<int> bx(dx), bz(dz);
  for (int i = 0; i < dx; ++i) bx[i] = i;
  for (int i = 0; i < dz; ++i) bz[i] = dx + i;
  FunctionExpr h = sum_blocks({{f.p, bx}, {nqs, bz}}, dx + dz);
  Mat T = Mat::Identity(dx + dz, dx + dz);
  T.block(dx, 0, dz, dx) = f.Q.transpose();
  return precompose(h, T, Vec::Zero(dx + dz));
}

FunctionExpr partial_conjugate_1_at(const SaddleFunction& f, const Vec& z) {
  check_dim(z.size(), f.dim_z(), "partial conjugate z");
  FunctionExpr ps = conjugate(f.p).expr;
  ExtReal nq = eval(f.neg_q, z);
  if (!nq.is_finite()) throw Error(ErrorKind::InvalidArgument, "z outside dom(-q)");
  const int dx = f.dim_x();
  FunctionExpr g = f.dim_z() == 0 ? ps : precompose(ps, Mat::Identity(dx, dx), -(f.Q * z));
  return add_affine(g, Vec::Zero(dx), nq.value());
}

ExtReal partial_conjugate_1(const SaddleFunction& f, const Vec& w, const Vec& z) {
  check_dim(w.size(), f.dim_x(), "partial conjugate w");
  check_dim(z.size(), f.dim_z(), "partial conjugate z");
  FunctionExpr ps = conjugate(f.p).expr;
  return ext_add(eval(ps, w - f.Q * z), eval(f.neg_q, z));
}

ExtReal partial_conjugate_2(const SaddleFunction& f, const Vec& x, const Vec& y) {
  check_dim(x.size(), f.dim_x(), "partial conjugate x");
  check_dim(y.size(), f.dim_z(), "partial conjugate y");
  if (f.dim_z() == 0) return eval(f.p, x);
  FunctionExpr nqs = conjugate(f.neg_q).expr;
  return ext_add(eval(f.p, x), eval(nqs, y + f.Q.transpose() * x));
}

}  // namespace rdro
