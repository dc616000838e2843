#include "rdro/cone.hpp"

#include <cmath>

namespace rdro {

ProperCone ProperCone::orthant(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "orthant dimension must be positive");
  return {Kind::orthant, n};
}

ProperCone ProperCone::soc(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "second-order cone needs dimension >= 2");
  return {Kind::soc, n};
}

const char* cone_kind_name(ProperCone::Kind k) {
  return k == ProperCone::Kind::orthant ? "orthant" : "soc";
}

ProperCone dual_cone(const ProperCone& C) { return C; }

bool in_cone(const ProperCone& C, const Vec& y, double tol) {
  check_dim(y.size(), C.dim, "cone membership");
  if (C.kind == ProperCone::Kind::orthant) return y.minCoeff() >= -tol;
  return y.head(C.dim - 1).norm() <= y[C.dim - 1] + tol;
}

Mat dual_basis(const ProperCone& C) {
  const int n = C.dim;
  if (C.kind == ProperCone::Kind::orthant) return Mat::Identity(n, n);
  Mat L = Mat::Zero(n, n);
  L(0, n - 1) = 1;
  for (int i = 0; i + 1 < n; ++i) {
    L(i + 1, n - 1) = 1;
    L(i + 1, i) = 1;
  }
  return L;
}

CConvexFunction CConvexFunction::orthant(const std::vector<FunctionExpr>& comps) {
  if (comps.empty()) throw Error(ErrorKind::InvalidArgument, "C-convex function needs components");
  CConvexFunction f;
  f.cone = ProperCone::orthant(static_cast<int>(comps.size()));
  f.dim_x = comps[0].dim();
  f.components = comps;
  f.validate();
  return f;
}

CConvexFunction CConvexFunction::soc(const Mat& A, const Vec& a, const FunctionExpr& tail) {
  CConvexFunction f;
  f.cone = ProperCone::soc(static_cast<int>(A.rows()) + 1);
  f.dim_x = tail.dim();
  f.A = A;
  f.a = a;
  f.tail = tail;
  f.validate();
  return f;
}

void CConvexFunction::validate() const {
  if (cone.kind == ProperCone::Kind::orthant) {
    check_dim(static_cast<long>(components.size()), cone.dim, "orthant components");
    for (const auto& c : components) {
      check_dim(c.dim(), dim_x, "component arity");
      if (!c.convex() || !c.closed() || !c.proper())
        throw Error(ErrorKind::InvalidArgument, "components must be proper, closed and convex");
    }
    return;
  }
  check_dim(A.rows(), cone.dim - 1, "soc head rows");
  check_dim(A.cols(), dim_x, "soc head columns");
  check_dim(a.size(), cone.dim - 1, "soc head offset");
  if (!tail.valid() || !tail.convex()) throw Error(ErrorKind::InvalidArgument, "soc tail must be convex");
  check_dim(tail.dim(), dim_x, "soc tail arity");
}

std::vector<ExtReal> CConvexFunction::eval(const Vec& x) const {
  return c_perspective_eval(*this, x, 1.0);
}

FunctionExpr scalarize(const CConvexFunction& f, const Vec& lambda, double tol) {
  check_dim(lambda.size(), f.cone.dim, "scalarization weights");
  if (!in_cone(dual_cone(f.cone), lambda, tol) || lambda.lpNorm<Eigen::Infinity>() <= tol)
    throw Error(ErrorKind::NotInDualCone, "weights must lie in the dual cone and be nonzero");
  if (f.cone.kind == ProperCone::Kind::orthant) {
    std::vector<FunctionExpr> parts;
    for (int r = 0; r < f.cone.dim; ++r)
      if (lambda[r] > 0) parts.push_back(lambda[r] == 1.0 ? f.components[r] : scale(lambda[r], f.components[r]));
    return sum_shared(parts);
  }
  const int h = f.cone.dim - 1;
  const double s = lambda[h];
  const Vec u = lambda.head(h);
  FunctionExpr g = s == 1.0 ? f.tail : scale(s, f.tail);
  if (u.lpNorm<Eigen::Infinity>() == 0) return g;
  return add_affine(g, f.A.transpose() * u, u.dot(f.a));
}

std::vector<ExtReal> c_perspective_eval(const CConvexFunction& f, const Vec& x, double t) {
  check_dim(x.size(), f.dim_x, "C-perspective argument");
  if (!(t >= 0)) throw Error(ErrorKind::InvalidArgument, "perspective needs t >= 0");
  const int n = f.cone.dim;
  std::vector<ExtReal> out(n);
  if (t > 0) {
    if (f.cone.kind == ProperCone::Kind::orthant) {
      for (int r = 0; r < n; ++r) out[r] = perspective_eval(f.components[r], x, t);
    } else {
      Vec head = f.A * x + t * f.a;
      for (int r = 0; r + 1 < n; ++r) out[r] = head[r];
      out[n - 1] = perspective_eval(f.tail, x, t);
    }
    return out;
  }
  Mat L = dual_basis(f.cone);
  Vec b(n);
  bool finite = true;
  std::vector<ExtReal> rb(n);
  for (int r = 0; r < n; ++r) {
    rb[r] = recession_value(scalarize(f, L.row(r).transpose()), x);
    if (!rb[r].is_finite()) finite = false;
    else b[r] = rb[r].value();
  }
  if (finite) {
    Eigen::FullPivLU<Mat> lu(L);
    if (lu.rcond() < 1e-12) throw Error(ErrorKind::SingularBasis, "dual basis is ill-conditioned");
    Vec v = lu.solve(b);
    for (int r = 0; r < n; ++r) out[r] = v[r];
    return out;
  }
  // an infinite recession value: the orthant basis is diagonal, and for the
  // second-order cone only the tail can be infinite since the head is linear
  if (f.cone.kind == ProperCone::Kind::orthant) return rb;
  Vec head = f.A * x;
  for (int r = 0; r + 1 < n; ++r) out[r] = head[r];
  out[n - 1] = recession_value(f.tail, x);
  return out;
}

}  // namespace rdro
