#pragma once

// Proper cones (orthant, second-order) and vector functions that are convex
// with respect to them.

#include "rdro/function.hpp"

#include <vector>

namespace rdro {

struct ProperCone {
  enum class Kind { orthant, soc };
  Kind kind = Kind::orthant;
  int dim = 1;  // soc: last entry is the tail, ||y[0..n-2]|| <= y[n-1]

  static ProperCone orthant(int n);
  static ProperCone soc(int n);
  bool operator==(const ProperCone& o) const { return kind == o.kind && dim == o.dim; }
};

const char* cone_kind_name(ProperCone::Kind k);

ProperCone dual_cone(const ProperCone& C);
bool in_cone(const ProperCone& C, const Vec& y, double tol = 1e-9);
// rows form a basis of R^n lying in C* (orthant: e_i; soc: e_n and e_n + e_i)
Mat dual_basis(const ProperCone& C);

// orthant: componentwise convex functions
// soc:     f(x) = (A x + a, tail(x)) with tail convex
struct CConvexFunction {
  ProperCone cone;
  int dim_x = 0;
  std::vector<FunctionExpr> components;
  Mat A;
  Vec a;
  FunctionExpr tail;

  static CConvexFunction orthant(const std::vector<FunctionExpr>& comps);
  static CConvexFunction soc(const Mat& A, const Vec& a, const FunctionExpr& tail);
  // scalar function viewed as a one-row orthant function
  static CConvexFunction scalar(const FunctionExpr& f) { return orthant({f}); }

  int rows() const { return cone.dim; }
  std::vector<ExtReal> eval(const Vec& x) const;
  void validate() const;
};

// lambda' f for lambda in C* \ {0}
FunctionExpr scalarize(const CConvexFunction& f, const Vec& lambda, double tol = 1e-9);

// t f(x / t), closed at t = 0 by solving Lambda v = b(x) over the dual basis
std::vector<ExtReal> c_perspective_eval(const CConvexFunction& f, const Vec& x, double t);

}  // namespace rdro
