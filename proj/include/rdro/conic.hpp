#pragma once

// Conic form used internally by the solver: linear equalities plus memberships
// in nonnegative, second-order, rotated second-order, exponential and power cones.

#include "rdro/function.hpp"

#include <string>
#include <vector>

namespace rdro {

// sparse affine expression sum_i coef_i * x_{var_i} + c
struct Lin {
  std::vector<std::pair<int, double>> terms;
  double c = 0.0;

  static Lin var(int i, double coef = 1.0) { return Lin{{{i, coef}}, 0.0}; }
  static Lin constant(double v) { return Lin{{}, v}; }

  Lin& operator+=(const Lin& o);
  Lin& operator-=(const Lin& o);
  Lin& operator*=(double s);
  // merge duplicate indices, drop zeros
  Lin compacted() const;
  bool is_constant() const;
  bool is_zero() const { return is_constant() && compacted().c == 0.0; }
  double eval(const Vec& x) const;
};

Lin operator+(Lin a, const Lin& b);
Lin operator-(Lin a, const Lin& b);
Lin operator*(double s, Lin a);
Lin dot(const Vec& a, const std::vector<Lin>& x);

enum class ConeKind {
  nonneg,  // r >= 0
  soc,     // (t, u): t >= ||u||
  rsoc,    // (v, w, u): 2 v w >= ||u||^2, v, w >= 0
  exp,     // (a, b, c): b exp(a / b) <= c, b > 0 (closure)
  pow,     // (x, y, z): x^alpha y^(1 - alpha) >= |z|
};

struct ConeConstraint {
  ConeKind kind = ConeKind::nonneg;
  std::vector<Lin> rows;
  double alpha = 0.5;
};

struct ConicModel {
  int n = 0;
  std::vector<Lin> eqs;  // each == 0
  std::vector<ConeConstraint> cones;
  Lin objective;         // minimized

  int add_var() { return n++; }
  std::vector<Lin> add_vars(int k);
  void add_eq(const Lin& r) { eqs.push_back(r); }
  void add_cone(ConeKind k, std::vector<Lin> rows, double alpha = 0.5) {
    cones.push_back({k, std::move(rows), alpha});
  }
  void add_nonneg(const Lin& r);
};

// Emits constraints meaning  sigma * f(x / sigma) <= epi  (closed at sigma = 0).
void compile(const FunctionExpr& f, const std::vector<Lin>& x, const Lin& sigma, const Lin& epi,
             ConicModel& m);

enum class ConicStatus { optimal, inaccurate, infeasible, unbounded, stalled };

struct ConicOptions {
  double gap_tol = 1e-10;      // relative duality-gap bound target
  double ball_radius = 1e6;    // bounding ball in reduced coordinates
  int max_newton = 3000;
  double infeas_tol = 1e-8;
  bool want_nonneg_duals = false;
};

struct ConicResult {
  ConicStatus status = ConicStatus::stalled;
  Vec x;
  double objective = 0.0;
  double gap_bound = 0.0;
  int iterations = 0;
  bool relaxed = false;       // solved on a slightly enlarged cone (no strict interior)
  double relaxation = 0.0;
  // multipliers of the model's nonneg cones in cone order (NaN where eliminated)
  std::vector<double> nonneg_duals;
  std::string note;
};

ConicResult solve_conic(const ConicModel& m, const ConicOptions& opt = {});

const char* conic_status_name(ConicStatus s);

}  // namespace rdro
