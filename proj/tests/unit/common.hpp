#pragma once

#include "doctest.h"
#include "rdro/driver.hpp"
#include "rdro/oracle.hpp"

#include <cmath>
#include <random>
#include <string>

namespace t {

using namespace rdro;

inline Vec v1(double a) { return Vec::Constant(1, a); }
inline Vec v2(double a, double b) {
  Vec r(2);
  r << a, b;
  return r;
}
inline Vec v3(double a, double b, double c) {
  Vec r(3);
  r << a, b, c;
  return r;
}
inline Mat m1(double a) { return Mat::Constant(1, 1, a); }

inline double val(const ExtReal& e) { return e.to_double(); }

inline std::string spec_path(const std::string& name) { return std::string(RDRO_SPEC_DIR) + "/" + name; }
io::json load(const std::string& name);

inline SaddleFunction plain(const FunctionExpr& p) { return {p, Mat(p.dim(), 0), zero_function(0)}; }

// f0 = e^{-x1}, f1 = x1^2 / x2, no uncertainty
RobustProblem gap_instance();
// f0 = x, x - 1 <= 0, 1 - x <= 0, -x <= 0
RobustProblem unbounded_instance();

Disutility pieces(std::initializer_list<FunctionExpr> fs);

}  // namespace t
