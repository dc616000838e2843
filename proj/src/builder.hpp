#pragma once

// Small helpers shared by the reformulation builders.

#include "rdro/program.hpp"

#include <string>
#include <vector>

namespace rdro::detail {

// a slice of a variable block, scaled
struct Sel {
  std::string block;
  int start = 0;
  int count = -1;  // -1: to the end of the block
  double coef = 1.0;
};

// rows selecting each slice in turn
inline Mat rows(const FiniteConvexProgram& P, const std::vector<Sel>& sels) {
  int total = 0;
  for (const auto& s : sels) total += s.count < 0 ? P.block(s.block).size - s.start : s.count;
  Mat M = Mat::Zero(total, P.num_vars);
  int r = 0;
  for (const auto& s : sels) {
    const VarBlock& b = P.block(s.block);
    const int cnt = s.count < 0 ? b.size - s.start : s.count;
    for (int i = 0; i < cnt; ++i) M(r++, b.offset + s.start + i) = s.coef;
  }
  return M;
}

// unit row for one scalar variable
inline Vec unit(const FiniteConvexProgram& P, const std::string& block, int idx = 0, double coef = 1.0) {
  Vec v = Vec::Zero(P.num_vars);
  v[P.block(block).offset + idx] = coef;
  return v;
}

inline Term make_term(const FiniteConvexProgram& P, const FunctionExpr& f, const std::vector<Sel>& sels) {
  Mat A = rows(P, sels);
  return P.term(f, A, Vec::Zero(A.rows()));
}

inline std::string idx(const std::string& base, int i) { return base + "[" + std::to_string(i) + "]"; }
inline std::string idx(const std::string& base, int i, int j) {
  return base + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
}
inline std::string idx(const std::string& base, int i, int j, int k) {
  return base + "[" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + "]";
}

}  // namespace rdro::detail
