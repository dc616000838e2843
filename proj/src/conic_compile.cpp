#include "rdro/conic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rdro {

Lin& Lin::operator+=(const Lin& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  c += o.c;
  return *this;
}

Lin& Lin::operator-=(const Lin& o) {
  for (const auto& [i, v] : o.terms) terms.emplace_back(i, -v);
  c -= o.c;
  return *this;
}

Lin& Lin::operator*=(double s) {
  for (auto& t : terms) t.second *= s;
  c *= s;
  return *this;
}

Lin Lin::compacted() const {
  std::map<int, double> acc;
  for (const auto& [i, v] : terms) acc[i] += v;
  Lin out;
  out.c = c;
  for (const auto& [i, v] : acc)
    if (v != 0.0) out.terms.emplace_back(i, v);
  return out;
}

bool Lin::is_constant() const {
  if (terms.empty()) return true;
  return compacted().terms.empty();
}

double Lin::eval(const Vec& x) const {
  double s = c;
  for (const auto& [i, v] : terms) s += v * x[i];
  return s;
}

Lin operator+(Lin a, const Lin& b) { return a += b; }
Lin operator-(Lin a, const Lin& b) { return a -= b; }
Lin operator*(double s, Lin a) { return a *= s; }

Lin dot(const Vec& a, const std::vector<Lin>& x) {
  Lin out;
  for (int i = 0; i < a.size(); ++i)
    if (a[i] != 0.0) out += a[i] * x[i];
  return out;
}

std::vector<Lin> ConicModel::add_vars(int k) {
  std::vector<Lin> v;
  for (int i = 0; i < k; ++i) v.push_back(Lin::var(add_var()));
  return v;
}

void ConicModel::add_nonneg(const Lin& r) {
  Lin rc = r.compacted();
  if (rc.terms.empty() && rc.c >= 0) return;
  add_cone(ConeKind::nonneg, {rc});
}

namespace {

bool const_zero(const Lin& l) { return l.is_zero(); }

std::vector<Lin> slice(const std::vector<Lin>& x, int from, int len) {
  return std::vector<Lin>(x.begin() + from, x.begin() + from + len);
}

void norm_le(ConicModel& m, const std::vector<Lin>& u, const Lin& s, Norm norm) {
  if (const_zero(s)) {
    for (const auto& ui : u) m.add_eq(ui);
    return;
  }
  if (u.size() == 1 || norm == Norm::linf) {
    for (const auto& ui : u) {
      m.add_nonneg(s - ui);
      m.add_nonneg(s + ui);
    }
    return;
  }
  if (norm == Norm::l2) {
    std::vector<Lin> rows{s};
    rows.insert(rows.end(), u.begin(), u.end());
    m.add_cone(ConeKind::soc, rows);
    return;
  }
  Lin total;
  for (const auto& ui : u) {
    Lin a = Lin::var(m.add_var());
    m.add_nonneg(a - ui);
    m.add_nonneg(a + ui);
    total += a;
  }
  m.add_nonneg(s - total);
}

void compile_node(const Node& n, const std::vector<Lin>& x, const Lin& sg, const Lin& epi, ConicModel& m);

void compile_norm_power(const Node& n, const std::vector<Lin>& x, const Lin& sg, const Lin& epi,
                        ConicModel& m) {
  if (std::isinf(n.p)) {
    norm_le(m, x, sg, n.norm);
    m.add_nonneg(epi);
    return;
  }
  if (n.weight == 0) {
    m.add_nonneg(epi);
    return;
  }
  if (const_zero(epi)) {
    for (const auto& xi : x) m.add_eq(xi);
    return;
  }
  Lin e = (1.0 / n.weight) * epi;
  if (n.p == 1) {
    norm_le(m, x, e, n.norm);
    return;
  }
  if (n.p == 2 && (n.norm == Norm::l2 || x.size() == 1)) {
    std::vector<Lin> rows{0.5 * sg, e};
    rows.insert(rows.end(), x.begin(), x.end());
    m.add_cone(ConeKind::rsoc, rows);
    return;
  }
  Lin s = Lin::var(m.add_var());
  norm_le(m, x, s, n.norm);
  if (n.p == 2) {
    m.add_cone(ConeKind::rsoc, {0.5 * sg, e, s});
  } else {
    m.add_cone(ConeKind::pow, {e, sg, s}, 1.0 / n.p);
  }
}

void compile_support_of_box(const Node& n, const std::vector<Lin>& x, const Lin& epi, ConicModel& m) {
  Lin total;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lo = n.lo[i], hi = n.hi[i];
    const bool flo = std::isfinite(lo), fhi = std::isfinite(hi);
    if (flo && fhi) {
      if (lo == hi) {
        total += lo * x[i];
        continue;
      }
      Lin t = Lin::var(m.add_var());
      m.add_nonneg(t - lo * x[i]);
      m.add_nonneg(t - hi * x[i]);
      total += t;
    } else if (fhi) {
      m.add_nonneg(x[i]);
      total += hi * x[i];
    } else if (flo) {
      m.add_nonneg(-1.0 * x[i]);
      total += lo * x[i];
    } else {
      m.add_eq(x[i]);
    }
  }
  m.add_nonneg(epi - total);
}

void compile_node(const Node& n, const std::vector<Lin>& x, const Lin& sg, const Lin& epi, ConicModel& m) {
  const int d = n.dim;
  switch (n.kind) {
    case NodeKind::Affine:
      m.add_nonneg(epi - dot(n.a, x) - n.b * sg);
      return;
    case NodeKind::IndicatorSingleton:
      for (int i = 0; i < d; ++i) m.add_eq(x[i] - n.center[i] * sg);
      m.add_nonneg(epi);
      return;
    case NodeKind::IndicatorBox:
      for (int i = 0; i < d; ++i) {
        if (n.lo[i] == n.hi[i]) {
          m.add_eq(x[i] - n.lo[i] * sg);
          continue;
        }
        if (std::isfinite(n.lo[i])) m.add_nonneg(x[i] - n.lo[i] * sg);
        if (std::isfinite(n.hi[i])) m.add_nonneg(n.hi[i] * sg - x[i]);
      }
      m.add_nonneg(epi);
      return;
    case NodeKind::IndicatorNormBall: {
      std::vector<Lin> u;
      for (int i = 0; i < d; ++i) u.push_back(x[i] - n.center[i] * sg);
      norm_le(m, u, n.radius * sg, n.norm);
      m.add_nonneg(epi);
      return;
    }
    case NodeKind::NormPower: compile_norm_power(n, x, sg, epi, m); return;
    case NodeKind::QuadOverLin: {
      std::vector<Lin> u = slice(x, 0, d - 1);
      const Lin& v = x[d - 1];
      if (const_zero(epi)) {
        for (const auto& ui : u) m.add_eq(ui);
        m.add_nonneg(v);
        return;
      }
      std::vector<Lin> rows{0.5 * v, epi};
      rows.insert(rows.end(), u.begin(), u.end());
      m.add_cone(ConeKind::rsoc, rows);
      return;
    }
    case NodeKind::Exponential:
      if (n.s == 0) {
        m.add_nonneg(epi - sg);
        return;
      }
      m.add_cone(ConeKind::exp, {n.s * x[0], sg, epi});
      return;
    case NodeKind::NegLog: m.add_cone(ConeKind::exp, {-1.0 * epi, sg, x[0]}); return;
    case NodeKind::NegEntropy: m.add_cone(ConeKind::exp, {-1.0 * (epi + x[0]), x[0], sg}); return;
    case NodeKind::SupportOfBox: compile_support_of_box(n, x, epi, m); return;
    case NodeKind::AffinePrecompose: {
      std::vector<Lin> y;
      for (int r = 0; r < n.A.rows(); ++r) {
        Lin row = n.offset[r] * sg;
        for (int c = 0; c < n.A.cols(); ++c)
          if (n.A(r, c) != 0.0) row += n.A(r, c) * x[c];
        y.push_back(row);
      }
      compile_node(n.kids[0].node(), y, sg, epi, m);
      return;
    }
    case NodeKind::NonnegScale: compile_node(n.kids[0].node(), x, sg, (1.0 / n.t) * epi, m); return;
    case NodeKind::AddAffine: compile_node(n.kids[0].node(), x, sg, epi - dot(n.a, x) - n.b * sg, m); return;
    case NodeKind::SumDisjointBlocks: {
      auto part = [&](std::size_t k) {
        std::vector<Lin> xb;
        for (int i : n.blocks[k]) xb.push_back(x[i]);
        return xb;
      };
      if (n.kids.empty()) {
        m.add_nonneg(epi);
        return;
      }
      const bool split = const_zero(epi) && std::all_of(n.kids.begin(), n.kids.end(), [](const FunctionExpr& k) {
                           return is_nonnegative(k);
                         });
      if (split) {
        for (std::size_t k = 0; k < n.kids.size(); ++k) compile_node(n.kids[k].node(), part(k), sg, epi, m);
        return;
      }
      Lin rest = epi;
      for (std::size_t k = 1; k < n.kids.size(); ++k) {
        Lin ek = Lin::var(m.add_var());
        compile_node(n.kids[k].node(), part(k), sg, ek, m);
        rest -= ek;
      }
      compile_node(n.kids[0].node(), part(0), sg, rest, m);
      return;
    }
    case NodeKind::Perspective: {
      const Lin& tau = x[d - 1];
      m.add_nonneg(tau);
      compile_node(n.kids[0].node(), slice(x, 0, d - 1), tau, epi, m);
      return;
    }
    case NodeKind::EpiIndicator:
      compile_node(n.kids[0].node(), slice(x, 0, d - 1), sg, -1.0 * x[d - 1], m);
      m.add_nonneg(epi);
      return;
    case NodeKind::LiftedInf: {
      const Node& g = n.kids[0].node();
      std::vector<Lin> y = m.add_vars(g.dim);
      for (int r = 0; r < n.A.rows(); ++r) {
        Lin row = -1.0 * x[r];
        for (int c = 0; c < n.A.cols(); ++c)
          if (n.A(r, c) != 0.0) row += n.A(r, c) * y[c];
        m.add_eq(row);
      }
      compile_node(g, y, sg, epi - dot(n.a, y), m);
      return;
    }
    case NodeKind::MaxOfConcave:
      throw Error(ErrorKind::UnsupportedComposition, "max of concave pieces cannot appear in a convex program");
  }
}

}  // namespace

void compile(const FunctionExpr& f, const std::vector<Lin>& x, const Lin& sigma, const Lin& epi, ConicModel& m) {
  check_dim(static_cast<long>(x.size()), f.dim(), "compile arguments");
  compile_node(f.node(), x, sigma, epi, m);
}

}  // namespace rdro
