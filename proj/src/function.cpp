#include "rdro/function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace rdro {

namespace detail {
// solver-backed evaluation of LiftedInf nodes (program.cpp)
ExtReal lifted_inf_eval(const Node& n, const Vec& x, bool recession);
}  // namespace detail

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FunctionExpr make(Node n) { return FunctionExpr(std::make_shared<const Node>(std::move(n))); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, msg);
}

void require_finite(const Vec& v, const char* what) {
  for (int i = 0; i < v.size(); ++i)
    require(std::isfinite(v[i]), std::string(what) + " must be finite");
}

bool near(double a, double b) { return std::abs(a - b) <= kEvalTol * (1 + std::abs(b)); }

ExtReal indicator(bool in) { return in ? ExtReal(0.0) : ExtReal::pos_inf(); }

bool is_zero_vec(const Vec& x) { return x.size() == 0 || x.lpNorm<Eigen::Infinity>() <= kEvalTol; }

}  // namespace

Norm dual_norm(Norm n) {
  switch (n) {
    case Norm::l1: return Norm::linf;
    case Norm::linf: return Norm::l1;
    default: return Norm::l2;
  }
}

double norm_value(const Vec& x, Norm n) {
  if (x.size() == 0) return 0.0;
  switch (n) {
    case Norm::l1: return x.lpNorm<1>();
    case Norm::linf: return x.lpNorm<Eigen::Infinity>();
    default: return x.norm();
  }
}

const char* norm_name(Norm n) {
  switch (n) {
    case Norm::l1: return "l1";
    case Norm::linf: return "linf";
    default: return "l2";
  }
}

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Affine: return "affine";
    case NodeKind::IndicatorSingleton: return "indicator_singleton";
    case NodeKind::IndicatorBox: return "indicator_box";
    case NodeKind::IndicatorNormBall: return "indicator_norm_ball";
    case NodeKind::NormPower: return "norm_power";
    case NodeKind::QuadOverLin: return "quad_over_lin";
    case NodeKind::Exponential: return "exponential";
    case NodeKind::NegLog: return "neg_log";
    case NodeKind::NegEntropy: return "neg_entropy";
    case NodeKind::SupportOfBox: return "support_of_box";
    case NodeKind::AffinePrecompose: return "precompose";
    case NodeKind::NonnegScale: return "scale";
    case NodeKind::AddAffine: return "add_affine";
    case NodeKind::SumDisjointBlocks: return "sum_blocks";
    case NodeKind::Perspective: return "perspective";
    case NodeKind::EpiIndicator: return "epi_indicator";
    case NodeKind::LiftedInf: return "lifted_inf";
    case NodeKind::MaxOfConcave: return "max_of_concave";
  }
  return "?";
}

bool is_atom_kind(NodeKind k) { return static_cast<int>(k) <= static_cast<int>(NodeKind::SupportOfBox); }

const Node& FunctionExpr::node() const {
  if (!n_) throw Error(ErrorKind::InvalidArgument, "empty FunctionExpr");
  return *n_;
}
NodeKind FunctionExpr::kind() const { return node().kind; }
int FunctionExpr::dim() const { return node().dim; }
bool FunctionExpr::proper() const { return node().proper; }
bool FunctionExpr::closed() const { return node().closed; }
bool FunctionExpr::convex() const { return node().convex; }
const FunctionExpr& FunctionExpr::kid(std::size_t i) const { return node().kids.at(i); }

// ---------------------------------------------------------------- atoms

FunctionExpr affine(const Vec& a, double b) {
  require_finite(a, "affine slope");
  require(std::isfinite(b), "affine constant must be finite");
  Node n;
  n.kind = NodeKind::Affine;
  n.dim = static_cast<int>(a.size());
  n.a = a;
  n.b = b;
  return make(std::move(n));
}

FunctionExpr zero_function(int dim) { return affine(Vec::Zero(dim), 0.0); }

FunctionExpr indicator_singleton(const Vec& x0) {
  require_finite(x0, "singleton point");
  Node n;
  n.kind = NodeKind::IndicatorSingleton;
  n.dim = static_cast<int>(x0.size());
  n.center = x0;
  return make(std::move(n));
}

FunctionExpr indicator_box(const Vec& lo, const Vec& hi) {
  check_dim(hi.size(), lo.size(), "indicator_box bounds");
  for (int i = 0; i < lo.size(); ++i) {
    require(!std::isnan(lo[i]) && !std::isnan(hi[i]), "box bound is NaN");
    require(lo[i] <= hi[i] && lo[i] < kInf && hi[i] > -kInf, "empty box");
  }
  Node n;
  n.kind = NodeKind::IndicatorBox;
  n.dim = static_cast<int>(lo.size());
  n.lo = lo;
  n.hi = hi;
  return make(std::move(n));
}

FunctionExpr indicator_norm_ball(const Vec& center, double radius, Norm norm) {
  require_finite(center, "ball center");
  require(std::isfinite(radius) && radius >= 0, "ball radius must be >= 0");
  Node n;
  n.kind = NodeKind::IndicatorNormBall;
  n.dim = static_cast<int>(center.size());
  n.center = center;
  n.radius = radius;
  n.norm = norm;
  return make(std::move(n));
}

FunctionExpr norm_power(int dim, double p, double weight, Norm norm) {
  require(dim >= 1, "norm_power needs dim >= 1");
  require(p >= 1, "norm_power needs p >= 1");
  require(std::isfinite(weight) && weight >= 0, "norm_power weight must be >= 0");
  Node n;
  n.kind = NodeKind::NormPower;
  n.dim = dim;
  n.p = p;
  n.weight = std::isinf(p) ? 1.0 : weight;
  n.norm = norm;
  return make(std::move(n));
}

FunctionExpr quad_over_lin(int dim) {
  require(dim >= 2, "quad_over_lin needs dim >= 2");
  Node n;
  n.kind = NodeKind::QuadOverLin;
  n.dim = dim;
  return make(std::move(n));
}

FunctionExpr exponential(double s) {
  require(std::isfinite(s), "exponential rate must be finite");
  Node n;
  n.kind = NodeKind::Exponential;
  n.dim = 1;
  n.s = s;
  return make(std::move(n));
}

FunctionExpr neg_log() {
  Node n;
  n.kind = NodeKind::NegLog;
  n.dim = 1;
  return make(std::move(n));
}

FunctionExpr neg_entropy() {
  Node n;
  n.kind = NodeKind::NegEntropy;
  n.dim = 1;
  return make(std::move(n));
}

FunctionExpr support_of_box(const Vec& lo, const Vec& hi) {
  check_dim(hi.size(), lo.size(), "support_of_box bounds");
  for (int i = 0; i < lo.size(); ++i)
    require(lo[i] <= hi[i] && lo[i] < kInf && hi[i] > -kInf, "empty box in support_of_box");
  Node n;
  n.kind = NodeKind::SupportOfBox;
  n.dim = static_cast<int>(lo.size());
  n.lo = lo;
  n.hi = hi;
  return make(std::move(n));
}

// ---------------------------------------------------------------- combinators

namespace {
void inherit_flags(Node& n, const FunctionExpr& f) {
  n.proper = f.proper();
  n.closed = f.closed();
  n.convex = f.convex();
}
void require_convex(const FunctionExpr& f, const char* where) {
  if (!f.convex())
    throw Error(ErrorKind::UnsupportedComposition, std::string(where) + " of a non-convex expression");
}
}  // namespace

FunctionExpr precompose(const FunctionExpr& f, const Mat& A, const Vec& b) {
  require_convex(f, "precompose");
  check_dim(A.rows(), f.dim(), "precompose rows");
  check_dim(b.size(), f.dim(), "precompose offset");
  require(A.allFinite() && b.allFinite(), "precompose data must be finite");
  if (f.kind() == NodeKind::AffinePrecompose) {
    const Node& in = f.node();
    return precompose(in.kids[0], in.A * A, in.A * b + in.offset);
  }
  Node n;
  n.kind = NodeKind::AffinePrecompose;
  n.dim = static_cast<int>(A.cols());
  n.A = A;
  n.offset = b;
  n.kids = {f};
  inherit_flags(n, f);
  return make(std::move(n));
}

FunctionExpr shift(const FunctionExpr& f, const Vec& b) {
  return precompose(f, Mat::Identity(f.dim(), f.dim()), b);
}

FunctionExpr scale(double t, const FunctionExpr& f) {
  require_convex(f, "scale");
  if (!(t > 0) || !std::isfinite(t)) throw Error(ErrorKind::NonpositiveScale, "scale needs t > 0");
  if (t == 1.0) return f;
  Node n;
  n.kind = NodeKind::NonnegScale;
  n.dim = f.dim();
  n.t = t;
  n.kids = {f};
  inherit_flags(n, f);
  return make(std::move(n));
}

FunctionExpr add_affine(const FunctionExpr& f, const Vec& a, double b) {
  require_convex(f, "add_affine");
  check_dim(a.size(), f.dim(), "add_affine slope");
  require(a.allFinite() && std::isfinite(b), "add_affine data must be finite");
  if (a.size() == 0 || a.isZero(0.0)) {
    if (b == 0.0) return f;
  }
  Node n;
  n.kind = NodeKind::AddAffine;
  n.dim = f.dim();
  n.a = a;
  n.b = b;
  n.kids = {f};
  inherit_flags(n, f);
  return make(std::move(n));
}

FunctionExpr sum_blocks(const std::vector<std::pair<FunctionExpr, std::vector<int>>>& parts, int dim) {
  require(dim >= 0, "negative dimension");
  std::set<int> seen;
  Node n;
  n.kind = NodeKind::SumDisjointBlocks;
  n.dim = dim;
  for (const auto& [f, idx] : parts) {
    require_convex(f, "sum_blocks");
    check_dim(static_cast<long>(idx.size()), f.dim(), "sum_blocks block size");
    for (int i : idx) {
      require(i >= 0 && i < dim, "sum_blocks index out of range");
      require(seen.insert(i).second, "sum_blocks blocks must be disjoint");
    }
    n.kids.push_back(f);
    n.blocks.push_back(idx);
    n.proper = n.proper && f.proper();
    n.closed = n.closed && f.closed();
  }
  return make(std::move(n));
}

FunctionExpr sum_shared(const std::vector<FunctionExpr>& fs) {
  require(!fs.empty(), "sum_shared of nothing");
  if (fs.size() == 1) return fs[0];
  int d = fs[0].dim();
  std::vector<std::pair<FunctionExpr, std::vector<int>>> parts;
  Mat D(d * fs.size(), d);
  for (std::size_t k = 0; k < fs.size(); ++k) {
    check_dim(fs[k].dim(), d, "sum_shared arity");
    std::vector<int> idx(d);
    for (int i = 0; i < d; ++i) idx[i] = static_cast<int>(k) * d + i;
    parts.emplace_back(fs[k], idx);
    D.block(k * d, 0, d, d).setIdentity();
  }
  return precompose(sum_blocks(parts, d * static_cast<int>(fs.size())), D, Vec::Zero(D.rows()));
}

FunctionExpr perspective(const FunctionExpr& f) {
  require_convex(f, "perspective");
  Node n;
  n.kind = NodeKind::Perspective;
  n.dim = f.dim() + 1;
  n.kids = {f};
  inherit_flags(n, f);
  return make(std::move(n));
}

FunctionExpr epi_indicator(const FunctionExpr& g) {
  require_convex(g, "epi_indicator");
  Node n;
  n.kind = NodeKind::EpiIndicator;
  n.dim = g.dim() + 1;
  n.kids = {g};
  inherit_flags(n, g);
  return make(std::move(n));
}

FunctionExpr lifted_inf(const FunctionExpr& g, const Mat& M, const Vec& c) {
  require_convex(g, "lifted_inf");
  check_dim(M.cols(), g.dim(), "lifted_inf matrix columns");
  check_dim(c.size(), g.dim(), "lifted_inf cost");
  Node n;
  n.kind = NodeKind::LiftedInf;
  n.dim = static_cast<int>(M.rows());
  n.A = M;
  n.a = c;
  n.kids = {g};
  inherit_flags(n, g);
  return make(std::move(n));
}

FunctionExpr max_of_concave(const std::vector<FunctionExpr>& neg_pieces) {
  require(!neg_pieces.empty(), "max_of_concave needs at least one piece");
  Node n;
  n.kind = NodeKind::MaxOfConcave;
  n.dim = neg_pieces[0].dim();
  for (const auto& f : neg_pieces) {
    require_convex(f, "max_of_concave piece");
    check_dim(f.dim(), n.dim, "max_of_concave piece arity");
  }
  n.kids = neg_pieces;
  n.convex = false;
  return make(std::move(n));
}

// ---------------------------------------------------------------- evaluation

namespace {

Vec gather(const Vec& x, const std::vector<int>& idx) {
  Vec out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
  return out;
}

ExtReal eval_node(const Node& n, const Vec& x);

ExtReal recession_node(const Node& n, const Vec& x) {
  switch (n.kind) {
    case NodeKind::Affine: return n.a.dot(x);
    case NodeKind::IndicatorSingleton:
    case NodeKind::IndicatorNormBall:
    case NodeKind::NegEntropy: return indicator(is_zero_vec(x));
    case NodeKind::IndicatorBox: {
      bool ok = true;
      for (int i = 0; i < x.size(); ++i) {
        if (std::isfinite(n.lo[i]) && x[i] < -kEvalTol) ok = false;
        if (std::isfinite(n.hi[i]) && x[i] > kEvalTol) ok = false;
      }
      return indicator(ok);
    }
    case NodeKind::NormPower:
      if (std::isinf(n.p)) return indicator(is_zero_vec(x));
      if (n.weight == 0) return 0.0;
      if (n.p == 1) return n.weight * norm_value(x, n.norm);
      return indicator(is_zero_vec(x));
    case NodeKind::QuadOverLin:
    case NodeKind::SupportOfBox:
    case NodeKind::Perspective: return eval_node(n, x);
    case NodeKind::Exponential:
      if (n.s == 0) return 0.0;
      return indicator(n.s * x[0] <= kEvalTol);
    case NodeKind::NegLog: return indicator(x[0] >= -kEvalTol);
    case NodeKind::AffinePrecompose: return recession_node(n.kids[0].node(), n.A * x);
    case NodeKind::NonnegScale: return ext_scale(n.t, recession_node(n.kids[0].node(), x));
    case NodeKind::AddAffine: return ext_add(recession_node(n.kids[0].node(), x), n.a.dot(x));
    case NodeKind::SumDisjointBlocks: {
      ExtReal acc = 0.0;
      for (std::size_t k = 0; k < n.kids.size(); ++k) {
        acc = ext_add(acc, recession_node(n.kids[k].node(), gather(x, n.blocks[k])));
        if (acc.is_pos_inf()) return acc;
      }
      return acc;
    }
    case NodeKind::EpiIndicator: {
      const int d = n.dim - 1;
      ExtReal r = recession_node(n.kids[0].node(), x.head(d));
      if (r.is_pos_inf()) return r;
      double e = x[d];
      return indicator(ext_add(r, e) <= ExtReal(kEvalTol * (1 + std::abs(e))));
    }
    case NodeKind::LiftedInf: return detail::lifted_inf_eval(n, x, true);
    case NodeKind::MaxOfConcave:
      throw Error(ErrorKind::UnsupportedComposition, "recession of a max of concave pieces");
  }
  return ExtReal::pos_inf();
}

ExtReal eval_node(const Node& n, const Vec& x) {
  switch (n.kind) {
    case NodeKind::Affine: return n.a.dot(x) + n.b;
    case NodeKind::IndicatorSingleton: {
      for (int i = 0; i < x.size(); ++i)
        if (!near(x[i], n.center[i])) return ExtReal::pos_inf();
      return 0.0;
    }
    case NodeKind::IndicatorBox: {
      for (int i = 0; i < x.size(); ++i) {
        double slack = kEvalTol * (1 + std::abs(x[i]));
        if (x[i] < n.lo[i] - slack || x[i] > n.hi[i] + slack) return ExtReal::pos_inf();
      }
      return 0.0;
    }
    case NodeKind::IndicatorNormBall:
      return indicator(norm_value(x - n.center, n.norm) <= n.radius + kEvalTol * (1 + n.radius));
    case NodeKind::NormPower: {
      double nv = norm_value(x, n.norm);
      if (std::isinf(n.p)) return indicator(nv <= 1 + kEvalTol);
      if (n.weight == 0) return 0.0;
      return n.weight * (n.p == 1 ? nv : std::pow(nv, n.p));
    }
    case NodeKind::QuadOverLin: {
      const int d = n.dim - 1;
      double v = x[d];
      double u2 = x.head(d).squaredNorm();
      if (v > 0) return u2 / v;
      if (v == 0 && u2 == 0) return 0.0;
      return ExtReal::pos_inf();
    }
    case NodeKind::Exponential: {
      double e = std::exp(n.s * x[0]);
      if (std::isinf(e)) return ExtReal::pos_inf();
      return e;
    }
    case NodeKind::NegLog:
      if (x[0] > 0) return -std::log(x[0]);
      return ExtReal::pos_inf();
    case NodeKind::NegEntropy:
      if (x[0] > 0) return x[0] * std::log(x[0]) - x[0];
      if (x[0] == 0) return 0.0;
      return ExtReal::pos_inf();
    case NodeKind::SupportOfBox: {
      double acc = 0;
      for (int i = 0; i < x.size(); ++i) {
        if (x[i] > 0) {
          if (std::isinf(n.hi[i])) return ExtReal::pos_inf();
          acc += n.hi[i] * x[i];
        } else if (x[i] < 0) {
          if (std::isinf(n.lo[i])) return ExtReal::pos_inf();
          acc += n.lo[i] * x[i];
        }
      }
      return acc;
    }
    case NodeKind::AffinePrecompose: return eval_node(n.kids[0].node(), n.A * x + n.offset);
    case NodeKind::NonnegScale: return ext_scale(n.t, eval_node(n.kids[0].node(), x));
    case NodeKind::AddAffine: return ext_add(eval_node(n.kids[0].node(), x), n.a.dot(x) + n.b);
    case NodeKind::SumDisjointBlocks: {
      ExtReal acc = 0.0;
      for (std::size_t k = 0; k < n.kids.size(); ++k) {
        acc = ext_add(acc, eval_node(n.kids[k].node(), gather(x, n.blocks[k])));
        if (acc.is_pos_inf()) return acc;
      }
      return acc;
    }
    case NodeKind::Perspective: {
      const int d = n.dim - 1;
      double t = x[d];
      if (t > 0) return ext_scale(t, eval_node(n.kids[0].node(), x.head(d) / t));
      if (t == 0) return recession_node(n.kids[0].node(), x.head(d));
      return ExtReal::pos_inf();
    }
    case NodeKind::EpiIndicator: {
      const int d = n.dim - 1;
      ExtReal g = eval_node(n.kids[0].node(), x.head(d));
      if (g.is_pos_inf()) return g;
      double e = x[d];
      return indicator(ext_add(g, e) <= ExtReal(kEvalTol * (1 + std::abs(e))));
    }
    case NodeKind::LiftedInf: return detail::lifted_inf_eval(n, x, false);
    case NodeKind::MaxOfConcave: {
      ExtReal best = ExtReal::neg_inf();
      for (const auto& k : n.kids) best = std::max(best, ext_neg(eval_node(k.node(), x)));
      return best;
    }
  }
  return ExtReal::pos_inf();
}

}  // namespace

ExtReal eval(const FunctionExpr& f, const Vec& x) {
  check_dim(x.size(), f.dim(), "eval argument");
  return eval_node(f.node(), x);
}

bool in_domain(const FunctionExpr& f, const Vec& x) { return eval(f, x) < ExtReal::pos_inf(); }

ExtReal perspective_eval(const FunctionExpr& f, const Vec& x, double t) {
  check_dim(x.size(), f.dim(), "perspective argument");
  if (!(t >= 0)) throw Error(ErrorKind::InvalidArgument, "perspective needs t >= 0");
  if (t == 0) return recession_value(f, x);
  return ext_scale(t, eval(f, x / t));
}

ExtReal recession_value(const FunctionExpr& f, const Vec& x) {
  check_dim(x.size(), f.dim(), "recession argument");
  return recession_node(f.node(), x);
}

bool is_affine_expr(const FunctionExpr& f) {
  const Node& n = f.node();
  switch (n.kind) {
    case NodeKind::Affine: return true;
    case NodeKind::AffinePrecompose:
    case NodeKind::NonnegScale:
    case NodeKind::AddAffine: return is_affine_expr(n.kids[0]);
    case NodeKind::SumDisjointBlocks:
      return std::all_of(n.kids.begin(), n.kids.end(), [](const FunctionExpr& k) { return is_affine_expr(k); });
    case NodeKind::NormPower: return !std::isinf(n.p) && n.weight == 0;
    default: return false;
  }
}

bool is_nonnegative(const FunctionExpr& f) {
  const Node& n = f.node();
  switch (n.kind) {
    case NodeKind::Affine: return n.a.isZero(0.0) && n.b >= 0;
    case NodeKind::IndicatorSingleton:
    case NodeKind::IndicatorBox:
    case NodeKind::IndicatorNormBall:
    case NodeKind::NormPower:
    case NodeKind::QuadOverLin:
    case NodeKind::Exponential:
    case NodeKind::EpiIndicator: return true;
    case NodeKind::SupportOfBox:
      return (n.lo.array() <= 0).all() && (n.hi.array() >= 0).all();
    case NodeKind::AffinePrecompose:
    case NodeKind::NonnegScale:
    case NodeKind::Perspective: return is_nonnegative(n.kids[0]);
    case NodeKind::AddAffine: return n.a.isZero(0.0) && n.b >= 0 && is_nonnegative(n.kids[0]);
    case NodeKind::SumDisjointBlocks:
      return std::all_of(n.kids.begin(), n.kids.end(), [](const FunctionExpr& k) { return is_nonnegative(k); });
    default: return false;
  }
}

bool has_full_domain(const FunctionExpr& f) {
  const Node& n = f.node();
  switch (n.kind) {
    case NodeKind::Affine:
    case NodeKind::Exponential: return true;
    case NodeKind::SupportOfBox: return n.lo.array().isFinite().all() && n.hi.array().isFinite().all();
    case NodeKind::NormPower: return !std::isinf(n.p);
    case NodeKind::IndicatorBox: return n.lo.array().isInf().all() && n.hi.array().isInf().all();
    case NodeKind::AffinePrecompose:
    case NodeKind::NonnegScale:
    case NodeKind::AddAffine: return has_full_domain(n.kids[0]);
    case NodeKind::SumDisjointBlocks:
      return std::all_of(n.kids.begin(), n.kids.end(), [](const FunctionExpr& k) { return has_full_domain(k); });
    default: return false;
  }
}

// ---------------------------------------------------------------- saddle functions

void SaddleFunction::validate(bool require_real_valued) const {
  if (!p.valid() || !neg_q.valid()) throw Error(ErrorKind::InvalidArgument, "saddle function parts missing");
  check_dim(Q.rows(), p.dim(), "saddle coupling rows");
  check_dim(Q.cols(), neg_q.dim(), "saddle coupling cols");
  if (!p.convex() || !neg_q.convex())
    throw Error(ErrorKind::InvalidArgument, "saddle parts must be convex in x and concave in z");
  if (require_real_valued && dim_z() > 0) {
    if (!has_full_domain(p) || !has_full_domain(neg_q))
      throw Error(ErrorKind::InvalidArgument, "saddle function must be real-valued");
  }
}

ExtReal SaddleFunction::eval(const Vec& x, const Vec& z) const {
  ExtReal px = rdro::eval(p, x);
  ExtReal nq = rdro::eval(neg_q, z);
  return ext_add(ext_add(px, ExtReal(x.dot(Q * z))), ext_neg(nq));
}

SaddleFunction bi_affine(const Vec& a, double a0, const Mat& Q, const Vec& c) {
  return SaddleFunction{affine(a, a0), Q, affine(-c, 0.0)};
}

}  // namespace rdro
