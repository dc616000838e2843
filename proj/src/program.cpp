#include "rdro/program.hpp"

#include "rdro/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace rdro {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* status_name(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::eps_optimal: return "eps_optimal";
    case Status::unbounded: return "unbounded";
    case Status::infeasible: return "infeasible";
    case Status::stalled: return "stalled";
  }
  return "?";
}

// ---------------------------------------------------------------- program container

int FiniteConvexProgram::add_block(const std::string& name, const std::string& symbol, int size, Domain domain) {
  if (has_block(name)) throw Error(ErrorKind::InvalidArgument, "duplicate block " + name);
  if (size < 0) throw Error(ErrorKind::InvalidArgument, "negative block size");
  blocks.push_back({name, symbol, num_vars, size, domain});
  num_vars += size;
  seal();
  return blocks.back().offset;
}

void FiniteConvexProgram::seal() {
  if (obj_lin.size() != num_vars) {
    Vec o = Vec::Zero(num_vars);
    o.head(obj_lin.size()) = obj_lin;
    obj_lin = o;
  }
  if (eq_A.cols() != num_vars) {
    Mat E = Mat::Zero(eq_A.rows(), num_vars);
    E.leftCols(eq_A.cols()) = eq_A;
    eq_A = E;
  }
  if (eq_b.size() != eq_A.rows()) eq_b.conservativeResize(eq_A.rows());
}

bool FiniteConvexProgram::has_block(const std::string& name) const {
  return std::any_of(blocks.begin(), blocks.end(), [&](const VarBlock& b) { return b.name == name; });
}

const VarBlock& FiniteConvexProgram::block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw Error(ErrorKind::InvalidArgument, "unknown block " + name);
}

Mat FiniteConvexProgram::select(const std::vector<std::string>& names) const {
  int rows = 0;
  for (const auto& n : names) rows += block(n).size;
  Mat S = Mat::Zero(rows, num_vars);
  int r = 0;
  for (const auto& n : names) {
    const VarBlock& b = block(n);
    for (int i = 0; i < b.size; ++i) S(r++, b.offset + i) = 1.0;
  }
  return S;
}

Term FiniteConvexProgram::term(const FunctionExpr& f, const std::vector<std::string>& names) const {
  Mat A = select(names);
  check_dim(A.rows(), f.dim(), "term arguments");
  return Term{f, A, Vec::Zero(A.rows())};
}

Term FiniteConvexProgram::term(const FunctionExpr& f, const Mat& A, const Vec& b) const {
  check_dim(A.rows(), f.dim(), "term rows");
  check_dim(A.cols(), num_vars, "term columns");
  check_dim(b.size(), f.dim(), "term offset");
  return Term{f, A, b};
}

void FiniteConvexProgram::add_equality(const Vec& row, double rhs, const std::string& label) {
  check_dim(row.size(), num_vars, "equality row");
  eq_A.conservativeResize(eq_A.rows() + 1, num_vars);
  eq_A.row(eq_A.rows() - 1) = row;
  eq_b.conservativeResize(eq_b.size() + 1);
  eq_b[eq_b.size() - 1] = rhs;
  eq_labels.push_back(label);
}

void FiniteConvexProgram::add_equalities(const Mat& rows, const Vec& rhs, const std::string& label) {
  for (int i = 0; i < rows.rows(); ++i) add_equality(rows.row(i).transpose(), rhs[i], label);
}

void FiniteConvexProgram::add_constraint(Constraint c) {
  if (c.lin.size() == 0) c.lin = Vec::Zero(num_vars);
  check_dim(c.lin.size(), num_vars, "constraint linear part");
  constraints.push_back(std::move(c));
}

void FiniteConvexProgram::validate() const {
  check_dim(obj_lin.size(), num_vars, "objective linear part");
  check_dim(eq_A.cols(), num_vars, "equality matrix");
  auto check_term = [&](const Term& t) {
    if (!t.f.convex()) throw Error(ErrorKind::UnsupportedComposition, "non-convex term in program");
    check_dim(t.A.cols(), num_vars, "term columns");
    check_dim(t.A.rows(), t.f.dim(), "term rows");
  };
  for (const auto& t : obj_terms) check_term(t);
  for (const auto& c : constraints) {
    for (const auto& t : c.terms) check_term(t);
    check_dim(c.lin.size(), num_vars, "constraint linear part");
  }
}

ExtReal FiniteConvexProgram::objective_value(const Vec& v) const {
  ExtReal acc = 0.0;
  for (const auto& t : obj_terms) acc = ext_add(acc, eval(t.f, t.A * v + t.b));
  double lin = obj_lin.dot(v) + obj_const;
  if (sense == Sense::maximize) return ext_add(ExtReal(lin), ext_neg(acc));
  return ext_add(acc, ExtReal(lin));
}

double FiniteConvexProgram::max_violation(const Vec& v) const {
  double worst = 0;
  for (const auto& c : constraints) {
    ExtReal acc = c.lin.dot(v) + c.c0;
    for (const auto& t : c.terms) acc = ext_add(acc, eval(t.f, t.A * v + t.b));
    if (acc.is_pos_inf()) return kInf;
    worst = std::max(worst, acc.value());
  }
  if (eq_A.rows() > 0) worst = std::max(worst, (eq_A * v - eq_b).lpNorm<Eigen::Infinity>());
  for (const auto& b : blocks) {
    if (b.domain == Domain::nonneg && b.size > 0) worst = std::max(worst, -v.segment(b.offset, b.size).minCoeff());
    if (b.domain == Domain::soc && b.size > 0) {
      Vec s = v.segment(b.offset, b.size);
      worst = std::max(worst, s.head(b.size - 1).norm() - s[b.size - 1]);
    }
  }
  return worst;
}

Vec Solution::value(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return x.segment(b.offset, b.size);
  throw Error(ErrorKind::InvalidArgument, "unknown block " + name);
}

bool is_indicator_expr(const FunctionExpr& f) {
  const Node& n = f.node();
  switch (n.kind) {
    case NodeKind::IndicatorSingleton:
    case NodeKind::IndicatorBox:
    case NodeKind::IndicatorNormBall:
    case NodeKind::EpiIndicator: return true;
    case NodeKind::NormPower: return std::isinf(n.p);
    case NodeKind::AffinePrecompose:
    case NodeKind::NonnegScale:
    case NodeKind::Perspective: return is_indicator_expr(n.kids[0]);
    case NodeKind::AddAffine: return n.a.isZero(0.0) && n.b == 0.0 && is_indicator_expr(n.kids[0]);
    case NodeKind::SumDisjointBlocks:
      return !n.kids.empty() &&
             std::all_of(n.kids.begin(), n.kids.end(), [](const FunctionExpr& k) { return is_indicator_expr(k); });
    default: return false;
  }
}

// ---------------------------------------------------------------- conic assembly

namespace {

enum class SlackMode { none, all, nonlinear };

struct BuildOptions {
  bool recession = false;
  bool objective = true;  // false: objective terms only restrict the domain
  SlackMode slack = SlackMode::none;
};

struct Built {
  ConicModel m;
  int slack_var = -1;
};

bool constraint_is_hard(const Constraint& c) {
  if (c.terms.empty()) return false;
  if (!c.lin.isZero(0.0) || c.c0 != 0.0) return false;
  return std::all_of(c.terms.begin(), c.terms.end(), [](const Term& t) { return is_indicator_expr(t.f); });
}

bool constraint_is_linear(const Constraint& c) {
  return std::all_of(c.terms.begin(), c.terms.end(), [](const Term& t) { return is_affine_expr(t.f); });
}

std::vector<Lin> term_args(const Term& t, const Lin& sigma) {
  std::vector<Lin> args;
  for (int r = 0; r < t.A.rows(); ++r) {
    Lin l = t.b[r] * sigma;
    for (int c = 0; c < t.A.cols(); ++c)
      if (t.A(r, c) != 0.0) l += Lin::var(c, t.A(r, c));
    args.push_back(l);
  }
  return args;
}

Lin lin_of(const Vec& a, double c0) {
  Lin l = Lin::constant(c0);
  for (int i = 0; i < a.size(); ++i)
    if (a[i] != 0.0) l += Lin::var(i, a[i]);
  return l;
}

// sum(terms) + lin <= 0
void emit_constraint(ConicModel& m, const std::vector<Term>& terms, const Lin& lin, const Lin& sigma) {
  if (terms.empty()) {
    m.add_nonneg(-1.0 * lin);
    return;
  }
  if (terms.size() == 1) {
    compile(terms[0].f, term_args(terms[0], sigma), sigma, -1.0 * lin, m);
    return;
  }
  const bool split = lin.is_zero() &&
                     std::all_of(terms.begin(), terms.end(), [](const Term& t) { return is_nonnegative(t.f); });
  if (split) {
    for (const auto& t : terms) compile(t.f, term_args(t, sigma), sigma, Lin::constant(0.0), m);
    return;
  }
  Lin rest = -1.0 * lin;
  for (std::size_t k = 1; k < terms.size(); ++k) {
    Lin e = Lin::var(m.add_var());
    compile(terms[k].f, term_args(terms[k], sigma), sigma, e, m);
    rest -= e;
  }
  compile(terms[0].f, term_args(terms[0], sigma), sigma, rest, m);
}

Built build(const FiniteConvexProgram& P, const BuildOptions& o) {
  P.validate();
  Built B;
  ConicModel& m = B.m;
  m.n = P.num_vars;
  const Lin sigma = Lin::constant(o.recession ? 0.0 : 1.0);
  if (o.slack != SlackMode::none) B.slack_var = m.add_var();

  for (const auto& b : P.blocks) {
    if (b.domain == Domain::nonneg)
      for (int i = 0; i < b.size; ++i) m.add_nonneg(Lin::var(b.offset + i));
    if (b.domain == Domain::soc && b.size > 0) {
      std::vector<Lin> rows{Lin::var(b.offset + b.size - 1)};
      for (int i = 0; i + 1 < b.size; ++i) rows.push_back(Lin::var(b.offset + i));
      m.add_cone(ConeKind::soc, rows);
    }
  }
  for (int r = 0; r < P.eq_A.rows(); ++r)
    m.add_eq(lin_of(P.eq_A.row(r).transpose(), o.recession ? 0.0 : -P.eq_b[r]));

  for (const auto& c : P.constraints) {
    Lin lin = lin_of(c.lin, o.recession ? 0.0 : c.c0);
    bool soft = false;
    if (o.slack == SlackMode::all) soft = !constraint_is_hard(c);
    if (o.slack == SlackMode::nonlinear) soft = !constraint_is_hard(c) && !constraint_is_linear(c);
    if (soft) lin += Lin::var(B.slack_var);
    emit_constraint(m, c.terms, lin, sigma);
  }

  const double sgn = P.sense == Sense::maximize ? -1.0 : 1.0;
  Lin obj;
  for (const auto& t : P.obj_terms) {
    Lin e = Lin::var(m.add_var());
    compile(t.f, term_args(t, sigma), sigma, e, m);
    obj += e;
  }
  if (o.objective) {
    obj += sgn * lin_of(P.obj_lin, o.recession ? 0.0 : P.obj_const);
    m.objective = obj;
  }
  return B;
}

ConicOptions conic_options(const Tolerances& tol, const SolverOptions& opt) {
  ConicOptions co;
  co.gap_tol = opt.gap_tol;
  co.ball_radius = opt.ball_radius;
  co.max_newton = opt.max_newton;
  co.infeas_tol = tol.feas_tol;
  return co;
}

}  // namespace

Solution solve(const FiniteConvexProgram& P, const Tolerances& tol, const SolverOptions& opt) {
  tol.validate();
  Built B = build(P, {});
  ConicResult r = solve_conic(B.m, conic_options(tol, opt));
  Solution s;
  s.blocks = P.blocks;
  s.iterations = r.iterations;
  s.kkt_residual = r.gap_bound;
  s.note = r.note;
  const bool maxi = P.sense == Sense::maximize;
  switch (r.status) {
    case ConicStatus::infeasible:
      s.status = Status::infeasible;
      s.objective = maxi ? ExtReal::neg_inf() : ExtReal::pos_inf();
      s.x = Vec::Zero(P.num_vars);
      return s;
    case ConicStatus::unbounded:
      s.status = Status::unbounded;
      s.objective = maxi ? ExtReal::pos_inf() : ExtReal::neg_inf();
      s.x = r.x.head(P.num_vars);
      return s;
    case ConicStatus::stalled:
      s.status = Status::stalled;
      s.x = r.x.size() ? Vec(r.x.head(P.num_vars)) : Vec::Zero(P.num_vars);
      s.objective = ExtReal::pos_inf();
      return s;
    default: break;
  }
  if (r.status == ConicStatus::inaccurate && !(r.gap_bound <= tol.opt_tol * (1 + std::abs(r.objective)))) {
    s.status = Status::stalled;
    s.x = r.x.head(P.num_vars);
    s.objective = ExtReal::pos_inf();
    s.note = "iteration limit with gap bound " + std::to_string(r.gap_bound) + " at objective " +
             std::to_string(maxi ? -r.objective : r.objective);
    return s;
  }
  s.x = r.x.head(P.num_vars);
  s.objective = maxi ? -r.objective : r.objective;
  s.max_violation = P.max_violation(s.x);
  s.status = r.status == ConicStatus::optimal && s.max_violation <= tol.feas_tol ? Status::optimal
                                                                                 : Status::eps_optimal;
  if (r.relaxed) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", r.relaxation);
    s.note = std::string("no strict interior; solved on a cone enlarged by ") + buf;
  }
  return s;
}

namespace {

// maximize the slack variable, capped at 1
FeasibilityResult slack_solve(const FiniteConvexProgram& P, SlackMode mode, const Tolerances& tol) {
  Built B = build(P, {false, false, mode});
  ConicModel& m = B.m;
  const Lin s = Lin::var(B.slack_var);
  m.add_nonneg(Lin::constant(1.0) - s);
  m.objective = -1.0 * s;
  ConicOptions co;
  co.infeas_tol = tol.feas_tol;
  ConicResult r = solve_conic(m, co);
  FeasibilityResult out;
  if (r.status == ConicStatus::infeasible) {
    out.kind = FeasibilityResult::Kind::infeasible;
    out.slack = -kInf;
    return out;
  }
  if (r.status == ConicStatus::stalled || r.x.size() == 0) return out;
  out.point = r.x.head(P.num_vars);
  out.slack = r.x[B.slack_var];
  if (out.slack > tol.feas_tol)
    out.kind = FeasibilityResult::Kind::feasible;
  else if (out.slack < -tol.feas_tol)
    out.kind = FeasibilityResult::Kind::infeasible;
  return out;
}

}  // namespace

FeasibilityResult feasibility(const FiniteConvexProgram& P, const Tolerances& tol) {
  return slack_solve(P, SlackMode::all, tol);
}

SlaterResult slater_search(const FiniteConvexProgram& P, const Tolerances& tol) {
  SlaterResult out;
  FeasibilityResult a = slack_solve(P, SlackMode::all, tol);
  FeasibilityResult b = slack_solve(P, SlackMode::nonlinear, tol);
  if (a.point.size() == 0 && b.point.size() == 0) return out;
  out.margin = a.point.size() ? a.slack : -kInf;
  out.margin_nonlinear = b.point.size() ? b.slack : -kInf;
  out.point = out.margin > tol.feas_tol ? a.point : (b.point.size() ? b.point : a.point);
  out.found = out.margin >= -tol.feas_tol || out.margin_nonlinear >= -tol.feas_tol;
  return out;
}

bool ray_is_feasible(const FiniteConvexProgram& P, const Vec& v0, const Vec& d, double cap, const Tolerances& tol) {
  for (double s = 1; s <= cap * (1 + 1e-12); s *= 10) {
    Vec v = v0 + s * d;
    double viol = P.max_violation(v);
    if (!(viol <= tol.feas_tol * (1 + s))) return false;
    for (const auto& t : P.obj_terms)
      if (eval(t.f, t.A * v + t.b).is_pos_inf()) return false;
  }
  return true;
}

ProbeResult unboundedness_probe(const FiniteConvexProgram& P, double cap, const Tolerances& tol) {
  ProbeResult out;
  // objective terms only restrict the domain in both models below
  Built base_model = build(P, {false, false, SlackMode::none});
  base_model.m.objective = Lin();
  ConicResult br = solve_conic(base_model.m, ConicOptions{});
  if (br.status == ConicStatus::infeasible || br.status == ConicStatus::stalled) return out;
  out.base = br.x.head(P.num_vars);

  bool all_bounded = true;
  for (int j = 0; j < P.num_vars; ++j) {
    for (double sign : {1.0, -1.0}) {
      Built R = build(P, {true, false, SlackMode::none});
      for (int i = 0; i < P.num_vars; ++i) {
        R.m.add_nonneg(Lin::constant(1.0) - Lin::var(i));
        R.m.add_nonneg(Lin::constant(1.0) + Lin::var(i));
      }
      R.m.objective = Lin::var(j, -sign);
      ConicResult r = solve_conic(R.m, ConicOptions{});
      if (r.status != ConicStatus::optimal && r.status != ConicStatus::inaccurate) {
        all_bounded = false;
        continue;
      }
      if (-r.objective <= 1e-6) continue;
      Vec d = r.x.head(P.num_vars);
      for (int i = 0; i < d.size(); ++i)
        if (std::abs(d[i]) < 1e-8) d[i] = 0;
      if (ray_is_feasible(P, out.base, d, cap, tol)) {
        out.kind = ProbeResult::Kind::unbounded;
        out.ray = d;
        return out;
      }
      all_bounded = false;
    }
  }
  out.kind = all_bounded ? ProbeResult::Kind::bounded : ProbeResult::Kind::inconclusive;
  return out;
}

// ---------------------------------------------------------------- LiftedInf evaluation

namespace detail {

ExtReal lifted_inf_eval(const Node& n, const Vec& x, bool recession) {
  const FunctionExpr& g = n.kids[0];
  ConicModel m;
  std::vector<Lin> y = m.add_vars(g.dim());
  for (int r = 0; r < n.A.rows(); ++r) {
    Lin row = Lin::constant(-x[r]);
    for (int c = 0; c < n.A.cols(); ++c)
      if (n.A(r, c) != 0.0) row += n.A(r, c) * y[c];
    m.add_eq(row);
  }
  Lin e = Lin::var(m.add_var());
  compile(g, y, Lin::constant(recession ? 0.0 : 1.0), e, m);
  m.objective = e + dot(n.a, y);
  ConicResult r = solve_conic(m, ConicOptions{});
  if (r.status == ConicStatus::infeasible) return ExtReal::pos_inf();
  if (r.status == ConicStatus::unbounded) return ExtReal::neg_inf();
  if (r.status == ConicStatus::stalled) throw Error(ErrorKind::SolverFailure, "lifted conjugate evaluation stalled");
  return r.objective;
}

}  // namespace detail

}  // namespace rdro
