#include "rdro/robust.hpp"

#include "builder.hpp"

#include <algorithm>
#include <cmath>

namespace rdro {

using detail::idx;
using detail::make_term;
using detail::Sel;

void UncertaintySet::validate() const {
  if (dim < 0) throw Error(ErrorKind::InvalidArgument, "negative set dimension");
  for (const auto& c : constraints) {
    check_dim(c.dim(), dim, "set constraint arity");
    if (!c.proper() || !c.closed() || !c.convex())
      throw Error(ErrorKind::InvalidArgument, "set constraints must be proper, closed and convex");
  }
}

bool UncertaintySet::contains(const Vec& z, double tol) const {
  check_dim(z.size(), dim, "set point");
  for (const auto& c : constraints)
    if (!(eval(c, z) <= ExtReal(tol))) return false;
  return true;
}

FiniteConvexProgram UncertaintySet::as_program() const {
  validate();
  FiniteConvexProgram P;
  P.provenance = "Z";
  P.add_block("z", "z", dim);
  for (std::size_t l = 0; l < constraints.size(); ++l) {
    Constraint c;
    c.terms.push_back(P.term(constraints[l], {"z"}));
    c.lin = P.zero_lin();
    c.label = idx("c", static_cast<int>(l));
    P.add_constraint(c);
  }
  return P;
}

UncertaintySet box_set(const Vec& lo, const Vec& hi) {
  check_dim(hi.size(), lo.size(), "box bounds");
  const int n = static_cast<int>(lo.size());
  UncertaintySet Z;
  Z.dim = n;
  for (int j = 0; j < n; ++j) {
    if (lo[j] > hi[j]) throw Error(ErrorKind::InvalidArgument, "box with lo > hi");
    Vec e = Vec::Zero(n);
    e[j] = 1;
    if (std::isfinite(hi[j])) Z.constraints.push_back(affine(e, -hi[j]));
    if (std::isfinite(lo[j])) Z.constraints.push_back(affine(-e, lo[j]));
  }
  return Z;
}

void RobustProblem::validate() const {
  const int I = num_constraints();
  const int dx = objective.dim_x(), dz = objective.dim_z();
  for (int i = 0; i <= I; ++i) {
    fn(i).validate(dz > 0);
    check_dim(fn(i).dim_x(), dx, "robust function x arity");
    check_dim(fn(i).dim_z(), dz, "robust function z arity");
  }
  if (dz == 0 && sets.empty()) return;
  if (sets.size() != 1 && static_cast<int>(sets.size()) != I + 1)
    throw Error(ErrorKind::InvalidArgument, "need one shared set or one set per function");
  for (const auto& Z : sets) {
    Z.validate();
    check_dim(Z.dim, dz, "uncertainty set dimension");
  }
}

namespace {

int num_set_constraints(const RobustProblem& P, int i) {
  if (P.objective.dim_z() == 0 || P.sets.empty()) return 0;
  return static_cast<int>(P.set(i).constraints.size());
}

}  // namespace

FiniteConvexProgram build_primal_worst_cvx(const RobustProblem& P) {
  P.validate();
  const int I = P.num_constraints();
  const int dx = P.objective.dim_x(), dz = P.objective.dim_z();
  FiniteConvexProgram Q;
  Q.provenance = "P-W'";
  Q.sense = Sense::minimize;
  Q.add_block("x", "x", dx);
  if (dz > 0)
    for (int i = 0; i <= I; ++i) {
      Q.add_block(idx("y", i, 0), "y", dz);
      for (int l = 1; l <= num_set_constraints(P, i); ++l) {
        Q.add_block(idx("y", i, l), "y", dz);
        Q.add_block(idx("nu", i, l), "nu", 1, Domain::nonneg);
      }
    }

  for (int i = 0; i <= I; ++i) {
    std::vector<Term> terms;
    std::vector<Sel> sx{{"x"}};
    if (dz > 0) sx.push_back({idx("y", i, 0)});
    terms.push_back(make_term(Q, partial_conjugate_2_expr(P.fn(i)), sx));
    const int L = num_set_constraints(P, i);
    for (int l = 1; l <= L; ++l) {
      FunctionExpr cs = conjugate(P.set(i).constraints[l - 1]).expr;
      terms.push_back(make_term(Q, perspective(cs), {{idx("y", i, l)}, {idx("nu", i, l)}}));
    }
    if (i == 0) {
      Q.obj_terms = terms;
    } else {
      Constraint c;
      c.terms = terms;
      c.lin = Q.zero_lin();
      c.label = idx("f", i);
      Q.add_constraint(c);
    }
    if (dz > 0) {
      std::vector<Sel> ys;
      for (int l = 0; l <= L; ++l) ys.push_back({idx("y", i, l)});
      Mat Y = Mat::Zero(dz, Q.num_vars);
      for (const auto& s : ys) Y += detail::rows(Q, {s});
      Q.add_equalities(Y, Vec::Zero(dz), idx("sum_y", i));
    }
  }
  return Q;
}

FiniteConvexProgram build_dual_best_cvx(const RobustProblem& P) {
  P.validate();
  const int I = P.num_constraints();
  const int dx = P.objective.dim_x(), dz = P.objective.dim_z();
  FiniteConvexProgram Q;
  Q.provenance = "D-B'";
  Q.sense = Sense::maximize;
  for (int i = 0; i <= I; ++i) Q.add_block(idx("w", i), "w", dx);
  if (dz > 0) Q.add_block("z0", "z", dz);
  if (I > 0) Q.add_block("lambda", "lambda", I, Domain::nonneg);
  if (dz > 0)
    for (int i = 1; i <= I; ++i) Q.add_block(idx("upsilon", i), "upsilon", dz);

  std::vector<Sel> s0{{idx("w", 0)}};
  if (dz > 0) s0.push_back({"z0"});
  Q.obj_terms.push_back(make_term(Q, partial_conjugate_1_expr(P.objective), s0));
  for (int i = 1; i <= I; ++i) {
    std::vector<Sel> si{{idx("w", i)}};
    if (dz > 0) si.push_back({idx("upsilon", i)});
    si.push_back({"lambda", i - 1, 1});
    Q.obj_terms.push_back(make_term(Q, perspective(partial_conjugate_1_expr(P.fn(i))), si));
  }

  for (int l = 0; l < num_set_constraints(P, 0); ++l) {
    Constraint c;
    c.terms.push_back(make_term(Q, P.set(0).constraints[l], {{"z0"}}));
    c.lin = Q.zero_lin();
    c.label = idx("c0", l);
    Q.add_constraint(c);
  }
  for (int i = 1; i <= I; ++i)
    for (int l = 0; l < num_set_constraints(P, i); ++l) {
      Constraint c;
      c.terms.push_back(make_term(Q, perspective(P.set(i).constraints[l]), {{idx("upsilon", i)}, {"lambda", i - 1, 1}}));
      c.lin = Q.zero_lin();
      c.label = idx("c", i, l);
      Q.add_constraint(c);
    }

  Mat W = Mat::Zero(dx, Q.num_vars);
  for (int i = 0; i <= I; ++i) W += detail::rows(Q, {{idx("w", i)}});
  Q.add_equalities(W, Vec::Zero(dx), "sum_w");
  return Q;
}

ExtReal dual_best_objective(const RobustProblem& P, const std::vector<Vec>& w, const std::vector<Vec>& z,
                            const Vec& lambda) {
  const int I = P.num_constraints();
  check_dim(static_cast<long>(w.size()), I + 1, "w count");
  check_dim(static_cast<long>(z.size()), I + 1, "z count");
  check_dim(lambda.size(), I, "lambda");
  ExtReal total = ext_neg(partial_conjugate_1(P.objective, w[0], z[0]));
  for (int i = 1; i <= I; ++i) {
    const double li = lambda[i - 1];
    if (li < 0) return ExtReal::neg_inf();
    ExtReal v;
    if (li > 0) {
      v = ext_scale(li, partial_conjugate_1(P.fn(i), w[i] / li, z[i]));
    } else {
      if (!in_domain(P.fn(i).neg_q, z[i])) return ExtReal::neg_inf();
      v = perspective_eval(partial_conjugate_1_at(P.fn(i), z[i]), w[i], 0.0);
    }
    total = ext_add(total, ext_neg(v));
  }
  return total;
}

bool dual_best_feasible(const RobustProblem& P, const std::vector<Vec>& w, const std::vector<Vec>& z,
                        const Vec& lambda, double tol) {
  const int I = P.num_constraints();
  check_dim(static_cast<long>(w.size()), I + 1, "w count");
  check_dim(static_cast<long>(z.size()), I + 1, "z count");
  check_dim(lambda.size(), I, "lambda");
  Vec s = Vec::Zero(P.objective.dim_x());
  for (const auto& wi : w) s += wi;
  if (s.lpNorm<Eigen::Infinity>() > tol) return false;
  if (I > 0 && lambda.minCoeff() < -tol) return false;
  if (P.objective.dim_z() == 0 || P.sets.empty()) return true;
  for (int i = 0; i <= I; ++i)
    if (!P.set(i).contains(z[i], tol)) return false;
  return true;
}

Vec dual_best_lift(const RobustProblem& P, const FiniteConvexProgram& db, const std::vector<Vec>& w,
                   const std::vector<Vec>& z, const Vec& lambda) {
  const int I = P.num_constraints();
  check_dim(static_cast<long>(w.size()), I + 1, "w count");
  check_dim(static_cast<long>(z.size()), I + 1, "z count");
  check_dim(lambda.size(), I, "lambda");
  Vec v = Vec::Zero(db.num_vars);
  auto put = [&](const std::string& name, const Vec& val) {
    const VarBlock& b = db.block(name);
    check_dim(val.size(), b.size, "lift block");
    v.segment(b.offset, b.size) = val;
  };
  for (int i = 0; i <= I; ++i) put(idx("w", i), w[i]);
  if (db.has_block("z0")) put("z0", z[0]);
  if (I > 0) put("lambda", lambda);
  for (int i = 1; i <= I; ++i)
    if (db.has_block(idx("upsilon", i))) put(idx("upsilon", i), lambda[i - 1] * z[i]);
  return v;
}

bool recession_check(const UncertaintySet& Z, const Vec& v, const Tolerances& tol) {
  check_dim(v.size(), Z.dim, "recession direction");
  for (const auto& c : Z.constraints)
    if (!(recession_value(c, v) <= ExtReal(tol.zero_tol))) return false;
  return true;
}

SetSlater slater_search(const UncertaintySet& Z, const Tolerances& tol) {
  SetSlater out;
  SlaterResult r = slater_search(Z.as_program(), tol);
  if (!r.found) return out;
  out.margin = r.margin;
  out.point = r.point;
  out.found = r.margin > tol.feas_tol;
  return out;
}

const char* slater_flag_name(SlaterFlag f) {
  switch (f) {
    case SlaterFlag::strict: return "strict";
    case SlaterFlag::plain: return "plain";
    case SlaterFlag::none: return "none";
    case SlaterFlag::unknown: return "unknown";
  }
  return "?";
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::strong_duality_certified: return "strong_duality_certified";
    case Verdict::weak_only: return "weak_only";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

SlaterFlag flag_of(const SlaterResult& r, bool full_domains, const Tolerances& tol) {
  if (!r.found) return SlaterFlag::none;
  SlaterFlag f = r.strict(tol) ? SlaterFlag::strict : (r.plain(tol) ? SlaterFlag::plain : SlaterFlag::none);
  if (f != SlaterFlag::none && !full_domains) return SlaterFlag::unknown;
  return f;
}

bool terms_full(const std::vector<Term>& ts) {
  return std::all_of(ts.begin(), ts.end(), [](const Term& t) { return has_full_domain(t.f); });
}

}  // namespace

DualityReport duality_report(const RobustProblem& P, const Tolerances& tol) {
  P.validate();
  tol.validate();
  DualityReport R;
  const int I = P.num_constraints();
  const int dz = P.objective.dim_z();

  R.z_bounded = true;
  if (dz > 0)
    for (const auto& Z : P.sets) {
      FeasibilityResult fz = feasibility(Z.as_program(), tol);
      if (fz.kind == FeasibilityResult::Kind::infeasible) {
        R.notes.push_back("uncertainty set is empty");
        R.pw_value = ExtReal::neg_inf();
        R.db_value = ExtReal::neg_inf();
        R.pw_status = R.db_status = Status::infeasible;
        return R;
      }
      if (unboundedness_probe(Z.as_program(), 1e6, tol).kind != ProbeResult::Kind::bounded) R.z_bounded = false;
    }

  FiniteConvexProgram pw = build_primal_worst_cvx(P);
  FiniteConvexProgram db = build_dual_best_cvx(P);
  Solution sp = solve(pw, tol);
  Solution sd = solve(db, tol);
  R.pw_status = sp.status;
  R.db_status = sd.status;
  R.pw_value = sp.objective;
  R.db_value = sd.objective;
  if (sp.status == Status::stalled || sd.status == Status::stalled)
    throw Error(ErrorKind::SolverFailure, std::string("duality report: ") +
                                              (sp.status == Status::stalled ? "P-W'" : "D-B'") + " solve stalled");
  if (!sp.note.empty()) R.notes.push_back("P-W': " + sp.note);
  if (!sd.note.empty()) R.notes.push_back("D-B': " + sd.note);

  if (R.pw_value.is_finite() && R.db_value.is_finite())
    R.gap = R.pw_value.value() - R.db_value.value();
  else if (R.pw_value == R.db_value)
    R.gap = 0.0;
  else
    R.gap = ext_add(R.pw_value, ext_neg(R.db_value)).to_double();

  // primal: with uncertainty the functions are real valued in x
  bool primal_full = true;
  if (dz == 0) {
    for (int i = 0; i <= I; ++i) primal_full = primal_full && has_full_domain(P.fn(i).p);
  }
  R.slater_primal = flag_of(slater_search(pw, tol), primal_full, tol);

  // dual: lambda > 0 must be strict as well
  FiniteConvexProgram dq = db;
  for (int i = 0; i < I; ++i) {
    Constraint c;
    c.lin = -detail::unit(dq, "lambda", i);
    c.label = idx("lambda_pos", i);
    dq.add_constraint(c);
  }
  bool dual_full = terms_full(db.obj_terms);
  for (const auto& c : db.constraints) dual_full = dual_full && terms_full(c.terms);
  R.slater_dual = flag_of(slater_search(dq, tol), dual_full, tol);

  const bool certified = (R.slater_primal == SlaterFlag::strict && R.z_bounded) ||
                         R.slater_dual == SlaterFlag::strict ||
                         (dz == 0 && (R.slater_primal == SlaterFlag::strict || R.slater_primal == SlaterFlag::plain ||
                                      R.slater_dual == SlaterFlag::strict || R.slater_dual == SlaterFlag::plain));
  if (certified)
    R.verdict = Verdict::strong_duality_certified;
  else if (R.gap > tol.opt_tol)
    R.verdict = Verdict::weak_only;
  else
    R.verdict = Verdict::inconclusive;
  if (certified && std::abs(R.gap) > tol.opt_tol)
    R.notes.push_back("certified instance with a numerical gap of " + std::to_string(R.gap));
  return R;
}

}  // namespace rdro
