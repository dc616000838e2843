#include "rdro/ot.hpp"

#include "builder.hpp"

#include <algorithm>
#include <cmath>

namespace rdro {

using detail::idx;
using detail::make_term;
using detail::Sel;
using detail::unit;

FunctionExpr TransportCost::at(const Vec& zhat) const { return shift(displacement, -zhat); }

FunctionExpr TransportCost::conj_at(const Vec& zhat) const {
  return add_affine(conjugate(displacement).expr, zhat, 0.0);
}

ExtReal TransportCost::eval(const Vec& z, const Vec& zhat) const { return rdro::eval(displacement, z - zhat); }

TransportCost wasserstein_cost(int dim, double p, Norm norm) {
  if (!(p >= 1)) throw Error(ErrorKind::InvalidArgument, "wasserstein order must be >= 1");
  TransportCost c;
  c.displacement = norm_power(dim, p, 1.0, norm);
  c.identity_of_indiscernibles = true;
  c.superlinear = p > 1;
  c.kind = "wasserstein";
  c.p = p;
  c.norm = norm;
  return c;
}

void OTAmbiguity::validate(double tol) const {
  support.validate();
  nominal.validate(&support, tol);
  check_dim(cost.dim(), dim(), "transport cost arity");
  if (!(eps >= 0) || !std::isfinite(eps)) throw Error(ErrorKind::InvalidArgument, "radius must be finite and >= 0");
  for (int k = 0; k < num_atoms(); ++k) {
    if (!(nominal.probs[k] > 0)) throw Error(ErrorKind::InvalidArgument, "nominal probabilities must be positive");
    for (int j = 0; j < k; ++j)
      if ((nominal.atoms[j] - nominal.atoms[k]).lpNorm<Eigen::Infinity>() == 0)
        throw Error(ErrorKind::InvalidArgument, "nominal atoms must be distinct");
  }
}

namespace {

std::vector<std::vector<int>> piece_sets(const OTAmbiguity& O, const std::vector<FunctionExpr>& neg,
                                         const Tolerances& tol) {
  std::vector<std::vector<int>> out(O.num_atoms());
  for (int k = 0; k < O.num_atoms(); ++k) {
    const FunctionExpr dk = O.cost.at(O.nominal.atoms[k]);
    for (int i = 0; i < static_cast<int>(neg.size()); ++i) {
      FiniteConvexProgram P;
      P.add_block("z", "z", O.dim());
      P.obj_terms.push_back(P.term(neg[i], {"z"}));
      P.obj_terms.push_back(P.term(dk, {"z"}));
      if (feasibility(P, tol).kind != FeasibilityResult::Kind::infeasible) out[k].push_back(i);
    }
    if (out[k].empty())
      throw Error(ErrorKind::AssumptionSViolated, "nominal atom " + std::to_string(k) + " reaches no piece");
  }
  return out;
}

// shared body of both primal builders; piece_term adds the first conjugate term
template <class PieceTerm>
FiniteConvexProgram primal_body(const OTAmbiguity& O, const std::vector<std::vector<int>>& Ik, int xdim,
                                const std::vector<FunctionExpr>& x_constraints, PieceTerm piece_term) {
  const int K = O.num_atoms(), dz = O.dim();
  const int L = static_cast<int>(O.support.constraints.size());
  FiniteConvexProgram P;
  P.provenance = "AP-W'_OT";
  P.sense = Sense::minimize;
  if (xdim > 0) P.add_block("x", "x", xdim);
  P.add_block("alpha", "alpha", K);
  P.add_block("beta", "beta", 1, Domain::nonneg);
  for (int k = 0; k < K; ++k)
    for (int i : Ik[k]) {
      P.add_block(idx("y0", i, k), "y", dz);
      P.add_block(idx("y1", i, k), "y", dz);
      for (int l = 0; l < L; ++l) {
        P.add_block(idx("y2", i, l, k), "y", dz);
        P.add_block(idx("nu", i, l, k), "nu", 1, Domain::nonneg);
      }
    }

  for (int k = 0; k < K; ++k) P.obj_lin += unit(P, "alpha", k, O.nominal.probs[k]);
  P.obj_lin += unit(P, "beta", 0, O.eps);

  for (std::size_t j = 0; j < x_constraints.size(); ++j) {
    Constraint c;
    c.terms.push_back(P.term(x_constraints[j], {"x"}));
    c.lin = P.zero_lin();
    c.label = idx("x", static_cast<int>(j));
    P.add_constraint(c);
  }

  for (int k = 0; k < K; ++k) {
    const Vec& zk = O.nominal.atoms[k];
    for (int i : Ik[k]) {
      Constraint c;
      c.terms.push_back(piece_term(P, i, k));
      c.terms.push_back(make_term(P, perspective(O.cost.conj_at(zk)), {{idx("y1", i, k)}, {"beta"}}));
      for (int l = 0; l < L; ++l)
        c.terms.push_back(make_term(P, perspective(conjugate(O.support.constraints[l]).expr),
                                    {{idx("y2", i, l, k)}, {idx("nu", i, l, k)}}));
      c.lin = -unit(P, "alpha", k);
      c.label = idx("piece", i, k);
      P.add_constraint(c);

      Mat Y = detail::rows(P, {{idx("y0", i, k)}}) + detail::rows(P, {{idx("y1", i, k)}});
      for (int l = 0; l < L; ++l) Y += detail::rows(P, {{idx("y2", i, l, k)}});
      P.add_equalities(Y, Vec::Zero(dz), idx("sum_y", i, k));
    }
  }
  return P;
}

}  // namespace

std::vector<std::vector<int>> ot_piece_sets(const OTAmbiguity& O, const Disutility& g, const Tolerances& tol) {
  O.validate(tol.feas_tol);
  g.validate();
  check_dim(g.dim(), O.dim(), "disutility arity");
  return piece_sets(O, g.neg_pieces, tol);
}

FiniteConvexProgram build_ot_primal_cvx(const OTAmbiguity& O, const Disutility& g) {
  const auto Ik = ot_piece_sets(O, g);
  return primal_body(O, Ik, 0, {}, [&](const FiniteConvexProgram& P, int i, int k) {
    return make_term(P, conjugate(g.neg_pieces[i]).expr, {{idx("y0", i, k)}});
  });
}

FiniteConvexProgram build_ot_primal_cvx(const OTAmbiguity& O, const OTDecision& D) {
  O.validate();
  if (D.pieces.empty()) throw Error(ErrorKind::InvalidArgument, "decision problem needs at least one piece");
  std::vector<FunctionExpr> neg;
  for (const auto& f : D.pieces) {
    f.validate(false);
    check_dim(f.dim_x(), D.dim, "decision arity");
    check_dim(f.dim_z(), O.dim(), "piece arity");
    neg.push_back(f.neg_q);
  }
  for (const auto& c : D.x_constraints) check_dim(c.dim(), D.dim, "decision constraint arity");
  const auto Ik = piece_sets(O, neg, {});
  FiniteConvexProgram P = primal_body(O, Ik, D.dim, D.x_constraints, [&](const FiniteConvexProgram& P, int i, int k) {
    return P.term(partial_conjugate_2_expr(D.pieces[i]), {"x", idx("y0", i, k)});
  });
  P.provenance = "AP-W'_OT decision";
  return P;
}

FiniteConvexProgram build_ot_dual_cvx_explicit(const OTAmbiguity& O, const Disutility& g) {
  const auto Ik = ot_piece_sets(O, g);
  const int K = O.num_atoms(), dz = O.dim();
  FiniteConvexProgram P;
  P.provenance = "AD-B'_OT explicit";
  P.sense = Sense::maximize;
  for (int k = 0; k < K; ++k) {
    P.add_block(idx("lambda", k), "lambda", static_cast<int>(Ik[k].size()), Domain::nonneg);
    for (int i : Ik[k]) P.add_block(idx("v", i, k), "v", dz);
  }
  P.obj_lin = P.zero_lin();

  Constraint budget;
  budget.lin = P.zero_lin();
  budget.c0 = -O.eps;
  budget.label = "budget";
  for (int k = 0; k < K; ++k) {
    const Vec& zk = O.nominal.atoms[k];
    const std::string lb = idx("lambda", k);
    P.add_equality(detail::rows(P, {{lb}}).colwise().sum().transpose(), O.nominal.probs[k], idx("sum_lambda", k));
    for (std::size_t a = 0; a < Ik[k].size(); ++a) {
      const int i = Ik[k][a];
      const std::vector<Sel> vl{{idx("v", i, k)}, {lb, static_cast<int>(a), 1}};
      P.obj_terms.push_back(make_term(P, perspective(shift(g.neg_pieces[i], zk)), vl));
      for (std::size_t l = 0; l < O.support.constraints.size(); ++l) {
        Constraint c;
        c.terms.push_back(make_term(P, perspective(shift(O.support.constraints[l], zk)), vl));
        c.lin = P.zero_lin();
        c.label = idx("support", i, static_cast<int>(l), k);
        P.add_constraint(c);
      }
      budget.terms.push_back(make_term(P, perspective(O.cost.displacement), vl));
    }
  }
  P.add_constraint(budget);
  return P;
}

// ---------------------------------------------------------------- solutions

bool IndexPartition::has_escapes() const {
  return std::any_of(inf.begin(), inf.end(), [](const std::vector<int>& s) { return !s.empty(); });
}

OTPoint read_ot_point(const FiniteConvexProgram& P, const Vec& x, int K, int I) {
  check_dim(x.size(), P.num_vars, "explicit program point");
  OTPoint pt;
  pt.pieces.resize(K);
  pt.lambda.resize(K);
  pt.v.resize(K);
  for (int k = 0; k < K; ++k) {
    const VarBlock& lb = P.block(idx("lambda", k));
    for (int i = 0; i < I; ++i) {
      if (!P.has_block(idx("v", i, k))) continue;
      const VarBlock& vb = P.block(idx("v", i, k));
      pt.lambda[k].push_back(x[lb.offset + static_cast<int>(pt.pieces[k].size())]);
      pt.pieces[k].push_back(i);
      pt.v[k].push_back(x.segment(vb.offset, vb.size));
    }
  }
  return pt;
}

SlaterFlag ot_slater_flag(const FiniteConvexProgram& P, int K, int I, const Tolerances& tol) {
  const SlaterResult r = slater_search(P, tol);
  if (!r.strict(tol)) return SlaterFlag::unknown;
  const OTPoint pt = read_ot_point(P, r.point, K, I);
  for (const auto& lk : pt.lambda)
    for (double l : lk)
      if (!(l > tol.feas_tol)) return SlaterFlag::unknown;
  return SlaterFlag::strict;
}

IndexPartition classify_indices(const OTAmbiguity& O, const OTPoint& pt, const Tolerances& tol) {
  const int K = static_cast<int>(pt.pieces.size());
  IndexPartition R;
  R.plus.resize(K);
  R.zero.resize(K);
  R.inf.resize(K);
  for (int k = 0; k < K; ++k)
    for (std::size_t a = 0; a < pt.pieces[k].size(); ++a) {
      const int i = pt.pieces[k][a];
      if (pt.lambda[k][a] > tol.zero_tol) {
        R.plus[k].push_back(i);
      } else if (pt.v[k][a].lpNorm<Eigen::Infinity>() <= tol.zero_tol) {
        R.zero[k].push_back(i);
      } else {
        if (!recession_check(O.support, pt.v[k][a], tol))
          throw Error(ErrorKind::NotRecession,
                      "escape candidate (" + std::to_string(i) + "," + std::to_string(k) + ") is not a recession direction");
        R.inf[k].push_back(i);
      }
    }
  return R;
}

namespace {

struct Atom {
  Vec z;
  double p;
  int k;
};

// n = 0: optimal distribution; n > 0: n-th member of the asymptotic family
std::vector<Atom> build_atoms(const OTAmbiguity& O, const OTPoint& pt, int n, const Tolerances& tol) {
  const IndexPartition part = classify_indices(O, pt, tol);
  const int K = static_cast<int>(pt.pieces.size());
  std::vector<Atom> out;
  for (int k = 0; k < K; ++k) {
    const Vec& zk = O.nominal.atoms[k];
    const double pk = O.nominal.probs[k];
    const double ninf = static_cast<double>(part.inf[k].size());
    double kept = 0;
    for (std::size_t a = 0; a < pt.pieces[k].size(); ++a)
      if (pt.lambda[k][a] > tol.zero_tol) kept += pt.lambda[k][a];
    // tiny dropped weights are returned to the kept atoms of the same k
    const double rescale = kept > 0 ? pk / kept : 0.0;
    const double shrink = n > 0 ? 1.0 - ninf / n : 1.0;
    for (std::size_t a = 0; a < pt.pieces[k].size(); ++a) {
      const double lam = pt.lambda[k][a];
      if (lam > tol.zero_tol) {
        out.push_back({zk + pt.v[k][a] / lam, lam * rescale * shrink, k});
      } else if (n > 0 && pt.v[k][a].lpNorm<Eigen::Infinity>() > tol.zero_tol) {
        out.push_back({zk + n * pt.v[k][a] / pk, pk / n, k});
      }
    }
  }
  return out;
}

DiscreteDistribution to_distribution(const std::vector<Atom>& atoms) {
  DiscreteDistribution d;
  for (const auto& a : atoms) {
    if (a.p <= 0) continue;
    d.atoms.push_back(a.z);
    d.probs.push_back(a.p);
  }
  double total = 0;
  for (double p : d.probs) total += p;
  for (double& p : d.probs) p /= total;
  return d;
}

}  // namespace

DiscreteDistribution optimal_distribution(const OTAmbiguity& O, const OTPoint& pt, const Tolerances& tol) {
  if (classify_indices(O, pt, tol).has_escapes())
    throw Error(ErrorKind::HasEscapeDirections, "worst case escapes to infinity; use the asymptotic family");
  return to_distribution(build_atoms(O, pt, 0, tol));
}

DiscreteDistribution asymptotic_distribution(const OTAmbiguity& O, const OTPoint& pt, int n, const Tolerances& tol) {
  const IndexPartition part = classify_indices(O, pt, tol);
  std::size_t need = 1;
  for (const auto& s : part.inf) need = std::max(need, s.size());
  if (n < static_cast<int>(need))
    throw Error(ErrorKind::PreconditionN, "n must be at least " + std::to_string(need));
  return to_distribution(build_atoms(O, pt, n, tol));
}

double ot_plan_cost(const OTAmbiguity& O, const OTPoint& pt, int n, const Tolerances& tol) {
  double total = 0;
  for (const Atom& a : build_atoms(O, pt, n, tol)) {
    if (a.p <= 0) continue;
    ExtReal c = O.cost.eval(a.z, O.nominal.atoms[a.k]);
    if (!c.is_finite()) return c.is_pos_inf() ? INFINITY : 0.0;
    total += a.p * c.value();
  }
  return total;
}

OTSolve solve_ot_explicit(const OTAmbiguity& O, const Disutility& g, const Tolerances& tol, const SolverOptions& opt) {
  OTSolve out;
  out.program = build_ot_dual_cvx_explicit(O, g);
  out.solvable_flag = O.cost.identity_of_indiscernibles;
  out.solution = solve(out.program, tol, opt);
  if (!out.solution.solved()) {
    if (out.solvable_flag) out.notes.push_back("solvable by identity of indiscernibles, but the solve did not attain");
    return out;
  }
  const OTPoint pt = read_ot_point(out.program, out.solution.x, O.num_atoms(), g.size());
  bool tiny = false;
  for (const auto& ls : pt.lambda)
    for (double l : ls) tiny = tiny || (l < 1e-6 && l > tol.zero_tol);
  if (!tiny) return out;

  // pin tiny lambdas at zero: lambda = 0 and the v's shift to the recession branch
  FiniteConvexProgram P = out.program;
  for (int k = 0; k < O.num_atoms(); ++k)
    for (std::size_t a = 0; a < pt.lambda[k].size(); ++a)
      if (pt.lambda[k][a] < 1e-6) P.add_equality(unit(P, idx("lambda", k), static_cast<int>(a)), 0.0, "pin");
  Solution s = solve(P, tol, opt);
  if (s.solved() && s.objective >= ext_add(out.solution.objective, ExtReal(-tol.opt_tol))) {
    out.solution = s;
    out.polished = true;
    out.notes.push_back("tiny weights pinned at zero");
  }
  return out;
}

}  // namespace rdro
