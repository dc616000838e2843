#include "rdro/dro.hpp"

#include "builder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rdro {

using detail::idx;
using detail::make_term;
using detail::Sel;
using detail::unit;

void AmbiguitySet::validate() const {
  support.validate();
  for (const auto& m : moments) {
    check_dim(m.h.dim(), dim(), "moment function arity");
    if (!m.h.proper() || !m.h.closed() || !m.h.convex())
      throw Error(ErrorKind::InvalidArgument, "moment functions must be proper, closed and convex");
    if (!std::isfinite(m.mu)) throw Error(ErrorKind::InvalidArgument, "moment bound must be finite");
  }
}

void Disutility::validate() const {
  if (neg_pieces.empty()) throw Error(ErrorKind::InvalidArgument, "disutility needs at least one piece");
  for (const auto& f : neg_pieces) {
    check_dim(f.dim(), dim(), "piece arity");
    if (!f.proper() || !f.closed() || !f.convex())
      throw Error(ErrorKind::InvalidArgument, "-g_i must be proper, closed and convex");
  }
}

ExtReal Disutility::piece(int i, const Vec& z) const { return ext_neg(rdro::eval(neg_pieces.at(i), z)); }

ExtReal Disutility::eval(const Vec& z) const {
  ExtReal best = ExtReal::neg_inf();
  for (int i = 0; i < size(); ++i) best = std::max(best, piece(i, z));
  return best;
}

int Disutility::argmax(const Vec& z) const {
  int arg = -1;
  ExtReal best = ExtReal::neg_inf();
  for (int i = 0; i < size(); ++i) {
    ExtReal v = piece(i, z);
    if (v.is_neg_inf()) continue;
    if (arg < 0 || v > best) {
      best = v;
      arg = i;
    }
  }
  return arg;
}

void DiscreteDistribution::validate(const UncertaintySet* support, double tol) const {
  check_dim(static_cast<long>(probs.size()), static_cast<long>(atoms.size()), "distribution probabilities");
  double total = 0;
  for (double p : probs) {
    if (!(p >= 0)) throw Error(ErrorKind::InvalidArgument, "negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::InvalidArgument, "probabilities do not sum to 1");
  if (support)
    for (const auto& a : atoms)
      if (!support->contains(a, tol)) throw Error(ErrorKind::InvalidArgument, "atom outside the support");
}

ExtReal DiscreteDistribution::expect_convex(const FunctionExpr& f) const {
  ExtReal total = 0.0;
  for (int k = 0; k < size(); ++k) {
    if (probs[k] == 0) continue;
    ExtReal v = eval(f, atoms[k]);
    if (v.is_pos_inf()) return v;
    total = ext_add(total, ext_scale(probs[k], v));
  }
  return total;
}

ExtReal DiscreteDistribution::expect(const Disutility& g) const {
  ExtReal total = 0.0;
  for (int k = 0; k < size(); ++k) {
    if (probs[k] == 0) continue;
    ExtReal v = g.eval(atoms[k]);
    if (v.is_neg_inf()) return v;
    total = ext_add(total, ext_scale(probs[k], v));
  }
  return total;
}

// ---------------------------------------------------------------- assumption (S)

namespace {

// S intersected with dom h_j and dom(-g_i); the objective terms only carry domains
FiniteConvexProgram effective_support(const AmbiguitySet& A, const FunctionExpr& neg_g) {
  FiniteConvexProgram P = A.support.as_program();
  P.provenance = "effective support";
  for (const auto& m : A.moments) P.obj_terms.push_back(P.term(m.h, {"z"}));
  P.obj_terms.push_back(P.term(neg_g, {"z"}));
  return P;
}

void require_assumption_s(const AmbiguitySet& A, const Disutility& g) {
  std::vector<int> keep = nonempty_pieces(A, g);
  if (static_cast<int>(keep.size()) != g.size())
    throw Error(ErrorKind::AssumptionSViolated, "some piece has an empty effective support");
}

}  // namespace

std::vector<int> nonempty_pieces(const AmbiguitySet& A, const Disutility& g, const Tolerances& tol) {
  A.validate();
  g.validate();
  check_dim(g.dim(), A.dim(), "disutility arity");
  std::vector<int> keep;
  for (int i = 0; i < g.size(); ++i) {
    FeasibilityResult r = feasibility(effective_support(A, g.neg_pieces[i]), tol);
    if (r.kind != FeasibilityResult::Kind::infeasible) keep.push_back(i);
  }
  return keep;
}

Disutility enforce_assumption_s(const AmbiguitySet& A, const Disutility& g, std::vector<std::string>* warnings,
                                const Tolerances& tol) {
  std::vector<int> keep = nonempty_pieces(A, g, tol);
  if (keep.empty()) throw Error(ErrorKind::AssumptionSViolated, "every piece has an empty effective support");
  Disutility out;
  for (int i = 0, k = 0; i < g.size(); ++i) {
    if (k < static_cast<int>(keep.size()) && keep[k] == i) {
      out.neg_pieces.push_back(g.neg_pieces[i]);
      ++k;
    } else if (warnings) {
      warnings->push_back("piece " + std::to_string(i) + " dropped: empty effective support");
    }
  }
  return out;
}

// ---------------------------------------------------------------- builders

FiniteConvexProgram build_apw_cvx(const AmbiguitySet& A, const Disutility& g) {
  require_assumption_s(A, g);
  const int I = g.size(), J = A.num_moments(), dz = A.dim();
  const int L = static_cast<int>(A.support.constraints.size());
  FiniteConvexProgram P;
  P.provenance = "AP-W'";
  P.sense = Sense::minimize;
  P.add_block("alpha", "alpha", 1);
  if (J > 0) P.add_block("beta", "beta", J, Domain::nonneg);
  for (int i = 0; i < I; ++i) {
    P.add_block(idx("y0", i), "y", dz);
    for (int j = 0; j < J; ++j) P.add_block(idx("y1", i, j), "y", dz);
    for (int l = 0; l < L; ++l) {
      P.add_block(idx("y2", i, l), "y", dz);
      P.add_block(idx("nu", i, l), "nu", 1, Domain::nonneg);
    }
  }

  P.obj_lin = unit(P, "alpha");
  for (int j = 0; j < J; ++j) P.obj_lin += unit(P, "beta", j, A.moments[j].mu);

  for (int i = 0; i < I; ++i) {
    Constraint c;
    c.terms.push_back(make_term(P, conjugate(g.neg_pieces[i]).expr, {{idx("y0", i)}}));
    for (int j = 0; j < J; ++j)
      c.terms.push_back(
          make_term(P, perspective(conjugate(A.moments[j].h).expr), {{idx("y1", i, j)}, {"beta", j, 1}}));
    for (int l = 0; l < L; ++l)
      c.terms.push_back(make_term(P, perspective(conjugate(A.support.constraints[l]).expr),
                                  {{idx("y2", i, l)}, {idx("nu", i, l)}}));
    c.lin = -unit(P, "alpha");
    c.label = idx("piece", i);
    P.add_constraint(c);

    Mat Y = detail::rows(P, {{idx("y0", i)}});
    for (int j = 0; j < J; ++j) Y += detail::rows(P, {{idx("y1", i, j)}});
    for (int l = 0; l < L; ++l) Y += detail::rows(P, {{idx("y2", i, l)}});
    P.add_equalities(Y, Vec::Zero(dz), idx("sum_y", i));
  }
  return P;
}

FiniteConvexProgram build_adb_cvx(const AmbiguitySet& A, const Disutility& g) {
  require_assumption_s(A, g);
  const int I = g.size(), J = A.num_moments(), dz = A.dim();
  const int L = static_cast<int>(A.support.constraints.size());
  FiniteConvexProgram P;
  P.provenance = "AD-B'";
  P.sense = Sense::maximize;
  P.add_block("tau", "tau", I);
  P.add_block("lambda", "lambda", I, Domain::nonneg);
  for (int i = 0; i < I; ++i) {
    if (J > 0) P.add_block(idx("omega", i), "omega", J);
    P.add_block(idx("v", i), "v", dz);
  }

  for (int i = 0; i < I; ++i) P.obj_lin += unit(P, "tau", i);
  P.add_equality(detail::rows(P, {{"lambda"}}).colwise().sum().transpose(), 1.0, "sum_lambda");

  for (int j = 0; j < J; ++j) {
    Constraint c;
    c.lin = P.zero_lin();
    for (int i = 0; i < I; ++i) c.lin += unit(P, idx("omega", i), j);
    c.c0 = -A.moments[j].mu;
    c.label = idx("moment", j);
    P.add_constraint(c);
  }
  for (int i = 0; i < I; ++i) {
    const std::vector<Sel> vl{{idx("v", i)}, {"lambda", i, 1}};
    for (int l = 0; l < L; ++l) {
      Constraint c;
      c.terms.push_back(make_term(P, perspective(A.support.constraints[l]), vl));
      c.lin = P.zero_lin();
      c.label = idx("support", i, l);
      P.add_constraint(c);
    }
    for (int j = 0; j < J; ++j) {
      Constraint c;
      c.terms.push_back(make_term(P, perspective(A.moments[j].h), vl));
      c.lin = -unit(P, idx("omega", i), j);
      c.label = idx("omega", i, j);
      P.add_constraint(c);
    }
    Constraint c;
    c.terms.push_back(make_term(P, perspective(g.neg_pieces[i]), vl));
    c.lin = unit(P, "tau", i);
    c.label = idx("tau", i);
    P.add_constraint(c);
  }
  return P;
}

// ---------------------------------------------------------------- distributions

namespace {

DiscreteDistribution atoms_from(const Vec& lambda, const std::vector<Vec>& v, double zero_tol) {
  DiscreteDistribution d;
  double total = 0;
  for (int i = 0; i < lambda.size(); ++i) {
    if (lambda[i] <= zero_tol) {
      if (v[i].lpNorm<Eigen::Infinity>() > zero_tol)
        throw Error(ErrorKind::UnattainedWorstCase,
                    "piece " + std::to_string(i) + " has vanishing weight but a nonzero direction");
      continue;
    }
    d.atoms.push_back(v[i] / lambda[i]);
    d.probs.push_back(lambda[i]);
    total += lambda[i];
  }
  if (d.atoms.empty()) throw Error(ErrorKind::UnattainedWorstCase, "no atom carries positive weight");
  for (double& p : d.probs) p /= total;
  return d;
}

std::vector<Vec> v_blocks(const FiniteConvexProgram& adb, const Vec& x, int I) {
  std::vector<Vec> v;
  for (int i = 0; i < I; ++i) {
    const VarBlock& b = adb.block(idx("v", i));
    v.push_back(x.segment(b.offset, b.size));
  }
  return v;
}

Vec lambda_block(const FiniteConvexProgram& adb, const Vec& x) {
  const VarBlock& b = adb.block("lambda");
  return x.segment(b.offset, b.size);
}

}  // namespace

DiscreteDistribution extract_distribution(const AmbiguitySet& A, const Disutility& g,
                                          const FiniteConvexProgram& adb, const Vec& x, const Tolerances& tol) {
  check_dim(x.size(), adb.num_vars, "AD-B' point");
  if (adb.max_violation(x) > tol.feas_tol)
    throw Error(ErrorKind::InvalidArgument, "AD-B' point is not feasible");
  DiscreteDistribution d = atoms_from(lambda_block(adb, x), v_blocks(adb, x, g.size()), tol.zero_tol);
  d.validate(&A.support, tol.feas_tol);
  return d;
}

DiscreteDistribution epsilon_optimal_distribution(const AmbiguitySet& A, const Disutility& g,
                                                  const FiniteConvexProgram& adb, const Vec& x,
                                                  const Vec& slater_x, double eps, double* theta_out,
                                                  const Tolerances& tol) {
  check_dim(x.size(), adb.num_vars, "AD-B' point");
  check_dim(slater_x.size(), adb.num_vars, "Slater point");
  if (!(eps > 0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  if (lambda_block(adb, slater_x).minCoeff() <= tol.zero_tol)
    throw Error(ErrorKind::NoInteriorSlater, "Slater point needs lambda > 0");
  double theta = 0.0;
  if (lambda_block(adb, x).minCoeff() <= tol.zero_tol) {
    // the objective is linear in the blend
    const double loss = adb.obj_lin.dot(x) - adb.obj_lin.dot(slater_x);
    theta = loss <= 0 ? 1.0 : std::min(1.0, eps / loss);
  }
  if (theta_out) *theta_out = theta;
  Vec xb = theta * slater_x + (1 - theta) * x;
  DiscreteDistribution d = atoms_from(lambda_block(adb, xb), v_blocks(adb, xb, g.size()), 0.0);
  d.validate(&A.support, tol.feas_tol);
  return d;
}

SlaterDistributionReport slater_distribution_check(const AmbiguitySet& A, const Disutility& g,
                                                   const SlaterCandidate& c, const Tolerances& tol) {
  A.validate();
  g.validate();
  SlaterDistributionReport R;
  R.absolutely_continuous_declared = c.absolutely_continuous;
  R.notes.push_back(c.absolutely_continuous ? "absolute continuity declared, not verified"
                                            : "absolute continuity not declared");
  const int I = g.size(), J = A.num_moments();
  const int L = static_cast<int>(A.support.constraints.size());
  if (static_cast<int>(c.weights.size()) != I || static_cast<int>(c.means.size()) != I)
    throw Error(ErrorKind::DimensionMismatch, "candidate needs one weight and one mean per piece");

  double total = 0;
  R.positive_weights = true;
  for (double w : c.weights) {
    total += w;
    if (!(w > tol.zero_tol)) R.positive_weights = false;
  }
  if (std::abs(total - 1) > 1e-9) {
    R.positive_weights = false;
    R.notes.push_back("weights do not sum to 1");
  }

  bool finite = true;
  std::vector<double> gi(I);
  for (int i = 0; i < I; ++i) {
    check_dim(c.means[i].size(), A.dim(), "candidate mean");
    ExtReal v = g.piece(i, c.means[i]);
    if (!v.is_finite()) {
      finite = false;
      R.notes.push_back("piece " + std::to_string(i) + " is -inf at its mean");
    } else {
      gi[i] = v.value();
    }
  }

  R.moments_ok = finite;
  std::vector<double> slack(J, 0.0);
  for (int j = 0; j < J; ++j) {
    const bool lin = is_affine_expr(A.moments[j].h);
    ExtReal jensen = 0.0;
    for (int i = 0; i < I; ++i) jensen = ext_add(jensen, ext_scale(c.weights[i], eval(A.moments[j].h, c.means[i])));
    const double mu = A.moments[j].mu;
    bool ok = jensen.is_finite() && (lin ? jensen.value() <= mu + tol.feas_tol : jensen.value() < mu - tol.feas_tol);
    if (j < static_cast<int>(c.moment_expectations.size())) {
      const double e = c.moment_expectations[j];
      ok = ok && (lin ? e <= mu + tol.feas_tol : e < mu - tol.feas_tol);
    }
    if (!ok) {
      R.moments_ok = false;
      R.notes.push_back("moment " + std::to_string(j) + (lin ? " violated" : " has no strict slack"));
    } else {
      slack[j] = std::max(0.0, mu - jensen.value());
    }
  }

  R.support_ok = true;
  for (int l = 0; l < L; ++l) {
    const FunctionExpr& cl = A.support.constraints[l];
    const bool lin = is_affine_expr(cl);
    bool ok = true;
    for (int i = 0; i < I; ++i) {
      ExtReal v = eval(cl, c.means[i]);
      ok = ok && (lin ? v <= ExtReal(tol.feas_tol) : v < ExtReal(-tol.feas_tol));
    }
    if (!lin && l < static_cast<int>(c.support_expectations.size()))
      ok = ok && c.support_expectations[l] < -tol.feas_tol;
    if (!ok) {
      R.support_ok = false;
      R.notes.push_back("support constraint " + std::to_string(l) + (lin ? " violated" : " has no strict slack"));
    }
  }

  R.ok = R.positive_weights && R.moments_ok && R.support_ok;
  if (!R.ok) return R;

  FiniteConvexProgram adb = build_adb_cvx(A, g);
  Vec x = Vec::Zero(adb.num_vars);
  auto put = [&](const std::string& name, int k, double val) { x[adb.block(name).offset + k] = val; };
  for (int i = 0; i < I; ++i) {
    const double w = c.weights[i];
    put("lambda", i, w);
    put("tau", i, w * (gi[i] - 1.0));
    const VarBlock& vb = adb.block(idx("v", i));
    x.segment(vb.offset, vb.size) = w * c.means[i];
    for (int j = 0; j < J; ++j)
      put(idx("omega", i), j, w * (eval(A.moments[j].h, c.means[i]).value() + 0.5 * slack[j]));
  }
  R.adb_point = x;
  return R;
}

DiscreteDistribution jensen_merge(const Disutility& g, const DiscreteDistribution& d) {
  std::map<int, std::pair<double, Vec>> groups;
  DiscreteDistribution out;
  for (int k = 0; k < d.size(); ++k) {
    const int i = g.argmax(d.atoms[k]);
    if (i < 0) {
      out.atoms.push_back(d.atoms[k]);
      out.probs.push_back(d.probs[k]);
      continue;
    }
    auto it = groups.find(i);
    if (it == groups.end()) it = groups.emplace(i, std::make_pair(0.0, Vec(Vec::Zero(d.atoms[k].size())))).first;
    it->second.first += d.probs[k];
    it->second.second += d.probs[k] * d.atoms[k];
  }
  for (auto& [i, pm] : groups) {
    if (pm.first <= 0) continue;
    out.atoms.push_back(pm.second / pm.first);
    out.probs.push_back(pm.first);
  }
  return out;
}

// ---------------------------------------------------------------- generalized

void GeneralizedAmbiguitySet::validate() const {
  if (components.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one support component");
  double total = 0;
  for (const auto& comp : components) {
    if (!(comp.prob > 0)) throw Error(ErrorKind::InvalidArgument, "component probabilities must be positive");
    total += comp.prob;
    if (comp.neg_pieces.empty()) throw Error(ErrorKind::InvalidArgument, "component without disutility pieces");
    for (const auto& c : comp.constraints) {
      c.validate();
      check_dim(c.dim_x, dim, "component constraint arity");
    }
    for (const auto& f : comp.neg_pieces) {
      check_dim(f.dim(), dim, "piece arity");
      if (!f.proper() || !f.closed() || !f.convex())
        throw Error(ErrorKind::InvalidArgument, "-g_ik must be proper, closed and convex");
    }
  }
  if (std::abs(total - 1) > 1e-9) throw Error(ErrorKind::InvalidArgument, "component probabilities must sum to 1");
  for (const auto& m : moments) {
    check_dim(m.mu.size(), m.cone.dim, "moment bound");
    check_dim(static_cast<long>(m.h.size()), num_components(), "moment functions per component");
    for (const auto& h : m.h) {
      h.validate();
      if (!(h.cone == m.cone)) throw Error(ErrorKind::InvalidArgument, "moment function cone mismatch");
      check_dim(h.dim_x, dim, "moment function arity");
    }
  }
}

GeneralizedAmbiguitySet generalize(const AmbiguitySet& A, const Disutility& g) {
  A.validate();
  g.validate();
  GeneralizedAmbiguitySet G;
  G.dim = A.dim();
  SupportComponent comp;
  for (const auto& c : A.support.constraints) comp.constraints.push_back(CConvexFunction::scalar(c));
  comp.prob = 1.0;
  comp.neg_pieces = g.neg_pieces;
  G.components.push_back(comp);
  for (const auto& m : A.moments) {
    ConeMoment cm;
    cm.cone = ProperCone::orthant(1);
    cm.mu = Vec::Constant(1, m.mu);
    cm.h = {CConvexFunction::scalar(m.h)};
    G.moments.push_back(cm);
  }
  return G;
}

namespace {

bool is_orthant(const ProperCone& C) { return C.kind == ProperCone::Kind::orthant; }

// row range of each moment inside the stacked orthant multiplier block
struct MomentLayout {
  std::vector<int> orth_offset;  // -1 for soc moments
  int orth_rows = 0;
  std::vector<int> omega_offset;
  int omega_size = 0;
};

MomentLayout layout(const GeneralizedAmbiguitySet& A) {
  MomentLayout m;
  for (const auto& cm : A.moments) {
    if (is_orthant(cm.cone)) {
      m.orth_offset.push_back(m.orth_rows);
      m.orth_rows += cm.cone.dim;
    } else {
      m.orth_offset.push_back(-1);
    }
    m.omega_offset.push_back(m.omega_size);
    m.omega_size += cm.cone.dim;
  }
  return m;
}

// (s tail)^*(y - A'u) - u'a as a perspective term plus a linear part, for (u, s) in a soc block
void soc_conjugate_term(FiniteConvexProgram& P, const CConvexFunction& f, const std::string& yblock,
                        const std::string& mult, Constraint& c) {
  const VarBlock& yb = P.block(yblock);
  const VarBlock& mb = P.block(mult);
  const int dz = yb.size, h = mb.size - 1;
  Mat M = Mat::Zero(dz + 1, P.num_vars);
  for (int r = 0; r < dz; ++r) {
    M(r, yb.offset + r) = 1;
    for (int q = 0; q < h; ++q) M(r, mb.offset + q) -= f.A(q, r);
  }
  M(dz, mb.offset + h) = 1;
  c.terms.push_back(P.term(perspective(conjugate(f.tail).expr), M, Vec::Zero(dz + 1)));
  for (int q = 0; q < h; ++q) c.lin[mb.offset + q] -= f.a[q];
}

}  // namespace

FiniteConvexProgram build_apw_cvx_g(const GeneralizedAmbiguitySet& A) {
  A.validate();
  const int K = A.num_components(), dz = A.dim;
  const MomentLayout ml = layout(A);
  FiniteConvexProgram P;
  P.provenance = "AP-W'_g";
  P.sense = Sense::minimize;
  P.add_block("alpha", "alpha", K);
  if (ml.orth_rows > 0) P.add_block("beta", "beta", ml.orth_rows, Domain::nonneg);
  for (std::size_t j = 0; j < A.moments.size(); ++j)
    if (!is_orthant(A.moments[j].cone))
      P.add_block(idx("beta", static_cast<int>(j)), "beta", A.moments[j].cone.dim, Domain::soc);

  // multiplier slots: one per orthant row, one per soc function
  struct Slot {
    std::string y, mult;
    int mult_row = 0;
    const CConvexFunction* f = nullptr;
    int comp = 0;  // orthant component
  };
  std::vector<std::vector<std::vector<Slot>>> slots(K);
  for (int k = 0; k < K; ++k) {
    const auto& comp = A.components[k];
    const int I = static_cast<int>(comp.neg_pieces.size());
    slots[k].resize(I);
    for (int i = 0; i < I; ++i) {
      P.add_block(idx("y0", i, k), "y", dz);
      int s = 0;
      for (std::size_t j = 0; j < A.moments.size(); ++j) {
        const CConvexFunction& h = A.moments[j].h[k];
        if (is_orthant(h.cone)) {
          for (int r = 0; r < h.cone.dim; ++r, ++s) {
            const std::string y = idx("y1", i, s, k);
            P.add_block(y, "y", dz);
            slots[k][i].push_back({y, "beta", ml.orth_offset[j] + r, &h, r});
          }
        } else {
          const std::string y = idx("y1", i, s++, k);
          P.add_block(y, "y", dz);
          slots[k][i].push_back({y, idx("beta", static_cast<int>(j)), -1, &h, 0});
        }
      }
      s = 0;
      for (const auto& c : comp.constraints) {
        if (is_orthant(c.cone)) {
          for (int r = 0; r < c.cone.dim; ++r, ++s) {
            const std::string y = idx("y2", i, s, k), nu = idx("nu", i, s, k);
            P.add_block(y, "y", dz);
            P.add_block(nu, "nu", 1, Domain::nonneg);
            slots[k][i].push_back({y, nu, 0, &c, r});
          }
        } else {
          const std::string y = idx("y2", i, s, k), nu = idx("nu", i, s, k);
          ++s;
          P.add_block(y, "y", dz);
          P.add_block(nu, "nu", c.cone.dim, Domain::soc);
          slots[k][i].push_back({y, nu, -1, &c, 0});
        }
      }
    }
  }

  for (int k = 0; k < K; ++k) P.obj_lin += unit(P, "alpha", k, A.components[k].prob);
  for (std::size_t j = 0; j < A.moments.size(); ++j) {
    const auto& cm = A.moments[j];
    for (int r = 0; r < cm.cone.dim; ++r) {
      if (is_orthant(cm.cone))
        P.obj_lin += unit(P, "beta", ml.orth_offset[j] + r, cm.mu[r]);
      else
        P.obj_lin += unit(P, idx("beta", static_cast<int>(j)), r, cm.mu[r]);
    }
  }

  for (int k = 0; k < K; ++k) {
    const auto& comp = A.components[k];
    for (int i = 0; i < static_cast<int>(comp.neg_pieces.size()); ++i) {
      Constraint c;
      c.lin = -unit(P, "alpha", k);
      c.terms.push_back(make_term(P, conjugate(comp.neg_pieces[i]).expr, {{idx("y0", i, k)}}));
      Mat Y = detail::rows(P, {{idx("y0", i, k)}});
      for (const Slot& s : slots[k][i]) {
        if (s.mult_row >= 0) {
          const FunctionExpr& fr = s.f->components[s.comp];
          c.terms.push_back(make_term(P, perspective(conjugate(fr).expr), {{s.y}, {s.mult, s.mult_row, 1}}));
        } else {
          soc_conjugate_term(P, *s.f, s.y, s.mult, c);
        }
        Y += detail::rows(P, {{s.y}});
      }
      c.label = idx("piece", i, k);
      P.add_constraint(c);
      P.add_equalities(Y, Vec::Zero(dz), idx("sum_y", i, k));
    }
  }
  return P;
}

FiniteConvexProgram build_adb_cvx_g(const GeneralizedAmbiguitySet& A) {
  A.validate();
  const int K = A.num_components(), dz = A.dim;
  const MomentLayout ml = layout(A);
  std::vector<std::pair<int, int>> pieces;  // flat (i, k)
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < static_cast<int>(A.components[k].neg_pieces.size()); ++i) pieces.emplace_back(i, k);
  const int N = static_cast<int>(pieces.size());

  FiniteConvexProgram P;
  P.provenance = "AD-B'_g";
  P.sense = Sense::maximize;
  P.add_block("tau", "tau", N);
  P.add_block("lambda", "lambda", N, Domain::nonneg);
  for (const auto& [i, k] : pieces) {
    if (ml.omega_size > 0) P.add_block(idx("omega", i, k), "omega", ml.omega_size);
    P.add_block(idx("v", i, k), "v", dz);
  }

  for (int n = 0; n < N; ++n) P.obj_lin += unit(P, "tau", n);
  for (int k = 0; k < K; ++k) {
    Vec row = P.zero_lin();
    for (int n = 0; n < N; ++n)
      if (pieces[n].second == k) row += unit(P, "lambda", n);
    P.add_equality(row, A.components[k].prob, idx("sum_lambda", k));
  }

  for (std::size_t j = 0; j < A.moments.size(); ++j) {
    const auto& cm = A.moments[j];
    const int off = ml.omega_offset[j];
    if (is_orthant(cm.cone)) {
      for (int r = 0; r < cm.cone.dim; ++r) {
        Constraint c;
        c.lin = P.zero_lin();
        for (const auto& [i, k] : pieces) c.lin += unit(P, idx("omega", i, k), off + r);
        c.c0 = -cm.mu[r];
        c.label = idx("moment", static_cast<int>(j), r);
        P.add_constraint(c);
      }
    } else {
      // || mu_h - sum omega_h || <= mu_t - sum omega_t
      const int h = cm.cone.dim - 1;
      Mat M = Mat::Zero(h, P.num_vars);
      Constraint c;
      c.lin = P.zero_lin();
      for (const auto& [i, k] : pieces) {
        const int base = P.block(idx("omega", i, k)).offset + off;
        for (int q = 0; q < h; ++q) M(q, base + q) = -1;
        c.lin[base + h] += 1;
      }
      c.terms.push_back(P.term(norm_power(h, 1.0), M, cm.mu.head(h)));
      c.c0 = -cm.mu[h];
      c.label = idx("moment", static_cast<int>(j));
      P.add_constraint(c);
    }
  }

  for (int n = 0; n < N; ++n) {
    const auto [i, k] = pieces[n];
    const auto& comp = A.components[k];
    const std::string vb = idx("v", i, k);
    const std::vector<Sel> vl{{vb}, {"lambda", n, 1}};
    // || H v + lambda a + shift || term over (v, lambda)
    auto head_term = [&](const CConvexFunction& f, double sign, Constraint& c, const std::string& om, int om_off) {
      const int h = f.cone.dim - 1;
      Mat M = Mat::Zero(h, P.num_vars);
      const int vo = P.block(vb).offset, lo = P.block("lambda").offset + n;
      for (int q = 0; q < h; ++q) {
        for (int r = 0; r < dz; ++r) M(q, vo + r) = sign * f.A(q, r);
        M(q, lo) = sign * f.a[q];
        if (!om.empty()) M(q, P.block(om).offset + om_off + q) = 1;
      }
      c.terms.push_back(P.term(norm_power(h, 1.0), M, Vec::Zero(h)));
      c.terms.push_back(make_term(P, perspective(f.tail), vl));
    };

    int s = 0;
    for (const auto& cf : comp.constraints) {
      if (is_orthant(cf.cone)) {
        for (int r = 0; r < cf.cone.dim; ++r, ++s) {
          Constraint c;
          c.terms.push_back(make_term(P, perspective(cf.components[r]), vl));
          c.lin = P.zero_lin();
          c.label = idx("support", i, s, k);
          P.add_constraint(c);
        }
      } else {
        Constraint c;
        c.lin = P.zero_lin();
        head_term(cf, 1.0, c, "", 0);
        c.label = idx("support", i, s++, k);
        P.add_constraint(c);
      }
    }
    for (std::size_t j = 0; j < A.moments.size(); ++j) {
      const CConvexFunction& hf = A.moments[j].h[k];
      const int off = ml.omega_offset[j];
      const std::string om = idx("omega", i, k);
      if (is_orthant(hf.cone)) {
        for (int r = 0; r < hf.cone.dim; ++r) {
          Constraint c;
          c.terms.push_back(make_term(P, perspective(hf.components[r]), vl));
          c.lin = -unit(P, om, off + r);
          c.label = idx("omega", i, off + r, k);
          P.add_constraint(c);
        }
      } else {
        Constraint c;
        c.lin = -unit(P, om, off + hf.cone.dim - 1);
        head_term(hf, -1.0, c, om, off);
        c.label = idx("omega", i, off, k);
        P.add_constraint(c);
      }
    }
    Constraint c;
    c.terms.push_back(make_term(P, perspective(comp.neg_pieces[i]), vl));
    c.lin = unit(P, "tau", n);
    c.label = idx("tau", i, k);
    P.add_constraint(c);
  }
  return P;
}

}  // namespace rdro
