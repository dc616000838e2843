#include "rdro/oracle.hpp"

#include "builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rdro {

using detail::unit;

std::vector<Vec> make_grid(const Vec& lo, const Vec& hi, double step, std::size_t max_points) {
  check_dim(hi.size(), lo.size(), "grid bounds");
  if (lo.size() < 1 || lo.size() > 2) throw Error(ErrorKind::InvalidArgument, "grids are 1-d or 2-d");
  if (!(step > 0)) throw Error(ErrorKind::InvalidArgument, "grid step must be positive");
  std::vector<int> counts;
  std::size_t total = 1;
  for (int d = 0; d < lo.size(); ++d) {
    if (!(hi[d] >= lo[d]) || !std::isfinite(lo[d]) || !std::isfinite(hi[d]))
      throw Error(ErrorKind::InvalidArgument, "grid window must be a finite box");
    counts.push_back(static_cast<int>(std::floor((hi[d] - lo[d]) / step + 1e-9)) + 1);
    total *= counts.back();
  }
  if (total > max_points) throw Error(ErrorKind::InvalidArgument, "grid too large");
  std::vector<Vec> out;
  out.reserve(total);
  if (lo.size() == 1) {
    for (int a = 0; a < counts[0]; ++a) out.push_back(Vec::Constant(1, lo[0] + a * step));
  } else {
    for (int a = 0; a < counts[0]; ++a)
      for (int b = 0; b < counts[1]; ++b) {
        Vec z(2);
        z << lo[0] + a * step, lo[1] + b * step;
        out.push_back(z);
      }
  }
  return out;
}

double grid_legendre(const FunctionExpr& f, const Vec& lo, const Vec& hi, double step, const Vec& w) {
  check_dim(w.size(), f.dim(), "legendre slope");
  double best = -INFINITY;
  for (const Vec& x : make_grid(lo, hi, step)) {
    ExtReal v = eval(f, x);
    if (v.is_pos_inf()) continue;
    if (v.is_neg_inf()) return INFINITY;
    best = std::max(best, w.dot(x) - v.value());
  }
  return best;
}

namespace {

// min p'alpha + mu'beta  s.t.  alpha_k + H_n' beta >= g_n for every row n of atom k, beta >= 0
struct GridRow {
  Vec z;
  int k;
  double g;
  Vec H;
};

GridLPResult solve_grid_lp(const std::vector<GridRow>& rows, const Vec& p, const Vec& mu, const Tolerances& tol) {
  const int K = static_cast<int>(p.size()), J = static_cast<int>(mu.size());
  for (int k = 0; k < K; ++k)
    if (std::none_of(rows.begin(), rows.end(), [k](const GridRow& r) { return r.k == k; }))
      throw Error(ErrorKind::LPInfeasible, "grid misses the feasible region");

  Tolerances lp_tol = tol;
  lp_tol.feas_tol = tol.feas_tol / 10;
  FiniteConvexProgram D;
  D.provenance = "grid LP dual";
  D.add_block("alpha", "alpha", K);
  if (J > 0) D.add_block("beta", "beta", J, Domain::nonneg);
  for (int k = 0; k < K; ++k) D.obj_lin += unit(D, "alpha", k, p[k]);
  for (int j = 0; j < J; ++j) D.obj_lin += unit(D, "beta", j, mu[j]);
  for (const auto& r : rows) {
    Constraint c;
    c.lin = -unit(D, "alpha", r.k);
    for (int j = 0; j < J; ++j) c.lin[D.block("beta").offset + j] = -r.H[j];
    c.c0 = r.g;
    D.add_constraint(c);
  }
  Solution s = solve(D, lp_tol);
  if (s.status == Status::unbounded || s.status == Status::infeasible)
    throw Error(ErrorKind::LPInfeasible, "no grid distribution meets the constraints");
  if (!s.solved()) throw Error(ErrorKind::SolverFailure, "grid LP did not converge: " + s.note);

  GridLPResult out;
  out.value = s.objective.value();

  // masses: restricted primal on the near-active rows
  std::vector<double> slack(rows.size());
  for (std::size_t n = 0; n < rows.size(); ++n) slack[n] = -(rows[n].g + s.x.dot(D.constraints[n].lin));
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return slack[a] < slack[b]; });
  std::vector<std::size_t> active;
  std::vector<int> per_k(K, 0);
  for (std::size_t n : order) {
    const double cut = 1e-5 * (1 + std::abs(rows[n].g));
    if (slack[n] > cut && per_k[rows[n].k] > 0) continue;
    if (per_k[rows[n].k] >= 64) continue;
    ++per_k[rows[n].k];
    active.push_back(n);
  }
  FiniteConvexProgram P;
  P.provenance = "grid LP primal";
  P.sense = Sense::maximize;
  P.add_block("m", "m", static_cast<int>(active.size()), Domain::nonneg);
  const int off = P.block("m").offset;
  for (std::size_t a = 0; a < active.size(); ++a) P.obj_lin[off + a] = rows[active[a]].g;
  for (int k = 0; k < K; ++k) {
    Vec row = P.zero_lin();
    for (std::size_t a = 0; a < active.size(); ++a)
      if (rows[active[a]].k == k) row[off + a] = 1;
    P.add_equality(row, p[k]);
  }
  for (int j = 0; j < J; ++j) {
    Constraint c;
    c.lin = P.zero_lin();
    for (std::size_t a = 0; a < active.size(); ++a) c.lin[off + a] = rows[active[a]].H[j];
    c.c0 = -mu[j];
    P.add_constraint(c);
  }
  Solution m = solve(P, lp_tol);
  if (!m.solved()) return out;
  for (std::size_t a = 0; a < active.size(); ++a) {
    const double mass = m.x[off + a];
    if (mass <= tol.zero_tol) continue;
    out.points.push_back(rows[active[a]].z);
    out.masses.push_back(mass);
    out.source.push_back(rows[active[a]].k);
  }
  return out;
}

}  // namespace

GridLPResult grid_worst_case_expectation(const AmbiguitySet& A, const Disutility& g, const std::vector<Vec>& grid,
                                         const Tolerances& tol) {
  A.validate();
  g.validate();
  const int J = A.num_moments();
  std::vector<GridRow> rows;
  for (const Vec& z : grid) {
    check_dim(z.size(), A.dim(), "grid point");
    if (!A.support.contains(z, tol.feas_tol)) continue;
    ExtReal gz = g.eval(z);
    if (!gz.is_finite()) continue;
    Vec H(J);
    bool ok = true;
    for (int j = 0; j < J && ok; ++j) {
      ExtReal h = eval(A.moments[j].h, z);
      ok = h.is_finite();
      if (ok) H[j] = h.value();
    }
    if (ok) rows.push_back({z, 0, gz.value(), H});
  }
  Vec mu(J);
  for (int j = 0; j < J; ++j) mu[j] = A.moments[j].mu;
  return solve_grid_lp(rows, Vec::Ones(1), mu, tol);
}

GridLPResult grid_worst_case_expectation(const OTAmbiguity& O, const Disutility& g, const std::vector<Vec>& grid,
                                         const Tolerances& tol) {
  O.validate(tol.feas_tol);
  g.validate();
  const int K = O.num_atoms();
  std::vector<Vec> pts = grid;
  for (const Vec& zk : O.nominal.atoms) pts.push_back(zk);
  std::vector<GridRow> rows;
  for (const Vec& z : pts) {
    check_dim(z.size(), O.dim(), "grid point");
    if (!O.support.contains(z, tol.feas_tol)) continue;
    ExtReal gz = g.eval(z);
    if (!gz.is_finite()) continue;
    for (int k = 0; k < K; ++k) {
      ExtReal d = O.cost.eval(z, O.nominal.atoms[k]);
      if (!d.is_finite()) continue;
      if (O.eps == 0 && d.value() > 0) continue;
      rows.push_back({z, k, gz.value(), Vec::Constant(1, d.value())});
    }
  }
  Vec p = Eigen::Map<const Vec>(O.nominal.probs.data(), K);
  if (O.eps > 0) return solve_grid_lp(rows, p, Vec::Constant(1, O.eps), tol);

  // zero radius: mass stays where the cost vanishes
  GridLPResult out;
  out.value = 0;
  for (int k = 0; k < K; ++k) {
    const GridRow* best = nullptr;
    for (const auto& r : rows)
      if (r.k == k && (!best || r.g > best->g)) best = &r;
    if (!best) throw Error(ErrorKind::LPInfeasible, "grid misses the feasible region");
    out.value += p[k] * best->g;
    out.points.push_back(best->z);
    out.masses.push_back(p[k]);
    out.source.push_back(k);
  }
  return out;
}

double grid_sup(const SaddleFunction& f, const Vec& x, const UncertaintySet& Z, const std::vector<Vec>& grid,
                double feas_tol) {
  double best = -INFINITY;
  bool any = false;
  for (const Vec& z : grid) {
    if (!Z.contains(z, feas_tol)) continue;
    any = true;
    ExtReal v = f.eval(x, z);
    if (v.is_pos_inf()) return INFINITY;
    if (v.is_finite()) best = std::max(best, v.value());
  }
  if (!any) throw Error(ErrorKind::EmptyGridFeasible, "no grid point lies in the set");
  return best;
}

std::vector<std::pair<Vec, double>> naive_sequence(const Vec& x, int n) {
  std::vector<std::pair<Vec, double>> out;
  for (int k = 1; k <= n; ++k) out.emplace_back(x, std::ldexp(1.0, -k));
  return out;
}

ExtReal liminf_perspective_probe(const FunctionExpr& f, const std::vector<std::pair<Vec, double>>& seq) {
  ExtReal best = ExtReal::pos_inf();
  std::vector<ExtReal> tail;
  for (std::size_t k = seq.size() / 2; k < seq.size(); ++k) {
    const auto& [x, t] = seq[k];
    if (!(t > 0)) throw Error(ErrorKind::InvalidArgument, "probe needs t > 0");
    tail.push_back(ext_scale(t, eval(f, x / t)));
    best = std::min(best, tail.back());
  }
  // a tail that only climbs, by three orders of magnitude, is read as divergence
  if (tail.size() >= 2 && tail.front().is_finite() && tail.back().is_finite()) {
    bool climbing = true;
    for (std::size_t k = 1; k < tail.size(); ++k) climbing = climbing && tail[k - 1] <= tail[k];
    if (climbing && tail.back().value() >= 1e3 * std::max(1.0, std::abs(tail.front().value())))
      return ExtReal::pos_inf();
  }
  return best;
}

}  // namespace rdro
