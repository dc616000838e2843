#include "rdro/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <cstdlib>

namespace rdro {

const char* conic_status_name(ConicStatus s) {
  switch (s) {
    case ConicStatus::optimal: return "optimal";
    case ConicStatus::inaccurate: return "inaccurate";
    case ConicStatus::infeasible: return "infeasible";
    case ConicStatus::unbounded: return "unbounded";
    case ConicStatus::stalled: return "stalled";
  }
  return "?";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kRowTol = 1e-10;

// cone rows in x-space
struct XCone {
  ConeKind kind;
  double alpha;
  Mat G;  // k x n
  Vec h;
  int source;  // index of originating model cone, -1 when synthesized
  bool alive = true;
};

struct DenseCone {
  ConeKind kind;
  double alpha;
  Mat G;  // k x nz
  Vec h;
};

struct BarrierProblem {
  int nz = 0;
  Mat Gnn;  // batched nonneg rows
  Vec hnn;
  std::vector<DenseCone> cones;
  Vec c;
  double R = 0;  // ball radius around the origin; 0 disables
};

int cone_nu(ConeKind k) {
  switch (k) {
    case ConeKind::nonneg: return 1;
    case ConeKind::soc:
    case ConeKind::rsoc: return 2;
    default: return 3;
  }
}

double total_nu(const BarrierProblem& P) {
  double nu = P.Gnn.rows();
  for (const auto& c : P.cones) nu += cone_nu(c.kind);
  if (P.R > 0) nu += 1;
  return nu;
}

bool cone_interior(ConeKind k, double alpha, const Vec& r) {
  switch (k) {
    case ConeKind::nonneg: return r[0] > 0;
    case ConeKind::soc: {
      double t = r[0];
      return t > 0 && t * t - r.tail(r.size() - 1).squaredNorm() > 0;
    }
    case ConeKind::rsoc: {
      double v = r[0], w = r[1];
      return v > 0 && w > 0 && 2 * v * w - r.tail(r.size() - 2).squaredNorm() > 0;
    }
    case ConeKind::exp: {
      double a = r[0], b = r[1], c = r[2];
      return b > 0 && c > 0 && b * std::log(c / b) - a > 0;
    }
    case ConeKind::pow: {
      double x = r[0], y = r[1], z = r[2];
      if (!(x > 0 && y > 0)) return false;
      double P = std::exp(2 * alpha * std::log(x) + (2 - 2 * alpha) * std::log(y));
      return P - z * z > 0;
    }
  }
  return false;
}

// gradient / Hessian of the cone barrier with respect to the row values
void cone_derivs(ConeKind k, double alpha, const Vec& r, Vec& g, Mat& H) {
  const int m = static_cast<int>(r.size());
  g = Vec::Zero(m);
  H = Mat::Zero(m, m);
  Vec dF = Vec::Zero(m);
  Mat d2F = Mat::Zero(m, m);
  double F = 0;
  switch (k) {
    case ConeKind::nonneg:
      g[0] = -1 / r[0];
      H(0, 0) = 1 / (r[0] * r[0]);
      return;
    case ConeKind::soc: {
      F = r[0] * r[0] - r.tail(m - 1).squaredNorm();
      dF[0] = 2 * r[0];
      dF.tail(m - 1) = -2 * r.tail(m - 1);
      d2F.diagonal().setConstant(-2);
      d2F(0, 0) = 2;
      break;
    }
    case ConeKind::rsoc: {
      F = 2 * r[0] * r[1] - r.tail(m - 2).squaredNorm();
      dF[0] = 2 * r[1];
      dF[1] = 2 * r[0];
      dF.tail(m - 2) = -2 * r.tail(m - 2);
      d2F.diagonal().setConstant(-2);
      d2F(0, 0) = 0;
      d2F(1, 1) = 0;
      d2F(0, 1) = d2F(1, 0) = 2;
      break;
    }
    case ConeKind::exp: {
      double b = r[1], c = r[2];
      F = b * std::log(c / b) - r[0];
      dF << -1, std::log(c / b) - 1, b / c;
      d2F(1, 1) = -1 / b;
      d2F(1, 2) = d2F(2, 1) = 1 / c;
      d2F(2, 2) = -b / (c * c);
      g[1] = -1 / b;
      g[2] = -1 / c;
      H(1, 1) = 1 / (b * b);
      H(2, 2) = 1 / (c * c);
      break;
    }
    case ConeKind::pow: {
      double x = r[0], y = r[1], z = r[2], a = alpha;
      double P = std::exp(2 * a * std::log(x) + (2 - 2 * a) * std::log(y));
      F = P - z * z;
      dF << 2 * a * P / x, (2 - 2 * a) * P / y, -2 * z;
      d2F(0, 0) = 2 * a * (2 * a - 1) * P / (x * x);
      d2F(1, 1) = (2 - 2 * a) * (1 - 2 * a) * P / (y * y);
      d2F(0, 1) = d2F(1, 0) = 2 * a * (2 - 2 * a) * P / (x * y);
      d2F(2, 2) = -2;
      g[0] = -(1 - a) / x;
      g[1] = -a / y;
      H(0, 0) = (1 - a) / (x * x);
      H(1, 1) = a / (y * y);
      break;
    }
  }
  g += -dF / F;
  H += -d2F / F + dF * dF.transpose() / (F * F);
}

bool problem_interior(const BarrierProblem& P, const Vec& z) {
  if (P.Gnn.rows() > 0) {
    Vec r = P.Gnn * z + P.hnn;
    if ((r.array() <= 0).any()) return false;
  }
  for (const auto& c : P.cones) {
    Vec r = c.G * z + c.h;
    if (!cone_interior(c.kind, c.alpha, r)) return false;
  }
  if (P.R > 0 && z.squaredNorm() >= P.R * P.R) return false;
  return true;
}

double cone_value(ConeKind k, double alpha, const Vec& r) {
  const int m = static_cast<int>(r.size());
  switch (k) {
    case ConeKind::nonneg: return -std::log(r[0]);
    case ConeKind::soc: return -std::log(r[0] * r[0] - r.tail(m - 1).squaredNorm());
    case ConeKind::rsoc: return -std::log(2 * r[0] * r[1] - r.tail(m - 2).squaredNorm());
    case ConeKind::exp: return -std::log(r[1] * std::log(r[2] / r[1]) - r[0]) - std::log(r[1]) - std::log(r[2]);
    case ConeKind::pow: {
      double P = std::exp(2 * alpha * std::log(r[0]) + (2 - 2 * alpha) * std::log(r[1]));
      return -std::log(P - r[2] * r[2]) - (1 - alpha) * std::log(r[0]) - alpha * std::log(r[1]);
    }
  }
  return 0;
}

// barrier value at an interior point
double barrier_value(const BarrierProblem& P, const Vec& z) {
  double v = 0;
  if (P.Gnn.rows() > 0) v -= (P.Gnn * z + P.hnn).array().log().sum();
  for (const auto& c : P.cones) v += cone_value(c.kind, c.alpha, c.G * z + c.h);
  if (P.R > 0) v -= std::log(P.R * P.R - z.squaredNorm());
  return v;
}

void barrier_derivs(const BarrierProblem& P, const Vec& z, Vec& g, Mat& H) {
  g = Vec::Zero(P.nz);
  H = Mat::Zero(P.nz, P.nz);
  if (P.Gnn.rows() > 0) {
    Vec r = P.Gnn * z + P.hnn;
    Vec w = r.cwiseInverse();
    g -= P.Gnn.transpose() * w;
    Mat S = w.asDiagonal() * P.Gnn;
    H.noalias() += S.transpose() * S;
  }
  Vec gc;
  Mat Hc;
  for (const auto& c : P.cones) {
    Vec r = c.G * z + c.h;
    cone_derivs(c.kind, c.alpha, r, gc, Hc);
    g += c.G.transpose() * gc;
    H.noalias() += c.G.transpose() * Hc * c.G;
  }
  if (P.R > 0) {
    double F = P.R * P.R - z.squaredNorm();
    g += 2 * z / F;
    H += (2 / F) * Mat::Identity(P.nz, P.nz) + (4 / (F * F)) * z * z.transpose();
  }
}

Vec newton_direction(const Mat& H, const Vec& rhs) {
  Eigen::LLT<Mat> llt(H);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  double reg = 1e-14 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
  for (int k = 0; k < 12; ++k, reg *= 100) {
    Mat Hr = H;
    Hr.diagonal().array() += reg;
    Eigen::LLT<Mat> l2(Hr);
    if (l2.info() == Eigen::Success) return l2.solve(rhs);
  }
  return Eigen::CompleteOrthogonalDecomposition<Mat>(H).solve(rhs);
}

struct BarrierRun {
  Vec z;
  double t = 1;
  int iters = 0;
  bool converged = false;
  bool stalled = false;
  bool stopped_early = false;
};

// Path following on  min c'z  over the barrier domain, from a strictly interior z.
// stop(z) lets phase I terminate as soon as a strictly feasible point shows up.
template <class Stop>
BarrierRun path_follow(const BarrierProblem& P, Vec z, double gap_tol, int max_newton, Stop stop) {
  BarrierRun run;
  const double nu = total_nu(P);
  double t = 1.0;
  {
    // scale t so that objective and barrier gradients start comparable
    Vec g;
    Mat H;
    barrier_derivs(P, z, g, H);
    double cn = P.c.norm();
    if (cn > 0) t = std::clamp(g.norm() / cn, 1e-6, 1e3);
  }
  Vec g;
  Mat H;
  for (;;) {
    int inner = 0, flat = 0;
    double best_lam = std::numeric_limits<double>::infinity();
    for (;;) {
      barrier_derivs(P, z, g, H);
      Vec grad = t * P.c + g;
      Vec dz = newton_direction(H, -grad);
      double lam2 = -grad.dot(dz);
      if (!(lam2 >= 0) || !std::isfinite(lam2)) lam2 = 0;
      double lam = std::sqrt(lam2);
      if (lam < 1e-6) break;
      // rounding floor: lambda has stopped shrinking
      if (lam < 1e-3) {
        if (lam > 0.5 * best_lam) {
          if (++flat >= 4) break;
        } else {
          flat = 0;
        }
      }
      best_lam = std::min(best_lam, lam);
      const double damped = lam > 0.25 ? 1 / (1 + lam) : 1.0;
      double alpha = 1.0;
      Vec zn = z + dz;
      int halvings = 0;
      if (lam > 0.25) {
        // backtrack on the centering objective down to the damped step
        const double f0 = t * P.c.dot(z) + barrier_value(P, z);
        while (alpha > damped) {
          if (problem_interior(P, zn) && t * P.c.dot(zn) + barrier_value(P, zn) <= f0 - 0.25 * alpha * lam2) break;
          alpha *= 0.5;
          zn = z + alpha * dz;
        }
        if (alpha <= damped) {
          alpha = damped;
          zn = z + alpha * dz;
        }
      }
      while (!problem_interior(P, zn) && halvings < 60) {
        alpha *= 0.5;
        zn = z + alpha * dz;
        ++halvings;
      }
      if (halvings >= 60) {
        run.stalled = true;
        break;
      }
      z = zn;
      ++run.iters;
      ++inner;
      if (stop(z)) {
        run.z = z;
        run.t = t;
        run.stopped_early = true;
        return run;
      }
      if (run.iters >= max_newton || inner > 300) {
        run.stalled = true;
        break;
      }
    }
    if (run.stalled) break;
    double obj = P.c.dot(z);
    if (nu / t <= gap_tol * std::max(1.0, std::abs(obj))) {
      run.converged = true;
      break;
    }
    t *= 8;
  }
  run.z = z;
  run.t = t;
  return run;
}

Vec interior_dir(ConeKind k, int m) {
  Vec e = Vec::Zero(m);
  switch (k) {
    case ConeKind::nonneg: e[0] = 1; break;
    case ConeKind::soc: e[0] = 1; break;
    case ConeKind::rsoc: e[0] = 1; e[1] = 1; break;
    case ConeKind::exp: e << -1, 1, 1; break;
    case ConeKind::pow: e << 1, 1, 0; break;
  }
  return e;
}

// ----------------------------------------------------------------- presolve

struct Presolved {
  bool infeasible = false;
  std::string why;
  Vec x0;
  Mat N;
  std::vector<XCone> cones;
};

bool row_const(const Vec& gz, double scale) { return gz.size() == 0 || gz.lpNorm<Eigen::Infinity>() <= kRowTol * scale; }

void nullspace(const Mat& E, const Vec& e, int n, Vec& x0, Mat& N, double& resid) {
  if (E.rows() == 0) {
    x0 = Vec::Zero(n);
    N = Mat::Identity(n, n);
    resid = 0;
    return;
  }
  Eigen::ColPivHouseholderQR<Mat> qr(E.transpose());
  qr.setThreshold(1e-11);
  const int r = static_cast<int>(qr.rank());
  Mat Q = qr.householderQ();
  N = Q.rightCols(n - r);
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(E);
  cod.setThreshold(1e-11);
  x0 = cod.solve(e);
  resid = (E * x0 - e).lpNorm<Eigen::Infinity>() / (1 + e.lpNorm<Eigen::Infinity>());
}

Presolved presolve(const ConicModel& m) {
  const int n = m.n;
  Presolved ps;
  std::vector<Vec> erows;
  std::vector<double> erhs;
  auto dense = [&](const Lin& l, Vec& row) -> double {
    row = Vec::Zero(n);
    for (const auto& [i, v] : l.terms) row[i] += v;
    return l.c;
  };
  for (const auto& l : m.eqs) {
    Vec row;
    double c = dense(l, row);
    erows.push_back(row);
    erhs.push_back(-c);
  }
  for (std::size_t k = 0; k < m.cones.size(); ++k) {
    const auto& cc = m.cones[k];
    XCone xc{cc.kind, cc.alpha, Mat::Zero(cc.rows.size(), n), Vec::Zero(cc.rows.size()), static_cast<int>(k)};
    for (std::size_t r = 0; r < cc.rows.size(); ++r) {
      Vec row;
      xc.h[r] = dense(cc.rows[r], row);
      xc.G.row(r) = row;
    }
    ps.cones.push_back(std::move(xc));
  }

  for (int round = 0; round < 200; ++round) {
    Mat E(erows.size(), n);
    Vec e(erows.size());
    for (std::size_t i = 0; i < erows.size(); ++i) {
      E.row(i) = erows[i];
      e[i] = erhs[i];
    }
    double resid;
    nullspace(E, e, n, ps.x0, ps.N, resid);
    if (resid > 1e-9) {
      ps.infeasible = true;
      ps.why = "inconsistent linear equalities";
      return ps;
    }
    std::vector<std::pair<Vec, double>> new_eqs;
    std::vector<XCone> new_cones;
    auto add_eq_row = [&](const XCone& c, int r) { new_eqs.emplace_back(c.G.row(r).transpose(), -c.h[r]); };
    auto nonneg_of = [&](const XCone& c, int r, double sign) {
      XCone nc{ConeKind::nonneg, 0.5, sign * c.G.row(r), Vec::Constant(1, sign * c.h[r]), -1};
      new_cones.push_back(nc);
    };

    // nonneg rows: constants and opposite pairs
    std::vector<int> nn_idx;
    std::vector<Vec> nn_gz;
    std::vector<double> nn_hz, nn_scale;
    for (std::size_t k = 0; k < ps.cones.size(); ++k) {
      XCone& c = ps.cones[k];
      if (!c.alive) continue;
      Mat Gz = c.G * ps.N;
      Vec hz = c.G * ps.x0 + c.h;
      const int rows = static_cast<int>(c.G.rows());
      std::vector<bool> cst(rows);
      std::vector<bool> zero(rows);
      bool all_const = true;
      for (int r = 0; r < rows; ++r) {
        double scale = 1 + c.G.row(r).lpNorm<Eigen::Infinity>() + std::abs(c.h[r]);
        cst[r] = row_const(Gz.row(r).transpose(), scale);
        zero[r] = cst[r] && std::abs(hz[r]) <= kRowTol * scale;
        all_const = all_const && cst[r];
      }
      if (all_const) {
        Vec val = hz;
        bool member = false;
        Vec e = interior_dir(c.kind, rows);
        // membership in the closed cone, up to a tolerance
        member = cone_interior(c.kind, c.alpha, val + 1e-9 * (1 + val.lpNorm<Eigen::Infinity>()) * e);
        if (!member) {
          ps.infeasible = true;
          ps.why = "constant cone row outside its cone";
          return ps;
        }
        c.alive = false;
        continue;
      }
      switch (c.kind) {
        case ConeKind::nonneg:
          nn_idx.push_back(static_cast<int>(k));
          nn_gz.push_back(Gz.row(0).transpose());
          nn_hz.push_back(hz[0]);
          nn_scale.push_back(1 + c.G.row(0).lpNorm<Eigen::Infinity>() + std::abs(c.h[0]));
          break;
        case ConeKind::soc:
          if (zero[0]) {
            for (int r = 1; r < rows; ++r) add_eq_row(c, r);
            c.alive = false;
          }
          break;
        case ConeKind::rsoc:
          if (zero[0] || zero[1]) {
            for (int r = 2; r < rows; ++r) add_eq_row(c, r);
            if (!zero[0]) nonneg_of(c, 0, 1);
            if (!zero[1]) nonneg_of(c, 1, 1);
            c.alive = false;
          }
          break;
        case ConeKind::exp:
          if (zero[2]) {
            add_eq_row(c, 1);
            nonneg_of(c, 0, -1);
            c.alive = false;
          } else if (zero[1]) {
            nonneg_of(c, 0, -1);
            nonneg_of(c, 2, 1);
            c.alive = false;
          }
          break;
        case ConeKind::pow:
          if (zero[0] || zero[1]) {
            add_eq_row(c, 2);
            if (!zero[0]) nonneg_of(c, 0, 1);
            if (!zero[1]) nonneg_of(c, 1, 1);
            c.alive = false;
          }
          break;
      }
    }
    if (nn_idx.size() <= 3000) {
      for (std::size_t i = 0; i < nn_idx.size(); ++i) {
        if (!ps.cones[nn_idx[i]].alive) continue;
        for (std::size_t j = i + 1; j < nn_idx.size(); ++j) {
          if (!ps.cones[nn_idx[j]].alive) continue;
          double sc = std::max(nn_scale[i], nn_scale[j]);
          if ((nn_gz[i] + nn_gz[j]).lpNorm<Eigen::Infinity>() > kRowTol * sc) continue;
          double hs = nn_hz[i] + nn_hz[j];
          if (hs < -1e-9 * sc) {
            ps.infeasible = true;
            ps.why = "opposite inequalities with empty intersection";
            return ps;
          }
          if (hs <= kRowTol * sc) {
            add_eq_row(ps.cones[nn_idx[i]], 0);
            ps.cones[nn_idx[i]].alive = false;
            ps.cones[nn_idx[j]].alive = false;
            break;
          }
        }
      }
    }
    for (auto& c : new_cones) ps.cones.push_back(std::move(c));
    if (new_eqs.empty()) {
      if (new_cones.empty()) break;
      continue;
    }
    for (auto& [row, rhs] : new_eqs) {
      erows.push_back(row);
      erhs.push_back(rhs);
    }
  }
  return ps;
}

BarrierProblem reduce(const Presolved& ps, const Vec& cx, std::vector<int>& nn_source) {
  BarrierProblem P;
  P.nz = static_cast<int>(ps.N.cols());
  P.c = ps.N.transpose() * cx;
  std::vector<Vec> nn_rows;
  std::vector<double> nn_h;
  nn_source.clear();
  for (const auto& c : ps.cones) {
    if (!c.alive) continue;
    Mat Gz = c.G * ps.N;
    Vec hz = c.G * ps.x0 + c.h;
    if (c.kind == ConeKind::nonneg) {
      nn_rows.push_back(Gz.row(0).transpose());
      nn_h.push_back(hz[0]);
      nn_source.push_back(c.source);
    } else {
      P.cones.push_back({c.kind, c.alpha, Gz, hz});
    }
  }
  P.Gnn = Mat(nn_rows.size(), P.nz);
  P.hnn = Vec(nn_rows.size());
  for (std::size_t i = 0; i < nn_rows.size(); ++i) {
    P.Gnn.row(i) = nn_rows[i];
    P.hnn[i] = nn_h[i];
  }
  return P;
}

// Phase I: (z, s) with rows + s * e in the cones and s >= -1.
struct PhaseOne {
  bool found = false;
  Vec z;
  double s_star = 0;
  int iters = 0;
};

PhaseOne phase_one(const BarrierProblem& P, double radius, double gap_tol, int max_newton) {
  PhaseOne out;
  Vec z0 = Vec::Zero(P.nz);
  if (problem_interior(P, z0)) {
    out.found = true;
    out.z = z0;
    return out;
  }
  BarrierProblem Q;
  Q.nz = P.nz + 1;
  Q.R = radius;
  const int mnn = static_cast<int>(P.Gnn.rows());
  Q.Gnn = Mat::Zero(mnn + 1, Q.nz);
  Q.hnn = Vec::Zero(mnn + 1);
  Q.Gnn.topLeftCorner(mnn, P.nz) = P.Gnn;
  Q.Gnn.block(0, P.nz, mnn, 1).setOnes();
  Q.hnn.head(mnn) = P.hnn;
  Q.Gnn(mnn, P.nz) = 1;
  Q.hnn[mnn] = 1;
  for (const auto& c : P.cones) {
    DenseCone d{c.kind, c.alpha, Mat::Zero(c.G.rows(), Q.nz), c.h};
    d.G.leftCols(P.nz) = c.G;
    d.G.col(P.nz) = interior_dir(c.kind, static_cast<int>(c.G.rows()));
    Q.cones.push_back(d);
  }
  Q.c = Vec::Zero(Q.nz);
  Q.c[P.nz] = 1;
  double s = 1;
  Vec w = Vec::Zero(Q.nz);
  for (int k = 0; k < 200; ++k) {
    w[P.nz] = s;
    if (problem_interior(Q, w)) break;
    s *= 2;
  }
  w[P.nz] = s + 1;
  if (!problem_interior(Q, w)) return out;
  BarrierRun run = path_follow(Q, w, gap_tol, max_newton, [&](const Vec& v) { return v[P.nz] < 0; });
  out.iters = run.iters;
  out.s_star = run.z[P.nz];
  out.z = run.z.head(P.nz);
  out.found = run.stopped_early && problem_interior(P, out.z);
  return out;
}

}  // namespace

ConicResult solve_conic(const ConicModel& m, const ConicOptions& opt) {
  ConicResult res;
  Presolved ps = presolve(m);
  res.nonneg_duals.assign(m.cones.size(), kNaN);
  if (ps.infeasible) {
    res.status = ConicStatus::infeasible;
    res.note = ps.why;
    return res;
  }
  Vec cx = Vec::Zero(m.n);
  for (const auto& [i, v] : m.objective.terms) cx[i] += v;
  const double c0 = m.objective.c;

  std::vector<int> nn_source;
  BarrierProblem P = reduce(ps, cx, nn_source);
  P.R = opt.ball_radius;
  auto finish = [&](const Vec& z, ConicStatus st, double t) {
    res.x = ps.x0 + ps.N * z;
    res.objective = cx.dot(res.x) + c0;
    res.status = st;
    res.gap_bound = total_nu(P) / t;
    if (opt.want_nonneg_duals && P.Gnn.rows() > 0) {
      Vec r = P.Gnn * z + P.hnn;
      for (int i = 0; i < r.size(); ++i)
        if (nn_source[i] >= 0) res.nonneg_duals[nn_source[i]] = 1 / (t * r[i]);
    }
  };

  if (P.nz == 0) {
    Vec z = Vec::Zero(0);
    bool ok = true;
    for (const auto& c : ps.cones)
      if (c.alive) ok = false;  // any surviving cone is nonconstant, impossible with nz = 0
    finish(z, ok ? ConicStatus::optimal : ConicStatus::infeasible, 1e300);
    return res;
  }
  if (P.Gnn.rows() == 0 && P.cones.empty()) {
    Vec z = Vec::Zero(P.nz);
    if (P.c.lpNorm<Eigen::Infinity>() > 1e-12 * (1 + cx.lpNorm<Eigen::Infinity>())) {
      finish(z, ConicStatus::unbounded, 1e300);
      res.objective = -std::numeric_limits<double>::infinity();
      return res;
    }
    finish(z, ConicStatus::optimal, 1e300);
    return res;
  }

  // a small ball first keeps the starting point central
  double r1 = std::min(P.R, 1e3 * (1 + P.hnn.lpNorm<Eigen::Infinity>()));
  PhaseOne p1 = phase_one(P, r1, 1e-11, opt.max_newton);
  res.iterations += p1.iters;
  if (!p1.found && r1 < P.R) {
    p1 = phase_one(P, P.R, 1e-11, opt.max_newton);
    res.iterations += p1.iters;
  }
  Vec z;
  if (p1.found) {
    z = p1.z;
  } else {
    double scale = 1 + P.hnn.lpNorm<Eigen::Infinity>();
    if (p1.s_star > opt.infeas_tol * scale) {
      res.status = ConicStatus::infeasible;
      res.note = "phase I optimum " + std::to_string(p1.s_star);
      return res;
    }
    // feasible set without strict interior that presolve could not expose
    // smallest enlargement that puts the phase I point strictly inside
    const BarrierProblem P0 = P;
    double delta = std::max(2 * p1.s_star, 1e-14 * scale);
    z = p1.z;
    for (int k = 0; k < 12; ++k, delta *= 10) {
      P = P0;
      P.hnn.array() += delta;
      for (auto& c : P.cones) c.h += delta * interior_dir(c.kind, static_cast<int>(c.h.size()));
      if (problem_interior(P, z)) break;
    }
    res.relaxed = true;
    res.relaxation = delta;
    if (!problem_interior(P, z)) {
      res.status = ConicStatus::stalled;
      res.note = "no interior point after relaxation";
      return res;
    }
  }

  BarrierRun run = path_follow(P, z, opt.gap_tol, opt.max_newton, [](const Vec&) { return false; });
  res.iterations += run.iters;
  if (run.z.norm() >= 0.5 * P.R) {
    double obj1 = P.c.dot(run.z);
    BarrierProblem P2 = P;
    P2.R = P.R * 100;
    BarrierRun run2 = path_follow(P2, run.z, opt.gap_tol, opt.max_newton, [](const Vec&) { return false; });
    res.iterations += run2.iters;
    double obj2 = P2.c.dot(run2.z);
    if (obj2 < obj1 - 1e-6 * (1 + std::abs(obj1)) - 1.0) {
      finish(run2.z, ConicStatus::unbounded, run2.t);
      res.objective = -std::numeric_limits<double>::infinity();
      return res;
    }
  }
  ConicStatus st = ConicStatus::optimal;
  if (!run.converged) st = run.iters > 0 ? ConicStatus::inaccurate : ConicStatus::stalled;
  if (res.relaxed) st = ConicStatus::inaccurate;
  finish(run.z, st, run.t);
  return res;
}

}  // namespace rdro
