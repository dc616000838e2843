// Acceptance criteria, one PASS/FAIL line each. Exit status is the number of failures.

#include "rdro/driver.hpp"
#include "rdro/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace rdro;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec r(2);
  r << a, b;
  return r;
}

SaddleFunction plain(const FunctionExpr& p) { return {p, Mat(p.dim(), 0), zero_function(0)}; }
Disutility pieces(std::initializer_list<FunctionExpr> fs) {
  Disutility g;
  g.neg_pieces = fs;
  return g;
}
double val(const ExtReal& e) { return e.to_double(); }

// collects failed conditions for one criterion
struct Checker {
  bool ok = true;
  std::ostringstream why;
  void operator()(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) why << "; ";
      ok = false;
      why << what;
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& name, double time_limit, const std::function<std::string(Checker&)>& body) {
  Checker c;
  std::string info;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    info = body(c);
  } catch (const std::exception& e) {
    c(false, std::string("exception: ") + e.what());
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit > 0) c(dt < time_limit, "runtime " + std::to_string(dt) + " s over " + std::to_string(time_limit) + " s");
  if (!c.ok) ++failures;
  std::printf("%s %2d %s: %s [%.2f s]%s%s\n", c.ok ? "PASS" : "FAIL", id, name.c_str(), info.c_str(), dt,
              c.ok ? "" : " -- ", c.ok ? "" : c.why.str().c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------- instances

RobustProblem gap_instance() {
  Mat A(1, 2);
  A << -1, 0;
  RobustProblem P;
  P.objective = plain(precompose(exponential(1), A, Vec::Zero(1)));
  P.constraints = {plain(quad_over_lin(2))};
  return P;
}

RobustProblem unbounded_instance() {
  RobustProblem P;
  const Vec one = Vec::Ones(1);
  P.objective = plain(affine(one, 0));
  P.constraints = {plain(affine(one, -1)), plain(affine(-one, 1)), plain(affine(-one, 0))};
  return P;
}

// f0 = x z, f1 = x^2/2 + z, Z = R
RobustProblem nonconvex_instance() {
  RobustProblem P;
  P.objective = bi_affine(v1(0), 0, Mat::Ones(1, 1), v1(0));
  P.constraints = {SaddleFunction{norm_power(1, 2, 0.5), Mat::Zero(1, 1), affine(-v1(1), 0)}};
  P.sets = {UncertaintySet{1, {}}};
  return P;
}

AmbiguitySet moment_set(double lo, double hi) {
  AmbiguitySet A;
  A.support = box_set(v1(lo), v1(hi));
  A.moments = {{norm_power(1, 2), 1.0}};
  return A;
}

OTAmbiguity abs_ball(double eps, double p = 1) {
  OTAmbiguity O;
  O.nominal.atoms = {v1(0)};
  O.nominal.probs = {1};
  O.cost = wasserstein_cost(1, p);
  O.eps = eps;
  O.support = box_set(v1(-1), v1(1));
  return O;
}

OTPoint point_of(const OTAmbiguity& O, const Disutility& g, const OTSolve& s) {
  return read_ot_point(s.program, s.solution.x, O.num_atoms(), g.size());
}

bool no_escapes(const IndexPartition& part) {
  for (const auto& k : part.inf)
    if (!k.empty()) return false;
  return true;
}

}  // namespace

int main() {
  criterion(1, "duality gap instance", 1.0, [](Checker& c) {
    const auto r = duality_report(gap_instance());
    c(std::abs(val(r.pw_value) - 1.0) <= 1e-6, "primal value not 1 within 1e-6");
    c(std::abs(val(r.db_value)) <= 1e-6, "dual value not 0 within 1e-6");
    c(r.verdict == Verdict::weak_only, std::string("verdict ") + verdict_name(r.verdict));
    return "pw=" + to_string(r.pw_value) + " db=" + to_string(r.db_value) + " verdict=" + verdict_name(r.verdict) +
           " (tol 1e-6, limit 1 s)";
  });

  criterion(2, "unbounded dual region", 1.0, [](Checker& c) {
    const auto P = unbounded_instance();
    const auto pw = solve(build_primal_worst_cvx(P));
    const auto db_prog = build_dual_best_cvx(P);
    const auto db = solve(db_prog);
    const auto probe = unboundedness_probe(db_prog);
    c(pw.solved() && std::abs(val(pw.objective) - 1.0) <= 1e-6, "primal value not 1");
    c(pw.solved() && std::abs(pw.value("x")[0] - 1.0) <= 1e-6, "x not forced to 1");
    c(db.solved() && std::abs(val(db.objective) - 1.0) <= 1e-6, "dual value not 1 within 1e-6");
    c(probe.kind == ProbeResult::Kind::unbounded, "probe did not certify an unbounded region");
    c(probe.kind != ProbeResult::Kind::unbounded || ray_is_feasible(db_prog, probe.base, probe.ray, 1e6),
      "probe ray not feasible");
    return "pw=" + to_string(pw.objective) + " db=" + to_string(db.objective) +
           " probe=" + (probe.kind == ProbeResult::Kind::unbounded ? "unbounded" : "not unbounded") +
           " (tol 1e-6, limit 1 s)";
  });

  criterion(3, "non-convexity witness", 0, [](Checker& c) {
    const auto P = nonconvex_instance();
    const double a = val(dual_best_objective(P, {v1(1), v1(-1)}, {v1(1), v1(2)}, v1(0.5)));
    const double b = val(dual_best_objective(P, {v1(0), v1(0)}, {v1(0), v1(0)}, v1(0)));
    const double m = val(dual_best_objective(P, {v1(0.5), v1(-0.5)}, {v1(0.5), v1(1)}, v1(0.25)));
    c(a == 0.0 && b == 0.0 && m == -0.25, "quoted points do not evaluate to 0, 0, -0.25");

    // chords between feasible lifted points of the emitted program
    const auto db = build_dual_best_cvx(P);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-2, 2), pos(0.05, 2), th(0, 1);
    auto draw = [&]() {
      const double w = u(rng);
      return dual_best_lift(P, db, {v1(w), v1(-w)}, {v1(w), v1(u(rng))}, v1(pos(rng)));
    };
    int chords = 0, bad = 0;
    while (chords < 100) {
      const Vec x = draw(), y = draw();
      const double fx = val(db.objective_value(x)), fy = val(db.objective_value(y));
      if (!std::isfinite(fx) || !std::isfinite(fy) || db.max_violation(x) > 1e-7 || db.max_violation(y) > 1e-7) continue;
      const double t = th(rng);
      const Vec z = t * x + (1 - t) * y;
      const double fz = val(db.objective_value(z));
      if (db.max_violation(z) > 1e-7 || !(fz >= t * fx + (1 - t) * fy - 1e-9 * (1 + std::abs(fx) + std::abs(fy)))) ++bad;
      ++chords;
    }
    c(bad == 0, std::to_string(bad) + " chord checks failed");

    const auto r = duality_report(P);
    const bool agree = (r.pw_value.is_finite() && r.db_value.is_finite())
                           ? std::abs(val(r.pw_value) - val(r.db_value)) <= 1e-4
                           : r.pw_value == r.db_value;
    c(agree, "D-B' value differs from P-W'");
    return "points 0, 0, -0.25; " + std::to_string(chords - bad) + "/" + std::to_string(chords) +
           " chords concave; pw=" + to_string(r.pw_value) + " db=" + to_string(r.db_value) + " (tol 1e-4)";
  });

  criterion(4, "conjugate suite", 30.0, [](Checker& c) {
    const auto R = driver::conjugate_suite(driver::shipped_atoms());
    c(R.pass, std::to_string(R.failures.size()) + " suite checks failed" +
                  (R.failures.empty() ? "" : " (first: " + R.failures[0].check + " on " + R.failures[0].subject + ")"));
    // norm powers: closed form against phi(q) |w|^q and a radial search
    double worst = 0;
    for (double p : {1.0, 1.5, 2.0, 3.0, HUGE_VAL}) {
      const auto np = norm_power_conjugate(p);
      const auto cf = conjugate(norm_power(2, p)).expr;
      const double q = std::isinf(p) ? 1 : (p == 1 ? INFINITY : p / (p - 1));
      const double phi = std::isinf(q) ? 0 : std::pow(q - 1, q - 1) / std::pow(q, q);
      c(std::abs(np.q - q) <= 1e-12 || (std::isinf(q) && std::isinf(np.q)), "exponent mismatch at p=" + fmt("%g", p));
      c(std::abs(np.phi - phi) <= 1e-12, "phi mismatch at p=" + fmt("%g", p));
      for (double r : {0.25, 0.9, 1.1, 2.0}) {
        const Vec w = v2(0.6 * r, -0.8 * r);
        double ref;
        if (std::isinf(q)) {
          ref = r <= 1 ? 0 : INFINITY;
        } else {
          // sup_s r s - s^p over s >= 0
          double lo = 0, hi = 1e3;
          auto h = [&](double s) { return r * s - (std::isinf(p) ? (s <= 1 ? 0 : INFINITY) : std::pow(s, p)); };
          if (std::isinf(p)) {
            ref = r;
          } else {
            for (int i = 0; i < 400; ++i) {
              const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
              if (h(a) < h(b)) lo = a; else hi = b;
            }
            ref = h(0.5 * (lo + hi));
          }
        }
        const double got = val(eval(cf, w));
        if (std::isinf(ref)) {
          c(std::isinf(got), "p=" + fmt("%g", p) + " should be +inf outside the dual ball");
        } else {
          worst = std::max(worst, std::abs(got - ref));
          c(std::abs(got - ref) <= 1e-6 * (1 + std::abs(ref)), "p=" + fmt("%g", p) + " conjugate off at r=" + fmt("%g", r));
        }
      }
    }
    c(norm_power_conjugate(2).phi == 0.25, "phi(2) != 0.25");
    return std::to_string(driver::shipped_atoms().size()) + " atoms, " + std::to_string(R.checks) +
           " checks, max error " + fmt("%.2e", R.max_error) + "; norm powers p in {1,1.5,2,3,inf} max error " +
           fmt("%.2e", worst) + "; phi(2)=" + fmt("%g", norm_power_conjugate(2).phi) +
           " (biconjugate tol 1e-6 on 200 points, Legendre tol 1e-4, limit 30 s)";
  });

  criterion(5, "perspective closedness", 0, [](Checker& c) {
    const Vec x0 = v1(2);
    const auto d = indicator_singleton(x0);
    for (double t : {0.25, 1.0, 3.0}) {
      c(val(perspective_eval(d, t * x0, t)) == 0.0, "delta perspective not 0 at t x0");
      c(perspective_eval(d, t * x0 + v1(0.1), t).is_pos_inf(), "delta perspective finite off t x0");
    }
    c(val(perspective_eval(d, v1(0), 0)) == 0.0, "delta perspective at t=0 not delta_0 (value at 0)");
    c(perspective_eval(d, v1(1), 0).is_pos_inf(), "delta perspective at t=0 not delta_0 (value off 0)");
    const auto a = norm_power(1, 1);
    for (double x : {-3.0, 0.0, 1.5})
      for (double t : {0.0, 0.5, 2.0})
        c(val(perspective_eval(a, v1(x), t)) == std::abs(x), "|x| perspective not |x|");
    // naive limits: delta_{x0} at x = 0 stays +inf, the closure gives 0
    const auto pd = liminf_perspective_probe(d, naive_sequence(v1(0)));
    c(pd.is_pos_inf() && val(recession_value(d, v1(0))) == 0.0, "delta probe discrepancy not reproduced");
    const auto pa = liminf_perspective_probe(a, naive_sequence(v1(-3)));
    c(pa.is_finite() && val(pa) == val(recession_value(a, v1(-3))), "|x| probe does not match recession");
    const auto pq = liminf_perspective_probe(norm_power(1, 2, 0.5), naive_sequence(v1(1)));
    c(pq.is_pos_inf() && recession_value(norm_power(1, 2, 0.5), v1(1)).is_pos_inf(), "x^2/2 probe not +inf");
    return "delta_{x0} -> delta_{t x0}, t=0 gives delta_0; |x| -> |x|; probes: delta at 0 = " + to_string(pd) +
           " vs closure 0, |x| at -3 = " + to_string(pa) + ", x^2/2 at 1 = " + to_string(pq);
  });

  criterion(6, "robust strong duality, 50 random instances", 120.0, [](Checker& c) {
    const auto R = driver::duality_suite(1, 50, 1e-4);
    c(R.pass, std::to_string(R.failures.size()) + " instances failed" +
                  (R.failures.empty() ? "" : " (first: " + R.failures[0].subject + " " + R.failures[0].detail + ")"));
    c(R.max_error <= 1e-4, "max gap over 1e-4");
    return "max |pw - db| = " + fmt("%.2e", R.max_error) + " (tol 1e-4, limit 120 s)";
  });

  criterion(7, "moment sandwich", 60.0, [](Checker& c) {
    std::ostringstream info;
    struct Case {
      const char* name;
      double lo, hi;
      Disutility g;
    };
    for (const Case& k : {Case{"g=z", 0, 10, pieces({affine(v1(-1), 0)})},
                          Case{"g=|z|", -10, 10, pieces({affine(v1(-1), 0), affine(v1(1), 0)})}}) {
      const auto A = moment_set(k.lo, k.hi);
      const auto adb = build_adb_cvx(A, k.g);
      const auto p = solve(build_apw_cvx(A, k.g)), d = solve(adb);
      c(p.solved() && d.solved(), std::string(k.name) + " not solved");
      const double pv = val(p.objective), dv = val(d.objective);
      const double oracle = grid_worst_case_expectation(A, k.g, make_grid(v1(k.lo), v1(k.hi), 1e-3)).value;
      c(std::abs(pv - dv) <= 1e-4, std::string(k.name) + " AP-W'/AD-B' differ");
      c(std::abs(pv - oracle) <= std::max(1e-3, 1e-2 * std::abs(oracle)), std::string(k.name) + " off the oracle");
      const auto dist = extract_distribution(A, k.g, adb, d.x);
      bool feasible = true;
      try {
        dist.validate(&A.support);
      } catch (const Error&) {
        feasible = false;
      }
      feasible = feasible && val(dist.expect_convex(A.moments[0].h)) <= A.moments[0].mu + 1e-6;
      const double e = val(dist.expect(k.g));
      c(feasible, std::string(k.name) + " extracted distribution infeasible");
      c(std::abs(e - dv) <= 1e-4, std::string(k.name) + " extracted distribution does not attain");
      info << k.name << ": pw=" << pv << " db=" << dv << " oracle=" << oracle << " E=" << e << " atoms=" << dist.size()
           << "; ";
    }
    info << "(tol 1e-4, oracle max(1e-3, 1%), limit 60 s)";
    return info.str();
  });

  criterion(8, "OT anchor values", 60.0, [](Checker& c) {
    const auto g = pieces({affine(v1(-1), 0), affine(v1(1), 0)});
    const auto s = solve_ot_explicit(abs_ball(0.5), g);
    const double v = val(s.solution.objective);
    c(std::abs(v - 0.5) <= 1e-3, "eps=0.5 value not 0.5");
    const double oracle = grid_worst_case_expectation(abs_ball(0.5), g, make_grid(v1(-1), v1(1), 1e-3)).value;
    c(std::abs(v - oracle) <= std::max(1e-3, 1e-2 * std::abs(oracle)), "eps=0.5 off the grid oracle");

    auto O0 = abs_ball(0);
    O0.nominal.atoms = {v1(-0.5), v1(0.25)};
    O0.nominal.probs = {0.5, 0.5};
    const double nominal = val(O0.nominal.expect(g));
    const auto s0 = solve_ot_explicit(O0, g);
    const auto d0 = optimal_distribution(O0, point_of(O0, g, s0));
    c(val(d0.expect(g)) == nominal, "eps=0 distribution expectation differs from the nominal one");
    c(std::abs(val(s0.solution.objective) - nominal) <= 1e-9, "eps=0 value differs from the nominal expectation");

    double prev = -INFINITY;
    bool mono = true;
    std::ostringstream vals;
    for (int k = 0; k <= 10; ++k) {
      const double vk = val(solve(build_ot_primal_cvx(abs_ball(0.1 * k), g)).objective);
      mono = mono && vk >= prev - 1e-9;
      prev = vk;
      vals << (k ? "," : "") << fmt("%.4f", vk);
    }
    c(mono, "values not monotone in eps");
    return "eps=0.5 value " + fmt("%.9f", v) + " oracle " + fmt("%.6f", oracle) + "; eps=0 value " +
           fmt("%.12g", val(s0.solution.objective)) + " nominal " + fmt("%g", nominal) + "; eps=0..1: " + vals.str() +
           " (tol 1e-3, limit 60 s)";
  });

  criterion(9, "index partition and escapes", 0, [](Checker& c) {
    const auto gabs = pieces({affine(v1(-1), 0), affine(v1(1), 0)});
    const auto gz = pieces({affine(v1(-1), 0)});
    int bounded = 0, quad = 0;
    for (double eps : {0.0, 0.25, 0.5, 1.0, 3.0}) {
      for (double p : {1.0, 2.0}) {
        auto O = abs_ball(eps, p);
        const auto s = solve_ot_explicit(O, gabs);
        c(no_escapes(classify_indices(O, point_of(O, gabs, s))), "bounded S gave escapes");
        ++bounded;
      }
    }
    for (double eps : {0.5, 1.0, 2.0}) {
      OTAmbiguity O;
      O.nominal.atoms = {v1(0), v1(1)};
      O.nominal.probs = {0.5, 0.5};
      O.cost = wasserstein_cost(1, 2);
      O.eps = eps;
      O.support.dim = 1;
      O.support.constraints = {affine(v1(-1), 0)};
      const auto s = solve_ot_explicit(O, gz);
      c(no_escapes(classify_indices(O, point_of(O, gz, s))), "p=2 gave escapes");
      ++quad;
    }
    // g = max(0.1, z) on S = [0, inf), p = 1, eps = 1
    OTAmbiguity O;
    O.nominal.atoms = {v1(0)};
    O.nominal.probs = {1};
    O.cost = wasserstein_cost(1, 1);
    O.eps = 1;
    O.support.dim = 1;
    O.support.constraints = {affine(v1(-1), 0)};
    const auto g = pieces({affine(v1(0), -0.1), affine(v1(-1), 0)});
    const auto s = solve_ot_explicit(O, g);
    const auto pt = point_of(O, g, s);
    const auto part = classify_indices(O, pt);
    c(!no_escapes(part), "contrived instance has no escapes");
    const double value = val(s.solution.objective);
    double prev = -INFINITY, last = NAN, worst_cost = 0;
    std::ostringstream es;
    for (int n : {1, 2, 4, 8, 16}) {
      const auto d = asymptotic_distribution(O, pt, n);
      const double e = val(d.expect(g)), cost = ot_plan_cost(O, pt, n);
      worst_cost = std::max(worst_cost, cost);
      c(cost <= O.eps + 1e-9, "transport cost over eps at n=" + std::to_string(n));
      c(e >= prev - 1e-12, "E[g] decreased at n=" + std::to_string(n));
      prev = last = e;
      es << (n > 1 ? "," : "") << fmt("%.5f", e);
    }
    c(std::abs(last - value) <= 1e-2, "E[g] at n=16 not within 1e-2 of the program value");
    return std::to_string(bounded) + " bounded and " + std::to_string(quad) +
           " p=2 instances without escapes; escape instance value " + fmt("%.6f", value) + ", E[g] over n=1..16: " +
           es.str() + ", max cost " + fmt("%.6f", worst_cost) + " (tol 1e-2)";
  });

  criterion(10, "generalized specialization", 0, [](Checker& c) {
    double worst = 0;
    for (const auto& [lo, hi, g] : {std::tuple{0.0, 10.0, pieces({affine(v1(-1), 0)})},
                                    std::tuple{-10.0, 10.0, pieces({affine(v1(-1), 0), affine(v1(1), 0)})}}) {
      const auto A = moment_set(lo, hi);
      const auto G = generalize(A, g);
      const double a = val(solve(build_apw_cvx(A, g)).objective), ag = val(solve(build_apw_cvx_g(G)).objective);
      const double d = val(solve(build_adb_cvx(A, g)).objective), dg = val(solve(build_adb_cvx_g(G)).objective);
      worst = std::max({worst, std::abs(a - ag), std::abs(d - dg)});
    }
    c(worst <= 1e-9, "K=1 values differ by " + fmt("%.2e", worst));

    AmbiguitySet A;
    A.support = box_set(v1(-10), v1(10));
    A.moments = {{norm_power(1, 2), 1.0}, {affine(v1(1), 0), 0.5}};
    const auto g = pieces({affine(v1(-1), 0)});
    GeneralizedAmbiguitySet G;
    G.dim = 1;
    SupportComponent comp;
    comp.neg_pieces = g.neg_pieces;
    for (const auto& cl : A.support.constraints) comp.constraints.push_back(CConvexFunction::scalar(cl));
    G.components = {comp};
    ConeMoment cm;
    cm.cone = ProperCone::orthant(2);
    cm.mu = v2(1, 0.5);
    cm.h = {CConvexFunction::orthant({norm_power(1, 2), affine(v1(1), 0)})};
    G.moments = {cm};
    double worst2 = 0;
    worst2 = std::max(worst2, std::abs(val(solve(build_apw_cvx(A, g)).objective) - val(solve(build_apw_cvx_g(G)).objective)));
    worst2 = std::max(worst2, std::abs(val(solve(build_adb_cvx(A, g)).objective) - val(solve(build_adb_cvx_g(G)).objective)));
    c(worst2 <= 1e-9, "orthant moment differs from two scalar moments by " + fmt("%.2e", worst2));
    return "K=1 max diff " + fmt("%.2e", worst) + ", two-row orthant max diff " + fmt("%.2e", worst2) + " (tol 1e-9)";
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
