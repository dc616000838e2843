#include "common.hpp"

using namespace t;

namespace {

Disutility gabs() { return pieces({affine(v1(-1), 0), affine(v1(1), 0)}); }

OTAmbiguity abs_ball(double eps, double p = 1) {
  OTAmbiguity O;
  O.nominal.atoms = {v1(0)};
  O.nominal.probs = {1};
  O.cost = wasserstein_cost(1, p);
  O.eps = eps;
  O.support = box_set(v1(-1), v1(1));
  return O;
}

OTAmbiguity halfline(double eps) {
  OTAmbiguity O;
  O.nominal.atoms = {v1(0)};
  O.nominal.probs = {1};
  O.cost = wasserstein_cost(1, 1);
  O.eps = eps;
  O.support.dim = 1;
  O.support.constraints = {affine(v1(-1), 0)};
  return O;
}

OTPoint point_of(const OTAmbiguity& O, const Disutility& g, const OTSolve& s) {
  return read_ot_point(s.program, s.solution.x, O.num_atoms(), g.size());
}

}  // namespace

TEST_CASE("cost conjugates") {
  // p = 1: y zhat on the unit dual ball
  const auto c1 = wasserstein_cost(1, 1).conj_at(v1(0.5));
  CHECK(val(eval(c1, v1(0.8))) == doctest::Approx(0.4));
  CHECK(eval(c1, v1(1.2)).is_pos_inf());
  // p = 2: y zhat + y^2 / 4
  const auto c2 = wasserstein_cost(1, 2).conj_at(v1(0.5));
  CHECK(val(eval(c2, v1(1))) == doctest::Approx(0.75));
  // p = inf: unit ball around zhat
  const auto ci = wasserstein_cost(1, INFINITY);
  CHECK(val(ci.eval(v1(1.4), v1(0.5))) == 0.0);
  CHECK(ci.eval(v1(1.6), v1(0.5)).is_pos_inf());
}

TEST_CASE("cost conjugates against the grid") {
  for (double p : {1.0, 2.0, 3.0}) {
    const auto c = wasserstein_cost(1, p);
    for (double y : {-1.0, 0.5, 1.0}) {
      const double ref = grid_legendre(c.at(v1(0.5)), v1(-5), v1(5), 1e-3, v1(y));
      const double got = val(eval(c.conj_at(v1(0.5)), v1(y)));
      CHECK(got >= ref - 1e-9);
      CHECK(got - ref <= 1e-5);
    }
  }
}

TEST_CASE("|z| anchor") {
  const auto O = abs_ball(0.5);
  const auto g = gabs();
  const auto pr = solve(build_ot_primal_cvx(O, g));
  REQUIRE(pr.solved());
  CHECK(val(pr.objective) == doctest::Approx(0.5).epsilon(1e-6));
  const auto s = solve_ot_explicit(O, g);
  CHECK(s.program.provenance == "AD-B'_OT explicit");
  CHECK(val(s.solution.objective) == doctest::Approx(0.5).epsilon(1e-6));
  const auto oracle = grid_worst_case_expectation(O, g, make_grid(v1(-1), v1(1), 1e-2));
  CHECK(oracle.value == doctest::Approx(0.5).epsilon(1e-3));
  const auto pt = point_of(O, g, s);
  const auto part = classify_indices(O, pt);
  CHECK_FALSE(part.has_escapes());
  const auto d = optimal_distribution(O, pt);
  CHECK_NOTHROW(d.validate(&O.support));
  CHECK(val(d.expect(g)) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(ot_plan_cost(O, pt) <= 0.5 + 1e-6);
}

TEST_CASE("zero radius returns the nominal expectation") {
  auto O = abs_ball(0);
  O.nominal.atoms = {v1(-0.5), v1(0.25)};
  O.nominal.probs = {0.4, 0.6};
  const auto g = gabs();
  const double nominal = 0.4 * 0.5 + 0.6 * 0.25;
  // the primal budget row has no interior at eps = 0, so only opt_tol applies there
  const auto p = solve(build_ot_primal_cvx(O, g));
  CHECK(p.solved());
  CHECK(std::abs(val(p.objective) - nominal) <= 1e-6);
  const auto s = solve_ot_explicit(O, g);
  CHECK(std::abs(val(s.solution.objective) - nominal) <= 1e-9);
  const auto d = optimal_distribution(O, point_of(O, g, s));
  CHECK(val(d.expect(g)) == nominal);
  CHECK(grid_worst_case_expectation(O, g, make_grid(v1(-1), v1(1), 1e-2)).value == doctest::Approx(nominal).epsilon(1e-9));
}

TEST_CASE("values grow with the radius") {
  const auto g = gabs();
  double prev = -INFINITY;
  for (int k = 0; k <= 10; ++k) {
    const double v = val(solve(build_ot_primal_cvx(abs_ball(0.1 * k), g)).objective);
    CHECK(v >= prev - 1e-7);
    CHECK(v == doctest::Approx(std::min(0.1 * k, 1.0)).epsilon(1e-5));
    prev = v;
  }
}

TEST_CASE("two nominal atoms with an ample budget decouple") {
  auto O = abs_ball(10);
  O.nominal.atoms = {v1(-0.5), v1(0.5)};
  O.nominal.probs = {0.3, 0.7};
  const auto g = gabs();
  CHECK(val(solve(build_ot_primal_cvx(O, g)).objective) == doctest::Approx(1.0).epsilon(1e-6));
  const auto s = solve_ot_explicit(O, g);
  CHECK(val(s.solution.objective) == doctest::Approx(1.0).epsilon(1e-6));
  const double oracle = grid_worst_case_expectation(O, g, make_grid(v1(-1), v1(1), 1e-2)).value;
  CHECK(oracle == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("quadratic cost never escapes") {
  OTAmbiguity O;
  O.nominal.atoms = {v1(0)};
  O.nominal.probs = {1};
  O.cost = wasserstein_cost(1, 2);
  O.eps = 1;
  O.support.dim = 1;
  const auto g = pieces({affine(v1(-1), 0)});
  const auto s = solve_ot_explicit(O, g);
  CHECK(val(s.solution.objective) == doctest::Approx(1.0).epsilon(1e-6));
  const auto pt = point_of(O, g, s);
  CHECK_FALSE(classify_indices(O, pt).has_escapes());
  const auto d = optimal_distribution(O, pt);
  REQUIRE(d.size() == 1);
  CHECK(d.atoms[0][0] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("escapes on a half line") {
  const auto O = halfline(1);
  const auto g = pieces({affine(v1(0), -0.1), affine(v1(-1), 0)});
  const auto s = solve_ot_explicit(O, g);
  CHECK(val(s.solution.objective) == doctest::Approx(1.1).epsilon(1e-6));
  const auto pt = point_of(O, g, s);
  REQUIRE(classify_indices(O, pt).has_escapes());
  // E[g] under P_n is 1.1 - 0.1 / n here
  double prev = -INFINITY;
  for (int n : {1, 2, 4, 8, 16}) {
    const auto d = asymptotic_distribution(O, pt, n);
    double total = 0;
    for (double q : d.probs) total += q;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const double e = val(d.expect(g));
    CHECK(e >= prev - 1e-9);
    CHECK(e == doctest::Approx(1.1 - 0.1 / n).epsilon(1e-6));
    CHECK(ot_plan_cost(O, pt, n) <= O.eps + 1e-6);
    prev = e;
  }
  CHECK_THROWS_AS(optimal_distribution(O, pt), Error);
}

TEST_CASE("piece sets") {
  const auto O = abs_ball(0.5);
  const auto g = pieces({affine(v1(-1), 0), indicator_box(v1(5), v1(6))});
  const auto I = ot_piece_sets(O, g);
  REQUIRE(I.size() == 1);
  CHECK(I[0] == std::vector<int>{0, 1});
  auto Oinf = abs_ball(0.5, INFINITY);
  CHECK(ot_piece_sets(Oinf, g)[0] == std::vector<int>{0});
}

TEST_CASE("decision problem") {
  const auto O = abs_ball(0.5);
  OTDecision D;
  D.dim = 1;
  D.pieces = {bi_affine(v1(-1), 0, Mat::Zero(1, 1), v1(1)), bi_affine(v1(1), 0, Mat::Zero(1, 1), v1(-1))};
  const auto s = solve(build_ot_primal_cvx(O, D));
  REQUIRE(s.solved());
  CHECK(val(s.objective) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(s.value("x")[0]) <= 1e-4);
}

TEST_CASE("ambiguity validation") {
  auto O = abs_ball(-1);
  CHECK_THROWS_AS(O.validate(), Error);
  O = abs_ball(0.5);
  O.nominal.probs = {0.5};
  CHECK_THROWS_AS(O.validate(), Error);
  O = abs_ball(0.5);
  O.nominal.atoms = {v1(3)};
  CHECK_THROWS_AS(O.validate(), Error);
}

TEST_CASE("primal and explicit values agree under a positive-lambda Slater point") {
  const Tolerances tol;
  const auto g = gabs();
  int strict = 0;
  for (double eps : {0.0, 0.1, 0.5, 1.0, 4.0})
    for (double p : {1.0, 2.0}) {
      auto O = abs_ball(eps, p);
      O.nominal.atoms = {v1(-0.5), v1(0.5)};
      O.nominal.probs = {0.3, 0.7};
      const auto s = solve_ot_explicit(O, g);
      const auto flag = ot_slater_flag(s.program, O.num_atoms(), g.size(), tol);
      INFO("eps " << eps << " p " << p);
      if (eps == 0.0) CHECK(flag == SlaterFlag::unknown);  // the budget row has no slack
      if (flag != SlaterFlag::strict) continue;
      ++strict;
      const auto pr = solve(build_ot_primal_cvx(O, g));
      CHECK(std::abs(val(pr.objective) - val(s.solution.objective)) <= tol.opt_tol);
    }
  CHECK(strict >= 6);
}

TEST_CASE("cost atoms grow at least linearly") {
  // line search for delta > 0 with d(z) >= delta |z| - 1 on spheres of growing radius
  for (double p : {1.0, 1.5, 2.0, 3.0})
    for (Norm nm : {Norm::l1, Norm::l2, Norm::linf}) {
      const auto c = wasserstein_cost(2, p, nm);
      const Vec o = Vec::Zero(2);
      CHECK(val(c.eval(o, o)) == 0.0);
      double delta = 1;
      auto holds = [&](double d) {
        for (double r : {0.01, 0.1, 1.0, 10.0, 100.0, 1e3})
          for (int k = 0; k < 64; ++k) {
            const double a = 2 * M_PI * k / 64;
            const Vec z = v2(r * std::cos(a), r * std::sin(a));
            if (val(c.eval(z, o)) < d * r - 1) return false;
          }
        return true;
      };
      while (delta > 1e-8 && !holds(delta)) delta /= 2;
      INFO("p " << p);
      CHECK(delta > 1e-8);
      CHECK(holds(delta));
    }
}
