#include "common.hpp"

using namespace t;

namespace {

FiniteConvexProgram one_var(const Vec& obj) {
  FiniteConvexProgram P;
  P.add_block("x", "x", static_cast<int>(obj.size()));
  P.obj_lin = obj;
  return P;
}

void add_lin(FiniteConvexProgram& P, const Vec& a, double c0) {
  Constraint c;
  c.lin = a;
  c.c0 = c0;
  P.add_constraint(c);
}

}  // namespace

TEST_CASE("linear program") {
  auto P = one_var(v1(1));
  add_lin(P, v1(-1), 1);  // x >= 1
  const auto s = solve(P);
  REQUIRE(s.solved());
  CHECK(val(s.objective) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.max_violation <= 1e-7);
}

TEST_CASE("gap instance primal") {
  FiniteConvexProgram P;
  P.add_block("x", "x", 2);
  Mat A(1, 2);
  A << -1, 0;
  P.obj_terms.push_back(P.term(precompose(exponential(1), A, Vec::Zero(1)), {"x"}));
  Constraint c;
  c.terms.push_back(P.term(quad_over_lin(2), {"x"}));
  P.add_constraint(c);
  const auto s = solve(P);
  REQUIRE(s.solved());
  CHECK(val(s.objective) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("infeasible and unbounded programs") {
  auto P = one_var(v1(1));
  add_lin(P, v1(1), 1);   // x <= -1
  add_lin(P, v1(-1), 1);  // x >= 1
  CHECK(solve(P).status == Status::infeasible);
  auto U = one_var(v1(1));
  add_lin(U, v1(1), 0);  // x <= 0, minimize x
  const auto s = solve(U);
  CHECK(s.status == Status::unbounded);
  CHECK(s.objective.is_neg_inf());
}

TEST_CASE("maximize sense") {
  auto P = one_var(v1(1));
  P.sense = Sense::maximize;
  P.obj_terms.push_back(P.term(norm_power(1, 2, 0.5), {"x"}));  // max x - x^2/2
  const auto s = solve(P);
  REQUIRE(s.solved());
  CHECK(val(s.objective) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("feasibility") {
  auto box = box_set(v1(-1), v1(1)).as_program();
  auto f = feasibility(box);
  CHECK(f.kind == FeasibilityResult::Kind::feasible);
  CHECK(box.max_violation(f.point) <= 1e-7);
  auto P = one_var(v1(0));
  add_lin(P, v1(1), 1);
  add_lin(P, v1(-1), 1);
  CHECK(feasibility(P).kind == FeasibilityResult::Kind::infeasible);
  const auto sq = UncertaintySet{1, {norm_power(1, 2)}}.as_program();
  CHECK(feasibility(sq).kind == FeasibilityResult::Kind::inconclusive);
}

TEST_CASE("slater search on programs") {
  const auto box = box_set(v1(-1), v1(1)).as_program();
  const auto s = slater_search(box);
  CHECK(s.strict(Tolerances{}));
  CHECK(s.margin == doctest::Approx(1.0).epsilon(1e-6));
  const auto sq = UncertaintySet{1, {norm_power(1, 2)}}.as_program();
  CHECK_FALSE(slater_search(sq).strict(Tolerances{}));
}

TEST_CASE("unboundedness probe") {
  CHECK(unboundedness_probe(box_set(v1(-1), v1(1)).as_program()).kind == ProbeResult::Kind::bounded);
  const auto half = UncertaintySet{1, {affine(v1(-1), 0)}}.as_program();
  const auto r = unboundedness_probe(half);
  REQUIRE(r.kind == ProbeResult::Kind::unbounded);
  CHECK(r.ray[0] > 0);
  CHECK(ray_is_feasible(half, r.base, r.ray, 1e6));
  CHECK_FALSE(ray_is_feasible(half, v1(0), v1(-1), 1e6));
}

TEST_CASE("solves are deterministic") {
  AmbiguitySet A;
  A.support = box_set(v1(-10), v1(10));
  A.moments = {{norm_power(1, 2), 1.0}};
  const auto P = build_adb_cvx(A, pieces({affine(v1(-1), 0), affine(v1(1), 0)}));
  const auto a = solve(P), b = solve(P);
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("starved iteration budget is reported as stalled") {
  AmbiguitySet A;
  A.support = box_set(v1(0), v1(10));
  A.moments = {{norm_power(1, 2), 1.0}};
  SolverOptions o;
  o.max_newton = 1;
  const auto s = solve(build_apw_cvx(A, pieces({affine(v1(-1), 0)})), {}, o);
  CHECK_FALSE(s.solved());
}

TEST_CASE("program validation") {
  FiniteConvexProgram P;
  P.add_block("x", "x", 2);
  P.obj_lin = v1(1);
  CHECK_THROWS_AS(P.validate(), Error);
}
