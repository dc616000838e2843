#include "common.hpp"

using namespace t;

namespace {

AmbiguitySet moment_set(double lo, double hi, double mu) {
  AmbiguitySet A;
  A.support = box_set(v1(lo), v1(hi));
  A.moments = {{norm_power(1, 2), mu}};
  return A;
}

Disutility gz() { return pieces({affine(v1(-1), 0)}); }
Disutility gabs() { return pieces({affine(v1(-1), 0), affine(v1(1), 0)}); }

double grid_value(const AmbiguitySet& A, const Disutility& g, double lo, double hi, double step) {
  return grid_worst_case_expectation(A, g, make_grid(v1(lo), v1(hi), step)).value;
}

}  // namespace

TEST_CASE("primal worst variable count") {
  // I = 1, J = 1, L = 2, dz = 1: alpha, beta, four y scalars, two nu
  const auto P = build_apw_cvx(moment_set(0, 10, 1), gz());
  CHECK(P.provenance == "AP-W'");
  CHECK(P.num_vars == 8);
  CHECK(build_adb_cvx(moment_set(0, 10, 1), gz()).provenance == "AD-B'");
}

TEST_CASE("g = z, h = z^2 on [0, 10]") {
  const auto A = moment_set(0, 10, 1);
  const auto g = gz();
  const auto pw = solve(build_apw_cvx(A, g));
  const auto adb = build_adb_cvx(A, g);
  const auto db = solve(adb);
  REQUIRE(pw.solved());
  REQUIRE(db.solved());
  const double oracle = grid_value(A, g, 0, 10, 1e-2);
  CHECK(val(pw.objective) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(val(db.objective) == doctest::Approx(val(pw.objective)).epsilon(1e-6));
  CHECK(std::abs(val(pw.objective) - oracle) <= 1e-3);
  const auto d = extract_distribution(A, g, adb, db.x);
  REQUIRE(d.size() == 1);
  CHECK(d.atoms[0][0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(d.probs[0] == doctest::Approx(1.0));
}

TEST_CASE("|z| on [-10, 10]") {
  const auto A = moment_set(-10, 10, 1);
  const auto g = gabs();
  const auto adb = build_adb_cvx(A, g);
  const auto db = solve(adb);
  REQUIRE(db.solved());
  CHECK(val(db.objective) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(val(solve(build_apw_cvx(A, g)).objective) == doctest::Approx(1.0).epsilon(1e-6));
  const auto d = extract_distribution(A, g, adb, db.x);
  CHECK_NOTHROW(d.validate(&A.support));
  CHECK(val(d.expect_convex(norm_power(1, 2))) <= 1 + 1e-6);
  CHECK(val(d.expect(g)) == doctest::Approx(1.0).epsilon(1e-5));
  for (const Vec& a : d.atoms) CHECK(std::abs(a[0]) == doctest::Approx(1.0).epsilon(1e-4));
  const auto m = jensen_merge(g, d);
  CHECK(m.size() <= 2);
  CHECK(val(m.expect(g)) >= val(d.expect(g)) - 1e-9);
}

TEST_CASE("zero moment pins the mass at the origin") {
  const auto A = moment_set(-1, 1, 0);
  const Disutility g = pieces({affine(v1(-1), -0.25)});  // g = z + 1/4
  const auto adb = build_adb_cvx(A, g);
  const auto s = solve(adb);
  REQUIRE(s.solved());
  // no strict interior here: accuracy is about the square root of the cone enlargement
  CHECK(s.note.find("no strict interior") != std::string::npos);
  CHECK(std::abs(val(s.objective) - 0.25) <= 1e-5);
  CHECK(std::abs(val(solve(build_apw_cvx(A, g)).objective) - 0.25) <= 1e-6);
  const auto d = extract_distribution(A, g, adb, s.x);
  REQUIRE(d.size() == 1);
  CHECK(std::abs(d.atoms[0][0]) <= 1e-4);
}

TEST_CASE("slater distribution check") {
  const auto A = moment_set(-1, 1, 1);
  SlaterCandidate c;
  c.weights = {0.5, 0.5};
  c.means = {v1(-0.5), v1(0.5)};
  c.moment_expectations = {1.0 / 3.0};
  c.absolutely_continuous = true;
  const auto R = slater_distribution_check(A, gabs(), c);
  CHECK(R.ok);
  CHECK(build_adb_cvx(A, gabs()).max_violation(R.adb_point) <= 1e-9);

  const auto Z = moment_set(-1, 1, 0);
  SlaterCandidate d;
  d.weights = {1.0};
  d.means = {v1(0)};
  CHECK_FALSE(slater_distribution_check(Z, pieces({affine(v1(-1), 0)}), d).ok);

  // linear moment: E[z] <= 0 holds weakly at the mean 0
  AmbiguitySet L;
  L.support = box_set(v1(-1), v1(1));
  L.moments = {{affine(v1(1), 0), 0.0}};
  CHECK(slater_distribution_check(L, pieces({affine(v1(-1), 0)}), d).moments_ok);
}

TEST_CASE("epsilon-optimal distributions") {
  const auto A = moment_set(-10, 10, 1);
  const auto g = gabs();
  const auto adb = build_adb_cvx(A, g);
  const auto s = solve(adb);
  SlaterCandidate c;
  c.weights = {0.5, 0.5};
  c.means = {v1(-0.5), v1(0.5)};
  const auto R = slater_distribution_check(A, g, c);
  REQUIRE(R.ok);
  double theta = -1;
  const auto d = epsilon_optimal_distribution(A, g, adb, s.x, R.adb_point, 0.01, &theta);
  CHECK(theta >= 0);
  CHECK(theta <= 1);
  CHECK(val(d.expect(g)) >= 1 - 0.02);
  CHECK_NOTHROW(d.validate(&A.support));
  CHECK(val(d.expect_convex(norm_power(1, 2))) <= 1 + 1e-6);
  // blending a point whose lambdas are already positive changes nothing
  double th0 = -1;
  epsilon_optimal_distribution(A, g, adb, R.adb_point, R.adb_point, 0.01, &th0);
  CHECK(th0 == 0.0);
}

TEST_CASE("assumption S") {
  const auto A = moment_set(0, 10, 1);
  const auto g = pieces({affine(v1(-1), 0), indicator_box(v1(20), v1(30))});
  std::vector<std::string> warnings;
  const auto kept = enforce_assumption_s(A, g, &warnings);
  CHECK(kept.size() == 1);
  CHECK(warnings.size() == 1);
  CHECK(nonempty_pieces(A, g) == std::vector<int>{0});
  try {
    enforce_assumption_s(A, pieces({indicator_box(v1(20), v1(30))}), nullptr);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AssumptionSViolated);
  }
}

TEST_CASE("two components with a cone moment") {
  // S1 = [-1, 0], S2 = [0.5, 2], mass 1/2 each, E z^2 <= 1: best is 0 and sqrt 2
  GeneralizedAmbiguitySet G;
  G.dim = 1;
  SupportComponent c1, c2;
  c1.prob = c2.prob = 0.5;
  c1.neg_pieces = c2.neg_pieces = {affine(v1(-1), 0)};
  c1.constraints = {CConvexFunction::scalar(affine(v1(1), 0)), CConvexFunction::scalar(affine(v1(-1), -1))};
  c2.constraints = {CConvexFunction::scalar(affine(v1(1), -2)), CConvexFunction::scalar(affine(v1(-1), 0.5))};
  G.components = {c1, c2};
  ConeMoment m;
  m.cone = ProperCone::orthant(1);
  m.mu = v1(1);
  m.h = {CConvexFunction::scalar(norm_power(1, 2)), CConvexFunction::scalar(norm_power(1, 2))};
  G.moments = {m};
  const auto p = solve(build_apw_cvx_g(G)), d = solve(build_adb_cvx_g(G));
  REQUIRE(p.solved());
  REQUIRE(d.solved());
  CHECK(val(p.objective) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  CHECK(val(d.objective) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
}

TEST_CASE("second-order cone support and moment") {
  // |z| <= 3, |E z| <= 1, g = z
  GeneralizedAmbiguitySet G;
  G.dim = 1;
  SupportComponent comp;
  comp.neg_pieces = {affine(v1(-1), 0)};
  comp.constraints = {CConvexFunction::soc(Mat::Ones(1, 1), v1(0), affine(v1(0), -3))};
  G.components = {comp};
  ConeMoment cm;
  cm.cone = ProperCone::soc(2);
  cm.mu = v2(0, 1);
  cm.h = {CConvexFunction::soc(Mat::Ones(1, 1), v1(0), zero_function(1))};
  G.moments = {cm};
  CHECK(val(solve(build_adb_cvx_g(G)).objective) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(val(solve(build_apw_cvx_g(G)).objective) == doctest::Approx(1.0).epsilon(1e-6));
  G.moments.clear();
  CHECK(val(solve(build_apw_cvx_g(G)).objective) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("generalized validation") {
  GeneralizedAmbiguitySet G;
  G.dim = 1;
  SupportComponent c;
  c.prob = 0.7;
  c.neg_pieces = {affine(v1(-1), 0)};
  G.components = {c};
  CHECK_THROWS_AS(G.validate(), Error);
}
