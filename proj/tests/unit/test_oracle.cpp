#include "common.hpp"

using namespace t;

TEST_CASE("grid legendre") {
  CHECK(grid_legendre(norm_power(1, 2, 0.5), v1(-5), v1(5), 1e-3, v1(1)) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(grid_legendre(norm_power(1, 1), v1(-5), v1(5), 1e-3, v1(0.5))) <= 1e-9);
  const double small = grid_legendre(norm_power(1, 1), v1(-5), v1(5), 1e-3, v1(2));
  const double large = grid_legendre(norm_power(1, 1), v1(-50), v1(50), 1e-2, v1(2));
  CHECK(small == doctest::Approx(5.0));
  CHECK(large > 5 * small);
  CHECK(std::isinf(grid_legendre(indicator_singleton(v1(0.123456)), v1(-1), v1(1), 0.1, v1(1))));
}

TEST_CASE("grid refinement never lowers a maximization oracle") {
  AmbiguitySet A;
  A.support = box_set(v1(0), v1(10));
  A.moments = {{norm_power(1, 2), 1.0}};
  const auto g = pieces({affine(v1(-1), 0), affine(v1(0.5), -0.3)});
  // nested grids: every coarse point is a fine point
  double prev = -INFINITY;
  for (double step : {0.4, 0.2, 0.1, 0.05}) {
    const double v = grid_worst_case_expectation(A, g, make_grid(v1(0), v1(10), step)).value;
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
  CHECK(prev <= 1 + 1e-9);
}

TEST_CASE("moment oracle") {
  AmbiguitySet A;
  A.support = box_set(v1(0), v1(10));
  A.moments = {{norm_power(1, 2), 1.0}};
  const auto r = grid_worst_case_expectation(A, pieces({affine(v1(-1), 0)}), make_grid(v1(0), v1(10), 1e-3));
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-6));
  double mass = 0;
  for (double m : r.masses) mass += m;
  CHECK(mass == doctest::Approx(1.0));
  AmbiguitySet B = A;
  B.moments = {{norm_power(1, 2), -1.0}};
  try {
    grid_worst_case_expectation(B, pieces({affine(v1(-1), 0)}), make_grid(v1(0), v1(1), 0.1));
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LPInfeasible);
  }
}

TEST_CASE("grid sup") {
  const auto f = bi_affine(v1(0), 0, m1(1), v1(0));
  const auto Z = box_set(v1(-1), v1(1));
  const auto grid = make_grid(v1(-2), v1(2), 1e-3);
  CHECK(grid_sup(f, v1(1), Z, grid) == doctest::Approx(1.0));
  CHECK(grid_sup(f, v1(0), Z, grid) == 0.0);
  // x z - z^2 at x = 0.7: max at z = 0.35
  const SaddleFunction q{zero_function(1), m1(1), norm_power(1, 2)};
  CHECK(grid_sup(q, v1(0.7), Z, grid) == doctest::Approx(0.1225).epsilon(1e-4));
  try {
    grid_sup(f, v1(1), box_set(v1(5), v1(6)), grid);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyGridFeasible);
  }
}

TEST_CASE("liminf perspective probes") {
  // singleton: the naive limit is +inf while the recession function is 0 at 0
  CHECK(liminf_perspective_probe(indicator_singleton(v1(2)), naive_sequence(v1(1))).is_pos_inf());
  CHECK(val(recession_value(indicator_singleton(v1(2)), v1(0))) == 0.0);
  CHECK(val(liminf_perspective_probe(norm_power(1, 1), naive_sequence(v1(-3)))) == doctest::Approx(3.0));
  CHECK(liminf_perspective_probe(norm_power(1, 2, 0.5), naive_sequence(v1(1))).is_pos_inf());
  CHECK(recession_value(norm_power(1, 2, 0.5), v1(1)).is_pos_inf());
}

TEST_CASE("grid size guard") {
  CHECK_THROWS_AS(make_grid(v2(0, 0), v2(1, 1), 1e-4, 1000), Error);
  CHECK(make_grid(v1(0), v1(1), 0.25).size() == 5);
}
