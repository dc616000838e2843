#include "common.hpp"

using namespace t;

namespace {

// brute-force sup_r w r - r^p over r >= 0 (ternary search, concave)
double radial_sup(double w, double p) {
  double lo = 0, hi = 1e3;
  auto h = [&](double r) { return w * r - std::pow(r, p); };
  for (int i = 0; i < 400; ++i) {
    const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
    (h(a) < h(b) ? lo : hi) = (h(a) < h(b) ? a : b);
  }
  return h(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("eval examples") {
  Mat A(1, 2);
  A << -1, 0;
  CHECK(val(eval(precompose(exponential(1), A, Vec::Zero(1)), v2(0, 5))) == doctest::Approx(1.0));
  CHECK(eval(quad_over_lin(2), v2(1, 0)).is_pos_inf());
  CHECK(val(eval(quad_over_lin(2), v2(0, 0))) == 0.0);
  CHECK(val(eval(quad_over_lin(3), v3(1, 2, 5))) == doctest::Approx(1.0));
  CHECK(eval(indicator_box(v1(0), v1(1)), v1(2)).is_pos_inf());
  CHECK(val(eval(indicator_box(v1(0), v1(1)), v1(0.5))) == 0.0);
  CHECK(val(eval(neg_entropy(), v1(0))) == 0.0);
  CHECK(val(eval(neg_entropy(), v1(1))) == doctest::Approx(-1.0));
  CHECK(eval(neg_log(), v1(0)).is_pos_inf());
  CHECK(val(eval(norm_power(2, 1, 1, Norm::l1), v2(1, -2))) == doctest::Approx(3.0));
  CHECK(val(eval(support_of_box(v1(-1), v1(2)), v1(-3))) == doctest::Approx(3.0));
}

TEST_CASE("dimension mismatch") {
  try {
    eval(quad_over_lin(2), v1(1));
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  CHECK_THROWS_AS(scale(-1, norm_power(1, 2)), Error);
}

TEST_CASE("conjugate of exp(-x1) in two variables") {
  Mat A(1, 2);
  A << -1, 0;
  const auto c = conjugate(precompose(exponential(1), A, Vec::Zero(1))).expr;
  for (double w1 : {-0.1, -1.0, -2.0, -5.0})
    CHECK(val(eval(c, v2(w1, 0))) == doctest::Approx(-w1 * std::log(-w1) + w1).epsilon(1e-9));
  CHECK(val(eval(c, v2(0, 0))) == doctest::Approx(0.0));
  CHECK(eval(c, v2(1, 0)).is_pos_inf());
  CHECK(eval(c, v2(-1, 0.5)).is_pos_inf());
}

TEST_CASE("conjugate of quad_over_lin is an indicator") {
  const auto c = conjugate(quad_over_lin(2)).expr;
  CHECK(val(eval(c, v2(2, -1))) == doctest::Approx(0.0));
  CHECK(val(eval(c, v2(0, 0))) == doctest::Approx(0.0));
  CHECK(val(eval(c, v2(0, -3))) == doctest::Approx(0.0));
  CHECK(eval(c, v2(2, -0.9)).is_pos_inf());
  CHECK(eval(c, v2(0, 0.1)).is_pos_inf());
}

TEST_CASE("conjugate of affine") {
  const auto c = conjugate(affine(v2(1, -2), 3)).expr;
  CHECK(val(eval(c, v2(1, -2))) == doctest::Approx(-3.0));
  CHECK(eval(c, v2(1, -1.9)).is_pos_inf());
}

TEST_CASE("closed-form conjugates against analytic formulas") {
  // neg_log* (w) = -1 - log(-w), exp* (w) = w log w - w, neg_entropy* = e^w
  const auto nl = conjugate(neg_log()).expr, ex = conjugate(exponential(1)).expr, ne = conjugate(neg_entropy()).expr;
  for (double w : {0.25, 1.0, 3.0}) {
    CHECK(val(eval(nl, v1(-w))) == doctest::Approx(-1 - std::log(w)).epsilon(1e-9));
    CHECK(val(eval(ex, v1(w))) == doctest::Approx(w * std::log(w) - w).epsilon(1e-9));
    CHECK(val(eval(ne, v1(w))) == doctest::Approx(std::exp(w)).epsilon(1e-9));
  }
  CHECK(eval(nl, v1(0.5)).is_pos_inf());
  // box support is the box indicator's conjugate
  const auto sb = conjugate(indicator_box(v1(-1), v1(2))).expr;
  CHECK(val(eval(sb, v1(3))) == doctest::Approx(6.0));
  CHECK(val(eval(sb, v1(-3))) == doctest::Approx(3.0));
  // l2 ball of radius 2 around (1, 0)
  const auto bl = conjugate(indicator_norm_ball(v2(1, 0), 2)).expr;
  CHECK(val(eval(bl, v2(3, 4))) == doctest::Approx(3 + 2 * 5.0));
}

TEST_CASE("norm power conjugate constants") {
  CHECK(norm_power_conjugate(2).phi == doctest::Approx(0.25));
  CHECK(norm_power_conjugate(2).q == doctest::Approx(2.0));
  CHECK(std::isinf(norm_power_conjugate(1).q));
  CHECK(norm_power_conjugate(1).phi == 0.0);
  CHECK(norm_power_conjugate(1.5).q == doctest::Approx(3.0));
  CHECK(norm_power_conjugate(1.5).phi == doctest::Approx(4.0 / 27.0));
  CHECK(norm_power_conjugate(INFINITY).q == doctest::Approx(1.0));
}

TEST_CASE("norm power conjugates match a radial search") {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto np = norm_power_conjugate(p);
    const auto c = conjugate(norm_power(2, p)).expr;
    for (double r : {0.3, 1.0, 2.5}) {
      const double ref = radial_sup(r, p);
      CHECK(np.phi * std::pow(r, np.q) == doctest::Approx(ref).epsilon(1e-6));
      CHECK(val(eval(c, v2(0.6 * r, 0.8 * r))) == doctest::Approx(ref).epsilon(1e-6));
    }
  }
  // p = 1: dual-ball indicator; p = inf: dual norm
  const auto c1 = conjugate(norm_power(2, 1, 1, Norm::l1)).expr;
  CHECK(val(eval(c1, v2(1, -1))) == 0.0);
  CHECK(eval(c1, v2(1.01, 0)).is_pos_inf());
  const auto ci = conjugate(norm_power(2, INFINITY, 1, Norm::linf)).expr;
  CHECK(val(eval(ci, v2(1, -2))) == doctest::Approx(3.0));
}

TEST_CASE("perspective examples") {
  const auto d = indicator_singleton(v1(1));
  CHECK(val(perspective_eval(d, v1(0.5), 0.5)) == 0.0);
  CHECK(perspective_eval(d, v1(0.4), 0.5).is_pos_inf());
  CHECK(val(perspective_eval(d, v1(0), 0)) == 0.0);
  CHECK(perspective_eval(d, v1(1), 0).is_pos_inf());
  const auto a = norm_power(1, 1);
  CHECK(val(perspective_eval(a, v1(-3), 0)) == doctest::Approx(3.0));
  const auto q = norm_power(1, 2, 0.5);
  CHECK(val(perspective_eval(q, v1(1.7), 1)) == doctest::Approx(val(eval(q, v1(1.7)))));
  CHECK(val(perspective_eval(q, v1(1), 0.5)) == doctest::Approx(1.0));
  CHECK(perspective_eval(q, v1(1), 0).is_pos_inf());
  CHECK_THROWS_AS(perspective_eval(q, v1(1), -1), Error);
}

TEST_CASE("perspective expression agrees with perspective_eval") {
  const auto f = precompose(exponential(1), m1(-1), v1(0));
  const auto P = perspective(f);
  for (double x : {-1.0, 0.0, 2.0})
    for (double tt : {0.0, 0.5, 2.0}) {
      const Vec xt = v2(x, tt);
      const auto a = eval(P, xt), b = perspective_eval(f, v1(x), tt);
      REQUIRE(a.tag() == b.tag());
      if (a.is_finite()) CHECK(val(a) == doctest::Approx(val(b)));
    }
}

TEST_CASE("recession values") {
  CHECK(val(recession_value(norm_power(1, 1), v1(-3))) == doctest::Approx(3.0));
  CHECK(val(recession_value(exponential(1), v1(-1))) == 0.0);
  CHECK(recession_value(exponential(1), v1(1)).is_pos_inf());
  CHECK(val(recession_value(indicator_box(v1(0), v1(1)), v1(0))) == 0.0);
  CHECK(recession_value(indicator_box(v1(0), v1(1)), v1(1)).is_pos_inf());
  CHECK(val(recession_value(affine(v1(2), 5), v1(3))) == doctest::Approx(6.0));
}

TEST_CASE("scale conjugate") {
  const auto c = scale_conjugate(2, norm_power(1, 2, 0.5)).expr;
  for (double w : {-2.0, 0.5, 3.0}) CHECK(val(eval(c, v1(w))) == doctest::Approx(w * w / 4));
  const auto b = scale_conjugate(3, norm_power(1, 1)).expr;
  CHECK(val(eval(b, v1(2.9))) == 0.0);
  CHECK(val(eval(b, v1(-3))) == 0.0);
  CHECK(eval(b, v1(3.1)).is_pos_inf());
  try {
    scale_conjugate(0, norm_power(1, 2));
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonpositiveScale);
  }
}

TEST_CASE("perspective slice conjugate is t f*") {
  const auto c = perspective_slice_conjugate(2, norm_power(1, 2, 0.5)).expr;
  CHECK(val(eval(c, v1(3))) == doctest::Approx(9.0));
}

TEST_CASE("partial conjugates") {
  const auto xz = bi_affine(v1(0), 0, m1(1), v1(0));
  CHECK(val(partial_conjugate_1(xz, v1(0.7), v1(0.7))) == doctest::Approx(0.0));
  CHECK(partial_conjugate_1(xz, v1(0.7), v1(0.6)).is_pos_inf());
  const SaddleFunction f{norm_power(1, 2, 0.5), Mat::Zero(1, 1), affine(v1(-1), 0)};  // x^2/2 + z
  for (double w : {-1.0, 0.0, 2.0})
    for (double z : {-1.0, 3.0}) CHECK(val(partial_conjugate_1(f, v1(w), v1(z))) == doctest::Approx(w * w / 2 - z));
}

TEST_CASE("partial conjugates satisfy Fenchel-Young with equality at the gradient") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (int it = 0; it < 50; ++it) {
    Mat Q(2, 2);
    Q << n(rng), n(rng), n(rng), n(rng);
    const Vec a = v2(n(rng), n(rng));
    const SaddleFunction f{add_affine(norm_power(2, 2, 0.5), a, n(rng)), Q, norm_power(2, 2, 0.5)};
    const Vec x = v2(n(rng), n(rng)), z = v2(n(rng), n(rng)), w = v2(n(rng), n(rng)), y = v2(n(rng), n(rng));
    const double fxz = val(f.eval(x, z));
    CHECK(val(partial_conjugate_1(f, w, z)) >= w.dot(x) - fxz - 1e-9);
    CHECK(val(partial_conjugate_2(f, x, y)) >= y.dot(z) + fxz - 1e-9);
    const Vec grad = x + a + Q * z;
    CHECK(val(partial_conjugate_1(f, grad, z)) == doctest::Approx(grad.dot(x) - fxz).epsilon(1e-8));
    // and the expression forms match the pointwise ones
    Vec wz(4), xy(4);
    wz << w, z;
    xy << x, y;
    CHECK(val(eval(partial_conjugate_1_expr(f), wz)) == doctest::Approx(val(partial_conjugate_1(f, w, z))));
    CHECK(val(eval(partial_conjugate_2_expr(f), xy)) == doctest::Approx(val(partial_conjugate_2(f, x, y))));
    CHECK(val(eval(partial_conjugate_1_at(f, z), w)) == doctest::Approx(val(partial_conjugate_1(f, w, z))));
  }
}

TEST_CASE("separable sums conjugate blockwise") {
  const auto f = sum_blocks({{norm_power(1, 2, 0.5), {0}}, {norm_power(1, 1), {1}}}, 2);
  const auto c = conjugate(f).expr;
  CHECK(val(eval(c, v2(2, 0.5))) == doctest::Approx(2.0));
  CHECK(eval(c, v2(2, 1.5)).is_pos_inf());
  CHECK(val(eval(f, v2(2, -3))) == doctest::Approx(5.0));
}

TEST_CASE("shared-argument sums evaluate as sums") {
  const auto f = sum_shared({norm_power(1, 2, 0.5), exponential(1), affine(v1(2), 1)});
  for (double x : {-1.0, 0.0, 1.5}) CHECK(val(eval(f, v1(x))) == doctest::Approx(x * x / 2 + std::exp(x) + 2 * x + 1));
}

TEST_CASE("conjugate inequality against random points") {
  // f(x) + f*(w) >= w'x for every shipped atom
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-2, 2);
  for (const auto& [name, f] : driver::shipped_atoms()) {
    const auto c = conjugate(f).expr;
    for (int it = 0; it < 100; ++it) {
      Vec x(f.dim()), w(f.dim());
      for (int i = 0; i < f.dim(); ++i) x[i] = u(rng), w[i] = u(rng);
      const auto fx = eval(f, x), cw = eval(c, w);
      if (fx.is_pos_inf() || cw.is_pos_inf()) continue;
      INFO(name);
      CHECK(val(fx) + val(cw) >= w.dot(x) - 1e-9);
    }
  }
}

TEST_CASE("structure flags") {
  CHECK(is_affine_expr(affine(v1(1), 0)));
  CHECK_FALSE(is_affine_expr(norm_power(1, 2)));
  CHECK(is_nonnegative(norm_power(1, 2)));
  CHECK(has_full_domain(exponential(1)));
  CHECK_FALSE(has_full_domain(neg_log()));
  CHECK(max_of_concave({affine(v1(1), 0)}).convex() == false);
}
