#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "caloric/gaussian.hpp"
#include "caloric/oracles.hpp"
#include "caloric/quadrature.hpp"
#include "caloric/special.hpp"

using namespace caloric;
using Catch::Approx;

namespace {
const double kTwoSqrtPi = 2.0 * std::sqrt(kPi);  // (4 pi)^{1/2}
}

TEST_CASE("grid invariants are enforced") {
  REQUIRE_NOTHROW(make_grid(1, 6.0, 0.05, 1.0, 0.01));
  REQUIRE_THROWS_AS(make_grid(1, 6.0, 0.07, 1.0, 0.01), Error);  // L/h not int
  REQUIRE_THROWS_AS(make_grid(1, 6.0, 0.05, 1.0, 0.03), Error);  // T/dt not int
  REQUIRE_THROWS_AS(make_grid(4, 6.0, 0.05, 1.0, 0.01), Error);
  const SpaceTimeGrid g = make_grid(2, 2.0, 0.5, 1.0, 0.25);
  REQUIRE(g.nodes_per_dim() == 9);
  REQUIRE(g.node_count() == 81);
  REQUIRE(g.time_count() == 5);
  REQUIRE(g.coord(0) == Approx(-2.0));
  REQUIRE(g.coord(8) == Approx(2.0));
}

TEST_CASE("half-integer incomplete gamma against closed forms") {
  // Q(1/2, x) = erfc(sqrt(x)); Q(1, x) = exp(-x); Q(3/2, x) by recurrence.
  for (double x : {0.1, 0.5, 2.0, 10.0}) {
    REQUIRE(gamma_q_half(1, x) == Approx(std::erfc(std::sqrt(x))).epsilon(1e-14));
    REQUIRE(gamma_q_half(2, x) == Approx(std::exp(-x)).epsilon(1e-14));
    const double q3 = std::erfc(std::sqrt(x)) +
                      2.0 * std::sqrt(x / kPi) * std::exp(-x);
    REQUIRE(gamma_q_half(3, x) == Approx(q3).epsilon(1e-13));
  }
  for (int k : {1, 2, 3, 5, 7}) {
    const double x = gamma_q_inv_half(k, 1e-6);
    REQUIRE(gamma_q_half(k, x) == Approx(1e-6).epsilon(1e-9));
  }
}

TEST_CASE("effective radius: erfc root, tol=1 edge and sqrt(s) scaling") {
  // tol = 1 allows the whole mass as tail
  REQUIRE(effective_radius(1, 1.0, 0.0, 1.0) == 0.0);

  // n=1, s=1, tol=1e-6: the root of erfc(R/2) = 1e-6. Frozen from the
  // complementary-error-function oracle, R = 2*erfcinv(1e-6).
  const double R = effective_radius(1, 1.0, 0.0, 1e-6);
  REQUIRE(std::erfc(R / 2.0) == Approx(1e-6).epsilon(1e-9));
  REQUIRE(R == Approx(6.91782147455900).epsilon(1e-10));

  // doubling s quadruples nothing: R scales exactly as sqrt(s)
  const double R4 = effective_radius(1, 4.0, 0.0, 1e-6);
  REQUIRE(R4 == Approx(2.0 * R).epsilon(1e-12));
  const double Rt = effective_radius(1, 1.0, 3.0, 1e-6);  // s = t + a = 4
  REQUIRE(Rt == Approx(R4).epsilon(1e-12));

  // monotone nondecreasing in 1/tol
  REQUIRE(effective_radius(2, 1.0, 0.0, 1e-8) >
          effective_radius(2, 1.0, 0.0, 1e-4));
}

TEST_CASE("weighted integral of the bare kernel is (4 pi)^{n/2}") {
  // quadrature self-test at several (t, a) in every dimension; constants
  // declare a flat growth envelope
  for (int n : {1, 2, 3}) {
    const SpaceTimeGrid g = make_grid(n, 6.0, n == 3 ? 0.2 : 0.1, 1.0, 0.25);
    for (double a : {0.04, 0.25}) {
      for (double t : {0.0, 0.25}) {
        GaussianWeight w{n, {0, 0, 0}, a};
        const FieldSlice one = constant_slice(n, 1.0, &g, t);
        const auto q = weighted_integral(one, w,
                                         Integrand::f_squared().with_envelope(0));
        // relative defect is bounded by the declared truncation tolerance,
        // or by the returned estimate when the box clips the radius
        const double exact = GaussianWeight::total_mass(n);
        REQUIRE(std::abs(q.value - exact) <=
                std::max(2e-8 * exact, q.truncation_estimate));
      }
    }
  }
  // larger offsets on a grid lattice need a larger box; the returned
  // truncation estimate stays consistent with the actual defect
  const SpaceTimeGrid wide = make_grid(1, 12.0, 0.1, 1.0, 0.5);
  GaussianWeight w{1, {0, 0, 0}, 2.0};
  const auto q = weighted_integral(constant_slice(1, 1.0, &wide, 0.0), w,
                                   Integrand::f_squared().with_envelope(0));
  REQUIRE(std::abs(q.value - GaussianWeight::total_mass(1)) <=
          q.truncation_estimate + 1e-9);
}

TEST_CASE("weighted integral: frozen Gaussian moments") {
  const SpaceTimeGrid g = make_grid(1, 6.0, 0.02, 1.0, 0.5);
  const OracleSolution& x1 = find_oracle("x1");
  const ScalarField f = sample(x1, g);
  WeightedQuadOptions auto_opt;
  auto_opt.auto_lattice = true;  // analytic slices: s-adapted lattice

  SECTION("f == 1 gives 2 sqrt(pi) for any t, a") {
    GaussianWeight w{1, {0, 0, 0}, 0.7};
    const auto q = weighted_integral(constant_slice(1, 1.0, &g, 0.3), w,
                                     Integrand::f_squared(), auto_opt);
    REQUIRE(q.value == Approx(kTwoSqrtPi).epsilon(1e-10));
    REQUIRE(q.value == Approx(3.54490770181103).epsilon(1e-12));
  }

  SECTION("f == 0 gives 0") {
    GaussianWeight w{1, {0, 0, 0}, 1.0};
    const auto q = weighted_integral(constant_slice(1, 0.0, &g, 0.0), w,
                                     Integrand::f_squared(), auto_opt);
    REQUIRE(q.value == 0.0);
  }

  SECTION("second moment: f = x1 gives 2 s * 2 sqrt(pi)") {
    for (double a : {0.25, 1.0}) {
      for (double t : {0.0, 0.5}) {
        GaussianWeight w{1, {0, 0, 0}, a};
        const auto q = weighted_integral(slice(f, t), w,
                                         Integrand::f_squared(), auto_opt);
        const double s = t + a;
        REQUIRE(q.value == Approx(2.0 * s * kTwoSqrtPi).epsilon(1e-10));
      }
    }
  }

  SECTION("radial power kind reproduces the fourth moment") {
    GaussianWeight w{1, {0, 0, 0}, 1.0};
    const auto q = weighted_integral(constant_slice(1, 1.0, &g, 0.0), w,
                                     Integrand::radial_power(4.0), auto_opt);
    REQUIRE(q.value == Approx(12.0 * kTwoSqrtPi).epsilon(1e-9));
  }
}

TEST_CASE("weighted integral is linear and monotone in the integrand") {
  const SpaceTimeGrid g = make_grid(1, 6.0, 0.05, 1.0, 0.5);
  const ScalarField f = sample(find_oracle("x1"), g);
  const ScalarField c = sample(find_oracle("const1"), g);
  GaussianWeight w{1, {0, 0, 0}, 0.5};
  WeightedQuadOptions opt;
  opt.auto_lattice = true;

  const double If =
      weighted_integral(slice(f, 0), w, Integrand::f_squared(), opt).value;
  const double Ic =
      weighted_integral(slice(c, 0), w, Integrand::f_squared(), opt).value;

  // linearity through the custom kind: phi = 2 f^2 + 3 c^2
  const auto lin = Integrand::custom([&](const Vec& x, const FieldSlice&) {
    const double a = f.value(x, 0.0), b = c.value(x, 0.0);
    return 2.0 * a * a + 3.0 * b * b;
  });
  const double Il = weighted_integral(slice(f, 0), w, lin, opt).value;
  REQUIRE(Il == Approx(2.0 * If + 3.0 * Ic).epsilon(1e-12));

  // pointwise x^2 <= x^2 + 1 implies the ordering up to tolerance
  REQUIRE(If <= Il + 1e-12);
}

TEST_CASE("refining h by 2 cuts the quadrature error by at least 3.5") {
  // smooth non-polynomial integrand so the trapezoid error is visible:
  // f = cos(3x), exact value of int cos(3x)^2 G_a dx at s = a via moments:
  // cos^2 = (1 + cos 6x)/2 and int cos(kx) e^{-x^2/4s} dx = 2 sqrt(pi s)
  // e^{-k^2 s}. With the kernel normalization: mass (1 + e^{-36 s}) sqrt(pi).
  const double a = 0.04;  // makes h = 0.4 visibly under-resolved
  const double exact = std::sqrt(kPi) * (1.0 + std::exp(-36.0 * a));
  auto run = [&](double h) {
    const SpaceTimeGrid g = make_grid(1, 6.4, h, 1.0, 0.5);
    FieldSlice s = constant_slice(1, 1.0, &g, 0.0);
    s.value = [](const Vec& x) { return std::cos(3.0 * x[0]); };
    GaussianWeight w{1, {0, 0, 0}, a};
    WeightedQuadOptions opt;
    opt.max_trunc_rel = 1.0;  // isolate resolution error
    return weighted_integral(s, w, Integrand::f_squared(), opt).value;
  };
  const double e1 = std::abs(run(0.4) - exact);
  const double e2 = std::abs(run(0.2) - exact);
  REQUIRE(e1 / std::max(e2, 1e-300) >= 3.5);
}

TEST_CASE("grid-too-small raises once the truncation estimate dominates") {
  const SpaceTimeGrid g = make_grid(1, 2.0, 0.05, 1.0, 0.5);  // box too small
  GaussianWeight w{1, {0, 0, 0}, 4.0};  // effective radius ~ 26
  REQUIRE_THROWS_AS(weighted_integral(constant_slice(1, 1.0, &g, 0.0), w,
                                      Integrand::f_squared()),
                    Error);
}

TEST_CASE("ball integrals: frozen closed forms") {
  const SpaceTimeGrid g2 = make_grid(2, 6.0, 0.1, 1.0, 0.5);
  const ScalarField one2 = sample(find_oracle("const1_2d"), g2);
  const ScalarField x12 = sample(find_oracle("x1_2d"), g2);

  // area of the unit disk
  REQUIRE(ball_integral(slice(one2, 0), ball(1.0)) == Approx(kPi).epsilon(1e-10));
  // int_{B_r} x1^2 = pi r^4 / 4 (polar-coordinate oracle)
  for (double r : {0.5, 1.0, 2.0}) {
    REQUIRE(ball_integral(slice(x12, 0), ball(r)) ==
            Approx(kPi * std::pow(r, 4) / 4.0).epsilon(1e-10));
  }
  // zero field
  const ScalarField zero = ScalarField::from_values(
      g2, std::vector<double>(g2.node_count() * g2.time_count(), 0.0));
  REQUIRE(ball_integral(slice(zero, 0), ball(1.0)) == 0.0);
  // region exceeding the grid
  REQUIRE_THROWS_AS(ball_integral(slice(one2, 0), ball(7.0)), Error);
}

TEST_CASE("cylinder integral iterates the trapezoid rule in time") {
  const SpaceTimeGrid g = make_grid(1, 6.0, 0.05, 1.0, 0.01);
  const ScalarField u = sample(find_oracle("caloric2"), g);  // x^2 - 2t
  // int_{Q_r} u^2 dX = 26/15 r^7 (closed-form polynomial integration)
  for (double r : {0.5, 0.8}) {
    const double exact = 26.0 / 15.0 * std::pow(r, 7);
    // trapezoid in time: panel-squared error, well inside every certifier
    // tolerance
    REQUIRE(cylinder_integral(u, cylinder(r)) == Approx(exact).epsilon(1e-5));
  }
  // sampled (finite-difference) field path: clip ends across grid slices
  std::vector<double> vals(g.node_count() * g.time_count());
  for (int j = 0; j < g.time_count(); ++j)
    for (int i = 0; i < g.nodes_per_dim(); ++i) {
      const double x = g.coord(i), t = g.time(j);
      vals[static_cast<std::size_t>(j) * g.node_count() + i] = x * x - 2.0 * t;
    }
  const ScalarField us = ScalarField::from_values(g, vals);
  const double exact = 26.0 / 15.0 * std::pow(0.7, 7);
  REQUIRE(cylinder_integral(us, cylinder(0.7)) == Approx(exact).epsilon(1e-3));
}

TEST_CASE("coefficient fields verify ellipticity and Lipschitz invariants") {
  const SpaceTimeGrid g = make_grid(1, 2.0, 0.1, 1.0, 0.5);
  REQUIRE_NOTHROW(CoefficientField::identity(g));
  // 1 + 0.2 sin(pi x / 2): lambda = 0.8, Lipschitz pi/2 * 0.2
  REQUIRE_NOTHROW(CoefficientField::from_function(
      g,
      [](const Vec& x, double, double* p) {
        p[0] = 1.0 + 0.2 * std::sin(kPi * x[0] / 2.0);
      },
      0.8, 0.35));
  // claiming lambda = 1 for the perturbed matrix must fail
  REQUIRE_THROWS_AS(CoefficientField::from_function(
                        g,
                        [](const Vec& x, double, double* p) {
                          p[0] = 1.0 + 0.2 * std::sin(kPi * x[0] / 2.0);
                        },
                        1.0, 0.35),
                    Error);
  // claiming a too-small Lipschitz constant must fail
  REQUIRE_THROWS_AS(CoefficientField::from_function(
                        g,
                        [](const Vec& x, double, double* p) {
                          p[0] = 1.0 + 0.2 * std::sin(kPi * x[0] / 2.0);
                        },
                        0.8, 0.01),
                    Error);
}

TEST_CASE("log-space weighted integral matches the linear path") {
  const SpaceTimeGrid g = make_grid(1, 6.0, 0.02, 1.0, 0.5);
  const ScalarField f = sample(find_oracle("x1"), g);
  GaussianWeight w{1, {0, 0, 0}, 0.5};
  WeightedQuadOptions opt;
  opt.auto_lattice = true;
  const double lin =
      weighted_integral(slice(f, 0.2), w, Integrand::f_squared().with_envelope(16),
                        opt).value;
  const double lg = log_weighted_integral(slice(f, 0.2), w, [&](const Vec& x) {
    const double v = f.value(x, 0.2);
    return v == 0.0 ? -std::numeric_limits<double>::infinity()
                    : 2.0 * std::log(std::abs(v));
  }, opt);
  REQUIRE(std::exp(lg) == Approx(lin).epsilon(1e-10));
}
