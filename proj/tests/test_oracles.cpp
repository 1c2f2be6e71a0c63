#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "caloric/oracles.hpp"

using namespace caloric;
using Catch::Approx;

TEST_CASE("catalog contains the required families") {
  std::set<std::string> names;
  for (const auto& o : oracle_catalog()) names.insert(o.name);
  for (const char* required :
       {"const1", "const1_2d", "const1_3d", "x1", "x1_2d", "x2_2d", "x1_3d",
        "caloric2", "caloric3", "caloric4", "caloric2_2d", "caloric3_2d",
        "caloric4_2d", "harm2_2d", "harm3_2d", "harm4_2d", "harm5_2d",
        "harm6_2d", "harm2_3d", "gauss", "gauss1", "gauss_2d"})
    REQUIRE(names.count(required) == 1);
}

TEST_CASE("flag examples: caloric residual, homogeneity, plane harmonic") {
  const OracleSolution& c2 = find_oracle("caloric2");  // x^2 - 2t
  REQUIRE(c2.backward_caloric);
  const Vec x = {0.7, 0, 0};
  REQUIRE(c2.closures.laplacian(x, 0.3) + c2.closures.time_derivative(x, 0.3) ==
          0.0);
  // u(2x, 4t) = 4 u(x, t)
  REQUIRE(c2.closures.value({1.4, 0, 0}, 1.2) ==
          Approx(4.0 * c2.closures.value({0.7, 0, 0}, 0.3)));
  REQUIRE(c2.parabolic_degree == 2);

  const OracleSolution& h2 = find_oracle("harm2_2d");  // x1^2 - x2^2
  REQUIRE(h2.harmonic);
  REQUIRE(h2.harmonic_degree == 2);
  REQUIRE(h2.closures.laplacian({0.3, -0.8, 0}, 0.0) == 0.0);
  REQUIRE(h2.closures.value({1.0, 2.0, 0}, 0.0) == Approx(1.0 - 4.0));
}

TEST_CASE("flag verification rejects corrupted entries") {
  OracleSolution bad = find_oracle("caloric2");
  bad.harmonic = true;  // x^2 - 2t is not harmonic
  REQUIRE_THROWS_AS(verify_oracle_flags(bad), Error);

  OracleSolution wrong_degree = find_oracle("x1");
  wrong_degree.parabolic_degree = 3;
  REQUIRE_THROWS_AS(verify_oracle_flags(wrong_degree), Error);
}

TEST_CASE("sampling onto grids") {
  const SpaceTimeGrid g = make_grid(1, 2.0, 0.5, 0.5, 0.25);

  const ScalarField ones = sample(find_oracle("const1"), g);
  for (int i = 0; i < g.nodes_per_dim(); ++i)
    REQUIRE(ones.node_value(i, 0) == 1.0);

  const ScalarField x1 = sample(find_oracle("x1"), g);
  for (int i = 0; i < g.nodes_per_dim(); ++i)
    REQUIRE(x1.node_value(i, 1) == Approx(g.coord(i)));

  // G at offset 1 evaluates to (0+1)^{-1/2} e^0 = 1 at the origin
  const OracleSolution& gauss1 = find_oracle("gauss1");
  REQUIRE(gauss1.closures.value({0, 0, 0}, 0.0) == 1.0);
  REQUIRE(gauss1.backward_caloric);

  // dimension mismatch
  REQUIRE_THROWS_AS(sample(find_oracle("const1_2d"), g), Error);
  // sampling past the blow-up time of the reflected Gaussian
  const SpaceTimeGrid toolong = make_grid(1, 2.0, 0.5, 1.0, 0.25);
  REQUIRE_THROWS_AS(sample(gauss1, toolong), Error);
}

TEST_CASE("homogeneous identity: int_{B_r} u^2 = r^{2k+n}/(2k+n) surface") {
  for (const auto& o : oracle_catalog()) {
    if (!o.harmonic || !o.harmonic_degree) continue;
    const int k = *o.harmonic_degree;
    const double surface = sphere_surface_integral_sq(o);
    FieldSlice s;
    s.n = o.n;
    s.t = 0.0;
    s.analytic = true;
    s.value = [&o](const Vec& x) { return o.closures.value(x, 0.0); };
    for (double r : {0.5, 1.0, 2.0}) {
      const double lhs = ball_integral(s, ball(r));
      const double rhs = std::pow(r, 2 * k + o.n) / (2 * k + o.n) * surface;
      INFO(o.name << " r=" << r);
      REQUIRE(lhs == Approx(rhs).epsilon(1e-8));
    }
  }
}

TEST_CASE("every catalog entry exposes consistent derivative closures") {
  // cross-check gradients and laplacians against central differences of the
  // value closure on a probe set
  const double d = 1e-5;
  for (const auto& o : oracle_catalog()) {
    const std::vector<Vec> xs = {{0.4, -0.3, 0.8}, {1.2, 0.9, -0.5}};
    for (Vec x0 : xs) {
      Vec x = {0, 0, 0};
      for (int i = 0; i < o.n; ++i) x[i] = x0[i];
      const double t = 0.2;
      const Vec g = o.closures.gradient(x, t);
      double lap_fd = 0.0;
      for (int i = 0; i < o.n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += d;
        xm[i] -= d;
        const double gi =
            (o.closures.value(xp, t) - o.closures.value(xm, t)) / (2 * d);
        INFO(o.name << " axis " << i);
        REQUIRE(g[i] == Approx(gi).margin(1e-6));
        lap_fd += (o.closures.value(xp, t) - 2 * o.closures.value(x, t) +
                   o.closures.value(xm, t)) /
                  (d * d);
      }
      REQUIRE(o.closures.laplacian(x, t) == Approx(lap_fd).margin(2e-4));
      const double dt_fd =
          (o.closures.value(x, t + d) - o.closures.value(x, t - d)) / (2 * d);
      REQUIRE(o.closures.time_derivative(x, t) == Approx(dt_fd).margin(1e-6));
    }
  }
}
