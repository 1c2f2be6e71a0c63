#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "caloric/field.hpp"
#include "caloric/grid.hpp"
#include "caloric/quadrature.hpp"

// Exact solutions with analytic derivatives: the ground truth for every
// identity and inequality check. Backward-caloric polynomials come from the
// substitution t -> -t in the classical heat polynomials; harmonic entries in
// the plane are real and imaginary parts of (x1 + i x2)^k. Closed forms only,
// no symbolic engine.

namespace caloric {

struct OracleSolution {
  std::string name;
  int n = 1;
  AnalyticClosures closures;
  bool backward_caloric = false;        // lap u + dt u = 0
  bool harmonic = false;                // lap u = 0
  std::optional<int> parabolic_degree;  // u(Lx, L^2 t) = L^k u(x,t)
  std::optional<int> harmonic_degree;   // homogeneous degree when harmonic
  double max_time = std::numeric_limits<double>::infinity();
};

namespace detail {

inline AnalyticClosures poly_closures(
    std::function<double(const Vec&, double)> value,
    std::function<Vec(const Vec&, double)> grad,
    std::function<double(const Vec&, double)> lap,
    std::function<double(const Vec&, double)> dt) {
  AnalyticClosures c;
  c.value = std::move(value);
  c.gradient = std::move(grad);
  c.laplacian = std::move(lap);
  c.time_derivative = std::move(dt);
  return c;
}

// Real or imaginary part of (x1 + i x2)^k with exact complex-power closures.
inline OracleSolution plane_harmonic(int k, bool imaginary) {
  OracleSolution o;
  o.name = (imaginary ? "harm" + std::to_string(k) + "i_2d"
                      : "harm" + std::to_string(k) + "_2d");
  o.n = 2;
  o.backward_caloric = true;
  o.harmonic = true;
  o.parabolic_degree = k;
  o.harmonic_degree = k;
  const auto part = [imaginary](std::complex<double> w) {
    return imaginary ? w.imag() : w.real();
  };
  o.closures = poly_closures(
      [k, part](const Vec& x, double) {
        return part(std::pow(std::complex<double>(x[0], x[1]), k));
      },
      [k, part, imaginary](const Vec& x, double) {
        const auto d =
            double(k) * std::pow(std::complex<double>(x[0], x[1]), k - 1);
        // d/dx Re(w^k) = Re(k w^{k-1}); d/dy Re(w^k) = -Im(k w^{k-1})
        if (!imaginary) return Vec{d.real(), -d.imag(), 0.0};
        return Vec{d.imag(), d.real(), 0.0};
      },
      [](const Vec&, double) { return 0.0; },
      [](const Vec&, double) { return 0.0; });
  return o;
}

inline OracleSolution constant_entry(int n) {
  OracleSolution o;
  o.name = n == 1 ? "const1" : ("const1_" + std::to_string(n) + "d");
  o.n = n;
  o.backward_caloric = true;
  o.harmonic = true;
  o.parabolic_degree = 0;
  o.harmonic_degree = 0;
  o.closures = poly_closures([](const Vec&, double) { return 1.0; },
                             [](const Vec&, double) { return Vec{0, 0, 0}; },
                             [](const Vec&, double) { return 0.0; },
                             [](const Vec&, double) { return 0.0; });
  return o;
}

inline OracleSolution coordinate_entry(int n, int axis) {
  OracleSolution o;
  const std::string base = "x" + std::to_string(axis + 1);
  o.name = n == 1 ? base : (base + "_" + std::to_string(n) + "d");
  o.n = n;
  o.backward_caloric = true;
  o.harmonic = true;
  o.parabolic_degree = 1;
  o.harmonic_degree = 1;
  o.closures = poly_closures(
      [axis](const Vec& x, double) { return x[axis]; },
      [axis](const Vec&, double) {
        Vec g = {0, 0, 0};
        g[axis] = 1.0;
        return g;
      },
      [](const Vec&, double) { return 0.0; },
      [](const Vec&, double) { return 0.0; });
  return o;
}

// Time-reflected Gaussian (c - t)^{-n/2} exp(-|x|^2/4(c-t)): a backward
// caloric function for t < c. At t = 0 this is the Gauss kernel with offset
// a = c, so the c = 1 entry evaluates to (0+1)^{-1/2} e^0 = 1 at the origin.
inline OracleSolution gaussian_entry(int n, double c, std::string name) {
  OracleSolution o;
  o.name = std::move(name);
  o.n = n;
  o.backward_caloric = true;
  o.max_time = c - 0.25;  // keep sampling safely away from the blow-up time
  const auto val = [n, c](const Vec& x, double t) {
    const double tau = c - t;
    return std::pow(tau, -0.5 * n) * std::exp(-norm_sq(x, n) / (4.0 * tau));
  };
  const auto lap = [n, c, val](const Vec& x, double t) {
    const double tau = c - t;
    const double r2 = norm_sq(x, n);
    return val(x, t) * (r2 / (4.0 * tau * tau) - 0.5 * n / tau);
  };
  o.closures = poly_closures(
      val,
      [n, c, val](const Vec& x, double t) {
        const double tau = c - t;
        const double u = val(x, t);
        Vec g = {0, 0, 0};
        for (int d = 0; d < n; ++d) g[d] = -x[d] / (2.0 * tau) * u;
        return g;
      },
      lap, [lap](const Vec& x, double t) { return -lap(x, t); });
  return o;
}

}  // namespace detail

// Numerical re-verification of the catalog flags on a fixed probe set;
// residuals are relative to the local magnitude of the closed forms.
inline void verify_oracle_flags(const OracleSolution& o, double tol = 1e-12) {
  const std::vector<Vec> xs = {{0.0, 0.0, 0.0},   {0.3, -0.7, 0.2},
                               {1.1, 0.5, -0.9},  {-1.7, 0.9, 1.3},
                               {0.05, -0.02, 0.6}};
  const std::vector<double> ts = {0.0, 0.37, 1.0};
  for (const Vec& x0 : xs) {
    Vec x = {0, 0, 0};
    for (int d = 0; d < o.n; ++d) x[d] = x0[d];
    for (double t : ts) {
      if (t >= o.max_time) continue;
      const double u = o.closures.value(x, t);
      const double lap = o.closures.laplacian(x, t);
      const double ut = o.closures.time_derivative(x, t);
      const double scale = std::max({1.0, std::abs(u), std::abs(lap)});
      if (o.backward_caloric && std::abs(lap + ut) > tol * scale)
        raise("oracles", "catalog",
              o.name + ": backward-caloric flag fails residual check");
      if (o.harmonic && std::abs(lap) > tol * scale)
        raise("oracles", "catalog", o.name + ": harmonic flag fails");
      if (o.parabolic_degree) {
        for (double lam : {0.5, 2.0}) {
          Vec xl = {lam * x[0], lam * x[1], lam * x[2]};
          const double tl = lam * lam * t;
          if (tl >= o.max_time) continue;
          const double lhs = o.closures.value(xl, tl);
          const double rhs =
              std::pow(lam, *o.parabolic_degree) * o.closures.value(x, t);
          if (std::abs(lhs - rhs) > tol * std::max(1.0, std::abs(rhs)))
            raise("oracles", "catalog",
                  o.name + ": parabolic homogeneity flag fails");
        }
      }
    }
  }
}

inline const std::vector<OracleSolution>& oracle_catalog() {
  static const std::vector<OracleSolution> catalog = [] {
    using detail::poly_closures;
    std::vector<OracleSolution> v;

    for (int n : {1, 2, 3}) v.push_back(detail::constant_entry(n));
    v.push_back(detail::coordinate_entry(1, 0));
    v.push_back(detail::coordinate_entry(2, 0));
    v.push_back(detail::coordinate_entry(2, 1));
    v.push_back(detail::coordinate_entry(3, 0));

    // Backward caloric polynomials in one dimension, parabolic degree 2..4.
    {
      OracleSolution o;
      o.name = "caloric2";
      o.n = 1;
      o.backward_caloric = true;
      o.parabolic_degree = 2;
      o.closures = poly_closures(
          [](const Vec& x, double t) { return x[0] * x[0] - 2.0 * t; },
          [](const Vec& x, double) { return Vec{2.0 * x[0], 0, 0}; },
          [](const Vec&, double) { return 2.0; },
          [](const Vec&, double) { return -2.0; });
      v.push_back(o);
    }
    {
      OracleSolution o;
      o.name = "caloric3";
      o.n = 1;
      o.backward_caloric = true;
      o.parabolic_degree = 3;
      o.closures = poly_closures(
          [](const Vec& x, double t) {
            return x[0] * x[0] * x[0] - 6.0 * x[0] * t;
          },
          [](const Vec& x, double t) {
            return Vec{3.0 * x[0] * x[0] - 6.0 * t, 0, 0};
          },
          [](const Vec& x, double) { return 6.0 * x[0]; },
          [](const Vec& x, double) { return -6.0 * x[0]; });
      v.push_back(o);
    }
    {
      OracleSolution o;
      o.name = "caloric4";
      o.n = 1;
      o.backward_caloric = true;
      o.parabolic_degree = 4;
      o.closures = poly_closures(
          [](const Vec& x, double t) {
            const double x2 = x[0] * x[0];
            return x2 * x2 - 12.0 * x2 * t + 12.0 * t * t;
          },
          [](const Vec& x, double t) {
            return Vec{4.0 * x[0] * x[0] * x[0] - 24.0 * x[0] * t, 0, 0};
          },
          [](const Vec& x, double t) { return 12.0 * x[0] * x[0] - 24.0 * t; },
          [](const Vec& x, double t) {
            return -12.0 * x[0] * x[0] + 24.0 * t;
          });
      v.push_back(o);
    }

    // Two-dimensional backward caloric polynomials.
    {
      OracleSolution o;
      o.name = "caloric2_2d";  // |x|^2 - 4t
      o.n = 2;
      o.backward_caloric = true;
      o.parabolic_degree = 2;
      o.closures = poly_closures(
          [](const Vec& x, double t) {
            return x[0] * x[0] + x[1] * x[1] - 4.0 * t;
          },
          [](const Vec& x, double) { return Vec{2.0 * x[0], 2.0 * x[1], 0}; },
          [](const Vec&, double) { return 4.0; },
          [](const Vec&, double) { return -4.0; });
      v.push_back(o);
    }
    {
      OracleSolution o;
      o.name = "caloric3_2d";  // x2 (x1^2 - 2t)
      o.n = 2;
      o.backward_caloric = true;
      o.parabolic_degree = 3;
      o.closures = poly_closures(
          [](const Vec& x, double t) {
            return x[1] * (x[0] * x[0] - 2.0 * t);
          },
          [](const Vec& x, double t) {
            return Vec{2.0 * x[0] * x[1], x[0] * x[0] - 2.0 * t, 0};
          },
          [](const Vec& x, double) { return 2.0 * x[1]; },
          [](const Vec& x, double) { return -2.0 * x[1]; });
      v.push_back(o);
    }
    {
      OracleSolution o;
      o.name = "caloric4_2d";  // (x1^2 - 2t)(x2^2 - 2t)
      o.n = 2;
      o.backward_caloric = true;
      o.parabolic_degree = 4;
      o.closures = poly_closures(
          [](const Vec& x, double t) {
            return (x[0] * x[0] - 2.0 * t) * (x[1] * x[1] - 2.0 * t);
          },
          [](const Vec& x, double t) {
            return Vec{2.0 * x[0] * (x[1] * x[1] - 2.0 * t),
                       2.0 * x[1] * (x[0] * x[0] - 2.0 * t), 0};
          },
          [](const Vec& x, double t) {
            return 2.0 * (x[1] * x[1] - 2.0 * t) + 2.0 * (x[0] * x[0] - 2.0 * t);
          },
          [](const Vec& x, double t) {
            return -2.0 * (x[1] * x[1] - 2.0 * t) -
                   2.0 * (x[0] * x[0] - 2.0 * t);
          });
      v.push_back(o);
    }

    for (int k = 2; k <= 6; ++k) v.push_back(detail::plane_harmonic(k, false));
    v.push_back(detail::plane_harmonic(2, true));
    v.push_back(detail::plane_harmonic(3, true));

    // Three-dimensional harmonic polynomials of degree 2.
    {
      OracleSolution o;
      o.name = "harm2_3d";  // x1^2 - x2^2
      o.n = 3;
      o.backward_caloric = true;
      o.harmonic = true;
      o.parabolic_degree = 2;
      o.harmonic_degree = 2;
      o.closures = poly_closures(
          [](const Vec& x, double) { return x[0] * x[0] - x[1] * x[1]; },
          [](const Vec& x, double) { return Vec{2.0 * x[0], -2.0 * x[1], 0}; },
          [](const Vec&, double) { return 0.0; },
          [](const Vec&, double) { return 0.0; });
      v.push_back(o);
    }
    {
      OracleSolution o;
      o.name = "harm2b_3d";  // x1 x2
      o.n = 3;
      o.backward_caloric = true;
      o.harmonic = true;
      o.parabolic_degree = 2;
      o.harmonic_degree = 2;
      o.closures = poly_closures(
          [](const Vec& x, double) { return x[0] * x[1]; },
          [](const Vec& x, double) { return Vec{x[1], x[0], 0}; },
          [](const Vec&, double) { return 0.0; },
          [](const Vec&, double) { return 0.0; });
      v.push_back(o);
    }
    {
      OracleSolution o;
      o.name = "harm2z_3d";  // 2 x3^2 - x1^2 - x2^2
      o.n = 3;
      o.backward_caloric = true;
      o.harmonic = true;
      o.parabolic_degree = 2;
      o.harmonic_degree = 2;
      o.closures = poly_closures(
          [](const Vec& x, double) {
            return 2.0 * x[2] * x[2] - x[0] * x[0] - x[1] * x[1];
          },
          [](const Vec& x, double) {
            return Vec{-2.0 * x[0], -2.0 * x[1], 4.0 * x[2]};
          },
          [](const Vec&, double) { return 0.0; },
          [](const Vec&, double) { return 0.0; });
      v.push_back(o);
    }

    v.push_back(detail::gaussian_entry(1, 2.0, "gauss"));
    v.push_back(detail::gaussian_entry(1, 1.0, "gauss1"));
    v.push_back(detail::gaussian_entry(2, 2.0, "gauss_2d"));

    for (const OracleSolution& o : v) verify_oracle_flags(o);
    return v;
  }();
  return catalog;
}

inline const OracleSolution& find_oracle(const std::string& name) {
  for (const OracleSolution& o : oracle_catalog())
    if (o.name == name) return o;
  raise("oracles", "find_oracle", "unknown oracle: " + name);
}

inline ScalarField sample(const OracleSolution& oracle,
                          const SpaceTimeGrid& grid) {
  if (oracle.n != grid.n)
    raise("oracles", "sample", "oracle dimension does not match the grid");
  if (grid.T >= oracle.max_time)
    raise("oracles", "sample",
          oracle.name + " is only defined for T < " +
              std::to_string(oracle.max_time));
  return ScalarField::from_closures(grid, oracle.closures);
}

// Surface integral of u(.,0)^2 over the unit sphere. In the plane this is the
// 4096-node trapezoid rule on the circle; in three dimensions a
// Gauss-Legendre x trapezoid product rule (declared orders in BallQuadOptions);
// in one dimension the counting measure on {-1, +1}.
inline double sphere_surface_integral_sq(const OracleSolution& oracle) {
  FieldSlice s;
  s.n = oracle.n;
  s.t = 0.0;
  s.analytic = true;
  s.grid = nullptr;
  s.value = [&oracle](const Vec& x) { return oracle.closures.value(x, 0.0); };
  BallQuadOptions opt;
  opt.angular_nodes = 4096;
  return detail::sphere_mean_sq(s, Vec{0, 0, 0}, 1.0, opt);
}

}  // namespace caloric
