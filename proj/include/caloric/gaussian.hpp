#pragma once

#include <cmath>

#include "caloric/grid.hpp"
#include "caloric/special.hpp"

namespace caloric {

// The kernel G_a(x,t) = (t+a)^{-n/2} exp(-|x-y|^2 / 4(t+a)) with center y and
// time offset a. Deliberately unnormalized: its spatial mass is (4*pi)^{n/2}
// for every t+a, and all frequency-function identities are stated for this
// kernel (constants cancel in the quotient N_a).
struct GaussianWeight {
  int n = 1;
  Vec center = {0.0, 0.0, 0.0};
  double a = 1.0;  // offset, a > 0 (a = 0 allowed only with t > 0)

  double s(double t) const { return t + a; }

  double log_value(const Vec& x, double t) const {
    const double ss = s(t);
    return -0.5 * n * std::log(ss) - norm_sq(sub(x, center), n) / (4.0 * ss);
  }

  double value(const Vec& x, double t) const { return std::exp(log_value(x, t)); }

  static double total_mass(int n) { return std::pow(4.0 * kPi, 0.5 * n); }
};

// Radius R such that the relative Gaussian tail mass beyond R is below tol,
// for the kernel above at s = t + a, with an optional polynomial envelope
// |x|^p on the integrand. The tail ratio is the regularized upper incomplete
// gamma Q((n+p)/2, R^2/(4s)); the solution scales exactly as sqrt(s).
inline double effective_radius(int n, double a, double t, double tol,
                               int envelope_power = 0) {
  const double s = t + a;
  if (s <= 0) raise("numerics", "effective_radius", "t + a must be positive");
  if (tol >= 1.0) return 0.0;  // whole mass allowed as tail
  if (tol <= 0.0) raise("numerics", "effective_radius", "tol must be positive");
  const int twice_a = n + envelope_power;  // order (n+p)/2
  const double x = gamma_q_inv_half(twice_a, tol);
  return 2.0 * std::sqrt(s * x);
}

}  // namespace caloric
