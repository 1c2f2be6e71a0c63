#pragma once

#include <cmath>

#include "caloric/field.hpp"
#include "caloric/grid.hpp"

namespace caloric {

// Radial cutoff equal to 1 on B_inner and 0 outside B_outer, transitioned by
// the mollified bump exp(1 - 1/(1 - q^2)) with q = (|x| - inner)/(outer -
// inner). Closed-form radial derivatives are stored; the transition profile
// is smooth in the open band and C^1 at the seams, which is all the product
// rule needs here.
struct RadialCutoff {
  double inner = 3.0;
  double outer = 3.5;

  double profile(double q) const {
    if (q <= 0.0) return 1.0;
    if (q >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - q * q));
  }

  double profile_d(double q) const {  // d/dq
    if (q <= 0.0 || q >= 1.0) return 0.0;
    const double d = 1.0 - q * q;
    return profile(q) * (-2.0 * q / (d * d));
  }

  double profile_dd(double q) const {
    if (q <= 0.0 || q >= 1.0) return 0.0;
    const double d = 1.0 - q * q;
    const double a = -2.0 * q / (d * d);
    const double da = (-2.0 * d - 8.0 * q * q) / (d * d * d);
    return profile(q) * (a * a + da);
  }

  double width() const { return outer - inner; }

  double value(double r) const { return profile((r - inner) / width()); }
  double dvalue(double r) const { return profile_d((r - inner) / width()) / width(); }
  double ddvalue(double r) const {
    return profile_dd((r - inner) / width()) / (width() * width());
  }
};

// The two cutoffs of the frequency arguments: psi = 1 on B_3, 0 outside
// B_{7/2}; phi = 1 on B_{3/2}, 0 outside B_2.
inline RadialCutoff psi_cutoff() { return RadialCutoff{3.0, 3.5}; }
inline RadialCutoff phi_cutoff() { return RadialCutoff{1.5, 2.0}; }

// Slice of the product f = u * cutoff with product-rule derivatives. The
// wrapped slice keeps the base field's backing grid so quadrature lattices
// are unchanged.
inline FieldSlice cutoff_slice(const FieldSlice& base, const RadialCutoff& cut) {
  FieldSlice out = base;
  const int n = base.n;
  out.value = [base, cut, n](const Vec& x) {
    const double r = std::sqrt(norm_sq(x, n));
    const double p = cut.value(r);
    return p == 0.0 ? 0.0 : base.value(x) * p;
  };
  out.gradient = [base, cut, n](const Vec& x) {
    const double r = std::sqrt(norm_sq(x, n));
    const double p = cut.value(r);
    if (p == 0.0) return Vec{0, 0, 0};
    Vec g = base.gradient(x);
    const double dp = cut.dvalue(r);
    if (dp != 0.0 && r > 0.0) {
      const double u = base.value(x);
      for (int d = 0; d < n; ++d) g[d] = g[d] * p + u * dp * x[d] / r;
    } else {
      for (int d = 0; d < n; ++d) g[d] *= p;
    }
    return g;
  };
  out.laplacian = [base, cut, n](const Vec& x) {
    const double r = std::sqrt(norm_sq(x, n));
    const double p = cut.value(r);
    if (p == 0.0) return 0.0;
    // lap(u p) = p lap u + 2 grad u . grad p + u lap p
    double lap = cut.value(r) * base.laplacian(x);
    const double dp = cut.dvalue(r);
    if (dp != 0.0 && r > 0.0) {
      const Vec gu = base.gradient(x);
      double radial = 0.0;
      for (int d = 0; d < n; ++d) radial += gu[d] * x[d] / r;
      lap += 2.0 * dp * radial;
      lap += base.value(x) * (cut.ddvalue(r) + (n - 1) * dp / r);
    }
    return lap;
  };
  out.time_derivative = [base, cut, n](const Vec& x) {
    const double r = std::sqrt(norm_sq(x, n));
    const double p = cut.value(r);
    return p == 0.0 ? 0.0 : base.time_derivative(x) * p;
  };
  return out;
}

}  // namespace caloric
