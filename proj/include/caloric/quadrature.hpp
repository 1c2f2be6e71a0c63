#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "caloric/field.hpp"
#include "caloric/gaussian.hpp"
#include "caloric/grid.hpp"
#include "caloric/special.hpp"

// Gaussian-weighted quadrature over effectively-unbounded domains, plus plain
// ball and cylinder integrals. Weighted sums are tensor-product trapezoid
// sums truncated at an effective radius; the Gaussian decay makes the
// trapezoid rule spectrally accurate on these integrands. Summation order is
// always lexicographic over the lattice window, so results are bit-identical
// across runs and across sweep-level parallelism.

namespace caloric {

enum class IntegrandKind {
  f_squared,             // f^2
  grad_squared,          // |grad f|^2
  heat_residual_squared, // (lap f + dt f)^2
  radial_power_f_squared,// |x - y|^p f^2
  custom                 // user factor phi(x)
};

struct Integrand {
  IntegrandKind kind = IntegrandKind::f_squared;
  double radial_exponent = 0.0;
  std::function<double(const Vec&, const FieldSlice&)> factor;  // custom
  // Polynomial growth envelope of the non-Gaussian factor, used only for the
  // truncation-error estimate (degree 12 covers every catalog oracle square).
  int envelope_power = 12;

  static Integrand f_squared() { return {}; }
  static Integrand grad_squared() {
    Integrand k;
    k.kind = IntegrandKind::grad_squared;
    return k;
  }
  static Integrand heat_residual_squared() {
    Integrand k;
    k.kind = IntegrandKind::heat_residual_squared;
    return k;
  }
  static Integrand radial_power(double p) {
    Integrand k;
    k.kind = IntegrandKind::radial_power_f_squared;
    k.radial_exponent = p;
    k.envelope_power = 12 + static_cast<int>(std::ceil(p));
    return k;
  }
  static Integrand custom(std::function<double(const Vec&, const FieldSlice&)> f,
                          int envelope = 16) {
    Integrand k;
    k.kind = IntegrandKind::custom;
    k.factor = std::move(f);
    k.envelope_power = envelope;
    return k;
  }

  Integrand with_envelope(int p) const {
    Integrand k = *this;
    k.envelope_power = p;
    return k;
  }
};

struct QuadratureResult {
  double value = 0.0;
  double truncation_estimate = 0.0;  // absolute bound on the discarded tail
};

struct WeightedQuadOptions {
  double trunc_tol = 1e-8;     // target relative tail mass for the radius
  double max_trunc_rel = 1e-6; // grid-too-small threshold on the estimate
  bool auto_lattice = false;   // analytic slices: build an s-adapted lattice
  // Smallest spatial feature of the non-Gaussian factor (cutoff transition
  // width etc.); bounds the auto lattice spacing. Infinite means the factor
  // varies on the Gaussian scale only.
  double feature_scale = std::numeric_limits<double>::infinity();
  // Kernel exponent only (exp(-|x-y|^2/4s) without the (t+a)^{-n/2} factor),
  // for the inequalities of the paper stated with the plain weight.
  bool plain_exponential = false;
};

namespace detail {

struct Lattice {
  Vec origin;   // coordinate of index 0 per dimension
  double h;
  std::array<int, 3> count = {1, 1, 1};
  int n;
};

// Lattice covering the ball |x - center| <= R: either the slice's backing
// grid window or a centered auto lattice for analytic slices.
inline Lattice make_lattice(const FieldSlice& f, const Vec& center, double R,
                            double s, const WeightedQuadOptions& opt) {
  Lattice lat;
  lat.n = f.n;
  if (!opt.auto_lattice || !f.analytic) {
    if (f.grid == nullptr)
      raise("numerics", "weighted_integral", "slice lacks a backing grid");
    const SpaceTimeGrid& g = *f.grid;
    lat.h = g.h;
    const int m = g.nodes_per_dim();
    for (int d = 0; d < f.n; ++d) {
      int lo = static_cast<int>(std::ceil((center[d] - R + g.L) / g.h - 1e-12));
      int hi = static_cast<int>(std::floor((center[d] + R + g.L) / g.h + 1e-12));
      lo = std::max(lo, 0);
      hi = std::min(hi, m - 1);
      lat.origin[d] = -g.L + lo * g.h;
      lat.count[d] = std::max(0, hi - lo + 1);
    }
    return lat;
  }
  double h = 0.5 * std::sqrt(s);
  if (std::isfinite(opt.feature_scale)) h = std::min(h, 0.25 * opt.feature_scale);
  const int half = static_cast<int>(std::ceil(R / h));
  lat.h = h;
  for (int d = 0; d < f.n; ++d) {
    lat.origin[d] = center[d] - half * h;
    lat.count[d] = 2 * half + 1;
  }
  return lat;
}

template <typename NodeFn>
inline void for_each_node(const Lattice& lat, NodeFn&& fn) {
  std::array<int, 3> idx = {0, 0, 0};
  std::int64_t total = 1;
  for (int d = 0; d < lat.n; ++d) total *= lat.count[d];
  for (std::int64_t f = 0; f < total; ++f) {
    std::int64_t rem = f;
    for (int d = lat.n - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(rem % lat.count[d]);
      rem /= lat.count[d];
    }
    Vec x = {0, 0, 0};
    for (int d = 0; d < lat.n; ++d) x[d] = lat.origin[d] + idx[d] * lat.h;
    fn(x);
  }
}

inline double evaluate_factor(const Integrand& kind, const FieldSlice& f,
                              const Vec& x, const Vec& center) {
  switch (kind.kind) {
    case IntegrandKind::f_squared: {
      const double v = f.value(x);
      return v * v;
    }
    case IntegrandKind::grad_squared: {
      const Vec g = f.gradient(x);
      return norm_sq(g, f.n);
    }
    case IntegrandKind::heat_residual_squared: {
      const double r = f.heat_residual(x);
      return r * r;
    }
    case IntegrandKind::radial_power_f_squared: {
      const double v = f.value(x);
      const double r2 = norm_sq(sub(x, center), f.n);
      return std::pow(r2, 0.5 * kind.radial_exponent) * v * v;
    }
    case IntegrandKind::custom:
      return kind.factor(x, f);
  }
  return 0.0;
}

}  // namespace detail

// Integral of factor(x) * G_a(x, t) dx over R^n, truncated where the Gaussian
// tail (with the declared polynomial envelope) falls below trunc_tol. The
// result carries a truncation-error estimate; if the estimate exceeds
// max_trunc_rel relative to the value, the grid box is too small.
inline QuadratureResult weighted_integral(const FieldSlice& f,
                                          const GaussianWeight& w,
                                          const Integrand& kind,
                                          const WeightedQuadOptions& opt = {}) {
  const double s = w.s(f.t);
  if (s <= 0) raise("numerics", "weighted_integral", "t + a must be positive");
  const double R =
      effective_radius(f.n, w.a, f.t, opt.trunc_tol, kind.envelope_power);
  detail::Lattice lat = detail::make_lattice(f, w.center, R, s, opt);

  // Effective radius actually reached inside the box.
  double reach = R;
  if (!opt.auto_lattice || !f.analytic) {
    const SpaceTimeGrid& g = *f.grid;
    for (int d = 0; d < f.n; ++d)
      reach = std::min(reach, std::min(g.L - w.center[d], g.L + w.center[d]));
    reach = std::max(reach, 0.0);
  }

  const double R2 = reach * reach * (1.0 + 1e-12);
  const double hn = std::pow(lat.h, f.n);
  const double log_norm = opt.plain_exponential ? 0.0 : -0.5 * f.n * std::log(s);
  double sum = 0.0;
  detail::for_each_node(lat, [&](const Vec& x) {
    const double r2 = norm_sq(sub(x, w.center), f.n);
    if (r2 > R2) return;
    const double gw = std::exp(log_norm - r2 / (4.0 * s));
    const double phi = detail::evaluate_factor(kind, f, x, w.center);
    if (!std::isfinite(phi))
      raise("numerics", "weighted_integral", "non-finite integrand");
    sum += phi * gw;
  });

  QuadratureResult out;
  out.value = sum * hn;
  const int order = f.n + kind.envelope_power;
  const double tail =
      gamma_q_half(order, reach * reach / (4.0 * s));
  out.truncation_estimate = 10.0 * tail * std::abs(out.value);
  if (out.truncation_estimate >
      opt.max_trunc_rel * std::abs(out.value) + 1e-300)
    raise("numerics", "weighted_integral",
          "grid too small: truncation estimate exceeds tolerance");
  return out;
}

// Log-space weighted sum for severely scaled integrands (Carleman weights):
// returns log( sum_nodes h^n * exp(log_factor(x)) * G_a(x,t) ). Nodes where
// log_factor is -inf contribute nothing.
inline double log_weighted_integral(
    const FieldSlice& f, const GaussianWeight& w,
    const std::function<double(const Vec&)>& log_factor,
    const WeightedQuadOptions& opt = {}) {
  const double s = w.s(f.t);
  if (s <= 0) raise("numerics", "log_weighted_integral", "t + a must be positive");
  const double R = effective_radius(f.n, w.a, f.t, opt.trunc_tol, 16);
  detail::Lattice lat = detail::make_lattice(f, w.center, R, s, opt);
  const double R2 = R * R * (1.0 + 1e-12);
  const double log_norm = opt.plain_exponential ? 0.0 : -0.5 * f.n * std::log(s);
  LogSumAccumulator acc;
  detail::for_each_node(lat, [&](const Vec& x) {
    const double r2 = norm_sq(sub(x, w.center), f.n);
    if (r2 > R2) return;
    const double lf = log_factor(x);
    if (std::isnan(lf)) raise("numerics", "log_weighted_integral", "NaN integrand");
    acc.add(lf + log_norm - r2 / (4.0 * s));
  });
  return acc.log_value() + f.n * std::log(lat.h);
}

// ---------------------------------------------------------------------------
// Plain (unweighted) integrals of the squared field over balls and cylinders.
// Analytic slices use smooth polar product rules; sampled fields are read
// through their multilinear interpolant, so accuracy is O(h^2) there.

struct BallQuadOptions {
  int radial_panels = 8;
  int radial_order = 8;     // Gauss-Legendre points per panel
  int angular_nodes = 256;  // circle rule (n = 2)
  int polar_order = 24;     // Gauss-Legendre in cos(theta) (n = 3)
  int azimuthal_nodes = 48; // trapezoid in phi (n = 3)
  int time_panels = 512;    // cylinder rule for analytic fields
};

namespace detail {

// Mean of f(x)^2 over the sphere of radius rho about the center, times the
// surface measure of the unit sphere (so the radial integrand is
// rho^{n-1} * this).
inline double sphere_mean_sq(const FieldSlice& f, const Vec& center, double rho,
                             const BallQuadOptions& opt) {
  if (f.n == 1) {
    Vec xp = center, xm = center;
    xp[0] += rho;
    xm[0] -= rho;
    const double a = f.value(xp), b = f.value(xm);
    return a * a + b * b;  // counting measure on two points
  }
  if (f.n == 2) {
    double sum = 0.0;
    const int m = opt.angular_nodes;
    for (int k = 0; k < m; ++k) {
      const double phi = 2.0 * kPi * k / m;
      Vec x = center;
      x[0] += rho * std::cos(phi);
      x[1] += rho * std::sin(phi);
      const double v = f.value(x);
      sum += v * v;
    }
    return sum * (2.0 * kPi / m);
  }
  // n = 3: product rule, Gauss-Legendre in mu = cos(theta), trapezoid in phi
  const GaussRule& rule = gauss_legendre(opt.polar_order);
  double sum = 0.0;
  for (int i = 0; i < opt.polar_order; ++i) {
    const double mu = rule.nodes[i];
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    double ring = 0.0;
    for (int k = 0; k < opt.azimuthal_nodes; ++k) {
      const double phi = 2.0 * kPi * k / opt.azimuthal_nodes;
      Vec x = center;
      x[0] += rho * sin_t * std::cos(phi);
      x[1] += rho * sin_t * std::sin(phi);
      x[2] += rho * mu;
      const double v = f.value(x);
      ring += v * v;
    }
    sum += rule.weights[i] * ring * (2.0 * kPi / opt.azimuthal_nodes);
  }
  return sum;
}

}  // namespace detail

// integral over B_r(z) of f(x)^2 dx for a single-time slice.
inline double ball_integral(const FieldSlice& f, const Region& region,
                            const BallQuadOptions& opt = {}) {
  if (region.kind != Region::Kind::ball)
    raise("numerics", "ball_integral", "region must be a ball");
  const double r = region.radius;
  if (f.grid != nullptr) {
    const SpaceTimeGrid& g = *f.grid;
    for (int d = 0; d < f.n; ++d)
      if (std::abs(region.center[d]) + r > g.L + 1e-12)
        raise("numerics", "ball_integral", "region exceeds the grid box");
  }
  double total = 0.0;
  const double panel = r / opt.radial_panels;
  for (int p = 0; p < opt.radial_panels; ++p) {
    const double lo = p * panel, hi = lo + panel;
    total += gauss_integrate(
        [&](double rho) {
          const double mean =
              detail::sphere_mean_sq(f, region.center, rho, opt);
          return std::pow(rho, f.n - 1) * mean;
        },
        lo, hi, opt.radial_order);
  }
  return total;
}

// integral over Q_r(z, tau) = B_r(z) x [tau, tau + r^2] of u^2 dX.
// Trapezoid in time: grid slices for sampled fields (with linearly
// interpolated partial end cells), a fixed panel count for analytic fields.
inline double cylinder_integral(const ScalarField& u, const Region& region,
                                const BallQuadOptions& opt = {}) {
  if (region.kind != Region::Kind::cylinder)
    raise("numerics", "cylinder_integral", "region must be a cylinder");
  const double t0 = region.base_time, t1 = region.time_upper();
  if (t0 < -1e-12 || t1 > u.grid().T + 1e-9)
    raise("numerics", "cylinder_integral", "region exceeds the grid in time");
  Region b = ball(region.radius, region.center);
  const auto at = [&](double t) { return ball_integral(slice(u, t), b, opt); };

  if (u.analytic()) {
    const int m = opt.time_panels;
    const double dt = (t1 - t0) / m;
    double sum = 0.5 * (at(t0) + at(t1));
    for (int j = 1; j < m; ++j) sum += at(t0 + j * dt);
    return sum * dt;
  }

  const double dt = u.grid().dt;
  int j0 = static_cast<int>(std::ceil(t0 / dt - 1e-9));
  int j1 = static_cast<int>(std::floor(t1 / dt + 1e-9));
  j0 = std::max(j0, 0);
  j1 = std::min(j1, u.grid().time_count() - 1);
  if (j0 > j1) {  // interval shorter than one step
    return 0.5 * (at(t0) + at(t1)) * (t1 - t0);
  }
  double sum = 0.0;
  for (int j = j0; j <= j1; ++j) {
    double w = dt;
    if (j == j0 || j == j1) w *= 0.5;
    sum += w * at(u.grid().time(j));
  }
  const double head = u.grid().time(j0) - t0;
  if (head > 1e-12) sum += 0.5 * head * (at(t0) + at(u.grid().time(j0)));
  const double tail = t1 - u.grid().time(j1);
  if (tail > 1e-12) sum += 0.5 * tail * (at(u.grid().time(j1)) + at(t1));
  return sum;
}

inline double region_integral(const ScalarField& u, const Region& region,
                              double ball_time = 0.0,
                              const BallQuadOptions& opt = {}) {
  if (region.kind == Region::Kind::ball)
    return ball_integral(slice(u, ball_time), region, opt);
  return cylinder_integral(u, region, opt);
}

// Constant slice without a backing field; handy for kernel self-tests.
inline FieldSlice constant_slice(int n, double c, const SpaceTimeGrid* grid,
                                 double t = 0.0) {
  FieldSlice s;
  s.n = n;
  s.t = t;
  s.analytic = true;
  s.grid = grid;
  s.value = [c](const Vec&) { return c; };
  s.gradient = [](const Vec&) { return Vec{0, 0, 0}; };
  s.laplacian = [](const Vec&) { return 0.0; };
  s.time_derivative = [](const Vec&) { return 0.0; };
  return s;
}

}  // namespace caloric
