#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "caloric/errors.hpp"

namespace caloric {

// Spatial point in up to three dimensions; unused components stay zero.
using Vec = std::array<double, 3>;

inline double dot(const Vec& a, const Vec& b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a, int n) { return dot(a, a, n); }

inline Vec sub(const Vec& a, const Vec& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

// Uniform tensor-product space-time grid, symmetric about the spatial origin:
// nodes x_i = -L + i*h per dimension and times t_j = j*dt.
struct SpaceTimeGrid {
  int n = 1;         // spatial dimension, 1..3
  double L = 6.0;    // box half-width
  double h = 0.1;    // spatial spacing; L/h must be integral
  double T = 1.0;    // time horizon
  double dt = 0.01;  // time step; T/dt must be integral

  int nodes_per_dim() const { return 2 * static_cast<int>(std::lround(L / h)) + 1; }

  std::int64_t node_count() const {
    std::int64_t m = nodes_per_dim(), c = 1;
    for (int d = 0; d < n; ++d) c *= m;
    return c;
  }

  int time_count() const { return static_cast<int>(std::lround(T / dt)) + 1; }

  double coord(int i) const { return -L + i * h; }
  double time(int j) const { return j * dt; }

  // Nearest node index per dimension; error tolerance is for callers that
  // must land exactly on nodes.
  int nearest_index(double x) const {
    return static_cast<int>(std::lround((x + L) / h));
  }
  int nearest_time_index(double t) const {
    return static_cast<int>(std::lround(t / dt));
  }

  std::int64_t flat_index(const std::array<int, 3>& idx) const {
    const std::int64_t m = nodes_per_dim();
    std::int64_t f = 0;
    for (int d = 0; d < n; ++d) f = f * m + idx[d];
    return f;
  }
};

inline SpaceTimeGrid make_grid(int n, double L, double h, double T, double dt) {
  if (n < 1 || n > 3) raise("numerics", "make_grid", "dimension must be 1..3");
  if (L <= 0 || h <= 0 || T <= 0 || dt <= 0)
    raise("numerics", "make_grid", "grid parameters must be positive");
  const double ratio = L / h;
  if (std::abs(ratio - std::lround(ratio)) > 1e-9 * ratio + 1e-12)
    raise("numerics", "make_grid", "L/h must be a positive integer");
  const double tratio = T / dt;
  if (std::abs(tratio - std::lround(tratio)) > 1e-9 * tratio + 1e-12)
    raise("numerics", "make_grid", "T/dt must be a positive integer");
  SpaceTimeGrid g;
  g.n = n;
  g.L = L;
  g.h = h;
  g.T = T;
  g.dt = dt;
  return g;
}

// Ball B_r(z) or cylinder Q_r(z, tau) = B_r(z) x [tau, tau + r^2].
struct Region {
  enum class Kind { ball, cylinder };
  Kind kind = Kind::ball;
  double radius = 1.0;
  Vec center = {0.0, 0.0, 0.0};
  double base_time = 0.0;  // cylinder only

  double time_upper() const { return base_time + radius * radius; }
};

inline Region ball(double r, Vec z = {0, 0, 0}) {
  if (r <= 0) raise("numerics", "ball", "radius must be positive");
  return Region{Region::Kind::ball, r, z, 0.0};
}

inline Region cylinder(double r, Vec z = {0, 0, 0}, double tau = 0.0) {
  if (r <= 0) raise("numerics", "cylinder", "radius must be positive");
  return Region{Region::Kind::cylinder, r, z, tau};
}

}  // namespace caloric
