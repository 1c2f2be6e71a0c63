#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "caloric/errors.hpp"

// Small numerical toolbox: half-integer incomplete gamma functions, Gaussian
// tail radii, Gauss-Legendre rules, adaptive Simpson quadrature, stable
// log-sum accumulation and monotone bisection. Everything here is
// deterministic: fixed iteration counts or fixed stopping rules, no state.

namespace caloric {

inline constexpr double kPi = 3.14159265358979323846;

// Regularized upper incomplete gamma Q(a, x) for a = twice_a/2 (half-integer
// orders only, which covers Gaussian tails in dimensions 1..3 with polynomial
// envelopes). Upward recurrence from Q(1/2,x) = erfc(sqrt(x)) or Q(1,x) =
// exp(-x); the recurrence adds positive terms, so it is stable.
inline double gamma_q_half(int twice_a, double x) {
  if (twice_a < 1) raise("numerics", "gamma_q_half", "order must be >= 1/2");
  if (x < 0) raise("numerics", "gamma_q_half", "negative argument");
  double q;
  int k;  // current twice-order
  if (twice_a % 2 == 1) {
    q = std::erfc(std::sqrt(x));
    k = 1;
  } else {
    q = std::exp(-x);
    k = 2;
  }
  // Q(a+1,x) = Q(a,x) + x^a e^{-x} / Gamma(a+1)
  while (k < twice_a) {
    const double a = 0.5 * k;
    const double log_term = a * std::log(x) - x - std::lgamma(a + 1.0);
    q += std::exp(log_term);
    k += 2;
  }
  return std::min(q, 1.0);
}

// Inverse of x -> gamma_q_half(twice_a, x): returns x with Q(a,x) = q.
// Bisection on a bracket grown geometrically; Q is strictly decreasing.
inline double gamma_q_inv_half(int twice_a, double q) {
  if (!(q > 0.0 && q < 1.0))
    raise("numerics", "gamma_q_inv_half", "q must lie in (0,1)");
  double lo = 0.0, hi = 1.0;
  while (gamma_q_half(twice_a, hi) > q && hi < 1e6) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_q_half(twice_a, mid) > q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Nodes and weights of the k-point Gauss-Legendre rule on [-1,1], by Newton
// iteration on the Legendre polynomial. Deterministic and cached per order.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule make_gauss_legendre(int k) {
  GaussRule rule;
  rule.nodes.resize(k);
  rule.weights.resize(k);
  for (int i = 0; i < k; ++i) {
    // Chebyshev initial guess
    double x = std::cos(kPi * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // evaluate P_k and P_k' by the three-term recurrence
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= k; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = k * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

inline const GaussRule& gauss_legendre(int k) {
  static std::array<GaussRule, 65> cache;  // orders up to 64
  if (k < 1 || k > 64) raise("numerics", "gauss_legendre", "order out of range");
  if (cache[k].nodes.empty()) cache[k] = make_gauss_legendre(k);
  return cache[k];
}

// Integrate f over [a,b] with the k-point Gauss-Legendre rule.
inline double gauss_integrate(const std::function<double(double)>& f, double a,
                              double b, int k) {
  const GaussRule& rule = gauss_legendre(k);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < k; ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

namespace detail {

inline double simpson(double fa, double fm, double fb, double h6) {
  return h6 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double m, double b, double fa,
                                   double fm, double fb, double whole,
                                   double tol, int depth, int max_depth,
                                   bool* depth_hit) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, (m - a) / 6.0);
  const double right = simpson(fm, frm, fb, (b - m) / 6.0);
  const double delta = left + right - whole;
  if (depth >= max_depth) {
    *depth_hit = true;
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol,
                              depth + 1, max_depth, depth_hit) +
         adaptive_simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol,
                              depth + 1, max_depth, depth_hit);
}

}  // namespace detail

// Adaptive Simpson quadrature with absolute tolerance. The subdivision cap
// (2^max_depth panels) raises an error when the tolerance cannot be met.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol, int max_depth = 20) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = detail::simpson(fa, fm, fb, (b - a) / 6.0);
  bool depth_hit = false;
  const double value = detail::adaptive_simpson_rec(
      f, a, m, b, fa, fm, fb, whole, tol, 0, max_depth, &depth_hit);
  if (depth_hit)
    raise("numerics", "adaptive_simpson",
          "tolerance not met within subdivision cap");
  return value;
}

// Streaming log-sum-exp: accumulates log(sum_i w_i * exp(L_i)) with positive
// w_i, rescaling on the fly. Summation order is the insertion order, so
// results are bit-stable for a fixed traversal.
class LogSumAccumulator {
 public:
  void add(double log_term, double weight = 1.0) {
    if (weight <= 0.0) return;
    const double l = log_term + std::log(weight);
    if (std::isinf(l) && l < 0) return;
    if (l > max_) {
      if (max_ == -std::numeric_limits<double>::infinity())
        sum_ = 1.0;
      else
        sum_ = sum_ * std::exp(max_ - l) + 1.0;
      max_ = l;
    } else {
      sum_ += std::exp(l - max_);
    }
  }

  bool empty() const { return max_ == -std::numeric_limits<double>::infinity(); }

  double log_value() const {
    if (empty()) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

  double value() const { return empty() ? 0.0 : std::exp(log_value()); }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

// Smallest constant in [lo, hi] (log scale) making a monotone predicate true.
// Returns hi+1 sentinel semantics through `found = false` when even hi fails.
struct MinimalConstant {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool found = false;
  bool at_domain_floor = false;  // predicate already true at lo
  bool holds_at_value = false;
  bool fails_below = false;  // predicate false at value/1.05 (monotone guard)
};

inline MinimalConstant minimal_constant(
    const std::function<bool(double)>& pred, double lo = 1.0, double hi = 1e6) {
  MinimalConstant out;
  if (pred(lo)) {
    out.value = lo;
    out.found = true;
    out.at_domain_floor = true;
    out.holds_at_value = true;
    out.fails_below = !pred(lo / 1.05);
    return out;
  }
  if (!pred(hi)) return out;  // not found below cap
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (llo + lhi);
    if (pred(std::exp(mid)))
      lhi = mid;
    else
      llo = mid;
  }
  out.value = std::exp(lhi);
  out.found = true;
  out.holds_at_value = pred(out.value);
  out.fails_below = !pred(out.value / 1.05);
  return out;
}

}  // namespace caloric
