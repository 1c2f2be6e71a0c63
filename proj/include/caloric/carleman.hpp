#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "caloric/field.hpp"
#include "caloric/gaussian.hpp"
#include "caloric/quadrature.hpp"
#include "caloric/special.hpp"

// Carleman weight machinery: theta(t) = sqrt(t) log(5/t)^{3/2}, the nested
// integral defining beta, sigma(t) = beta(gamma t)/gamma with gamma =
// alpha/delta^2, the sigma-ODE residual check, the two-sided weight bound
// sweep, and the both-sides evaluator of the Carleman inequality with a large
// parameter alpha. All weighted integrals here run in log space; the sigma
// powers reach ~1e90 for alpha around 16 and beyond.

namespace caloric {

inline double theta_weight(double t) {
  if (t <= 0.0 || t >= 5.0)
    raise("carleman", "theta", "theta is defined on (0, 5)");
  return std::sqrt(t) * std::pow(std::log(5.0 / t), 1.5);
}

namespace detail {

// One integrable endpoint singularity of log^{3/2} type at w = 0: the panel
// [0, head] is bounded by the monotone envelope and added separately, the
// rest goes to adaptive Simpson.
inline double integrate_from_zero(const std::function<double(double)>& f,
                                  double b, double tol) {
  const double head = std::min(b, 1e-13);
  double head_value = 0.0;
  if (head > 0) head_value = f(0.5 * head) * head;
  return head_value + adaptive_simpson(f, head, b, tol);
}

// inner integral I(s) = int_0^s theta(u)/u du, u = w^2
inline double carleman_inner(double s, double tol) {
  if (s <= 0.0) return 0.0;
  return integrate_from_zero(
      [](double w) { return 2.0 * std::pow(std::log(5.0 / (w * w)), 1.5); },
      std::sqrt(s), tol);
}

// outer integrand increment: int_{lo}^{hi} (1 - exp(-I(s))) ds/s, s = w^2
inline double carleman_outer(double lo, double hi, double tol) {
  const auto f = [tol](double w) {
    const double inner = carleman_inner(w * w, 0.05 * tol);
    return 2.0 * (-std::expm1(-inner)) / w;
  };
  if (lo <= 0.0) {
    // near zero the integrand behaves like 4 log(5/w^2)^{3/2}
    const double head = std::min(std::sqrt(hi), 1e-13);
    const double head_value =
        4.0 * std::pow(std::log(5.0 / (head * head)) + 2.0, 1.5) * head;
    return head_value + adaptive_simpson(f, head, std::sqrt(hi), tol);
  }
  return adaptive_simpson(f, std::sqrt(lo), std::sqrt(hi), tol);
}

}  // namespace detail

// beta(t) = t exp[ -int_0^t (1 - exp(-int_0^s theta(u)/u du)) ds/s ].
inline double carleman_beta(double t, double tol = 1e-10) {
  if (t <= 0.0 || t > 4.0)
    raise("carleman", "beta", "beta is evaluated on (0, 4]");
  if (tol <= 0.0) raise("carleman", "beta", "tol must be positive");
  const double J = detail::carleman_outer(0.0, t, tol);
  return t * std::exp(-J);
}

struct CarlemanParams {
  double alpha = 4.0;  // >= 2
  double delta = 0.5;  // in (0, delta0]; delta0 is a config choice here
  double a = 0.0;      // time offset, 0 < a <= 1/gamma

  double gamma() const { return alpha / (delta * delta); }
  double sigma_domain() const { return 4.0 / gamma(); }   // sigma valid here
  double support_window() const { return 3.0 / gamma(); } // recorded window
};

inline CarlemanParams make_carleman_params(double alpha, double delta,
                                           double a) {
  if (alpha < 2.0)
    raise("carleman", "params", "alpha must be at least 2");
  if (!(delta > 0.0 && delta <= 1.0))
    raise("carleman", "params", "delta must lie in (0, 1]");
  CarlemanParams p{alpha, delta, a};
  if (!(a > 0.0 && a <= 1.0 / p.gamma()))
    raise("carleman", "params", "offset a must lie in (0, 1/gamma]");
  return p;
}

// sigma(t) = beta(gamma t)/gamma on (0, 4/gamma].
inline double carleman_sigma(double t, const CarlemanParams& p,
                             double tol = 1e-10) {
  const double g = p.gamma();
  if (t <= 0.0 || g * t > 4.0 * (1.0 + 1e-12))
    raise("carleman", "sigma", "t must lie in (0, 4/gamma]");
  return carleman_beta(std::min(g * t, 4.0), tol) / g;
}

struct CarlemanWeightTable {
  std::vector<double> t;
  std::vector<double> sigma;
  std::vector<double> sigmadot;  // centered-difference estimates
  std::vector<double> theta;     // theta(gamma t)
  double empirical_N = 0.0;      // max over the grid of t / sigma(t)
};

// Table on (0, 4/gamma] built incrementally: the outer integral is extended
// panel by panel, so the cost is one sweep instead of one full nested
// quadrature per sample.
inline CarlemanWeightTable sigma_table(const CarlemanParams& p,
                                       int samples = 256, double tol = 1e-10) {
  if (samples < 2) raise("carleman", "sigma_table", "need at least 2 samples");
  CarlemanWeightTable tab;
  const double g = p.gamma();
  const double step = 4.0 / samples;  // in the beta variable tau = gamma t
  double J = 0.0;
  double tau_prev = 0.0;
  const double panel_tol = tol / samples;
  std::vector<double> beta_at;  // beta(tau_i)
  for (int i = 1; i <= samples; ++i) {
    const double tau = i * step;
    J += detail::carleman_outer(tau_prev, tau, panel_tol);
    tau_prev = tau;
    beta_at.push_back(tau * std::exp(-J));
    tab.t.push_back(tau / g);
    tab.sigma.push_back(beta_at.back() / g);
    tab.theta.push_back(theta_weight(tau));
  }
  tab.empirical_N = 0.0;
  for (int i = 0; i < samples; ++i) {
    tab.empirical_N = std::max(tab.empirical_N, tab.t[i] / tab.sigma[i]);
    if (!(tab.sigma[i] > 0.0 && tab.sigma[i] <= tab.t[i] * (1.0 + 1e-9)))
      raise("carleman", "sigma_table", "sigma bound 0 < sigma <= t violated");
    if (i > 0 && tab.sigma[i] < tab.sigma[i - 1] * (1.0 - 1e-12))
      raise("carleman", "sigma_table", "sigma must be nondecreasing");
  }
  // centered differences in the interior, one-sided at the ends
  tab.sigmadot.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const int lo = std::max(0, i - 1), hi = std::min(samples - 1, i + 1);
    tab.sigmadot[i] = (tab.sigma[hi] - tab.sigma[lo]) / (tab.t[hi] - tab.t[lo]);
  }
  return tab;
}

struct OdeResidualPoint {
  double t;
  double residual;      // |d/dt log(sigma/(t sigmadot)) - theta(gamma t)/t|
  double rel_residual;  // relative to theta(gamma t)/t
};

struct OdeResidualReport {
  std::vector<OdeResidualPoint> points;
  double max_rel_residual = 0.0;
  double sigmadot_at_zero = 0.0;  // extrapolated sigmadot at t -> 0+
  int excluded_points = 0;        // below the differentiation floor
  bool pass = false;
};

// d/dt [ log(sigma/(t sigmadot)) ] = theta(gamma t)/t, sigma(0) = 0,
// sigmadot(0) = 1. Both derivatives are centered differences with one
// Richardson extrapolation level; points below t = 1e-6/gamma are excluded.
inline OdeResidualReport check_sigma_ode(const CarlemanParams& p,
                                         const std::vector<double>& grid,
                                         double pass_tol = 1e-3) {
  OdeResidualReport rep;
  const double g = p.gamma();
  const double floor_t = 1e-6 / g;

  const auto sigma = [&](double t) { return carleman_sigma(t, p, 1e-13); };
  const auto sigmadot = [&](double t, double h) {
    const auto d = [&](double hh) {
      return (sigma(t + hh) - sigma(t - hh)) / (2.0 * hh);
    };
    return (4.0 * d(0.5 * h) - d(h)) / 3.0;  // Richardson
  };

  for (double t : grid) {
    if (t < floor_t) {
      ++rep.excluded_points;
      continue;
    }
    if (t * g >= 4.0) continue;  // stay interior to the sigma domain
    const double h = 5e-3 * t;
    const auto logq = [&](double tt) {
      const double sd = sigmadot(tt, 2e-2 * tt);
      return std::log(sigma(tt) / (tt * sd));
    };
    const auto d = [&](double hh) {
      return (logq(t + hh) - logq(t - hh)) / (2.0 * hh);
    };
    const double lhs = (4.0 * d(0.5 * h) - d(h)) / 3.0;
    const double rhs = theta_weight(g * t) / t;
    OdeResidualPoint pt{t, std::abs(lhs - rhs), std::abs(lhs - rhs) / rhs};
    rep.points.push_back(pt);
    rep.max_rel_residual = std::max(rep.max_rel_residual, pt.rel_residual);
  }
  if (!grid.empty()) {
    const double t0 = std::max(floor_t * 10.0, grid.front());
    rep.sigmadot_at_zero = sigmadot(t0, 0.02 * t0);
  }
  rep.pass = !rep.points.empty() && rep.max_rel_residual <= pass_tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Carleman inequality evaluator.

struct CarlemanTermLogs {
  // log values of the N-independent unit factors of each term
  double lhs_zero_order;   // log( alpha^2 int sigma_a^-alpha v^2 G_a dX )
  double lhs_gradient;     // log( alpha int sigma_a^{1-alpha} |grad v|^2 G_a dX )
  double rhs_residual;     // log( int sigma_a^{1-alpha} |Pv|^2 G_a dX ), N excluded
  double rhs_sup;          // log( sup_t int v^2 + |grad v|^2 dx ), N^a a^a excluded
  double rhs_tzero_grad;   // log( a int |grad v(x,0)|^2 G(x,a) dx ), sign -, 1/N excluded
  double rhs_tzero_value;  // log( alpha int v^2(x,0) G(x,a) dx ), N excluded
  double log_sigma_a_pow;  // -alpha log sigma(a)
};

struct CarlemanEvalReport {
  CarlemanTermLogs terms{};
  double minimal_N = std::numeric_limits<double>::quiet_NaN();
  bool found = false;
  bool monotone_verified = false;  // fails at N*/1.05, holds at N*
  bool at_domain_floor = false;
  bool trivial = false;  // v identically zero
  double sup_time_resolution = 0.0;  // spacing of the sup_t sampling
};

namespace detail {

struct PvEvaluator {
  // |Pv| with P = sum d_i(g^{ij} d_j .) + d_t. The identity case uses the
  // exact closures; a general coefficient field falls back to finite
  // differences of v and g.
  const ScalarField* v;
  const CoefficientField* g;  // nullptr means backward heat
  double fd_h = 1e-4;

  double operator()(const Vec& x, double t) const {
    if (g == nullptr) return v->laplacian(x, t) + v->time_derivative(x, t);
    const int n = v->grid().n;
    double acc = v->time_derivative(x, t);
    for (int i = 0; i < n; ++i) {
      // d_i ( sum_j g^{ij} d_j v ) by centered differences of the flux
      Vec xp = x, xm = x;
      xp[i] += fd_h;
      xm[i] -= fd_h;
      acc += (flux(xp, t, i) - flux(xm, t, i)) / (2.0 * fd_h);
    }
    return acc;
  }

  double flux(const Vec& x, double t, int i) const {
    const int n = v->grid().n;
    const Vec grad = v->gradient(x, t);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += g->entry(x, t, i, j) * grad[j];
    return s;
  }
};

}  // namespace detail

// Both-sides evaluation of the Carleman inequality for compactly supported v:
//   a^2 int s_a^-a v^2 G_a + a int s_a^{1-a} |grad v|^2 G_a
//     <= N int s_a^{1-a} |Pv|^2 G_a + N^a a^a sup_t int v^2 + |grad v|^2
//        + sigma(a)^-a [ -(a/N) int |grad v(.,0)|^2 G(.,a) + N a int v(.,0)^2 G(.,a) ]
// (a = alpha in the weight powers). Returns every term and the minimal
// admissible N >= 1, found by log-scale bisection; the right-hand side is
// nondecreasing in N term by term, which makes the predicate monotone.
inline CarlemanEvalReport carleman_inequality_eval(
    const ScalarField& v, const CarlemanParams& p,
    const CoefficientField* coefficients = nullptr, double support_end = -1.0,
    int time_panels = 96) {
  if (!v.analytic())
    raise("carleman", "inequality_eval", "v must carry analytic closures");
  const int n = v.grid().n;
  const double alpha = p.alpha;
  if (support_end < 0) support_end = p.support_window();

  // preconditions: support inside [0, 3/alpha), sigma domain covers it,
  // coefficients equal the identity at the origin
  if (support_end > 3.0 / alpha + 1e-12)
    raise("carleman", "inequality_eval",
          "support must end before 3/alpha");
  if (support_end + p.a > p.sigma_domain() * (1.0 + 1e-12))
    raise("carleman", "inequality_eval",
          "support plus offset exceeds the sigma domain 4/gamma; decrease "
          "delta or the support");
  if (coefficients != nullptr &&
      !coefficients->is_identity_at({0, 0, 0}, 0.0))
    raise("carleman", "inequality_eval", "g(0,0) must be the identity");
  // compact support in the box interior: boundary nodes must vanish
  {
    const SpaceTimeGrid& g = v.grid();
    const int m = g.nodes_per_dim();
    for (int j = 0; j < g.time_count(); ++j) {
      Vec edge = {0, 0, 0};
      edge[0] = g.L;
      if (std::abs(v.value(edge, g.time(j))) > 0.0 ||
          std::abs(v.value({-g.L, 0, 0}, g.time(j))) > 0.0)
        raise("carleman", "inequality_eval",
              "v must vanish on the box boundary");
    }
    (void)m;
  }

  // sigma values cached on the time grid
  const int M = time_panels;
  const double dt = support_end / M;
  std::vector<double> log_sigma_a(M + 1);
  for (int j = 0; j <= M; ++j)
    log_sigma_a[j] = std::log(carleman_sigma(j * dt + p.a, p, 1e-12));

  detail::PvEvaluator pv{&v, coefficients, 1e-4};

  WeightedQuadOptions quad;
  quad.auto_lattice = true;
  quad.feature_scale = 0.25;  // bump profiles vary on this scale

  // log of int phi G_a dx at time t, with trapezoid weights in time folded in
  const auto space_log = [&](int j, const std::function<double(const Vec&)>& lphi) {
    GaussianWeight w{n, {0, 0, 0}, p.a};
    FieldSlice s = slice(v, j * dt);
    return log_weighted_integral(s, w, lphi, quad);
  };

  LogSumAccumulator t1, t2, t3;
  for (int j = 0; j <= M; ++j) {
    const double t = j * dt;
    const double wt = (j == 0 || j == M) ? 0.5 * dt : dt;
    const double l0 = space_log(j, [&](const Vec& x) {
      const double val = v.value(x, t);
      if (val == 0.0) return -std::numeric_limits<double>::infinity();
      return -alpha * log_sigma_a[j] + 2.0 * std::log(std::abs(val));
    });
    t1.add(l0 + std::log(wt));
    const double l1 = space_log(j, [&](const Vec& x) {
      const Vec gr = v.gradient(x, t);
      const double g2 = norm_sq(gr, n);
      if (g2 == 0.0) return -std::numeric_limits<double>::infinity();
      return (1.0 - alpha) * log_sigma_a[j] + std::log(g2);
    });
    t2.add(l1 + std::log(wt));
    const double l2 = space_log(j, [&](const Vec& x) {
      const double r = pv(x, t);
      if (r == 0.0) return -std::numeric_limits<double>::infinity();
      return (1.0 - alpha) * log_sigma_a[j] + 2.0 * std::log(std::abs(r));
    });
    t3.add(l2 + std::log(wt));
  }

  // sup_t of the plain energy integral int v^2 + |grad v|^2 dx, sampled on
  // the same time grid; v is compactly supported inside the box, so the plain
  // trapezoid sum over the field's grid is exact up to resolution.
  double log_sup = -std::numeric_limits<double>::infinity();
  {
    const SpaceTimeGrid& g = v.grid();
    const int m = g.nodes_per_dim();
    const double hn = std::pow(g.h, n);
    for (int j = 0; j <= M; ++j) {
      const double t = j * dt;
      double energy = 0.0;
      std::array<int, 3> idx = {0, 0, 0};
      const std::int64_t nodes = g.node_count();
      for (std::int64_t fidx = 0; fidx < nodes; ++fidx) {
        std::int64_t rem = fidx;
        for (int d = n - 1; d >= 0; --d) {
          idx[d] = static_cast<int>(rem % m);
          rem /= m;
        }
        Vec x = {0, 0, 0};
        for (int d = 0; d < n; ++d) x[d] = g.coord(idx[d]);
        const double val = v.value(x, t);
        const Vec gr = v.gradient(x, t);
        energy += val * val + norm_sq(gr, n);
      }
      if (energy > 0.0)
        log_sup = std::max(log_sup, std::log(energy * hn));
    }
  }

  // t = 0 boundary integrals against G(x, a)
  GaussianWeight wa{n, {0, 0, 0}, p.a};
  FieldSlice s0 = slice(v, 0.0);
  const double log_A = log_weighted_integral(s0, wa, [&](const Vec& x) {
    const Vec gr = v.gradient(x, 0.0);
    const double g2 = norm_sq(gr, n);
    return g2 == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(g2);
  }, quad);
  const double log_B = log_weighted_integral(s0, wa, [&](const Vec& x) {
    const double val = v.value(x, 0.0);
    return val == 0.0 ? -std::numeric_limits<double>::infinity()
                      : 2.0 * std::log(std::abs(val));
  }, quad);

  CarlemanEvalReport rep;
  rep.sup_time_resolution = dt;
  rep.terms.lhs_zero_order = 2.0 * std::log(alpha) + t1.log_value();
  rep.terms.lhs_gradient = std::log(alpha) + t2.log_value();
  rep.terms.rhs_residual = t3.log_value();
  rep.terms.rhs_sup = log_sup;
  rep.terms.log_sigma_a_pow = -alpha * std::log(carleman_sigma(p.a, p, 1e-12));
  rep.terms.rhs_tzero_grad = std::log(p.a) + log_A;
  rep.terms.rhs_tzero_value = std::log(alpha) + log_B;

  const bool lhs_empty = std::isinf(rep.terms.lhs_zero_order) &&
                         std::isinf(rep.terms.lhs_gradient);
  if (lhs_empty && std::isinf(rep.terms.rhs_residual)) {
    rep.trivial = true;
    rep.minimal_N = 1.0;
    rep.found = true;
    rep.at_domain_floor = true;
    return rep;
  }

  const auto pred = [&](double N) {
    const double logN = std::log(N);
    LogSumAccumulator lhs;
    lhs.add(rep.terms.lhs_zero_order);
    lhs.add(rep.terms.lhs_gradient);
    lhs.add(rep.terms.log_sigma_a_pow - logN + rep.terms.rhs_tzero_grad);
    LogSumAccumulator rhs;
    rhs.add(logN + rep.terms.rhs_residual);
    rhs.add(alpha * (logN + std::log(alpha)) + rep.terms.rhs_sup);
    rhs.add(rep.terms.log_sigma_a_pow + logN + rep.terms.rhs_tzero_value);
    return lhs.log_value() <= rhs.log_value();
  };
  const MinimalConstant mc = minimal_constant(pred, 1.0, 1e6);
  rep.minimal_N = mc.value;
  rep.found = mc.found;
  rep.at_domain_floor = mc.at_domain_floor;
  rep.monotone_verified = mc.holds_at_value && (mc.fails_below || mc.at_domain_floor);
  return rep;
}

// ---------------------------------------------------------------------------
// Weight-envelope sweep: maximize sigma_a^{1-alpha} G_a over the shell
// B_4 x [0, 2/alpha] minus B_3 x [0, 1/alpha] and report the minimal N with
// max <= N^{alpha + n/2} alpha^{alpha + n/2 - 1}.

struct WeightBoundReport {
  double log_max = -std::numeric_limits<double>::infinity();
  double argmax_r = 0.0;
  double argmax_t = 0.0;
  double minimal_N = 1.0;
  bool resolution_error = false;  // time grid cannot resolve [0, 2/alpha]
  bool domain_clipped = false;    // sigma domain clipped the time range
};

inline WeightBoundReport check_sigma_weight_bound(const CarlemanParams& p,
                                                  int n, double dt,
                                                  double dr = 0.01) {
  WeightBoundReport rep;
  const double alpha = p.alpha;
  double t_max = 2.0 / alpha;
  if (dt > t_max + 1e-15) {
    rep.resolution_error = true;
    return rep;
  }
  if (t_max + p.a > p.sigma_domain()) {
    t_max = p.sigma_domain() - p.a;
    rep.domain_clipped = true;
  }
  const int mt = static_cast<int>(std::floor(t_max / dt + 1e-12));
  const int mr = static_cast<int>(std::floor(4.0 / dr + 1e-12));
  for (int j = 0; j <= mt; ++j) {
    const double t = j * dt;
    const double ls = std::log(carleman_sigma(t + p.a, p, 1e-11));
    for (int i = 0; i <= mr; ++i) {
      const double r = i * dr;
      const bool inner = (r < 3.0) && (t <= 1.0 / alpha + 1e-15);
      if (inner) continue;
      const double lg =
          -0.5 * n * std::log(t + p.a) - r * r / (4.0 * (t + p.a));
      const double val = (1.0 - alpha) * ls + lg;
      if (val > rep.log_max) {
        rep.log_max = val;
        rep.argmax_r = r;
        rep.argmax_t = t;
      }
    }
  }
  const double exponent = alpha + 0.5 * n;
  rep.minimal_N = std::max(
      1.0, std::exp((rep.log_max - (exponent - 1.0) * std::log(alpha)) /
                    exponent));
  return rep;
}

}  // namespace caloric
