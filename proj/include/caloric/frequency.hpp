#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "caloric/cutoff.hpp"
#include "caloric/field.hpp"
#include "caloric/gaussian.hpp"
#include "caloric/quadrature.hpp"

// Parabolic frequency machinery: H_a(t) = int f^2 G_a dx, D_a(t) =
// int |grad f|^2 G_a dx and the frequency N_a(t) = 2 (t+a) D_a / H_a, with
// centered-difference derivative estimates and the differentiation-identity
// checks. Identity checks run only on analytic-derivative fields, so they
// isolate quadrature error from discretization error.

namespace caloric {

using SliceProvider = std::function<FieldSlice(double)>;

inline SliceProvider provider(const ScalarField& f) {
  return [&f](double t) { return slice(f, t); };
}

inline SliceProvider provider(const ScalarField& f, const RadialCutoff& cut) {
  return [&f, cut](double t) { return cutoff_slice(slice(f, t), cut); };
}

struct FrequencyPoint {
  double t = 0.0;
  double H = 0.0;
  double D = 0.0;
  double N = 0.0;
  double Hdot = 0.0;
  double Ndot = 0.0;
};

struct FrequencyTrace {
  GaussianWeight weight;
  std::vector<FrequencyPoint> points;
};

struct TraceOptions {
  double fd_step = 1e-4;  // raised to the grid step for sampled fields
  double h_floor = 1e-300;
  WeightedQuadOptions quad;
};

namespace detail {

struct HD {
  double H;
  double D;
};

inline HD frequency_integrals(const SliceProvider& src,
                              const GaussianWeight& w, double t,
                              const WeightedQuadOptions& quad) {
  FieldSlice s = src(t);
  GaussianWeight wt = w;
  const double H = weighted_integral(s, wt, Integrand::f_squared(), quad).value;
  const double D = weighted_integral(s, wt, Integrand::grad_squared(), quad).value;
  return {H, D};
}

}  // namespace detail

// Frequency value at one time; H is computed before N and the division is
// guarded by the absolute floor (degenerate fields raise).
inline FrequencyPoint frequency_at(const SliceProvider& src,
                                   const GaussianWeight& w, double t,
                                   const TraceOptions& opt = {}) {
  if (w.a <= 0 && t <= 0)
    raise("frequency", "trace", "offset a and t + a must be positive");
  auto [H, D] = detail::frequency_integrals(src, w, t, opt.quad);
  if (!(H > opt.h_floor))
    raise("frequency", "trace", "degenerate field: H_a below absolute floor");
  FrequencyPoint p;
  p.t = t;
  p.H = H;
  p.D = D;
  p.N = 2.0 * (t + w.a) * D / H;
  return p;
}

inline FrequencyTrace trace(const SliceProvider& src, const GaussianWeight& w,
                            const std::vector<double>& times,
                            const TraceOptions& opt = {}) {
  FrequencyTrace tr;
  tr.weight = w;
  double step = opt.fd_step;
  if (!times.empty()) {
    FieldSlice probe = src(times.front());
    if (!probe.analytic && probe.grid != nullptr)
      step = std::max(step, probe.grid->dt);
  }
  for (double t : times) {
    FrequencyPoint p = frequency_at(src, w, t, opt);
    // centered differences; one-sided at the sampled-field time boundary
    double tm = t - step, tp = t + step;
    FieldSlice probe = src(t);
    if (!probe.analytic) {
      tm = std::max(tm, 0.0);
      if (probe.grid != nullptr) tp = std::min(tp, probe.grid->T);
    }
    const FrequencyPoint pm = frequency_at(src, w, tm, opt);
    const FrequencyPoint pp = frequency_at(src, w, tp, opt);
    p.Hdot = (pp.H - pm.H) / (tp - tm);
    p.Ndot = (pp.N - pm.N) / (tp - tm);
    tr.points.push_back(p);
  }
  return tr;
}

inline FrequencyTrace trace(const ScalarField& f, double a,
                            const std::vector<double>& times,
                            TraceOptions opt = {}) {
  GaussianWeight w;
  w.n = f.grid().n;
  w.a = a;
  if (f.analytic()) opt.quad.auto_lattice = true;
  return trace(provider(f), w, times, opt);
}

struct ResidualReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_residual = 0.0;
  double rel_residual = 0.0;  // abs residual over the natural scale
  double scale = 0.0;  // max(|lhs|, |rhs|, H/(t+a)); keeps zero sides harmless
  double fd_error_bar = 0.0;  // O(step^2) bound on the derivative estimate
};

namespace detail {

inline void require_analytic(const ScalarField& f, const char* op) {
  if (!f.analytic())
    raise("frequency", op,
          "identity checks are restricted to analytic-derivative fields");
}

struct DerivativeProbe {
  double centered;   // (g(t+d) - g(t-d)) / 2d
  double error_bar;  // |g'''| d^2 / 6 from a five-point third difference
};

inline DerivativeProbe centered_derivative(
    const std::function<double(double)>& g, double t, double d) {
  const double gp = g(t + d), gm = g(t - d);
  const double gp2 = g(t + 2 * d), gm2 = g(t - 2 * d);
  DerivativeProbe out;
  out.centered = (gp - gm) / (2.0 * d);
  const double third = (gp2 - 2.0 * gp + 2.0 * gm - gm2) / (2.0 * d * d * d);
  out.error_bar = std::abs(third) * d * d / 6.0 + 1e-14 * std::abs(out.centered);
  return out;
}

}  // namespace detail

// E:deriv check -- Hdot = 2 int f (lap f + dt f) G_a dx + 2 D_a.
inline ResidualReport check_H_dot_identity(const ScalarField& f, double a,
                                           double t, TraceOptions opt = {}) {
  detail::require_analytic(f, "check_H_dot_identity");
  opt.quad.auto_lattice = true;
  GaussianWeight w{f.grid().n, {0, 0, 0}, a};
  SliceProvider src = provider(f);
  const auto H = [&](double tt) {
    return detail::frequency_integrals(src, w, tt, opt.quad).H;
  };
  const auto probe = detail::centered_derivative(H, t, opt.fd_step);

  FieldSlice s = src(t);
  const double D = weighted_integral(s, w, Integrand::grad_squared(), opt.quad).value;
  const double cross =
      weighted_integral(s, w,
                        Integrand::custom(
                            [](const Vec& x, const FieldSlice& sl) {
                              return sl.value(x) * sl.heat_residual(x);
                            }),
                        opt.quad)
          .value;
  const double Hval = H(t);
  ResidualReport r;
  r.lhs = probe.centered;
  r.rhs = 2.0 * cross + 2.0 * D;
  r.abs_residual = std::abs(r.lhs - r.rhs);
  r.scale = std::max({std::abs(r.lhs), std::abs(r.rhs), Hval / (t + a)});
  r.rel_residual = r.abs_residual / std::max(r.scale, 1e-300);
  r.fd_error_bar = probe.error_bar;
  return r;
}

// E:derv2 check -- Ddot equals the Rellich-Necas expression
//   2 int (dt f + (x.grad f)/2(t+a) - (lap f + dt f)/2)^2 G_a dx
//   - (1/2) int (lap f + dt f)^2 G_a dx - D_a/(t+a).
inline ResidualReport check_D_dot_identity(const ScalarField& f, double a,
                                           double t, TraceOptions opt = {}) {
  detail::require_analytic(f, "check_D_dot_identity");
  opt.quad.auto_lattice = true;
  GaussianWeight w{f.grid().n, {0, 0, 0}, a};
  SliceProvider src = provider(f);
  const auto D = [&](double tt) {
    return detail::frequency_integrals(src, w, tt, opt.quad).D;
  };
  const auto probe = detail::centered_derivative(D, t, opt.fd_step);

  const double s_ta = t + a;
  FieldSlice s = src(t);
  const int n = f.grid().n;
  const double sq = weighted_integral(
      s, w,
      Integrand::custom([s_ta, n, &w](const Vec& x, const FieldSlice& sl) {
        const Vec g = sl.gradient(x);
        const double radial = dot(sub(x, w.center), g, n);
        const double q = sl.time_derivative(x) + radial / (2.0 * s_ta) -
                         0.5 * sl.heat_residual(x);
        return q * q;
      }),
      opt.quad).value;
  const double res =
      weighted_integral(s, w, Integrand::heat_residual_squared(), opt.quad).value;
  const double Dval =
      weighted_integral(s, w, Integrand::grad_squared(), opt.quad).value;

  const double Hval =
      weighted_integral(s, w, Integrand::f_squared(), opt.quad).value;
  ResidualReport r;
  r.lhs = probe.centered;
  r.rhs = 2.0 * sq - 0.5 * res - Dval / s_ta;
  r.abs_residual = std::abs(r.lhs - r.rhs);
  r.scale = std::max({std::abs(r.lhs), std::abs(r.rhs), Dval / s_ta,
                      Hval / (s_ta * s_ta)});
  r.rel_residual = r.abs_residual / std::max(r.scale, 1e-300);
  r.fd_error_bar = probe.error_bar;
  return r;
}

struct FrequencyBoundReport {
  double ndot = 0.0;
  double bound = 0.0;  // -(t+a)/H int (lap f + dt f)^2 G_a dx
  double slack = 0.0;  // ndot - bound
  bool pass = false;
};

// Lemma (frequency) conclusion: Ndot >= -(t+a)/H int (lap f + dt f)^2 G_a.
inline FrequencyBoundReport check_frequency_derivative_bound(
    const ScalarField& f, double a, double t, double tol = 1e-6,
    TraceOptions opt = {}) {
  if (f.analytic()) opt.quad.auto_lattice = true;
  GaussianWeight w{f.grid().n, {0, 0, 0}, a};
  SliceProvider src = provider(f);
  FrequencyTrace tr = trace(src, w, {t}, opt);
  FieldSlice s = src(t);
  const double res =
      weighted_integral(s, w, Integrand::heat_residual_squared(), opt.quad).value;
  FrequencyBoundReport r;
  r.ndot = tr.points[0].Ndot;
  r.bound = -(t + a) / tr.points[0].H * res;
  r.slack = r.ndot - r.bound;
  r.pass = r.slack >= -tol;
  return r;
}

struct MonotonicityReport {
  std::vector<double> times;
  std::vector<double> frequency;      // N_a(t) of the cutoff field
  double candidate_N = 0.0;
  double min_forward_difference = 0.0;  // of m(t) = e^{Nt} N_a + N e^{Nt}
  double minimal_N = 0.0;               // smallest admissible from the scan
  bool minimal_found = false;
  bool window_clipped = false;
  bool pass = false;
};

// E:incres -- m(t) = e^{Nt} N_a(t) + N e^{Nt} must be non-decreasing while
// t + a <= 1/(N log(N Theta)). The trace is computed once; candidates from a
// geometric grid reuse it.
inline MonotonicityReport check_almost_monotonicity(
    const ScalarField& u, double candidate_N, double a, double t0, double t1,
    double theta, double tol = 1e-6, TraceOptions opt = {}) {
  if (u.analytic()) opt.quad.auto_lattice = true;
  GaussianWeight w{u.grid().n, {0, 0, 0}, a};
  SliceProvider src = provider(u, psi_cutoff());

  // sample on grid times inside [t0, t1] (at least 9 samples for analytic)
  std::vector<double> times;
  if (!u.analytic()) {
    const double dt = u.grid().dt;
    for (int j = 0;; ++j) {
      const double t = j * dt;
      if (t > t1 + 1e-12 || t > u.grid().T + 1e-12) break;
      if (t >= t0 - 1e-12) times.push_back(t);
    }
  } else {
    const int m = 16;
    for (int j = 0; j <= m; ++j) times.push_back(t0 + (t1 - t0) * j / m);
  }
  if (times.size() < 2)
    raise("frequency", "check_almost_monotonicity", "window has fewer than two samples");

  FrequencyTrace tr = trace(src, w, times, opt);
  MonotonicityReport rep;
  rep.times = times;
  for (const auto& p : tr.points) rep.frequency.push_back(p.N);
  rep.candidate_N = candidate_N;

  const auto evaluate = [&](double N, bool* clipped) {
    const double window = 1.0 / (N * std::log(std::max(N * theta, 1.0 + 1e-12)));
    double min_diff = std::numeric_limits<double>::infinity();
    int used = 0;
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
      if (times[j + 1] + a > window) {
        *clipped = true;
        break;
      }
      const double m0 =
          std::exp(N * times[j]) * (rep.frequency[j] + N);
      const double m1 =
          std::exp(N * times[j + 1]) * (rep.frequency[j + 1] + N);
      min_diff = std::min(min_diff, m1 - m0);
      ++used;
    }
    if (used == 0) min_diff = -std::numeric_limits<double>::infinity();
    return min_diff;
  };

  rep.min_forward_difference = evaluate(candidate_N, &rep.window_clipped);
  rep.pass = rep.min_forward_difference >= -tol;

  for (double N = 1.0; N <= 1e6; N *= 1.1) {
    bool clipped = false;
    if (evaluate(N, &clipped) >= -tol) {
      rep.minimal_N = N;
      rep.minimal_found = true;
      break;
    }
  }
  return rep;
}

}  // namespace caloric
