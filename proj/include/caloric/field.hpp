#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "caloric/grid.hpp"

namespace caloric {

enum class DerivativeSource { analytic, finite_difference };

// Closures for a space-time function and its derivatives. Fields sampled from
// exact solutions carry these; solver output does not.
struct AnalyticClosures {
  std::function<double(const Vec&, double)> value;
  std::function<Vec(const Vec&, double)> gradient;
  std::function<double(const Vec&, double)> laplacian;
  std::function<double(const Vec&, double)> time_derivative;
};

// Sampled space-time scalar function u(x,t) on a SpaceTimeGrid. Values are
// stored time-major (slice j holds all nodes at t_j, row-major in space).
// Immutable after construction; all evaluation methods are const and pure.
class ScalarField {
 public:
  static ScalarField from_closures(const SpaceTimeGrid& grid,
                                   AnalyticClosures closures) {
    ScalarField f;
    f.grid_ = grid;
    f.source_ = DerivativeSource::analytic;
    f.closures_ = std::move(closures);
    f.sample_all();
    f.check_finite("from_closures");
    return f;
  }

  static ScalarField from_values(const SpaceTimeGrid& grid,
                                 std::vector<double> values) {
    ScalarField f;
    f.grid_ = grid;
    f.source_ = DerivativeSource::finite_difference;
    const std::int64_t expect = grid.node_count() * grid.time_count();
    if (static_cast<std::int64_t>(values.size()) != expect)
      raise("numerics", "ScalarField", "value array size does not match grid");
    f.values_ = std::move(values);
    f.check_finite("from_values");
    return f;
  }

  const SpaceTimeGrid& grid() const { return grid_; }
  DerivativeSource source() const { return source_; }
  bool analytic() const { return source_ == DerivativeSource::analytic; }
  const AnalyticClosures& closures() const {
    if (!closures_) raise("numerics", "ScalarField", "field has no closures");
    return *closures_;
  }

  double node_value(std::int64_t flat, int time_index) const {
    return values_[static_cast<std::int64_t>(time_index) * grid_.node_count() +
                   flat];
  }

  const double* slice_data(int time_index) const {
    return values_.data() +
           static_cast<std::int64_t>(time_index) * grid_.node_count();
  }

  // Pointwise value at arbitrary (x, t): closures when analytic, multilinear
  // interpolation in space and linear interpolation in time otherwise.
  double value(const Vec& x, double t) const {
    if (analytic()) return closures_->value(x, t);
    return interpolate(x, t);
  }

  Vec gradient(const Vec& x, double t) const {
    if (analytic()) return closures_->gradient(x, t);
    // centered differences of the interpolant; one-sided at the box edge
    Vec g = {0, 0, 0};
    const double d = grid_.h;
    for (int k = 0; k < grid_.n; ++k) {
      Vec xp = x, xm = x;
      xp[k] = std::min(x[k] + d, grid_.L);
      xm[k] = std::max(x[k] - d, -grid_.L);
      g[k] = (interpolate(xp, t) - interpolate(xm, t)) / (xp[k] - xm[k]);
    }
    return g;
  }

  double time_derivative(const Vec& x, double t) const {
    if (analytic()) return closures_->time_derivative(x, t);
    const double d = grid_.dt;
    const double tp = std::min(t + d, grid_.T), tm = std::max(t - d, 0.0);
    return (interpolate(x, tp) - interpolate(x, tm)) / (tp - tm);
  }

  double laplacian(const Vec& x, double t) const {
    if (analytic()) return closures_->laplacian(x, t);
    double lap = 0.0;
    const double d = grid_.h;
    const double c = interpolate(x, t);
    for (int k = 0; k < grid_.n; ++k) {
      Vec xp = x, xm = x;
      xp[k] = x[k] + d;
      xm[k] = x[k] - d;
      lap += (interpolate(xp, t) - 2.0 * c + interpolate(xm, t)) / (d * d);
    }
    return lap;
  }

  // Resample an analytic field onto another grid (used by certifiers that
  // need finer lattices near small Gaussian offsets).
  ScalarField resample(const SpaceTimeGrid& grid) const {
    if (!analytic())
      raise("numerics", "resample", "only analytic fields can be resampled");
    return from_closures(grid, *closures_);
  }

 private:
  void sample_all() {
    const std::int64_t nodes = grid_.node_count();
    const int nt = grid_.time_count();
    const int m = grid_.nodes_per_dim();
    values_.resize(nodes * nt);
    for (int j = 0; j < nt; ++j) {
      const double t = grid_.time(j);
      std::array<int, 3> idx = {0, 0, 0};
      for (std::int64_t f = 0; f < nodes; ++f) {
        std::int64_t rem = f;
        for (int d = grid_.n - 1; d >= 0; --d) {
          idx[d] = static_cast<int>(rem % m);
          rem /= m;
        }
        Vec x = {0, 0, 0};
        for (int d = 0; d < grid_.n; ++d) x[d] = grid_.coord(idx[d]);
        values_[static_cast<std::int64_t>(j) * nodes + f] =
            closures_->value(x, t);
      }
    }
  }

  void check_finite(const char* op) const {
    for (double v : values_)
      if (!std::isfinite(v)) raise("numerics", op, "non-finite field value");
  }

  double interpolate(const Vec& x, double t) const {
    const int nt = grid_.time_count();
    double tj = t / grid_.dt;
    int j0 = static_cast<int>(std::floor(tj));
    j0 = std::max(0, std::min(j0, nt - 2));
    if (nt == 1) j0 = 0;
    const double wt = (nt == 1) ? 0.0 : std::min(1.0, std::max(0.0, tj - j0));
    const double v0 = interpolate_slice(x, j0);
    if (wt == 0.0) return v0;
    const double v1 = interpolate_slice(x, std::min(j0 + 1, nt - 1));
    return (1.0 - wt) * v0 + wt * v1;
  }

  double interpolate_slice(const Vec& x, int j) const {
    const int m = grid_.nodes_per_dim();
    std::array<int, 3> base = {0, 0, 0};
    std::array<double, 3> frac = {0, 0, 0};
    for (int d = 0; d < grid_.n; ++d) {
      double u = (x[d] + grid_.L) / grid_.h;
      int i0 = static_cast<int>(std::floor(u));
      i0 = std::max(0, std::min(i0, m - 2));
      base[d] = i0;
      frac[d] = std::min(1.0, std::max(0.0, u - i0));
    }
    const double* s = slice_data(j);
    double acc = 0.0;
    const int corners = 1 << grid_.n;
    for (int c = 0; c < corners; ++c) {
      std::array<int, 3> idx = base;
      double w = 1.0;
      for (int d = 0; d < grid_.n; ++d) {
        if (c & (1 << d)) {
          idx[d] += 1;
          w *= frac[d];
        } else {
          w *= 1.0 - frac[d];
        }
      }
      acc += w * s[grid_.flat_index(idx)];
    }
    return acc;
  }

  SpaceTimeGrid grid_;
  DerivativeSource source_ = DerivativeSource::finite_difference;
  std::vector<double> values_;
  std::optional<AnalyticClosures> closures_;
};

// A field frozen at one time: what the quadrature and certifier layers
// consume. Carries value/gradient/laplacian/time-derivative callables so
// cutoffs and products can wrap slices without caring about the backing.
struct FieldSlice {
  int n = 1;
  double t = 0.0;
  bool analytic = false;
  const SpaceTimeGrid* grid = nullptr;  // backing grid (lattice default)
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<double(const Vec&)> laplacian;
  std::function<double(const Vec&)> time_derivative;

  double heat_residual(const Vec& x) const {
    return laplacian(x) + time_derivative(x);
  }
};

inline FieldSlice slice(const ScalarField& f, double t) {
  FieldSlice s;
  s.n = f.grid().n;
  s.t = t;
  s.analytic = f.analytic();
  s.grid = &f.grid();
  s.value = [&f, t](const Vec& x) { return f.value(x, t); };
  s.gradient = [&f, t](const Vec& x) { return f.gradient(x, t); };
  s.laplacian = [&f, t](const Vec& x) { return f.laplacian(x, t); };
  s.time_derivative = [&f, t](const Vec& x) { return f.time_derivative(x, t); };
  return s;
}

// Symmetric coefficient matrix field g^{ij}(x,t) with certified ellipticity
// lambda and parabolic Lipschitz constant M. Entries are stored per node in
// packed symmetric order (11, 12, 13, 22, 23, 33 truncated to dimension).
class CoefficientField {
 public:
  using MatrixFn = std::function<void(const Vec&, double, double* packed)>;

  static int packed_size(int n) { return n * (n + 1) / 2; }

  static CoefficientField from_function(const SpaceTimeGrid& grid, MatrixFn fn,
                                        double lambda, double lipschitz,
                                        bool time_dependent = false) {
    if (!(lambda > 0.0 && lambda <= 1.0))
      raise("numerics", "CoefficientField", "lambda must lie in (0,1]");
    if (lipschitz < 0.0)
      raise("numerics", "CoefficientField", "Lipschitz constant must be >= 0");
    CoefficientField c;
    c.grid_ = grid;
    c.lambda_ = lambda;
    c.lipschitz_ = lipschitz;
    c.time_dependent_ = time_dependent;
    c.fn_ = std::move(fn);
    c.verify();
    return c;
  }

  static CoefficientField identity(const SpaceTimeGrid& grid) {
    return from_function(
        grid,
        [n = grid.n](const Vec&, double, double* p) {
          int k = 0;
          for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) p[k++] = (i == j) ? 1.0 : 0.0;
        },
        1.0, 0.0, false);
  }

  const SpaceTimeGrid& grid() const { return grid_; }
  double lambda() const { return lambda_; }
  double lipschitz() const { return lipschitz_; }
  bool time_dependent() const { return time_dependent_; }

  void matrix(const Vec& x, double t, double* packed) const {
    fn_(x, time_dependent_ ? t : 0.0, packed);
  }

  double entry(const Vec& x, double t, int i, int j) const {
    double p[6];
    matrix(x, t, p);
    return packed_entry(p, grid_.n, i, j);
  }

  static double packed_entry(const double* p, int n, int i, int j) {
    if (i > j) std::swap(i, j);
    int k = 0;
    for (int a = 0; a < i; ++a) k += n - a;
    return p[k + (j - i)];
  }

  bool is_identity_at(const Vec& x, double t, double tol = 1e-12) const {
    double p[6];
    matrix(x, t, p);
    int k = 0;
    for (int i = 0; i < grid_.n; ++i)
      for (int j = i; j < grid_.n; ++j, ++k)
        if (std::abs(p[k] - (i == j ? 1.0 : 0.0)) > tol) return false;
    return true;
  }

 private:
  // Invariants checked on a fixed probe set: symmetry is structural (packed
  // storage), ellipticity on probe directions at every node, and the sampled
  // parabolic Lipschitz quotient over adjacent node pairs.
  void verify() const {
    const int n = grid_.n;
    std::vector<Vec> probes;
    for (int i = 0; i < n; ++i) {
      Vec e = {0, 0, 0};
      e[i] = 1.0;
      probes.push_back(e);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Vec e = {0, 0, 0};
        e[i] = 1.0 / std::sqrt(2.0);
        e[j] = 1.0 / std::sqrt(2.0);
        probes.push_back(e);
        e[j] = -e[j];
        probes.push_back(e);
      }
    if (n == 3) probes.push_back({1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0),
                                  1.0 / std::sqrt(3.0)});

    const int m = grid_.nodes_per_dim();
    const int nt = time_dependent_ ? grid_.time_count() : 1;
    const double tol = 1e-9;
    double p[6], q[6];
    std::array<int, 3> idx = {0, 0, 0};
    const std::int64_t nodes = grid_.node_count();
    for (int jt = 0; jt < nt; ++jt) {
      const double t = grid_.time(jt);
      for (std::int64_t f = 0; f < nodes; ++f) {
        std::int64_t rem = f;
        for (int d = n - 1; d >= 0; --d) {
          idx[d] = static_cast<int>(rem % m);
          rem /= m;
        }
        Vec x = {0, 0, 0};
        for (int d = 0; d < n; ++d) x[d] = grid_.coord(idx[d]);
        matrix(x, t, p);
        for (const Vec& xi : probes) {
          double quad = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              quad += packed_entry(p, n, i, j) * xi[i] * xi[j];
          const double nsq = norm_sq(xi, n);
          if (quad < lambda_ * nsq - tol || quad > nsq / lambda_ + tol)
            raise("numerics", "CoefficientField",
                  "ellipticity violated at a grid node");
        }
        // Lipschitz quotient against the +h neighbor in each dimension.
        for (int d = 0; d < n; ++d) {
          if (idx[d] + 1 >= m) continue;
          Vec y = x;
          y[d] += grid_.h;
          matrix(y, t, q);
          double diff = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              diff += std::abs(packed_entry(p, n, i, j) -
                               packed_entry(q, n, i, j));
          if (diff > lipschitz_ * grid_.h + tol)
            raise("numerics", "CoefficientField",
                  "parabolic Lipschitz bound violated in space");
        }
        if (time_dependent_ && jt + 1 < nt) {
          matrix(x, grid_.time(jt + 1), q);
          double diff = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              diff += std::abs(packed_entry(p, n, i, j) -
                               packed_entry(q, n, i, j));
          if (diff > lipschitz_ * std::sqrt(grid_.dt) + tol)
            raise("numerics", "CoefficientField",
                  "parabolic Lipschitz bound violated in time");
        }
      }
    }
  }

  SpaceTimeGrid grid_;
  double lambda_ = 1.0;
  double lipschitz_ = 0.0;
  bool time_dependent_ = false;
  MatrixFn fn_;
};

}  // namespace caloric
