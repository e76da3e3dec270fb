#pragma once

// Points, stereographic charts, chart grids and quadrature on the unit sphere.
//
// The sphere is covered by two stereographic charts. NorthChart projects from
// (0,0,1), so its origin is the south pole; SouthChart projects from (0,0,-1).
// With the formulas below the transition on the overlap is z_S = 1/z_N.
// Scalar fields are sampled on a uniform n x n grid over [-R, R]^2 in each
// chart, and integrals are glued with a smooth partition of unity that is
// supported in |z| < R.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "conflab/error.hpp"
#include "conflab/numerics.hpp"
#include "conflab/parallel.hpp"

namespace conflab {

using Complex = std::complex<double>;

/// A point of the unit sphere in ambient coordinates. Always unit length.
class SpherePoint {
 public:
  SpherePoint() : x_{0.0, 0.0, -1.0} {}
  SpherePoint(double x1, double x2, double x3) {
    const double norm = std::sqrt(x1 * x1 + x2 * x2 + x3 * x3);
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw Error(ErrorCode::InvalidArgument, "SpherePoint needs a finite nonzero vector");
    x_ = {x1 / norm, x2 / norm, x3 / norm};
  }

  double x1() const { return x_[0]; }
  double x2() const { return x_[1]; }
  double x3() const { return x_[2]; }
  const std::array<double, 3>& coords() const { return x_; }

  double dot(const SpherePoint& o) const { return x_[0] * o.x_[0] + x_[1] * o.x_[1] + x_[2] * o.x_[2]; }
  SpherePoint antipode() const { return SpherePoint(-x_[0], -x_[1], -x_[2]); }

  /// Great-circle distance, accurate for nearby and nearly antipodal points.
  double distance(const SpherePoint& o) const {
    const double cx = x_[1] * o.x_[2] - x_[2] * o.x_[1];
    const double cy = x_[2] * o.x_[0] - x_[0] * o.x_[2];
    const double cz = x_[0] * o.x_[1] - x_[1] * o.x_[0];
    return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot(o));
  }

 private:
  std::array<double, 3> x_;
};

inline const SpherePoint kSouthPole{0.0, 0.0, -1.0};
inline const SpherePoint kNorthPole{0.0, 0.0, 1.0};

/// Deterministic, nearly uniform point set (golden-angle spiral), index 0
/// nearest the south pole.
inline std::vector<SpherePoint> fibonacci_sphere(std::size_t count) {
  std::vector<SpherePoint> pts;
  pts.reserve(count);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < count; ++i) {
    const double x3 = -1.0 + (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
    const double r = std::sqrt(std::max(0.0, 1.0 - x3 * x3));
    const double phi = golden * static_cast<double>(i);
    pts.emplace_back(r * std::cos(phi), r * std::sin(phi), x3);
  }
  return pts;
}

/// The fixed 26-point set: centres of the faces, edges and vertices of the
/// cube, projected to the sphere.
inline std::vector<SpherePoint> cube_directions() {
  std::vector<SpherePoint> pts;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c)
        if (a != 0 || b != 0 || c != 0) pts.emplace_back(a, b, c);
  return pts;
}

enum class ChartId { North, South };

inline const char* to_string(ChartId c) { return c == ChartId::North ? "north" : "south"; }

inline ChartId chart_from_string(const std::string& s) {
  if (s == "north") return ChartId::North;
  if (s == "south") return ChartId::South;
  throw Error(ErrorCode::InvalidArgument, "unknown chart '" + s + "'");
}

/// Stereographic coordinate of p. North: (x1 + i x2)/(1 - x3); South:
/// (x1 - i x2)/(1 + x3).
inline Complex stereo_project(const SpherePoint& p, ChartId chart) {
  const SpherePoint& pole = chart == ChartId::North ? kNorthPole : kSouthPole;
  if (p.distance(pole) <= 1e-9)
    throw Error(ErrorCode::PoleSingularity, std::string("point is the projection pole of the ") +
                                                to_string(chart) + " chart");
  const double r2 = p.x1() * p.x1() + p.x2() * p.x2();
  // 1 -+ x3 rewritten as r2 / (1 +- x3) when it would cancel.
  if (chart == ChartId::North) {
    const double denom = p.x3() > 0.0 ? r2 / (1.0 + p.x3()) : 1.0 - p.x3();
    return {p.x1() / denom, p.x2() / denom};
  }
  const double denom = p.x3() < 0.0 ? r2 / (1.0 - p.x3()) : 1.0 + p.x3();
  return {p.x1() / denom, -p.x2() / denom};
}

inline SpherePoint stereo_lift(Complex z, ChartId chart) {
  const double r2 = std::norm(z);
  const double s = 1.0 + r2;
  if (chart == ChartId::North) return {2.0 * z.real() / s, 2.0 * z.imag() / s, (r2 - 1.0) / s};
  return {2.0 * z.real() / s, -2.0 * z.imag() / s, (1.0 - r2) / s};
}

/// Conformal exponent of the round metric in either chart: g = e^{2 v0}|dz|^2.
inline double round_factor(Complex z) { return std::log(2.0 / (1.0 + std::norm(z))); }

/// Samples of a scalar on one chart. Row i, column j sits at
/// z = (-R + j h) + i (-R + i h), h = 2R/(n-1), row-major.
struct GridField {
  ChartId chart = ChartId::North;
  double half_width = 2.0;
  int n = 257;
  std::vector<double> values;

  GridField() = default;
  GridField(ChartId c, double r, int size, double fill = 0.0) : chart(c), half_width(r), n(size) {
    if (size < 33 || size % 2 == 0)
      throw Error(ErrorCode::InvalidArgument, "grid size must be odd and >= 33");
    if (!(r > 1.0)) throw Error(ErrorCode::InvalidArgument, "chart half width must exceed 1");
    values.assign(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), fill);
  }

  double step() const { return 2.0 * half_width / (n - 1); }
  Complex z(int i, int j) const { return {-half_width + j * step(), -half_width + i * step()}; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
  bool on_boundary_ring(int i, int j) const { return i == 0 || j == 0 || i == n - 1 || j == n - 1; }

  /// Bilinear interpolation at chart coordinate z (clamped to the grid).
  double interpolate(Complex zq) const {
    const double h = step();
    const double fx = std::clamp((zq.real() + half_width) / h, 0.0, n - 1.0);
    const double fy = std::clamp((zq.imag() + half_width) / h, 0.0, n - 1.0);
    const int j = std::min(static_cast<int>(fx), n - 2);
    const int i = std::min(static_cast<int>(fy), n - 2);
    const double tx = fx - j, ty = fy - i;
    return (1 - ty) * ((1 - tx) * at(i, j) + tx * at(i, j + 1)) + ty * ((1 - tx) * at(i + 1, j) + tx * at(i + 1, j + 1));
  }
};

/// A scalar on the sphere held as one GridField per chart.
struct SphereField {
  GridField north;
  GridField south;
  std::string label;

  int n() const { return north.n; }
  double half_width() const { return north.half_width; }
  double step() const { return north.step(); }
  const GridField& chart(ChartId c) const { return c == ChartId::North ? north : south; }
  GridField& chart(ChartId c) { return c == ChartId::North ? north : south; }

  /// Value at p by bilinear interpolation in the chart where |z| <= 1.
  double value_at(const SpherePoint& p) const {
    const ChartId c = p.x3() <= 0.0 ? ChartId::North : ChartId::South;
    return chart(c).interpolate(stereo_project(p, c));
  }
};

/// Samples fn at every node of both charts.
template <class Fn>
SphereField sample_sphere(Fn&& fn, int n = 257, double half_width = 2.0, std::string label = {}) {
  SphereField f{GridField(ChartId::North, half_width, n), GridField(ChartId::South, half_width, n), std::move(label)};
  for (ChartId c : {ChartId::North, ChartId::South}) {
    GridField& g = f.chart(c);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
      const int i = static_cast<int>(row);
      for (int j = 0; j < n; ++j) g.at(i, j) = fn(stereo_lift(g.z(i, j), c));
    });
  }
  return f;
}

/// Applies op to each value of each chart.
template <class Op>
SphereField map_field(const SphereField& a, Op&& op) {
  SphereField out = a;
  for (auto* g : {&out.north, &out.south})
    for (double& v : g->values) v = op(v);
  return out;
}

/// 5-point Laplacian in chart coordinates. The boundary ring is not evaluable
/// and is set to 0; the partition of unity vanishes there.
inline GridField laplacian_flat(const GridField& f) {
  GridField out = f;
  const double inv_h2 = 1.0 / (f.step() * f.step());
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) {
      if (f.on_boundary_ring(i, j)) {
        out.at(i, j) = 0.0;
        continue;
      }
      out.at(i, j) = (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1) - 4.0 * f.at(i, j)) * inv_h2;
    }
  return out;
}

/// Partition-of-unity weight of a chart at its own coordinate z: 1 for
/// |z| <= 1/R, 0 for |z| >= R, quintic smoothstep in log|z|/log R between.
/// chart_weight(z) + chart_weight(1/z) = 1.
inline double chart_weight(Complex z, double half_width) {
  const double r = std::abs(z);
  if (r == 0.0) return 1.0;
  const double s = std::log(r) / std::log(half_width);
  return 1.0 - smoothstep5(0.5 * (s + 1.0));
}

struct AtlasMismatch {
  double max_disagreement = 0.0;
  double tolerance = 0.0;
  bool ok() const { return max_disagreement <= tolerance; }
};

/// Compares the charts on the overlap annulus 1/R <= |z| <= R by bilinear
/// interpolation of the south chart at 1/z. The default tolerance is a bound
/// on bilinear interpolation error, 5h^2 (1 + max|second difference|/h^2).
inline AtlasMismatch atlas_mismatch(const SphereField& f, std::optional<double> tolerance = {}) {
  const GridField& nf = f.north;
  const double R = nf.half_width, h = nf.step();
  AtlasMismatch m;
  double hessian = 0.0;
  for (int i = 1; i < nf.n - 1; ++i)
    for (int j = 1; j < nf.n - 1; ++j) {
      const Complex z = nf.z(i, j);
      const double r = std::abs(z);
      if (r < 1.0 / R || r > R) continue;
      const double d = std::abs(nf.at(i, j) - f.south.interpolate(1.0 / z));
      m.max_disagreement = std::max(m.max_disagreement, d);
      const double dxx = std::abs(nf.at(i, j + 1) - 2 * nf.at(i, j) + nf.at(i, j - 1));
      const double dyy = std::abs(nf.at(i + 1, j) - 2 * nf.at(i, j) + nf.at(i - 1, j));
      hessian = std::max({hessian, dxx / (h * h), dyy / (h * h)});
    }
  m.tolerance = tolerance ? *tolerance : 5.0 * h * h * (1.0 + hessian);
  return m;
}

inline void check_atlas(const SphereField& f, std::optional<double> tolerance = {}) {
  const AtlasMismatch m = atlas_mismatch(f, tolerance);
  if (!m.ok())
    throw Error(ErrorCode::InconsistentAtlas,
                "chart overlap disagreement " + std::to_string(m.max_disagreement) + " exceeds " +
                    std::to_string(m.tolerance) + " for field '" + f.label + "'");
}

namespace detail {

inline double integrate_charts(const SphereField& f, const SphereField* density) {
  double total = 0.0;
  for (ChartId c : {ChartId::North, ChartId::South}) {
    const GridField& g = f.chart(c);
    const GridField* d = density ? &density->chart(c) : nullptr;
    const double cell = g.step() * g.step();
    double chart_sum = 0.0;
    for (int i = 0; i < g.n; ++i) {
      double row = 0.0;
      for (int j = 0; j < g.n; ++j) {
        const Complex z = g.z(i, j);
        const double w = chart_weight(z, g.half_width);
        if (w == 0.0) continue;
        const double e2v0 = std::exp(2.0 * round_factor(z));
        row += w * g.at(i, j) * (d ? d->at(i, j) : 1.0) * e2v0;
      }
      chart_sum += row;
    }
    total += chart_sum * cell;
  }
  return total;
}

}  // namespace detail

/// Integral of f * density over the sphere with respect to the round area
/// element. Both fields are checked for chart consistency first.
inline double integrate_sphere(const SphereField& f, const SphereField* density = nullptr,
                               bool check_consistency = true) {
  if (density && (density->n() != f.n() || density->half_width() != f.half_width()))
    throw Error(ErrorCode::InvalidArgument, "integrand and density live on different grids");
  if (check_consistency) {
    check_atlas(f);
    if (density) check_atlas(*density);
  }
  return detail::integrate_charts(f, density);
}

inline double integrate_sphere(const SphereField& f, const SphereField& density, bool check_consistency = true) {
  return integrate_sphere(f, &density, check_consistency);
}

}  // namespace conflab
