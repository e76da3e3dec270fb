#pragma once

// Concentration radius, Mobius normalization by mass centering, blow-up at a
// concentration point, comparison with the standard bubble, and per-family
// diagnostics.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "conflab/disk.hpp"
#include "conflab/metric.hpp"

namespace conflab {

inline constexpr double kInfiniteRadius = std::numeric_limits<double>::infinity();

/// Orthonormal e1, e2 spanning the tangent plane at x.
inline std::pair<std::array<double, 3>, std::array<double, 3>> tangent_frame(const SpherePoint& x) {
  const auto& p = x.coords();
  std::array<double, 3> a = std::abs(p[2]) < 0.9 ? std::array<double, 3>{0, 0, 1} : std::array<double, 3>{1, 0, 0};
  const double d = a[0] * p[0] + a[1] * p[1] + a[2] * p[2];
  std::array<double, 3> e1{a[0] - d * p[0], a[1] - d * p[1], a[2] - d * p[2]};
  const double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
  for (double& v : e1) v /= n1;
  const std::array<double, 3> e2{p[1] * e1[2] - p[2] * e1[1], p[2] * e1[0] - p[0] * e1[2], p[0] * e1[1] - p[1] * e1[0]};
  return {e1, e2};
}

/// exp_x(phi (cos theta e1 + sin theta e2)).
inline SpherePoint geodesic_polar(const SpherePoint& x, const std::array<double, 3>& e1, const std::array<double, 3>& e2,
                                  double phi, double theta) {
  const double c = std::cos(phi), s = std::sin(phi), ct = std::cos(theta), st = std::sin(theta);
  const auto& p = x.coords();
  return {c * p[0] + s * (ct * e1[0] + st * e2[0]), c * p[1] + s * (ct * e1[1] + st * e2[1]),
          c * p[2] + s * (ct * e1[2] + st * e2[2])};
}

// ---------------------------------------------------------------------------
// Mass function and rho

/// m(r) = int_{B_r(x)} e^{2u} dmu_round in geodesic polar coordinates about x:
/// Gauss-Legendre on the panels [pi 2^{-k-1}, pi 2^{-k}] (and [0, pi 2^{-15}]),
/// trapezoid in theta.
class BallMass {
 public:
  BallMass(const ConformalMetric& g, const SpherePoint& x, int theta_nodes = 64)
      : g_(g), x_(x), theta_nodes_(theta_nodes) {
    std::tie(e1_, e2_) = tangent_frame(x);
    breaks_.push_back(0.0);
    for (int k = kPanels - 1; k >= 0; --k) breaks_.push_back(kPi * std::ldexp(1.0, -k));
    cumulative_.push_back(0.0);
  }

  /// sin(phi) int_0^{2 pi} e^{2u} dtheta.
  double ring(double phi) const {
    double s = 0.0;
    for (int j = 0; j < theta_nodes_; ++j)
      s += std::exp(2.0 * g_.exponent(geodesic_polar(x_, e1_, e2_, phi, 2.0 * kPi * j / theta_nodes_)));
    return std::sin(phi) * s * 2.0 * kPi / theta_nodes_;
  }

  double panel(double a, double b) const { return rule().integrate([this](double r) { return ring(r); }, a, b); }

  /// m(r) for r in [0, pi].
  double operator()(double r) {
    std::size_t k = 0;
    while (k + 1 < breaks_.size() && breaks_[k + 1] <= r) ++k;
    extend_to(k);
    return cumulative_[k] + (r > breaks_[k] ? panel(breaks_[k], r) : 0.0);
  }

  double total() {
    extend_to(breaks_.size() - 1);
    return cumulative_.back();
  }

  /// Smallest r with m(r) = target (first crossing), or +inf if m(pi) < target.
  double radius_for(double target, double tol) {
    std::size_t k = 0;
    for (;; ++k) {
      if (k + 1 >= breaks_.size()) return kInfiniteRadius;
      extend_to(k + 1);
      if (cumulative_[k + 1] >= target) break;
    }
    // Illinois false position on [breaks_k, breaks_{k+1}] with a bisection guard.
    double a = breaks_[k], b = breaks_[k + 1];
    double fa = cumulative_[k] - target, fb = cumulative_[k + 1] - target;
    if (std::abs(fb) <= tol) return b;
    int side = 0;
    for (int it = 0; it < 200; ++it) {
      double c = (a * fb - b * fa) / (fb - fa);
      if (!(c > a && c < b) || it % 8 == 7) c = 0.5 * (a + b);
      const double fc = cumulative_[k] + panel(breaks_[k], c) - target;
      if (std::abs(fc) <= tol || b - a < 1e-15) return c;
      if ((fc < 0) == (fa < 0)) {
        a = c, fa = fc;
        if (side == -1) fb *= 0.5;
        side = -1;
      } else {
        b = c, fb = fc;
        if (side == 1) fa *= 0.5;
        side = 1;
      }
    }
    return 0.5 * (a + b);
  }

  static constexpr int kPanels = 16;

 private:
  static const GaussLegendre& rule() {
    static const GaussLegendre gl(8);
    return gl;
  }
  void extend_to(std::size_t k) {
    while (cumulative_.size() <= k) {
      const std::size_t i = cumulative_.size();
      cumulative_.push_back(cumulative_.back() + panel(breaks_[i - 1], breaks_[i]));
    }
  }

  const ConformalMetric& g_;
  SpherePoint x_;
  int theta_nodes_;
  std::array<double, 3> e1_{}, e2_{};
  std::vector<double> breaks_, cumulative_;
};

/// rho(u, x): radius of the round geodesic ball about x carrying eps1/2 of
/// the g-mass. +inf when the whole sphere carries less, or MassDeficient when
/// `allow_infinite` is false.
inline double rho_at(const ConformalMetric& g, const SpherePoint& x, double eps1, bool allow_infinite = true) {
  if (!(eps1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon1 must be positive");
  BallMass m(g, x);
  const double r = m.radius_for(0.5 * eps1, 1e-6 * eps1);
  if (std::isinf(r) && !allow_infinite)
    throw Error(ErrorCode::MassDeficient, "area " + std::to_string(m.total()) + " < epsilon1/2", m.total());
  return r;
}

struct ConcentrationProfile {
  double epsilon1 = 0.4;
  std::vector<std::pair<SpherePoint, double>> samples;
  double rho_global = kInfiniteRadius;
  SpherePoint argmin;
};

/// Fibonacci sweep (1000 points) then 3 rounds of 8-direction neighbourhood
/// search with radii shrinking by 1/3; ties go to the smallest index.
inline ConcentrationProfile rho_global(const ConformalMetric& g, double eps1, std::size_t sample_count = 1000) {
  const double mu = area(g);
  if (mu < eps1) throw Error(ErrorCode::MassDeficient, "area " + std::to_string(mu) + " < epsilon1", mu);
  ConcentrationProfile prof;
  prof.epsilon1 = eps1;
  const std::vector<SpherePoint> pts = fibonacci_sphere(sample_count);
  std::vector<double> rho(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { rho[i] = rho_at(g, pts[i], eps1); });
  std::size_t best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    prof.samples.push_back({pts[i], rho[i]});
    if (rho[i] < rho[best]) best = i;
  }
  SpherePoint centre = pts[best];
  double value = rho[best];
  double delta = std::sqrt(4.0 * kPi / static_cast<double>(sample_count));
  for (int round = 0; round < 3; ++round) {
    const auto [e1, e2] = tangent_frame(centre);
    std::vector<SpherePoint> cand;
    for (int d = 0; d < 8; ++d) cand.push_back(geodesic_polar(centre, e1, e2, delta, kPi * d / 4.0));
    std::vector<double> vals(cand.size());
    parallel_for(cand.size(), [&](std::size_t i) { vals[i] = rho_at(g, cand[i], eps1); });
    SpherePoint next = centre;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      prof.samples.push_back({cand[i], vals[i]});
      if (vals[i] < value) value = vals[i], next = cand[i];
    }
    centre = next;
    delta /= 3.0;
  }
  prof.rho_global = value;
  prof.argmin = centre;
  return prof;
}

// ---------------------------------------------------------------------------
// Normalization

struct NormalizationResult {
  MobiusTransform sigma;
  double u_prime_sup = 0.0;
  double rho_after = kInfiniteRadius;
  int iterations = 0;
  bool converged = false;
  double center_norm = 0.0;
};

inline double norm3(const std::array<double, 3>& c) { return std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]); }

/// Mass centering: while |c| > 0.01, pull back by dilation_at(c/|c|, s) with s
/// in [1/2, 2] minimising the next |c| (golden section in log s).
inline NormalizationResult normalize(const ConformalMetric& g, double eps1, int max_iter = 30, bool with_rho = true) {
  const double mu = area(g);
  if (mu < eps1) throw Error(ErrorCode::MassDeficient, "area " + std::to_string(mu) + " < epsilon1", mu);
  NormalizationResult res;
  MobiusTransform sigma = MobiusTransform::identity();
  std::array<double, 3> c = center_of_mass(g);
  for (; res.iterations < max_iter && norm3(c) > 0.01; ++res.iterations) {
    const SpherePoint dir(c[0], c[1], c[2]);
    auto score = [&](double log_s) {
      return norm3(center_of_mass(pullback(sigma * dilation_at(dir, std::exp(log_s)), g)));
    };
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(0.5), b = std::log(2.0);
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = score(x1), f2 = score(x2);
    for (int it = 0; it < 30; ++it) {
      if (f1 < f2) {
        b = x2, x2 = x1, f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = score(x1);
      } else {
        a = x1, x1 = x2, f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = score(x2);
      }
    }
    sigma = sigma * dilation_at(dir, std::exp(0.5 * (a + b)));
    c = center_of_mass(pullback(sigma, g));
  }
  res.center_norm = norm3(c);
  res.converged = res.center_norm <= 0.01;
  res.sigma = sigma;
  const ConformalMetric h = pullback(sigma, g);
  for (const GridField* grid : {&h.field().north, &h.field().south})
    for (double v : grid->values) res.u_prime_sup = std::max(res.u_prime_sup, std::abs(v));
  if (with_rho) res.rho_after = rho_global(h, eps1).rho_global;
  return res;
}

// ---------------------------------------------------------------------------
// Blow-up and the standard bubble

/// v(x) = -log(1 + |x - x0|^2 / 4), the solution of -Delta v = e^{2v} with total mass 4 pi.
struct StandardBubble {
  double x0 = 0.0, y0 = 0.0;

  double value(double x, double y) const { return -std::log1p(((x - x0) * (x - x0) + (y - y0) * (y - y0)) / 4.0); }
  double density(double x, double y) const { return std::exp(2.0 * value(x, y)); }
  /// -Delta v - e^{2v}, identically zero.
  double residual(double, double) const { return 0.0; }
  /// int_{D_R(x0)} e^{2v} = 4 pi R^2 / (4 + R^2).
  static double disk_mass(double R) { return 4.0 * kPi * R * R / (4.0 + R * R); }

  DiskField sample(int n, double R) const {
    return sample_disk([this](double x, double y) { return value(x, y); }, n, R);
  }
};

inline StandardBubble standard_bubble(double x0 = 0.0, double y0 = 0.0) { return {x0, y0}; }

/// Conformal factor of g in the NorthChart of the frame rotating x to the
/// chart origin: v(z) = u(lift(z)) + v0(z).
struct ChartFactor {
  ExponentFn u;
  MobiusTransform back;  // chart frame -> sphere

  double operator()(double x, double y) const {
    const Complex z(x, y);
    return u(back.apply(stereo_lift(z, ChartId::North))) + round_factor(z);
  }
};

inline ChartFactor chart_factor(const ConformalMetric& g, const SpherePoint& x) {
  return {g.evaluator(), MobiusTransform::rotation_to_origin(x).inverse()};
}

struct BlowUp {
  ChartFactor v;
  double t = 1.0;
  DiskField v_prime;  // v'(z) = v(t z) + log t on D_R

  double value(double x, double y) const { return v(t * x, t * y) + std::log(t); }
};

/// Rescales g's chart factor at x by t and samples it on D_R.
inline BlowUp blow_up(const ConformalMetric& g, const SpherePoint& x, double t, double R, int n = 257) {
  if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidArgument, "blow-up scale t must lie in (0, 1]");
  if (!(R > 0.0) || R * t > g.grid().half_width)
    throw Error(ErrorCode::InvalidArgument, "R t must lie within the chart half-width");
  if (!g.exact_evaluator()) {
    const double source_step = 2.0 * g.grid().half_width / (g.grid().n - 1);
    if (R * t < 4.0 * source_step)
      throw Error(ErrorCode::ResolutionTooCoarse,
                  "D_{Rt} spans fewer than 4 cells of the sampled source grid", R * t / source_step);
  }
  BlowUp bu{chart_factor(g, x), t, DiskField(n, R)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (bu.v_prime.in_mask(i, j)) bu.v_prime.at(i, j) = bu.value(bu.v_prime.x(j), bu.v_prime.y(i));
  return bu;
}

/// max |-Delta_h w - e^{2w}| over regular interior nodes.
inline double liouville_residual(const DiskField& w) {
  double r = 0.0;
  for (int i = 0; i < w.n; ++i)
    for (int j = 0; j < w.n; ++j)
      if (regular_interior(w, i, j)) r = std::max(r, std::abs(-laplacian_5pt(w, i, j) - std::exp(2.0 * w.at(i, j))));
  return r;
}

/// int_{D_a} e^{2 f} by polar Gauss-Legendre (48 radial nodes, 256 angles).
template <class F>
double polar_mass_gl(F&& f, double a) {
  static const GaussLegendre gl(48);
  constexpr int kTheta = 256;
  return gl.integrate(
      [&](double r) {
        double s = 0.0;
        for (int j = 0; j < kTheta; ++j) {
          const double th = 2.0 * kPi * j / kTheta;
          s += std::exp(2.0 * f(r * std::cos(th), r * std::sin(th)));
        }
        return r * s * 2.0 * kPi / kTheta;
      },
      0.0, a);
}

/// int_{D_a} e^{2 f} by adaptive Gauss-Kronrod in r (trapezoid in theta).
template <class F>
double polar_mass_gk(F&& f, double a) {
  constexpr int kTheta = 192;
  auto ring = [&](double r) {
    double s = 0.0;
    for (int j = 0; j < kTheta; ++j) {
      const double th = 2.0 * kPi * (j + 0.5) / kTheta;
      s += std::exp(2.0 * f(r * std::cos(th), r * std::sin(th)));
    }
    return r * s * 2.0 * kPi / kTheta;
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(ring, 0.0, a, 10, 1e-10);
}

struct MassIdentity {
  double blown_up = 0.0;  // int_{D_a} e^{2v'}
  double source = 0.0;    // int_{D_{ta}} e^{2v}
  double relative_error() const { return std::abs(blown_up - source) / source; }
};

inline MassIdentity blow_up_mass_identity(const BlowUp& bu, double a) {
  return {polar_mass_gl([&](double x, double y) { return bu.value(x, y); }, a),
          polar_mass_gk([&](double x, double y) { return bu.v(x, y); }, bu.t * a)};
}

struct BubbleReport {
  SpherePoint center;
  double t = 0.0;
  double rho = 0.0;
  DiskField v_prime;
  double mass = 0.0;
  double bubble_deviation = 0.0;
  double pde_residual = 0.0;
  double peak_x = 0.0, peak_y = 0.0;
};

/// Half the spread of w - (v_std(mu (x - x0)) + log mu) over the mask: the
/// sup-norm distance to that bubble minimised over the additive constant.
inline double bubble_distance(const DiskField& w, double mu, double x0, double y0) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < w.n; ++i)
    for (int j = 0; j < w.n; ++j) {
      if (!w.in_mask(i, j)) continue;
      const double dx = mu * (w.x(j) - x0), dy = mu * (w.y(i) - y0);
      const double d = w.at(i, j) - (-std::log1p((dx * dx + dy * dy) / 4.0) + std::log(mu));
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  return 0.5 * (hi - lo);
}

namespace detail {

/// Pattern search for the rho minimiser, from `start` down to steps of tol.
inline SpherePoint refine_argmin(const ConformalMetric& g, double eps1, SpherePoint start, double step, double tol) {
  double best = rho_at(g, start, eps1);
  while (step > tol) {
    const auto [e1, e2] = tangent_frame(start);
    bool moved = false;
    for (int d = 0; d < 8; ++d) {
      const SpherePoint q = geodesic_polar(start, e1, e2, step, kPi * d / 4.0);
      const double r = rho_at(g, q, eps1);
      if (r < best) best = r, start = q, moved = true;
    }
    if (!moved) step *= 0.5;
  }
  return start;
}

/// Sub-grid location of the maximum of w by a 3-point parabola per axis.
inline std::pair<double, double> peak_location(const DiskField& w) {
  int bi = w.n / 2, bj = w.n / 2;
  for (int i = 1; i < w.n - 1; ++i)
    for (int j = 1; j < w.n - 1; ++j)
      if (w.in_mask(i, j) && w.at(i, j) > w.at(bi, bj)) bi = i, bj = j;
  auto vertex = [](double m, double c, double p) {
    const double den = m - 2.0 * c + p;
    return den < 0.0 ? 0.5 * (m - p) / den : 0.0;
  };
  const double h = w.step();
  return {w.x(bj) + h * vertex(w.at(bi, bj - 1), w.at(bi, bj), w.at(bi, bj + 1)),
          w.y(bi) + h * vertex(w.at(bi - 1, bj), w.at(bi, bj), w.at(bi + 1, bj))};
}

}  // namespace detail

/// Blow-up at the concentration point: t is the chart radius whose disk carries
/// eps1; the result is compared with the bubble carrying eps1 in D_1, i.e.
/// v_std(mu x) + log mu with 4 pi mu^2 / (4 + mu^2) = eps1.
inline BubbleReport bubble_extract(const ConformalMetric& g, double eps1, double R, int n = 257,
                                   const ConcentrationProfile* profile = nullptr) {
  const double mu_g = area(g);
  if (mu_g < eps1) throw Error(ErrorCode::MassDeficient, "area " + std::to_string(mu_g) + " < epsilon1", mu_g);
  std::optional<ConcentrationProfile> own;
  if (!profile) profile = &own.emplace(rho_global(g, eps1));
  BubbleReport rep;
  rep.rho = profile->rho_global;
  rep.center = detail::refine_argmin(g, eps1, profile->argmin, 0.5 * std::sqrt(4.0 * kPi / 1000.0) / 9.0,
                                     1e-3 * profile->rho_global);
  rep.rho = rho_at(g, rep.center, eps1);
  // Chart disk D_t is the round ball of radius 2 atan t about the centre.
  BallMass m(g, rep.center);
  const double r = m.radius_for(eps1, 1e-9 * eps1);
  if (std::isinf(r)) throw Error(ErrorCode::MassDeficient, "no ball carries epsilon1", m.total());
  rep.t = std::min(1.0, std::tan(0.5 * r));
  if (R * rep.t > g.grid().half_width)
    throw Error(ErrorCode::ResolutionTooCoarse,
                "mass epsilon1 is spread over chart radius t = " + std::to_string(rep.t) + ", so D_R at R = " +
                    std::to_string(R) + " leaves the chart");
  const BlowUp bu = blow_up(g, rep.center, rep.t, R, n);
  rep.v_prime = bu.v_prime;
  rep.mass = polar_mass_gl([&](double x, double y) { return bu.value(x, y); }, R);
  std::tie(rep.peak_x, rep.peak_y) = detail::peak_location(bu.v_prime);
  const double mu = 2.0 * std::sqrt(eps1 / (4.0 * kPi - eps1));
  rep.bubble_deviation = bubble_distance(bu.v_prime, mu, rep.peak_x, rep.peak_y);
  rep.pde_residual = liouville_residual(bu.v_prime);
  return rep;
}

// ---------------------------------------------------------------------------
// Sequence diagnostics

enum class Family { CylinderSphere, FlatNeckSphere, DilatedRound, PerturbedRound };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::CylinderSphere: return "cylinder_sphere";
    case Family::FlatNeckSphere: return "flat_neck_sphere";
    case Family::DilatedRound: return "dilated_round";
    case Family::PerturbedRound: return "perturbed_round";
  }
  return "?";
}

inline Family family_from_string(const std::string& s) {
  for (Family f : {Family::CylinderSphere, Family::FlatNeckSphere, Family::DilatedRound, Family::PerturbedRound})
    if (s == to_string(f)) return f;
  // Short forms.
  if (s == "cylinder") return Family::CylinderSphere;
  if (s == "flat_neck") return Family::FlatNeckSphere;
  if (s == "dilated") return Family::DilatedRound;
  if (s == "perturbed") return Family::PerturbedRound;
  throw Error(ErrorCode::InvalidArgument, "unknown family '" + s + "'");
}

/// Default parameter list of each family: neck index k, dilation s, or amplitude.
inline std::vector<double> default_parameters(Family f) {
  switch (f) {
    case Family::CylinderSphere:
    case Family::FlatNeckSphere: return {1, 2, 4};
    case Family::DilatedRound: return {1, 10, 100};
    case Family::PerturbedRound: return {0.2, 0.1, 0.05};
  }
  return {};
}

struct DiagnosticsOptions {
  int n = 257;
  double epsilon1 = 0.4;
  std::uint64_t seed = 1;
  SpherePoint centre = SpherePoint(1.0, 2.0, 3.0);  // dilation centre
  double bubble_radius = 4.0;
  int max_iter = 30;
};

inline ConformalMetric family_member(Family f, double k, const DiagnosticsOptions& opt) {
  const GridSpec grid{opt.n, 2.0};
  auto index = [k] {
    if (k < 1 || k != std::floor(k)) throw Error(ErrorCode::InvalidArgument, "neck index k must be a positive integer");
    return static_cast<int>(k);
  };
  switch (f) {
    case Family::CylinderSphere: return make_cylinder_sphere(index(), grid);
    case Family::FlatNeckSphere: return make_flat_neck_sphere(index(), grid);
    case Family::DilatedRound: return make_dilated_round(opt.centre, k, grid);
    case Family::PerturbedRound: return make_perturbed_round(opt.seed, k, grid);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown family");
}

struct DiagnosticsRow {
  std::string family;
  double k = 0.0;
  int n = 0;
  double epsilon1 = 0.0;
  double area = std::numeric_limits<double>::quiet_NaN();
  double entropy = std::numeric_limits<double>::quiet_NaN();
  double dev1 = std::numeric_limits<double>::quiet_NaN();
  double rho_before = std::numeric_limits<double>::quiet_NaN();
  double rho_after = std::numeric_limits<double>::quiet_NaN();
  double u_prime_sup = std::numeric_limits<double>::quiet_NaN();
  double diameter = std::numeric_limits<double>::quiet_NaN();
  double bubble_deviation = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  std::string error;
};

/// One row per parameter; a failing stage leaves its columns NaN, appends to
/// `error`, and the remaining stages still run.
inline DiagnosticsRow diagnostics_row(Family f, double k, const DiagnosticsOptions& opt) {
  DiagnosticsRow row;
  row.family = to_string(f);
  row.k = k;
  row.n = opt.n;
  row.epsilon1 = opt.epsilon1;
  auto record = [&row](const std::exception& e) {
    if (!row.error.empty()) row.error += "; ";
    row.error += e.what();
  };
  std::optional<ConformalMetric> g;
  try {
    g.emplace(family_member(f, k, opt));
  } catch (const std::exception& e) {
    record(e);
    return row;
  }
  try {
    const FunctionalReport r = functionals(*g, 1.0);
    row.area = r.area, row.entropy = r.entropy, row.dev1 = r.dev1;
  } catch (const std::exception& e) {
    record(e);
  }
  std::optional<ConcentrationProfile> profile;
  try {
    profile.emplace(rho_global(*g, opt.epsilon1));
    row.rho_before = profile->rho_global;
  } catch (const std::exception& e) {
    record(e);
  }
  try {
    const NormalizationResult nr = normalize(*g, opt.epsilon1, opt.max_iter);
    row.rho_after = nr.rho_after, row.u_prime_sup = nr.u_prime_sup, row.converged = nr.converged;
    if (!nr.converged) record(std::runtime_error("NoConvergence: normalize did not converge in " + std::to_string(opt.max_iter) + " iterations"));
  } catch (const std::exception& e) {
    record(e);
  }
  try {
    row.diameter = diameter_estimate(*g);
  } catch (const std::exception& e) {
    record(e);
  }
  try {
    if (profile) row.bubble_deviation = bubble_extract(*g, opt.epsilon1, opt.bubble_radius, opt.n, &*profile).bubble_deviation;
  } catch (const std::exception& e) {
    record(e);
  }
  return row;
}

inline std::vector<DiagnosticsRow> sequence_diagnostics(Family f, const std::vector<double>& ks,
                                                        const DiagnosticsOptions& opt = {}) {
  std::vector<DiagnosticsRow> rows(ks.size());
  parallel_for(ks.size(), [&](std::size_t i) { rows[i] = diagnostics_row(f, ks[i], opt); });
  return rows;
}

}  // namespace conflab
