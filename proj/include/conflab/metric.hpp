#pragma once

// Conformal metrics g = e^{2u} g_round on the sphere, their Gauss curvature,
// curvature functionals, diameter, the explicit example families, and the
// Mobius pullback.
//
// Every metric carries a pointwise evaluator for u and a sampled SphereField.
// Rotationally symmetric metrics additionally carry their profile in the
// cylinder chart zeta = log z = t + i theta about an axis, where
// g = e^{2 phi(t)} (dt^2 + dtheta^2) and u = phi(t) + log cosh t. Long necks
// are conformal annuli of large modulus that no uniform stereographic grid can
// resolve; on the cylinder chart they are a uniform 1D grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "conflab/error.hpp"
#include "conflab/mobius.hpp"
#include "conflab/numerics.hpp"
#include "conflab/parallel.hpp"
#include "conflab/sphere.hpp"

namespace conflab {

using ExponentFn = std::function<double(const SpherePoint&)>;

struct GridSpec {
  int n = 257;
  double half_width = 2.0;
};

/// Rotationally symmetric metric about the axis through `pole`: in the chart
/// centred at `pole`, z = e^{t + i theta} and g = e^{2 phi(t)} (dt^2 + dtheta^2).
/// Outside [t_lo, t_hi] the metric is a round cap tail carrying negligible mass.
struct AxialProfile {
  SpherePoint pole;
  std::function<double(double)> phi;
  double t_lo = -18.0;
  double t_hi = 18.0;

  /// Cylinder coordinates (t, theta) of q.
  std::pair<double, double> cylinder_coords(const SpherePoint& q) const {
    const SpherePoint r = MobiusTransform::rotation_to_origin(pole).apply(q);
    const double rho = std::hypot(r.x1(), r.x2());
    const double t = rho == 0.0 ? std::copysign(700.0, r.x3()) : std::clamp(std::asinh(r.x3() / rho), -700.0, 700.0);
    return {t, std::atan2(r.x2(), r.x1())};
  }

  /// Point with cylinder coordinates (t, theta).
  SpherePoint point(double t, double theta) const {
    const SpherePoint r(std::cos(theta) / std::cosh(t), std::sin(theta) / std::cosh(t), std::tanh(t));
    return MobiusTransform::rotation_to_origin(pole).inverse().apply(r);
  }

  double exponent(const SpherePoint& q) const {
    const double t = cylinder_coords(q).first;
    return phi(t) + log_cosh(t);
  }
};

enum class Layout { Atlas, Axial };

class ConformalMetric {
 public:
  ConformalMetric(ExponentFn u, std::string provenance, GridSpec grid = {},
                  std::optional<AxialProfile> axial = std::nullopt, bool exact = true)
      : state_(std::make_shared<State>()) {
    state_->u = std::move(u);
    state_->provenance = std::move(provenance);
    state_->axial = std::move(axial);
    state_->exact = exact;
    state_->grid = grid;
  }

  /// A metric known only through its samples; the evaluator interpolates.
  static ConformalMetric from_field(SphereField u, std::string provenance = "custom") {
    check_atlas(u);
    auto shared = std::make_shared<const SphereField>(std::move(u));
    ConformalMetric g([shared](const SpherePoint& p) { return shared->value_at(p); }, std::move(provenance),
                      {shared->n(), shared->half_width()}, std::nullopt, false);
    std::call_once(g.state_->field_once, [&] {
      g.state_->field = *shared;
      g.state_->field.label = g.state_->provenance;
      g.state_->max_jump = max_neighbour_jump(g.state_->field);
    });
    return g;
  }

  double exponent(const SpherePoint& p) const { return state_->u(p); }
  const ExponentFn& evaluator() const { return state_->u; }
  /// Samples of u on the atlas, taken on first use.
  const SphereField& field() const {
    std::call_once(state_->field_once, [this] {
      state_->field = sample_sphere(state_->u, state_->grid.n, state_->grid.half_width, state_->provenance);
      state_->max_jump = max_neighbour_jump(state_->field);
    });
    return state_->field;
  }
  const std::optional<AxialProfile>& axial() const { return state_->axial; }
  const std::string& provenance() const { return state_->provenance; }
  bool exact_evaluator() const { return state_->exact; }
  GridSpec grid() const { return state_->grid; }
  Layout preferred_layout() const { return state_->axial ? Layout::Axial : Layout::Atlas; }

  /// Largest change of u between neighbouring nodes inside |z| < R.
  double max_jump() const {
    field();
    return state_->max_jump;
  }
  /// The atlas grid resolves u when it changes by at most 1/4 per cell.
  bool atlas_resolved() const { return max_jump() <= kMaxJump; }

  void require_atlas_resolved(const char* op) const {
    if (!atlas_resolved())
      throw Error(ErrorCode::ResolutionTooCoarse,
                  std::string(op) + ": metric '" + provenance() + "' changes by " + std::to_string(max_jump()) +
                      " per chart cell; the stereographic grid cannot resolve it",
                  std::ceil((grid().n - 1) * max_jump() / kMaxJump) + 1);
  }

  /// Computes `make()` once per metric and caches it (thread-safe).
  template <class T, class Make>
  const T& cached(Make&& make) const {
    auto& slot = state_->cache;
    std::call_once(slot.once, [&] { slot.value = std::make_shared<T>(make()); });
    return *std::static_pointer_cast<const T>(slot.value);
  }

  static constexpr double kMaxJump = 0.25;

 private:
  struct Cache {
    std::once_flag once;
    std::shared_ptr<const void> value;
  };
  struct State {
    ExponentFn u;
    std::string provenance;
    std::optional<AxialProfile> axial;
    bool exact = true;
    GridSpec grid;
    std::once_flag field_once;
    SphereField field;
    double max_jump = 0.0;
    Cache cache;
  };

  static double max_neighbour_jump(const SphereField& f) {
    double jump = 0.0;
    for (const GridField* g : {&f.north, &f.south})
      for (int i = 0; i + 1 < g->n; ++i)
        for (int j = 0; j + 1 < g->n; ++j) {
          if (std::abs(g->z(i, j)) >= g->half_width) continue;
          const double v = g->at(i, j);
          jump = std::max({jump, std::abs(g->at(i + 1, j) - v), std::abs(g->at(i, j + 1) - v)});
        }
    return jump;
  }

  std::shared_ptr<State> state_;
};

// ---------------------------------------------------------------------------
// Curvature

/// Samples of the profile on the uniform cylinder grid t_i = t_lo + i h,
/// h = 2R/(n-1), with curvature K_i = -e^{-2 phi_i} phi''_i (3-point) and
/// area weights 2 pi e^{2 phi_i} h. End nodes carry no weight.
struct AxialSamples {
  double step = 0.0;
  std::vector<double> t, phi, K, weight;
};

inline AxialSamples axial_samples(const AxialProfile& prof, GridSpec grid) {
  AxialSamples s;
  s.step = 2.0 * grid.half_width / (grid.n - 1);
  const double span = prof.t_hi - prof.t_lo;
  const auto count = static_cast<std::size_t>(std::ceil(span / s.step)) + 1;
  constexpr std::size_t kMaxNodes = std::size_t{1} << 23;
  if (count > kMaxNodes)
    throw Error(ErrorCode::ResolutionTooCoarse,
                "axial profile spans " + std::to_string(span) + " cylinder units; too many nodes at this step");
  s.t.resize(count);
  s.phi.resize(count);
  s.K.assign(count, 0.0);
  s.weight.assign(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    s.t[i] = prof.t_lo + static_cast<double>(i) * s.step;
    s.phi[i] = prof.phi(s.t[i]);
  }
  const double inv_h2 = 1.0 / (s.step * s.step);
  for (std::size_t i = 1; i + 1 < count; ++i) {
    const double lap = (s.phi[i + 1] - 2.0 * s.phi[i] + s.phi[i - 1]) * inv_h2;
    const double e2 = std::exp(2.0 * s.phi[i]);
    s.K[i] = -lap / e2;
    s.weight[i] = 2.0 * kPi * e2 * s.step;
  }
  return s;
}

struct CurvatureField {
  Layout layout = Layout::Atlas;
  SphereField K;        // Atlas layout: per-chart curvature (boundary ring 0)
  AxialSamples axial;   // Axial layout
};

/// Atlas curvature: per chart, w = u + v0 and K = -e^{-2w} laplacian_flat(w).
inline CurvatureField atlas_curvature(const ConformalMetric& g) {
  g.require_atlas_resolved("gauss_curvature");
  CurvatureField out;
  out.layout = Layout::Atlas;
  out.K = g.field();
  out.K.label = "K(" + g.provenance() + ")";
  for (ChartId c : {ChartId::North, ChartId::South}) {
    GridField w = g.field().chart(c);
    for (int i = 0; i < w.n; ++i)
      for (int j = 0; j < w.n; ++j) w.at(i, j) += round_factor(w.z(i, j));
    const GridField lap = laplacian_flat(w);
    GridField& K = out.K.chart(c);
    for (int i = 0; i < w.n; ++i)
      for (int j = 0; j < w.n; ++j) K.at(i, j) = w.on_boundary_ring(i, j) ? 0.0 : -lap.at(i, j) * std::exp(-2.0 * w.at(i, j));
  }
  return out;
}

inline CurvatureField axial_curvature(const ConformalMetric& g) {
  if (!g.axial()) throw Error(ErrorCode::InvalidArgument, "metric '" + g.provenance() + "' has no axial profile");
  CurvatureField out;
  out.layout = Layout::Axial;
  out.axial = axial_samples(*g.axial(), g.grid());
  return out;
}

/// Gauss curvature on the metric's preferred layout (cached per metric).
inline const CurvatureField& gauss_curvature(const ConformalMetric& g) {
  return g.cached<CurvatureField>([&] {
    return g.preferred_layout() == Layout::Axial ? axial_curvature(g) : atlas_curvature(g);
  });
}

// ---------------------------------------------------------------------------
// Functionals

struct FunctionalReport {
  double area = 0.0;       // mu(g)
  double entropy = 0.0;    // int |K| log(1+|K|) dmu_g
  double dev1 = 0.0;       // int |K - 1| dmu_g
  double devp = 0.0;       // int |K - 1|^p dmu_g
  double p = 1.0;
  double total_curvature = 0.0;  // int K dmu_g (4 pi by Gauss-Bonnet)

  double gauss_bonnet_residual() const { return std::abs(total_curvature - 4.0 * kPi); }
};

namespace detail {

struct FunctionalAccumulator {
  double p;
  FunctionalReport r;
  void add(double K, double mass) {
    const double a = std::abs(K), d = std::abs(K - 1.0);
    r.area += mass;
    r.entropy += a * std::log1p(a) * mass;
    r.dev1 += d * mass;
    r.devp += (p == 1.0 ? d : std::pow(d, p)) * mass;
    r.total_curvature += K * mass;
  }
};

}  // namespace detail

/// Functionals of a precomputed curvature field.
inline FunctionalReport functionals_of(const ConformalMetric& g, const CurvatureField& curv, double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidExponent, "functionals need p >= 1");
  detail::FunctionalAccumulator acc{p, {}};
  acc.r.p = p;
  if (curv.layout == Layout::Axial) {
    const AxialSamples& s = curv.axial;
    for (std::size_t i = 0; i < s.t.size(); ++i)
      if (s.weight[i] > 0.0) acc.add(s.K[i], s.weight[i]);
    return acc.r;
  }
  for (ChartId c : {ChartId::North, ChartId::South}) {
    const GridField& u = g.field().chart(c);
    const GridField& K = curv.K.chart(c);
    const double cell = u.step() * u.step();
    for (int i = 0; i < u.n; ++i)
      for (int j = 0; j < u.n; ++j) {
        const Complex z = u.z(i, j);
        const double chi = chart_weight(z, u.half_width);
        if (chi == 0.0) continue;
        acc.add(K.at(i, j), chi * std::exp(2.0 * (u.at(i, j) + round_factor(z))) * cell);
      }
  }
  return acc.r;
}

inline FunctionalReport functionals(const ConformalMetric& g, double p) {
  return functionals_of(g, gauss_curvature(g), p);
}

inline FunctionalReport functionals(const ConformalMetric& g, double p, Layout layout) {
  return functionals_of(g, layout == Layout::Axial ? axial_curvature(g) : atlas_curvature(g), p);
}

/// mu(g) = int e^{2u} dmu_round.
inline double area(const ConformalMetric& g) {
  if (g.preferred_layout() == Layout::Axial) return functionals(g, 1.0).area;
  g.require_atlas_resolved("area");
  const SphereField density = map_field(g.field(), [](double u) { return std::exp(2.0 * u); });
  return integrate_sphere(density, nullptr, false);
}

/// Area of the band t_a < t < t_b of an axial metric: 2 pi int e^{2 phi} dt by
/// the trapezoid rule on a grid aligned with the band ends, step <= 2R/(n-1).
inline double band_area(const ConformalMetric& g, double t_a, double t_b) {
  if (!g.axial()) throw Error(ErrorCode::InvalidArgument, "band_area needs an axial profile");
  const double h0 = 2.0 * g.grid().half_width / (g.grid().n - 1);
  const int m = std::max(2, static_cast<int>(std::ceil((t_b - t_a) / h0)));
  const double h = (t_b - t_a) / m;
  double sum = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double w = (i == 0 || i == m) ? 0.5 : 1.0;
    sum += w * std::exp(2.0 * g.axial()->phi(t_a + i * h));
  }
  return 2.0 * kPi * sum * h;
}

/// Centre of mass int x e^{2u} dmu_round / mu(g) in ambient coordinates.
inline std::array<double, 3> center_of_mass(const ConformalMetric& g) {
  if (g.axial()) {
    const AxialProfile& prof = *g.axial();
    const AxialSamples s = axial_samples(prof, g.grid());
    double mass = 0.0, moment = 0.0;
    for (std::size_t i = 1; i + 1 < s.t.size(); ++i) {
      const double m = std::exp(2.0 * s.phi[i]);
      mass += m;
      moment += std::tanh(s.t[i]) * m;
    }
    // tanh t is the coordinate along the axis pointing away from the pole.
    const double along = moment / mass;
    const auto& a = prof.pole.coords();
    return {-along * a[0], -along * a[1], -along * a[2]};
  }
  const SphereField density = map_field(g.field(), [](double u) { return std::exp(2.0 * u); });
  const double mass = integrate_sphere(density, nullptr, false);
  std::array<double, 3> c{};
  for (int k = 0; k < 3; ++k) {
    const SphereField coord = sample_sphere([k](const SpherePoint& p) { return p.coords()[k]; }, g.grid().n,
                                            g.grid().half_width);
    c[k] = integrate_sphere(coord, &density, false) / mass;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Diameter

namespace detail {

struct Graph {
  std::vector<SpherePoint> point;
  std::vector<double> factor;  // e^{u} at the node
  std::vector<std::vector<std::pair<int, double>>> adj;

  void connect(int a, int b, double len) {
    adj[a].push_back({b, len});
    adj[b].push_back({a, len});
  }

  std::vector<double> dijkstra(int source) const {
    std::vector<double> dist(point.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[v]) continue;
      for (auto [w, len] : adj[v])
        if (d + len < dist[w]) {
          dist[w] = d + len;
          heap.push({dist[w], w});
        }
    }
    return dist;
  }

  int nearest(const SpherePoint& p) const {
    int best = 0;
    double best_d = 4.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
      const double d = point[i].distance(p);
      if (d < best_d) best_d = d, best = static_cast<int>(i);
    }
    return best;
  }
};

/// Edge length: e^{mean u} times the round chord angle.
inline double edge_length(const Graph& gr, int a, int b) {
  return 0.5 * (gr.factor[a] + gr.factor[b]) * gr.point[a].distance(gr.point[b]);
}

inline Graph atlas_graph(const ConformalMetric& g) {
  Graph gr;
  const SphereField& f = g.field();
  const int n = f.n();
  const double R = f.half_width();
  std::vector<int> index[2];
  for (int c = 0; c < 2; ++c) {
    const GridField& grid = f.chart(c == 0 ? ChartId::North : ChartId::South);
    index[c].assign(static_cast<std::size_t>(n) * n, -1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (std::abs(grid.z(i, j)) > R) continue;
        index[c][static_cast<std::size_t>(i) * n + j] = static_cast<int>(gr.point.size());
        gr.point.push_back(stereo_lift(grid.z(i, j), grid.chart));
        gr.factor.push_back(std::exp(grid.at(i, j)));
      }
  }
  gr.adj.resize(gr.point.size());
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int a = index[c][static_cast<std::size_t>(i) * n + j];
        if (a < 0) continue;
        for (auto [di, dj] : {std::pair{0, 1}, {1, 0}, {1, 1}, {1, -1}}) {
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
          const int b = index[c][static_cast<std::size_t>(ii) * n + jj];
          if (b >= 0) gr.connect(a, b, edge_length(gr, a, b));
        }
      }
  // Stitch: each north node of the overlap annulus to the south cell around 1/z.
  const GridField& north = f.north;
  const double h = f.step();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Complex z = north.z(i, j);
      const double r = std::abs(z);
      if (r < 1.0 / R || r > R) continue;
      const int a = index[0][static_cast<std::size_t>(i) * n + j];
      const Complex zs = 1.0 / z;
      const int js = static_cast<int>(std::floor((zs.real() + R) / h));
      const int is = static_cast<int>(std::floor((zs.imag() + R) / h));
      for (int di = 0; di <= 1; ++di)
        for (int dj = 0; dj <= 1; ++dj) {
          const int ii = is + di, jj = js + dj;
          if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
          const int b = index[1][static_cast<std::size_t>(ii) * n + jj];
          if (b >= 0) gr.connect(a, b, edge_length(gr, a, b));
        }
    }
  return gr;
}

/// Cylinder-chart graph: n_theta = (n-1)/2 periodic columns, rows every
/// 2 pi / n_theta in t over the part of the window where e^{phi} > 1e-6.
inline Graph axial_graph(const ConformalMetric& g) {
  const AxialProfile& prof = *g.axial();
  const int n_theta = std::max(32, (g.grid().n - 1) / 2);
  const double h = 2.0 * kPi / n_theta;
  double lo = prof.t_lo, hi = prof.t_hi;
  while (lo < hi && prof.phi(lo) < std::log(1e-6)) lo += h;
  while (hi > lo && prof.phi(hi) < std::log(1e-6)) hi -= h;
  const int rows = static_cast<int>(std::ceil((hi - lo) / h)) + 1;
  Graph gr;
  gr.point.reserve(static_cast<std::size_t>(rows) * n_theta);
  for (int i = 0; i < rows; ++i) {
    const double t = lo + i * h;
    const double f = std::exp(prof.phi(t));
    for (int j = 0; j < n_theta; ++j) {
      gr.point.push_back(prof.point(t, j * h));
      gr.factor.push_back(f);
    }
  }
  gr.adj.resize(gr.point.size());
  auto id = [n_theta](int i, int j) { return i * n_theta + ((j % n_theta) + n_theta) % n_theta; };
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < n_theta; ++j) {
      const int a = id(i, j);
      // Lengths in the flat cylinder metric scaled by e^{phi}.
      gr.connect(a, id(i, j + 1), 0.5 * (gr.factor[a] + gr.factor[id(i, j + 1)]) * h);
      if (i + 1 < rows) {
        for (int dj : {-1, 0, 1}) {
          const int b = id(i + 1, j + dj);
          gr.connect(a, b, 0.5 * (gr.factor[a] + gr.factor[b]) * h * (dj == 0 ? 1.0 : std::sqrt(2.0)));
        }
      }
    }
  return gr;
}

}  // namespace detail

/// Intrinsic diameter by Dijkstra on the grid graph (8 neighbours, edge length
/// e^{u} times the step), maximised over the 26 cube directions as sources.
/// Upper-biased, O(h) metric error.
inline double diameter_estimate(const ConformalMetric& g) {
  detail::Graph gr;
  if (g.axial()) {
    gr = detail::axial_graph(g);
  } else {
    g.require_atlas_resolved("diameter_estimate");
    gr = detail::atlas_graph(g);
  }
  const auto sources = cube_directions();
  std::vector<double> ecc(sources.size(), 0.0);
  parallel_for(sources.size(), [&](std::size_t k) {
    const std::vector<double> dist = gr.dijkstra(gr.nearest(sources[k]));
    double m = 0.0;
    for (double d : dist)
      if (std::isfinite(d)) m = std::max(m, d);
    ecc[k] = m;
  });
  return *std::max_element(ecc.begin(), ecc.end());
}

// ---------------------------------------------------------------------------
// Pullback

/// sigma^* g: u'(p) = u(sigma(p)) + log lambda_sigma(p). The evaluator is
/// composed exactly; for sampled metrics it interpolates bilinearly. Axial
/// profiles survive when sigma preserves the axis.
inline ConformalMetric pullback(const MobiusTransform& sigma, const ConformalMetric& g) {
  ExponentFn base = g.evaluator();
  ExponentFn u = [base, sigma](const SpherePoint& p) { return base(sigma.apply(p)) + std::log(sigma.stretch(p)); };

  std::optional<AxialProfile> axial;
  if (g.axial()) {
    const AxialProfile& prof = *g.axial();
    const MobiusTransform rot = MobiusTransform::rotation_to_origin(prof.pole);
    const MobiusTransform local = rot * sigma * rot.inverse();
    const double scale = std::abs(local.a()) + std::abs(local.b()) + std::abs(local.c()) + std::abs(local.d());
    const double tol = 1e-12 * scale;
    auto phi = prof.phi;
    if (std::abs(local.b()) <= tol && std::abs(local.c()) <= tol) {
      // z -> (a/d) z: a translation of the cylinder.
      const double shift = std::log(std::abs(local.a() / local.d()));
      axial = AxialProfile{prof.pole, [phi, shift](double t) { return phi(t + shift); }, prof.t_lo - shift,
                           prof.t_hi - shift};
    } else if (std::abs(local.a()) <= tol && std::abs(local.d()) <= tol) {
      // z -> (b/c) / z: a reflection t -> log|b/c| - t.
      const double mu = std::log(std::abs(local.b() / local.c()));
      axial = AxialProfile{prof.pole, [phi, mu](double t) { return phi(mu - t); }, mu - prof.t_hi, mu - prof.t_lo};
    }
  }
  ConformalMetric out(std::move(u), "pullback", g.grid(), std::move(axial), g.exact_evaluator());
  if (!g.exact_evaluator() && !out.atlas_resolved())
    throw Error(ErrorCode::InconsistentAtlas,
                "resampled pullback of a sampled metric is under-resolved; needs n >= " +
                    std::to_string(static_cast<int>(std::ceil((g.grid().n - 1) * out.max_jump() / ConformalMetric::kMaxJump)) + 1),
                std::ceil((g.grid().n - 1) * out.max_jump() / ConformalMetric::kMaxJump) + 1);
  return out;
}

// ---------------------------------------------------------------------------
// Example families

/// The round metric, u = 0.
inline ConformalMetric make_round(GridSpec grid = {}) {
  return ConformalMetric([](const SpherePoint&) { return 0.0; }, "round", grid,
                         AxialProfile{kSouthPole, [](double t) { return -log_cosh(t); }, -18.0, 18.0});
}

/// pullback(dilation_at(p, 1/s), round): in the chart centred at p,
/// u = log(s(1+|z|^2)/(1+s^2|z|^2)). Mass concentrates at p as s grows.
inline ConformalMetric make_dilated_round(const SpherePoint& p, double s, GridSpec grid = {}) {
  if (!(s > 0.0)) throw Error(ErrorCode::NonPositiveScale, "dilated_round needs s > 0");
  const double shift = std::log(s);
  const SpherePoint centre = p;
  ExponentFn u = [centre, s](const SpherePoint& q) {
    // cos of the angle to p gives |z|^2 = (1 - c)/(1 + c) in the p-centred chart.
    const double c = q.dot(centre);
    return std::log(2.0 * s / ((1.0 + c) + s * s * (1.0 - c)));
  };
  return ConformalMetric(std::move(u), "dilated_round", grid,
                         AxialProfile{p, [shift](double t) { return -log_cosh(t + shift); }, -shift - 18.0, -shift + 18.0});
}

namespace detail {

/// Half-length of the hyperbolic neck, k pi^2 - 2 pi.
inline double neck_half_length(int k) { return k * kPi * kPi - 2.0 * kPi; }

/// Cylinder profile of h_k: the hyperbolic neck factor 1/(2 k pi cos(t/(2 k pi)))
/// on |t| < T. The neck keeps opening past T and blows up at k pi^2; a round cap
/// tangent to it at distance kCapGap before the blow-up takes over through a
/// quintic blend on [T, k pi^2 - kCapGap].
struct CylinderProfile {
  static constexpr double kCapGap = 2.0;

  int k;
  double T, joint, cap_centre, log_a;

  explicit CylinderProfile(int kk) : k(kk), T(neck_half_length(kk)) {
    const double L = 2.0 * k * kPi;
    joint = k * kPi * kPi - kCapGap;
    const double slope = std::tan(joint / L) / L;
    cap_centre = joint + std::atanh(slope);
    log_a = neck(joint) + log_cosh(joint - cap_centre);
  }

  double neck(double t) const {
    const double L = 2.0 * k * kPi;
    return -std::log(L * std::cos(t / L));
  }
  double cap(double t) const { return log_a - log_cosh(t - cap_centre); }

  double operator()(double t) const {
    const double a = std::abs(t);
    if (a <= T) return neck(a);
    if (a >= joint) return cap(a);
    const double blend = smoothstep5((a - T) / (joint - T));
    return (1.0 - blend) * neck(a) + blend * cap(a);
  }

  double window() const { return cap_centre + 18.0; }
};

inline void check_k(int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
}

}  // namespace detail

/// h_k: the hyperbolic neck S^1 x (-k pi^2 + 2 pi, k pi^2 - 2 pi) with
/// g = (1/(2 k pi cos(t/(2 k pi))))^2 (dt^2 + dtheta^2), capped by round caps.
/// The neck sits on the equator, t = log|z| in the NorthChart.
inline ConformalMetric make_cylinder_sphere(int k, GridSpec grid = {}) {
  detail::check_k(k);
  const detail::CylinderProfile prof(k);
  AxialProfile axial{kSouthPole, prof, -prof.window(), prof.window()};
  return ConformalMetric([axial](const SpherePoint& q) { return axial.exponent(q); },
                         "cylinder_sphere(" + std::to_string(k) + ")", grid, axial);
}

/// h_k': the neck of h_k cut at t = 0 with a flat cylinder of factor
/// (1/(2 k pi))^2 on [-k^2, k^2] inserted, then capped the same way.
inline ConformalMetric make_flat_neck_sphere(int k, GridSpec grid = {}) {
  detail::check_k(k);
  const detail::CylinderProfile base(k);
  const double flat = static_cast<double>(k) * k;
  auto phi = [base, flat](double t) {
    const double a = std::abs(t);
    return a <= flat ? base(0.0) : base(a - flat);
  };
  AxialProfile axial{kSouthPole, phi, -base.window() - flat, base.window() + flat};
  return ConformalMetric([axial](const SpherePoint& q) { return axial.exponent(q); },
                         "flat_neck_sphere(" + std::to_string(k) + ")", grid, axial);
}

/// Coefficients of the three perturbation modes x1, x2 x3, x1^2 - x2^2.
inline std::array<double, 3> perturbation_coefficients(std::uint64_t seed) {
  SeededUniform rng(seed);
  return {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
}

/// u = amplitude (c1 x1 + c2 x2 x3 + c3 (x1^2 - x2^2)), coefficients seeded.
inline ConformalMetric make_perturbed_round(std::uint64_t seed, double amplitude, GridSpec grid = {}) {
  if (!(amplitude >= 0.0 && amplitude <= 0.5))
    throw Error(ErrorCode::InvalidArgument, "perturbation amplitude must lie in [0, 0.5]");
  const auto c = perturbation_coefficients(seed);
  ExponentFn u = [c, amplitude](const SpherePoint& p) {
    return amplitude * (c[0] * p.x1() + c[1] * p.x2() * p.x3() + c[2] * (p.x1() * p.x1() - p.x2() * p.x2()));
  };
  return ConformalMetric(std::move(u), "perturbation(" + std::to_string(seed) + "," + std::to_string(amplitude) + ")",
                         grid);
}

}  // namespace conflab
