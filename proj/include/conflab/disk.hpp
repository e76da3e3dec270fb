#pragma once

// Elliptic testbed on the planar disk D_r: uniform grid fields with a disk
// mask, the Newtonian potential, a Shortley-Weller Dirichlet solver, the
// Zygmund norm, and numerical checks of the estimates built on them.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "conflab/error.hpp"
#include "conflab/numerics.hpp"
#include "conflab/parallel.hpp"

namespace conflab {

/// Values on the uniform grid x_{ij} = (-r + j h, -r + i h), h = 2r/(n-1).
/// Only nodes with |x| <= r (the mask) carry meaning.
struct DiskField {
  int n = 65;
  double radius = 1.0;
  std::vector<double> values;

  DiskField() : values(static_cast<std::size_t>(n) * n, 0.0) {}
  explicit DiskField(int size, double r = 1.0, double fill = 0.0) : n(size), radius(r) {
    if (size < 65 || size % 2 == 0) throw Error(ErrorCode::InvalidArgument, "disk grid size must be odd and >= 65");
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "disk radius must be positive");
    values.assign(static_cast<std::size_t>(n) * n, fill);
  }

  double step() const { return 2.0 * radius / (n - 1); }
  double x(int j) const { return -radius + j * step(); }
  double y(int i) const { return -radius + i * step(); }
  double r(int i, int j) const { return std::hypot(x(j), y(i)); }
  bool in_mask(int i, int j) const { return r(i, j) <= radius * (1.0 + 1e-12); }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
  double cell() const { return step() * step(); }

  template <class F>
  double sum_where(F&& pred_weight) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (in_mask(i, j)) s += pred_weight(i, j);
    return s * cell();
  }
};

inline DiskField sample_disk(const std::function<double(double, double)>& fn, int n, double radius = 1.0) {
  DiskField f(n, radius);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (f.in_mask(i, j)) f.at(i, j) = fn(f.x(j), f.y(i));
  return f;
}

inline void require_same_grid(const DiskField& a, const DiskField& b) {
  if (a.n != b.n || a.radius != b.radius) throw Error(ErrorCode::InvalidArgument, "disk fields live on different grids");
}

/// ||f||_{L^1(D_rho)} over mask nodes with |x| <= rho.
inline double l1_norm(const DiskField& f, double rho = std::numeric_limits<double>::infinity()) {
  return f.sum_where([&](int i, int j) { return f.r(i, j) <= rho ? std::abs(f.at(i, j)) : 0.0; });
}

/// Zygmund norm int |f| log(1 + |f|).
inline double l1logl1_norm(const DiskField& f) {
  return f.sum_where([&](int i, int j) {
    const double a = std::abs(f.at(i, j));
    return a * std::log1p(a);
  });
}

// ---------------------------------------------------------------------------
// Newtonian potential

namespace detail {

/// G(m, l) for 0 <= m, l < size: the 5-point lattice Green's function with
/// G(0,0) = 0 and sum_nb G - 4 G = delta, from its Fourier integral
/// G(m,l) = (1/pi) int_0^pi (1 - cos(m t) e^{-l s}) / (2 sinh s) dt, cosh s = 2 - cos t.
/// Off the l = 0 row the integrand is lattice-harmonic node by node.
inline std::vector<double> lattice_green_table(int size) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const std::vector<double>>> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.lower_bound(size);
    if (it != cache.end()) {
      if (it->first == size) return *it->second;
      std::vector<double> out(static_cast<std::size_t>(size) * size);
      for (int m = 0; m < size; ++m)
        for (int l = 0; l < size; ++l) out[static_cast<std::size_t>(m) * size + l] = (*it->second)[static_cast<std::size_t>(m) * it->first + l];
      return out;
    }
  }
  const GaussLegendre gl(2048);
  std::vector<double> table(static_cast<std::size_t>(size) * size, 0.0);
  std::vector<double> cm(size), ql(size);
  for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
    const double t = 0.5 * kPi * (gl.nodes[k] + 1.0);
    const double w = 0.5 * kPi * gl.weights[k];
    const double s = std::acosh(2.0 - std::cos(t));
    const double W = w / (2.0 * std::sinh(s)) / kPi;
    const double q = std::exp(-s);
    for (int m = 0; m < size; ++m) cm[m] = std::cos(m * t);
    ql[0] = 1.0;
    for (int l = 1; l < size; ++l) ql[l] = ql[l - 1] * q;
    for (int m = 0; m < size; ++m) {
      double* row = &table[static_cast<std::size_t>(m) * size];
      for (int l = 0; l < size; ++l) row[l] += W * (1.0 - cm[m] * ql[l]);
    }
  }
  std::lock_guard lock(mutex);
  cache[size] = std::make_shared<const std::vector<double>>(table);
  return table;
}

}  // namespace detail

enum class PotentialKernel {
  LatticeGreen,  // 2 pi G(m) - gamma - 1.5 log 2 + log h; discretely exact Laplacian
  DiskAverage,   // log|x - y| off the diagonal, mean of log over a disk of cell area on it
};

/// Table of log|x - y| surrogates indexed by |grid offset|.
inline std::vector<double> potential_kernel(int size, double h, PotentialKernel kind) {
  std::vector<double> K(static_cast<std::size_t>(size) * size);
  if (kind == PotentialKernel::LatticeGreen) {
    constexpr double kEulerGamma = 0.57721566490153286061;
    const double c = std::log(h) - kEulerGamma - 1.5 * std::log(2.0);
    const std::vector<double> G = detail::lattice_green_table(size);
    for (std::size_t k = 0; k < K.size(); ++k) K[k] = 2.0 * kPi * G[k] + c;
  } else {
    for (int m = 0; m < size; ++m)
      for (int l = 0; l < size; ++l)
        K[static_cast<std::size_t>(m) * size + l] = (m == 0 && l == 0) ? std::log(h / std::sqrt(kPi)) - 0.5 : std::log(h * std::hypot(m, l));
  }
  return K;
}

/// I(f)(x) = int_D f(y) log|x - y| dy by direct summation over mask cells.
inline DiskField newtonian_potential(const DiskField& f, PotentialKernel kind = PotentialKernel::LatticeGreen) {
  const int n = f.n;
  const std::vector<double> K = potential_kernel(n, f.step(), kind);
  struct Source {
    int i, j;
    double w;
  };
  std::vector<Source> sources;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (f.in_mask(i, j) && f.at(i, j) != 0.0) sources.push_back({i, j, f.at(i, j) * f.cell()});
  DiskField out(n, f.radius);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < n; ++j) {
      if (!out.in_mask(i, j)) continue;
      double s = 0.0;
      for (const Source& src : sources)
        s += src.w * K[static_cast<std::size_t>(std::abs(i - src.i)) * n + std::abs(j - src.j)];
      out.at(i, j) = s;
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Dirichlet problem

/// 5-point Laplacian at (i, j); requires all four neighbours on the grid.
inline double laplacian_5pt(const DiskField& u, int i, int j) {
  return (u.at(i + 1, j) + u.at(i - 1, j) + u.at(i, j + 1) + u.at(i, j - 1) - 4.0 * u.at(i, j)) / u.cell();
}

/// Nodes where the plain 5-point stencil stays strictly inside the disk.
inline bool regular_interior(const DiskField& u, int i, int j) {
  if (i < 1 || j < 1 || i > u.n - 2 || j > u.n - 2) return false;
  const double R = u.radius * (1.0 - 1e-10);
  return u.r(i + 1, j) < R && u.r(i - 1, j) < R && u.r(i, j + 1) < R && u.r(i, j - 1) < R;
}

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
};

/// -Delta u = f in D_r, u = 0 on the circle. Shortley-Weller arms reach the
/// circle exactly; the non-symmetric system is solved by BiCGSTAB with a
/// diagonal preconditioner.
inline DiskField dirichlet_solve(const DiskField& f, SolveStats* stats = nullptr) {
  const int n = f.n;
  const double h = f.step(), R = f.radius;
  std::vector<int> index(static_cast<std::size_t>(n) * n, -1);
  int unknowns = 0;
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j)
      if (f.r(i, j) < R * (1.0 - 1e-10)) index[static_cast<std::size_t>(i) * n + j] = unknowns++;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(unknowns) * 5);
  Eigen::VectorXd rhs(unknowns);
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j) {
      const int row = index[static_cast<std::size_t>(i) * n + j];
      if (row < 0) continue;
      const double x = f.x(j), y = f.y(i);
      // Arm lengths (in units of h) towards E, W, N, S; -1 column marks the circle.
      double arm[4];
      int col[4];
      const int di[4] = {0, 0, 1, -1}, dj[4] = {1, -1, 0, 0};
      for (int d = 0; d < 4; ++d) {
        col[d] = index[static_cast<std::size_t>(i + di[d]) * n + (j + dj[d])];
        if (col[d] >= 0) {
          arm[d] = 1.0;
        } else if (dj[d] != 0) {
          arm[d] = std::min(1.0, std::max((std::sqrt(R * R - y * y) - dj[d] * x) / h, 1e-12));
        } else {
          arm[d] = std::min(1.0, std::max((std::sqrt(R * R - x * x) - di[d] * y) / h, 1e-12));
        }
      }
      double diag = 0.0;
      for (int axis = 0; axis < 2; ++axis) {
        const double a = arm[2 * axis], b = arm[2 * axis + 1];
        // -u'' ~ (2/h^2) [u_P/(ab) - u_+/(a(a+b)) - u_-/(b(a+b))]
        diag += 2.0 / (h * h * a * b);
        if (col[2 * axis] >= 0) triplets.emplace_back(row, col[2 * axis], -2.0 / (h * h * a * (a + b)));
        if (col[2 * axis + 1] >= 0) triplets.emplace_back(row, col[2 * axis + 1], -2.0 / (h * h * b * (a + b)));
      }
      triplets.emplace_back(row, row, diag);
      rhs[row] = f.at(i, j);
    }
  Eigen::SparseMatrix<double, Eigen::RowMajor> A(unknowns, unknowns);
  A.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>, Eigen::DiagonalPreconditioner<double>> solver;
  solver.setTolerance(1e-12);
  solver.setMaxIterations(20 * n);
  solver.compute(A);
  Eigen::VectorXd u = rhs.norm() == 0.0 ? Eigen::VectorXd::Zero(unknowns) : Eigen::VectorXd(solver.solve(rhs));
  if (rhs.norm() != 0.0 && solver.info() != Eigen::Success)
    throw Error(ErrorCode::SolverDivergence,
                "Dirichlet solve did not reach 1e-12 within " + std::to_string(20 * n) + " iterations",
                solver.error());
  if (stats) *stats = {static_cast<int>(solver.iterations()), solver.error()};

  DiskField out(n, R);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int k = index[static_cast<std::size_t>(i) * n + j];
      out.at(i, j) = k >= 0 ? u[k] : 0.0;
    }
  return out;
}

/// Centred-difference gradient magnitude; one-sided where a neighbour leaves the mask.
inline DiskField gradient_norm(const DiskField& u) {
  DiskField g(u.n, u.radius);
  const double h = u.step();
  auto inside = [&](int i, int j) { return i >= 0 && j >= 0 && i < u.n && j < u.n && u.in_mask(i, j); };
  auto partial = [&](int i, int j, int di, int dj) {
    const bool fwd = inside(i + di, j + dj), back = inside(i - di, j - dj);
    if (fwd && back) return (u.at(i + di, j + dj) - u.at(i - di, j - dj)) / (2.0 * h);
    if (fwd) return (u.at(i + di, j + dj) - u.at(i, j)) / h;
    if (back) return (u.at(i, j) - u.at(i - di, j - dj)) / h;
    return 0.0;
  };
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j)
      if (u.in_mask(i, j)) g.at(i, j) = std::hypot(partial(i, j, 0, 1), partial(i, j, 1, 0));
  return g;
}

// ---------------------------------------------------------------------------
// Estimates

struct EstimateReport {
  std::string op;
  std::string params;
  double lhs = 0.0;
  double rhs_bound = 0.0;
  double constant_estimate = 0.0;
  std::optional<bool> holds;  // set only when the bound has explicit constants
  int n = 0;
};

/// 4 pi^2 diam(D)^2 / eps with diam(D) = 2.
inline double brezis_merle_classical_bound(double eps) { return 4.0 * kPi * kPi * 4.0 / eps; }

/// u = dirichlet_solve(f); lhs = int_D exp((4 pi - eps)|u| / ||f||_1),
/// rhs = 4 pi diam(D) / eps^2 with diam(D) = 2.
inline EstimateReport brezis_merle_check(const DiskField& f, double eps) {
  if (!(eps > 0.0 && eps < 4.0 * kPi)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 4 pi)");
  const double norm1 = l1_norm(f);
  if (norm1 <= 1e-12) throw Error(ErrorCode::DegenerateSource, "||f||_1 vanishes; the exponent is undefined", norm1);
  const DiskField u = dirichlet_solve(f);
  const double k = (4.0 * kPi - eps) / norm1;
  EstimateReport r;
  r.op = "brezis_merle";
  r.params = "eps=" + std::to_string(eps) + ";l1=" + std::to_string(norm1);
  r.lhs = u.sum_where([&](int i, int j) { return std::exp(k * std::abs(u.at(i, j))); });
  r.rhs_bound = 4.0 * kPi * 2.0 / (eps * eps);
  r.constant_estimate = r.lhs / r.rhs_bound;
  r.holds = r.lhs <= r.rhs_bound;
  // The rhs above drops below |D| = pi once eps > 2 sqrt 2, so it cannot hold
  // for every f there; the classical constant 4 pi^2 diam^2 / eps is recorded too.
  const double classical = brezis_merle_classical_bound(eps);
  r.params += ";classical=" + std::to_string(classical) + ";holds_classical=" + (r.lhs <= classical ? "true" : "false");
  r.n = f.n;
  return r;
}

inline void check_q(double q) {
  if (!(q > 0.0 && q < 2.0)) throw Error(ErrorCode::InvalidExponent, "q must lie in (0, 2)", q);
}

/// int_{B_rho} |grad u|^q over nodes with |x| <= min(rho, 1 - 2h).
inline double gradient_lq(const DiskField& grad, double q, double rho) {
  const double cut = std::min(rho, grad.radius - 2.0 * grad.step());
  return grad.sum_where([&](int i, int j) { return grad.r(i, j) <= cut ? std::pow(grad.at(i, j), q) : 0.0; });
}

/// constant_estimate = max over radii of r^{2-q} int_{B_r} |grad u|^q / ||f||_1.
/// params also records the scale-invariant r^{q-2} variant.
inline EstimateReport lq_gradient_check(const DiskField& f, double q, const std::vector<double>& radii) {
  check_q(q);
  for (double r : radii)
    if (!(r > 0.0 && r <= 0.5)) throw Error(ErrorCode::InvalidArgument, "radii must lie in (0, 1/2]");
  const double norm1 = l1_norm(f);
  EstimateReport rep;
  rep.op = "lq_gradient";
  rep.n = f.n;
  rep.rhs_bound = norm1;
  std::string weighted = "", invariant = "";
  if (norm1 > 0.0) {
    const DiskField grad = gradient_norm(dirichlet_solve(f));
    for (double r : radii) {
      const double integral = gradient_lq(grad, q, r);
      const double value = std::pow(r, 2.0 - q) * integral;
      if (value / norm1 >= rep.constant_estimate) {
        rep.constant_estimate = value / norm1;
        rep.lhs = value;
      }
      weighted += ";C(" + std::to_string(r) + ")=" + std::to_string(value / norm1);
      invariant += ";Cinv(" + std::to_string(r) + ")=" + std::to_string(std::pow(r, q - 2.0) * integral / norm1);
    }
  }
  rep.params = "q=" + std::to_string(q) + weighted + invariant;
  return rep;
}

/// lhs = ||u - c||_{L^inf(D_1/2)} + ||grad u||_{L^2(D_1/2)}, c the mean over
/// D_1/2, for u = dirichlet_solve(f) + offset; driver = 1 + ||f||_{L log L} +
/// ||grad u||_{L^q(D)}.
inline EstimateReport osc_bound_check(const DiskField& f, double q,
                                      const std::function<double(double, double)>& offset = {}) {
  check_q(q);
  DiskField u = dirichlet_solve(f);
  if (offset)
    for (int i = 0; i < u.n; ++i)
      for (int j = 0; j < u.n; ++j)
        if (u.in_mask(i, j)) u.at(i, j) += offset(u.x(j), u.y(i));
  const DiskField grad = gradient_norm(u);
  const double half = 0.5;
  const double mass = u.sum_where([&](int i, int j) { return u.r(i, j) <= half ? 1.0 : 0.0; });
  const double c = u.sum_where([&](int i, int j) { return u.r(i, j) <= half ? u.at(i, j) : 0.0; }) / mass;
  double osc = 0.0;
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j)
      if (u.r(i, j) <= half) osc = std::max(osc, std::abs(u.at(i, j) - c));
  const double grad_l2 = std::sqrt(gradient_lq(grad, 2.0, half));
  const double grad_lq = std::pow(gradient_lq(grad, q, u.radius), 1.0 / q);
  EstimateReport r;
  r.op = "osc_bound";
  r.params = "q=" + std::to_string(q) + ";mean=" + std::to_string(c);
  r.lhs = osc + grad_l2;
  r.rhs_bound = 1.0 + l1logl1_norm(f) + grad_lq;
  r.constant_estimate = r.lhs / r.rhs_bound;
  r.n = f.n;
  return r;
}

/// Sum of three Gaussian bumps with seeded centres in D_0.7, widths in
/// [0.05, 0.3] and signed amplitudes, rescaled to ||f||_1 = l1 (default: a
/// seeded value in [0.2, 1]).
inline DiskField random_source(std::uint64_t seed, int n, std::optional<double> l1 = std::nullopt) {
  SeededUniform rng(seed);
  struct Bump {
    double cx, cy, w, a;
  };
  Bump bumps[3];
  for (Bump& b : bumps) {
    const double rad = 0.7 * std::sqrt(rng.next()), ang = 2.0 * kPi * rng.next();
    b = {rad * std::cos(ang), rad * std::sin(ang), rng.uniform(0.05, 0.3), rng.uniform(-1.0, 1.0)};
  }
  const double target = l1 ? *l1 : rng.uniform(0.2, 1.0);
  DiskField f = sample_disk(
      [&](double x, double y) {
        double s = 0.0;
        for (const Bump& b : bumps) s += b.a * std::exp(-((x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy)) / (2.0 * b.w * b.w));
        return s;
      },
      n);
  const double norm1 = l1_norm(f);
  for (double& v : f.values) v *= target / norm1;
  return f;
}

// ---------------------------------------------------------------------------
// Regularity experiments

/// A solution candidate of -Delta u = K e^{2u} on D.
struct RegularityMember {
  DiskField u;
  DiskField K;
  std::string label;
};

struct MemberHypotheses {
  double residual = 0.0;  // max |-Delta_h u - K e^{2u}| on regular interior nodes
  double mass = 0.0;      // int_D e^{2u}
  double entropy = 0.0;   // int_D |K| log(1+|K|) e^{2u}
  double lp_mass = 0.0;   // int_D |K|^p e^{2u}
};

inline MemberHypotheses member_hypotheses(const RegularityMember& m, double p = 1.0) {
  require_same_grid(m.u, m.K);
  MemberHypotheses h;
  const DiskField& u = m.u;
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j)
      if (regular_interior(u, i, j))
        h.residual = std::max(h.residual, std::abs(-laplacian_5pt(u, i, j) - m.K.at(i, j) * std::exp(2.0 * u.at(i, j))));
  h.mass = u.sum_where([&](int i, int j) { return std::exp(2.0 * u.at(i, j)); });
  h.entropy = u.sum_where([&](int i, int j) {
    const double k = std::abs(m.K.at(i, j));
    return k * std::log1p(k) * std::exp(2.0 * u.at(i, j));
  });
  h.lp_mass = u.sum_where([&](int i, int j) { return std::pow(std::abs(m.K.at(i, j)), p) * std::exp(2.0 * u.at(i, j)); });
  return h;
}

namespace detail {

inline void check_family(const std::vector<RegularityMember>& family, double eps, double lambda, double p, bool lp) {
  if (family.empty()) throw Error(ErrorCode::EmptyFamily, "regularity experiment needs at least one member");
  for (std::size_t k = 0; k < family.size(); ++k) {
    const MemberHypotheses h = member_hypotheses(family[k], p);
    const std::string who = "member " + std::to_string(k) + " (" + family[k].label + "): ";
    if (h.residual > 1e-3)
      throw Error(ErrorCode::HypothesisViolated, who + "FD residual " + std::to_string(h.residual) + " > 1e-3", h.residual);
    if (h.mass > eps)
      throw Error(ErrorCode::HypothesisViolated, who + "int e^{2u} = " + std::to_string(h.mass) + " > eps", h.mass);
    const double bound_value = lp ? h.lp_mass : h.entropy;
    if (bound_value > lambda)
      throw Error(ErrorCode::HypothesisViolated,
                  who + (lp ? "int |K|^p e^{2u} = " : "entropy = ") + std::to_string(bound_value) + " > Lambda", bound_value);
  }
}

}  // namespace detail

/// Local entropy int_{D_1/2} |K| e^{2u} log(1 + |K| e^{2u}) of one member.
inline double local_entropy(const RegularityMember& m) {
  return m.u.sum_where([&](int i, int j) {
    if (m.u.r(i, j) > 0.5) return 0.0;
    const double a = std::abs(m.K.at(i, j)) * std::exp(2.0 * m.u.at(i, j));
    return a * std::log1p(a);
  });
}

/// int_{D_1/2} |K|^p e^{2pu} of one member.
inline double local_lp(const RegularityMember& m, double p) {
  return m.u.sum_where([&](int i, int j) {
    return m.u.r(i, j) > 0.5 ? 0.0 : std::pow(std::abs(m.K.at(i, j)) * std::exp(2.0 * m.u.at(i, j)), p);
  });
}

inline EstimateReport epsilon_regularity_experiment(const std::vector<RegularityMember>& family, double eps, double lambda) {
  detail::check_family(family, eps, lambda, 1.0, false);
  EstimateReport r;
  r.op = "epsilon_regularity";
  r.params = "eps=" + std::to_string(eps) + ";Lambda=" + std::to_string(lambda) + ";members=" + std::to_string(family.size());
  for (const RegularityMember& m : family) r.constant_estimate = std::max(r.constant_estimate, local_entropy(m));
  r.lhs = r.constant_estimate;
  r.rhs_bound = lambda;
  r.n = family.front().u.n;
  return r;
}

inline EstimateReport lp_regularity_experiment(const std::vector<RegularityMember>& family, double eps, double lambda,
                                               double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidExponent, "p must be >= 1", p);
  detail::check_family(family, eps, lambda, p, true);
  EstimateReport r;
  r.op = "lp_regularity";
  r.params = "eps=" + std::to_string(eps) + ";Lambda=" + std::to_string(lambda) + ";p=" + std::to_string(p);
  for (const RegularityMember& m : family) r.constant_estimate = std::max(r.constant_estimate, local_lp(m, p));
  r.lhs = r.constant_estimate;
  r.rhs_bound = lambda;
  r.n = family.front().u.n;
  return r;
}

/// Scaled standard bubbles u = v(t(x - c)) + log t, v = -log(1 + |x|^2/4),
/// K = 1, with masses 4 pi t^2/(4 + t^2) spread over (0.1 eps, 0.9 eps) and
/// seeded centres in D_1/4.
inline std::vector<RegularityMember> scaled_bubble_family(int count, double eps, int n, std::uint64_t seed = 1) {
  SeededUniform rng(seed);
  std::vector<RegularityMember> family;
  for (int k = 0; k < count; ++k) {
    const double mass = eps * (0.1 + 0.8 * (count == 1 ? 0.0 : static_cast<double>(k) / (count - 1)));
    const double t = std::sqrt(4.0 * mass / (4.0 * kPi - mass));
    const double rad = 0.25 * std::sqrt(rng.next()), ang = 2.0 * kPi * rng.next();
    const double cx = rad * std::cos(ang), cy = rad * std::sin(ang);
    RegularityMember m{sample_disk(
                           [=](double x, double y) {
                             const double q = t * t * ((x - cx) * (x - cx) + (y - cy) * (y - cy));
                             return -std::log1p(q / 4.0) + std::log(t);
                           },
                           n),
                       sample_disk([](double, double) { return 1.0; }, n), "bubble(t=" + std::to_string(t) + ")"};
    family.push_back(std::move(m));
  }
  return family;
}

}  // namespace conflab
