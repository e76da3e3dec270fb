#pragma once

// Orientation-preserving Mobius transformations of the sphere, acting on the
// NorthChart coordinate as z -> (az + b)/(cz + d) with ad - bc = 1.

#include <array>
#include <cmath>
#include <complex>

#include "conflab/error.hpp"
#include "conflab/sphere.hpp"

namespace conflab {

namespace detail {

/// Homogeneous coordinates (w1, w2) of p with z_North = w1 / w2, chosen so
/// neither entry loses precision near the poles.
inline std::array<Complex, 2> homogeneous(const SpherePoint& p) {
  const double r2 = p.x1() * p.x1() + p.x2() * p.x2();
  if (p.x3() <= 0.0) return {Complex(p.x1(), p.x2()), Complex(1.0 - p.x3(), 0.0)};
  if (r2 == 0.0) return {Complex(1.0, 0.0), Complex(0.0, 0.0)};
  return {Complex(p.x1(), p.x2()), Complex(r2 / (1.0 + p.x3()), 0.0)};
}

inline SpherePoint from_homogeneous(Complex w1, Complex w2) {
  const double n1 = std::norm(w1), n2 = std::norm(w2);
  const Complex cross = w1 * std::conj(w2);
  return {2.0 * cross.real(), 2.0 * cross.imag(), n1 - n2};
}

}  // namespace detail

class MobiusTransform {
 public:
  MobiusTransform() : a_(1.0), b_(0.0), c_(0.0), d_(1.0) {}

  /// Rescales the matrix to determinant 1.
  MobiusTransform(Complex a, Complex b, Complex c, Complex d) {
    const Complex det = a * d - b * c;
    if (std::abs(det) < 1e-300) throw Error(ErrorCode::InvalidArgument, "singular Mobius matrix");
    const Complex root = std::sqrt(det);
    a_ = a / root;
    b_ = b / root;
    c_ = c / root;
    d_ = d / root;
  }

  static MobiusTransform identity() { return {}; }

  /// Rotation by angle alpha about the x3 axis: z -> e^{i alpha} z.
  static MobiusTransform polar_rotation(double alpha) {
    return {std::polar(1.0, alpha / 2), 0.0, 0.0, std::polar(1.0, -alpha / 2)};
  }

  /// The minimal rotation taking p to the NorthChart origin (0,0,-1). For
  /// p = (0,0,1) the half-turn about the x1 axis.
  static MobiusTransform rotation_to_origin(const SpherePoint& p) {
    if (p.x3() == 1.0) return {0.0, Complex(0, 1), Complex(0, 1), 0.0};
    auto [w1, w2] = detail::homogeneous(p);
    if (p.x3() > 0.0) {
      // Use the form with real second entry so the rotation axis is equatorial.
      const double r2 = p.x1() * p.x1() + p.x2() * p.x2();
      w1 = Complex(p.x1(), p.x2());
      w2 = Complex(r2 / (1.0 + p.x3()), 0.0);
    }
    const double norm = std::sqrt(std::norm(w1) + std::norm(w2));
    w1 /= norm;
    w2 /= norm;
    return {w2, -w1, std::conj(w1), std::conj(w2)};
  }

  Complex a() const { return a_; }
  Complex b() const { return b_; }
  Complex c() const { return c_; }
  Complex d() const { return d_; }
  Complex determinant() const { return a_ * d_ - b_ * c_; }

  /// Composition: (*this * other)(p) = this(other(p)). Renormalised.
  MobiusTransform operator*(const MobiusTransform& o) const {
    return {a_ * o.a_ + b_ * o.c_, a_ * o.b_ + b_ * o.d_, c_ * o.a_ + d_ * o.c_, c_ * o.b_ + d_ * o.d_};
  }

  MobiusTransform inverse() const { return {d_, -b_, -c_, a_}; }

  /// Action on a finite chart coordinate (may return inf if z maps to the pole).
  Complex apply(Complex z) const { return (a_ * z + b_) / (c_ * z + d_); }

  SpherePoint apply(const SpherePoint& p) const {
    const auto [w1, w2] = detail::homogeneous(p);
    return detail::from_homogeneous(a_ * w1 + b_ * w2, c_ * w1 + d_ * w2);
  }

  /// Conformal stretch of the map with respect to the round metric:
  /// |sigma'(z)| (1 + |z|^2) / (1 + |sigma(z)|^2), evaluated pole-safely.
  double stretch(const SpherePoint& p) const {
    const auto [w1, w2] = detail::homogeneous(p);
    const Complex v1 = a_ * w1 + b_ * w2, v2 = c_ * w1 + d_ * w2;
    return (std::norm(w1) + std::norm(w2)) / (std::norm(v1) + std::norm(v2));
  }

  std::array<double, 8> to_reals() const {
    return {a_.real(), a_.imag(), b_.real(), b_.imag(), c_.real(), c_.imag(), d_.real(), d_.imag()};
  }
  /// Inverse of to_reals. Entries are taken verbatim when they already have
  /// unit determinant (so serialisation round-trips bit-exactly).
  static MobiusTransform from_reals(const std::array<double, 8>& r) {
    MobiusTransform m;
    m.a_ = Complex(r[0], r[1]);
    m.b_ = Complex(r[2], r[3]);
    m.c_ = Complex(r[4], r[5]);
    m.d_ = Complex(r[6], r[7]);
    if (std::abs(m.determinant() - 1.0) > 1e-12) return {m.a_, m.b_, m.c_, m.d_};
    return m;
  }

 private:
  Complex a_, b_, c_, d_;
};

/// R^{-1} D_{1/s} R with R the rotation taking p to the chart origin: in the
/// chart centred at p this is z -> z / s. Fixes p and its antipode.
inline MobiusTransform dilation_at(const SpherePoint& p, double s) {
  if (!(s > 0.0)) throw Error(ErrorCode::NonPositiveScale, "dilation scale must be positive");
  const MobiusTransform rot = MobiusTransform::rotation_to_origin(p);
  const MobiusTransform dil(1.0, 0.0, 0.0, s);
  return rot.inverse() * dil * rot;
}

}  // namespace conflab
