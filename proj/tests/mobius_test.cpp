#include <gtest/gtest.h>

#include <random>

#include "conflab/mobius.hpp"

using namespace conflab;

namespace {

double gap(const SpherePoint& a, const SpherePoint& b) { return a.distance(b); }

SpherePoint random_point(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng), g(rng)};
}

MobiusTransform random_transform(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {Complex(g(rng), g(rng)), Complex(g(rng), g(rng)), Complex(g(rng), g(rng)), Complex(g(rng), g(rng))};
}

}  // namespace

TEST(Mobius, NormalisedDeterminant) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const MobiusTransform m = random_transform(rng) * random_transform(rng);
    EXPECT_LT(std::abs(m.determinant() - 1.0), 1e-12);
  }
}

TEST(Mobius, IdentityAndInverse) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const SpherePoint p = random_point(rng);
    EXPECT_LT(gap(MobiusTransform::identity().apply(p), p), 1e-15);
    const MobiusTransform m = random_transform(rng);
    EXPECT_LT(gap((m.inverse() * m).apply(p), p), 1e-10);
    EXPECT_LT(gap(m.inverse().apply(m.apply(p)), p), 1e-10);
  }
}

TEST(Mobius, CompositionIsAssociative) {
  std::mt19937_64 rng(3);
  const MobiusTransform a = random_transform(rng), b = random_transform(rng), c = random_transform(rng);
  for (int k = 0; k < 20; ++k) {
    const SpherePoint p = random_point(rng);
    EXPECT_LT(gap(((a * b) * c).apply(p), (a * (b * c)).apply(p)), 1e-10);
    EXPECT_LT(gap((a * b).apply(p), a.apply(b.apply(p))), 1e-10);
  }
}

TEST(Mobius, PolarRotation) {
  const double alpha = 0.9;
  const MobiusTransform r = MobiusTransform::polar_rotation(alpha);
  const SpherePoint p(0.3, -0.5, 0.2);
  const SpherePoint q = r.apply(p);
  EXPECT_NEAR(q.x1(), std::cos(alpha) * p.x1() - std::sin(alpha) * p.x2(), 1e-14);
  EXPECT_NEAR(q.x2(), std::sin(alpha) * p.x1() + std::cos(alpha) * p.x2(), 1e-14);
  EXPECT_NEAR(q.x3(), p.x3(), 1e-14);
  EXPECT_NEAR(r.stretch(p), 1.0, 1e-14);
}

TEST(Mobius, RotationToOrigin) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const SpherePoint p = random_point(rng);
    const MobiusTransform r = MobiusTransform::rotation_to_origin(p);
    EXPECT_LT(gap(r.apply(p), kSouthPole), 1e-12);
    // Isometry: unit stretch everywhere.
    EXPECT_NEAR(r.stretch(random_point(rng)), 1.0, 1e-12);
  }
  const MobiusTransform flip = MobiusTransform::rotation_to_origin(kNorthPole);
  EXPECT_LT(gap(flip.apply(kNorthPole), kSouthPole), 1e-15);
  EXPECT_LT(gap(flip.apply(SpherePoint(1, 0, 0)), SpherePoint(1, 0, 0)), 1e-15);
}

TEST(Dilation, UnitScaleIsIdentity) {
  std::mt19937_64 rng(5);
  const SpherePoint c = random_point(rng);
  const MobiusTransform d = dilation_at(c, 1.0);
  for (int k = 0; k < 20; ++k) {
    const SpherePoint p = random_point(rng);
    EXPECT_LT(gap(d.apply(p), p), 1e-12);
  }
}

TEST(Dilation, AtSouthPoleDividesChartCoordinate) {
  const double s = 3.5;
  const MobiusTransform d = dilation_at(kSouthPole, s);
  for (Complex z : {Complex(0.2, 0.1), Complex(-1.5, 0.7), Complex(3, -2)}) {
    const Complex w = stereo_project(d.apply(stereo_lift(z, ChartId::North)), ChartId::North);
    EXPECT_LT(std::abs(w - z / s), 1e-12);
  }
}

TEST(Dilation, FixesCentreAndAntipode) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 20; ++k) {
    const SpherePoint c = random_point(rng);
    const MobiusTransform d = dilation_at(c, 0.05 + 10 * (k % 5));
    EXPECT_LT(gap(d.apply(c), c), 1e-10);
    EXPECT_LT(gap(d.apply(c.antipode()), c.antipode()), 1e-10);
  }
}

TEST(Dilation, GroupLaw) {
  std::mt19937_64 rng(7);
  const SpherePoint c = random_point(rng);
  const MobiusTransform lhs = dilation_at(c, 2.0) * dilation_at(c, 3.0);
  const MobiusTransform rhs = dilation_at(c, 6.0);
  for (int k = 0; k < 20; ++k) {
    const SpherePoint p = random_point(rng);
    EXPECT_LT(gap(lhs.apply(p), rhs.apply(p)), 1e-10);
  }
}

TEST(Dilation, RejectsNonPositiveScale) {
  try {
    dilation_at(kSouthPole, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveScale);
  }
  EXPECT_THROW(dilation_at(kSouthPole, -1.0), Error);
}

TEST(Stretch, MatchesChartFormula) {
  // lambda(z) = |sigma'(z)| (1+|z|^2)/(1+|sigma(z)|^2) with sigma'(z) = 1/(cz+d)^2.
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const MobiusTransform m = random_transform(rng);
    const Complex z(0.3 * k - 2, 0.1 * k - 1);
    const Complex w = m.apply(z);
    const double expected = (1.0 / std::norm(m.c() * z + m.d())) * (1 + std::norm(z)) / (1 + std::norm(w));
    EXPECT_NEAR(m.stretch(stereo_lift(z, ChartId::North)), expected, 1e-10 * expected);
  }
}

TEST(Mobius, RealsRoundTrip) {
  std::mt19937_64 rng(9);
  const MobiusTransform m = random_transform(rng);
  const MobiusTransform back = MobiusTransform::from_reals(m.to_reals());
  EXPECT_EQ(back.to_reals(), m.to_reals());
}
