#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "conflab/metric.hpp"

using namespace conflab;

namespace {

double neck_area_closed_form(int k) { return 2.0 * std::cos(1.0 / k) / (k * std::sin(1.0 / k)); }

double max_neck_curvature_error(int k, int n) {
  const ConformalMetric g = make_cylinder_sphere(k, {n, 2.0});
  const CurvatureField& K = gauss_curvature(g);
  const double T = detail::neck_half_length(k);
  // Nodes whose three-point stencil stays inside the neck.
  const double reach = T - K.axial.step;
  double err = 0.0;
  for (std::size_t i = 1; i + 1 < K.axial.t.size(); ++i)
    if (std::abs(K.axial.t[i]) <= reach) err = std::max(err, std::abs(K.axial.K[i] + 1.0));
  return err;
}

MobiusTransform moderate_transform(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> scale(1.0, 2.5);
  const SpherePoint a(gauss(rng), gauss(rng), gauss(rng)), b(gauss(rng), gauss(rng), gauss(rng));
  return MobiusTransform::rotation_to_origin(a) * dilation_at(b, scale(rng));
}

}  // namespace

TEST(Round, FunctionalsOnBothLayouts) {
  const ConformalMetric g = make_round();
  for (Layout layout : {Layout::Axial, Layout::Atlas}) {
    const FunctionalReport r = functionals(g, 2.0, layout);
    EXPECT_NEAR(r.area, 4 * kPi, 1e-3);
    EXPECT_NEAR(r.entropy, 4 * kPi * std::log(2.0), 1e-3);
    EXPECT_LT(r.dev1, 1e-3);
    EXPECT_LT(r.devp, 1e-6);
    EXPECT_LT(r.gauss_bonnet_residual(), 2e-2);
  }
  EXPECT_NEAR(area(g), 4 * kPi, 1e-3);
}

TEST(Round, AxialExponentVanishes) {
  const ConformalMetric g = make_round();
  for (const SpherePoint& p : fibonacci_sphere(50)) EXPECT_NEAR(g.axial()->exponent(p), 0.0, 1e-12);
  EXPECT_NEAR(g.axial()->exponent(kNorthPole), 0.0, 1e-12);
  EXPECT_NEAR(g.axial()->exponent(kSouthPole), 0.0, 1e-12);
}

TEST(Cylinder, NeckCurvatureIsMinusOne) {
  for (int k : {1, 2, 4}) {
    const double coarse = max_neck_curvature_error(k, 129);
    const double fine = max_neck_curvature_error(k, 257);
    EXPECT_LE(fine, 5e-3) << k;
    EXPECT_GE(coarse / fine, 3.5) << k;
    EXPECT_LE(coarse / fine, 4.5) << k;
  }
}

TEST(Cylinder, NeckAreaClosedForm) {
  EXPECT_NEAR(neck_area_closed_form(1), 1.2841, 1e-4);
  EXPECT_NEAR(neck_area_closed_form(2), 1.8305, 1e-4);
  for (int k : {1, 2}) {
    const ConformalMetric g = make_cylinder_sphere(k);
    const double T = detail::neck_half_length(k);
    EXPECT_NEAR(band_area(g, -T, T), neck_area_closed_form(k), 2e-3) << k;
  }
}

TEST(Cylinder, ProfileIsContinuousAndSymmetric) {
  for (int k : {1, 2, 4}) {
    const detail::CylinderProfile prof(k);
    const double T = prof.T;
    for (double t : {T, prof.joint}) {
      EXPECT_NEAR(prof(t - 1e-9), prof(t + 1e-9), 1e-7);
      EXPECT_NEAR((prof(t + 1e-5) - prof(t - 1e-5)) / 2e-5, (prof(t + 2e-5) - prof(t)) / 2e-5, 1e-3);
    }
    EXPECT_DOUBLE_EQ(prof(3.3), prof(-3.3));
  }
}

TEST(Cylinder, GaussBonnetAndDichotomy) {
  double last_area = 0.0;
  for (int k : {1, 2, 4}) {
    const ConformalMetric g = make_cylinder_sphere(k);
    const FunctionalReport r = functionals(g, 1.0);
    EXPECT_LT(r.gauss_bonnet_residual(), 2e-2) << k;
    EXPECT_GE(r.dev1, 2.5) << k;
    EXPECT_GT(r.area, last_area);
    last_area = r.area;
  }
}

TEST(Cylinder, AtlasOperationsNeedAxialLayout) {
  const ConformalMetric g = make_cylinder_sphere(4);
  EXPECT_FALSE(g.atlas_resolved());
  try {
    functionals(g, 1.0, Layout::Atlas);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ResolutionTooCoarse);
  }
}

TEST(Cylinder, DiameterGrowsWithK) {
  double last = 0.0;
  for (int k : {1, 2}) {
    const double d = diameter_estimate(make_cylinder_sphere(k, {129, 2.0}));
    EXPECT_GT(d, last);
    last = d;
  }
}

TEST(FlatNeck, MiddleBandArea) {
  for (int k : {1, 2}) {
    const ConformalMetric g = make_flat_neck_sphere(k);
    const double flat = static_cast<double>(k) * k;
    // e^{2 phi} = 1/(2 k pi)^2 on a band of length 2 k^2 and circumference 2 pi.
    EXPECT_NEAR(band_area(g, -flat, flat), 1.0 / kPi, 1e-9);
    EXPECT_LT(functionals(g, 1.0).gauss_bonnet_residual(), 2e-2);
  }
}

TEST(Dilated, ExponentMatchesChartFormula) {
  const double s = 7.0;
  const SpherePoint p(0.3, -0.2, 0.5);
  const ConformalMetric g = make_dilated_round(p, s);
  const MobiusTransform r = MobiusTransform::rotation_to_origin(p);
  for (Complex z : {Complex(0.1, 0.2), Complex(-1, 0.5), Complex(3, 3)}) {
    const SpherePoint q = r.inverse().apply(stereo_lift(z, ChartId::North));
    const double expected = std::log(s * (1 + std::norm(z)) / (1 + s * s * std::norm(z)));
    EXPECT_NEAR(g.exponent(q), expected, 1e-12);
    EXPECT_NEAR(g.axial()->exponent(q), expected, 1e-12);
  }
}

TEST(Dilated, IsRoundUpToMobius) {
  for (double s : {10.0, 100.0}) {
    const ConformalMetric g = make_dilated_round(SpherePoint(1, 1, 1), s);
    const FunctionalReport r = functionals(g, 1.0);
    EXPECT_NEAR(r.area, 4 * kPi, 1e-3);
    EXPECT_LT(r.dev1, 1e-2);
    EXPECT_LT(r.gauss_bonnet_residual(), 2e-2);
    // Mass concentrates at p.
    const auto c = center_of_mass(g);
    const double along = (c[0] + c[1] + c[2]) / std::sqrt(3.0);
    EXPECT_GT(along, s > 50 ? 0.98 : 0.9);
  }
}

TEST(Dilated, AgreesWithPullbackOfRound) {
  // The round profile's axis runs through the south pole.
  const SpherePoint p = kSouthPole;
  const ConformalMetric a = make_dilated_round(p, 5.0);
  const ConformalMetric b = pullback(dilation_at(p, 0.2), make_round());
  ASSERT_TRUE(b.axial().has_value());
  for (const SpherePoint& q : fibonacci_sphere(100)) {
    EXPECT_NEAR(a.exponent(q), b.exponent(q), 1e-10);
    EXPECT_NEAR(a.exponent(q), b.axial()->exponent(q), 1e-10);
  }
}

TEST(Perturbed, SeededAndBounded) {
  const auto c1 = perturbation_coefficients(42), c2 = perturbation_coefficients(42);
  EXPECT_EQ(c1, c2);
  for (double c : c1) EXPECT_LE(std::abs(c), 1.0);
  EXPECT_THROW(make_perturbed_round(1, 0.6), Error);
  const ConformalMetric g = make_perturbed_round(42, 0.3);
  EXPECT_TRUE(g.atlas_resolved());
  EXPECT_LT(functionals(g, 1.0).gauss_bonnet_residual(), 2e-2);
}

TEST(Pullback, PreservesFunctionals) {
  std::mt19937_64 rng(17);
  const ConformalMetric g = make_perturbed_round(7, 0.3);
  const FunctionalReport base = functionals(g, 1.0);
  for (int k = 0; k < 10; ++k) {
    const ConformalMetric h = pullback(moderate_transform(rng), g);
    const FunctionalReport r = functionals(h, 1.0);
    EXPECT_NEAR(r.area, base.area, 1e-3) << k;
    EXPECT_NEAR(r.dev1, base.dev1, 2e-3) << k;
    EXPECT_NEAR(r.entropy, base.entropy, 5e-3) << k;
    EXPECT_LT(r.gauss_bonnet_residual(), 2e-2) << k;
  }
}

TEST(Pullback, CurvatureIsEquivariant) {
  std::mt19937_64 rng(23);
  const ConformalMetric g = make_perturbed_round(11, 0.3);
  const CurvatureField& Kg = gauss_curvature(g);
  for (int k = 0; k < 3; ++k) {
    const MobiusTransform sigma = moderate_transform(rng);
    const ConformalMetric h = pullback(sigma, g);
    const CurvatureField& Kh = gauss_curvature(h);
    double err = 0.0;
    for (const SpherePoint& p : fibonacci_sphere(400)) {
      const SpherePoint q = sigma.apply(p);
      err = std::max(err, std::abs(Kh.K.value_at(p) - Kg.K.value_at(q)));
    }
    EXPECT_LE(err, 5e-3) << k;
  }
}

TEST(Pullback, AxisPreservingKeepsProfile) {
  const ConformalMetric g = make_cylinder_sphere(1);
  const MobiusTransform shrink = dilation_at(kSouthPole, 3.0);
  const ConformalMetric h = pullback(shrink, g);
  ASSERT_TRUE(h.axial().has_value());
  for (const SpherePoint& q : fibonacci_sphere(60)) EXPECT_NEAR(h.exponent(q), h.axial()->exponent(q), 1e-9);
  EXPECT_NEAR(functionals(h, 1.0).dev1, functionals(g, 1.0).dev1, 1e-6);
  const ConformalMetric flipped = pullback(MobiusTransform::rotation_to_origin(kNorthPole), g);
  ASSERT_TRUE(flipped.axial().has_value());
  for (const SpherePoint& q : fibonacci_sphere(60))
    EXPECT_NEAR(flipped.exponent(q), flipped.axial()->exponent(q), 1e-9);
}

TEST(Pullback, SampledMetricInterpolates) {
  const ConformalMetric g = ConformalMetric::from_field(make_perturbed_round(3, 0.2, {129, 2.0}).field());
  EXPECT_FALSE(g.exact_evaluator());
  const ConformalMetric h = pullback(MobiusTransform::polar_rotation(0.4), g);
  EXPECT_NEAR(area(h), area(g), 1e-3);
  try {
    pullback(dilation_at(kSouthPole, 200.0), g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InconsistentAtlas);
  }
}

TEST(Diameter, RoundIsPi) {
  EXPECT_NEAR(diameter_estimate(make_round()), kPi, 0.05 * kPi);
  const ConformalMetric atlas_round = make_perturbed_round(1, 0.0);
  EXPECT_NEAR(diameter_estimate(atlas_round), kPi, 0.05 * kPi);
}
