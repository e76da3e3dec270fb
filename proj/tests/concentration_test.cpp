#include <gtest/gtest.h>

#include <cmath>

#include "conflab/concentration.hpp"

using namespace conflab;

namespace {

const double kRoundRho = std::acos(1.0 - 0.1 / kPi);
const SpherePoint kP(0.2, -0.4, 0.6);

}  // namespace

TEST(Rho, RoundClosedForm) {
  EXPECT_NEAR(kRoundRho, 0.2527, 5e-4);
  const ConformalMetric g = make_round();
  for (const SpherePoint& x : {kP, kNorthPole, kSouthPole, SpherePoint(1, 0, 0)})
    EXPECT_NEAR(rho_at(g, x, 0.4), kRoundRho, 1e-3);
}

TEST(Rho, MonotoneInEpsilon) {
  const ConformalMetric g = make_perturbed_round(3, 0.3);
  double last = 0.0;
  for (double eps : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2}) {
    const double r = rho_at(g, kP, eps);
    EXPECT_GE(r + 1e-9, last);
    last = r;
  }
}

TEST(Rho, InfiniteSentinelAndMassDeficient) {
  const ConformalMetric g = make_round();
  EXPECT_TRUE(std::isinf(rho_at(g, kP, 2.1 * 4 * kPi)));
  try {
    rho_at(g, kP, 2.1 * 4 * kPi, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MassDeficient);
    EXPECT_NEAR(e.value(), 4 * kPi, 1e-3);
  }
}

TEST(Rho, DilatedConcentrates) {
  const ConformalMetric g = make_dilated_round(kP, 100.0);
  EXPECT_LT(rho_at(g, kP, 0.4), 0.05);
}

TEST(Rho, RepresentationIndependent) {
  const ConformalMetric g = make_perturbed_round(8, 0.3);
  const MobiusTransform sigma = MobiusTransform::rotation_to_origin(SpherePoint(1, 2, 2)) * dilation_at(kP, 1.7);
  const ConformalMetric direct = pullback(sigma, g);
  const ConformalMetric sampled = ConformalMetric::from_field(direct.field());
  for (const SpherePoint& x : {kP, SpherePoint(-1, 0.3, 0.1), kNorthPole})
    EXPECT_NEAR(rho_at(direct, x, 0.4), rho_at(sampled, x, 0.4), 2e-3);
}

TEST(RhoGlobal, Round) {
  const ConcentrationProfile p = rho_global(make_round(), 0.4);
  EXPECT_NEAR(p.rho_global, kRoundRho, 2e-3);
  EXPECT_EQ(p.samples.size(), 1000u + 24u);
}

TEST(RhoGlobal, DilatedArgmin) {
  const ConcentrationProfile p = rho_global(make_dilated_round(kP, 100.0), 0.4);
  EXPECT_LT(p.argmin.distance(kP), 0.05);
  EXPECT_LT(p.rho_global, 0.05);
}

TEST(RhoGlobal, CylinderCaps) {
  const ConcentrationProfile p = rho_global(make_cylinder_sphere(4), 0.4);
  EXPECT_LT(p.rho_global, kRoundRho);
  // The caps sit around the poles, the neck on the equator.
  EXPECT_GT(std::abs(p.argmin.x3()), 0.9);
}

TEST(Normalize, RoundIsFixed) {
  const NormalizationResult r = normalize(make_round(), 0.4);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 1);
  EXPECT_LE(r.u_prime_sup, 1e-6);
  EXPECT_NEAR(r.rho_after, kRoundRho, 2e-3);
}

TEST(Normalize, RecoversDilatedRound) {
  for (double s : {10.0, 100.0}) {
    const ConformalMetric g = make_dilated_round(kP, s);
    const NormalizationResult r = normalize(g, 0.4, 30);
    EXPECT_TRUE(r.converged) << s;
    EXPECT_LE(r.iterations, 30);
    EXPECT_LE(r.u_prime_sup, 0.05) << s;
    EXPECT_NEAR(r.rho_after, kRoundRho, 0.01 * kRoundRho) << s;

    // A second pass finds nothing left to do.
    const NormalizationResult again = normalize(pullback(r.sigma, g), 0.4, 30, false);
    double worst = 0.0;
    for (const SpherePoint& q : fibonacci_sphere(200)) worst = std::max(worst, std::abs(std::log(again.sigma.stretch(q))));
    EXPECT_LE(worst, 0.02) << s;
  }
}

TEST(Normalize, CylinderStaysFarFromRound) {
  const NormalizationResult r = normalize(make_cylinder_sphere(4), 0.4, 30, false);
  EXPECT_GT(r.u_prime_sup, 1.0);
}

TEST(Bubble, StandardBubbleOracles) {
  const StandardBubble b = standard_bubble(0.3, -0.2);
  EXPECT_EQ(b.value(0.3, -0.2), 0.0);
  EXPECT_EQ(b.density(0.3, -0.2), 1.0);
  EXPECT_NEAR(StandardBubble::disk_mass(100.0), 4 * kPi * 10000.0 / 10004.0, 1e-12);
  EXPECT_NEAR(StandardBubble::disk_mass(100.0), 12.5614, 1e-4);
  for (double R : {4.0, 100.0}) {
    const double q = polar_mass_gk([&](double x, double y) { return b.value(x + b.x0, y + b.y0); }, R);
    EXPECT_NEAR(q, StandardBubble::disk_mass(R), 1e-4 * StandardBubble::disk_mass(R)) << R;
  }
  EXPECT_LE(liouville_residual(standard_bubble().sample(257, 4.0)), 5e-4);
  EXPECT_LE(bubble_distance(standard_bubble().sample(129, 4.0), 1.0, 0.0, 0.0), 1e-12);
}

TEST(BlowUp, UnitScaleIsChartFactor) {
  const ConformalMetric g = make_perturbed_round(2, 0.3);
  const BlowUp bu = blow_up(g, kP, 1.0, 1.5, 65);
  const ChartFactor v = chart_factor(g, kP);
  for (int i = 0; i < 65; i += 8)
    for (int j = 0; j < 65; j += 8)
      if (bu.v_prime.in_mask(i, j)) {
        EXPECT_DOUBLE_EQ(bu.v_prime.at(i, j), v(bu.v_prime.x(j), bu.v_prime.y(i)));
      }
  EXPECT_THROW(blow_up(g, kP, 1.5, 1.0), Error);
  EXPECT_THROW(blow_up(g, kP, 0.5, 10.0), Error);
}

TEST(BlowUp, DilatedRoundGivesStandardBubble) {
  const double s = 100.0;
  const BlowUp bu = blow_up(make_dilated_round(kP, s), kP, 1.0 / (2.0 * s), 4.0, 129);
  EXPECT_LE(bubble_distance(bu.v_prime, 1.0, 0.0, 0.0), 1e-4);
}

TEST(BlowUp, MassIdentity) {
  for (const ConformalMetric& g : {make_dilated_round(kP, 100.0), make_perturbed_round(5, 0.3)}) {
    const BlowUp bu = blow_up(g, kP, 0.004, 4.0, 65);
    for (double a : {0.5, 1.0, 2.0}) EXPECT_LE(blow_up_mass_identity(bu, a).relative_error(), 1e-6) << a;
  }
}

TEST(Bubble, ExtractFromDilatedRound) {
  const BubbleReport r = bubble_extract(make_dilated_round(kP, 100.0), 0.4, 4.0);
  EXPECT_LT(r.center.distance(kP), 1e-3);
  EXPECT_LE(r.bubble_deviation, 0.05);
  EXPECT_LE(r.mass, 4 * kPi + 1e-6);
  EXPECT_LE(r.pde_residual, 5e-3);
}

TEST(Bubble, ExtractFromRound) {
  const BubbleReport r = bubble_extract(make_round(), 0.4, 4.0, 129);
  // Chart disk carrying 0.4: 2 pi (1 - cos r) = 0.4, t = tan(r/2).
  EXPECT_NEAR(r.t, std::tan(0.5 * std::acos(1 - 0.2 / kPi)), 1e-6);
  EXPECT_LE(r.bubble_deviation, 1e-3);
}

TEST(Bubble, MassDeficient) {
  const ConformalMetric tiny([](const SpherePoint&) { return -3.0; }, "tiny");
  try {
    bubble_extract(tiny, 0.4, 4.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MassDeficient);
  }
}

TEST(Diagnostics, DichotomyAtCoarseGrid) {
  DiagnosticsOptions opt;
  opt.n = 129;
  for (const DiagnosticsRow& r : sequence_diagnostics(Family::DilatedRound, {10.0, 100.0}, opt)) {
    EXPECT_LE(r.dev1, 0.01) << r.k;
    EXPECT_TRUE(r.converged) << r.k;
    EXPECT_LE(r.u_prime_sup, 0.05) << r.k;
  }
  double last = 0.0;
  for (const DiagnosticsRow& r : sequence_diagnostics(Family::CylinderSphere, {1, 2}, opt)) {
    EXPECT_GE(r.dev1, 2.5) << r.k;
    EXPECT_GT(r.diameter, last) << r.k;
    last = r.diameter;
  }
  EXPECT_EQ(family_from_string("cylinder"), Family::CylinderSphere);
  EXPECT_THROW(family_from_string("torus"), Error);
}
