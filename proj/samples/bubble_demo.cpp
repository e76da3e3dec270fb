// Concentrate the round metric at a point, find where the mass piles up,
// undo the concentration, and compare the blow-up with the standard bubble.

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "conflab/conflab.hpp"

using namespace conflab;

int main(int argc, char** argv) {
  const double s = argc > 1 ? std::atof(argv[1]) : 50.0;
  const double eps1 = 0.4;
  const SpherePoint p(0.3, -0.5, 0.8);
  const ConformalMetric g = make_dilated_round(p, s, {129, 2.0});

  const FunctionalReport f = functionals(g, 2.0);
  std::printf("dilated_round s=%g: area %.6f entropy %.4f dev1 %.2e\n", s, f.area, f.entropy, f.dev1);

  const ConcentrationProfile prof = rho_global(g, eps1);
  std::printf("rho = %.5f at (%.4f, %.4f, %.4f), distance to p %.2e\n", prof.rho_global, prof.argmin.x1(),
              prof.argmin.x2(), prof.argmin.x3(), prof.argmin.distance(p));

  const NormalizationResult n = normalize(g, eps1);
  std::printf("normalize: %d iterations, converged %s, sup|u'| %.2e, rho after %.5f\n", n.iterations,
              n.converged ? "yes" : "no", n.u_prime_sup, n.rho_after);

  // D_1 carries eps1 after blow-up, so the limit is the standard bubble at scale mu.
  const BubbleReport b = bubble_extract(g, eps1, 4.0, 129, &prof);
  const double mu = 2.0 * std::sqrt(eps1 / (4.0 * kPi - eps1));
  std::printf("bubble: t %.3e, mass on D_4 %.6f (expected %.6f), deviation %.2e, residual %.2e\n", b.t, b.mass,
              StandardBubble::disk_mass(4.0 * mu), b.bubble_deviation, b.pde_residual);
  return 0;
}
