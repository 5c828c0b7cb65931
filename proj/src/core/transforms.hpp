// Time-inversion duals of last-passage laws, and transform-side solutions of
// the normalization identity int Phi(t) q(t,x,f(t)) dt = 1: Mellin moments
// for drifting BM over a + b sqrt(.), Laplace-transformed boundary factors
// for Bessel-with-drift over sqrt(a t^2 + b t), and residual checks.
#pragma once

#include <functional>
#include <vector>

#include "law.hpp"

namespace lpt {

// First hitting law of the time-inverted boundary t f(1/t) by the
// time-inverted diffusion t X_{1/t}: the hitting density at t is the source
// last-passage density at 1/t carried through the change of variables.
struct HittingLaw {
    Diffusion dual;    // law of the time-inverted process
    double start = 0;  // its starting point
    Boundary fbar;     // t -> t f(1/t)
    std::function<double(double)> density;
    double total_mass = 0.0;  // integral of the density; equals 1 - atom0 of the source
};

// Requires a family closed under time inversion (bm_drift and the Bessel
// families; drift and start swap roles) and an inverted boundary that stays
// away from the dual start at t = 0+.
HittingLaw hitting_from_lastpass(const LastPassageLaw& law);

// Moment E_a[G^{lam-1}] of the last passage of BM with drift mu > 0 to
// a + b sqrt(.) started on the boundary, from the tabulated Mellin transform
// e^{-b^2/4} / (mu^{2 lam - 1} D_{-2 lam + 1}(b)), lam > 1/2. The companion
// _corrected variant shifts the cylinder index by one, which restores
// E[G^0] = 1; both are kept so verification reports can show the measured
// ratio against simulation instead of silently picking a side.
double mellin_moment_bm_sqrt(double mu, double a, double b, double lam);
double mellin_moment_bm_sqrt_corrected(double mu, double a, double b, double lam);

// Laplace transform (abscissa lam) of the time-warped boundary factor phi
// for a Bessel process with index nu > -1 and drift c in [0, sqrt(a))
// against the boundary sqrt(a t^2 + b t), b > 0:
//   e^{c^2 b / 4a} M_{-lam, nu/2}(c^2 b / 2a) / (e^{b/4} M_{-lam, nu/2}(b/2)).
// Defined on lam > -(nu+1)/2, the transform's convergence region (negative
// abscissas arise when recovering the exponentially tilted density, which
// integrates to one). Identically 0 at c = 0.
double phi_laplace_bessel(double nu, double c, double a, double b, double lam);

// phi(t) recovered by Gaver-Stehfest inversion of the transform above.
// Results are cached per (nu, c, a, b, t). If cancellation is non-null it
// receives the inversion's cancellation warning flag.
double phi_by_inversion(double nu, double c, double a, double b, double t,
                        bool* cancellation = nullptr);

// Last-passage density at t of the boundary sqrt(a t^2 + b t) for the
// Bessel process with index nu and drift c > 0 started from x >= 0:
//   phi(ln(1 + b/at)) (b/ct) (at^2 + bt)^{-1/2} e^{-x^2/2t}
//     I_nu(x sqrt(a t^2 + b t)/t) / I_nu(c x),
// with the x = 0 limit of the Bessel ratio taken in closed form.
double density_bessel_sqrtquad(double nu, double c, double a, double b, double x, double t);

// First-hitting density at t of sqrt(a + b t) by a Bessel process with index
// nu and drift x started from c: the time inversion of the law above,
//   phi(ln(1 + bt/a)) (b/c) (a + bt)^{-1/2} e^{-x^2 t/2}
//     I_nu(x sqrt(a + b t)) / I_nu(c x).
double hitting_sqrt_line(double nu, double x, double c, double a, double b, double t);

// max over the grid of |int_0^zeta Phi(t) q(t, x, f(t)) dt - 1|; each x must
// lie beyond f(0) on the certain-passage side (below a lower boundary, above
// an upper one), where the law has no atom and the identity is exact.
double fredholm_residual(const LastPassageLaw& law, const std::vector<double>& xs);

}  // namespace lpt
