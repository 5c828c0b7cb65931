// Survival functions H(t, y) = P_y(no passage to the shifted boundary) and
// their boundary derivatives Phi(t) for the case catalog.  Phi is normalized
// so that the last-passage density is Phi(t) q(t, x, f(t)) for both kinds.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "diffusion.hpp"

namespace lpt {

enum class Provenance { closed_form, numeric_derivative };

struct SurvivalFunction {
    std::string case_id;
    std::function<double(double, double)> H;  // (t, y) -> [0, 1]
    std::function<double(double)> phi;        // t -> nonnegative factor
    Provenance provenance = Provenance::closed_form;
};

// Constant level a for a transient family normalized with s(+inf) = 0.
SurvivalFunction survival_const_level(const Diffusion& d, double a);

// Bessel(nu) above the decreasing line a - bt.
SurvivalFunction survival_bessel_linedown(double nu, double a, double b);

// Brownian motion reflected at 0 above the decreasing line a - bt.
SurvivalFunction survival_rbm_linedown(double a, double b);

// Bessel(nu) above a sqrt(1 + 2 gamma t), gamma < 0.
SurvivalFunction survival_bessel_sqrtou(double nu, double a, double gamma);

// Bessel(nu), nu > 0, below the increasing line a + bt.  series_depth
// multiplies the zero-count truncation of the spectral series.
SurvivalFunction survival_bessel_lineup(double nu, double a, double b, double series_depth = 1.0);

// Brownian motion below the parabola a + bt^2.
SurvivalFunction survival_bm_parabola(double a, double b);

// H = 1 - sum_i w_i e^{-lambda_i t} u_{lambda_i}(0, y) above its level-1
// curve (pair with implicit_from_resolvent).
SurvivalFunction survival_resolvent(const Diffusion& d, const AtomicMeasure& F);

// H = 1 - q(zeta - t, y, 0)/c above its level curve (pair with
// implicit_from_density_level).
SurvivalFunction survival_density_level(const Diffusion& d, double zeta, double c);

// H = 1 - int_0^inf h(t+u) q(u, y, 0) du above its level-1 curve (pair with
// implicit_from_kernel).
SurvivalFunction survival_kernel(const Diffusion& d, std::function<double(double)> h);

// Boundary-derivative factor from two H evaluations just inside the
// survival region, using the backward equation to supply the second-order
// term.  Fails when shrinking the step moves the answer by more than 1e-4
// relatively.  Exposed as the generic fallback route.
double phi_from_H(const std::function<double(double, double)>& H, const Diffusion& d,
                  const Boundary& b, double t, double step_scale = 1.0);

// First-passage density of standard Brownian motion from x0 to a smooth
// curve S with S(0) > x0 (or +inf with tangent_split = false), solved from
// a Volterra equation in sqrt-time on [0, horizon].  With tangent_split the
// density is decomposed against the exact tangent-line density at u = 0,
// which keeps the near-diagonal spike out of the discretization.
struct FirstPassageGrid {
    std::vector<double> t;
    std::vector<double> g;
    double total_mass = 0.0;
};
FirstPassageGrid bm_first_passage_curve(const std::function<double(double)>& S,
                                        const std::function<double(double)>& Sprime, double x0,
                                        double horizon, bool tangent_split, int nodes = 0);

// Eigenfunction-series routes for the parabola case: the first-passage
// density from y < a at time u, and H built from it.  Reliable only away
// from the boundary; the production H above solves the Volterra equation.
double bm_parabola_hit_density_series(double a, double b, double y, double u, int zeros);
double bm_parabola_H_series(double a, double b, double t, double y, int zeros);

}  // namespace lpt
