// Catalog of one-dimensional diffusion families: scale functions, speed
// densities, transition kernels (densities with respect to the speed
// measure), resolvents, and the structural transforms built on them.
#pragma once

#include <functional>
#include <vector>

namespace lpt {

// Finite measure with finitely many atoms: sum_i weights[i] * delta at
// points[i].  Weights must be positive.
struct AtomicMeasure {
    std::vector<double> points;
    std::vector<double> weights;
};

enum class Family { bm_drift, reflected_bm, bessel, bessel_drift, radial_ou };

enum class LeftClass { natural, entrance_not_exit, reflecting };

// Immutable description of one diffusion.  Parameter meaning by family:
//   bm_drift      mu
//   reflected_bm  (none)
//   bessel        nu (> -1)
//   bessel_drift  nu (> 0), drift_c (>= 0)
//   radial_ou     nu (> -1), gamma (!= 0; scale function requires gamma < 0)
struct Diffusion {
    Family family = Family::bessel;
    double nu = 0.0;
    double mu = 0.0;
    double drift_c = 0.0;
    double gamma = 0.0;
    double left_endpoint = 0.0;
    LeftClass left_class = LeftClass::entrance_not_exit;
    bool transient = false;
};

Diffusion make_diffusion(Family family, double p1 = 0.0, double p2 = 0.0);

// s'(x): derivative of the scale function in the catalog normalization.
double scale_derivative(const Diffusion& d, double x);

// rho(x): density of the speed measure m(dx) = rho(x) dx.
double speed_density(const Diffusion& d, double x);

// Scale function.  Transient families toward +infinity are normalized with
// s(+inf) = 0; recurrent ones use the natural primitive of s'.
double scale_s(const Diffusion& d, double x);

// Transition density with respect to the speed measure: symmetric in (x, y),
// with the x -> 0 limits built in for the families on (0, inf).
double transition_q(const Diffusion& d, double t, double x, double y);

// u_lambda(x, y) = int_0^inf e^{-lambda t} q(t,x,y) dt.  lambda = 0 is only
// allowed for transient families.
double resolvent_u(const Diffusion& d, double lam, double x, double y);

// u_lambda(0, y) for the start pinned at the origin: closed forms for the
// Bessel and Brownian families, quadrature fallback otherwise.
double resolvent_u0(const Diffusion& d, double lam, double y);

// d/dy u_lambda(0, y): closed forms for Bessel and Brownian with drift,
// central differences otherwise.
double resolvent_u0_dy(const Diffusion& d, double lam, double y);

// Drift coefficient of the SDE form dX = dB + b(X) dt implied by the scale
// derivative, b(x) = -(1/2) (ln s')'(x).
double drift_b(const Diffusion& d, double x);

// Speed density and scale function of the transformed diffusion whose
// hitting kernel at the left endpoint matches the original's transition
// density: rho_bar(x) = m([l,x])^2 s'(x), s_bar(x) = 1/m_total - 1/m([l,x]).
struct BianeTransform {
    std::function<double(double)> speed_density;
    std::function<double(double)> scale_function;
};
BianeTransform biane_transform(const Diffusion& d);

// Image of (diffusion started at x0) under time inversion t -> 1/t.
struct DiffusionWithStart {
    Diffusion d;
    double start = 0.0;
};
DiffusionWithStart dual_under_inversion(const Diffusion& d, double x0);

}  // namespace lpt
