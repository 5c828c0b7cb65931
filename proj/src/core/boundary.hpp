// Curved boundaries for passage-time problems: explicit catalog shapes,
// time shifts, time inversion, and implicit boundaries solved from the
// diffusion's resolvent or transition kernel.
#pragma once

#include <functional>
#include <string>

#include "diffusion.hpp"

namespace lpt {

// lower: the process eventually stays above f. upper: eventually below.
enum class BoundaryKind { lower, upper };

// Shape tags for make_explicit; the (a, b) slots hold shape parameters:
//   constant   f = a
//   line_down  f = a - b t             a, b > 0
//   line_up    f = a + b t             a, b > 0
//   sqrt_ou    f = a sqrt(1 + 2 b t)   a > 0, b < 0 (b in the gamma slot)
//   parabola   f = a + b t^2           a, b > 0
//   sqrt_line  f = a + b sqrt(t)
//   sqrt_quad  f = sqrt(a t^2 + b t)   a, b > 0
enum class BoundaryShape { constant, line_down, line_up, sqrt_ou, parabola, sqrt_line, sqrt_quad };

struct Boundary {
    std::function<double(double)> f;
    std::function<double(double)> fprime;
    double zeta = 0.0;  // first time f reaches the state space's left end
    BoundaryKind kind = BoundaryKind::lower;
    std::string description;
};

Boundary make_explicit(BoundaryShape shape, double a, double b = 0.0);

// u -> f(t + u), lifetime zeta - t, same kind.  Requires t < zeta.
Boundary shift(const Boundary& b, double t);

// fbar(t) = t f(1/t); requires a boundary living on all of (0, inf).
Boundary invert_time(const Boundary& b);

// f solving sum_i w_i e^{-lambda_i t} u_{lambda_i}(0, f(t)) = 1.  With
// cached = true, values are root-solved on a geometric time grid and
// interpolated monotonically between nodes; cached = false solves on every
// call (the reference route for residual checks).
Boundary implicit_from_resolvent(const Diffusion& d, const AtomicMeasure& F, bool cached = true);

// f solving q(zeta - t, f(t), 0) = c on [0, zeta).  Requires the level c to
// sit strictly below q(zeta, 0, 0), the infimum of t -> q(zeta - t, 0, 0).
Boundary implicit_from_density_level(const Diffusion& d, double zeta, double c);

// f solving int_0^inf h(t + u) q(u, f(t), 0) du = 1 for a bounded kernel h
// on a transient family whose left endpoint 0 is entrance-not-exit.
Boundary implicit_from_kernel(const Diffusion& d, std::function<double(double)> h,
                              bool cached = true);

}  // namespace lpt
