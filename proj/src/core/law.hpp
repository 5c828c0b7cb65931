// Last-passage laws assembled from a diffusion, a boundary, and the matching
// survival function: atom at zero, density on (0, zeta), distribution
// function by two independent routes, and normalization diagnostics.
#pragma once

#include <functional>

#include "boundary.hpp"
#include "diffusion.hpp"
#include "survival.hpp"

namespace lpt {

enum class PhiEval { direct, tabulated };

struct LawOptions {
    PhiEval phi_eval = PhiEval::direct;
    int phi_nodes = 240;     // table size when tabulated
    double q_floor = 1e-60;  // density taken as exactly 0 once the kernel factor drops below this
};

struct LastPassageLaw {
    Diffusion d;
    Boundary boundary;
    SurvivalFunction surv;
    double x = 0.0;
    double atom0 = 0.0;
    LawOptions opts;
    std::function<double(double)> phi;  // direct or table-backed

    // Phi(t) q(t, x, f(t)); 0 beyond a finite zeta and below the kernel floor.
    double density(double t) const;
    // atom0 + integral of the density over (0, t].
    double cdf(double t) const;
    // Same quantity from the spatial side: integral of H(t, y) q(t, x, y)
    // over the survival side of f(t) against the speed measure.
    double cdf_by_projection(double t) const;
    // atom0 + total density mass; 1 up to quadrature error when the pieces
    // are mutually consistent.
    double normalization() const;

  private:
    double tail_mass(double lo, double hi) const;
};

LastPassageLaw make_lastpass_law(const Diffusion& d, const Boundary& b, const SurvivalFunction& s,
                                 double x, const LawOptions& opts = {});

}  // namespace lpt
