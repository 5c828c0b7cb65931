#include "law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "numkernel.hpp"

namespace lpt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Truncation point for spatial integrals: far enough out that the kernel
// factor against the speed measure is below 1e-16 of its peak.
double spatial_hi(const Diffusion& d, double t, double x, double f) {
    double base = std::max(x, f);
    double spread = 40.0 * std::sqrt(t) + 10.0;
    double drift = (std::abs(d.mu) + d.drift_c) * t;
    return base + drift + spread;
}

double spatial_lo(const Diffusion& d, double t, double x, double f) {
    if (std::isfinite(d.left_endpoint)) return d.left_endpoint;
    return std::min(x, f) - std::abs(d.mu) * t - 40.0 * std::sqrt(t) - 10.0;
}

}  // namespace

double LastPassageLaw::density(double t) const {
    if (!(t > 0.0)) fail_domain("last-passage density: require t > 0");
    if (t >= boundary.zeta) return 0.0;
    double f = boundary.f(t);
    double q = transition_q(d, t, x, f);
    if (q < opts.q_floor) return 0.0;
    double val = phi(t) * q;
    if (val < -1e-10) fail_numeric("last-passage density: negative value at t = " + std::to_string(t));
    return std::max(0.0, val);
}

double LastPassageLaw::cdf(double t) const {
    if (t < 0.0) return 0.0;
    if (t == 0.0) return atom0;
    double zeta = boundary.zeta;
    double hi = std::min(t, zeta);
    bool sing_lo = std::abs(x - boundary.f(0.0)) < 1e-9;
    bool sing_hi = std::isfinite(zeta) && t >= zeta;
    auto dens = [this](double s) { return density(s); };
    Tolerance tol{1e-10, 1e-9, 6000};
    double mass;
    if (std::isfinite(zeta) || hi <= 2.0) {
        mass = integrate_sqrt_endpoints(dens, 0.0, hi, tol, sing_lo, sing_hi).value;
    } else {
        mass = integrate_sqrt_endpoints(dens, 0.0, 2.0, tol, sing_lo, false).value +
               tail_mass(2.0, hi);
    }
    return atom0 + mass;
}

// Integral of the density over (lo, hi) in the variable v = 1/sqrt(s), which
// flattens the t^{-3/2}-type tails of the transient kernels.
double LastPassageLaw::tail_mass(double lo, double hi) const {
    auto g = [this](double v) {
        if (v <= 0.0) return 0.0;
        double s = 1.0 / (v * v);
        return 2.0 / (v * v * v) * density(s);
    };
    double vlo = std::isinf(hi) ? 0.0 : 1.0 / std::sqrt(hi);
    Tolerance tol{1e-10, 1e-9, 6000};
    return integrate_adaptive(g, vlo, 1.0 / std::sqrt(lo), tol).value;
}

double LastPassageLaw::cdf_by_projection(double t) const {
    if (!(t > 0.0) || !(t < boundary.zeta))
        fail_domain("cdf_by_projection: require 0 < t < zeta");
    double f = boundary.f(t);
    auto integrand = [&](double y) {
        double q = transition_q(d, t, x, y);
        if (q == 0.0) return 0.0;
        double h = surv.H(t, y);
        if (h == 0.0) return 0.0;
        return h * q * speed_density(d, y);
    };
    Tolerance tol{1e-9, 1e-8, 4000};
    double lo, hi;
    if (boundary.kind == BoundaryKind::lower) {
        lo = f;
        hi = spatial_hi(d, t, x, f);
    } else {
        lo = spatial_lo(d, t, x, f);
        hi = f;
    }
    return integrate_adaptive(integrand, lo, hi, tol).value;
}

double LastPassageLaw::normalization() const {
    double zeta = boundary.zeta;
    if (std::isfinite(zeta)) return cdf(zeta);
    bool sing_lo = std::abs(x - boundary.f(0.0)) < 1e-9;
    auto dens = [this](double s) { return density(s); };
    Tolerance tol{1e-10, 1e-9, 6000};
    double mass = integrate_sqrt_endpoints(dens, 0.0, 2.0, tol, sing_lo, false).value +
                  tail_mass(2.0, kInf);
    return atom0 + mass;
}

LastPassageLaw make_lastpass_law(const Diffusion& d, const Boundary& b, const SurvivalFunction& s,
                                 double x, const LawOptions& opts) {
    if (std::isfinite(d.left_endpoint) && x < d.left_endpoint)
        fail_domain("make_lastpass_law: start outside the state space");
    if (opts.phi_nodes < 16) fail_domain("make_lastpass_law: phi_nodes too small");
    LastPassageLaw law;
    law.d = d;
    law.boundary = b;
    law.surv = s;
    law.x = x;
    law.opts = opts;
    law.atom0 = s.H(0.0, x);

    if (opts.phi_eval == PhiEval::direct) {
        auto direct = s.phi;
        law.phi = [direct](double t) { return direct(t); };
        return law;
    }

    // Tabulated route: PCHIP of ln Phi, on ln t for infinite lifetimes and on
    // ln sqrt(zeta - t) when the boundary dies at finite zeta.  Outside the
    // tabulated window the direct evaluation is used.
    double zeta = b.zeta;
    std::vector<double> grid_x, grid_y;
    int n = opts.phi_nodes;
    if (std::isfinite(zeta)) {
        double v_lo = std::sqrt(zeta * 1e-7), v_hi = std::sqrt(zeta * (1.0 - 1e-4));
        std::vector<double> lnv = linspace(std::log(v_lo), std::log(v_hi), n);
        for (double lv : lnv) {
            double v = std::exp(lv);
            double t = zeta - v * v;
            double p = s.phi(t);
            if (!(p > 0.0) || !std::isfinite(p))
                fail_numeric("make_lastpass_law: boundary factor not positive at t = " +
                             std::to_string(t));
            grid_x.push_back(lv);
            grid_y.push_back(std::log(p));
        }
        PchipTable tab(grid_x, grid_y);
        double t_lo = zeta - std::exp(2.0 * grid_x.back());
        double t_hi = zeta - std::exp(2.0 * grid_x.front());
        auto direct = s.phi;
        law.phi = [tab, zeta, t_lo, t_hi, direct](double t) {
            if (t < t_lo || t > t_hi) return direct(t);
            return std::exp(tab(0.5 * std::log(zeta - t)));
        };
    } else {
        double t_lo = 1e-3;
        double t_hi = std::max(4.0 * t_lo, 1.0);
        for (int k = 0; k < 400; ++k) {
            double f = b.f(t_hi);
            if (transition_q(d, t_hi, x, f) < opts.q_floor) break;
            t_hi *= 1.3;
        }
        t_hi *= 1.1;
        std::vector<double> lnt = linspace(std::log(t_lo), std::log(t_hi), n);
        for (double lt : lnt) {
            double p = s.phi(std::exp(lt));
            if (!(p > 0.0) || !std::isfinite(p))
                fail_numeric("make_lastpass_law: boundary factor not positive at t = " +
                             std::to_string(std::exp(lt)));
            grid_x.push_back(lt);
            grid_y.push_back(std::log(p));
        }
        PchipTable tab(grid_x, grid_y);
        auto direct = s.phi;
        law.phi = [tab, t_lo, t_hi, direct](double t) {
            if (t < t_lo || t > t_hi) return direct(t);
            return std::exp(tab(std::log(t)));
        };
    }
    return law;
}

}  // namespace lpt
