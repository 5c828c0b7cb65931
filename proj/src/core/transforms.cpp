#include "transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "numkernel.hpp"
#include "specfun.hpp"

namespace lpt {
namespace {

// Parabolic cylinder D_p(z) for any real index: negative indices evaluate
// directly, the rest climb D_{p}(z) = z D_{p-1}(z) - (p-1) D_{p-2}(z) down
// into the directly computable range.
double pcf_index(double p, double z) {
    if (p < 0.0) return pcf_d(-p, z);
    if (p == 0.0) return std::exp(-0.25 * z * z);
    return z * pcf_index(p - 1.0, z) - (p - 1.0) * pcf_index(p - 2.0, z);
}

void check_moment_args(const char* who, double mu, double lam) {
    if (!(mu > 0.0)) fail_domain(std::string(who) + ": require mu > 0");
    if (!(lam > 0.5)) fail_domain(std::string(who) + ": moment integral diverges unless lam > 1/2");
}

void check_sqrtquad_args(const char* who, double nu, double c, double a, double b) {
    if (!(nu > -1.0)) fail_domain(std::string(who) + ": require nu > -1");
    if (!(c >= 0.0)) fail_domain(std::string(who) + ": require c >= 0");
    if (!(b > 0.0)) fail_domain(std::string(who) + ": require b > 0");
    if (!(a > c * c)) fail_domain(std::string(who) + ": require sqrt(a) > c");
}

}  // namespace

HittingLaw hitting_from_lastpass(const LastPassageLaw& law) {
    DiffusionWithStart ds = dual_under_inversion(law.d, law.x);
    Boundary fbar = invert_time(law.boundary);
    double lim0 = fbar.f(1e-8);
    if (std::isfinite(lim0) && std::abs(ds.start - lim0) <= 1e-6 * (1.0 + std::abs(lim0)))
        fail_domain("hitting_from_lastpass: dual start meets the inverted boundary at t = 0+");

    HittingLaw out;
    out.dual = ds.d;
    out.start = ds.start;
    out.fbar = fbar;
    LastPassageLaw src = law;
    out.density = [src](double t) {
        if (!(t > 0.0)) fail_domain("hitting law density: require t > 0");
        return src.density(1.0 / t) / (t * t);
    };

    // Mass of the density.  The source's far tail piles up against the left
    // end of the image support (t = 1/zeta, or 0) with an inverse-sqrt edge,
    // so that panel gets the endpoint rule; the rest goes back to the source
    // variable u = 1/t, flattened near u = 0 by u = v^2.
    double lo = std::isfinite(src.boundary.zeta) ? 1.0 / src.boundary.zeta : 0.0;
    Tolerance tol{1e-9, 1e-8, 4000};
    double head = integrate_sqrt_endpoints(out.density, lo, lo + 2.0, tol, true, false).value;
    double vhi = 1.0 / std::sqrt(lo + 2.0);
    double tail =
        integrate_adaptive([&src](double v) { return v <= 0.0 ? 0.0 : 2.0 * v * src.density(v * v); },
                           0.0, vhi, tol)
            .value;
    out.total_mass = head + tail;
    return out;
}

double mellin_moment_bm_sqrt(double mu, double a, double b, double lam) {
    check_moment_args("mellin_moment_bm_sqrt", mu, lam);
    (void)a;  // started on the boundary, the moment does not involve a
    return std::exp(-0.25 * b * b) /
           (std::pow(mu, 2.0 * lam - 1.0) * pcf_index(1.0 - 2.0 * lam, b));
}

double mellin_moment_bm_sqrt_corrected(double mu, double a, double b, double lam) {
    check_moment_args("mellin_moment_bm_sqrt_corrected", mu, lam);
    (void)a;
    return std::exp(-0.25 * b * b) /
           (std::pow(mu, 2.0 * lam - 2.0) * pcf_index(2.0 - 2.0 * lam, b));
}

double phi_laplace_bessel(double nu, double c, double a, double b, double lam) {
    check_sqrtquad_args("phi_laplace_bessel", nu, c, a, b);
    if (!(lam > -0.5 * (nu + 1.0)))
        fail_domain("phi_laplace_bessel: abscissa outside the convergence region lam > -(nu+1)/2");
    if (c == 0.0) return 0.0;
    double z1 = c * c * b / (2.0 * a), z2 = 0.5 * b;
    return std::exp(0.5 * z1) * whittaker_m(-lam, 0.5 * nu, z1) /
           (std::exp(0.5 * z2) * whittaker_m(-lam, 0.5 * nu, z2));
}

double phi_by_inversion(double nu, double c, double a, double b, double t, bool* cancellation) {
    check_sqrtquad_args("phi_by_inversion", nu, c, a, b);
    if (!(t > 0.0)) fail_domain("phi_by_inversion: require t > 0");
    if (cancellation) *cancellation = false;
    // Below t ~ 4e-5 b the inversion abscissas push the Whittaker values past
    // double range.  The factor is dead there anyway (it decays like
    // exp(-const/t) at 0, being an exponentially tilted first-passage
    // density), so report exactly 0.
    if (t < 4e-5 * b) return 0.0;

    static std::map<std::array<double, 5>, LaplaceResult> cache;
    static std::mutex cache_mu;
    std::array<double, 5> key{nu, c, a, b, t};
    {
        std::lock_guard<std::mutex> lock(cache_mu);
        auto it = cache.find(key);
        if (it != cache.end()) {
            if (cancellation) *cancellation = it->second.cancellation_warning;
            return it->second.value;
        }
    }
    LaplaceResult r = laplace_invert(
        [=](double lam) { return phi_laplace_bessel(nu, c, a, b, lam); }, t);
    {
        std::lock_guard<std::mutex> lock(cache_mu);
        cache.emplace(key, r);
    }
    if (cancellation) *cancellation = r.cancellation_warning;
    return r.value;
}

double density_bessel_sqrtquad(double nu, double c, double a, double b, double x, double t) {
    check_sqrtquad_args("density_bessel_sqrtquad", nu, c, a, b);
    if (!(c > 0.0)) fail_domain("density_bessel_sqrtquad: the factorization needs c > 0");
    if (!(x >= 0.0)) fail_domain("density_bessel_sqrtquad: require x >= 0");
    if (!(t > 0.0)) fail_domain("density_bessel_sqrtquad: require t > 0");
    double u = std::log1p(b / (a * t));
    double phi = std::max(phi_by_inversion(nu, c, a, b, u), 0.0);  // clip inversion wiggle
    if (phi == 0.0) return 0.0;
    double w = std::sqrt(a * t * t + b * t);
    double base = phi * b / (c * t * w);
    if (x == 0.0) return base * std::pow(w / (c * t), nu);
    // Scaled Bessel ratio keeps the small-t evaluations inside double range:
    // the raw I_nu overflows long before the Gaussian factor wins.
    double zn = x * w / t;
    double e = -0.5 * x * x / t + zn - c * x;
    return base * std::exp(e) * bessel_i_scaled(nu, zn) / bessel_i_scaled(nu, c * x);
}

double hitting_sqrt_line(double nu, double x, double c, double a, double b, double t) {
    check_sqrtquad_args("hitting_sqrt_line", nu, c, a, b);
    if (!(c > 0.0)) fail_domain("hitting_sqrt_line: the factorization needs c > 0");
    if (!(x >= 0.0)) fail_domain("hitting_sqrt_line: require drift x >= 0");
    if (!(t > 0.0)) fail_domain("hitting_sqrt_line: require t > 0");
    double u = std::log1p(b * t / a);
    double phi = std::max(phi_by_inversion(nu, c, a, b, u), 0.0);
    if (phi == 0.0) return 0.0;
    double w = std::sqrt(a + b * t);
    double base = phi * b / (c * w);
    if (x == 0.0) return base * std::pow(w / c, nu);
    double zn = x * w;
    double e = -0.5 * x * x * t + zn - c * x;
    return base * std::exp(e) * bessel_i_scaled(nu, zn) / bessel_i_scaled(nu, c * x);
}

double fredholm_residual(const LastPassageLaw& law, const std::vector<double>& xs) {
    if (xs.empty()) fail_domain("fredholm_residual: need at least one start");
    double f0 = law.boundary.f(0.0);
    bool lower = law.boundary.kind == BoundaryKind::lower;
    double worst = 0.0;
    Tolerance tol{1e-9, 1e-8, 4000};
    for (double x : xs) {
        if (lower ? !(x < f0) : !(x > f0))
            fail_domain("fredholm_residual: starts must sit beyond f(0) on the certain-passage side");
        auto g = [&](double t) {
            if (t <= 0.0) return 0.0;
            double q = transition_q(law.d, t, x, law.boundary.f(t));
            return q <= 0.0 ? 0.0 : law.phi(t) * q;
        };
        double mass;
        if (std::isfinite(law.boundary.zeta)) {
            mass = integrate_sqrt_endpoints(g, 0.0, law.boundary.zeta, tol, false, true).value;
        } else {
            // Head directly, tail through t = 1/v^2 to tame the slow decay.
            double head = integrate_adaptive(g, 0.0, 2.0, tol).value;
            double tail = integrate_adaptive(
                              [&](double v) { return v <= 0.0 ? 0.0 : 2.0 / (v * v * v) * g(1.0 / (v * v)); },
                              0.0, 1.0 / std::sqrt(2.0), tol)
                              .value;
            mass = head + tail;
        }
        worst = std::max(worst, std::abs(mass - 1.0));
    }
    return worst;
}

}  // namespace lpt
