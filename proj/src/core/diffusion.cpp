#include "core/diffusion.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "core/numkernel.hpp"
#include "core/specfun.hpp"

namespace lpt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void check_state(const Diffusion& d, double x, const char* who) {
    if (d.family != Family::bm_drift && !(x >= 0.0))
        fail_domain(std::string(who) + ": state must be >= 0, got " + fmt(x));
    if (!std::isfinite(x)) fail_domain(std::string(who) + ": non-finite state");
}

// (c w / 2)^nu / (Gamma(nu+1) I_nu(c w)): the drift correction factor of the
// Bessel-with-drift kernel, multiplied here by e^{c w} for stability; tends
// to 1 as w -> 0.
double drift_factor_scaled(double nu, double c, double w) {
    double z = c * w;
    if (z == 0.0) return 1.0;
    return std::exp(nu * std::log(z / 2.0) - std::lgamma(nu + 1.0)) / bessel_i_scaled(nu, z);
}

// Bessel kernel written with every large exponential folded together:
// q = (1/2t) (xy)^{-nu} e^{-(x-y)^2/2t} [e^{-xy/t} I_nu(xy/t)], and the
// z -> 0 limit (2t)^{-(nu+1)}/Gamma(nu+1) e^{-(x^2+y^2)/2t} when xy = 0.
double bessel_q(double nu, double t, double x, double y) {
    double z = x * y / t;
    if (z == 0.0) {
        double e = -(x * x + y * y) / (2 * t) - (nu + 1) * std::log(2 * t) - std::lgamma(nu + 1);
        return std::exp(e);
    }
    double loggain = -nu * std::log(x * y) - (x - y) * (x - y) / (2 * t);
    return 0.5 / t * std::exp(loggain) * bessel_i_scaled(nu, z);
}

double radial_ou_q(double nu, double gamma, double t, double x, double y) {
    // Written for gamma of either sign through g = -gamma; A = g/(2 sinh(gt))
    // and all exponents combined so the total exponential argument is <= 0.
    double g = -gamma;
    double a = g / (2.0 * std::sinh(g * t));
    double egt = std::exp(g * t);
    double z = 2.0 * a * x * y;
    if (z == 0.0) {
        double e = (nu + 1) * (std::log(a) - g * t) - a * egt * (x * x + y * y) -
                   std::lgamma(nu + 1);
        return std::exp(e);
    }
    double expo = -a * ((x * x + y * y) * egt - 2 * x * y) - g * t * (nu + 1) -
                  nu * std::log(x * y);
    return a * std::exp(expo) * bessel_i_scaled(nu, z);
}

}  // namespace

Diffusion make_diffusion(Family family, double p1, double p2) {
    Diffusion d;
    d.family = family;
    switch (family) {
        case Family::bm_drift:
            d.mu = p1;
            d.left_endpoint = -kInf;
            d.left_class = LeftClass::natural;
            d.transient = (p1 != 0.0);
            break;
        case Family::reflected_bm:
            d.left_endpoint = 0.0;
            d.left_class = LeftClass::reflecting;
            d.transient = false;
            break;
        case Family::bessel:
            if (!(p1 > -1.0)) fail_domain("make_diffusion: bessel requires nu > -1");
            d.nu = p1;
            d.left_endpoint = 0.0;
            d.left_class = p1 >= 0.0 ? LeftClass::entrance_not_exit : LeftClass::reflecting;
            d.transient = (p1 > 0.0);
            break;
        case Family::bessel_drift:
            if (!(p1 > 0.0)) fail_domain("make_diffusion: bessel_drift requires nu > 0");
            if (!(p2 >= 0.0)) fail_domain("make_diffusion: bessel_drift requires c >= 0");
            d.nu = p1;
            d.drift_c = p2;
            d.left_endpoint = 0.0;
            d.left_class = LeftClass::entrance_not_exit;
            d.transient = true;
            break;
        case Family::radial_ou:
            if (!(p1 > -1.0)) fail_domain("make_diffusion: radial_ou requires nu > -1");
            if (p2 == 0.0) fail_domain("make_diffusion: radial_ou requires gamma != 0");
            d.nu = p1;
            d.gamma = p2;
            d.left_endpoint = 0.0;
            d.left_class = p1 >= 0.0 ? LeftClass::entrance_not_exit : LeftClass::reflecting;
            d.transient = (p2 < 0.0);
            break;
    }
    return d;
}

double scale_derivative(const Diffusion& d, double x) {
    check_state(d, x, "scale_derivative");
    switch (d.family) {
        case Family::bm_drift:
            return std::exp(-2.0 * d.mu * x);
        case Family::reflected_bm:
            return 1.0;
        case Family::bessel:
            return std::pow(x, -2.0 * d.nu - 1.0);
        case Family::bessel_drift: {
            if (d.drift_c == 0.0) return std::pow(x, -2.0 * d.nu - 1.0);
            double z = d.drift_c * x;
            double lg = std::lgamma(d.nu + 1.0);
            double is = bessel_i_scaled(d.nu, z);
            return std::exp(-2.0 * lg + 2.0 * d.nu * std::log(d.drift_c / 2.0) - std::log(x) -
                            2.0 * std::log(is) - 2.0 * z);
        }
        case Family::radial_ou:
            return std::pow(x, -2.0 * d.nu - 1.0) * std::exp(d.gamma * x * x);
    }
    fail_domain("scale_derivative: unknown family");
}

double speed_density(const Diffusion& d, double x) {
    check_state(d, x, "speed_density");
    switch (d.family) {
        case Family::bm_drift:
            return 2.0 * std::exp(2.0 * d.mu * x);
        case Family::reflected_bm:
            return 2.0;
        case Family::bessel:
            return 2.0 * std::pow(x, 2.0 * d.nu + 1.0);
        case Family::bessel_drift: {
            if (d.drift_c == 0.0) return 2.0 * std::pow(x, 2.0 * d.nu + 1.0);
            double z = d.drift_c * x;
            double lg = std::lgamma(d.nu + 1.0);
            double is = bessel_i_scaled(d.nu, z);
            return 2.0 * std::exp(2.0 * lg - 2.0 * d.nu * std::log(d.drift_c / 2.0) + std::log(x) +
                                  2.0 * std::log(is) + 2.0 * z);
        }
        case Family::radial_ou:
            return 2.0 * std::pow(x, 2.0 * d.nu + 1.0) * std::exp(-d.gamma * x * x);
    }
    fail_domain("speed_density: unknown family");
}

double scale_s(const Diffusion& d, double x) {
    check_state(d, x, "scale_s");
    switch (d.family) {
        case Family::bm_drift:
            if (d.mu == 0.0) return x;
            return -std::exp(-2.0 * d.mu * x) / (2.0 * d.mu);
        case Family::reflected_bm:
            return x;
        case Family::bessel:
            if (d.nu == 0.0) return std::log(x);
            return -std::pow(x, -2.0 * d.nu) / (2.0 * d.nu);
        case Family::bessel_drift: {
            // s(+inf) = 0 normalization; s' decays like e^{-2cx} so the tail
            // integral converges (and reduces to the plain Bessel form at c=0).
            if (d.drift_c == 0.0) return -std::pow(x, -2.0 * d.nu) / (2.0 * d.nu);
            auto sp = [&d](double y) { return scale_derivative(d, y); };
            return -integrate_adaptive(sp, x, kInf, Tolerance{1e-14, 1e-11, 4000}).value;
        }
        case Family::radial_ou: {
            if (!(d.gamma < 0.0))
                fail_domain("scale_s: radial_ou scale function diverges for gamma >= 0");
            // s(x) = -x^{-2nu} S(-gamma x^2), S(b) = int_1^inf w^{-2nu-1} e^{-b w^2} dw.
            double beta = -d.gamma * x * x;
            double nu = d.nu;
            auto g = [beta, nu](double w) {
                return std::pow(w, -2.0 * nu - 1.0) * std::exp(-beta * (w * w - 1.0));
            };
            double s_val = integrate_adaptive(g, 1.0, kInf, Tolerance{1e-14, 1e-11, 4000}).value;
            return -std::pow(x, -2.0 * nu) * std::exp(-beta) * s_val;
        }
    }
    fail_domain("scale_s: unknown family");
}

double transition_q(const Diffusion& d, double t, double x, double y) {
    if (!(t > 0.0)) fail_domain("transition_q: require t > 0, got " + fmt(t));
    check_state(d, x, "transition_q");
    check_state(d, y, "transition_q");
    switch (d.family) {
        case Family::bm_drift: {
            double e = -d.mu * (x + y) - d.mu * d.mu * t / 2.0 - (x - y) * (x - y) / (2.0 * t);
            return 0.5 / std::sqrt(2.0 * M_PI * t) * std::exp(e);
        }
        case Family::reflected_bm: {
            double g1 = std::exp(-(x - y) * (x - y) / (2 * t));
            double g2 = std::exp(-(x + y) * (x + y) / (2 * t));
            return (g1 + g2) * 0.5 / std::sqrt(2.0 * M_PI * t);
        }
        case Family::bessel:
            return bessel_q(d.nu, t, x, y);
        case Family::bessel_drift: {
            double c = d.drift_c;
            if (c == 0.0) return bessel_q(d.nu, t, x, y);
            double base = bessel_q(d.nu, t, x, y);
            return base * drift_factor_scaled(d.nu, c, x) * drift_factor_scaled(d.nu, c, y) *
                   std::exp(-c * (x + y) - c * c * t / 2.0);
        }
        case Family::radial_ou:
            return radial_ou_q(d.nu, d.gamma, t, x, y);
    }
    fail_domain("transition_q: unknown family");
}

double resolvent_u(const Diffusion& d, double lam, double x, double y) {
    if (lam < 0.0) fail_domain("resolvent_u: require lambda >= 0");
    if (lam == 0.0 && !d.transient)
        fail_domain("resolvent_u: lambda = 0 diverges for a recurrent family");
    Tolerance tol{1e-13, 1e-10, 6000};
    // t = u^2 on [0,1] tames the small-time diagonal singularity.
    auto head = [&](double u) {
        return 2.0 * u * std::exp(-lam * u * u) * transition_q(d, u * u, x, y);
    };
    double front = integrate_adaptive(head, 0.0, 1.0, tol).value;
    // t = 1/v^2 on the tail: kernels with only polynomial large-time decay
    // (plain Bessel at lambda = 0 falls like t^{-nu-1}) become smooth in v.
    auto tail = [&](double v) {
        if (v <= 0.0) return 0.0;
        double t = 1.0 / (v * v);
        return 2.0 / (v * v * v) * std::exp(-lam * t) * transition_q(d, t, x, y);
    };
    double back = integrate_adaptive(tail, 0.0, 1.0, tol).value;
    return front + back;
}

double resolvent_u0(const Diffusion& d, double lam, double y) {
    if (lam < 0.0) fail_domain("resolvent_u0: require lambda >= 0");
    switch (d.family) {
        case Family::bessel: {
            if (y <= 0.0) fail_domain("resolvent_u0: require y > 0");
            if (lam == 0.0) {
                if (!d.transient) fail_domain("resolvent_u0: lambda = 0 diverges for a recurrent family");
                return std::pow(y, -2.0 * d.nu) / (2.0 * d.nu);
            }
            double r = std::sqrt(2.0 * lam);
            return std::pow(r / (2.0 * y), d.nu) * bessel_k(d.nu, r * y) / gamma_fn(d.nu + 1.0);
        }
        case Family::bm_drift: {
            double root = std::sqrt(2.0 * lam + d.mu * d.mu);
            if (root == 0.0)
                fail_domain("resolvent_u0: lambda = 0 diverges for a recurrent family");
            return std::exp(-d.mu * y - std::abs(y) * root) / (2.0 * root);
        }
        default:
            return resolvent_u(d, lam, 0.0, y);
    }
}

double resolvent_u0_dy(const Diffusion& d, double lam, double y) {
    switch (d.family) {
        case Family::bessel: {
            if (y <= 0.0) fail_domain("resolvent_u0_dy: require y > 0");
            if (lam == 0.0) {
                if (!d.transient)
                    fail_domain("resolvent_u0_dy: lambda = 0 diverges for a recurrent family");
                return -std::pow(y, -2.0 * d.nu - 1.0);
            }
            double r = std::sqrt(2.0 * lam);
            return -r * std::pow(r / 2.0, d.nu) * std::pow(y, -d.nu) *
                   bessel_k(d.nu + 1.0, r * y) / gamma_fn(d.nu + 1.0);
        }
        case Family::bm_drift: {
            if (y == 0.0) fail_domain("resolvent_u0_dy: kink at y = 0");
            double root = std::sqrt(2.0 * lam + d.mu * d.mu);
            double sign = y > 0.0 ? 1.0 : -1.0;
            return -(d.mu + sign * root) * resolvent_u0(d, lam, y);
        }
        default:
            return differentiate_central([&](double z) { return resolvent_u0(d, lam, z); }, y);
    }
}

double drift_b(const Diffusion& d, double x) {
    check_state(d, x, "drift_b");
    switch (d.family) {
        case Family::bm_drift:
            return d.mu;
        case Family::reflected_bm:
            return 0.0;
        case Family::bessel:
            if (x <= 0.0) fail_domain("drift_b: singular at the origin");
            return (2.0 * d.nu + 1.0) / (2.0 * x);
        case Family::bessel_drift: {
            if (x <= 0.0) fail_domain("drift_b: singular at the origin");
            double z = d.drift_c * x;
            double ratio = z == 0.0 ? 0.0 : bessel_i_scaled(d.nu + 1.0, z) / bessel_i_scaled(d.nu, z);
            return (2.0 * d.nu + 1.0) / (2.0 * x) + d.drift_c * ratio;
        }
        case Family::radial_ou:
            if (x <= 0.0) fail_domain("drift_b: singular at the origin");
            return (2.0 * d.nu + 1.0) / (2.0 * x) - d.gamma * x;
    }
    fail_domain("drift_b: unknown family");
}

BianeTransform biane_transform(const Diffusion& d) {
    // m([l, x]) in closed form where available, by quadrature otherwise.
    std::function<double(double)> mass;
    switch (d.family) {
        case Family::bessel: {
            double nu = d.nu;
            mass = [nu](double x) { return std::pow(x, 2.0 * nu + 2.0) / (nu + 1.0); };
            break;
        }
        case Family::reflected_bm:
            mass = [](double x) { return 2.0 * x; };
            break;
        case Family::bm_drift: {
            if (!(d.mu > 0.0))
                fail_domain("biane_transform: speed measure not integrable at -infinity");
            double mu = d.mu;
            mass = [mu](double x) { return std::exp(2.0 * mu * x) / mu; };
            break;
        }
        case Family::bessel_drift:
        case Family::radial_ou: {
            Diffusion dd = d;
            mass = [dd](double x) {
                auto rho = [&dd](double y) { return speed_density(dd, y); };
                return integrate_adaptive(rho, 0.0, x, Tolerance{1e-14, 1e-11, 4000}).value;
            };
            break;
        }
    }
    Diffusion dd = d;
    BianeTransform out;
    out.speed_density = [dd, mass](double x) {
        double m = mass(x);
        return m * m * scale_derivative(dd, x);
    };
    // Total speed mass is infinite for every family in the catalog, so the
    // transform is normalized with s_bar(+inf) = 0.
    out.scale_function = [mass](double x) { return -1.0 / mass(x); };
    return out;
}

DiffusionWithStart dual_under_inversion(const Diffusion& d, double x0) {
    DiffusionWithStart out;
    if (d.family == Family::bm_drift && d.mu == 0.0) {
        if (x0 != 0.0) fail_domain("dual_under_inversion: driftless BM must start at 0");
        out.d = d;
        out.start = 0.0;
        return out;
    }
    if (d.family == Family::bessel_drift) {
        out.d = make_diffusion(Family::bessel_drift, d.nu, x0);
        out.start = d.drift_c;
        return out;
    }
    if (d.family == Family::bessel && d.nu > 0.0) {
        out.d = make_diffusion(Family::bessel_drift, d.nu, x0);
        out.start = 0.0;
        return out;
    }
    fail_domain("dual_under_inversion: family has no time-inversion dual");
}

}  // namespace lpt
