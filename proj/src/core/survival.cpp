#include "survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <vector>

#include "numkernel.hpp"
#include "specfun.hpp"

namespace lpt {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double phi_bar(double z) { return 0.5 * erfc_fn(z / std::sqrt(2.0)); }

// e^{-d^2/(2h)} / sqrt(2 pi h)
double gauss_kernel(double h, double d) {
    if (h <= 0.0) return 0.0;
    return std::exp(-d * d / (2.0 * h)) / std::sqrt(2.0 * kPi * h);
}

// First passage of standard BM from 0 to the line d0 + beta u, d0 > 0.
double line_fpt_density(double d0, double beta, double u) {
    if (u <= 0.0) return 0.0;
    return d0 / u * gauss_kernel(u, d0 + beta * u);
}

double line_fpt_cdf(double d0, double beta, double u) {
    if (u <= 0.0) return 0.0;
    double su = std::sqrt(u);
    double first = phi_bar((d0 + beta * u) / su);
    double e = -2.0 * beta * d0;
    double z = (d0 - beta * u) / su;
    double second;
    if (e < 500.0) {
        second = std::exp(e) * phi_bar(z);
    } else {
        double lp = z > 8.0 ? -0.5 * z * z - std::log(z * std::sqrt(2.0 * kPi))
                            : std::log(phi_bar(z));
        second = std::exp(e + lp);
    }
    return first + second;
}

// Location of the spike of 2 v g_L(v^2) in the sqrt-time variable.
double line_spike_v(double d0, double beta) {
    double x = beta * beta * d0 * d0;
    double v2 = x < 1e-8 ? d0 * d0 / 2.0 * (1.0 - x / 4.0)
                         : (std::sqrt(1.0 + x) - 1.0) / (beta * beta);
    return std::sqrt(v2);
}

}  // namespace

FirstPassageGrid bm_first_passage_curve(const std::function<double(double)>& S,
                                        const std::function<double(double)>& Sprime, double x0,
                                        double horizon, bool tangent_split, int nodes) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        fail_domain("bm_first_passage_curve: require a positive finite horizon");
    double d0 = 0.0, beta = 0.0;
    if (tangent_split) {
        d0 = S(0.0) - x0;
        beta = Sprime(0.0);
        if (!(d0 > 0.0) || !std::isfinite(d0) || !std::isfinite(beta))
            fail_domain("bm_first_passage_curve: tangent split needs S(0) finite and above x0");
    }
    double W = std::sqrt(horizon);
    int N = nodes;
    if (N <= 0) {
        N = 600;
        if (tangent_split) {
            // The split soaks up the near-tangent spike, so the grid only has
            // to track the curvature scale; the spike width merely nudges it.
            double vstar = line_spike_v(d0, beta);
            N = std::max(500, std::min(1200, (int)std::ceil(8.0 * W / std::max(vstar, W / 120.0))));
        }
    }
    N += N & 1;
    double hw = W / N;

    std::vector<double> w(N + 1), u(N + 1), Sv(N + 1, 0.0), Spv(N + 1, 0.0);
    for (int i = 0; i <= N; ++i) {
        w[i] = hw * i;
        u[i] = w[i] * w[i];
    }
    for (int i = 1; i <= N; ++i) {
        Sv[i] = S(u[i]);
        Spv[i] = Sprime(u[i]);
    }

    auto kern = [&](double t, double st, double spt, double tau, double stau) {
        double h = t - tau;
        if (h <= 0.0) return 0.0;
        double diff = st - stau;
        double slope = diff / h;
        // The difference quotient loses O(eps |S| / h) digits at the diagonal;
        // close to it, Simpson on S' gives the chord slope without the
        // cancellation and is exact for boundaries up to cubic.
        if (h <= 0.02) {
            slope = (Sprime(tau) + 4.0 * Sprime(tau + 0.5 * h) + spt) / 6.0;
            diff = slope * h;
        }
        return (spt - slope) * gauss_kernel(h, diff);
    };

    // Free term; with the split it carries int K g_L against the closed
    // tangent-line density, so the discretized unknown stays spike-free.
    std::vector<double> free_t(N + 1, 0.0);
    Tolerance qtol{1e-12, 1e-9, 2500};
    double vstar = tangent_split ? line_spike_v(d0, beta) : 0.0;
    for (int i = 1; i <= N; ++i) {
        double t = u[i];
        double gap = Sv[i] - x0;
        double F = (gap / t - Spv[i]) * gauss_kernel(t, gap);
        if (!tangent_split) {
            free_t[i] = F;
            continue;
        }
        auto integrand = [&](double v) {
            double tau = v * v;
            double gl = line_fpt_density(d0, beta, tau);
            if (gl == 0.0) return 0.0;
            return kern(t, Sv[i], Spv[i], tau, S(tau)) * gl * 2.0 * v;
        };
        // The kernel behaves like sqrt(t - tau) at the diagonal, so the last
        // stretch gets the square-root endpoint rule.
        std::vector<double> br{0.0};
        for (double m : {0.5 * vstar, vstar, 2.0 * vstar})
            if (m < 0.9 * w[i]) br.push_back(m);
        // The tangent density tail stretches over many decades when the
        // start sits just under the boundary; ladder up geometrically so no
        // single panel has to straddle them.
        for (double m = 4.0 * vstar; m < 0.9 * w[i]; m *= 4.0) br.push_back(m);
        br.push_back(w[i]);
        double Q = 0.0;
        for (size_t p = 0; p + 1 < br.size(); ++p) {
            bool last = p + 2 == br.size();
            Q += last ? integrate_sqrt_endpoints(integrand, br[p], br[p + 1], qtol, false, true).value
                      : integrate_adaptive(integrand, br[p], br[p + 1], qtol).value;
        }
        free_t[i] = F - line_fpt_density(d0, beta, t) + Q;
    }

    // Forward march in v = sqrt(tau); the kernel vanishes like sqrt(t - tau)
    // at the diagonal, so the last cell gets the matching 2/3 end weight.
    auto march = [&](int stride, std::vector<double>& out) {
        out.assign(N + 1, 0.0);
        double step = hw * stride;
        for (int i = stride; i <= N; i += stride) {
            NeumaierSum acc;
            for (int j = stride; j <= i - 2 * stride; j += stride)
                acc.add(kern(u[i], Sv[i], Spv[i], u[j], Sv[j]) * out[j] * 2.0 * w[j]);
            double last = 0.0;
            int j = i - stride;
            if (j >= stride)
                last = kern(u[i], Sv[i], Spv[i], u[j], Sv[j]) * out[j] * 2.0 * w[j];
            out[i] = free_t[i] + step * (acc.value() + 7.0 / 6.0 * last);
        }
    };
    std::vector<double> fine, coarse;
    march(1, fine);
    march(2, coarse);

    auto trapz_mass = [&](const std::vector<double>& v, int stride) {
        NeumaierSum acc;
        for (int i = 0; i <= N; i += stride) {
            double wgt = (i == 0 || i == N) ? 0.5 : 1.0;
            acc.add(wgt * v[i] * 2.0 * w[i]);
        }
        return acc.value() * hw * stride;
    };
    double mf = trapz_mass(fine, 1), mc = trapz_mass(coarse, 2);
    double mass = (4.0 * mf - mc) / 3.0;

    FirstPassageGrid grid;
    grid.t = u;
    grid.g.assign(N + 1, 0.0);
    for (int i = 0; i <= N; ++i)
        grid.g[i] = fine[i] + (tangent_split ? line_fpt_density(d0, beta, u[i]) : 0.0);
    grid.total_mass = mass + (tangent_split ? line_fpt_cdf(d0, beta, horizon) : 0.0);
    return grid;
}

double phi_from_H(const std::function<double(double, double)>& H, const Diffusion& d,
                  const Boundary& b, double t, double step_scale) {
    if (!(step_scale > 0.0)) fail_domain("phi_from_H: require step_scale > 0");
    double f = b.f(t), fp = b.fprime(t);
    double side = b.kind == BoundaryKind::lower ? 1.0 : -1.0;
    double kappa = fp - drift_b(d, f);
    double delta = 0.08 * step_scale * std::min(1.0, 2.0 / (1.0 + std::abs(fp)));
    // Keep the quadratic term of the expansion small, or the leftovers beyond
    // the extrapolated orders dominate (the drift blows up near a natural
    // endpoint, so this matters close to it).
    delta = std::min(delta, 0.15 / std::max(1.0, std::abs(kappa)));
    if (side < 0.0 && std::isfinite(d.left_endpoint))
        delta = std::min(delta, 0.2 * (f - d.left_endpoint));
    if (!(delta > 0.0)) fail_domain("phi_from_H: no room inside the state space");
    // H(t, f +- delta) = A delta (1 +- kappa delta) + O(delta^3) with the
    // quadratic term fixed by the backward equation along the boundary, so
    // each (delta, 2 delta) pair cancels through third order.  Two Richardson
    // stages on steps (1, 0.6, 0.36) delta then remove the quartic and
    // quintic terms; if the stages still disagree the step shrinks before
    // giving up.
    auto deriv = [&](double dl) {
        double h1 = H(t, f + side * dl);
        double h2 = H(t, f + side * 2.0 * dl);
        return (8.0 * h1 - h2) / (6.0 * dl + side * 4.0 * kappa * dl * dl);
    };
    const double r3 = 0.216, r4 = 0.1296;  // 0.6^3, 0.6^4
    for (int attempt = 0; attempt < 4; ++attempt, delta *= 0.5) {
        double a1 = deriv(delta), a2 = deriv(0.6 * delta), a3 = deriv(0.36 * delta);
        double b1 = (a2 - r3 * a1) / (1.0 - r3);
        double b2 = (a3 - r3 * a2) / (1.0 - r3);
        double ex = (b2 - r4 * b1) / (1.0 - r4);
        if (std::abs(b1 - b2) <= 2e-3 * std::max(std::abs(ex), 1e-12))
            return ex / scale_derivative(d, f);
    }
    fail_numeric("phi_from_H: derivative instability at t = " + std::to_string(t) +
                 " (step sizes keep disagreeing)");
}

SurvivalFunction survival_const_level(const Diffusion& d, double a) {
    if (!d.transient) fail_domain("survival_const_level: requires a transient family");
    if (!(a > d.left_endpoint)) fail_domain("survival_const_level: level not above the left endpoint");
    double sa = scale_s(d, a);
    if (!(sa < 0.0)) fail_numeric("survival_const_level: scale not normalized to 0 at +infinity");
    Diffusion dd = d;
    auto H = [dd, a, sa](double t, double y) {
        if (!(t >= 0.0)) fail_domain("survival_const_level: require t >= 0");
        if (y <= a) return 0.0;
        return clamp01(1.0 - scale_s(dd, y) / sa);
    };
    double phi0 = -1.0 / sa;
    auto phi = [phi0](double t) {
        if (!(t >= 0.0)) fail_domain("survival_const_level: require t >= 0");
        return phi0;
    };
    return {"const_level", H, phi, Provenance::closed_form};
}

SurvivalFunction survival_bessel_linedown(double nu, double a, double b) {
    if (!(nu > -1.0)) fail_domain("survival_bessel_linedown: require nu > -1");
    if (!(a > 0.0) || !(b > 0.0)) fail_domain("survival_bessel_linedown: require a > 0 and b > 0");
    double zeta = a / b;
    Diffusion bes = make_diffusion(Family::bessel, nu);
    Tolerance tol{1e-12, 1e-9, 4000};
    auto H = [=](double t, double y) {
        if (!(t >= 0.0) || !(t < zeta)) fail_domain("survival_bessel_linedown: t outside [0, zeta)");
        if (!(y >= 0.0)) fail_domain("survival_bessel_linedown: y outside the state space");
        double at = a - b * t;
        if (y <= at) return 0.0;
        double s0 = b / (2.0 * at), x0 = b / std::sqrt(2.0);
        double expo0 = (b / (2.0 * at)) * (at * at - y * y);
        auto integrand = [&](double z) {
            if (z <= 0.0) return 0.0;
            double q = transition_q(bes, s0, x0, z);
            if (q == 0.0) return 0.0;
            double expo = expo0 - std::sqrt(2.0) * z * (y - at);
            if (expo < -745.0) return 0.0;
            double ratio = bessel_k_scaled(nu, std::sqrt(2.0) * y * z) /
                           bessel_k_scaled(nu, std::sqrt(2.0) * at * z);
            return std::exp(expo) * ratio * q * 2.0 * std::pow(z, 2.0 * nu + 1.0);
        };
        double hit = std::pow(y / at, -nu) * integrate_adaptive(integrand, 0.0, kInf, tol).value;
        return clamp01(1.0 - hit);
    };
    auto phi = [=](double t) {
        if (!(t >= 0.0) || !(t < zeta)) fail_domain("survival_bessel_linedown: t outside [0, zeta)");
        double at = a - b * t;
        double s0 = b / (2.0 * at), x0 = b / std::sqrt(2.0);
        auto integrand = [&](double z) {
            if (z <= 0.0) return 0.0;
            double q = transition_q(bes, s0, x0, z);
            if (q == 0.0) return 0.0;
            double ratio = bessel_k_scaled(nu + 1.0, std::sqrt(2.0) * at * z) /
                           bessel_k_scaled(nu, std::sqrt(2.0) * at * z);
            return std::sqrt(2.0) * z * ratio * q * 2.0 * std::pow(z, 2.0 * nu + 1.0);
        };
        double inner = integrate_adaptive(integrand, 0.0, kInf, tol).value;
        return std::pow(at, 2.0 * nu + 1.0) * (b + inner);
    };
    return {"bessel_linedown", H, phi, Provenance::closed_form};
}

SurvivalFunction survival_rbm_linedown(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) fail_domain("survival_rbm_linedown: require a > 0 and b > 0");
    double zeta = a / b;
    auto H = [=](double t, double y) {
        if (!(t >= 0.0) || !(t < zeta)) fail_domain("survival_rbm_linedown: t outside [0, zeta)");
        if (!(y >= 0.0)) fail_domain("survival_rbm_linedown: y outside the state space");
        double at = a - b * t;
        if (y <= at) return 0.0;
        double r = std::sqrt(b / at);
        double hit = phi_bar(y * r) + std::exp(-2.0 * b * (y - at)) * phi_bar((y - 2.0 * at) * r);
        return clamp01(1.0 - hit);
    };
    auto phi = [=](double t) {
        if (!(t >= 0.0) || !(t < zeta)) fail_domain("survival_rbm_linedown: t outside [0, zeta)");
        double at = a - b * t;
        return b + b * erf_fn(std::sqrt(b * at / 2.0)) +
               std::sqrt(2.0 * b / (kPi * at)) * std::exp(-b * at / 2.0);
    };
    return {"rbm_linedown", H, phi, Provenance::closed_form};
}

SurvivalFunction survival_bessel_sqrtou(double nu, double a, double gamma) {
    if (!(nu > -1.0)) fail_domain("survival_bessel_sqrtou: require nu > -1");
    if (!(a > 0.0)) fail_domain("survival_bessel_sqrtou: require a > 0");
    if (!(gamma < 0.0)) fail_domain("survival_bessel_sqrtou: require gamma < 0");
    double zeta = -1.0 / (2.0 * gamma);
    // s^{(nu, gamma)}(a) = -a^{-2 nu} S(-gamma a^2) with S the tail integral
    // of w^{-2 nu - 1} e^{gamma a^2 w^2}; the same S serves every t.
    double S0 = -scale_s(make_diffusion(Family::radial_ou, nu, gamma), a) * std::pow(a, 2.0 * nu);
    if (!(S0 > 0.0) || !std::isfinite(S0)) fail_numeric("survival_bessel_sqrtou: scale tail failed");
    auto H = [=](double t, double y) {
        if (!(t >= 0.0) || !(t < zeta)) fail_domain("survival_bessel_sqrtou: t outside [0, zeta)");
        if (!(y >= 0.0)) fail_domain("survival_bessel_sqrtou: y outside the state space");
        double shrink = 1.0 + 2.0 * gamma * t;
        double at = a * std::sqrt(shrink);
        if (y <= at) return 0.0;
        Diffusion dd = make_diffusion(Family::radial_ou, nu, gamma / shrink);
        return clamp01(1.0 - scale_s(dd, y) / scale_s(dd, at));
    };
    auto phi = [=](double t) {
        if (!(t >= 0.0) || !(t < zeta)) fail_domain("survival_bessel_sqrtou: t outside [0, zeta)");
        double at = a * std::sqrt(1.0 + 2.0 * gamma * t);
        return std::exp(gamma * a * a) * std::pow(at, 2.0 * nu) / S0;
    };
    return {"bessel_sqrtou", H, phi, Provenance::closed_form};
}

SurvivalFunction survival_bessel_lineup(double nu, double a, double b, double series_depth) {
    if (!(nu > 0.0)) fail_domain("survival_bessel_lineup: require nu > 0");
    if (!(a > 0.0) || !(b > 0.0)) fail_domain("survival_bessel_lineup: require a > 0 and b > 0");
    if (!(series_depth >= 1.0)) fail_domain("survival_bessel_lineup: require series_depth >= 1");
    struct Cache {
        std::mutex m;
        std::vector<double> jz, jnu1;
    };
    auto cache = std::make_shared<Cache>();
    auto H = [=](double t, double y) {
        if (!(t >= 0.0)) fail_domain("survival_bessel_lineup: require t >= 0");
        if (!(y >= 0.0)) fail_domain("survival_bessel_lineup: y outside the state space");
        double at = a + b * t;
        if (y >= at) return 0.0;
        double delta = at - y;
        double u0 = delta * delta / 80.0;
        double jmax = series_depth * std::sqrt(52.0 * 2.0 * at * (at + b * u0) / u0);
        int need = (int)(jmax / kPi + nu / 2.0) + 8;

        std::lock_guard<std::mutex> lk(cache->m);
        if ((int)cache->jz.size() < need) {
            int count = need + need / 4 + 32;
            cache->jz = bessel_j_zeros(nu, count).zeros;
            cache->jnu1.resize(cache->jz.size());
            for (size_t k = 0; k < cache->jz.size(); ++k)
                cache->jnu1[k] = bessel_j(nu + 1.0, cache->jz[k]);
        }
        const auto& jz = cache->jz;
        const auto& jnu1 = cache->jnu1;

        // Coefficients y^{-nu} j_k J_nu(j_k y / at) / (at^{2-nu} J_{nu+1}(j_k)),
        // with the small-argument form when the J argument is tiny.
        int kmax = 0;
        while (kmax < (int)jz.size() && jz[kmax] <= jmax) ++kmax;
        if (kmax == 0) kmax = 1;
        std::vector<double> ck(kmax);
        double denom_scale = std::pow(at, 2.0 - nu);
        for (int k = 0; k < kmax; ++k) {
            double wj = jz[k] * y / at;
            double head;
            if (wj < 0.5) {
                double x = -wj * wj / 4.0, term = 1.0, ratio = 1.0;
                for (int m = 1; m < 40 && std::abs(term) > 1e-18; ++m) {
                    term *= x / (m * (nu + m));
                    ratio += term;
                }
                head = std::pow(jz[k] / (2.0 * at), nu) / gamma_fn(nu + 1.0) * ratio;
            } else {
                head = std::pow(y, -nu) * bessel_j(nu, wj);
            }
            ck[k] = head * jz[k] / (denom_scale * jnu1[k]);
        }

        auto integrand = [&](double uu) {
            if (uu <= 0.0) return 0.0;
            double logpre = -b * b * uu / 2.0 + (nu - 1.0) * std::log1p(b * uu / at);
            if (logpre < -745.0) return 0.0;
            double dn = 2.0 * at * (at + b * uu);
            NeumaierSum acc;
            for (int k = 0; k < kmax; ++k) {
                double ex = -uu * jz[k] * jz[k] / dn;
                if (ex < -48.0) break;
                acc.add(ck[k] * std::exp(ex));
            }
            return std::exp(logpre) * acc.value();
        };
        double psi = integrate_adaptive(integrand, u0, kInf, Tolerance{1e-12, 1e-9, 4000}).value;
        double hit = std::exp((b / (2.0 * at)) * (y * y - at * at)) * psi;
        return clamp01(1.0 - hit);
    };
    Boundary bd = make_explicit(BoundaryShape::line_up, a, b);
    Diffusion d = make_diffusion(Family::bessel, nu);
    std::function<double(double, double)> Hfn = H;
    auto phi = [Hfn, d, bd](double t) { return phi_from_H(Hfn, d, bd, t, 1.0); };
    return {"bessel_lineup", Hfn, phi, Provenance::numeric_derivative};
}

SurvivalFunction survival_bm_parabola(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) fail_domain("survival_bm_parabola: require a > 0 and b > 0");
    auto H = [=](double t, double y) {
        if (!(t >= 0.0)) fail_domain("survival_bm_parabola: require t >= 0");
        double ft = a + b * t * t;
        if (y >= ft) return 0.0;
        auto S = [=](double uu) {
            double s = t + uu;
            return a + b * s * s;
        };
        auto Sp = [=](double uu) { return 2.0 * b * (t + uu); };
        double T = 1.0;
        bool ok = false;
        for (int k = 0; k < 200; ++k) {
            double margin = S(T) - y;
            double bound = std::exp(-std::min(700.0, Sp(T) * margin)) +
                           phi_bar(margin / (2.0 * std::sqrt(T)));
            if (bound < 1e-9) {
                ok = true;
                break;
            }
            T *= 1.5;
        }
        if (!ok) fail_numeric("survival_bm_parabola: could not bound the passage-time tail");
        auto grid = bm_first_passage_curve(S, Sp, y, T, true, 0);
        return clamp01(1.0 - grid.total_mass);
    };
    Boundary bd = make_explicit(BoundaryShape::parabola, a, b);
    Diffusion d = make_diffusion(Family::bm_drift, 0.0);
    std::function<double(double, double)> Hfn = H;
    auto phi = [Hfn, d, bd](double t) { return phi_from_H(Hfn, d, bd, t, 1.0); };
    return {"bm_parabola", Hfn, phi, Provenance::numeric_derivative};
}

SurvivalFunction survival_resolvent(const Diffusion& d, const AtomicMeasure& F) {
    if (F.points.empty() || F.points.size() != F.weights.size())
        fail_domain("survival_resolvent: malformed atomic measure");
    if (!d.transient) fail_domain("survival_resolvent: requires a transient family");
    for (size_t i = 0; i < F.points.size(); ++i) {
        if (!(F.weights[i] > 0.0)) fail_domain("survival_resolvent: weights must be positive");
        if (!(F.points[i] >= 0.0)) fail_domain("survival_resolvent: rates must be nonnegative");
    }
    Diffusion dd = d;
    AtomicMeasure FF = F;
    auto Hbar = [dd, FF](double t, double y) {
        NeumaierSum acc;
        for (size_t i = 0; i < FF.points.size(); ++i)
            acc.add(FF.weights[i] * std::exp(-FF.points[i] * t) * resolvent_u0(dd, FF.points[i], y));
        return acc.value();
    };
    auto H = [Hbar](double t, double y) {
        if (!(t >= 0.0)) fail_domain("survival_resolvent: require t >= 0");
        double v = 1.0 - Hbar(t, y);
        return v < 0.0 ? 0.0 : clamp01(v);
    };
    Boundary bd = implicit_from_resolvent(d, F, false);
    auto phi = [dd, FF, bd](double t) {
        double f = bd.f(t);
        NeumaierSum acc;
        for (size_t i = 0; i < FF.points.size(); ++i)
            acc.add(FF.weights[i] * std::exp(-FF.points[i] * t) *
                    resolvent_u0_dy(dd, FF.points[i], f));
        return -acc.value() / scale_derivative(dd, f);
    };
    bool closed = d.family == Family::bessel || d.family == Family::bm_drift;
    return {"resolvent", H, phi,
            closed ? Provenance::closed_form : Provenance::numeric_derivative};
}

SurvivalFunction survival_density_level(const Diffusion& d, double zeta, double c) {
    Boundary bd = implicit_from_density_level(d, zeta, c);  // validates d, zeta, c
    Diffusion dd = d;
    auto H = [dd, zeta, c](double t, double y) {
        if (!(t >= 0.0) || !(t < zeta)) fail_domain("survival_density_level: t outside [0, zeta)");
        if (!(y >= 0.0)) fail_domain("survival_density_level: y outside the state space");
        double v = 1.0 - transition_q(dd, zeta - t, y, 0.0) / c;
        return v < 0.0 ? 0.0 : clamp01(v);
    };
    auto phi = [dd, zeta, c, bd](double t) {
        double f = bd.f(t);
        double s = zeta - t;
        switch (dd.family) {
            case Family::bessel:
                return f / (s * scale_derivative(dd, f));
            case Family::radial_ou: {
                double g = -dd.gamma;
                return 2.0 * g * f / (-std::expm1(-2.0 * g * s) * scale_derivative(dd, f));
            }
            default: {
                double dq = differentiate_central(
                    [&](double yy) { return transition_q(dd, s, yy, 0.0); }, f);
                return -dq / (c * scale_derivative(dd, f));
            }
        }
    };
    bool closed = d.family == Family::bessel || d.family == Family::radial_ou;
    return {"density_level", H, phi,
            closed ? Provenance::closed_form : Provenance::numeric_derivative};
}

SurvivalFunction survival_kernel(const Diffusion& d, std::function<double(double)> h) {
    Boundary bd = implicit_from_kernel(d, h, false);  // validates d
    Diffusion dd = d;
    auto I = [dd, h](double t, double y) {
        Tolerance tol{1e-12, 1e-10, 4000};
        auto head = [&](double w) { return 2.0 * w * h(t + w * w) * transition_q(dd, w * w, y, 0.0); };
        double front = integrate_adaptive(head, 0.0, 1.0, tol).value;
        auto tail = [&](double v) {
            if (v <= 0.0) return 0.0;
            double s = 1.0 / (v * v);
            return 2.0 / (v * v * v) * h(t + s) * transition_q(dd, s, y, 0.0);
        };
        return front + integrate_adaptive(tail, 0.0, 1.0, tol).value;
    };
    auto H = [I](double t, double y) {
        if (!(t >= 0.0)) fail_domain("survival_kernel: require t >= 0");
        if (!(y >= 0.0)) fail_domain("survival_kernel: y outside the state space");
        double v = 1.0 - I(t, y);
        return v < 0.0 ? 0.0 : clamp01(v);
    };
    auto phi = [dd, I, bd](double t) {
        double f = bd.f(t);
        double dI = differentiate_central([&](double yy) { return I(t, yy); }, f);
        return -dI / scale_derivative(dd, f);
    };
    return {"kernel", H, phi, Provenance::numeric_derivative};
}

double bm_parabola_hit_density_series(double a, double b, double y, double u, int zeros) {
    if (!(a > 0.0) || !(b > 0.0)) fail_domain("bm_parabola_hit_density_series: require a, b > 0");
    if (!(y < a)) fail_domain("bm_parabola_hit_density_series: start must be below the boundary");
    if (!(u > 0.0)) fail_domain("bm_parabola_hit_density_series: require u > 0");
    if (zeros < 1) fail_domain("bm_parabola_hit_density_series: require at least one zero");
    double c = std::pow(2.0 * b * b, -1.0 / 3.0);
    auto tab = airy_zeros(zeros);
    double arg_shift = 2.0 * b * c * (a - y);
    NeumaierSum acc;
    double amax = 0.0;
    bool truncated = false;
    for (int k = 0; k < zeros; ++k) {
        double lam = tab.zeros[k];
        double term = std::exp(lam * u / c) * airy_ai(lam + arg_shift) / airy_ai_prime(lam);
        acc.add(term);
        amax = std::max(amax, std::abs(term));
        if (std::abs(term) < 1e-17 * std::max(std::abs(acc.value()), amax) + 1e-300) {
            truncated = true;
            break;
        }
    }
    if (!truncated)
        fail_numeric("bm_parabola_hit_density_series: zero table too small at u = " +
                     std::to_string(u));
    return 2.0 * std::pow(b * c, 2.0) * std::exp(-2.0 / 3.0 * b * b * u * u * u) * acc.value();
}

double bm_parabola_H_series(double a, double b, double t, double y, int zeros) {
    if (!(a > 0.0) || !(b > 0.0)) fail_domain("bm_parabola_H_series: require a, b > 0");
    if (!(t >= 0.0)) fail_domain("bm_parabola_H_series: require t >= 0");
    double abar = a + b * t * t - y;
    if (!(abar > 0.0)) return 0.0;
    if (zeros < 8) fail_domain("bm_parabola_H_series: require a deeper zero table");
    double c = std::pow(2.0 * b * b, -1.0 / 3.0);
    auto tab = airy_zeros(zeros);
    double u0 = abar * abar / 80.0;
    if (std::abs(tab.zeros[zeros - 1]) * u0 / c < 45.0)
        fail_numeric("bm_parabola_H_series: zero table too small for this gap; need roughly " +
                     std::to_string((int)(0.22 * std::pow(45.0 * c / u0, 1.5))) + " zeros");
    std::vector<double> ratio(zeros);
    double shift = 2.0 * b * c * abar;
    for (int k = 0; k < zeros; ++k)
        ratio[k] = airy_ai(tab.zeros[k] + shift) / airy_ai_prime(tab.zeros[k]);
    auto integrand = [&](double uu) {
        if (uu <= 0.0) return 0.0;
        double s = t + uu;
        double logpre = -2.0 / 3.0 * b * b * s * s * s;
        if (logpre < -745.0) return 0.0;
        NeumaierSum acc;
        double amax = 0.0;
        for (int k = 0; k < zeros; ++k) {
            double ex = tab.zeros[k] * uu / c;
            if (ex < -48.0) break;
            double term = std::exp(ex) * ratio[k];
            acc.add(term);
            amax = std::max(amax, std::abs(term));
            if (std::abs(term) < 1e-17 * std::max(std::abs(acc.value()), amax) + 1e-300 && k > 4)
                break;
        }
        return std::exp(logpre) * acc.value();
    };
    double integral = integrate_adaptive(integrand, u0, kInf, Tolerance{1e-12, 1e-9, 4000}).value;
    double pre = 2.0 * std::pow(b * c, 2.0) *
                 std::exp(-4.0 / 3.0 * b * b * t * t * t - 2.0 * b * t * (a - y));
    return clamp01(1.0 - pre * integral);
}

}  // namespace lpt
