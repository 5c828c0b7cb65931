#include "core/specfun.hpp"

#include <cmath>
#include <mutex>
#include <string>

#include "core/numkernel.hpp"

namespace lpt {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Gauss-Legendre nodes and weights on [-1, 1], computed once by Newton
// iteration on the Legendre recurrence.
struct GlRule {
    std::vector<double> x, w;
};

const GlRule& gl24() {
    static GlRule rule;
    static std::once_flag flag;
    std::call_once(flag, [] {
        const int n = 24;
        rule.x.resize(n);
        rule.w.resize(n);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            long double x = std::cos(M_PI * (i + 0.75L) / (n + 0.5L));
            long double dp = 0.0L;
            for (int it = 0; it < 100; ++it) {
                long double p0 = 1.0L, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0L);
                long double dx = p1 / dp;
                x -= dx;
                if (fabsl(dx) < 1e-18L) break;
            }
            rule.x[i] = (double)-x;
            rule.x[n - 1 - i] = (double)x;
            double wi = (double)(2.0L / ((1.0L - x * x) * dp * dp));
            rule.w[i] = wi;
            rule.w[n - 1 - i] = wi;
        }
    });
    return rule;
}

// Power series sum of I_nu in long double: (z/2)^nu / Gamma(nu+1) *
// sum_k (z^2/4)^k / (k! (nu+1)_k).  All terms positive.
long double bessel_i_series(double nu, double z) {
    long double q = (long double)z * z / 4.0L;
    long double term = expl(nu * logl((long double)z / 2.0L) - lgammal(nu + 1.0L));
    long double sum = term;
    for (int k = 1; k <= 600; ++k) {
        term *= q / ((long double)k * (nu + k));
        sum += term;
        if (term < 1e-19L * sum) return sum;
    }
    fail_numeric("bessel_i: series did not converge at z=" + fmt(z));
}

// Asymptotic series sum_k (-1)^k a_k(nu) z^{-k}, a_k = prod_j (4nu^2-(2j-1)^2)/(8j).
// Truncated at the smallest term; the omitted remainder is below 1e-17 of the
// sum for z > 30 and moderate nu.
long double bessel_i_asym_sum(double nu, double z) {
    long double mu4 = 4.0L * nu * nu;
    long double term = 1.0L, sum = 1.0L, prev = 1e30L;
    for (int k = 1; k <= 80; ++k) {
        term *= -(mu4 - (2.0L * k - 1) * (2.0L * k - 1)) / (8.0L * k * z);
        if (fabsl(term) >= prev) break;
        sum += term;
        prev = fabsl(term);
        if (fabsl(term) < 1e-18L * fabsl(sum)) break;
    }
    return sum;
}

void check_i_args(double nu, double z) {
    if (!(nu > -1.0)) fail_domain("bessel_i: require nu > -1, got " + fmt(nu));
    if (!(z >= 0.0)) fail_domain("bessel_i: require z >= 0, got " + fmt(z));
}

// K_nu(z) e^{z} = int_0^umax e^{-z(cosh u - 1)} cosh(nu u) du with the upper
// limit chosen so the discarded tail is below 1e-20 of the peak.
double k_scaled_impl(double nu, double z) {
    nu = std::fabs(nu);
    double umax = std::acosh(1.0 + 50.0 / z);
    for (int it = 0; it < 3; ++it) umax = std::acosh(1.0 + (50.0 + nu * umax) / z);
    int panels = std::max(8, (int)std::ceil(umax));
    const GlRule& g = gl24();
    NeumaierSum total;
    double h = umax / panels;
    for (int p = 0; p < panels; ++p) {
        double a = p * h, c = a + h / 2, half = h / 2;
        long double acc = 0.0L;
        for (size_t i = 0; i < g.x.size(); ++i) {
            double u = c + half * g.x[i];
            long double e = -(long double)z * (coshl(u) - 1.0L) + logl(coshl(nu * u));
            acc += (long double)g.w[i] * expl(e);
        }
        total.add((double)(acc * half));
    }
    return total.value();
}

struct AiryPair {
    double ai, aip;
};

// Maclaurin solution of w'' = z w split into the two standard solutions and
// their derivatives, combined with Ai(0), Ai'(0).
AiryPair airy_maclaurin(double z) {
    const long double c1 = 0.355028053887817239260L;
    const long double c2 = -0.258819403792806798405L;
    if (z == 0.0) return {(double)c1, (double)c2};
    long double zz = z;
    long double f = 1.0L, fp = 0.0L, tf = 1.0L;
    long double gsum = zz, gp = 1.0L, tg = zz;
    for (int k = 1; k <= 200; ++k) {
        int m = 3 * k;
        tf *= zz * zz * zz / ((long double)m * (m - 1));
        f += tf;
        fp += tf * m / zz;
        tg *= zz * zz * zz / ((long double)(m + 1) * m);
        gsum += tg;
        gp += tg * (m + 1) / zz;
        if (fabsl(tf) < 1e-19L * fabsl(f) && fabsl(tg) < 1e-19L * (fabsl(gsum) + 1e-30L)) break;
    }
    AiryPair out;
    out.ai = (double)(c1 * f + c2 * gsum);
    out.aip = (double)(c1 * fp + c2 * gp);
    return out;
}

// Modulus-phase asymptotics on the negative axis (z = -x, x >= 7.2), with
// u_k = Gamma(3k+1/2) / (54^k k! Gamma(k+1/2)) and v_k = -(6k+1)/(6k-1) u_k.
AiryPair airy_negative_asym(double x) {
    long double zeta = (2.0L / 3.0L) * powl((long double)x, 1.5L);
    long double ue = 0, uo = 0, ve = 0, vo = 0;
    long double u = 1.0L, v = 1.0L, prev = 1e30L;
    for (int k = 0; k <= 60; ++k) {
        long double mag = fabsl(u) / powl(zeta, k);
        if (mag >= prev) break;
        prev = mag;
        long double sgn = ((k / 2) % 2) ? -1.0L : 1.0L;
        long double scale = sgn / powl(zeta, k);
        if (k % 2 == 0) {
            ue += scale * u;
            ve += scale * v;
        } else {
            uo += scale * u;
            vo += scale * v;
        }
        int j = k + 1;
        u *= (6.0L * j - 1) * (6.0L * j - 3) * (6.0L * j - 5) / (216.0L * j * (2.0L * j - 1));
        v = -u * (6.0L * j + 1) / (6.0L * j - 1);
    }
    long double ph = zeta - M_PIl / 4.0L;
    long double c = cosl(ph), s = sinl(ph);
    long double rsp = 1.0L / sqrtl(M_PIl);
    AiryPair out;
    out.ai = (double)(rsp * powl((long double)x, -0.25L) * (c * ue + s * uo));
    out.aip = (double)(rsp * powl((long double)x, 0.25L) * (s * ve - c * vo));
    return out;
}

AiryPair airy_pair(double z) {
    if (!std::isfinite(z)) fail_domain("airy: non-finite argument");
    if (z >= 5.0) {
        double xi = (2.0 / 3.0) * std::pow(z, 1.5);
        AiryPair out;
        if (xi > 700.0) {
            out.ai = 0.0;
            out.aip = 0.0;
            return out;
        }
        double e = std::exp(-xi);
        out.ai = std::sqrt(z / 3.0) / M_PI * e * k_scaled_impl(1.0 / 3.0, xi);
        out.aip = -(z / (M_PI * std::sqrt(3.0))) * e * k_scaled_impl(2.0 / 3.0, xi);
        return out;
    }
    if (z > -7.2) return airy_maclaurin(z);
    return airy_negative_asym(-z);
}

}  // namespace

double bessel_i(double nu, double z) {
    check_i_args(nu, z);
    if (z == 0.0) {
        if (nu > 0.0) return 0.0;
        if (nu == 0.0) return 1.0;
        fail_domain("bessel_i: I_nu(0) diverges for nu < 0");
    }
    if (z <= 30.0) return (double)bessel_i_series(nu, z);
    return (double)(expl((long double)z) * bessel_i_asym_sum(nu, z) / sqrtl(2.0L * M_PIl * z));
}

double bessel_i_scaled(double nu, double z) {
    check_i_args(nu, z);
    if (z == 0.0) {
        if (nu > 0.0) return 0.0;
        if (nu == 0.0) return 1.0;
        fail_domain("bessel_i: I_nu(0) diverges for nu < 0");
    }
    if (z <= 30.0) return (double)(bessel_i_series(nu, z) * expl(-(long double)z));
    return (double)(bessel_i_asym_sum(nu, z) / sqrtl(2.0L * M_PIl * z));
}

double bessel_k(double nu, double z) {
    if (!(z > 0.0)) fail_domain("bessel_k: require z > 0, got " + fmt(z));
    if (z > 700.0) return 0.0;
    return std::exp(-z) * k_scaled_impl(nu, z);
}

double bessel_k_scaled(double nu, double z) {
    if (!(z > 0.0)) fail_domain("bessel_k: require z > 0, got " + fmt(z));
    return k_scaled_impl(nu, z);
}

double bessel_j(double nu, double z) {
    if (!(nu > -1.0)) fail_domain("bessel_j: require nu > -1, got " + fmt(nu));
    if (!(z >= 0.0)) fail_domain("bessel_j: require z >= 0, got " + fmt(z));
    if (z == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    if (z <= 14.5) {
        long double q = (long double)z * z / 4.0L;
        long double term = expl(nu * logl((long double)z / 2.0L) - lgammal(nu + 1.0L));
        long double sum = term;
        for (int k = 1; k <= 400; ++k) {
            term *= -q / ((long double)k * (nu + k));
            sum += term;
            if (fabsl(term) < 1e-19L * (fabsl(sum) + 1e-30L)) return (double)sum;
        }
        fail_numeric("bessel_j: series did not converge at z=" + fmt(z));
    }
    // Hankel expansion: J = sqrt(2/(pi z)) (P cos w - Q sin w).
    long double mu4 = 4.0L * nu * nu;
    long double p = 1.0L, q = 0.0L;
    long double term = 1.0L, prev = 1e30L;
    for (int k = 1; k <= 60; ++k) {
        term *= (mu4 - (2.0L * k - 1) * (2.0L * k - 1)) / (8.0L * k * z);
        if (fabsl(term) >= prev) break;
        prev = fabsl(term);
        long double sgn = ((k / 2) % 2) ? -1.0L : 1.0L;
        if (k % 2)
            q += sgn * term;
        else
            p += sgn * term;
        if (fabsl(term) < 1e-18L) break;
    }
    long double w = (long double)z - (0.5L * nu + 0.25L) * M_PIl;
    return (double)(sqrtl(2.0L / (M_PIl * z)) * (p * cosl(w) - q * sinl(w)));
}

ZeroTable bessel_j_zeros(double nu, int n) {
    if (n < 1) fail_domain("bessel_j_zeros: require n >= 1");
    if (!(nu > -1.0)) fail_domain("bessel_j_zeros: require nu > -1");
    ZeroTable table;
    table.order_nu = nu;
    table.zeros.reserve(n);
    double mu = 4.0 * nu * nu;
    for (int k = 1; k <= n; ++k) {
        double beta = (k + 0.5 * nu - 0.25) * M_PI;
        double guess = beta - (mu - 1) / (8 * beta) -
                       4 * (mu - 1) * (7 * mu - 31) / (3 * std::pow(8 * beta, 3));
        double floor_prev = table.zeros.empty() ? 0.0 : table.zeros.back();
        double lo = std::max(guess - 0.2, floor_prev + 1e-8);
        double hi = guess + 0.2;
        auto f = [nu](double z) { return bessel_j(nu, z); };
        bool found = false;
        for (int grow = 0; grow < 8 && !found; ++grow) {
            double flo = f(lo), fhi = f(hi);
            if (flo == 0.0) {
                hi = lo;
                found = true;
                break;
            }
            if (flo * fhi < 0.0) {
                found = true;
                break;
            }
            lo = std::max(lo - 0.2, floor_prev + 1e-8);
            hi += 0.2;
        }
        if (!found) fail_numeric("bessel_j_zeros: no bracket for zero k=" + std::to_string(k));
        double root = (hi == lo) ? lo : find_root([nu](double z) { return bessel_j(nu, z); }, lo, hi, Tolerance{1e-13, 1e-13, 200});
        table.zeros.push_back(root);
    }
    table.count = n;
    return table;
}

double airy_ai(double z) { return airy_pair(z).ai; }

double airy_ai_prime(double z) { return airy_pair(z).aip; }

ZeroTable airy_zeros(int n) {
    if (n < 1) fail_domain("airy_zeros: require n >= 1");
    ZeroTable table;
    table.zeros.reserve(n);
    for (int k = 1; k <= n; ++k) {
        double t = 3.0 * M_PI * (4 * k - 1) / 8.0;
        double t2 = t * t;
        double guess = -std::pow(t, 2.0 / 3.0) *
                       (1 + 5.0 / (48 * t2) - 5.0 / (36 * t2 * t2) +
                        77125.0 / (82944 * t2 * t2 * t2));
        double ceil_prev = table.zeros.empty() ? 0.0 : table.zeros.back();
        // Local spacing shrinks like pi / sqrt(|a_k|); keep the bracket well
        // inside it so the sign test cannot straddle a neighboring zero.
        double gap = M_PI / std::sqrt(-guess);
        double lo = guess - 0.35 * gap;
        double hi = std::min(guess + 0.35 * gap, ceil_prev - 1e-8);
        bool found = false;
        for (int grow = 0; grow < 8 && !found; ++grow) {
            if (airy_ai(lo) * airy_ai(hi) < 0.0) {
                found = true;
                break;
            }
            lo -= 0.1 * gap;
            hi = std::min(hi + 0.1 * gap, ceil_prev - 1e-8);
        }
        if (!found) fail_numeric("airy_zeros: no bracket for zero k=" + std::to_string(k));
        table.zeros.push_back(find_root(airy_ai, lo, hi, Tolerance{1e-13, 1e-13, 200}));
    }
    table.count = n;
    return table;
}

double pcf_d(double nu, double z) {
    if (!(nu > 0.0)) fail_domain("pcf_d: require nu > 0, got " + fmt(nu));
    double upper = -z + std::sqrt(z * z + 320.0);
    Tolerance tol{1e-15, 1e-13, 4000};
    double integral;
    if (nu >= 1.0) {
        auto f = [nu, z](double u) {
            return std::pow(u, nu - 1.0) * std::exp(-0.5 * u * u - z * u);
        };
        integral = integrate_adaptive(f, 0.0, upper, tol).value;
    } else {
        // u = v^{1/nu} removes the endpoint singularity of u^{nu-1}.
        auto f = [nu, z](double v) {
            if (v <= 0.0) return 1.0;
            double u = std::pow(v, 1.0 / nu);
            return std::exp(-0.5 * u * u - z * u);
        };
        integral = integrate_adaptive(f, 0.0, std::pow(upper, nu), tol).value / nu;
    }
    return std::exp(-0.25 * z * z) / gamma_fn(nu) * integral;
}

double whittaker_m(double kappa, double mu, double z) {
    if (!(mu > -0.5)) fail_domain("whittaker_m: require mu > -1/2, got " + fmt(mu));
    if (!(z > 0.0)) fail_domain("whittaker_m: require z > 0, got " + fmt(z));
    long double a = (long double)mu - kappa + 0.5L;
    long double b = 1.0L + 2.0L * mu;
    long double term = 1.0L, sum = 1.0L;
    for (int k = 0; k < 4000; ++k) {
        term *= (a + k) / (b + k) * z / (k + 1.0L);
        sum += term;
        if (fabsl(term) < 1e-19L * fabsl(sum)) {
            return (double)(expl(-0.5L * z + (mu + 0.5L) * logl((long double)z)) * sum);
        }
    }
    fail_numeric("whittaker_m: series did not converge at z=" + fmt(z));
}

double gamma_fn(double x) {
    if (x <= 0.0 && x == std::floor(x)) fail_domain("gamma_fn: pole at " + fmt(x));
    return std::tgamma(x);
}

double erf_fn(double x) { return std::erf(x); }

double erfc_fn(double x) { return std::erfc(x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }

}  // namespace lpt
