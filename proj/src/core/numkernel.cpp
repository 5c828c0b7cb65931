#include "core/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <queue>
#include <sstream>

namespace lpt {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
// (positive half; node 0 last).
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278};
// Gauss weights attach to kXgk[1], kXgk[3], kXgk[5], kXgk[7].
constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

struct Panel {
    double a, b;
    double value;
    double err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

Panel gk15(const Fn& g, double a, double b, long& evals) {
    const double h = 0.5 * (b - a);
    const double m = 0.5 * (a + b);
    double resk = 0.0, resg = 0.0;
    for (int i = 0; i < 8; ++i) {
        double f1 = g(m + h * kXgk[i]);
        double f2 = (i < 7) ? g(m - h * kXgk[i]) : f1;
        evals += (i < 7) ? 2 : 1;
        if (!std::isfinite(f1))
            fail_numeric("integrate_adaptive: non-finite integrand at t=" + fmt(m + h * kXgk[i]));
        if (!std::isfinite(f2))
            fail_numeric("integrate_adaptive: non-finite integrand at t=" + fmt(m - h * kXgk[i]));
        double s = (i < 7) ? f1 + f2 : f1;
        resk += kWgk[i] * s;
        if (i % 2 == 1 || i == 7) resg += kWg[i / 2] * s;
    }
    resk *= h;
    resg *= h;
    // QUADPACK-style error sharpening keeps estimates honest on rough panels.
    double err = std::abs(resk - resg);
    err = std::pow(200.0 * err, 1.5);
    double scale = std::abs(resk);
    if (scale > 0 && err > scale) err = scale;
    err = std::max(err, std::abs(resk - resg));
    return Panel{a, b, resk, err};
}

QuadratureResult integrate_finite(const Fn& g, double lo, double hi, const Tolerance& tol) {
    long evals = 0;
    std::priority_queue<Panel> q;
    Panel p0 = gk15(g, lo, hi, evals);
    double total = p0.value, toterr = p0.err;
    q.push(p0);
    int iter = 0;
    const double min_width = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(lo) + std::abs(hi) + 1.0);
    while (toterr > std::max(tol.abs_tol, tol.rel_tol * std::abs(total))) {
        if (iter++ >= tol.max_iter)
            fail_numeric("integrate_adaptive: no convergence after " + std::to_string(tol.max_iter) +
                         " subdivisions; partial estimate " + fmt(total) + " +- " + fmt(toterr));
        Panel p = q.top();
        q.pop();
        if (p.b - p.a < min_width) {
            // Cannot refine further; treat the panel as converged.
            continue;
        }
        double mid = 0.5 * (p.a + p.b);
        Panel l = gk15(g, p.a, mid, evals);
        Panel r = gk15(g, mid, p.b, evals);
        total += l.value + r.value - p.value;
        toterr += l.err + r.err - p.err;
        q.push(l);
        q.push(r);
    }
    return QuadratureResult{total, toterr, evals};
}

}  // namespace

void Tolerance::validate() const {
    if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0)) fail_domain("Tolerance: negative tolerance");
    if (abs_tol <= 0.0 && rel_tol <= 0.0) fail_domain("Tolerance: abs_tol or rel_tol must be positive");
    if (max_iter < 1) fail_domain("Tolerance: max_iter must be >= 1");
}

QuadratureResult integrate_adaptive(const Fn& g, double lo, double hi, const Tolerance& tol) {
    tol.validate();
    if (std::isinf(hi)) {
        auto mapped = [&g, lo](double u) {
            double om = 1.0 - u;
            double t = lo + u / om;
            return g(t) / (om * om);
        };
        return integrate_finite(mapped, 0.0, 1.0, tol);
    }
    if (lo == hi) return QuadratureResult{0.0, 0.0, 0};
    if (lo > hi) {
        QuadratureResult r = integrate_adaptive(g, hi, lo, tol);
        r.value = -r.value;
        return r;
    }
    return integrate_finite(g, lo, hi, tol);
}

QuadratureResult integrate_sqrt_endpoints(const Fn& g, double lo, double hi, const Tolerance& tol,
                                          bool sing_lo, bool sing_hi) {
    tol.validate();
    if (!sing_lo && !sing_hi) return integrate_adaptive(g, lo, hi, tol);
    if (sing_hi && std::isinf(hi)) fail_domain("integrate_sqrt_endpoints: infinite hi cannot carry an endpoint singularity");
    if (sing_lo && sing_hi) {
        double mid = 0.5 * (lo + hi);
        QuadratureResult a = integrate_sqrt_endpoints(g, lo, mid, tol, true, false);
        QuadratureResult b = integrate_sqrt_endpoints(g, mid, hi, tol, false, true);
        return QuadratureResult{a.value + b.value, a.error_estimate + b.error_estimate,
                                a.evaluations + b.evaluations};
    }
    if (sing_lo) {
        if (std::isinf(hi)) {
            // Split so the t=u^2 map covers the singular end only.
            double mid = lo + 1.0;
            QuadratureResult a = integrate_sqrt_endpoints(g, lo, mid, tol, true, false);
            QuadratureResult b = integrate_adaptive(g, mid, hi, tol);
            return QuadratureResult{a.value + b.value, a.error_estimate + b.error_estimate,
                                    a.evaluations + b.evaluations};
        }
        auto mapped = [&g, lo](double u) { return 2.0 * u * g(lo + u * u); };
        return integrate_adaptive(mapped, 0.0, std::sqrt(hi - lo), tol);
    }
    auto mapped = [&g, hi](double v) { return 2.0 * v * g(hi - v * v); };
    return integrate_adaptive(mapped, 0.0, std::sqrt(hi - lo), tol);
}

double find_root(const Fn& g, double lo, double hi, const Tolerance& tol) {
    tol.validate();
    double a = std::min(lo, hi), b = std::max(lo, hi);
    double fa = g(a), fb = g(b);
    if (!std::isfinite(fa) || !std::isfinite(fb))
        fail_numeric("find_root: non-finite endpoint value");
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0)
        fail_numeric("find_root: no sign change on [" + fmt(a) + ", " + fmt(b) + "]");

    // Brent's method.
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < tol.max_iter; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
                      0.5 * std::max(tol.abs_tol, tol.rel_tol * std::abs(b));
        double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double s = fb / fa, p, qq;
            if (a == c) {
                p = 2.0 * xm * s;
                qq = 1.0 - s;
            } else {
                double q1 = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * q1 * (q1 - r) - (b - a) * (r - 1.0));
                qq = (q1 - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) qq = -qq;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * qq - std::abs(tol1 * qq), std::abs(e * qq))) {
                e = d;
                d = p / qq;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = g(b);
        if (!std::isfinite(fb)) fail_numeric("find_root: non-finite value at x=" + fmt(b));
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    fail_numeric("find_root: max_iter exceeded; best bracket [" + fmt(std::min(b, c)) + ", " +
                 fmt(std::max(b, c)) + "]");
}

double sum_series(const std::function<double(long)>& term, const Tolerance& tol, TailKind tail,
                  long k0) {
    tol.validate();
    NeumaierSum acc;
    double prev_abs = std::numeric_limits<double>::infinity();
    int small_streak = 0;
    for (long k = k0; k < k0 + tol.max_iter; ++k) {
        double t = term(k);
        if (!std::isfinite(t)) fail_numeric("sum_series: non-finite term at k=" + std::to_string(k));
        acc.add(t);
        double at = std::abs(t);
        double target = std::max(tol.abs_tol, tol.rel_tol * std::abs(acc.value()));
        if (tail == TailKind::alternating) {
            // |tail| <= |next term| <= |current term| once terms decrease.
            if (at <= target && at <= prev_abs) {
                if (++small_streak >= 2) return acc.value();
            } else {
                small_streak = 0;
            }
        } else {
            if (prev_abs > 0 && std::isfinite(prev_abs)) {
                double r = at / prev_abs;
                if (r < 0.995) {
                    double bound = at * r / (1.0 - r);
                    if (bound <= target && at <= target) {
                        if (++small_streak >= 2) return acc.value();
                    } else {
                        small_streak = 0;
                    }
                } else {
                    small_streak = 0;
                }
            }
        }
        prev_abs = at;
    }
    fail_numeric("sum_series: tail bound not achieved within " + std::to_string(tol.max_iter) +
                 " terms; partial sum " + fmt(acc.value()));
}

double differentiate_central(const Fn& g, double y, double scale) {
    if (!(scale > 0.0)) fail_domain("differentiate_central: scale must be positive");
    const double eps = std::numeric_limits<double>::epsilon();
    double h = scale * std::max(1.0, std::abs(y)) * std::cbrt(eps);
    double fm2 = g(y - 2 * h), fm1 = g(y - h), fp1 = g(y + h), fp2 = g(y + 2 * h);
    if (!std::isfinite(fm2) || !std::isfinite(fm1) || !std::isfinite(fp1) || !std::isfinite(fp2))
        fail_numeric("differentiate_central: non-finite stencil value near y=" + fmt(y));
    return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
}

double differentiate_onesided(const Fn& g, double y, double step, int dir) {
    if (!(step > 0.0)) fail_domain("differentiate_onesided: step must be positive");
    if (dir != 1 && dir != -1) fail_domain("differentiate_onesided: dir must be +-1");
    double h = dir * step;
    double f0 = g(y), f1 = g(y + h), f2 = g(y + 2 * h), f3 = g(y + 3 * h), f4 = g(y + 4 * h);
    if (!std::isfinite(f0) || !std::isfinite(f1) || !std::isfinite(f2) || !std::isfinite(f3) ||
        !std::isfinite(f4))
        fail_numeric("differentiate_onesided: non-finite stencil value near y=" + fmt(y));
    return (-25.0 / 12.0 * f0 + 4.0 * f1 - 3.0 * f2 + 4.0 / 3.0 * f3 - 0.25 * f4) / h;
}

namespace {

// Stehfest weights for N total evaluations, computed once per N in long double.
const std::vector<long double>& stehfest_weights(int n) {
    static std::mutex mu;
    static std::vector<std::vector<long double>> cache(32);
    std::lock_guard<std::mutex> lock(mu);
    auto& w = cache[n];
    if (!w.empty()) return w;
    std::vector<long double> fact(2 * n + 1, 1.0L);
    for (int i = 1; i <= 2 * n; ++i) fact[i] = fact[i - 1] * i;
    int half = n / 2;
    w.assign(n + 1, 0.0L);
    for (int k = 1; k <= n; ++k) {
        long double s = 0.0L;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            long double num = powl((long double)j, half) * fact[2 * j];
            long double den = fact[half - j] * fact[j] * fact[j - 1] * fact[k - j] * fact[2 * j - k];
            s += num / den;
        }
        w[k] = (((k + half) % 2) ? -1.0L : 1.0L) * s;
    }
    return w;
}

}  // namespace

LaplaceResult laplace_invert(const Fn& ghat, double t, InvertMethod method, int order) {
    if (!(t > 0.0)) fail_domain("laplace_invert: t must be positive");
    if (method == InvertMethod::talbot)
        fail_numeric("laplace_invert: talbot method unsupported (complex contour out of scope); use gaver_stehfest");
    int n = order;
    if (n < 4) n = 4;
    if (n > 20) n = 20;
    if (n % 2) ++n;
    const auto& w = stehfest_weights(n);
    const long double ln2t = std::log(2.0L) / (long double)t;
    long double s = 0.0L, comp = 0.0L, peak = 0.0L;
    for (int k = 1; k <= n; ++k) {
        double gk = ghat((double)(ln2t * k));
        if (!std::isfinite(gk)) fail_numeric("laplace_invert: non-finite transform value at lambda=" + fmt((double)(ln2t * k)));
        long double v = w[k] * (long double)gk;
        peak = std::max(peak, fabsl(v));
        long double tt = s + v;
        if (fabsl(s) >= fabsl(v))
            comp += (s - tt) + v;
        else
            comp += (v - tt) + s;
        s = tt;
    }
    long double res = (s + comp) * ln2t;
    LaplaceResult out;
    out.value = (double)res;
    // Largest scaled summand vs the surviving sum.  Ratios beyond 1e8 mean
    // fewer than ~8 of the 16 available digits survived the alternating sum.
    out.cancellation_warning = (peak * ln2t > 1e8L * std::max(fabsl(res), 1e-300L));
    return out;
}

PchipTable::PchipTable(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    size_t n = x_.size();
    if (n < 2 || y_.size() != n) fail_domain("PchipTable: need >= 2 points with matching y");
    for (size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) fail_domain("PchipTable: x must be strictly increasing");
    d_.assign(n, 0.0);
    std::vector<double> h(n - 1), del(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        del[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 2) {
        d_[0] = d_[1] = del[0];
        return;
    }
    for (size_t i = 1; i + 1 < n; ++i) {
        if (del[i - 1] * del[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            double w1 = 2.0 * h[i] + h[i - 1];
            double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
        }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0.0)
            d = 0.0;
        else if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0))
            d = 3.0 * d0;
        return d;
    };
    d_[0] = end_slope(h[0], h[1], del[0], del[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
}

double PchipTable::operator()(double x) const {
    if (empty()) fail_domain("PchipTable: empty");
    if (x <= x_.front()) return y_.front() + d_.front() * (x - x_.front());
    if (x >= x_.back()) return y_.back() + d_.back() * (x - x_.back());
    size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin() - 1;
    double h = x_[i + 1] - x_[i];
    double s = (x - x_[i]) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    double h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s);
    double h11 = s * s * (s - 1);
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 2) fail_domain("linspace: need n >= 2");
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    v.back() = b;
    return v;
}

std::vector<double> graded_grid(double a, double b, double h0, double ratio, double hmax) {
    if (!(b > a) || !(h0 > 0) || !(ratio >= 1.0) || !(hmax >= h0))
        fail_domain("graded_grid: invalid parameters");
    std::vector<double> v{a};
    double h = h0, x = a;
    while (x + h < b) {
        x += h;
        v.push_back(x);
        h = std::min(h * ratio, hmax);
    }
    if (b - v.back() < 0.25 * (v.back() - v[v.size() - 2]) && v.size() > 1)
        v.back() = b;
    else
        v.push_back(b);
    return v;
}

}  // namespace lpt
