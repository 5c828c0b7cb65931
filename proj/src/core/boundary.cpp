#include "boundary.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <vector>

#include "numkernel.hpp"

namespace lpt {

namespace {

std::function<double(double)> numeric_derivative(std::function<double(double)> f) {
    return [f = std::move(f)](double t) {
        return differentiate_central(f, t, std::max(1.0, std::abs(t)));
    };
}

// Root of a strictly decreasing g(y) = target, bracketed by geometric
// expansion away from an interior seed.  half_line: search (0, inf);
// otherwise the whole real line.
double solve_decreasing(const std::function<double(double)>& g, double target, bool half_line,
                        double t_label) {
    double lo, hi;
    bool have_lo = false, have_hi = false;
    if (half_line) {
        hi = 1.0;
        for (int k = 0; k < 200; ++k) {
            if (g(hi) < target) {
                have_hi = true;
                break;
            }
            hi *= 2.0;
        }
        lo = 1.0;
        for (int k = 0; k < 200; ++k) {
            if (g(lo) > target) {
                have_lo = true;
                break;
            }
            lo *= 0.5;
        }
    } else {
        hi = 1.0;
        for (int k = 0; k < 200; ++k) {
            if (g(hi) < target) {
                have_hi = true;
                break;
            }
            hi = hi * 2.0 + 1.0;
        }
        lo = -1.0;
        for (int k = 0; k < 200; ++k) {
            if (g(lo) > target) {
                have_lo = true;
                break;
            }
            lo = lo * 2.0 - 1.0;
        }
    }
    if (!have_lo || !have_hi) {
        std::ostringstream os;
        os << "implicit boundary: no bracket at t = " << t_label << " after 200 expansions";
        fail_numeric(os.str());
    }
    return find_root([&](double y) { return g(y) - target; }, std::min(lo, hi), std::max(lo, hi),
                     Tolerance{1e-14, 1e-14, 200});
}

// Lazily solved boundary values on a geometric time grid with monotone
// cubic interpolation between nodes.  Queries outside [1e-9, 1e6] fall back
// to a direct solve; otherwise the grid is rebuilt to cover the query.
// Readers copy the current immutable snapshot under a brief lock.
class SolvedCurve {
  public:
    explicit SolvedCurve(std::function<double(double)> solve) : solve_(std::move(solve)) {}

    double operator()(double t) {
        if (t < kLo || t > kHi) return solve_(t);
        std::shared_ptr<const PchipTable> snap;
        {
            std::lock_guard<std::mutex> lk(mu_);
            if (!snap_ || t < lo_ || t > hi_) rebuild(t);
            snap = snap_;
        }
        return (*snap)(std::log(t));
    }

  private:
    static constexpr double kLo = 1e-9, kHi = 1e6;
    static constexpr int kPerOctave = 64;

    void rebuild(double t) {
        double lo = snap_ ? std::min(lo_, t / 8.0) : t / 8.0;
        double hi = snap_ ? std::max(hi_, t * 8.0) : t * 8.0;
        lo = std::max(lo, kLo);
        hi = std::min(hi, kHi);
        int n = std::max(9, (int)std::ceil(std::log2(hi / lo) * kPerOctave) + 1);
        std::vector<double> xs(n), ys(n);
        double llo = std::log(lo), lhi = std::log(hi);
        for (int i = 0; i < n; ++i) {
            xs[i] = llo + (lhi - llo) * i / (n - 1);
            ys[i] = solve_(std::exp(xs[i]));
        }
        snap_ = std::make_shared<const PchipTable>(std::move(xs), std::move(ys));
        lo_ = lo;
        hi_ = hi;
    }

    std::function<double(double)> solve_;
    std::mutex mu_;
    std::shared_ptr<const PchipTable> snap_;
    double lo_ = 0.0, hi_ = 0.0;
};

Boundary from_solver(std::function<double(double)> solve, bool cached, double zeta,
                     BoundaryKind kind, std::string description) {
    Boundary out;
    if (cached) {
        auto curve = std::make_shared<SolvedCurve>(std::move(solve));
        out.f = [curve](double t) { return (*curve)(t); };
    } else {
        out.f = std::move(solve);
    }
    out.fprime = numeric_derivative(out.f);
    out.zeta = zeta;
    out.kind = kind;
    out.description = std::move(description);
    return out;
}

}  // namespace

Boundary make_explicit(BoundaryShape shape, double a, double b) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Boundary out;
    std::ostringstream os;
    switch (shape) {
        case BoundaryShape::constant:
            out.f = [a](double) { return a; };
            out.fprime = [](double) { return 0.0; };
            out.zeta = inf;
            out.kind = BoundaryKind::lower;
            os << "constant level " << a;
            break;
        case BoundaryShape::line_down:
            if (!(a > 0.0) || !(b > 0.0)) fail_domain("make_explicit: line_down needs a, b > 0");
            out.f = [a, b](double t) { return a - b * t; };
            out.fprime = [b](double) { return -b; };
            out.zeta = a / b;
            out.kind = BoundaryKind::lower;
            os << a << " - " << b << " t";
            break;
        case BoundaryShape::line_up:
            if (!(a > 0.0) || !(b > 0.0)) fail_domain("make_explicit: line_up needs a, b > 0");
            out.f = [a, b](double t) { return a + b * t; };
            out.fprime = [b](double) { return b; };
            out.zeta = inf;
            out.kind = BoundaryKind::upper;
            os << a << " + " << b << " t";
            break;
        case BoundaryShape::sqrt_ou:
            if (!(a > 0.0) || !(b < 0.0))
                fail_domain("make_explicit: sqrt_ou needs a > 0 and a negative rate");
            out.f = [a, b](double t) { return a * std::sqrt(1.0 + 2.0 * b * t); };
            out.fprime = [a, b](double t) { return a * b / std::sqrt(1.0 + 2.0 * b * t); };
            out.zeta = -1.0 / (2.0 * b);
            out.kind = BoundaryKind::lower;
            os << a << " sqrt(1 + 2 (" << b << ") t)";
            break;
        case BoundaryShape::parabola:
            if (!(a > 0.0) || !(b > 0.0)) fail_domain("make_explicit: parabola needs a, b > 0");
            out.f = [a, b](double t) { return a + b * t * t; };
            out.fprime = [b](double t) { return 2.0 * b * t; };
            out.zeta = inf;
            out.kind = BoundaryKind::upper;
            os << a << " + " << b << " t^2";
            break;
        case BoundaryShape::sqrt_line:
            out.f = [a, b](double t) { return a + b * std::sqrt(t); };
            out.fprime = [b](double t) { return 0.5 * b / std::sqrt(t); };
            out.zeta = inf;
            out.kind = BoundaryKind::lower;
            os << a << " + " << b << " sqrt(t)";
            break;
        case BoundaryShape::sqrt_quad:
            if (!(a > 0.0) || !(b > 0.0)) fail_domain("make_explicit: sqrt_quad needs a, b > 0");
            out.f = [a, b](double t) { return std::sqrt(a * t * t + b * t); };
            out.fprime = [a, b](double t) {
                return (2.0 * a * t + b) / (2.0 * std::sqrt(a * t * t + b * t));
            };
            out.zeta = inf;
            out.kind = BoundaryKind::upper;
            os << "sqrt(" << a << " t^2 + " << b << " t)";
            break;
    }
    out.description = os.str();
    return out;
}

Boundary shift(const Boundary& b, double t) {
    if (!(t < b.zeta)) fail_domain("shift: offset is not below the boundary lifetime");
    if (!(t >= 0.0)) fail_domain("shift: offset must be nonnegative");
    Boundary out;
    out.f = [f = b.f, t](double u) { return f(t + u); };
    out.fprime = [fp = b.fprime, t](double u) { return fp(t + u); };
    out.zeta = b.zeta - t;
    out.kind = b.kind;
    out.description = b.description + " shifted by " + std::to_string(t);
    return out;
}

Boundary invert_time(const Boundary& b) {
    if (std::isfinite(b.zeta))
        fail_domain("invert_time: boundary must live on all of (0, inf)");
    Boundary out;
    out.f = [f = b.f](double t) { return t * f(1.0 / t); };
    out.fprime = [f = b.f, fp = b.fprime](double t) { return f(1.0 / t) - fp(1.0 / t) / t; };
    out.zeta = b.zeta;
    out.kind = b.kind;
    out.description = "time inversion of (" + b.description + ")";
    return out;
}

Boundary implicit_from_resolvent(const Diffusion& d, const AtomicMeasure& F, bool cached) {
    if (F.points.size() != F.weights.size() || F.points.empty())
        fail_domain("implicit_from_resolvent: need matching, nonempty atoms and weights");
    for (size_t i = 0; i < F.points.size(); ++i) {
        if (F.points[i] < 0.0 || !(F.weights[i] > 0.0))
            fail_domain("implicit_from_resolvent: atoms need lambda >= 0 and weight > 0");
        if (F.points[i] == 0.0 && !d.transient)
            fail_domain("implicit_from_resolvent: a lambda = 0 atom needs a transient family");
    }
    bool half_line = d.left_endpoint == 0.0;
    if (half_line && d.left_class != LeftClass::entrance_not_exit)
        fail_domain("implicit_from_resolvent: finite left endpoint must be entrance-not-exit");
    auto solve = [d, F, half_line](double t) {
        auto hbar = [&](double y) {
            double s = 0.0;
            for (size_t i = 0; i < F.points.size(); ++i)
                s += F.weights[i] * std::exp(-F.points[i] * t) * resolvent_u0(d, F.points[i], y);
            return s;
        };
        return solve_decreasing(hbar, 1.0, half_line, t);
    };
    std::ostringstream os;
    os << "level-1 curve of a " << F.points.size() << "-atom resolvent mixture";
    return from_solver(solve, cached, std::numeric_limits<double>::infinity(),
                       BoundaryKind::lower, os.str());
}

Boundary implicit_from_density_level(const Diffusion& d, double zeta, double c) {
    if (!(zeta > 0.0) || !(c > 0.0))
        fail_domain("implicit_from_density_level: need zeta > 0 and c > 0");
    bool on_half_line = d.family == Family::bessel || d.family == Family::bessel_drift ||
                        d.family == Family::radial_ou;
    if (!on_half_line || d.left_class != LeftClass::entrance_not_exit)
        fail_domain(
            "implicit_from_density_level: needs a family on (0, inf) whose origin is "
            "entrance-not-exit");
    if (!(c < transition_q(d, zeta, 0.0, 0.0)))
        fail_domain("implicit_from_density_level: level must stay under q(zeta - t, 0, 0)");
    auto solve = [d, zeta, c](double t) {
        if (!(t >= 0.0 && t < zeta))
            fail_domain("implicit_from_density_level: evaluation outside [0, zeta)");
        double s = zeta - t;
        return solve_decreasing([&](double y) { return transition_q(d, s, y, 0.0); }, c, true, t);
    };
    // Each evaluation is one special-function solve; no grid cache needed.
    Boundary out = from_solver(solve, false, zeta, BoundaryKind::lower,
                               "kernel level curve q(zeta - t, f, 0) = c");
    return out;
}

Boundary implicit_from_kernel(const Diffusion& d, std::function<double(double)> h, bool cached) {
    if (!d.transient)
        fail_domain("implicit_from_kernel: needs a transient family drifting to +infinity");
    if (d.left_endpoint != 0.0 || d.left_class != LeftClass::entrance_not_exit)
        fail_domain("implicit_from_kernel: left endpoint must be 0 and entrance-not-exit");
    auto solve = [d, h](double t) {
        auto weighted = [&](double y) {
            Tolerance tol{1e-12, 1e-10, 4000};
            // u = w^2 resolves the near-0 peak; u = 1/v^2 the heavy tail.
            auto head = [&](double w) {
                return 2.0 * w * h(t + w * w) * transition_q(d, w * w, y, 0.0);
            };
            double front = integrate_adaptive(head, 0.0, 1.0, tol).value;
            auto tail = [&](double v) {
                if (v <= 0.0) return 0.0;
                double u = 1.0 / (v * v);
                return 2.0 / (v * v * v) * h(t + u) * transition_q(d, u, y, 0.0);
            };
            return front + integrate_adaptive(tail, 0.0, 1.0, tol).value;
        };
        return solve_decreasing(weighted, 1.0, true, t);
    };
    return from_solver(solve, cached, std::numeric_limits<double>::infinity(),
                       BoundaryKind::lower, "level-1 curve of a kernel-weighted mean");
}

}  // namespace lpt
