#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpt {

enum class ErrorKind { domain, numeric, parse };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_domain(const std::string& msg) { throw Error(ErrorKind::domain, msg); }
[[noreturn]] inline void fail_numeric(const std::string& msg) { throw Error(ErrorKind::numeric, msg); }
[[noreturn]] inline void fail_parse(const std::string& msg) { throw Error(ErrorKind::parse, msg); }

struct Tolerance {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_iter = 2000;

    void validate() const;
    static Tolerance loose() { return Tolerance{1e-8, 1e-8, 2000}; }
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
};

using Fn = std::function<double(double)>;

// Adaptive Gauss-Kronrod 15 on (lo, hi). hi may be +infinity, in which case
// the range is mapped through t = lo + u/(1-u) onto (0,1).
QuadratureResult integrate_adaptive(const Fn& g, double lo, double hi, const Tolerance& tol);

// Same rule after removing integrable ~(t-lo)^{-1/2} and/or (hi-t)^{-1/2}
// endpoint singularities: t = lo + u^2, and t = hi - v^2 for finite hi.
QuadratureResult integrate_sqrt_endpoints(const Fn& g, double lo, double hi, const Tolerance& tol,
                                          bool sing_lo, bool sing_hi);

// Brent bracketing root solve; requires g(lo) * g(hi) <= 0.
double find_root(const Fn& g, double lo, double hi, const Tolerance& tol);

enum class TailKind { alternating, exponential };

// Sums term(k0) + term(k0+1) + ... until the declared tail bound drops below
// tolerance. For exponential tails the bound is |last| * r/(1-r) with r the
// observed ratio.
double sum_series(const std::function<double(long)>& term, const Tolerance& tol, TailKind tail,
                  long k0 = 0);

// Five-point fourth-order central difference with h = scale*max(1,|y|)*eps^{1/3}.
double differentiate_central(const Fn& g, double y, double scale = 1.0);

// Five-point fourth-order one-sided difference on {y, y+h, ..., y+4h},
// h = dir*step with dir = +-1 choosing the admissible side.
double differentiate_onesided(const Fn& g, double y, double step, int dir);

enum class InvertMethod { gaver_stehfest, talbot };

struct LaplaceResult {
    double value = 0.0;
    bool cancellation_warning = false;
};

// Numerical Laplace inversion at t > 0. order = total number of real
// evaluations of ghat (even; default 14; clamped to [4,20] since the method
// loses all 64-bit digits past ~16-20 terms). talbot is not supported and
// fails explicitly.
LaplaceResult laplace_invert(const Fn& ghat, double t,
                             InvertMethod method = InvertMethod::gaver_stehfest, int order = 14);

// Monotonicity-preserving C^1 piecewise cubic (Fritsch-Carlson PCHIP).
// Evaluation outside [x.front(), x.back()] extrapolates linearly with the end
// slope.
class PchipTable {
public:
    PchipTable() = default;
    PchipTable(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    bool empty() const { return x_.empty(); }
    double min_x() const { return x_.front(); }
    double max_x() const { return x_.back(); }

private:
    std::vector<double> x_, y_, d_;
};

std::vector<double> linspace(double a, double b, int n);

// Grid on [a,b] whose steps start at h0 and grow geometrically by `ratio`
// up to hmax; always ends exactly at b.
std::vector<double> graded_grid(double a, double b, double h0, double ratio, double hmax);

// Compensated (Neumaier) accumulator.
struct NeumaierSum {
    double s = 0.0, c = 0.0;
    void add(double v) {
        double t = s + v;
        if (std::abs(s) >= std::abs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

}  // namespace lpt
