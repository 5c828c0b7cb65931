#include "mc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include "numkernel.hpp"

namespace lpt {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t x[4], const std::uint32_t k[2]) {
    const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * x[0];
    const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * x[2];
    const std::uint32_t y0 = std::uint32_t(p1 >> 32) ^ x[1] ^ k[0];
    const std::uint32_t y1 = std::uint32_t(p1);
    const std::uint32_t y2 = std::uint32_t(p0 >> 32) ^ x[3] ^ k[1];
    const std::uint32_t y3 = std::uint32_t(p0);
    x[0] = y0;
    x[1] = y1;
    x[2] = y2;
    x[3] = y3;
}

}  // namespace

void CounterRng::block(const std::uint32_t ctr[4], const std::uint32_t key[2], std::uint32_t out[4]) {
    std::uint32_t x[4] = {ctr[0], ctr[1], ctr[2], ctr[3]};
    std::uint32_t k[2] = {key[0], key[1]};
    for (int r = 0; r < 10; ++r) {
        philox_round(x, k);
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    for (int i = 0; i < 4; ++i) out[i] = x[i];
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) {
    key_[0] = std::uint32_t(seed);
    key_[1] = std::uint32_t(seed >> 32);
    ctr_[0] = 0;
    ctr_[1] = 0;
    ctr_[2] = std::uint32_t(stream);
    ctr_[3] = std::uint32_t(stream >> 32);
}

void CounterRng::refill() {
    block(ctr_, key_, out_);
    if (++ctr_[0] == 0 && ++ctr_[1] == 0) ++ctr_[2];  // 2^64 blocks per stream before touching the stream id
    idx_ = 0;
}

std::uint32_t CounterRng::next32() {
    if (idx_ == 4) refill();
    return out_[idx_++];
}

std::uint64_t CounterRng::next64() {
    const std::uint64_t hi = next32();
    return (hi << 32) | next32();
}

double CounterRng::uniform() {
    const std::uint64_t u = next64() >> 11;
    return double(u + 1) * 0x1.0p-53;  // (0, 1]
}

double CounterRng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double a = 2.0 * M_PI * uniform();
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

double CounterRng::gamma(double shape) {
    if (shape < 0.0 || !std::isfinite(shape)) fail_domain("gamma sampler: shape must be finite and >= 0");
    if (shape == 0.0) return 0.0;
    if (shape == 1.0) return -std::log(uniform());
    if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double z = normal();
        const double b = 1.0 + c * z;
        if (b <= 0.0) continue;
        const double v = b * b * b;
        const double u = uniform();
        const double z2 = z * z;
        if (u < 1.0 - 0.0331 * z2 * z2) return d * v;
        if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double besq_step(CounterRng& rng, double z, double delta, double h) {
    if (!(z >= 0.0) || !(h > 0.0)) fail_domain("besq_step: needs z >= 0 and h > 0");
    if (delta < 1.0) fail_domain("besq_step: the Gaussian-plus-chi-square split needs dimension >= 1");
    const double g = std::sqrt(z) + std::sqrt(h) * rng.normal();
    const double chi = 2.0 * rng.gamma(0.5 * (delta - 1.0));
    return g * g + h * chi;
}

// ---------------------------------------------------------------------------
// Per-family stepping.  Exact transitions everywhere except Bessel-with-drift
// at non-integer dimension, which falls back to reflected Euler-Maruyama.

namespace {

struct PathSim {
    const Diffusion& d;
    bool euler = false;
    int embed_dim = 0;           // > 0: norm of a driven n-dimensional BM
    double delta = 0.0;          // squared-Bessel dimension
    double xcur = 0.0;
    double zcur = 0.0;           // squared-Bessel state (bessel, radial_ou)
    std::array<double, 16> w{};  // embedding coordinates

    PathSim(const Diffusion& dd, double x0, bool force_euler, CounterRng& rng) : d(dd) {
        euler = force_euler;
        xcur = x0;
        switch (d.family) {
            case Family::bm_drift:
            case Family::reflected_bm:
                euler = false;  // the Gaussian step is already exact
                break;
            case Family::bessel:
            case Family::radial_ou:
                delta = 2.0 * (d.nu + 1.0);
                if (delta < 1.0) euler = true;
                zcur = x0 * x0;
                break;
            case Family::bessel_drift: {
                delta = 2.0 * (d.nu + 1.0);
                const double nd = std::round(delta);
                if (!euler && std::abs(delta - nd) < 1e-12 && nd >= 1.0 && nd <= 16.0) {
                    embed_dim = int(nd);
                    // start on the sphere of radius x0, direction uniform,
                    // drift fixed along the first axis
                    double s2 = 0.0;
                    do {
                        s2 = 0.0;
                        for (int j = 0; j < embed_dim; ++j) {
                            w[j] = rng.normal();
                            s2 += w[j] * w[j];
                        }
                    } while (x0 > 0.0 && s2 == 0.0);
                    const double scale = x0 > 0.0 ? x0 / std::sqrt(s2) : 0.0;
                    for (int j = 0; j < embed_dim; ++j) w[j] *= scale;
                } else {
                    euler = true;
                }
                break;
            }
        }
    }

    void euler_step(double h, CounterRng& rng) {
        // reflected Euler; the drift is evaluated away from the endpoint so
        // the 1/x term cannot blow up a single step
        const double xeval = std::max(xcur, std::sqrt(h));
        xcur = std::abs(xcur + std::sqrt(h) * rng.normal() + drift_b(d, xeval) * h);
    }

    void step(double t0, double t1, CounterRng& rng) {
        const double h = t1 - t0;
        switch (d.family) {
            case Family::bm_drift:
                xcur += std::sqrt(h) * rng.normal() + d.mu * h;
                break;
            case Family::reflected_bm:
                xcur = std::abs(xcur + std::sqrt(h) * rng.normal());
                break;
            case Family::bessel:
                if (euler) {
                    euler_step(h, rng);
                } else {
                    zcur = besq_step(rng, zcur, delta, h);
                    xcur = std::sqrt(zcur);
                }
                break;
            case Family::radial_ou: {
                if (euler) {
                    euler_step(h, rng);
                    break;
                }
                // time-changed Bessel: X_t = e^{-gamma t} R(tau(t)),
                // tau(t) = (e^{2 gamma t} - 1) / (2 gamma)
                const double g = d.gamma;
                const double htau = (std::expm1(2.0 * g * t1) - std::expm1(2.0 * g * t0)) / (2.0 * g);
                zcur = besq_step(rng, zcur, delta, htau);
                xcur = std::exp(-g * t1) * std::sqrt(zcur);
                break;
            }
            case Family::bessel_drift:
                if (embed_dim > 0) {
                    const double sh = std::sqrt(h);
                    double s2 = 0.0;
                    for (int j = 0; j < embed_dim; ++j) {
                        w[j] += sh * rng.normal() + (j == 0 ? d.drift_c * h : 0.0);
                        s2 += w[j] * w[j];
                    }
                    xcur = std::sqrt(s2);
                } else {
                    euler_step(h, rng);
                }
                break;
        }
    }
};

// ---------------------------------------------------------------------------
// Escape planning: when is a path provably done crossing?

constexpr double kEscLogBm = 13.815510557964274;      // ln 1e6: exact exponential bound
constexpr double kEscLogRadial = 18.420680743952367;  // ln 1e8: slack for polynomial prefactors

struct EscapePlan {
    enum class Rule { none, level_const, level_table, upper_gap };
    Rule rule = Rule::none;
    bool finite_zeta = false;
    double zeta = std::numeric_limits<double>::infinity();
    double level = std::numeric_limits<double>::infinity();  // level_const
    PchipTable level_of_t;                                   // level_table
    double drift_rate = 0.0;                                 // upper_gap
    double esc_log = kEscLogRadial;
    bool growth = false;      // far-field step growth over a flat lower boundary
    double flat_level = 0.0;  // growth reference level
};

// Escape threshold above a level the process leaves for good: the largest y
// with P_y(return to a) >= 1e-4, i.e. s(y) = 1e-4 s(a) with s(+inf) = 0.
double return_level(const Diffusion& d, double a) {
    const double sa = scale_s(d, a);
    const Tolerance tol{1e-12, 1e-10, 300};
    // bracket in u with y = (a + 1) e^u - 1 so purely polynomial scales
    // (Bessel at small nu) stay reachable
    const auto g = [&](double u) { return scale_s(d, (a + 1.0) * std::exp(u) - 1.0) - 1e-4 * sa; };
    double hi = 1.0;
    const double glo = g(0.0);
    if (glo >= 0.0) return a;  // already negligible return mass just above a
    while (g(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 640.0) fail_numeric("escape level: no finite threshold below exp(640); boundary not escapable");
    }
    const double u = find_root(g, 0.0, hi, tol);
    return (a + 1.0) * std::exp(u) - 1.0;
}

bool boundary_is_flat(const Boundary& b) {
    const double f0 = b.f(0.25);
    for (double t : {1.0, 5.0, 37.0}) {
        if (b.f(t) != f0) return false;
    }
    return b.fprime(1.3) == 0.0 && b.fprime(11.0) == 0.0;
}

EscapePlan make_escape_plan(const Diffusion& d, const Boundary& b, double horizon) {
    EscapePlan plan;
    if (std::isfinite(b.zeta)) {
        plan.finite_zeta = true;
        plan.zeta = b.zeta;
        return plan;  // every path resolves at zeta
    }
    const bool radial = d.family != Family::bm_drift;
    plan.esc_log = radial ? kEscLogRadial : kEscLogBm;
    if (b.kind == BoundaryKind::lower) {
        if (!d.transient) return plan;  // a recurrent process never stops returning
        if (boundary_is_flat(b)) {
            const double a = b.f(0.0);
            plan.rule = EscapePlan::Rule::level_const;
            plan.level = return_level(d, a);
            plan.growth = true;
            plan.flat_level = a;
            return plan;
        }
        // decreasing boundary with no death time: escape level follows the
        // running envelope sup_{u >= t} f(u) = f(t)
        std::vector<double> ts, lv;
        double prev = std::numeric_limits<double>::infinity();
        for (int j = 0; j <= 24; ++j) {
            const double t = horizon * std::pow(double(j) / 24.0, 2.0);
            const double ft = b.f(std::max(t, 1e-8));
            if (ft > prev * (1.0 + 1e-12))
                fail_domain("escape plan: lower boundaries with infinite lifetime must be non-increasing");
            prev = ft;
            ts.push_back(t);
            lv.push_back(return_level(d, ft));
        }
        plan.rule = EscapePlan::Rule::level_table;
        plan.level_of_t = PchipTable(std::move(ts), std::move(lv));
        return plan;
    }
    plan.rule = EscapePlan::Rule::upper_gap;
    if (d.family == Family::bm_drift) plan.drift_rate = d.mu;
    if (d.family == Family::bessel_drift) plan.drift_rate = d.drift_c;
    return plan;
}

bool escaped(const EscapePlan& plan, const Boundary& b, double t, double X) {
    switch (plan.rule) {
        case EscapePlan::Rule::none:
            return false;
        case EscapePlan::Rule::level_const:
            return X >= plan.level;
        case EscapePlan::Rule::level_table:
            return X >= plan.level_of_t(t);
        case EscapePlan::Rule::upper_gap: {
            const double ft = b.f(t);
            const double gap = ft - X;
            if (!(gap > 0.0) || !std::isfinite(gap)) return false;
            // the boundary from here on sits above the shallower of the
            // tangent and a long chord, so a line bound applies
            const double span = std::max(1e6, 1e3 * (t + 1.0));
            const double chord = (b.f(t + span) - ft) / span;
            const double slope = std::min(b.fprime(t), chord) - plan.drift_rate;
            return slope > 0.0 && 2.0 * slope * gap >= plan.esc_log;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Single-path simulation.

enum class Mode { last_passage, first_hitting };

struct PathOut {
    double t = 0.0;
    enum class Kind : std::uint8_t { sample, atom0, never, unresolved } kind = Kind::unresolved;
};

inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }

// crossing time of the linearly interpolated path with the boundary on
// (t0, t1); endpoint gaps g0, g1 have opposite signs
double refine_crossing(const Boundary& b, double t0, double t1, double x0, double x1, double g0,
                       double feval_cap) {
    double lo = t0, hi = t1;
    for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double xm = x0 + (x1 - x0) * (mid - t0) / (t1 - t0);
        const double gm = xm - b.f(std::min(mid, feval_cap));
        if (gm == 0.0) return mid;
        if (sgn(gm) == sgn(g0)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

PathOut simulate_one(Mode mode, const Diffusion& d, const Boundary& b, double x,
                     const SimConfig& cfg, const EscapePlan& plan, CounterRng& rng) {
    const double feval_cap =
        plan.finite_zeta ? plan.zeta * (1.0 - 1e-12) : std::numeric_limits<double>::infinity();
    const auto feval = [&](double t) { return b.f(std::min(t, feval_cap)); };

    double f0 = feval(0.0);
    if (std::isnan(f0)) f0 = feval(1e-12);  // time-inverted boundaries: 0 * f(inf) at t = 0
    if (x == f0) {
        if (mode == Mode::first_hitting) return {0.0, PathOut::Kind::sample};
    }
    double last_cross = (x == f0) ? 0.0 : -1.0;

    PathSim sim(d, x, cfg.force_euler, rng);
    double t = 0.0;
    double fprev = f0;
    int sprev = sgn(x - f0);
    bool resolved = escaped(plan, b, 0.0, x);
    long step_no = 0;

    while (!resolved && t < cfg.horizon) {
        double h = cfg.dt;
        if (plan.growth && sim.xcur > plan.flat_level) {
            const double gap = sim.xcur - plan.flat_level;
            h = std::max(h, 0.02 * gap * gap);  // keeps per-step crossing mass under e^{-100}
        }
        bool at_zeta = false;
        if (plan.finite_zeta && t + h >= plan.zeta) {
            h = plan.zeta - t;
            at_zeta = true;
            if (h <= 0.0) break;
        } else if (t + h > cfg.horizon) {
            h = cfg.horizon - t;
        }
        const double t1 = t + h;
        sim.step(t, t1, rng);
        const double x1 = sim.xcur;
        const double f1 = feval(t1);
        const int s1 = sgn(x1 - f1);

        if (s1 == 0 || (sprev != 0 && s1 != sprev)) {
            const double tau =
                s1 == 0 ? t1 : refine_crossing(b, t, t1, x, x1, x - fprev, feval_cap);
            if (mode == Mode::first_hitting) return {tau, PathOut::Kind::sample};
            last_cross = tau;
        } else if (cfg.bridge_correction) {
            // g0 == 0 (step starts on the boundary) gives p = 1: such a step
            // always recrosses, which carries the sub-grid mass of laws with
            // a density singularity at 0
            const double g0 = std::abs(x - fprev);
            const double g1 = std::abs(x1 - f1);
            const double e = 2.0 * g0 * g1 / h;
            if (std::isfinite(e) && e < 34.0 && rng.uniform() <= std::exp(-e)) {
                // midpoint placement, except from on the boundary where the
                // last-crossing position keeps the v^{-1/2} sub-grid shape
                double tau;
                if (g0 == 0.0) {
                    const double u = rng.uniform();
                    tau = t + h * u * u;
                } else {
                    tau = t + 0.5 * h;
                }
                if (mode == Mode::first_hitting) return {tau, PathOut::Kind::sample};
                last_cross = tau;
            }
        }

        t = t1;
        x = x1;
        fprev = f1;
        if (s1 != 0) sprev = s1;
        ++step_no;

        if (at_zeta) {
            resolved = true;
        } else if (plan.rule == EscapePlan::Rule::level_const) {
            resolved = escaped(plan, b, t, x);
        } else if ((step_no & 15) == 0) {
            resolved = escaped(plan, b, t, x);  // pricier rules probed every 16 steps
        }
    }

    if (!resolved) return {0.0, PathOut::Kind::unresolved};
    if (mode == Mode::first_hitting)
        return {std::numeric_limits<double>::infinity(), PathOut::Kind::never};
    if (last_cross <= 0.0) return {0.0, PathOut::Kind::atom0};
    return {last_cross, PathOut::Kind::sample};
}

int worker_count(long n_paths) {
    long t = 0;
    if (const char* env = std::getenv("LASTPASS_THREADS")) {
        if (*env) t = std::strtol(env, nullptr, 10);
    }
    if (t <= 0) t = long(std::thread::hardware_concurrency());
    if (t <= 0) t = 1;
    t = std::min(t, n_paths);
    return int(std::min<long>(t, 64));
}

EmpiricalLaw run_paths(Mode mode, const Diffusion& d, const Boundary& b, double x,
                       const SimConfig& cfg) {
    if (cfg.n_paths < 1) fail_domain("simulation: n_paths must be >= 1");
    if (!(cfg.dt > 0.0) || !(cfg.horizon > 0.0)) fail_domain("simulation: dt and horizon must be positive");
    if (cfg.dt > cfg.horizon / 100.0) fail_domain("simulation: dt must be at most horizon/100");
    if (d.family != Family::bm_drift && x < 0.0)
        fail_domain("simulation: start must be >= 0 for radial families");

    const EscapePlan plan = make_escape_plan(d, b, cfg.horizon);
    const long n = cfg.n_paths;
    std::vector<PathOut> out(static_cast<std::size_t>(n));

    const int workers = worker_count(n);
    const long block = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(workers));
    for (int wi = 0; wi < workers; ++wi) {
        const long lo = wi * block;
        const long hi = std::min(n, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([&, wi, lo, hi]() {
            try {
                for (long p = lo; p < hi; ++p) {
                    CounterRng rng(cfg.seed, std::uint64_t(p));
                    out[std::size_t(p)] = simulate_one(mode, d, b, x, cfg, plan, rng);
                }
            } catch (...) {
                errs[std::size_t(wi)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& ep : errs) {
        if (ep) std::rethrow_exception(ep);
    }

    long unresolved = 0, atom0 = 0;
    std::vector<double> finite, never;
    finite.reserve(std::size_t(n));
    for (const PathOut& po : out) {
        switch (po.kind) {
            case PathOut::Kind::sample:
                if (std::isinf(po.t)) {
                    never.push_back(po.t);
                } else {
                    finite.push_back(po.t);
                }
                break;
            case PathOut::Kind::atom0: ++atom0; break;
            case PathOut::Kind::never: never.push_back(std::numeric_limits<double>::infinity()); break;
            case PathOut::Kind::unresolved: ++unresolved; break;
        }
    }
    if (double(unresolved) > 1e-3 * double(n))
        fail_numeric("simulation: " + std::to_string(unresolved) + " of " + std::to_string(n) +
                     " paths unresolved at horizon " + std::to_string(cfg.horizon) +
                     "; increase horizon");
    // unresolved paths within budget are dropped: they carry < 0.1% of mass
    std::sort(finite.begin(), finite.end());
    EmpiricalLaw law;
    law.samples = std::move(finite);
    law.samples.insert(law.samples.end(), never.begin(), never.end());
    law.atom0_count = atom0;
    law.n = long(law.samples.size()) + atom0;
    law.seed = cfg.seed;
    return law;
}

}  // namespace

EmpiricalLaw sample_last_passage(const Diffusion& d, const Boundary& b, double x,
                                 const SimConfig& cfg) {
    return run_paths(Mode::last_passage, d, b, x, cfg);
}

EmpiricalLaw sample_first_hitting(const Diffusion& d, const Boundary& b, double x,
                                  const SimConfig& cfg) {
    return run_paths(Mode::first_hitting, d, b, x, cfg);
}

// ---------------------------------------------------------------------------
// EmpiricalLaw accessors.

long EmpiricalLaw::finite_count() const {
    long m = 0;
    for (double s : samples) {
        if (std::isfinite(s)) ++m;
    }
    return m;
}

double EmpiricalLaw::atom0_fraction() const { return n > 0 ? double(atom0_count) / double(n) : 0.0; }

double EmpiricalLaw::never_fraction() const {
    return n > 0 ? double(long(samples.size()) - finite_count()) / double(n) : 0.0;
}

double EmpiricalLaw::mean_power(double p) const {
    const long m = finite_count();
    if (m == 0) return 0.0;
    NeumaierSum acc;
    for (long i = 0; i < m; ++i) acc.add(std::pow(samples[std::size_t(i)], p));
    return acc.value() / double(m);
}

double EmpiricalLaw::sd_power(double p) const {
    const long m = finite_count();
    if (m < 2) return 0.0;
    const double mu = mean_power(p);
    NeumaierSum acc;
    for (long i = 0; i < m; ++i) {
        const double dlt = std::pow(samples[std::size_t(i)], p) - mu;
        acc.add(dlt * dlt);
    }
    return std::sqrt(acc.value() / double(m - 1));
}

// ---------------------------------------------------------------------------
// Comparison with an analytic law.

ModelLaw model_from_lastpass(const LastPassageLaw& law) {
    ModelLaw m;
    LastPassageLaw copy = law;
    m.cdf = [copy](double t) { return copy.cdf(t); };
    m.density = [copy](double t) { return copy.density(t); };
    m.atom0 = law.atom0;
    m.mass_never = 0.0;
    return m;
}

ModelLaw model_from_hitting(const HittingLaw& law) {
    ModelLaw m;
    const HittingLaw copy = law;
    m.density = copy.density;
    m.cdf = [copy](double t) {
        if (t <= 0.0) return 0.0;
        const Tolerance tol{1e-10, 1e-8, 2000};
        return integrate_sqrt_endpoints(copy.density, 0.0, t, tol, true, false).value;
    };
    m.atom0 = 0.0;
    m.mass_never = std::max(0.0, 1.0 - law.total_mass);
    return m;
}

namespace {

// conditioned model cdf evaluated at each of the m sorted finite samples;
// large samples go through a cumulative table on sample quantiles so the
// model cdf (often itself a quadrature) is called O(500) times, not O(m)
std::vector<double> conditioned_cdf_at(const std::vector<double>& s, long m, const ModelLaw& model,
                                       double fin_mass) {
    const auto cond = [&](double raw) {
        const double v = (raw - model.atom0) / fin_mass;
        return std::min(1.0, std::max(0.0, v));
    };
    std::vector<double> out(static_cast<std::size_t>(m));
    if (m <= 512) {
        for (long i = 0; i < m; ++i) out[std::size_t(i)] = cond(model.cdf(s[std::size_t(i)]));
        return out;
    }
    const long K = 513;
    std::vector<double> nodes;
    nodes.reserve(std::size_t(K));
    for (long j = 0; j < K; ++j) {
        const double v = s[std::size_t((j * (m - 1)) / (K - 1))];
        if (nodes.empty() || v > nodes.back()) nodes.push_back(v);
    }
    std::vector<double> vals(nodes.size());
    if (nodes.size() == 1) {
        vals[0] = model.cdf(nodes[0]);
    } else if (model.density) {
        const Tolerance tol{1e-10, 1e-7, 600};
        vals[0] = model.cdf(nodes[0]);
        for (std::size_t j = 1; j < nodes.size(); ++j) {
            const double inc = integrate_adaptive(model.density, nodes[j - 1], nodes[j], tol).value;
            vals[j] = std::max(vals[j - 1], vals[j - 1] + inc);
        }
    } else {
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            vals[j] = model.cdf(nodes[j]);
            if (j > 0) vals[j] = std::max(vals[j], vals[j - 1]);
        }
    }
    for (auto& v : vals) v = cond(v);
    if (nodes.size() == 1) {
        for (long i = 0; i < m; ++i) out[std::size_t(i)] = vals[0];
        return out;
    }
    const PchipTable table(nodes, vals);
    for (long i = 0; i < m; ++i)
        out[std::size_t(i)] = std::min(1.0, std::max(0.0, table(s[std::size_t(i)])));
    return out;
}

}  // namespace

CompareReport compare(const EmpiricalLaw& e, const ModelLaw& model) {
    if (!model.cdf) fail_domain("compare: model must provide a cdf");
    CompareReport r;
    r.n = e.n;
    r.atom_model = model.atom0;
    r.never_model = model.mass_never;
    r.atom_empirical = e.atom0_fraction();
    r.never_empirical = e.never_fraction();
    if (e.n > 0)
        r.atom_se = std::sqrt(r.atom_empirical * (1.0 - r.atom_empirical) / double(e.n));
    const long m = e.finite_count();
    if (m == 0) return r;
    const double fin_mass = 1.0 - model.atom0 - model.mass_never;
    if (fin_mass <= 0.0) fail_domain("compare: model puts no mass on finite positive times");

    const std::vector<double> fc = conditioned_cdf_at(e.samples, m, model, fin_mass);
    double ks = 0.0;
    for (long i = 0; i < m; ++i) {
        const double F = fc[std::size_t(i)];
        ks = std::max(ks, std::max(double(i + 1) / double(m) - F, F - double(i) / double(m)));
    }
    r.ks = ks;

    // conditional model moments from the same conditioned cdf: integral of
    // p t^{p-1} (1 - Fc) plus the tail mass parked at the largest sample
    const double smax = e.samples[std::size_t(m - 1)];
    const double smin = e.samples[0];
    PchipTable table;
    bool have_table = false;
    if (m > 2) {
        // reuse the sample-quantile evaluations as an interpolation table
        std::vector<double> xs, ys;
        for (long i = 0; i < m; ++i) {
            const double si = e.samples[std::size_t(i)];
            if (!xs.empty() && si <= xs.back()) continue;
            xs.push_back(si);
            ys.push_back(std::max(fc[std::size_t(i)], ys.empty() ? 0.0 : ys.back()));
        }
        if (xs.size() >= 2) {
            table = PchipTable(std::move(xs), std::move(ys));
            have_table = true;
        }
    }
    const auto Fc = [&](double t) -> double {
        if (t <= 0.0) return 0.0;
        double v;
        if (have_table) {
            if (t <= smin) {
                v = fc[0] * (t / smin);  // pinned to 0 at 0
            } else {
                v = table(t);
            }
        } else {
            v = (model.cdf(t) - model.atom0) / fin_mass;
        }
        return std::min(1.0, std::max(0.0, v));
    };
    const double fc_end = Fc(smax);
    for (double p : {1.0, 0.5}) {
        MomentCheck chk;
        chk.power = p;
        const auto g = [&](double t) { return p * std::pow(t, p - 1.0) * (1.0 - Fc(t)); };
        const Tolerance tol{1e-8, 1e-6, 1500};
        const QuadratureResult q = p == 1.0
                                       ? integrate_adaptive(g, 0.0, smax, tol)
                                       : integrate_sqrt_endpoints(g, 0.0, smax, tol, true, false);
        chk.model = q.value + (1.0 - fc_end) * std::pow(smax, p);
        chk.empirical = e.mean_power(p);
        chk.se = m >= 2 ? e.sd_power(p) / std::sqrt(double(m)) : 0.0;
        chk.zscore = chk.se > 0.0 ? (chk.empirical - chk.model) / chk.se : 0.0;
        r.moments.push_back(chk);
    }
    return r;
}

}  // namespace lpt
