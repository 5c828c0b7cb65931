// Monte Carlo oracle: exact-transition path simulation for the diffusion
// catalog, last-passage and first-hitting samplers against a boundary, and
// the Kolmogorov-Smirnov / moment comparison against an analytic law.
// Counter-based RNG, one stream per path, so runs are bit-reproducible for
// a fixed (seed, n_paths, dt) no matter how many worker threads execute.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "law.hpp"
#include "transforms.hpp"

namespace lpt {

// Philox4x32-10 stream keyed by (seed, stream index).  uniform() draws in
// (0, 1], never 0, so logs are safe; normal() is the trigonometric
// Box-Muller pair; gamma(shape) is Marsaglia-Tsang with the shape < 1 boost
// and the exponential shortcut at shape 1.  Rejection loops draw a variable
// number of words, which is fine because no stream is shared across paths.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint32_t next32();
    std::uint64_t next64();
    double uniform();
    double normal();
    double gamma(double shape);

    // One keyed block: the raw generator, exposed for known-answer tests.
    static void block(const std::uint32_t ctr[4], const std::uint32_t key[2], std::uint32_t out[4]);

private:
    void refill();
    std::uint32_t ctr_[4];
    std::uint32_t key_[2];
    std::uint32_t out_[4];
    int idx_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Exact squared-Bessel transition of dimension delta >= 1 over a step h:
// (sqrt(z) + sqrt(h) N)^2 plus an independent h * chi^2_{delta-1}.
double besq_step(CounterRng& rng, double z, double delta, double h);

struct SimConfig {
    long n_paths = 10000;
    double dt = 1e-3;       // base grid step, at most horizon / 100
    double horizon = 50.0;  // hard cutoff; paths unresolved here count against the 0.1% budget
    std::uint64_t seed = 1;
    bool bridge_correction = true;  // within-step crossing detection for grid-straddling excursions
    bool force_euler = false;       // diagnostic: Euler-Maruyama even where an exact scheme exists
};

// Sample set for one passage functional.  samples holds the finite times
// sorted ascending followed by any +infinity entries (paths that provably
// never cross); paths whose time is exactly zero sit in atom0_count instead.
struct EmpiricalLaw {
    std::vector<double> samples;
    long n = 0;  // samples.size() + atom0_count
    long atom0_count = 0;
    std::uint64_t seed = 0;

    long finite_count() const;
    double atom0_fraction() const;
    double never_fraction() const;
    double mean_power(double p) const;  // mean of s^p over finite samples
    double sd_power(double p) const;    // sample standard deviation of s^p
};

// Last time the path meets the boundary before the boundary dies.  A path is
// resolved once it reaches a finite zeta, or escapes: exceeds the boundary's
// future envelope by a margin from which the return probability is below
// 1e-4 (scale-function ratio on the transient side, slope-times-gap bound
// under a rising boundary).  Unresolved paths beyond 0.1% raise an error
// asking for a larger horizon.
EmpiricalLaw sample_last_passage(const Diffusion& d, const Boundary& b, double x,
                                 const SimConfig& cfg);

// First time the path meets the boundary; never-hit paths become +infinity
// entries.  With bridge_correction, a step staying on one side still hits
// within the step with probability exp(-2 g0 g1 / h).
EmpiricalLaw sample_first_hitting(const Diffusion& d, const Boundary& b, double x,
                                  const SimConfig& cfg);

// Analytic side of a comparison: full distribution function (including any
// atom at zero), the atom mass itself, and any mass at +infinity.  density,
// when provided, speeds up the internal cdf tabulation for large samples.
struct ModelLaw {
    std::function<double(double)> cdf;
    std::function<double(double)> density;  // optional
    double atom0 = 0.0;
    double mass_never = 0.0;
};

ModelLaw model_from_lastpass(const LastPassageLaw& law);
ModelLaw model_from_hitting(const HittingLaw& law);

struct MomentCheck {
    double power = 1.0;
    double model = 0.0;      // conditional on a finite time
    double empirical = 0.0;
    double se = 0.0;         // standard error of the empirical mean
    double zscore = 0.0;     // (empirical - model) / se
};

struct CompareReport {
    double ks = 0.0;  // two-sided KS, both sides conditioned on finite samples
    long n = 0;
    double atom_model = 0.0;
    double atom_empirical = 0.0;
    double atom_se = 0.0;  // binomial standard error of the empirical fraction
    double never_model = 0.0;
    double never_empirical = 0.0;
    std::vector<MomentCheck> moments;  // powers 1 and 1/2
};

CompareReport compare(const EmpiricalLaw& e, const ModelLaw& model);

}  // namespace lpt
