#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "core/diffusion.hpp"
#include "core/numkernel.hpp"
#include "core/specfun.hpp"
#include "doctest.h"

using namespace lpt;

namespace {

// Probability mass of q(t,x,.) over the state interval, integrating the
// speed density explicitly.
double mass_of(const Diffusion& d, double t, double x) {
    double lo, hi;
    if (d.family == Family::bm_drift) {
        lo = x + d.mu * t - 40.0 * std::sqrt(t) - 5.0;
        hi = x + d.mu * t + 40.0 * std::sqrt(t) + 5.0;
    } else {
        lo = 0.0;
        double grow = d.family == Family::radial_ou ? std::exp(-d.gamma * t) : 1.0;
        hi = (x + d.drift_c * t + 30.0 * std::sqrt(t) + 10.0) * std::max(1.0, grow);
    }
    auto f = [&](double y) {
        double q = transition_q(d, t, x, y);
        // Where q has underflowed, the product with the (possibly huge)
        // speed density is genuinely negligible; avoid 0 * inf.
        return q == 0.0 ? 0.0 : q * speed_density(d, y);
    };
    return integrate_adaptive(f, lo, hi, Tolerance{1e-12, 1e-9, 20000}).value;
}

}  // namespace

TEST_CASE("make_diffusion: parameter validation and endpoint metadata") {
    CHECK_THROWS_AS(make_diffusion(Family::bessel, -1.0), Error);
    CHECK_THROWS_AS(make_diffusion(Family::bessel_drift, 0.0, 1.0), Error);
    CHECK_THROWS_AS(make_diffusion(Family::bessel_drift, 1.0, -0.5), Error);
    CHECK_THROWS_AS(make_diffusion(Family::radial_ou, 0.5, 0.0), Error);

    CHECK(make_diffusion(Family::bessel, 0.2).left_class == LeftClass::entrance_not_exit);
    CHECK(make_diffusion(Family::bessel, -0.3).left_class == LeftClass::reflecting);
    CHECK(make_diffusion(Family::reflected_bm).left_class == LeftClass::reflecting);
    CHECK(make_diffusion(Family::bm_drift, 1.0).left_class == LeftClass::natural);
    CHECK(make_diffusion(Family::bessel, 0.5).transient);
    CHECK(!make_diffusion(Family::bessel, -0.5).transient);
    CHECK(!make_diffusion(Family::bm_drift, 0.0).transient);
    CHECK(make_diffusion(Family::radial_ou, 0.5, -1.0).transient);
}

TEST_CASE("scale and speed: catalog normalizations") {
    Diffusion b = make_diffusion(Family::bessel, 0.5);
    CHECK(scale_derivative(b, 2.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(speed_density(b, 2.0) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(scale_s(b, 2.0) == doctest::Approx(-0.5).epsilon(1e-14));

    Diffusion bm = make_diffusion(Family::bm_drift, 0.7);
    CHECK(scale_derivative(bm, 1.0) == doctest::Approx(std::exp(-1.4)).epsilon(1e-14));
    CHECK(speed_density(bm, 1.0) == doctest::Approx(2.0 * std::exp(1.4)).epsilon(1e-14));
    CHECK(scale_s(bm, 30.0) > -1e-18);

    Diffusion ou = make_diffusion(Family::radial_ou, 0.5, -0.8);
    CHECK(scale_derivative(ou, 1.3) ==
          doctest::Approx(std::pow(1.3, -2.0) * std::exp(-0.8 * 1.69)).epsilon(1e-14));
    CHECK(speed_density(ou, 1.3) ==
          doctest::Approx(2.0 * std::pow(1.3, 2.0) * std::exp(0.8 * 1.69)).epsilon(1e-14));
}

TEST_CASE("scale_s: quadrature families differentiate back to scale_derivative") {
    for (auto d : {make_diffusion(Family::bessel_drift, 1.2, 0.7),
                   make_diffusion(Family::radial_ou, 0.5, -0.6)}) {
        for (double x : {0.8, 1.4, 2.5}) {
            double num = differentiate_central([&](double y) { return scale_s(d, y); }, x, 1.0);
            INFO("x=" << x);
            CHECK(num == doctest::Approx(scale_derivative(d, x)).epsilon(1e-7));
        }
    }
    CHECK_THROWS_AS(scale_s(make_diffusion(Family::radial_ou, 0.5, 0.4), 1.0), Error);
}

TEST_CASE("transition_q: pinned values") {
    for (double mu : {0.0, 1.0}) {
        Diffusion bm = make_diffusion(Family::bm_drift, mu);
        double v = transition_q(bm, 1.0, 0.0, 0.0) * std::exp(mu * mu / 2.0);
        CHECK(v == doctest::Approx(0.1994711402).epsilon(1e-9));
    }
    Diffusion b = make_diffusion(Family::bessel, 0.5);
    double limit = std::pow(2.0, -1.5) / std::tgamma(1.5) * std::exp(-0.5);
    CHECK(transition_q(b, 1.0, 0.0, 1.0) == doctest::Approx(limit).epsilon(1e-12));
    CHECK(std::abs(transition_q(b, 1.0, 0.0, 1.0) - 0.2419707245) < 1e-9);
    CHECK(transition_q(b, 1.0, 1e-7, 1.0) == doctest::Approx(limit).epsilon(1e-6));
    CHECK(transition_q(b, 1e-4, 1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(transition_q(b, 0.0, 1.0, 1.0), Error);

    // Printed radial OU kernel at y = 0.
    double nu = 0.7, gamma = -0.8, t = 0.9, y = 1.3;
    Diffusion ou = make_diffusion(Family::radial_ou, nu, gamma);
    double expected = std::pow(gamma / (2.0 * std::sinh(gamma * t)), nu + 1.0) *
                      std::exp(gamma * (nu + 1.0) * t) / std::tgamma(nu + 1.0) *
                      std::exp(-gamma * std::exp(-gamma * t) * y * y / (2.0 * std::sinh(gamma * t)));
    CHECK(transition_q(ou, t, y, 0.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("transition_q: symmetry in (x, y)") {
    std::vector<Diffusion> cat = {
        make_diffusion(Family::bm_drift, 1.3),   make_diffusion(Family::reflected_bm),
        make_diffusion(Family::bessel, 0.5),     make_diffusion(Family::bessel, -0.3),
        make_diffusion(Family::bessel_drift, 1.2, 0.7),
        make_diffusion(Family::radial_ou, 0.5, -0.6)};
    for (const auto& d : cat) {
        for (double t : {0.3, 1.7}) {
            for (auto [x, y] : {std::pair{0.4, 1.9}, {1.1, 2.6}, {0.05, 0.6}}) {
                double xx = d.family == Family::bm_drift ? x - 1.0 : x;
                double a = transition_q(d, t, xx, y), bq = transition_q(d, t, y, xx);
                INFO("t=" << t << " x=" << xx << " y=" << y);
                CHECK(std::abs(a - bq) <= 1e-9 * std::max(a, bq));
            }
        }
    }
}

TEST_CASE("transition_q: unit mass against the speed measure") {
    std::vector<Diffusion> cat = {
        make_diffusion(Family::bm_drift, 1.3),   make_diffusion(Family::reflected_bm),
        make_diffusion(Family::bessel, 0.5),     make_diffusion(Family::bessel, -0.3),
        make_diffusion(Family::bessel_drift, 1.2, 0.7),
        make_diffusion(Family::radial_ou, 0.5, -0.6)};
    for (const auto& d : cat) {
        for (double t : {0.5, 1.0, 2.0}) {
            for (double x : {0.7, 1.8}) {
                double xx = d.family == Family::bm_drift ? x - 1.5 : x;
                INFO("family=" << (int)d.family << " t=" << t << " x=" << xx);
                CHECK(mass_of(d, t, xx) == doctest::Approx(1.0).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("transition_q: Chapman-Kolmogorov spot checks") {
    Diffusion b = make_diffusion(Family::bessel, 0.5);
    double s = 0.3, t = 0.7, x = 0.8, y = 1.3;
    auto f = [&](double z) {
        return transition_q(b, s, x, z) * transition_q(b, t, z, y) * speed_density(b, z);
    };
    double conv = integrate_adaptive(f, 0.0, 40.0, Tolerance{1e-12, 1e-9, 20000}).value;
    CHECK(conv == doctest::Approx(transition_q(b, s + t, x, y)).epsilon(1e-5));

    Diffusion bm = make_diffusion(Family::bm_drift, 1.0);
    auto g = [&](double z) {
        return transition_q(bm, s, -0.2, z) * transition_q(bm, t, z, 0.5) * speed_density(bm, z);
    };
    double conv2 = integrate_adaptive(g, -40.0, 40.0, Tolerance{1e-12, 1e-9, 20000}).value;
    CHECK(conv2 == doctest::Approx(transition_q(bm, s + t, -0.2, 0.5)).epsilon(1e-5));
}

TEST_CASE("transition_q: Cameron-Martin tilt for BM with drift") {
    Diffusion bm0 = make_diffusion(Family::bm_drift, 0.0);
    double mu = 0.8;
    Diffusion bmu = make_diffusion(Family::bm_drift, mu);
    for (double t : {0.4, 1.0, 2.3}) {
        for (auto [x, y] : {std::pair{-0.5, 0.7}, {0.2, 1.4}, {1.0, -1.0}}) {
            double tilt = std::exp(mu * (y - x) - mu * mu * t / 2.0) *
                          speed_density(bm0, y) / speed_density(bmu, y);
            double lhs = transition_q(bmu, t, x, y);
            double rhs = transition_q(bm0, t, x, y) * tilt;
            INFO("t=" << t << " x=" << x << " y=" << y);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        }
    }
}

TEST_CASE("radial OU kernel agrees with the Bessel time change") {
    double nu = 0.5, gamma = -0.7;
    Diffusion ou = make_diffusion(Family::radial_ou, nu, gamma);
    Diffusion b = make_diffusion(Family::bessel, nu);
    auto tau = [gamma](double t) { return (std::exp(2.0 * gamma * t) - 1.0) / (2.0 * gamma); };
    for (double t : {0.4, 1.1}) {
        for (auto [x, y] : {std::pair{0.6, 1.2}, {1.5, 0.3}}) {
            double via_tc = transition_q(b, tau(t), x, y * std::exp(gamma * t)) *
                            std::exp((2.0 * nu + 2.0) * gamma * t) *
                            std::exp(gamma * y * y);
            double direct = transition_q(ou, t, x, y);
            INFO("t=" << t << " x=" << x << " y=" << y);
            CHECK(direct == doctest::Approx(via_tc).epsilon(1e-9));
        }
        double via0 = transition_q(b, tau(t), 1.0, 1e-9 * std::exp(gamma * t)) *
                      std::exp((2.0 * nu + 2.0) * gamma * t);
        CHECK(transition_q(ou, t, 1.0, 0.0) == doctest::Approx(via0).epsilon(1e-7));
    }
}

TEST_CASE("resolvent_u: Bessel(1/2) closed forms") {
    Diffusion b = make_diffusion(Family::bessel, 0.5);
    CHECK(resolvent_u(b, 0.5, 0.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
    CHECK(std::abs(resolvent_u(b, 0.5, 0.0, 1.0) - 0.3678794412) < 1e-6);
    CHECK(resolvent_u(b, 0.0, 0.0, 2.0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(resolvent_u(b, 1.0, 0.0, 1.0) < resolvent_u(b, 0.5, 0.0, 1.0));
    // General closed form e^{-sqrt(2 lam) y}/y away from the endpoint too:
    // u_lam(x,y) for x < y is s-harmonic in x; spot-check the x = 0 column.
    for (double y : {0.5, 3.0}) {
        double lam = 0.8;
        CHECK(resolvent_u(b, lam, 0.0, y) ==
              doctest::Approx(std::exp(-std::sqrt(2.0 * lam) * y) / y).epsilon(1e-6));
    }
    CHECK_THROWS_AS(resolvent_u(make_diffusion(Family::reflected_bm), 0.0, 0.5, 1.0), Error);
    CHECK_THROWS_AS(resolvent_u(b, -1.0, 0.0, 1.0), Error);
}

TEST_CASE("biane_transform: Bessel(1/2) closed form and monotonicity") {
    Diffusion b = make_diffusion(Family::bessel, 0.5);
    BianeTransform bt = biane_transform(b);
    for (double x : {0.5, 1.2, 3.0}) {
        CHECK(bt.speed_density(x) == doctest::Approx(4.0 / 9.0 * std::pow(x, 4.0)).epsilon(1e-12));
        CHECK(bt.scale_function(x) == doctest::Approx(-1.5 * std::pow(x, -3.0)).epsilon(1e-12));
    }
    double prev = bt.scale_function(0.1);
    for (double x = 0.2; x < 4.0; x += 0.1) {
        double v = bt.scale_function(x);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(biane_transform(make_diffusion(Family::bm_drift, 0.0)), Error);
}

TEST_CASE("dual_under_inversion: examples and involution") {
    Diffusion bm0 = make_diffusion(Family::bm_drift, 0.0);
    auto d1 = dual_under_inversion(bm0, 0.0);
    CHECK(d1.d.family == Family::bm_drift);
    CHECK(d1.d.mu == 0.0);
    CHECK(d1.start == 0.0);

    Diffusion bd = make_diffusion(Family::bessel_drift, 1.0, 2.0);
    auto d2 = dual_under_inversion(bd, 3.0);
    CHECK(d2.d.family == Family::bessel_drift);
    CHECK(d2.d.nu == 1.0);
    CHECK(d2.d.drift_c == 3.0);
    CHECK(d2.start == 2.0);
    auto back = dual_under_inversion(d2.d, d2.start);
    CHECK(back.d.drift_c == bd.drift_c);
    CHECK(back.start == 3.0);

    auto d3 = dual_under_inversion(make_diffusion(Family::bessel, 1.0), 3.0);
    CHECK(d3.d.family == Family::bessel_drift);
    CHECK(d3.d.drift_c == 3.0);
    CHECK(d3.start == 0.0);

    CHECK_THROWS_AS(dual_under_inversion(make_diffusion(Family::reflected_bm), 1.0), Error);
    CHECK_THROWS_AS(dual_under_inversion(bm0, 1.0), Error);
}

TEST_CASE("bessel_drift with c = 0 degenerates to the plain Bessel family") {
    Diffusion bd = make_diffusion(Family::bessel_drift, 1.2, 0.0);
    Diffusion b = make_diffusion(Family::bessel, 1.2);
    for (double x : {0.3, 1.0, 2.4}) {
        CHECK(scale_derivative(bd, x) == doctest::Approx(scale_derivative(b, x)).epsilon(1e-13));
        CHECK(speed_density(bd, x) == doctest::Approx(speed_density(b, x)).epsilon(1e-13));
        CHECK(transition_q(bd, 0.8, x, 1.1) ==
              doctest::Approx(transition_q(b, 0.8, x, 1.1)).epsilon(1e-13));
    }
}

TEST_CASE("bessel_drift kernel: drift factor stays stable at large arguments") {
    Diffusion bd = make_diffusion(Family::bessel_drift, 0.5, 2.0);
    // Unit mass far from the origin exercises the scaled Bessel ratios.
    CHECK(mass_of(bd, 1.5, 40.0) == doctest::Approx(1.0).epsilon(1e-6));
    double v = transition_q(bd, 0.5, 50.0, 51.0);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
}
