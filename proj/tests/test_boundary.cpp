#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "core/boundary.hpp"
#include "core/diffusion.hpp"
#include "core/numkernel.hpp"
#include "doctest.h"

using namespace lpt;

namespace {

// Test-side inverse of a strictly decreasing map by bisection.
double invert_decreasing(const std::function<double(double)>& phi, double target, double lo,
                         double hi) {
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (phi(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("make_explicit: lifetimes, values, validation") {
    Boundary ld = make_explicit(BoundaryShape::line_down, 2.0, 1.0);
    CHECK(ld.zeta == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(ld.kind == BoundaryKind::lower);
    CHECK(ld.f(0.5) == doctest::Approx(1.5));

    Boundary so = make_explicit(BoundaryShape::sqrt_ou, 1.0, -0.25);
    CHECK(so.zeta == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(so.f(1.5) == doctest::Approx(std::sqrt(0.25)));

    CHECK(std::isinf(make_explicit(BoundaryShape::parabola, 1.0, 2.0).zeta));
    CHECK(std::isinf(make_explicit(BoundaryShape::constant, 1.0).zeta));
    CHECK(make_explicit(BoundaryShape::line_up, 1.0, 2.0).kind == BoundaryKind::upper);
    CHECK(make_explicit(BoundaryShape::sqrt_quad, 2.0, 3.0).f(2.0) ==
          doctest::Approx(std::sqrt(14.0)));

    CHECK_THROWS_AS(make_explicit(BoundaryShape::line_down, -1.0, 1.0), Error);
    CHECK_THROWS_AS(make_explicit(BoundaryShape::line_up, 1.0, 0.0), Error);
    CHECK_THROWS_AS(make_explicit(BoundaryShape::sqrt_ou, 1.0, 0.3), Error);
    CHECK_THROWS_AS(make_explicit(BoundaryShape::sqrt_quad, 0.0, 1.0), Error);
}

TEST_CASE("make_explicit: analytic derivatives match numerical ones") {
    std::vector<Boundary> bs = {make_explicit(BoundaryShape::line_down, 2.0, 1.0),
                                make_explicit(BoundaryShape::line_up, 1.0, 0.7),
                                make_explicit(BoundaryShape::sqrt_ou, 1.5, -0.2),
                                make_explicit(BoundaryShape::parabola, 1.0, 0.5),
                                make_explicit(BoundaryShape::sqrt_line, 1.0, 0.8),
                                make_explicit(BoundaryShape::sqrt_quad, 1.2, 0.9)};
    for (const auto& b : bs) {
        for (double t : {0.3, 0.9, 1.6}) {
            if (t >= b.zeta) continue;
            double num = differentiate_central(b.f, t, 0.25);
            INFO(b.description << " at t=" << t);
            CHECK(b.fprime(t) == doctest::Approx(num).epsilon(1e-8));
        }
    }
}

TEST_CASE("shift: exact translation, composition, domain") {
    Boundary ld = make_explicit(BoundaryShape::line_down, 2.0, 1.0);
    Boundary s = shift(ld, 0.5);
    CHECK(s.zeta == doctest::Approx(1.5));
    CHECK(s.f(0.3) == doctest::Approx(2.0 - 1.0 * 0.8).epsilon(1e-15));
    CHECK(s.fprime(0.3) == doctest::Approx(-1.0));

    // Translated square-root shape re-expressed in its own shape family.
    double a = 1.3, g = -0.2, t0 = 0.7;
    Boundary so = make_explicit(BoundaryShape::sqrt_ou, a, g);
    Boundary ss = shift(so, t0);
    double a2 = a * std::sqrt(1.0 + 2.0 * g * t0), g2 = g / (1.0 + 2.0 * g * t0);
    for (double u : {0.0, 0.4, 1.1}) {
        CHECK(ss.f(u) == doctest::Approx(a2 * std::sqrt(1.0 + 2.0 * g2 * u)).epsilon(1e-14));
    }

    Boundary s2 = shift(shift(ld, 0.5), 0.7);
    Boundary s12 = shift(ld, 1.2);
    for (double u : {0.0, 0.3, 0.7}) CHECK(s2.f(u) == doctest::Approx(s12.f(u)).epsilon(1e-15));
    CHECK(s2.zeta == doctest::Approx(s12.zeta));

    CHECK(shift(ld, 0.0).f(0.9) == doctest::Approx(ld.f(0.9)));
    CHECK_THROWS_AS(shift(ld, 2.0), Error);
    CHECK_THROWS_AS(shift(ld, 2.5), Error);
}

TEST_CASE("invert_time: catalog images and involution") {
    Boundary par = make_explicit(BoundaryShape::parabola, 1.0, 0.5);
    Boundary pinv = invert_time(par);
    for (double t : {0.2, 1.0, 3.0})
        CHECK(pinv.f(t) == doctest::Approx(1.0 * t + 0.5 / t).epsilon(1e-14));

    Boundary lu = make_explicit(BoundaryShape::line_up, 1.0, 2.0);
    Boundary linv = invert_time(lu);
    for (double t : {0.2, 1.0, 3.0})
        CHECK(linv.f(t) == doctest::Approx(2.0 + 1.0 * t).epsilon(1e-14));

    Boundary sq = make_explicit(BoundaryShape::sqrt_quad, 1.5, 0.8);
    Boundary sinv = invert_time(sq);
    for (double t : {0.2, 1.0, 3.0})
        CHECK(sinv.f(t) == doctest::Approx(std::sqrt(1.5 + 0.8 * t)).epsilon(1e-14));

    for (const auto& b : {par, lu, sq}) {
        Boundary twice = invert_time(invert_time(b));
        for (double t : {0.3, 1.0, 2.7}) {
            CHECK(twice.f(t) == doctest::Approx(b.f(t)).epsilon(1e-12));
            CHECK(twice.fprime(t) == doctest::Approx(b.fprime(t)).epsilon(1e-12));
        }
    }

    CHECK_THROWS_AS(invert_time(make_explicit(BoundaryShape::line_down, 2.0, 1.0)), Error);
}

TEST_CASE("implicit_from_resolvent: Bessel(3) two-atom example") {
    double a = 1.2, b = 0.8;
    Diffusion d = make_diffusion(Family::bessel, 0.5);
    Boundary f = implicit_from_resolvent(d, AtomicMeasure{{0.0, b}, {a, 1.0}}, false);
    CHECK(std::isinf(f.zeta));
    CHECK(f.kind == BoundaryKind::lower);

    auto phi = [&](double y) { return -(std::sqrt(2.0 * b) * y + std::log(y - a)) / b; };
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {0.0, 0.4, 1.0, 2.5, 6.0}) {
        double expect = invert_decreasing(phi, t, a + 1e-13, a + 50.0);
        INFO("t=" << t);
        CHECK(f.f(t) == doctest::Approx(expect).epsilon(1e-9));
        // residual of the defining equation, closed-form resolvent route
        double y = f.f(t);
        double hbar = a / y + std::exp(-b * t - std::sqrt(2.0 * b) * y) / y;
        CHECK(std::abs(hbar - 1.0) < 1e-10);
        CHECK(y < prev);
        prev = y;
    }
    CHECK(std::abs(f.f(12.0) - a) < 1e-3);
}

TEST_CASE("implicit_from_resolvent: drifting Brownian two-atom example") {
    double mu = 0.7, a = 1.5, b = 0.6;
    double root = std::sqrt(2.0 * b + mu * mu);
    Diffusion d = make_diffusion(Family::bm_drift, mu);
    Boundary f =
        implicit_from_resolvent(d, AtomicMeasure{{0.0, b}, {2.0 * mu * a, 2.0 * root}}, false);
    auto phi = [&](double y) {
        return -((root + mu) * y + std::log(1.0 - a * std::exp(-2.0 * mu * y))) / b;
    };
    double lim = std::log(a) / (2.0 * mu);
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {0.0, 0.5, 1.3, 3.0, 7.0}) {
        double expect = invert_decreasing(phi, t, lim + 1e-13, lim + 60.0);
        INFO("t=" << t);
        CHECK(f.f(t) == doctest::Approx(expect).epsilon(1e-8));
        double y = f.f(t);
        double hbar = a * std::exp(-2.0 * mu * y) + std::exp(-b * t - (root + mu) * y);
        CHECK(std::abs(hbar - 1.0) < 1e-10);
        CHECK(y < prev);
        prev = y;
    }
    CHECK(std::abs(f.f(25.0) - lim) < 1e-3);
}

TEST_CASE("implicit_from_resolvent: cached evaluation tracks the direct solve") {
    Diffusion d = make_diffusion(Family::bessel, 0.5);
    AtomicMeasure F{{0.0, 0.8}, {1.2, 1.0}};
    Boundary direct = implicit_from_resolvent(d, F, false);
    Boundary cached = implicit_from_resolvent(d, F, true);
    for (double t : {0.013, 0.4, 1.07, 3.9, 11.0, 210.0}) {
        INFO("t=" << t);
        CHECK(cached.f(t) == doctest::Approx(direct.f(t)).epsilon(2e-7));
    }
    CHECK_THROWS_AS(
        implicit_from_resolvent(make_diffusion(Family::bm_drift, 0.0), AtomicMeasure{{0.0}, {1.0}}),
        Error);
    CHECK_THROWS_AS(implicit_from_resolvent(d, AtomicMeasure{{0.5}, {-1.0}}), Error);
    CHECK_THROWS_AS(implicit_from_resolvent(d, AtomicMeasure{{}, {}}), Error);
}

TEST_CASE("implicit_from_density_level: Bessel closed form") {
    double nu = 0.5, zeta = 2.0, alpha = 0.3;
    Diffusion d = make_diffusion(Family::bessel, nu);
    double c = alpha * transition_q(d, zeta, 0.0, 0.0);
    Boundary f = implicit_from_density_level(d, zeta, c);
    CHECK(f.zeta == zeta);
    for (double t : {0.0, 0.5, 1.0, 1.7, 1.95}) {
        double expect =
            std::sqrt(-2.0 * (zeta - t) * std::log(alpha * std::pow(1.0 - t / zeta, nu + 1.0)));
        INFO("t=" << t);
        CHECK(f.f(t) == doctest::Approx(expect).epsilon(1e-10));
        CHECK(std::abs(transition_q(d, zeta - t, f.f(t), 0.0) - c) < 1e-10 * c);
    }
    CHECK_THROWS_AS(f.f(2.0), Error);
    CHECK_THROWS_AS(implicit_from_density_level(d, zeta, 2.0 * transition_q(d, zeta, 0.0, 0.0)),
                    Error);
    CHECK_THROWS_AS(implicit_from_density_level(make_diffusion(Family::bm_drift, 1.0), 1.0, 0.1),
                    Error);
}

TEST_CASE("implicit_from_density_level: squared-OU-radial closed form") {
    double nu = 0.5, gamma = -0.6, zeta = 1.5, alpha = 0.4;
    Diffusion d = make_diffusion(Family::radial_ou, nu, gamma);
    double c = alpha * transition_q(d, zeta, 0.0, 0.0);
    Boundary f = implicit_from_density_level(d, zeta, c);
    for (double t : {0.0, 0.3, 0.8, 1.2, 1.45}) {
        double s = zeta - t;
        double arg = alpha * std::pow(std::sinh(gamma * s) / std::sinh(gamma * zeta), nu + 1.0) *
                     std::exp(gamma * (nu + 1.0) * t);
        double expect =
            std::sqrt(-(2.0 / gamma) * std::sinh(gamma * s) * std::exp(gamma * s) * std::log(arg));
        INFO("t=" << t);
        CHECK(f.f(t) == doctest::Approx(expect).epsilon(1e-8));
        CHECK(std::abs(transition_q(d, s, f.f(t), 0.0) - c) < 1e-10 * c);
    }
}

TEST_CASE("implicit_from_kernel: exponential mixture reproduces the resolvent curve") {
    Diffusion d = make_diffusion(Family::bessel, 0.5);
    double a = 1.2, b = 0.8;
    AtomicMeasure F{{0.0, b}, {a, 1.0}};
    Boundary ref = implicit_from_resolvent(d, F, false);
    Boundary ker = implicit_from_kernel(
        d, [a, b](double u) { return a + std::exp(-b * u); }, false);
    for (double t : {0.1, 0.7, 2.0}) {
        INFO("t=" << t);
        CHECK(ker.f(t) == doctest::Approx(ref.f(t)).epsilon(1e-6));
    }
}

TEST_CASE("implicit_from_kernel: constant kernel gives a constant boundary") {
    Diffusion d = make_diffusion(Family::bessel, 0.5);
    Boundary f = implicit_from_kernel(d, [](double) { return 2.0; }, false);
    std::vector<double> vals;
    for (double t : {0.2, 0.9, 1.7, 3.1}) vals.push_back(f.f(t));
    double mean = 0.0;
    for (double v : vals) mean += v / vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean) / vals.size();
    CHECK(var <= 1e-8);
    // kappa * u_0(0, f) = 1 with u_0(0, y) = 1/y here, so f = kappa.
    CHECK(mean == doctest::Approx(2.0).epsilon(1e-8));
    CHECK_THROWS_AS(implicit_from_kernel(make_diffusion(Family::bessel, -0.3),
                                         [](double) { return 1.0; }),
                    Error);
}
