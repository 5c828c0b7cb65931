// Special functions backing the closed-form laws: modified and ordinary
// Bessel functions with their zeros, Airy functions, the parabolic cylinder
// function of negative index, and the Whittaker M function.  Everything is
// evaluated from series, asymptotic expansions, or integral representations;
// no external special-function library is linked.
#pragma once

#include <vector>

namespace lpt {

// Ordered zeros of an oscillatory function.  For Bessel J these are the
// positive zeros j_{nu,k} in increasing order; for Airy Ai the negative
// zeros in decreasing order.  order_nu is 0 where no order applies.
struct ZeroTable {
    double order_nu = 0.0;
    std::vector<double> zeros;
    int count = 0;
};

// Modified Bessel function of the first kind I_nu(z), nu > -1, z >= 0.
// Power series for z <= 30, large-argument asymptotic expansion beyond.
double bessel_i(double nu, double z);

// exp(-z) I_nu(z), safe for large z.
double bessel_i_scaled(double nu, double z);

// Macdonald function K_nu(z), z > 0, any real nu (K_{-nu} = K_nu).
// Evaluated from the integral representation over exp(-z cosh u) cosh(nu u).
double bessel_k(double nu, double z);

// exp(z) K_nu(z), safe for large z.
double bessel_k_scaled(double nu, double z);

// Bessel function of the first kind J_nu(z), nu > -1, z >= 0.
double bessel_j(double nu, double z);

// First n positive zeros of J_nu, located from McMahon guesses and refined
// by bracketed root finding.  Fails naming k if a bracket cannot be found.
ZeroTable bessel_j_zeros(double nu, int n);

// Airy function Ai and its derivative on the whole real line.  Maclaurin
// series on (-7.2, 5), Bessel-K route for z >= 5, modulus-phase asymptotics
// for z <= -7.2 (accuracy improves as z decreases).
double airy_ai(double z);
double airy_ai_prime(double z);

// First n negative zeros of Ai, in decreasing order.
ZeroTable airy_zeros(int n);

// Parabolic cylinder function of negative index, D_{-nu}(z) for nu > 0,
// from the defining integral e^{-z^2/4}/Gamma(nu) int_0^inf u^{nu-1}
// exp(-u^2/2 - z u) du.
double pcf_d(double nu, double z);

// Whittaker function M_{kappa,mu}(z) = e^{-z/2} z^{mu+1/2}
// 1F1(mu-kappa+1/2; 1+2mu; z), mu > -1/2, z > 0.
double whittaker_m(double kappa, double mu, double z);

// Gamma function; fails on nonpositive-integer poles.
double gamma_fn(double x);

// Error function and complement.
double erf_fn(double x);
double erfc_fn(double x);

// Standard normal distribution function.
double normal_cdf(double x);

}  // namespace lpt
