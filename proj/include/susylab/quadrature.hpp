#pragma once

// Adaptive Gauss-Kronrod 7/15 quadrature for complex-valued integrands on
// finite intervals, half-lines (tan substitution) and the real line against
// the standard Cauchy weight, plus periodic trapezoid rules for angular
// integrals. Panels are split worst-error-first and the final sum runs over
// panels sorted by position, so results are bit-stable for a given integrand.

#include <complex>
#include <functional>
#include <span>

namespace susylab::quadrature {

using cplx = std::complex<double>;
using Integrand = std::function<cplx(double)>;

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;   // absolute floor: integrals near zero stop here
    int max_panels = 4000;
};

struct QuadResult {
    cplx value{0.0, 0.0};
    double error = 0.0;       // estimated absolute error
    long evals = 0;
    bool converged = false;

    QuadResult& operator+=(const QuadResult& rhs) {
        value += rhs.value;
        error += rhs.error;
        evals += rhs.evals;
        converged = converged && rhs.converged;
        return *this;
    }
};

// Adaptive G7K15 on [a, b].
QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& opt = {});

// Same, with interior breakpoints (kinks, region edges) seeding the panels.
// Points outside (a, b) are ignored.
QuadResult integrate(const Integrand& f, double a, double b,
                     std::span<const double> breakpoints, const QuadOptions& opt = {});

// int_lo^inf f(r) dr via r = tan(u). f must decay; breakpoints are in r.
QuadResult integrate_from(const Integrand& f, double lo, const QuadOptions& opt = {});
QuadResult integrate_from(const Integrand& f, double lo,
                          std::span<const double> breakpoints, const QuadOptions& opt = {});

// E_mu[f] for mu = standard Cauchy: pi^{-1} int f(tan t) dt over (-pi/2, pi/2).
QuadResult cauchy_expectation(const Integrand& f, const QuadOptions& opt = {});

// Plain n-node trapezoid over the period [0, 2pi); exact for trigonometric
// polynomials of degree < n.
cplx trapezoid_periodic(const Integrand& f, int n);

// Node-doubling trapezoid starting from n0 nodes until two successive levels
// agree within tolerance.
QuadResult trapezoid_periodic_adaptive(const Integrand& f, const QuadOptions& opt = {},
                                       int n0 = 64, int max_n = 1 << 16);

}
