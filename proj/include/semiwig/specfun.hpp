#pragma once

#include "semiwig/common.hpp"

namespace semiwig::specfun {

struct SpecFunAccuracy {
    double target_abs_error = 1e-10;
    // Maclaurin series below this |x|, standard asymptotic expansions beyond.
    // At 7.0 the series still carries ~1e-12 absolute error while the
    // asymptotic remainder has dropped below the target on both axes.
    double switch_radius = 7.0;
};

// Airy function of the first kind and its derivative, real arguments.
// Absolute error <= target over |x| <= 50. No Bi, no complex arguments.
double airy_ai(double x, const SpecFunAccuracy& acc = {});
double airy_ai_prime(double x, const SpecFunAccuracy& acc = {});

// L2-normalized n-th harmonic-oscillator eigenfunction at x for H = (p^2+x^2)/2,
// i.e. phi_n(x) = (pi*hbar)^{-1/4} (2^n n!)^{-1/2} H_n(x/sqrt(hbar)) e^{-x^2/2hbar}.
// Scaled three-term recurrence with explicit exponent bookkeeping, so it is
// overflow- and underflow-safe for n up to 1e5 anywhere on the axis.
double hermite_state(int n, double x, double hbar);

// Laguerre polynomial L_n(x), forward recurrence.
double laguerre(int n, double x);

// L_n(x) * exp(-x/2) with internal exponent tracking; safe where the plain
// product would underflow or overflow intermediate terms.
double laguerre_scaled(int n, double x);

}  // namespace semiwig::specfun
