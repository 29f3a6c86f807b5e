#include "semiwig/specfun.hpp"

#include <cmath>

namespace semiwig::specfun {

namespace {

// Ai(x) = c1 f(x) - c2 g(x), the standard Maclaurin pair
//   f(x) = sum 3^k (1/3)_k x^{3k} / (3k)!,  g(x) = sum 3^k (2/3)_k x^{3k+1} / (3k+1)!
// evaluated in long double to keep cancellation on the positive axis benign.
constexpr double AI0 = 0.35502805388781723926;    // 3^{-2/3} / Gamma(2/3)
constexpr double AIP0 = -0.25881940379280679841;  // -3^{-1/3} / Gamma(1/3)

void airy_series(double x, double& ai, double& aip) {
    const long double xl = x;
    const long double x3 = xl * xl * xl;
    long double f = 1.0L, fp = 0.0L;     // f and f'
    long double g = xl, gp = 1.0L;       // g and g'
    long double tf = 1.0L, tg = xl;      // running terms of f, g
    for (int k = 0; k < 120; ++k) {
        const long double d1 = (3.0L * k + 2.0L) * (3.0L * k + 3.0L);
        const long double d2 = (3.0L * k + 3.0L) * (3.0L * k + 4.0L);
        tf *= x3 / d1;
        tg *= x3 / d2;
        f += tf;
        g += tg;
        fp += tf * (3.0L * k + 3.0L) / xl;  // d/dx of x^{3k+3} term
        gp += tg * (3.0L * k + 4.0L) / xl;
        if (std::abs((double)tf) < 1e-20 && std::abs((double)tg) < 1e-20) break;
    }
    // x == 0 handled by the caller; fp/gp above divide by x.
    const long double c1 = AI0, c2 = -AIP0;
    ai = (double)(c1 * f - c2 * g);
    aip = (double)(c1 * fp - c2 * gp);
}

// Asymptotic u_k coefficients (Abramowitz & Stegun 10.4.59), 15 terms.
struct AiryAsym {
    double u[16], v[16];
    AiryAsym() {
        u[0] = v[0] = 1.0;
        for (int k = 1; k <= 15; ++k) {
            u[k] = u[k - 1] * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
                   ((2.0 * k - 1.0) * 216.0 * k);
            v[k] = u[k] * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
        }
    }
};
const AiryAsym& asym() {
    static AiryAsym a;
    return a;
}

// Sum u_k / zeta^k with alternating sign option, truncated at the smallest term.
double asym_sum(const double* c, double zeta, int parity /*0: all, 1: even, 2: odd*/,
                bool alternate) {
    double s = 0.0, prev = 1e300;
    double zk = 1.0;
    int emitted = 0;
    for (int k = 0; k <= 15; ++k) {
        double term = c[k] / zk;
        zk *= zeta;
        bool take = (parity == 0) || (parity == 1 && k % 2 == 0) || (parity == 2 && k % 2 == 1);
        if (!take) continue;
        double mag = std::abs(term);
        if (mag > prev) break;  // past optimal truncation
        double sign = 1.0;
        if (alternate && ((parity == 0 && k % 2 == 1) || (parity != 0 && (k / 2) % 2 == 1)))
            sign = -1.0;
        s += sign * term;
        prev = mag;
        ++emitted;
        (void)emitted;
    }
    return s;
}

}  // namespace

double airy_ai(double x, const SpecFunAccuracy& acc) {
    if (x == 0.0) return AI0;
    if (std::abs(x) <= acc.switch_radius) {
        double ai, aip;
        airy_series(x, ai, aip);
        return ai;
    }
    const auto& a = asym();
    if (x > 0) {
        const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
        const double pref = std::exp(-zeta) / (2.0 * std::sqrt(M_PI) * std::pow(x, 0.25));
        return pref * asym_sum(a.u, zeta, 0, /*alternate=*/true);
    }
    const double t = -x;
    const double zeta = 2.0 / 3.0 * t * std::sqrt(t);
    const double pref = 1.0 / (std::sqrt(M_PI) * std::pow(t, 0.25));
    // Ai(-t) = pref [ cos(zeta - pi/4) * P(zeta) + sin(zeta - pi/4) * Q(zeta) ]
    const double P = asym_sum(a.u, zeta, 1, true);
    double Q = 0.0;
    {
        // odd-index u_k with alternating sign: u1/z - u3/z^3 + ...
        double zk = zeta, prev = 1e300;
        for (int k = 1; k <= 15; k += 2) {
            double term = a.u[k] / zk;
            zk *= zeta * zeta;
            if (std::abs(term) > prev) break;
            Q += (((k - 1) / 2) % 2 == 0 ? term : -term);
            prev = std::abs(term);
        }
    }
    const double th = zeta - 0.25 * M_PI;
    return pref * (std::cos(th) * P + std::sin(th) * Q);
}

double airy_ai_prime(double x, const SpecFunAccuracy& acc) {
    if (x == 0.0) return AIP0;
    if (std::abs(x) <= acc.switch_radius) {
        double ai, aip;
        airy_series(x, ai, aip);
        return aip;
    }
    const auto& a = asym();
    if (x > 0) {
        const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
        const double pref = -std::pow(x, 0.25) * std::exp(-zeta) / (2.0 * std::sqrt(M_PI));
        return pref * asym_sum(a.v, zeta, 0, true);
    }
    const double t = -x;
    const double zeta = 2.0 / 3.0 * t * std::sqrt(t);
    const double pref = std::pow(t, 0.25) / std::sqrt(M_PI);
    const double P = asym_sum(a.v, zeta, 1, true);
    double Q = 0.0;
    {
        double zk = zeta, prev = 1e300;
        for (int k = 1; k <= 15; k += 2) {
            double term = a.v[k] / zk;
            zk *= zeta * zeta;
            if (std::abs(term) > prev) break;
            Q += (((k - 1) / 2) % 2 == 0 ? term : -term);
            prev = std::abs(term);
        }
    }
    const double th = zeta - 0.25 * M_PI;
    // Ai'(-t) = pref [ sin(zeta - pi/4) * P - cos(zeta - pi/4) * Q ]
    return pref * (std::sin(th) * P - std::cos(th) * Q);
}

double hermite_state(int n, double x, double hbar) {
    if (n < 0 || n > 100000) throw input_error("hermite_state: n out of range");
    if (!(hbar > 0.0)) throw input_error("hermite_state: hbar must be positive");
    const double y = x / std::sqrt(hbar);
    // Seed h0 = pi^{-1/4} exp(-y^2/2) in (mantissa, base-2 exponent) form.
    const double l = -0.5 * y * y - 0.25 * std::log(M_PI);
    int e0 = (int)std::floor(l / M_LN2);
    double prev = 0.0;                       // h_{-1}
    double curr = std::exp(l - e0 * M_LN2);  // h_0 * 2^{-e0}
    long ex = e0;
    for (int k = 1; k <= n; ++k) {
        double next = y * std::sqrt(2.0 / k) * curr - std::sqrt((k - 1.0) / k) * prev;
        prev = curr;
        curr = next;
        double m = std::max(std::abs(curr), std::abs(prev));
        if (m > 0x1p500) {
            curr *= 0x1p-500;
            prev *= 0x1p-500;
            ex += 500;
        } else if (m > 0.0 && m < 0x1p-500) {
            curr *= 0x1p500;
            prev *= 0x1p500;
            ex -= 500;
        }
    }
    if (curr == 0.0) return 0.0;
    const double lr = std::log(std::abs(curr)) + ex * M_LN2 - 0.25 * std::log(hbar);
    if (lr < -745.0) return 0.0;  // deep in the classically forbidden tail
    return std::copysign(std::exp(lr), curr);
}

double laguerre(int n, double x) {
    if (n < 0 || n > 100000) throw input_error("laguerre: n out of range");
    if (x < 0.0) throw input_error("laguerre: x must be nonnegative");
    if (n == 0) return 1.0;
    double p0 = 1.0, p1 = 1.0 - x;
    for (int k = 1; k < n; ++k) {
        double p2 = ((2.0 * k + 1.0 - x) * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double laguerre_scaled(int n, double x) {
    if (n < 0 || n > 100000) throw input_error("laguerre_scaled: n out of range");
    if (x < 0.0) throw input_error("laguerre_scaled: x must be nonnegative");
    // Recurrence on L_k with exponent bookkeeping; exp(-x/2) folded in at the end.
    double p0 = 0.0, p1 = 1.0;
    long ex = 0;
    for (int k = 0; k < n; ++k) {
        double p2 = ((2.0 * k + 1.0 - x) * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
        double m = std::max(std::abs(p0), std::abs(p1));
        if (m > 0x1p500) {
            p0 *= 0x1p-500;
            p1 *= 0x1p-500;
            ex += 500;
        } else if (m > 0.0 && m < 0x1p-500) {
            p0 *= 0x1p500;
            p1 *= 0x1p500;
            ex -= 500;
        }
    }
    if (p1 == 0.0) return 0.0;
    const double lr = std::log(std::abs(p1)) + ex * M_LN2 - 0.5 * x;
    if (lr < -745.0) return 0.0;
    return std::copysign(std::exp(lr), p1);
}

}  // namespace semiwig::specfun
