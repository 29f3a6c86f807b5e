#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "semiwig/specfun.hpp"

using namespace semiwig;
using namespace semiwig::specfun;

namespace {

// Independent oracle: classical RK4 on y'' = x y with exact initial data at
// x = 0, marched in the direction in which the Ai solution does not lose out
// to the growing one.
struct AiryOde {
    double ai, aip;
};
AiryOde rk4_march(AiryOde y0, double x0, double x1, double h) {
    auto rhs = [](double x, const AiryOde& y) {
        return AiryOde{y.aip, x * y.ai};
    };
    const int nsteps = static_cast<int>(std::round(std::abs(x1 - x0) / h));
    const double dh = (x1 - x0) / nsteps;
    AiryOde y = y0;
    double x = x0;
    for (int i = 0; i < nsteps; ++i) {
        const AiryOde k1 = rhs(x, y);
        const AiryOde k2 = rhs(x + 0.5 * dh, {y.ai + 0.5 * dh * k1.ai, y.aip + 0.5 * dh * k1.aip});
        const AiryOde k3 = rhs(x + 0.5 * dh, {y.ai + 0.5 * dh * k2.ai, y.aip + 0.5 * dh * k2.aip});
        const AiryOde k4 = rhs(x + dh, {y.ai + dh * k3.ai, y.aip + dh * k3.aip});
        y.ai += dh / 6.0 * (k1.ai + 2 * k2.ai + 2 * k3.ai + k4.ai);
        y.aip += dh / 6.0 * (k1.aip + 2 * k2.aip + 2 * k3.aip + k4.aip);
        x += dh;
    }
    return y;
}

const double kAi0 = std::pow(3.0, -2.0 / 3.0) / std::tgamma(2.0 / 3.0);
const double kAip0 = -std::pow(3.0, -1.0 / 3.0) / std::tgamma(1.0 / 3.0);

}  // namespace

TEST_CASE("airy values at the origin match the Gamma-function closed forms") {
    CHECK(airy_ai(0.0) == doctest::Approx(kAi0).epsilon(1e-14));
    CHECK(airy_ai_prime(0.0) == doctest::Approx(kAip0).epsilon(1e-14));
    CHECK(airy_ai(0.0) == doctest::Approx(0.3550280539).epsilon(1e-9));
    CHECK(airy_ai_prime(0.0) == doctest::Approx(-0.2588194038).epsilon(1e-9));
}

TEST_CASE("airy on the oscillatory axis against the ODE oracle") {
    // March left from 0 in half-unit checkpoints (neutral stability there).
    AiryOde y{kAi0, kAip0};
    double x = 0.0;
    while (x > -20.0 + 1e-9) {
        const double xn = x - 0.5;
        y = rk4_march(y, x, xn, 1e-4);
        x = xn;
        CHECK(airy_ai(x) == doctest::Approx(y.ai).epsilon(5e-11).scale(1.0));
        CHECK(airy_ai_prime(x) == doctest::Approx(y.aip).epsilon(5e-11).scale(1.0));
    }
}

TEST_CASE("airy on the decaying axis: backward march returns to the anchors") {
    // Seed with the implementation at x = 8 (asymptotic branch) and integrate
    // back to 0; backward is the stable direction, so the arrival exposes any
    // seed error.
    AiryOde y{airy_ai(8.0), airy_ai_prime(8.0)};
    double x = 8.0;
    while (x > 1e-9) {
        const double xn = x - 0.5;
        y = rk4_march(y, x, xn, 1e-4);
        x = xn;
        CHECK(airy_ai(x) == doctest::Approx(y.ai).epsilon(1e-10));
    }
    CHECK(y.ai == doctest::Approx(kAi0).epsilon(1e-11));
    CHECK(y.aip == doctest::Approx(kAip0).epsilon(1e-11));
}

TEST_CASE("airy differential equation residual by finite differences") {
    // Fourth-order stencils: the second derivative is ~|x| Ai and the plain
    // three-point rule cannot reach 1e-7 at x = -20.
    const double h = 5e-3;
    for (double x = -20.0; x <= 8.0; x += 0.37) {
        const double f2 = airy_ai(x + 2 * h), f1 = airy_ai(x + h), f0 = airy_ai(x);
        const double fm1 = airy_ai(x - h), fm2 = airy_ai(x - 2 * h);
        const double second = (-f2 + 16 * f1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h);
        CHECK(std::abs(second - x * f0) <= 1e-7);
        const double first = (-f2 + 8 * f1 - 8 * fm1 + fm2) / (12 * h);
        CHECK(std::abs(first - airy_ai_prime(x)) <= 1e-7);
    }
}

TEST_CASE("airy oscillatory asymptotic form at t = 20") {
    const double t = 20.0;
    const double approx = std::cos(2.0 / 3.0 * t * std::sqrt(t) - 0.25 * M_PI) /
                          (std::sqrt(M_PI) * std::pow(t, 0.25));
    CHECK(airy_ai(-t) == doctest::Approx(approx).epsilon(2e-3));
}

TEST_CASE("hermite ground state is the normalized Gaussian") {
    const double hbar = 0.05;
    for (double x : {0.0, 0.1, 0.3, 0.7, -0.45}) {
        const double expected = std::pow(M_PI * hbar, -0.25) * std::exp(-x * x / (2.0 * hbar));
        CHECK(hermite_state(0, x, hbar) == doctest::Approx(expected).epsilon(1e-13));
    }
    CHECK(hermite_state(1, 0.0, hbar) == 0.0);  // odd parity
}

TEST_CASE("hermite orthonormality on a quadrature grid, m,n <= 50") {
    const double hbar = 0.05;
    const double X = 4.0, h = 0.002;
    const int npts = static_cast<int>(2 * X / h) + 1;
    const int nmax = 50;
    std::vector<std::vector<double>> phi(nmax + 1, std::vector<double>(npts));
    for (int i = 0; i < npts; ++i) {
        const double x = -X + i * h;
        for (int n = 0; n <= nmax; ++n) phi[n][i] = hermite_state(n, x, hbar);
    }
    double worst = 0.0;
    for (int m = 0; m <= nmax; ++m) {
        for (int n = m; n <= nmax; ++n) {
            double dot = 0.0;
            for (int i = 0; i < npts; ++i) dot += phi[m][i] * phi[n][i];
            dot *= h;
            worst = std::max(worst, std::abs(dot - (m == n ? 1.0 : 0.0)));
        }
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("hermite recurrence stays normalized at n = 1000") {
    const double hbar = 0.05;
    const double X = 11.0, h = 0.004;
    const int npts = static_cast<int>(2 * X / h) + 1;
    double norm = 0.0;
    for (int i = 0; i < npts; ++i) {
        const double x = -X + i * h;
        const double v = hermite_state(1000, x, hbar);
        norm += v * v;
    }
    norm *= h;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("laguerre basics and the coefficient-expansion oracle") {
    CHECK(laguerre(0, 3.7) == 1.0);
    CHECK(laguerre(1, 3.7) == doctest::Approx(1.0 - 3.7).epsilon(1e-15));
    // L5(x) = 1 - 5x + 5x^2 - 5x^3/3 + 5x^4/24 - x^5/120
    const double x = 2.0;
    const double direct = 1.0 - 5.0 * x + 5.0 * x * x - 5.0 * x * x * x / 3.0 +
                          5.0 * std::pow(x, 4) / 24.0 - std::pow(x, 5) / 120.0;
    CHECK(laguerre(5, 2.0) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(direct == doctest::Approx(11.0 / 15.0).epsilon(1e-14));
}

TEST_CASE("laguerre_scaled equals the plain product where that is safe") {
    for (int n : {0, 3, 17, 60}) {
        for (double x : {0.0, 0.5, 4.0, 40.0}) {
            const double plain = laguerre(n, x) * std::exp(-0.5 * x);
            CHECK(laguerre_scaled(n, x) == doctest::Approx(plain).epsilon(1e-11));
        }
    }
    // Deep-forbidden regime: finite, tiny, no NaN.
    const double deep = laguerre_scaled(200, 950.0);
    CHECK(std::isfinite(deep));
}
