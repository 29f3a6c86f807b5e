#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "semiwig/quantum.hpp"
#include "semiwig/specfun.hpp"

using namespace semiwig;
using namespace semiwig::classical;
using namespace semiwig::quantum;

TEST_CASE("classical period: oscillator 2 pi, cosine perturbation shortens it") {
    const auto iso = Potential::isotropic(1);
    CHECK(orbit_period_1d(iso, 1.0) == doctest::Approx(2.0 * M_PI).epsilon(1e-8));
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    const double T = orbit_period_1d(pot, 1.0);
    CHECK(T < 2.0 * M_PI);
    CHECK(T > 5.5);
    // Return-time cross-check: the flow comes back after one period.
    double x0 = std::sqrt(2.0);  // H(x0, 0) = 1 for the oscillator; adjust:
    {
        double lo = 0.0, hi = 2.0;
        for (int i = 0; i < 100; ++i) {
            const double mid = 0.5 * (lo + hi);
            (pot.value(VectorXd::Constant(1, mid)) < 1.0 ? lo : hi) = mid;
        }
        x0 = 0.5 * (lo + hi);
    }
    const FlowResult fr = flow(PhasePoint::make1d(x0, 0.0), pot, T);
    CHECK(std::abs(fr.endpoint.q[0] - x0) <= 1e-6);
    CHECK(std::abs(fr.endpoint.p[0]) <= 1e-6);
}

TEST_CASE("oscillator spectrum: E_j = hbar (j + 1/2) to 1e-8 for j <= 100") {
    const auto iso = Potential::isotropic(1);
    const double hbar = 0.05;
    const GridSpec grid = suggest_grid(iso, hbar, 5.6);
    const EigenBasis basis = eigensolve_1d(iso, hbar, grid);
    REQUIRE(basis.retained() > 100);
    for (int j = 0; j <= 100; ++j)
        CHECK(std::abs(basis.evals[j] - hbar * (j + 0.5)) <= 1e-8);
    CHECK(basis.residuals.maxCoeff() <= 1e-7);
}

TEST_CASE("oscillator ground state matches the Gaussian closed form") {
    const auto iso = Potential::isotropic(1);
    const double hbar = 0.05;
    const EigenBasis basis = eigensolve_1d(iso, hbar, suggest_grid(iso, hbar, 2.0));
    double worst = 0.0;
    for (int i = 0; i < basis.grid.n; ++i) {
        const double x = basis.x[i];
        const double exact = std::pow(M_PI * hbar, -0.25) * std::exp(-x * x / (2.0 * hbar));
        worst = std::max(worst, std::abs(std::abs(basis.evecs(i, 0)) - std::abs(exact)));
    }
    // Compare with a consistent global sign.
    const int mid = basis.grid.n / 2;
    const double sign = basis.evecs(mid, 0) > 0 ? 1.0 : -1.0;
    for (int i = 0; i < basis.grid.n; ++i) {
        const double x = basis.x[i];
        const double exact = std::pow(M_PI * hbar, -0.25) * std::exp(-x * x / (2.0 * hbar));
        worst = std::max(worst, std::abs(sign * basis.evecs(i, 0) - exact));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("cosine-perturbed eigenvalues stable under grid doubling") {
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    const double hbar = 0.02;
    GridSpec g1 = suggest_grid(pot, hbar, 1.4);
    GridSpec g2 = g1;
    g2.n *= 2;
    const EigenBasis b1 = eigensolve_1d(pot, hbar, g1);
    const EigenBasis b2 = eigensolve_1d(pot, hbar, g2);
    const int m = std::min({b1.retained(), b2.retained(), 60});
    for (int j = 0; j < m; ++j) CHECK(std::abs(b1.evals[j] - b2.evals[j]) <= 1e-7);
}

TEST_CASE("orthonormality of retained states under grid quadrature") {
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    const EigenBasis basis = eigensolve_1d(pot, 0.05, suggest_grid(pot, 0.05, 1.2));
    const MatrixXd gram = basis.evecs.transpose() * basis.evecs * basis.grid_h();
    CHECK(max_abs(gram - MatrixXd::Identity(basis.retained(), basis.retained())) <= 1e-8);
}

TEST_CASE("wigner transform of the oscillator ground state is the Gaussian") {
    const auto iso = Potential::isotropic(1);
    const double hbar = 0.05;
    const EigenBasis basis = eigensolve_1d(iso, hbar, suggest_grid(iso, hbar, 2.0));
    StateWigner sw(basis);
    for (double x : {0.0, 0.1, 0.25}) {
        for (double xi : {0.0, -0.2, 0.3}) {
            const double exact =
                std::exp(-(x * x + xi * xi) / hbar) / (M_PI * hbar);
            CHECK(sw.evaluate(0, x, xi) == doctest::Approx(exact).epsilon(2e-7).scale(1.0));
        }
    }
}

TEST_CASE("wigner normalization and marginals for a single state") {
    const auto iso = Potential::isotropic(1);
    const double hbar = 0.05;
    const EigenBasis basis = eigensolve_1d(iso, hbar, suggest_grid(iso, hbar, 2.0));
    StateWigner sw(basis);
    const int state = 3;

    // Marginal over xi at fixed x equals |psi(x)|^2 (on a grid node).
    const int gi = basis.grid.n / 2 + 11;
    const double x = basis.x[gi];
    const double xir = 1.2;
    const int nxi = 601;
    std::vector<double> vals(nxi);
    for (int k = 0; k < nxi; ++k)
        vals[k] = sw.evaluate(state, x, -xir + 2.0 * xir * k / (nxi - 1));
    vals.front() *= 0.5;
    vals.back() *= 0.5;
    const double marginal = (2.0 * xir / (nxi - 1)) * pairwise_sum(vals);
    const double density = basis.evecs(gi, state) * basis.evecs(gi, state);
    CHECK(marginal == doctest::Approx(density).epsilon(1e-6).scale(1.0));

    // Full phase-space integral of the ground state: 1.
    const int ng = 61;
    const double r = 1.1;
    std::vector<double> cell(ng * ng);
    for (int i = 0; i < ng; ++i)
        for (int j = 0; j < ng; ++j)
            cell[i * ng + j] = sw.evaluate(0, -r + 2.0 * r * i / (ng - 1),
                                           -r + 2.0 * r * j / (ng - 1));
    const double h2 = (2.0 * r / (ng - 1)) * (2.0 * r / (ng - 1));
    CHECK(h2 * pairwise_sum(cell) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("parity: Wigner fields of even potentials are symmetric") {
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    const double hbar = 0.05;
    const EigenBasis basis = eigensolve_1d(pot, hbar, suggest_grid(pot, hbar, 1.2));
    StateWigner sw(basis);
    for (int state : {0, 1, 4}) {
        for (double x : {0.15, 0.4}) {
            for (double xi : {0.2, -0.35}) {
                const double w = sw.evaluate(state, x, xi);
                CHECK(sw.evaluate(state, -x, xi) == doctest::Approx(w).epsilon(1e-9).scale(1.0));
                CHECK(sw.evaluate(state, x, -xi) == doctest::Approx(w).epsilon(1e-9).scale(1.0));
            }
        }
    }
}

TEST_CASE("oscillator_wigner_exact: Gaussian limit, origin sign, transform oracle") {
    const double hbar = 0.05;
    CHECK(oscillator_wigner_exact(0, hbar, 0.12, -0.07) ==
          doctest::Approx(std::exp(-(0.12 * 0.12 + 0.07 * 0.07) / hbar) / (M_PI * hbar))
              .epsilon(1e-12));
    for (int n : {0, 1, 2, 7}) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        CHECK(oscillator_wigner_exact(n, hbar, 0.0, 0.0) ==
              doctest::Approx(sign / (M_PI * hbar)).epsilon(1e-12));
    }

    // Against the numerical Wigner transform of hermite_state.
    const auto iso = Potential::isotropic(1);
    const GridSpec grid = suggest_grid(iso, hbar, 4.5);
    for (int n : {5, 17, 40}) {
        VectorXd psi(grid.n);
        for (int i = 0; i < grid.n; ++i) {
            const double x = -grid.L + i * (2.0 * grid.L / grid.n);
            psi[i] = specfun::hermite_state(n, x, hbar);
        }
        QueryList queries = {{0.1, 0.2}, {0.5, -0.3}, {0.8, 0.6}, {0.0, 1.0}};
        const WignerField f = wigner_of_state(psi, grid, hbar, queries);
        for (size_t k = 0; k < queries.size(); ++k) {
            const double exact =
                oscillator_wigner_exact(n, hbar, queries[k].first, queries[k].second);
            CHECK(f.values[k] == doctest::Approx(exact).epsilon(1e-7).scale(1.0));
        }
    }
}

TEST_CASE("window: bounds, symmetry, decay, and the integer comb identity") {
    const auto iso = Potential::isotropic(1);
    const WindowFunction w = build_window(2.5, &iso, 1.0);
    CHECK(w.f0 > w.a / (2.0 * M_PI));
    CHECK(w.f0 < w.a / M_PI);
    CHECK(w.fhat(0.0) == 1.0);
    CHECK(w.fhat(1.2) == 1.0);  // inside [-a/2, a/2]
    CHECK(w.fhat(2.5) == 0.0);
    CHECK(w.fhat(2.2) > 0.0);
    CHECK(w.fhat(2.2) < 1.0);
    for (double lam : {0.7, 3.3, 9.1}) {
        CHECK(std::abs(w.f(lam) - w.f(-lam)) <= 1e-12);
    }
    CHECK(w.lambda_cut < 240.0);
    CHECK(w.lambda_cut > 20.0);
    for (double lam = w.lambda_cut; lam < w.lambda_cut + 10.0; lam += 0.7)
        CHECK(std::abs(w.f(lam)) <= 1e-10 * w.f0);

    // Poisson comb: for supp fhat inside (-2pi, 2pi), sum_k f(k + theta) = 1.
    for (double theta : {0.0, 0.3}) {
        double sum = 0.0;
        for (long k = -170; k <= 170; ++k) sum += w.f(k + theta);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-8));
    }

    // Validity handling against the minimal period.
    CHECK(w.validity_warning.empty());
    CHECK_THROWS_AS(build_window(7.0, &iso, 1.0, /*strict=*/true), input_error);
    const WindowFunction loose = build_window(7.0, &iso, 1.0, /*strict=*/false);
    CHECK(!loose.validity_warning.empty());
}

TEST_CASE("smoothed sum: oscillator dispatch, resonant weight, window consistency") {
    const auto iso = Potential::isotropic(1);
    const double hbar = 0.05;
    const WindowFunction w = build_window(2.5, &iso, 1.0);
    const double E = hbar * (10 + 0.5);  // exactly on an eigenvalue
    QueryList queries = {{0.3, 0.1}, {0.9, -0.4}};
    const WignerField f = smoothed_spectral_wigner(E, hbar, iso, w, queries);
    // Manual reassembly from the Laguerre closed form.
    for (size_t k = 0; k < queries.size(); ++k) {
        double manual = 0.0;
        for (int j = 0; j <= 200; ++j) {
            const double lam = (E - hbar * (j + 0.5)) / hbar;
            if (std::abs(lam) <= w.lambda_cut)
                manual += w.f(lam) *
                          oscillator_wigner_exact(j, hbar, queries[k].first,
                                                  queries[k].second);
        }
        CHECK(f.values[k] == doctest::Approx(manual).epsilon(1e-12).scale(1.0));
    }
    // The resonant state carries the largest absolute weight.
    CHECK(w.f(0.0) > std::abs(w.f(1.0)));
    CHECK(w.f(0.0) > std::abs(w.f(-1.0)));
}

TEST_CASE("sharp sum: single-state interval, empty interval, additivity") {
    const auto iso = Potential::isotropic(1);
    const double hbar = 0.05;
    QueryList queries = {{0.45, 0.2}, {1.0, 0.0}};
    const int N = 9;
    const double EN = hbar * (N + 0.5);
    const WignerField one =
        sharp_spectral_wigner(EN - 0.4 * hbar, EN + 0.4 * hbar, hbar, iso, queries);
    for (size_t k = 0; k < queries.size(); ++k)
        CHECK(one.values[k] ==
              doctest::Approx(oscillator_wigner_exact(N, hbar, queries[k].first,
                                                      queries[k].second))
                  .epsilon(1e-12)
                  .scale(1.0));

    const WignerField empty =
        sharp_spectral_wigner(EN + 0.1 * hbar, EN + 0.4 * hbar, hbar, iso, queries);
    for (double v : empty.values) CHECK(v == 0.0);

    const WignerField left =
        sharp_spectral_wigner(EN - 1.4 * hbar, EN - 0.6 * hbar, hbar, iso, queries);
    const WignerField both =
        sharp_spectral_wigner(EN - 1.4 * hbar, EN + 0.4 * hbar, hbar, iso, queries);
    for (size_t k = 0; k < queries.size(); ++k)
        CHECK(left.values[k] + one.values[k] ==
              doctest::Approx(both.values[k]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("smoothed sum with a numerical basis matches the Laguerre path") {
    // Same potential both ways: isotropic via eigensolve + numerical Wigner
    // transforms must land on the closed form.
    const auto iso = Potential::isotropic(1);
    const double hbar = 0.05, E = 1.0;
    const WindowFunction w = build_window(2.5, &iso, E);
    const EigenBasis basis = eigensolve_1d(iso, hbar, suggest_grid(iso, hbar, 9.5));
    StateWigner sw(basis);
    QueryList queries = {{1.2, 0.3}, {0.8, -0.6}};
    const WignerField exact = smoothed_spectral_wigner(E, hbar, iso, w, queries);

    // Force the numerical path through a cosine-perturbed potential of zero
    // strength (identical operator, different dispatch).
    const auto iso_numeric = Potential::cosine_perturbed(1, 0.0);
    const WignerField numeric =
        smoothed_spectral_wigner(E, hbar, iso_numeric, w, queries, &basis, &sw);
    for (size_t k = 0; k < queries.size(); ++k)
        CHECK(numeric.values[k] ==
              doctest::Approx(exact.values[k]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("reliability guards") {
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    const double hbar = 0.05;
    const EigenBasis tiny = eigensolve_1d(pot, hbar, GridSpec{2.0, 256});
    const WindowFunction w = build_window(2.5, &pot, 1.0);
    // Window reaches past the retained spectrum.
    const double E_high = tiny.evals[tiny.retained() - 1];
    CHECK_THROWS_AS(smoothed_spectral_wigner(E_high, hbar, pot, w, {{0.1, 0.1}}, &tiny),
                    reliability_error);
    CHECK_THROWS_AS(eigensolve_1d(pot, hbar, GridSpec{2.0, 300}), input_error);  // not pow2
}

TEST_CASE("basis export/import round-trips bit-identically") {
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    const double hbar = 0.05;
    const EigenBasis basis = eigensolve_1d(pot, hbar, GridSpec{3.0, 256});
    const std::string jp = "/tmp/semiwig_test_basis.json";
    const std::string cp = "/tmp/semiwig_test_basis.csv";
    export_basis(basis, jp, cp);
    const EigenBasis back = import_basis(jp, cp);
    REQUIRE(back.retained() == basis.retained());
    CHECK((back.evals - basis.evals).cwiseAbs().maxCoeff() == 0.0);
    CHECK(max_abs(back.evecs - basis.evecs) == 0.0);

    StateWigner swa(basis), swb(back);
    for (int j : {0, 2, 5}) {
        const double a = swa.evaluate(j, 0.31, -0.22);
        const double b = swb.evaluate(j, 0.31, -0.22);
        CHECK(a == b);  // bit-identical queries
    }
    std::remove(jp.c_str());
    std::remove(cp.c_str());
}

TEST_CASE("separable 2D oscillator sum: symmetry and single-level structure") {
    const double hbar = 0.05;
    const WindowFunction w = build_window(2.5, nullptr);
    const double E = hbar * (12 + 1.0);  // on the N = 12 level
    const double a = smoothed_spectral_wigner_2d_isotropic(E, hbar, w, 0.3, 0.1, -0.2, 0.4);
    const double b = smoothed_spectral_wigner_2d_isotropic(E, hbar, w, -0.3, -0.1, 0.2, -0.4);
    CHECK(a == doctest::Approx(b).epsilon(1e-10));  // W(-z) = W(z) per factor
    CHECK(std::isfinite(a));
}
