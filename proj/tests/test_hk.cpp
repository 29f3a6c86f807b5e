#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "semiwig/hk.hpp"

using namespace semiwig;
using namespace semiwig::classical;
using namespace semiwig::hk;

namespace {

PhasePoint pt1(double q, double p) { return PhasePoint::make1d(q, p); }

// Exact Wigner symbol of the oscillator propagator (Mehler kernel), in the
// (2 pi hbar)^d-normalized convention: sec(t/2) exp(-2 i tan(t/2) H / hbar).
complexd mehler_symbol(double t, double x, double xi, double hbar) {
    const double H = 0.5 * (x * x + xi * xi);
    return (1.0 / std::cos(0.5 * t)) *
           std::exp(complexd(0.0, -2.0 * std::tan(0.5 * t) * H / hbar));
}

complexd brute_v_integral(const VectorXd& x, const VectorXd& xi, const PhasePoint& start,
                          const FlowResult& fr, double hbar, int nodes) {
    // Trapezoid over the Gaussian support of the v-factor.
    const VectorXd vc = fr.endpoint.q - start.q;
    const double range = 14.0 * std::sqrt(hbar);
    const double h = 2.0 * range / (nodes - 1);
    std::vector<complexd> vals(nodes);
    for (int k = 0; k < nodes; ++k) {
        const VectorXd v = VectorXd::Constant(1, vc[0] - range + k * h);
        const complexd ph = wigner_phase(x, xi, start, v, fr);
        vals[k] = std::exp(complexd(0.0, 1.0) * ph / hbar);
    }
    vals.front() *= 0.5;
    vals.back() *= 0.5;
    return h * pairwise_sum(vals);
}

}  // namespace

TEST_CASE("hk phase: zero at the trivial configuration, positive imaginary part") {
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    const PhasePoint start = pt1(0.7, -0.4);
    {
        const FlowResult fr = flow(start, pot, 0.0);
        const complexd ph = hk_phase(start, start.q, start.q, fr);
        CHECK(std::abs(ph) == 0.0);
    }
    SplitMix64 rng(11u);
    for (int i = 0; i < 30; ++i) {
        const PhasePoint z = pt1(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const double t = rng.uniform(-1.5, 1.5);
        const FlowResult fr = flow(z, pot, t);
        const VectorXd x = VectorXd::Constant(1, rng.uniform(-1.5, 1.5));
        const VectorXd y = VectorXd::Constant(1, rng.uniform(-1.5, 1.5));
        const complexd ph = hk_phase(z, x, y, fr);
        CHECK(ph.imag() >= 0.0);
        // Im = 0 exactly on x = q_t, y = q.
        const complexd on = hk_phase(z, fr.endpoint.q, z.q, fr);
        CHECK(on.imag() <= 1e-15);
    }
}

TEST_CASE("hk amplitude: 2^{d/2} at t = 0, oscillator modulus and branch") {
    const auto iso = Potential::isotropic(1);
    const PhasePoint start = pt1(0.8, 0.1);
    CHECK(std::abs(hk_amplitude(start, iso, 0.0) - std::sqrt(2.0)) <= 1e-12);
    // The oscillator determinant winds as 2 e^{-it}: modulus sqrt(2) for all
    // t, phase -t/2, continuous through t = pi/2 and beyond.
    double prev_arg = 0.0;
    for (double t = 0.1; t <= 2.4; t += 0.1) {
        const complexd a0 = hk_amplitude(start, iso, t);
        CHECK(std::abs(a0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
        const double arg = std::arg(a0);
        CHECK(std::abs(a0 - std::sqrt(2.0) * std::polar(1.0, -0.5 * t)) <= 1e-9);
        if (t > 0.1) CHECK(std::abs(arg - prev_arg) < M_PI / 8.0 + 1e-9);
        prev_arg = arg;
    }
    // d = 2 at t = 0: det = 4, amplitude 2.
    const auto iso2 = Potential::isotropic(2);
    PhasePoint s2;
    s2.q = VectorXd::Constant(2, 0.3);
    s2.p = VectorXd::Constant(2, -0.5);
    CHECK(std::abs(hk_amplitude(s2, iso2, 0.0) - 2.0) <= 1e-12);
}

TEST_CASE("wigner phase: vanishing imaginary part exactly on the critical set") {
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    const PhasePoint start = pt1(0.9, 0.2);
    const double t = 0.7;
    const FlowResult fr = flow(start, pot, t);
    const VectorXd x_c = 0.5 * (start.q + fr.endpoint.q);
    const VectorXd xi_c = 0.5 * (start.p + fr.endpoint.p);
    const VectorXd v_c = fr.endpoint.q - start.q;
    CHECK(wigner_phase(x_c, xi_c, start, v_c, fr).imag() <= 1e-14);

    // d_v Psi = 0 at the critical point forces xi = (p + p_t)/2.
    const double h = 1e-6;
    const complexd pp = wigner_phase(x_c, xi_c, start, VectorXd::Constant(1, v_c[0] + h), fr);
    const complexd pm = wigner_phase(x_c, xi_c, start, VectorXd::Constant(1, v_c[0] - h), fr);
    CHECK(std::abs((pp - pm) / (2.0 * h)) <= 1e-8);

    // Off the critical set the imaginary part is strictly positive.
    SplitMix64 rng(5u);
    for (int i = 0; i < 20; ++i) {
        const VectorXd v = VectorXd::Constant(1, rng.uniform(-1.0, 1.0));
        const VectorXd x = VectorXd::Constant(1, rng.uniform(-1.0, 1.0));
        const VectorXd xi = VectorXd::Constant(1, rng.uniform(-1.0, 1.0));
        const complexd ph = wigner_phase(x, xi, start, v, fr);
        const double expect = 0.5 * ((x + 0.5 * v - fr.endpoint.q).squaredNorm() +
                                     (x - 0.5 * v - start.q).squaredNorm());
        CHECK(ph.imag() == doctest::Approx(expect).epsilon(1e-12));
        CHECK(ph.imag() >= 0.0);
    }
}

TEST_CASE("reduce_v against brute-force quadrature at random tuples") {
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    SplitMix64 rng(123u);
    for (int i = 0; i < 20; ++i) {
        const PhasePoint start = pt1(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const double t = rng.uniform(-1.0, 1.0);
        const double hbar = rng.uniform(0.02, 0.1);
        const FlowResult fr = flow(start, pot, t);
        const VectorXd x = VectorXd::Constant(1, start.q[0] + rng.uniform(-0.1, 0.1));
        const VectorXd xi = VectorXd::Constant(1, start.p[0] + rng.uniform(-0.1, 0.1));
        const complexd closed = reduce_v(x, xi, start, fr, hbar);
        const complexd brute = brute_v_integral(x, xi, start, fr, hbar, 512);
        CHECK(std::abs(closed - brute) <= 1e-8 * std::max(1e-3, std::abs(closed)));
    }
}

TEST_CASE("reduce_v Gaussian scaling identity for the oscillator") {
    // Quadratic flow: shrinking all lengths by sqrt(2) matches halving hbar,
    // up to the (4 pi hbar)^{d/2} normalization.
    const auto iso = Potential::isotropic(1);
    const double hbar = 0.08, t = 0.6, c = 1.0 / std::sqrt(2.0);
    const PhasePoint start = pt1(0.9, -0.3);
    const PhasePoint scaled = pt1(c * 0.9, c * -0.3);
    const FlowResult fr = flow(start, iso, t);
    const FlowResult fs = flow(scaled, iso, t);
    const VectorXd x = VectorXd::Constant(1, 0.82), xi = VectorXd::Constant(1, -0.27);
    const complexd a = reduce_v(x, xi, start, fr, hbar);
    const complexd b = reduce_v(c * x, c * xi, scaled, fs, 0.5 * hbar);
    CHECK(std::abs(b - c * a) <= 1e-12 * std::abs(a));
}

TEST_CASE("wigner_propagator: identity limit at t = 0") {
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    const HKEvaluation ev = wigner_propagator(0.0, VectorXd::Constant(1, 0.6),
                                              VectorXd::Constant(1, 0.3), pot, 0.05);
    CHECK(std::abs(ev.value - complexd(1.0, 0.0)) <= 1e-9);
    CHECK(!ev.flagged);
}

TEST_CASE("wigner_propagator matches the Mehler symbol for the oscillator") {
    const auto iso = Potential::isotropic(1);
    const double hbar = 0.05;
    for (double t : {0.4, 0.8}) {
        const double x = 1.1, xi = 0.15;
        const HKEvaluation ev = wigner_propagator(t, VectorXd::Constant(1, x),
                                                  VectorXd::Constant(1, xi), iso, hbar);
        const complexd exact = mehler_symbol(t, x, xi, hbar);
        CHECK(std::abs(ev.value) == doctest::Approx(1.0 / std::cos(0.5 * t)).epsilon(1e-6));
        CHECK(std::abs(ev.value - exact) <= 1e-6);
        CHECK(!ev.flagged);
    }
}

TEST_CASE("stationary phase prediction: oscillator closed form") {
    const auto iso = Potential::isotropic(1);
    const double hbar = 0.05;
    CHECK(std::abs(stationary_phase_prediction(0.0, VectorXd::Constant(1, 0.5),
                                               VectorXd::Constant(1, 0.2), iso, hbar) -
                   complexd(1.0, 0.0)) <= 1e-12);
    for (double t : {0.4, 0.9}) {
        const double x = 1.05, xi = -0.2;
        StationaryPhaseInfo info;
        const complexd pred = stationary_phase_prediction(
            t, VectorXd::Constant(1, x), VectorXd::Constant(1, xi), iso, hbar, {}, &info);
        CHECK(info.arcs_found == 1);
        const complexd exact = mehler_symbol(t, x, xi, hbar);
        CHECK(std::abs(pred - exact) <= 1e-8);
    }
}

TEST_CASE("hk quadrature agrees with stationary phase to O(hbar), cosine potential") {
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    const double t = 0.8, x = 1.1, xi = 0.1;
    double prev_err = 0.0;
    for (double hbar : {0.08, 0.04}) {
        const HKEvaluation ev =
            wigner_propagator(t, VectorXd::Constant(1, x), VectorXd::Constant(1, xi), pot, hbar);
        const complexd pred = stationary_phase_prediction(
            t, VectorXd::Constant(1, x), VectorXd::Constant(1, xi), pot, hbar);
        const double err = std::abs(ev.value - pred);
        CHECK(err <= 0.05);
        if (prev_err > 0.0) CHECK(err < prev_err);
        prev_err = err;
    }
}

TEST_CASE("hessian check: pinned t = 0 determinant and ratio constancy") {
    // d = 1, t = 0: [[i/2, 0, 1], [0, 2i, 0], [1, 0, 0]] has determinant -2i.
    const auto iso = Potential::isotropic(1);
    const HessianCheck at0 = hessian_check(pt1(0.7, 0.2), iso, 0.0);
    CHECK(std::abs(at0.assembled_det - complexd(0.0, -2.0)) <= 1e-10);
    CHECK(std::abs(at0.assembled_det) ==
          doctest::Approx(std::abs(at0.ratio) * at0.factored_modulus).epsilon(1e-12));

    for (int d : {1, 2}) {
        std::vector<Potential> pots;
        pots.push_back(Potential::isotropic(d));
        pots.push_back(Potential::cosine_perturbed(d, 0.1));
        complexd ref(0.0, 0.0);
        bool have_ref = false;
        SplitMix64 rng(777u);
        for (const auto& pot : pots) {
            for (double t : {0.2, 0.6, 1.0, 1.4}) {
                PhasePoint z;
                z.q = VectorXd::Zero(d);
                z.p = VectorXd::Zero(d);
                for (int k = 0; k < d; ++k) {
                    z.q[k] = rng.uniform(-1.0, 1.0);
                    z.p[k] = rng.uniform(-1.0, 1.0);
                }
                const HessianCheck hc = hessian_check(z, pot, t);
                if (!have_ref) {
                    ref = hc.ratio;
                    have_ref = true;
                } else {
                    CHECK(std::abs(hc.ratio - ref) <= 1e-6 * std::abs(ref));
                }
            }
        }
        // The measured constant for this dimension: (-i/4)^d.
        const complexd expected = std::pow(complexd(0.0, -0.25), d);
        CHECK(std::abs(ref - expected) <= 1e-8);
    }
}

namespace {

struct GridState {
    std::vector<double> x;
    std::vector<complexd> psi;
    double h() const { return x[1] - x[0]; }
    double norm() const {
        std::vector<double> d(x.size());
        for (size_t k = 0; k < x.size(); ++k) d[k] = std::norm(psi[k]);
        d.front() *= 0.5;
        d.back() *= 0.5;
        return std::sqrt(h() * pairwise_sum(d));
    }
};

GridState coherent_state(double q0, double p0, double hbar, double xr, int nx) {
    GridState g;
    g.x.resize(nx);
    g.psi.resize(nx);
    for (int k = 0; k < nx; ++k) {
        const double y = q0 - xr + 2.0 * xr * k / (nx - 1);
        g.x[k] = y;
        g.psi[k] = std::pow(M_PI * hbar, -0.25) *
                   std::exp(complexd(-(y - q0) * (y - q0) / (2.0 * hbar),
                                     p0 * (y - q0) / hbar));
    }
    return g;
}

// HK propagation of a grid state; the (q, p) box is centered at (qc, pc).
GridState hk_propagate(const Potential& pot, double t, const GridState& in, double hbar,
                       double qc, double pc, double out_lo, double out_hi, int nx) {
    const double sq = std::sqrt(hbar);
    const int per = 25;
    const double hw = 6.0 * sq;
    const double dz = 2.0 * hw / (per - 1);
    const double hy = in.h();

    std::vector<complexd> coeff(per * per);
    std::vector<FlowResult> flows(per * per);
    for (int iq = 0; iq < per; ++iq) {
        for (int ip = 0; ip < per; ++ip) {
            const double q = qc - hw + iq * dz;
            const double p = pc - hw + ip * dz;
            const PhasePoint z = pt1(q, p);
            const complexd a0 = hk_amplitude(z, pot, t);
            const FlowResult fr = flow(z, pot, t);
            std::vector<complexd> ys(in.x.size());
            for (size_t k = 0; k < in.x.size(); ++k) {
                const double y = in.x[k];
                ys[k] = std::exp(complexd(-(y - q) * (y - q) / (2.0 * hbar),
                                          -p * (y - q) / hbar)) *
                        in.psi[k];
            }
            ys.front() *= 0.5;
            ys.back() *= 0.5;
            const int id = iq * per + ip;
            coeff[id] = a0 * (hy * pairwise_sum(ys)) *
                        std::exp(complexd(0.0, fr.action / hbar));
            flows[id] = fr;
        }
    }

    GridState out;
    out.x.resize(nx);
    out.psi.resize(nx);
    for (int k = 0; k < nx; ++k) {
        const double xx = out_lo + (out_hi - out_lo) * k / (nx - 1);
        out.x[k] = xx;
        std::vector<complexd> terms(coeff.size());
        for (size_t id = 0; id < coeff.size(); ++id) {
            const double dx = xx - flows[id].endpoint.q[0];
            terms[id] = coeff[id] * std::exp(complexd(-dx * dx / (2.0 * hbar),
                                                      flows[id].endpoint.p[0] * dx / hbar));
        }
        out.psi[k] = std::pow(2.0 * M_PI * hbar, -1.5) * dz * dz * pairwise_sum(terms);
    }
    return out;
}

}  // namespace

TEST_CASE("unitarity probe: HK-propagated coherent state keeps unit norm") {
    // Quadrature-level check of parametrix quality at hbar = 0.05, t = 1.
    const double hbar = 0.05, t = 1.0;
    const double q0 = 0.9, p0 = 0.0;
    for (const auto& pot : {Potential::isotropic(1), Potential::cosine_perturbed(1, 0.1)}) {
        const GridState psi0 = coherent_state(q0, p0, hbar, 8.0 * std::sqrt(hbar), 481);
        CHECK(psi0.norm() == doctest::Approx(1.0).epsilon(1e-8));
        const GridState psi_t =
            hk_propagate(pot, t, psi0, hbar, q0, p0, -2.2, 2.2, 421);
        CHECK(psi_t.norm() == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("group probe: one full step equals two half steps at quadrature tolerance") {
    const double hbar = 0.05, t = 1.0;
    const double q0 = 0.9, p0 = 0.0;
    const auto pot = Potential::cosine_perturbed(1, 0.1);
    const GridState psi0 = coherent_state(q0, p0, hbar, 8.0 * std::sqrt(hbar), 481);

    const GridState full = hk_propagate(pot, t, psi0, hbar, q0, p0, -2.2, 2.2, 421);
    const GridState half = hk_propagate(pot, 0.5 * t, psi0, hbar, q0, p0, -2.2, 2.2, 421);
    const FlowResult mid = flow(pt1(q0, p0), pot, 0.5 * t);
    const GridState two = hk_propagate(pot, 0.5 * t, half, hbar, mid.endpoint.q[0],
                                       mid.endpoint.p[0], -2.2, 2.2, 421);
    std::vector<double> diff(full.x.size());
    for (size_t k = 0; k < diff.size(); ++k) diff[k] = std::norm(full.psi[k] - two.psi[k]);
    diff.front() *= 0.5;
    diff.back() *= 0.5;
    const double l2 = std::sqrt(full.h() * pairwise_sum(diff));
    CHECK(l2 <= 0.02);
}
