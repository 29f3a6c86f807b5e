#include "semiwig/hk.hpp"

#include <cmath>

namespace semiwig::hk {

using classical::flow;
using classical::flow_observed;
using classical::hamiltonian;

complexd hk_det(const FlowResult& fr) {
    // det(A + D + i(C - B)). With the block convention A = dq_t/dq,
    // B = dq_t/dp, C = dp_t/dq, D = dp_t/dp this is the sign for which the
    // parametrix reproduces quadratic propagators exactly (the opposite sign
    // belongs to the (p, q)-ordered convention); verified against the Mehler
    // kernel in the tests.
    const int d = static_cast<int>(fr.A.rows());
    Eigen::MatrixXcd Z(d, d);
    Z.real() = fr.A + fr.D;
    Z.imag() = fr.C - fr.B;
    return Z.determinant();
}

complexd hk_phase(const PhasePoint& start, const VectorXd& x, const VectorXd& y,
                  const FlowResult& fr) {
    const VectorXd rx = x - fr.endpoint.q;
    const VectorXd ry = y - start.q;
    const double re = fr.action + fr.endpoint.p.dot(rx) - start.p.dot(ry);
    const double im = 0.5 * (rx.squaredNorm() + ry.squaredNorm());
    return {re, im};
}

namespace {

// Tracks arg(det) continuously along the integration path; the branch is
// anchored at t = 0 where det = 2^d is positive.
struct BranchTracker {
    complexd prev{1.0, 0.0};
    double arg_total = 0.0;
    double max_jump = 0.0;
    bool first = true;

    void feed(const complexd& det) {
        if (first) {
            prev = det;
            arg_total = std::arg(det);
            first = false;
            return;
        }
        if (std::abs(det) == 0.0 || std::abs(prev) == 0.0) {
            max_jump = M_PI;  // passed through a zero: refinement needed
            return;
        }
        const double jump = std::arg(det / prev);
        max_jump = std::max(max_jump, std::abs(jump));
        arg_total += jump;
        prev = det;
    }
    complexd sqrt_value() const {
        return std::sqrt(std::abs(prev)) * std::polar(1.0, 0.5 * arg_total);
    }
};

complexd tracked_sqrt(const PhasePoint& start, const Potential& pot, double t,
                      const IntegratorSpec& spec,
                      const std::function<complexd(const FlowResult&)>& det_of) {
    double max_dt = 0.0;  // unrestricted first; halved until arg steps are small
    for (int attempt = 0; attempt < 8; ++attempt) {
        BranchTracker tracker;
        flow_observed(start, pot, t, spec,
                      [&](double, const FlowResult& fr) { tracker.feed(det_of(fr)); },
                      max_dt);
        if (tracker.max_jump < 0.25 * M_PI) return tracker.sqrt_value();
        max_dt = (max_dt == 0.0) ? std::abs(t) / 16.0 : 0.5 * max_dt;
        if (std::abs(t) > 0.0 && max_dt < 1e-6 * std::abs(t)) break;
    }
    throw degenerate_error("branch tracking: determinant winds too fast (zero crossing?)");
}

}  // namespace

complexd hk_amplitude(const PhasePoint& start, const Potential& pot, double t,
                      const IntegratorSpec& spec) {
    return tracked_sqrt(start, pot, t, spec, hk_det);
}

complexd wigner_phase(const VectorXd& x, const VectorXd& xi, const PhasePoint& start,
                      const VectorXd& v, const FlowResult& fr) {
    const VectorXd r1 = x + 0.5 * v - fr.endpoint.q;
    const VectorXd r2 = x - 0.5 * v - start.q;
    const double re =
        fr.action + fr.endpoint.p.dot(r1) - start.p.dot(r2) - v.dot(xi);
    const double im = 0.5 * (r1.squaredNorm() + r2.squaredNorm());
    return {re, im};
}

complexd reduce_v(const VectorXd& x, const VectorXd& xi, const PhasePoint& start,
                  const FlowResult& fr, double hbar) {
    if (!(hbar > 0.0)) throw input_error("reduce_v: hbar must be positive");
    const int d = static_cast<int>(x.size());
    const VectorXd a = x - fr.endpoint.q;
    const VectorXd b = x - start.q;
    // Psi(v) = c + L.v + (i/4)|v|^2 with the pieces below; the v-integral is
    // (4 pi hbar)^{d/2} exp((i/hbar)(c + i L.L)).
    const complexd c(fr.action + fr.endpoint.p.dot(a) - start.p.dot(b),
                     0.5 * (a.squaredNorm() + b.squaredNorm()));
    const VectorXd Lre = 0.5 * (fr.endpoint.p + start.p) - xi;
    const VectorXd Lim = 0.5 * (a - b);
    complexd LdotL(Lre.squaredNorm() - Lim.squaredNorm(), 2.0 * Lre.dot(Lim));
    const complexd exponent = (complexd(0.0, 1.0) * c - LdotL) / hbar;
    return std::pow(4.0 * M_PI * hbar, 0.5 * d) * std::exp(exponent);
}

HKEvaluation wigner_propagator(double t, const VectorXd& x, const VectorXd& xi,
                               const Potential& pot, double hbar, const HKQuadrature& quad,
                               const IntegratorSpec& spec) {
    if (!(hbar > 0.0)) throw input_error("wigner_propagator: hbar must be positive");
    const int d = pot.dim();
    const PhasePoint center = midpoint::invert_midpoint(x, xi, t, pot, spec);

    const double sq = std::sqrt(hbar);
    const double halfwidth = quad.box_halfwidth_units * sq;
    double spacing = quad.node_spacing_units * sq;
    int per_dim = 2 * static_cast<int>(std::ceil(halfwidth / spacing)) + 1;
    per_dim = std::max(per_dim, quad.min_nodes_per_dim | 1);
    spacing = 2.0 * halfwidth / (per_dim - 1);

    const int vars = 2 * d;
    long total = 1;
    for (int k = 0; k < vars; ++k) total *= per_dim;

    const VectorXd c0 = center.flat();
    std::vector<complexd> vals(static_cast<size_t>(total));
    std::vector<int> idx(vars, 0);
    for (long n = 0; n < total; ++n) {
        long rem = n;
        VectorXd z = c0;
        for (int k = 0; k < vars; ++k) {
            idx[k] = static_cast<int>(rem % per_dim);
            rem /= per_dim;
            z[k] += (idx[k] - (per_dim - 1) / 2) * spacing;
        }
        const PhasePoint node = PhasePoint::from_flat(z);
        // One integration per node; the branch of the amplitude square root
        // is tracked along the same path.
        BranchTracker tracker;
        const FlowResult fr = flow_observed(
            node, pot, t, spec,
            [&](double, const FlowResult& f) { tracker.feed(hk_det(f)); }, 0.0);
        if (tracker.max_jump >= 0.25 * M_PI)
            throw degenerate_error("wigner_propagator: amplitude branch winds too fast");
        vals[static_cast<size_t>(n)] = tracker.sqrt_value() * reduce_v(x, xi, node, fr, hbar);
    }

    const double cell = std::pow(spacing, vars);
    const double norm = std::pow(2.0 * M_PI * hbar, -1.5 * d);
    const complexd full = norm * cell * pairwise_sum(vals);

    // Error proxy: trapezoid on the stride-2 sublattice (spacing doubled).
    std::vector<complexd> coarse;
    coarse.reserve(vals.size() / 2);
    for (long n = 0; n < total; ++n) {
        long rem = n;
        bool keep = true;
        for (int k = 0; k < vars; ++k) {
            if ((rem % per_dim) % 2 != 0) { keep = false; break; }
            rem /= per_dim;
        }
        if (keep) coarse.push_back(vals[static_cast<size_t>(n)]);
    }
    const complexd half = norm * std::pow(2.0 * spacing, vars) * pairwise_sum(coarse);

    HKEvaluation ev;
    ev.value = full;
    ev.t = t;
    ev.x = x;
    ev.xi = xi;
    ev.node_count = total;
    ev.quad_error_estimate = std::abs(full - half);
    ev.flagged = ev.quad_error_estimate >
                 quad.flag_threshold_rel * std::max(1.0, std::abs(full));
    return ev;
}

complexd stationary_phase_prediction(double t, const VectorXd& x, const VectorXd& xi,
                                     const Potential& pot, double hbar,
                                     const IntegratorSpec& spec, StationaryPhaseInfo* info) {
    const int d = pot.dim();
    if (t == 0.0) {
        if (info) info->arcs_found = 1;
        return complexd(1.0, 0.0);
    }

    // Newton from the isotropic seed plus deterministic jitters; dedupe.
    std::vector<PhasePoint> arcs;
    SplitMix64 rng(0x5eedu);
    for (int trial = 0; trial < 6; ++trial) {
        PhasePoint seed;
        const double tau = std::tan(0.5 * t);
        seed.q = x - tau * xi;
        seed.p = xi + tau * x;
        if (trial > 0) {
            for (int k = 0; k < d; ++k) {
                seed.q[k] += 0.3 * (rng.next_double() - 0.5);
                seed.p[k] += 0.3 * (rng.next_double() - 0.5);
            }
        }
        try {
            const PhasePoint z = midpoint::invert_midpoint(x, xi, t, pot, spec, &seed);
            bool dup = false;
            for (const auto& a : arcs)
                if ((a.flat() - z.flat()).cwiseAbs().maxCoeff() < 1e-6) dup = true;
            if (!dup) arcs.push_back(z);
        } catch (const solver_error&) {
            // seed diverged; other seeds may still land
        }
    }
    if (info) info->arcs_found = static_cast<int>(arcs.size());
    if (arcs.empty()) {
        if (info) info->flagged = true;
        return complexd(0.0, 0.0);
    }

    std::vector<complexd> terms;
    for (const auto& z : arcs) {
        const FlowResult fr = flow(z, pot, t, spec);
        const int d2 = 2 * d;
        const double det1M =
            (MatrixXd::Identity(d2, d2) + fr.monodromy()).determinant();
        if (std::abs(det1M) < 1e-12)
            throw degenerate_error("stationary_phase_prediction: caustic (det(1+M) = 0)");
        const complexd w = tracked_sqrt(z, pot, t, spec, [d2](const FlowResult& f) {
            return complexd((MatrixXd::Identity(d2, d2) + f.monodromy()).determinant(), 0.0);
        });
        const double psi_c = fr.action - xi.dot(fr.endpoint.q - z.q);
        terms.push_back(std::exp(complexd(0.0, psi_c / hbar)) / w);
    }
    return std::pow(2.0, d) * pairwise_sum(terms);
}

HessianCheck hessian_check(const PhasePoint& start, const Potential& pot, double t,
                           const IntegratorSpec& spec) {
    const int d = pot.dim();
    const FlowResult fr = flow(start, pot, t, spec);
    const MatrixXd &A = fr.A, &B = fr.B, &C = fr.C, &D = fr.D;
    const MatrixXd I = MatrixXd::Identity(d, d);
    const complexd i1(0.0, 1.0);

    using Eigen::MatrixXcd;
    auto cmplx = [&](const MatrixXd& re, const MatrixXd& im) {
        MatrixXcd z(d, d);
        z.real() = re;
        z.imag() = im;
        return z;
    };
    // Blocks of the (v, q, p) Hessian at a dominant critical point; second
    // derivatives of the flow cancel there, leaving the monodromy blocks.
    const MatrixXcd Hvv = cmplx(MatrixXd::Zero(d, d), 0.5 * I);
    const MatrixXcd Hqq = cmplx(-C.transpose() * A, A.transpose() * A + I);
    const MatrixXcd Hpp = cmplx(-D.transpose() * B, B.transpose() * B);
    const MatrixXcd Hqv = 0.5 * cmplx(C.transpose(), I - A.transpose());
    const MatrixXcd Hpv = 0.5 * cmplx(D.transpose() + I, -B.transpose());
    const MatrixXcd Hqp = cmplx(-C.transpose() * B, A.transpose() * B);

    MatrixXcd H(3 * d, 3 * d);
    H.block(0, 0, d, d) = Hvv;
    H.block(0, d, d, d) = Hqv.transpose();
    H.block(0, 2 * d, d, d) = Hpv.transpose();
    H.block(d, 0, d, d) = Hqv;
    H.block(d, d, d, d) = Hqq;
    H.block(d, 2 * d, d, d) = Hqp;
    H.block(2 * d, 0, d, d) = Hpv;
    H.block(2 * d, d, d, d) = Hqp.transpose();
    H.block(2 * d, 2 * d, d, d) = Hpp;

    HessianCheck hc;
    hc.assembled_det = H.determinant();
    const double det1M =
        (MatrixXd::Identity(2 * d, 2 * d) + fr.monodromy()).determinant();
    const complexd hkd = hk_det(fr);
    hc.factored_modulus = std::abs(det1M) * std::abs(hkd);
    hc.ratio = hc.assembled_det / (det1M * hkd);
    return hc;
}

}  // namespace semiwig::hk
