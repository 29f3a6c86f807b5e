#include "semiwig/midpoint.hpp"

#include <cmath>

namespace semiwig::midpoint {

namespace {

using classical::flow;
using classical::hamiltonian;

VectorXd theta_of(const PhasePoint& pt, const FlowResult& fr) {
    VectorXd th(2 * pt.dim());
    th.head(pt.dim()) = 0.5 * (pt.q + fr.endpoint.q);
    th.tail(pt.dim()) = 0.5 * (pt.p + fr.endpoint.p);
    return th;
}

struct NewtonState {
    double t;
    PhasePoint z;
    double residual;
};

// Seed from the isotropic closed form; exact for the oscillator, a good
// predictor in the perturbative regime.
NewtonState oscillator_seed(const VectorXd& x, const VectorXd& xi, double s, int branch) {
    const double sc = std::clamp(s, 0.0, 1.0);
    double t0 = 2.0 * std::acos(std::sqrt(sc));
    if (t0 < 1e-8) t0 = 1e-8;
    const double tau = std::tan(0.5 * t0);
    NewtonState st;
    st.t = branch >= 0 ? t0 : -t0;
    st.z.q = x - (branch >= 0 ? tau : -tau) * xi;
    st.z.p = xi + (branch >= 0 ? tau : -tau) * x;
    st.residual = std::numeric_limits<double>::infinity();
    return st;
}

}  // namespace

PhasePoint midpoint_map(const PhasePoint& pt, const Potential& pot, double t,
                        const IntegratorSpec& spec) {
    const FlowResult fr = flow(pt, pot, t, spec);
    PhasePoint mid;
    mid.q = 0.5 * (pt.q + fr.endpoint.q);
    mid.p = 0.5 * (pt.p + fr.endpoint.p);
    return mid;
}

MidpointSolution solve_midpoint(const VectorXd& x, const VectorXd& xi, double E,
                                const Potential& pot, const IntegratorSpec& spec,
                                const SolveOptions& opts) {
    if (x.size() != pot.dim() || xi.size() != pot.dim())
        throw input_error("solve_midpoint: dimension mismatch");
    if (!(E > 0.0)) throw input_error("solve_midpoint: E must be positive");

    const int d = pot.dim();
    PhasePoint query{x, xi};
    const double Hq = hamiltonian(query, pot);
    const double s = Hq / E;
    if (s > 1.0 + 1e-10)
        throw domain_error("solve_midpoint: query outside the energy ball (no real arc)");
    if (1.0 - s > opts.tube_radius + 1e-9)
        throw domain_error("solve_midpoint: query outside the warranty tube");

    MidpointSolution sol;
    sol.energy = E;
    sol.s = s;
    sol.query = query;

    if (s >= 1.0 - 1e-12) {  // fold point: coalesced critical times
        sol.t_plus = sol.t_minus = 0.0;
        sol.base = sol.endpoint = query;
        sol.forward_residual = 0.0;
        sol.solved_branch = opts.branch_sign;
        return sol;
    }

    const double tol = opts.newton_tol * std::max(1.0, E);
    NewtonState st = oscillator_seed(x, xi, s, opts.branch_sign);
    VectorXd target(2 * d + 1);
    target.head(2 * d).head(d) = x;
    target.head(2 * d).tail(d) = xi;
    target[2 * d] = E;

    std::vector<double> trace;
    bool converged = false;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const FlowResult fr = flow(st.z, pot, st.t, spec);
        VectorXd F(2 * d + 1);
        F.head(2 * d) = theta_of(st.z, fr) - target.head(2 * d);
        F[2 * d] = hamiltonian(st.z, pot) - E;
        const double rn = F.cwiseAbs().maxCoeff();
        trace.push_back(rn);
        st.residual = rn;
        if (rn <= tol) {
            converged = true;
            break;
        }
        MatrixXd J = MatrixXd::Zero(2 * d + 1, 2 * d + 1);
        const VectorXd xidot = classical::hamilton_vector_field(fr.endpoint, pot);
        J.block(0, 0, 2 * d, 1) = 0.5 * xidot;
        J.block(0, 1, 2 * d, 2 * d) =
            0.5 * (MatrixXd::Identity(2 * d, 2 * d) + fr.monodromy());
        J(2 * d, 0) = 0.0;
        J.block(2 * d, 1, 1, d) = pot.gradient(st.z.q).transpose();
        J.block(2 * d, 1 + d, 1, d) = st.z.p.transpose();

        const VectorXd step = J.colPivHouseholderQr().solve(-F);
        double damping = 1.0;
        NewtonState trial = st;
        for (int bt = 0; bt < 10; ++bt) {
            trial.t = st.t + damping * step[0];
            trial.z.q = st.z.q + damping * step.segment(1, d);
            trial.z.p = st.z.p + damping * step.segment(1 + d, d);
            const FlowResult ft = flow(trial.z, pot, trial.t, spec);
            VectorXd Ft(2 * d + 1);
            Ft.head(2 * d) = theta_of(trial.z, ft) - target.head(2 * d);
            Ft[2 * d] = hamiltonian(trial.z, pot) - E;
            if (Ft.cwiseAbs().maxCoeff() < rn || damping < 1.0 / 512.0) break;
            damping *= 0.5;
        }
        st = trial;
    }
    if (!converged)
        throw solver_error("solve_midpoint: Newton did not converge", trace);

    // Canonicalize to the positive-time orientation.
    double t_solved = st.t;
    PhasePoint base = st.z;
    if (t_solved < 0.0) {
        const FlowResult fr = flow(base, pot, t_solved, spec);
        base = fr.endpoint;
        t_solved = -t_solved;
    }
    sol.t_plus = t_solved;
    sol.t_minus = -t_solved;
    sol.base = base;
    sol.solved_branch = opts.branch_sign;
    sol.newton_residuals = std::move(trace);

    const FlowResult fwd = flow(base, pot, sol.t_plus, spec);
    sol.endpoint = fwd.endpoint;
    sol.forward_residual = (theta_of(base, fwd) - target.head(2 * d)).cwiseAbs().maxCoeff();

    const auto& gl = gauss_legendre(opts.arc_nodes);
    sol.arc_times.resize(gl.nodes.size());
    sol.arc.resize(gl.nodes.size());
    for (size_t k = 0; k < gl.nodes.size(); ++k) {
        const double tk = 0.5 * sol.t_plus * (1.0 + gl.nodes[k]);
        sol.arc_times[k] = tk;
        sol.arc[k] = flow(base, pot, tk, spec).endpoint;
    }

    if (opts.with_dt_dE) sol.dt_dE = dt_dE(sol, pot, spec, opts);
    return sol;
}

double dt_dE(const MidpointSolution& sol, const Potential& pot, const IntegratorSpec& spec,
             const SolveOptions& opts) {
    if (!(sol.t_plus > 0.0))
        throw degenerate_error("dt_dE: undefined at the fold (t_plus = 0)");
    SolveOptions o = opts;
    o.with_dt_dE = false;
    o.branch_sign = +1;
    o.tube_radius = opts.tube_radius + 0.01;  // the E-shifts move s slightly
    const double E = sol.energy;
    auto tplus_at = [&](double Ev) {
        return solve_midpoint(sol.query.q, sol.query.p, Ev, pot, spec, o).t_plus;
    };
    const double h = opts.dt_dE_step_rel * E;
    // s increases toward 1 as E decreases; keep both evaluations inside B_E.
    const double g1 = (tplus_at(E + h) - tplus_at(E - h)) / (2.0 * h);
    const double g2 = (tplus_at(E + 0.5 * h) - tplus_at(E - 0.5 * h)) / h;
    const double val = (4.0 * g2 - g1) / 3.0;
    if (!std::isfinite(val) || std::abs(val) > 1e12)
        throw degenerate_error("dt_dE: degenerate geometry (diverging derivative)");
    return val;
}

double chord_area(const MidpointSolution& sol) {
    if (sol.t_plus == 0.0) return 0.0;
    const auto& gl = gauss_legendre(static_cast<int>(sol.arc.size()));
    std::vector<double> terms(sol.arc.size());
    for (size_t k = 0; k < sol.arc.size(); ++k)
        terms[k] = gl.weights[k] * sol.arc[k].p.squaredNorm();
    const double arc_pdq = 0.5 * sol.t_plus * pairwise_sum(terms);
    const double chord = sol.query.p.dot(sol.endpoint.q - sol.base.q);
    return arc_pdq - chord;
}

double chord_area_resampled(const MidpointSolution& sol, const Potential& pot,
                            const IntegratorSpec& spec, int n) {
    if (sol.t_plus == 0.0) return 0.0;
    const auto& gl = gauss_legendre(n);
    std::vector<double> terms(gl.nodes.size());
    for (size_t k = 0; k < gl.nodes.size(); ++k) {
        const double tk = 0.5 * sol.t_plus * (1.0 + gl.nodes[k]);
        terms[k] = gl.weights[k] * flow(sol.base, pot, tk, spec).endpoint.p.squaredNorm();
    }
    const double arc_pdq = 0.5 * sol.t_plus * pairwise_sum(terms);
    return arc_pdq - sol.query.p.dot(sol.endpoint.q - sol.base.q);
}

FoldDiagnostics fold_diagnostics(const PhasePoint& pt, const Potential& pot,
                                 const IntegratorSpec& spec, double fd_step,
                                 double reference_time) {
    const double h = fd_step;
    auto curve = [&](double sv) {
        const FlowResult back = flow(pt, pot, -sv, spec);
        return theta_of(back.endpoint, flow(back.endpoint, pot, 2.0 * sv, spec));
    };
    const VectorXd deriv = (curve(h) - curve(-h)) / (2.0 * h);
    FoldDiagnostics fd;
    fd.kernel_residual = deriv.cwiseAbs().maxCoeff();
    const FlowResult fr = flow(pt, pot, reference_time, spec);
    const int d2 = 2 * pt.dim();
    fd.jacobian_det_theta =
        (0.5 * (MatrixXd::Identity(d2, d2) + fr.monodromy())).determinant();
    fd.reference_time = reference_time;
    return fd;
}

PhasePoint invert_midpoint(const VectorXd& x, const VectorXd& xi, double t,
                           const Potential& pot, const IntegratorSpec& spec,
                           const PhasePoint* seed, double tol) {
    const int d = pot.dim();
    if (x.size() != d || xi.size() != d) throw input_error("invert_midpoint: dimension mismatch");
    PhasePoint z;
    if (seed) {
        z = *seed;
    } else {
        const double tau = std::tan(0.5 * t);
        z.q = x - tau * xi;
        z.p = xi + tau * x;
    }
    if (t == 0.0) return PhasePoint{x, xi};
    for (int iter = 0; iter < 50; ++iter) {
        const FlowResult fr = flow(z, pot, t, spec);
        VectorXd G(2 * d);
        G.head(d) = 0.5 * (z.q + fr.endpoint.q) - x;
        G.tail(d) = 0.5 * (z.p + fr.endpoint.p) - xi;
        if (G.cwiseAbs().maxCoeff() <= tol) return z;
        const MatrixXd J = 0.5 * (MatrixXd::Identity(2 * d, 2 * d) + fr.monodromy());
        const VectorXd step = J.partialPivLu().solve(-G);
        z.q += step.head(d);
        z.p += step.tail(d);
    }
    throw solver_error("invert_midpoint: Newton did not converge");
}

PhasePoint move_to_energy(const PhasePoint& start, const Potential& pot, double H_target) {
    PhasePoint pt = start;
    for (int iter = 0; iter < 60; ++iter) {
        const double H = hamiltonian(pt, pot);
        if (std::abs(H - H_target) < 1e-13 * std::max(1.0, std::abs(H_target))) return pt;
        VectorXd g(2 * pt.dim());
        g.head(pt.dim()) = pot.gradient(pt.q);
        g.tail(pt.dim()) = pt.p;
        const double gn2 = g.squaredNorm();
        if (gn2 < 1e-30)
            throw degenerate_error("move_to_energy: vanishing gradient of H");
        const VectorXd step = -(H - H_target) / gn2 * g;
        pt.q += step.head(pt.dim());
        pt.p += step.tail(pt.dim());
    }
    throw solver_error("move_to_energy: did not converge");
}

}  // namespace semiwig::midpoint
