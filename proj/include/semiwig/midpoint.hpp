#pragma once

#include "semiwig/classical.hpp"

namespace semiwig::midpoint {

using classical::FlowResult;
using classical::IntegratorSpec;
using classical::PhasePoint;
using classical::Potential;

struct SolveOptions {
    double tube_radius = 0.5;   // accept queries with 1 - s <= tube_radius
    double newton_tol = 1e-12;  // residual tolerance, scaled by max(1, E)
    int max_iterations = 60;
    int arc_nodes = 64;         // Gauss-Legendre samples stored per arc
    bool with_dt_dE = true;
    double dt_dE_step_rel = 1e-4;  // FD step in E, Richardson-extrapolated
    int branch_sign = +1;          // Newton seed side; result is canonicalized
};

// One solved chord: the Hamiltonian arc on Sigma_E whose midpoint is the query.
// Always stored in the positive-time orientation; the negative branch is the
// reversed arc (base and endpoint swapped, t -> -t).
struct MidpointSolution {
    double t_plus = 0.0;   // > 0 (0 exactly on Sigma_E)
    double t_minus = 0.0;  // = -t_plus
    PhasePoint base;       // gamma(0) on Sigma_E
    PhasePoint endpoint;   // gamma(t_plus) = Phi^{t_plus}(base)
    double energy = 0.0;   // E
    double s = 0.0;        // H(x,xi)/E
    PhasePoint query;      // (x, xi)
    double dt_dE = std::numeric_limits<double>::quiet_NaN();
    int solved_branch = +1;
    double forward_residual = 0.0;  // ||Theta^{t+}(base) - query||_inf
    std::vector<double> arc_times;  // GL nodes in (0, t_plus)
    std::vector<PhasePoint> arc;    // gamma at those times
    std::vector<double> newton_residuals;
};

struct FoldDiagnostics {
    double kernel_residual;      // || d/ds Theta(2s, Phi^{-s} pt) at s=0 ||
    double jacobian_det_theta;   // det D_{q,p} Theta^t at the reference time
    double reference_time;
};

// Theta^t(q,p) = ((q + q_t)/2, (p + p_t)/2)
PhasePoint midpoint_map(const PhasePoint& pt, const Potential& pot, double t,
                        const IntegratorSpec& spec = {});

// Newton on { Theta^t(q,p) = (x,xi), H(q,p) = E }, seeded with the oscillator
// closed form t0 = 2 acos(sqrt(s)), q0 = x - tan(t0/2) xi, p0 = xi + tan(t0/2) x.
MidpointSolution solve_midpoint(const VectorXd& x, const VectorXd& xi, double E,
                                const Potential& pot, const IntegratorSpec& spec = {},
                                const SolveOptions& opts = {});

// d t_plus / dE at fixed query, central differences of the solved family.
double dt_dE(const MidpointSolution& sol, const Potential& pot,
             const IntegratorSpec& spec = {}, const SolveOptions& opts = {});

// Oriented area of the surface bounded by the arc and the closing chord:
// int_arc p.dq - <xi, q(t+) - q(0)>, GL quadrature on the stored samples.
double chord_area(const MidpointSolution& sol);

// Same area with a freshly sampled arc of n nodes (tolerance checks).
double chord_area_resampled(const MidpointSolution& sol, const Potential& pot,
                            const IntegratorSpec& spec, int n);

// Fold test at a point of Sigma_E: the kernel direction 2 d/dt - Xi_H of
// D Theta~ at t=0, evaluated by central differences along s -> (2s, Phi^{-s} pt).
FoldDiagnostics fold_diagnostics(const PhasePoint& pt_on_sigma, const Potential& pot,
                                 const IntegratorSpec& spec = {}, double fd_step = 1e-4,
                                 double reference_time = 0.1);

// Moves a phase point along the gradient line of H until H reaches target.
PhasePoint move_to_energy(const PhasePoint& start, const Potential& pot, double H_target);

// Fixed-t inversion of the midpoint map: the (q,p) with Theta^t(q,p) = (x,xi).
// Well-posed away from the fold (no energy constraint; the arc energy floats).
PhasePoint invert_midpoint(const VectorXd& x, const VectorXd& xi, double t,
                           const Potential& pot, const IntegratorSpec& spec = {},
                           const PhasePoint* seed = nullptr, double tol = 1e-12);

}  // namespace semiwig::midpoint
