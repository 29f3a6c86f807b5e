#pragma once

#include "semiwig/midpoint.hpp"

namespace semiwig::hk {

using classical::FlowResult;
using classical::IntegratorSpec;
using classical::PhasePoint;
using classical::Potential;

// Phase-space quadrature for the propagator Wigner transform: tensor
// trapezoid on a box around the dominant critical set. Lengths are in units
// of sqrt(hbar), where the Gaussian factors have O(1) width.
struct HKQuadrature {
    double box_halfwidth_units = 6.0;
    double node_spacing_units = 0.5;
    int min_nodes_per_dim = 16;
    double flag_threshold_rel = 1e-3;
};

struct HKEvaluation {
    complexd value;
    double t;
    VectorXd x, xi;
    long node_count = 0;
    double quad_error_estimate = 0.0;
    bool flagged = false;
};

complexd hk_det(const FlowResult& fr);  // det(A + D + i(C - B)), see hk.cpp

// Herman-Kluk phase S + p_t.(x - q_t) - p.(y - q) + (i/2)(|x-q_t|^2 + |y-q|^2).
complexd hk_phase(const PhasePoint& start, const VectorXd& x, const VectorXd& y,
                  const FlowResult& fr);

// Square root of hk_det with the branch continued in t from 2^{d/2} at
// t = 0 (arg steps kept below pi/4, refined adaptively).
complexd hk_amplitude(const PhasePoint& start, const Potential& pot, double t,
                      const IntegratorSpec& spec = {});

// Wigner-transform phase in the (q, p, v) integral.
complexd wigner_phase(const VectorXd& x, const VectorXd& xi, const PhasePoint& start,
                      const VectorXd& v, const FlowResult& fr);

// Exact Gaussian v-integral of exp(i Psi / hbar) at fixed (t, q, p, x, xi):
// the phase is quadratic in v with imaginary part |v|^2/4.
complexd reduce_v(const VectorXd& x, const VectorXd& xi, const PhasePoint& start,
                  const FlowResult& fr, double hbar);

// (2 pi hbar)^d-normalized Wigner symbol of the propagator: equals 1 at t=0
// and sec(t/2) e^{-2i tan(t/2) H / hbar} for the isotropic oscillator.
HKEvaluation wigner_propagator(double t, const VectorXd& x, const VectorXd& xi,
                               const Potential& pot, double hbar,
                               const HKQuadrature& quad = {},
                               const IntegratorSpec& spec = {});

struct StationaryPhaseInfo {
    int arcs_found = 0;
    bool flagged = false;  // no critical point located
};

// 2^d sum_j exp(i Psi_c,j / hbar) / det^{1/2}(1 + M_j), branch-continued.
complexd stationary_phase_prediction(double t, const VectorXd& x, const VectorXd& xi,
                                     const Potential& pot, double hbar,
                                     const IntegratorSpec& spec = {},
                                     StationaryPhaseInfo* info = nullptr);

struct HessianCheck {
    complexd assembled_det;   // det of the 3d x 3d complex Hessian in (v, q, p)
    double factored_modulus;  // |det(1+M)| * |hk_det|
    complexd ratio;           // assembled / (det(1+M) hk_det)
};

// Hessian of the Wigner-transform phase at the dominant critical point of the
// arc from `start` (x = (q+q_t)/2, xi = (p+p_t)/2, v = q_t - q).
HessianCheck hessian_check(const PhasePoint& start, const Potential& pot, double t,
                           const IntegratorSpec& spec = {});

}  // namespace semiwig::hk
