#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>

#include "semiwig/midpoint.hpp"

namespace semiwig::airy {

using classical::IntegratorSpec;
using classical::PhasePoint;
using classical::Potential;
using midpoint::MidpointSolution;

// Frozen record of the constant-normalization choices. The single scale
// factor kappa is calibrated once on the exactly solvable oscillator and then
// reused verbatim for every other potential; everything else is fixed here.
struct Convention {
    std::string id = "rho-cfu34.u00-invsplit.c2d-v1";
    double kappa = 1.0;
    bool calibrated = false;
    double airy_arg_max = 25.0;        // |hbar^{-2/3} rho| acceptance window
    double fold_fit_threshold = 5e-3;  // 1-s below this: fold-crossing extrapolation
    std::array<double, 4> fit_nodes = {0.01, 0.02, 0.03, 0.04};  // in 1-s

    // kappa * 2^{d+1} (2 pi)^{-d-1/2}, the universal constant in front of both
    // the Airy-layer and the two-point stationary-phase forms.
    double base_constant(int d) const;
    double prefactor_airy(double hbar, int d) const;    // * hbar^{-d+1/3}
    double prefactor_nondeg(double hbar, int d) const;  // * hbar^{-d+1/2}
};

// Psi_E(t, x, xi) along t for one fixed query: the reduced time phase built
// from the arc through (x, xi) at time t (the arc energy floats off-critical).
// Evaluated as S(t) - <xi, q_t - q> + t E from a fixed-t inversion of the
// midpoint map; the exact first derivative E - H(arc start) comes for free.
class PhaseProfile {
public:
    PhaseProfile(VectorXd x, VectorXd xi, double E, const Potential& pot,
                 IntegratorSpec spec = {}, double newton_tol = 1e-12);

    double psi(double t) const;
    double dpsi(double t) const;  // = E - H(gamma_t(0)), no finite differences
    double d2psi(double t, double h = 3e-4) const;
    // Third t-derivative at the fold, reported in the cubic-normal-form
    // orientation (positive at a strictly convex fold).
    double d3psi_fold(double h = 1e-2) const;
    PhasePoint arc_start(double t) const;

    double energy() const { return E_; }
    const VectorXd& x() const { return x_; }
    const VectorXd& xi() const { return xi_; }

private:
    VectorXd x_, xi_;
    double E_;
    const Potential& pot_;
    IntegratorSpec spec_;
    double tol_;
    mutable std::map<double, PhasePoint> cache_;  // warm starts along t
};

double psi_E(double t, const VectorXd& x, const VectorXd& xi, double E,
             const Potential& pot, const IntegratorSpec& spec = {});

struct CfuNormalForm {
    double rho = 0.0;        // >= 0 on the real-arc side
    double mu = 0.0;         // mean critical value; vanishes by arc reversal
    double phi_plus = 0.0;   // critical phase at the CFU plus root (smaller value)
    double phi_minus = 0.0;  // at the minus root
};

// rho^{3/2} = (3/4)(phi(t-) - phi(t+)) with the labeling that makes rho >= 0,
// mu = (phi(t-) + phi(t+))/2. Critical values evaluated through the profile.
CfuNormalForm cfu_extract(const PhaseProfile& profile, const MidpointSolution& sol);

// sqrt(pi) rho^{1/4} |dt/dE|^{1/2} |det(1 + M_{t+})|^{-1/2}
double u00_coefficient(const MidpointSolution& sol, const Potential& pot,
                       const IntegratorSpec& spec, std::optional<double> rho = {});

struct AiryLayerPrediction {
    double rho = 0.0, mu = 0.0, u00 = 0.0;
    double hbar = 0.0;
    double value = 0.0;  // prefactor * Ai(-hbar^{-2/3} rho) * u00
    std::string convention_id;
    bool extrapolated = false;  // query on/outside Sigma_E: fold-crossing fit
    double s = 0.0, u = 0.0;
};

AiryLayerPrediction predict_airy_layer(const VectorXd& x, const VectorXd& xi, double E,
                                       double hbar, const Potential& pot,
                                       const IntegratorSpec& spec = {},
                                       const Convention& conv = {});

struct NondegContribution {
    double t_j, S_j, m_j, amplitude;
};

// Two-point stationary-phase value away from the fold. fhat is the window's
// compactly supported Fourier transform. Contributions (one per signed
// critical time) optionally returned through `parts`.
double predict_nondegenerate(const VectorXd& x, const VectorXd& xi, double E, double hbar,
                             const std::function<double(double)>& fhat,
                             const Potential& pot, const IntegratorSpec& spec = {},
                             const Convention& conv = {},
                             std::vector<NondegContribution>* parts = nullptr,
                             double min_separation = 8.0);

struct OscillatorClosedForms {
    double beta;    // (acos sqrt(s) - sqrt(s - s^2)) / 2
    double B2;      // -(3 beta / 2)^{2/3}
    double alpha0;  // sqrt(2|B|) / ((1-s)^{1/4} s^{3/4})
    double t_plus;  // 2 acos sqrt(s)
    double det_one_plus_M;  // (4s)^d
    double dt_dE;   // sqrt(s) / (E sqrt(1-s))
    double area;    // E (t - sin t)
};
OscillatorClosedForms oscillator_closed_forms(double s, double E, int d = 1);

}  // namespace semiwig::airy
