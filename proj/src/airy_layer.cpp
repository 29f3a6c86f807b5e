#include "semiwig/airy_layer.hpp"

#include <cmath>

#include "semiwig/specfun.hpp"

namespace semiwig::airy {

using classical::flow;
using classical::FlowResult;
using classical::hamiltonian;

double Convention::base_constant(int d) const {
    return kappa * std::pow(2.0, d + 1) * std::pow(2.0 * M_PI, -(d + 0.5));
}
double Convention::prefactor_airy(double hbar, int d) const {
    return base_constant(d) * std::pow(hbar, -d + 1.0 / 3.0);
}
double Convention::prefactor_nondeg(double hbar, int d) const {
    return base_constant(d) * std::pow(hbar, -d + 0.5);
}

PhaseProfile::PhaseProfile(VectorXd x, VectorXd xi, double E, const Potential& pot,
                           IntegratorSpec spec, double newton_tol)
    : x_(std::move(x)), xi_(std::move(xi)), E_(E), pot_(pot), spec_(spec), tol_(newton_tol) {
    if (x_.size() != pot.dim() || xi_.size() != pot.dim())
        throw input_error("PhaseProfile: dimension mismatch");
    if (!(E > 0.0)) throw input_error("PhaseProfile: E must be positive");
}

PhasePoint PhaseProfile::arc_start(double t) const {
    if (t == 0.0) return PhasePoint{x_, xi_};

    // Warm start from the nearest cached time, else the isotropic inverse.
    const PhasePoint* seed = nullptr;
    PhasePoint warm;
    auto it = cache_.lower_bound(t);
    double best = std::numeric_limits<double>::infinity();
    for (auto probe : {it, (it == cache_.begin() ? cache_.end() : std::prev(it))}) {
        if (probe == cache_.end()) continue;
        if (std::abs(probe->first - t) < best) {
            best = std::abs(probe->first - t);
            warm = probe->second;
        }
    }
    if (std::isfinite(best) && best <= 0.5) seed = &warm;

    const PhasePoint z = midpoint::invert_midpoint(x_, xi_, t, pot_, spec_, seed,
                                                   tol_ * std::max(1.0, E_));
    cache_[t] = z;
    if (cache_.size() > 512) cache_.erase(cache_.begin());
    return z;
}

double PhaseProfile::psi(double t) const {
    if (t == 0.0) return 0.0;
    const PhasePoint z = arc_start(t);
    const FlowResult fr = flow(z, pot_, t, spec_);
    return fr.action - xi_.dot(fr.endpoint.q - z.q) + t * E_;
}

double PhaseProfile::dpsi(double t) const {
    const PhasePoint z = arc_start(t);
    return E_ - hamiltonian(z, pot_);
}

double PhaseProfile::d2psi(double t, double h) const {
    const double g1 = (dpsi(t + h) - dpsi(t - h)) / (2.0 * h);
    const double g2 = (dpsi(t + 0.5 * h) - dpsi(t - 0.5 * h)) / h;
    return (4.0 * g2 - g1) / 3.0;
}

double PhaseProfile::d3psi_fold(double h) const {
    // psi''' (0) from the exact first derivative; the cubic normal form fixes
    // the time orientation so that the coefficient comes out positive.
    const double raw = (dpsi(h) - 2.0 * dpsi(0.0) + dpsi(-h)) / (h * h);
    return -raw;
}

double psi_E(double t, const VectorXd& x, const VectorXd& xi, double E, const Potential& pot,
             const IntegratorSpec& spec) {
    return PhaseProfile(x, xi, E, pot, spec).psi(t);
}

CfuNormalForm cfu_extract(const PhaseProfile& profile, const MidpointSolution& sol) {
    CfuNormalForm nf;
    if (sol.t_plus == 0.0) return nf;  // coalesced roots on Sigma_E
    const double phi_a = profile.psi(sol.t_plus);
    const double phi_b = profile.psi(sol.t_minus);
    nf.mu = 0.5 * (phi_a + phi_b);
    nf.phi_plus = std::min(phi_a, phi_b);
    nf.phi_minus = std::max(phi_a, phi_b);
    const double rho32 = 0.75 * (nf.phi_minus - nf.phi_plus);
    if (rho32 < -1e-12)
        throw solver_error("cfu_extract: negative rho^{3/2} after labeling");
    nf.rho = std::pow(std::max(rho32, 0.0), 2.0 / 3.0);
    return nf;
}

double u00_coefficient(const MidpointSolution& sol, const Potential& pot,
                       const IntegratorSpec& spec, std::optional<double> rho) {
    if (!(sol.t_plus > 0.0))
        throw degenerate_error("u00_coefficient: needs t_plus > 0 (strictly inside the fold)");
    double r = rho.value_or(-1.0);
    if (!rho) {
        PhaseProfile profile(sol.query.q, sol.query.p, sol.energy, pot, spec);
        r = cfu_extract(profile, sol).rho;
    }
    double dtde = sol.dt_dE;
    if (!std::isfinite(dtde)) dtde = midpoint::dt_dE(sol, pot, spec);
    const FlowResult fr = flow(sol.base, pot, sol.t_plus, spec);
    const int d2 = 2 * pot.dim();
    const double det1M = (MatrixXd::Identity(d2, d2) + fr.monodromy()).determinant();
    if (std::abs(det1M) < 1e-14)
        throw degenerate_error("u00_coefficient: det(1+M) vanishes (caustic)");
    return std::sqrt(M_PI) * std::pow(r, 0.25) * std::sqrt(std::abs(dtde)) /
           std::sqrt(std::abs(det1M));
}

namespace {

// Newton-form polynomial through (xs_k, ys_k), evaluated at xq.
double poly_extrapolate(const std::vector<double>& xs, const std::vector<double>& ys,
                        double xq) {
    const size_t n = xs.size();
    std::vector<double> c = ys;
    for (size_t j = 1; j < n; ++j)
        for (size_t i = n - 1; i >= j; --i)
            c[i] = (c[i] - c[i - 1]) / (xs[i] - xs[i - j]);
    double v = c[n - 1];
    for (size_t i = n - 1; i-- > 0;) v = v * (xq - xs[i]) + c[i];
    return v;
}

struct RhoU00 {
    double rho, u00, mu;
};

RhoU00 direct_rho_u00(const VectorXd& x, const VectorXd& xi, double E, const Potential& pot,
                      const IntegratorSpec& spec) {
    midpoint::SolveOptions so;
    MidpointSolution sol = midpoint::solve_midpoint(x, xi, E, pot, spec, so);
    PhaseProfile profile(x, xi, E, pot, spec);
    const CfuNormalForm nf = cfu_extract(profile, sol);
    return {nf.rho, u00_coefficient(sol, pot, spec, nf.rho), nf.mu};
}

}  // namespace

AiryLayerPrediction predict_airy_layer(const VectorXd& x, const VectorXd& xi, double E,
                                       double hbar, const Potential& pot,
                                       const IntegratorSpec& spec, const Convention& conv) {
    if (!(hbar > 0.0)) throw input_error("predict_airy_layer: hbar must be positive");
    const int d = pot.dim();
    PhasePoint query{x, xi};
    const double H = hamiltonian(query, pot);
    const double s = H / E;

    AiryLayerPrediction pr;
    pr.hbar = hbar;
    pr.convention_id = conv.id;
    pr.s = s;
    pr.u = (H - E) / std::pow(hbar / (2.0 * E), 2.0 / 3.0);

    if (1.0 - s >= conv.fold_fit_threshold) {
        const RhoU00 r = direct_rho_u00(x, xi, E, pot, spec);
        pr.rho = r.rho;
        pr.mu = r.mu;
        pr.u00 = r.u00;
    } else {
        // On or outside Sigma_E (and in the last sliver inside): rho and u00
        // continue smoothly across the fold. Sample them on real arcs along
        // the gradient line through the query and extrapolate in 1-s.
        std::vector<double> xs, rhos, u00s;
        for (double delta : conv.fit_nodes) {
            const PhasePoint node =
                midpoint::move_to_energy(query, pot, E * (1.0 - delta));
            const RhoU00 r = direct_rho_u00(node.q, node.p, E, pot, spec);
            xs.push_back(delta);
            rhos.push_back(r.rho);
            u00s.push_back(r.u00);
        }
        const double dq = 1.0 - s;
        pr.rho = poly_extrapolate(xs, rhos, dq);
        pr.mu = 0.0;
        pr.u00 = poly_extrapolate(xs, u00s, dq);
        pr.extrapolated = true;
    }

    const double z = std::pow(hbar, -2.0 / 3.0) * pr.rho;
    if (std::abs(z) > conv.airy_arg_max)
        throw domain_error("predict_airy_layer: query outside the Airy window "
                           "(use the nondegenerate route)");
    pr.value = conv.prefactor_airy(hbar, d) * specfun::airy_ai(-z) * pr.u00;
    return pr;
}

double predict_nondegenerate(const VectorXd& x, const VectorXd& xi, double E, double hbar,
                             const std::function<double(double)>& fhat, const Potential& pot,
                             const IntegratorSpec& spec, const Convention& conv,
                             std::vector<NondegContribution>* parts,
                             double min_separation) {
    if (!(hbar > 0.0)) throw input_error("predict_nondegenerate: hbar must be positive");
    const int d = pot.dim();
    midpoint::SolveOptions so;
    MidpointSolution sol = midpoint::solve_midpoint(x, xi, E, pot, spec, so);
    if (!(sol.t_plus > 0.0))
        throw degenerate_error("predict_nondegenerate: query on Sigma_E (degenerate pair)");

    // The +-t pair must be resolvable by stationary phase: the two Gaussian
    // widths sqrt(hbar |dt/dE|) may not overlap.
    const double width = std::sqrt(hbar * std::abs(sol.dt_dE));
    if (2.0 * sol.t_plus < min_separation * width)
        throw degenerate_error(
            "predict_nondegenerate: critical times too close to the fold for "
            "stationary phase (use the Airy route)");

    const FlowResult fr = flow(sol.base, pot, sol.t_plus, spec);
    const int d2 = 2 * d;
    const double det1M = (MatrixXd::Identity(d2, d2) + fr.monodromy()).determinant();
    if (std::abs(det1M) < 1e-14)
        throw degenerate_error("predict_nondegenerate: det(1+M) vanishes (caustic)");
    const double g0 = std::sqrt(std::abs(sol.dt_dE)) / std::sqrt(std::abs(det1M));

    // Critical value of the phase at +t_plus (equals the chord-arc area).
    const double S_plus = fr.action - xi.dot(fr.endpoint.q - sol.base.q) + sol.t_plus * E;
    const double w = fhat(sol.t_plus);
    const double pref = conv.prefactor_nondeg(hbar, d);

    if (parts) {
        parts->clear();
        parts->push_back({sol.t_plus, S_plus, -0.25 * M_PI, 0.5 * pref * w * g0});
        parts->push_back({sol.t_minus, -S_plus, 0.25 * M_PI, 0.5 * pref * w * g0});
    }
    // One cosine per unordered arc; the two signed roots carry half each.
    return pref * w * g0 * std::cos(S_plus / hbar - 0.25 * M_PI);
}

OscillatorClosedForms oscillator_closed_forms(double s, double E, int d) {
    if (!(s > 0.0 && s <= 1.0)) throw input_error("oscillator_closed_forms: s in (0, 1]");
    if (!(E > 0.0)) throw input_error("oscillator_closed_forms: E must be positive");
    OscillatorClosedForms cf;
    cf.beta = 0.5 * (std::acos(std::sqrt(s)) - std::sqrt(s - s * s));
    cf.B2 = -std::pow(1.5 * cf.beta, 2.0 / 3.0);
    cf.t_plus = 2.0 * std::acos(std::sqrt(s));
    cf.det_one_plus_M = std::pow(4.0 * s, d);
    cf.dt_dE = (s < 1.0) ? std::sqrt(s) / (E * std::sqrt(1.0 - s))
                         : std::numeric_limits<double>::infinity();
    cf.area = E * (cf.t_plus - std::sin(cf.t_plus));
    if (1.0 - s < 1e-12) {
        cf.alpha0 = std::pow(2.0, 1.0 / 3.0);  // limit value at the fold
    } else {
        const double absB = std::pow(1.5 * cf.beta, 1.0 / 3.0);
        cf.alpha0 = std::sqrt(2.0 * absB) / (std::pow(1.0 - s, 0.25) * std::pow(s, 0.75));
    }
    return cf;
}

}  // namespace semiwig::airy
