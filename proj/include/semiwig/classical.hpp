#pragma once

#include <array>
#include <functional>
#include <vector>

#include "semiwig/common.hpp"

namespace semiwig::classical {

// Confining potentials with globally bounded Hessian (so the long-time
// propagator parametrix applies). All builtin kinds are separable, which the
// quantum module exploits for d >= 2. Construction rejects anything with
// unbounded derivatives of order >= 2.
class Potential {
public:
    enum class Kind { Isotropic, Anisotropic, CosinePerturbed, PolynomialBounded };

    static Potential isotropic(int dim);
    static Potential anisotropic(std::vector<double> omega);
    // V(x) = sum_j [ x_j^2/2 + lambda (1 - cos x_j) ], lambda in [0, 0.5]
    static Potential cosine_perturbed(int dim, double lambda);
    // Per-axis c0 + c1 x + c2 x^2 with c2 > 0; higher degrees are rejected.
    static Potential polynomial_bounded(std::vector<std::array<double, 3>> axis_coeffs);

    int dim() const { return dim_; }
    Kind kind() const { return kind_; }
    double lambda() const { return lambda_; }

    double value(const VectorXd& q) const;
    VectorXd gradient(const VectorXd& q) const;
    MatrixXd hessian(const VectorXd& q) const;

    // 1D factor along one axis (all builtins are separable).
    double axis_value(int axis, double x) const;
    double axis_gradient(int axis, double x) const;
    double axis_hessian(int axis, double x) const;

    double hessian_sup_bound() const;
    std::string describe() const;

private:
    Potential(Kind k, int d) : kind_(k), dim_(d) {}
    Kind kind_;
    int dim_;
    double lambda_ = 0.0;
    std::vector<double> omega_;
    std::vector<std::array<double, 3>> coeffs_;
};

struct PhasePoint {
    VectorXd q, p;
    PhasePoint() = default;
    PhasePoint(VectorXd q_, VectorXd p_) : q(std::move(q_)), p(std::move(p_)) {}
    static PhasePoint make1d(double q, double p);
    int dim() const { return static_cast<int>(q.size()); }
    VectorXd flat() const;  // (q, p) stacked
    static PhasePoint from_flat(const VectorXd& z);
};

struct IntegratorSpec {
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    long max_steps = 1000000;
    double max_horizon = 20.0;
    void validate() const;
};

struct FlowResult {
    double t = 0.0;
    PhasePoint endpoint;
    MatrixXd A, B, C, D;  // d x d blocks of the monodromy matrix
    double action = 0.0;  // S(t,q,p) = int (qdot.p - H) ds
    double energy = 0.0;  // H at the initial point
    double error_estimate = 0.0;
    MatrixXd monodromy() const;  // [[A, B], [C, D]]
};

double hamiltonian(const PhasePoint& pt, const Potential& pot);

// (dH/dp, -dH/dq) = (p, -grad V)
VectorXd hamilton_vector_field(const PhasePoint& pt, const Potential& pot);

// Integrates Hamilton's equations jointly with the variational equations and
// the action, adaptive RKF78 at spec tolerances. Symplecticity of the blocks
// is verified by symplectic_residual, never enforced.
FlowResult flow(const PhasePoint& pt, const Potential& pot, double t,
                const IntegratorSpec& spec = {});

// Same integration, invoking cb(t_k, FlowResult-so-far) at every accepted
// step (used for branch tracking of amplitude square roots).
FlowResult flow_observed(const PhasePoint& pt, const Potential& pot, double t,
                         const IntegratorSpec& spec,
                         const std::function<void(double, const FlowResult&)>& cb,
                         double max_dt = 0.0);

struct ActionPartials {
    VectorXd dq, dp;
    double dt;
};
// (A^T p_t - p, B^T p_t, qdot_t . p_t - H(endpoint)) assembled from a flow.
ActionPartials action_partials(const PhasePoint& pt, const Potential& pot, double t,
                               const IntegratorSpec& spec = {});

struct SymplecticResidual {
    double max_norm;       // || M^T Omega M - Omega ||_inf
    double atc_symmetry;   // || A^T C - C^T A ||
    double unit_block;     // || A^T D - C^T B - I ||
    double btd_symmetry;   // || B^T D - D^T B ||
};
SymplecticResidual symplectic_residual(const FlowResult& fr);

}  // namespace semiwig::classical
