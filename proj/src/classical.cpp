#include "semiwig/classical.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

namespace semiwig::classical {

Potential Potential::isotropic(int dim) {
    if (dim < 1) throw input_error("Potential: dimension must be positive");
    return Potential(Kind::Isotropic, dim);
}

Potential Potential::anisotropic(std::vector<double> omega) {
    if (omega.empty()) throw input_error("Potential: need at least one frequency");
    for (double w : omega)
        if (!(w > 0.0)) throw input_error("Potential: frequencies must be positive");
    Potential p(Kind::Anisotropic, static_cast<int>(omega.size()));
    p.omega_ = std::move(omega);
    return p;
}

Potential Potential::cosine_perturbed(int dim, double lambda) {
    if (dim < 1) throw input_error("Potential: dimension must be positive");
    if (!(lambda >= 0.0 && lambda <= 0.5))
        throw input_error("Potential: cosine strength must lie in [0, 0.5]");
    Potential p(Kind::CosinePerturbed, dim);
    p.lambda_ = lambda;
    return p;
}

Potential Potential::polynomial_bounded(std::vector<std::array<double, 3>> axis_coeffs) {
    if (axis_coeffs.empty()) throw input_error("Potential: need coefficients");
    for (const auto& c : axis_coeffs)
        if (!(c[2] > 0.0))
            throw input_error("Potential: quadratic coefficient must be positive (confinement)");
    Potential p(Kind::PolynomialBounded, static_cast<int>(axis_coeffs.size()));
    p.coeffs_ = std::move(axis_coeffs);
    return p;
}

double Potential::axis_value(int axis, double x) const {
    switch (kind_) {
        case Kind::Isotropic: return 0.5 * x * x;
        case Kind::Anisotropic: return 0.5 * omega_[axis] * omega_[axis] * x * x;
        case Kind::CosinePerturbed: return 0.5 * x * x + lambda_ * (1.0 - std::cos(x));
        case Kind::PolynomialBounded: {
            const auto& c = coeffs_[axis];
            return c[0] + c[1] * x + c[2] * x * x;
        }
    }
    return 0.0;
}

double Potential::axis_gradient(int axis, double x) const {
    switch (kind_) {
        case Kind::Isotropic: return x;
        case Kind::Anisotropic: return omega_[axis] * omega_[axis] * x;
        case Kind::CosinePerturbed: return x + lambda_ * std::sin(x);
        case Kind::PolynomialBounded: {
            const auto& c = coeffs_[axis];
            return c[1] + 2.0 * c[2] * x;
        }
    }
    return 0.0;
}

double Potential::axis_hessian(int axis, double x) const {
    switch (kind_) {
        case Kind::Isotropic: return 1.0;
        case Kind::Anisotropic: return omega_[axis] * omega_[axis];
        case Kind::CosinePerturbed: return 1.0 + lambda_ * std::cos(x);
        case Kind::PolynomialBounded: return 2.0 * coeffs_[axis][2];
    }
    return 0.0;
}

double Potential::value(const VectorXd& q) const {
    if (q.size() != dim_) throw input_error("Potential: dimension mismatch");
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += axis_value(j, q[j]);
    return s;
}

VectorXd Potential::gradient(const VectorXd& q) const {
    if (q.size() != dim_) throw input_error("Potential: dimension mismatch");
    VectorXd g(dim_);
    for (int j = 0; j < dim_; ++j) g[j] = axis_gradient(j, q[j]);
    return g;
}

MatrixXd Potential::hessian(const VectorXd& q) const {
    if (q.size() != dim_) throw input_error("Potential: dimension mismatch");
    MatrixXd h = MatrixXd::Zero(dim_, dim_);
    for (int j = 0; j < dim_; ++j) h(j, j) = axis_hessian(j, q[j]);
    return h;
}

double Potential::hessian_sup_bound() const {
    double b = 0.0;
    for (int j = 0; j < dim_; ++j) {
        switch (kind_) {
            case Kind::Isotropic: b = std::max(b, 1.0); break;
            case Kind::Anisotropic: b = std::max(b, omega_[j] * omega_[j]); break;
            case Kind::CosinePerturbed: b = std::max(b, 1.0 + lambda_); break;
            case Kind::PolynomialBounded: b = std::max(b, 2.0 * coeffs_[j][2]); break;
        }
    }
    return b;
}

std::string Potential::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Isotropic: os << "isotropic(d=" << dim_ << ")"; break;
        case Kind::Anisotropic: {
            os << "anisotropic(omega=";
            for (size_t i = 0; i < omega_.size(); ++i) os << (i ? "," : "") << omega_[i];
            os << ")";
            break;
        }
        case Kind::CosinePerturbed:
            os << "cosine_perturbed(d=" << dim_ << ",lambda=" << lambda_ << ")";
            break;
        case Kind::PolynomialBounded: os << "polynomial_bounded(d=" << dim_ << ")"; break;
    }
    return os.str();
}

PhasePoint PhasePoint::make1d(double q, double p) {
    PhasePoint pt;
    pt.q = VectorXd::Constant(1, q);
    pt.p = VectorXd::Constant(1, p);
    return pt;
}

VectorXd PhasePoint::flat() const {
    VectorXd z(2 * dim());
    z << q, p;
    return z;
}

PhasePoint PhasePoint::from_flat(const VectorXd& z) {
    const int d = static_cast<int>(z.size()) / 2;
    PhasePoint pt;
    pt.q = z.head(d);
    pt.p = z.tail(d);
    return pt;
}

void IntegratorSpec::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw input_error("IntegratorSpec: tolerances must be positive");
    if (max_steps <= 0) throw input_error("IntegratorSpec: max_steps must be positive");
}

MatrixXd FlowResult::monodromy() const {
    const auto d = A.rows();
    MatrixXd M(2 * d, 2 * d);
    M.topLeftCorner(d, d) = A;
    M.topRightCorner(d, d) = B;
    M.bottomLeftCorner(d, d) = C;
    M.bottomRightCorner(d, d) = D;
    return M;
}

double hamiltonian(const PhasePoint& pt, const Potential& pot) {
    if (pt.dim() != pot.dim() || pt.p.size() != pt.q.size())
        throw input_error("hamiltonian: dimension mismatch");
    return 0.5 * pt.p.squaredNorm() + pot.value(pt.q);
}

VectorXd hamilton_vector_field(const PhasePoint& pt, const Potential& pot) {
    if (pt.dim() != pot.dim() || pt.p.size() != pt.q.size())
        throw input_error("hamilton_vector_field: dimension mismatch");
    VectorXd v(2 * pt.dim());
    v.head(pt.dim()) = pt.p;
    v.tail(pt.dim()) = -pot.gradient(pt.q);
    return v;
}

namespace {

// State layout: [q(d), p(d), A(d*d), B, C, D (column-major), S]
struct CombinedSystem {
    const Potential& pot;
    int d;
    double sign;  // +-1, time direction folded into the right-hand side

    void operator()(const std::vector<double>& y, std::vector<double>& dy, double) const {
        const int d2 = d * d;
        Eigen::Map<const VectorXd> q(y.data(), d), p(y.data() + d, d);
        Eigen::Map<const MatrixXd> A(y.data() + 2 * d, d, d), B(y.data() + 2 * d + d2, d, d),
            C(y.data() + 2 * d + 2 * d2, d, d), D(y.data() + 2 * d + 3 * d2, d, d);
        dy.resize(y.size());
        Eigen::Map<VectorXd> dq(dy.data(), d), dp(dy.data() + d, d);
        Eigen::Map<MatrixXd> dA(dy.data() + 2 * d, d, d), dB(dy.data() + 2 * d + d2, d, d),
            dC(dy.data() + 2 * d + 2 * d2, d, d), dD(dy.data() + 2 * d + 3 * d2, d, d);
        const VectorXd gv = pot.gradient(q);
        const MatrixXd hv = pot.hessian(q);
        dq = sign * p;
        dp = -sign * gv;
        dA = sign * C;
        dB = sign * D;
        dC = -sign * (hv * A);
        dD = -sign * (hv * B);
        // dS/ds = |p|^2 - H(q,p) = |p|^2/2 - V(q)
        dy[2 * d + 4 * d2] = sign * (0.5 * p.squaredNorm() - pot.value(q));
    }
};

FlowResult unpack(const std::vector<double>& y, int d, double t, double energy, double err) {
    const int d2 = d * d;
    FlowResult fr;
    fr.t = t;
    fr.endpoint.q = Eigen::Map<const VectorXd>(y.data(), d);
    fr.endpoint.p = Eigen::Map<const VectorXd>(y.data() + d, d);
    fr.A = Eigen::Map<const MatrixXd>(y.data() + 2 * d, d, d);
    fr.B = Eigen::Map<const MatrixXd>(y.data() + 2 * d + d2, d, d);
    fr.C = Eigen::Map<const MatrixXd>(y.data() + 2 * d + 2 * d2, d, d);
    fr.D = Eigen::Map<const MatrixXd>(y.data() + 2 * d + 3 * d2, d, d);
    fr.action = y[2 * d + 4 * d2];
    fr.energy = energy;
    fr.error_estimate = err;
    return fr;
}

}  // namespace

FlowResult flow_observed(const PhasePoint& pt, const Potential& pot, double t,
                         const IntegratorSpec& spec,
                         const std::function<void(double, const FlowResult&)>& cb,
                         double max_dt) {
    namespace od = boost::numeric::odeint;
    spec.validate();
    if (pt.dim() != pot.dim()) throw input_error("flow: dimension mismatch");
    if (std::abs(t) > spec.max_horizon) throw input_error("flow: |t| exceeds max horizon");

    const int d = pt.dim();
    const int n = 2 * d + 4 * d * d + 1;
    std::vector<double> y(n, 0.0);
    Eigen::Map<VectorXd>(y.data(), d) = pt.q;
    Eigen::Map<VectorXd>(y.data() + d, d) = pt.p;
    Eigen::Map<MatrixXd>(y.data() + 2 * d, d, d).setIdentity();
    Eigen::Map<MatrixXd>(y.data() + 2 * d + 3 * d * d, d, d).setIdentity();

    const double energy = hamiltonian(pt, pot);
    const double T = std::abs(t);
    const double sign = (t >= 0.0) ? 1.0 : -1.0;
    CombinedSystem sys{pot, d, sign};

    if (cb) cb(0.0, unpack(y, d, 0.0, energy, 0.0));
    if (T == 0.0) return unpack(y, d, t, energy, 0.0);

    od::runge_kutta_fehlberg78<std::vector<double>> stepper;
    auto ctrl = od::make_controlled(spec.abs_tol, spec.rel_tol, stepper);
    double s = 0.0;
    double dt = std::min(T, 0.1);
    if (max_dt > 0.0) dt = std::min(dt, max_dt);
    long steps = 0;
    while (s < T) {
        if (s + dt > T) dt = T - s;
        auto res = ctrl.try_step(sys, y, s, dt);
        if (max_dt > 0.0 && dt > max_dt) dt = max_dt;
        if (++steps > spec.max_steps)
            throw integration_error("flow: step budget exhausted", sign * s, steps);
        if (res == od::success && cb) cb(sign * s, unpack(y, d, sign * s, energy, 0.0));
    }
    // Tolerance-based error proxy: local tolerance times accepted step count.
    const double err = (spec.rel_tol * std::max(1.0, energy) + spec.abs_tol) * double(steps);
    return unpack(y, d, t, energy, err);
}

FlowResult flow(const PhasePoint& pt, const Potential& pot, double t, const IntegratorSpec& spec) {
    return flow_observed(pt, pot, t, spec, nullptr);
}

ActionPartials action_partials(const PhasePoint& pt, const Potential& pot, double t,
                               const IntegratorSpec& spec) {
    const FlowResult fr = flow(pt, pot, t, spec);
    ActionPartials ap;
    ap.dq = fr.A.transpose() * fr.endpoint.p - pt.p;
    ap.dp = fr.B.transpose() * fr.endpoint.p;
    ap.dt = fr.endpoint.p.squaredNorm() - hamiltonian(fr.endpoint, pot);
    return ap;
}

SymplecticResidual symplectic_residual(const FlowResult& fr) {
    const auto d = fr.A.rows();
    MatrixXd Omega = MatrixXd::Zero(2 * d, 2 * d);
    Omega.topRightCorner(d, d).setIdentity();
    Omega.bottomLeftCorner(d, d) = -MatrixXd::Identity(d, d);
    const MatrixXd M = fr.monodromy();
    SymplecticResidual r;
    r.max_norm = max_abs(M.transpose() * Omega * M - Omega);
    const MatrixXd atc = fr.A.transpose() * fr.C;
    const MatrixXd btd = fr.B.transpose() * fr.D;
    r.atc_symmetry = max_abs(atc - atc.transpose());
    r.unit_block = max_abs(fr.A.transpose() * fr.D - fr.C.transpose() * fr.B -
                           MatrixXd::Identity(d, d));
    r.btd_symmetry = max_abs(btd - btd.transpose());
    return r;
}

}  // namespace semiwig::classical
