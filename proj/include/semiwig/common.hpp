#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semiwig {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using complexd = std::complex<double>;

// Error taxonomy shared by all modules. The CLI maps these to exit codes.
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct integration_error : std::runtime_error {
    double t_reached;
    long steps_taken;
    integration_error(const std::string& msg, double t, long steps)
        : std::runtime_error(msg), t_reached(t), steps_taken(steps) {}
};
struct solver_error : std::runtime_error {
    std::vector<double> residual_trace;
    solver_error(const std::string& msg, std::vector<double> trace = {})
        : std::runtime_error(msg), residual_trace(std::move(trace)) {}
};
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct degenerate_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct reliability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pairwise (fixed-tree) summation: run-to-run deterministic regardless of
// how the values were produced, and more accurate than naive left-to-right.
double pairwise_sum(std::span<const double> v);
complexd pairwise_sum(std::span<const complexd> v);

// Gauss-Legendre nodes/weights on [-1, 1]; cached per order.
struct GaussLegendre {
    std::vector<double> nodes, weights;
};
const GaussLegendre& gauss_legendre(int n);

// Composite integral of f over [a, b] with an n-point GL rule.
template <class F>
double gl_integrate(F&& f, double a, double b, int n) {
    const auto& gl = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    std::vector<double> terms(gl.nodes.size());
    for (size_t k = 0; k < gl.nodes.size(); ++k)
        terms[k] = gl.weights[k] * f(mid + half * gl.nodes[k]);
    return half * pairwise_sum(terms);
}

// SplitMix64: tiny deterministic generator; identical streams on every
// platform (std::uniform_real_distribution is not portable bit-for-bit).
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double next_double() {  // uniform in [0, 1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
};

// 17 significant digits: round-trips IEEE doubles exactly, locale-free.
std::string fmt17(double x);

double max_abs(const MatrixXd& m);

}  // namespace semiwig
