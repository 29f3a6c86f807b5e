#pragma once

#include <map>
#include <memory>
#include <utility>

#include "semiwig/classical.hpp"

namespace semiwig::quantum {

using classical::Potential;

// One-dimensional classical period of the orbit at energy E (used to validate
// window supports against the minimal periodic orbit).
double orbit_period_1d(const Potential& pot, double E);

struct GridSpec {
    double L = 0.0;  // domain [-L, L), periodic embedding
    int n = 0;       // power of two, <= 8192
};

// Chooses L so V(+-L) >= 3 * E_need and n as the next power of two at ~1.5x
// the Nyquist rate of the fastest retained state.
GridSpec suggest_grid(const Potential& pot, double hbar, double E_need);

// Dense Fourier-spectral eigenbasis of -(hbar^2/2) d^2/dx^2 + V on [-L, L).
struct EigenBasis {
    double hbar = 0.0;
    GridSpec grid;
    std::string potential_desc;
    VectorXd x;          // grid nodes
    VectorXd evals;      // retained eigenvalues, ascending
    MatrixXd evecs;      // n x m, L2-normalized columns
    VectorXd residuals;  // ||H psi - E psi||_2 per retained state
    double reliability_cutoff = 0.0;

    int retained() const { return static_cast<int>(evals.size()); }
    double grid_h() const { return 2.0 * grid.L / grid.n; }
};

EigenBasis eigensolve_1d(const Potential& pot, double hbar, const GridSpec& grid);

// JSON header + CSV eigenvector matrix; import round-trips bit-identically.
void export_basis(const EigenBasis& basis, const std::string& json_path,
                  const std::string& csv_path);
EigenBasis import_basis(const std::string& json_path, const std::string& csv_path);

// Even Schwartz window: fhat smooth, identically 1 on [-a/2, a/2], supported
// in (-a, a); f recovered by numerical Fourier inversion.
struct WindowFunction {
    double a = 1.0;
    double f0 = 0.0;
    double lambda_cut = 0.0;  // |f| < 1e-10 f(0) beyond this
    bool even = true;
    std::string validity_warning;  // set when a >= T_min estimate

    double fhat(double tau) const;
    double f(double lambda) const;
    std::vector<double> lambda_grid, f_samples;
};

WindowFunction build_window(double a, const Potential* pot = nullptr, double E = 1.0,
                            bool strict = false);

using QueryList = std::vector<std::pair<double, double>>;  // (x, xi), d = 1

enum class Provenance { SingleState, SmoothedSum, SharpInterval };

struct WignerField {
    QueryList queries;
    std::vector<double> values;
    double hbar = 0.0;
    Provenance provenance = Provenance::SingleState;
};

// W_n(x, xi) = ((-1)^n / pi hbar) L_n(2 r^2 / hbar) e^{-r^2 / hbar}, r^2 = x^2 + xi^2.
double oscillator_wigner_exact(int n, double hbar, double x, double xi);

// Numerical Wigner transform machinery for grid states: band-limited Fourier
// upsampling once per state, then cubic interpolation on the fine grid under
// the v-quadrature.
class StateWigner {
public:
    StateWigner(const EigenBasis& basis, int upsample = 16);
    double evaluate(int state, double x, double xi) const;
    const EigenBasis& basis() const { return basis_; }

private:
    const EigenBasis& basis_;
    int upsample_;
    double fine_h_;
    mutable std::map<int, VectorXd> fine_;
    const VectorXd& fine_state(int j) const;
};

// One-off Wigner transform of a grid function (same machinery as StateWigner).
WignerField wigner_of_state(const VectorXd& psi, const GridSpec& grid, double hbar,
                            const QueryList& queries, int upsample = 16);

// sum_j f((E - E_j)/hbar) W_{psi_j}; isotropic d=1 dispatches to the Laguerre
// closed form and needs no basis.
WignerField smoothed_spectral_wigner(double E, double hbar, const Potential& pot,
                                     const WindowFunction& window, const QueryList& queries,
                                     const EigenBasis* basis = nullptr,
                                     const StateWigner* sw = nullptr);

// Unweighted sum over eigenvalues in [E_lo, E_hi].
WignerField sharp_spectral_wigner(double E_lo, double E_hi, double hbar,
                                  const Potential& pot, const QueryList& queries,
                                  const EigenBasis* basis = nullptr,
                                  const StateWigner* sw = nullptr);

// Separable 2D oscillator spectral sum over product states (degenerate levels
// summed); queries are ((x1, xi1), (x2, xi2)).
double smoothed_spectral_wigner_2d_isotropic(double E, double hbar,
                                             const WindowFunction& window, double x1,
                                             double xi1, double x2, double xi2);

}  // namespace semiwig::quantum
