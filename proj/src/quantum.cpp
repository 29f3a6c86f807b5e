#include "semiwig/quantum.hpp"

#include <lapacke.h>

#include <cmath>
#include <complex>
#include <fstream>

#include "json.hpp"
#include "semiwig/specfun.hpp"

namespace semiwig::quantum {

double orbit_period_1d(const Potential& pot, double E) {
    if (pot.dim() != 1) throw input_error("orbit_period_1d: d = 1 only");
    if (!(E > pot.axis_value(0, 0.0)))
        throw input_error("orbit_period_1d: E below the potential minimum");
    auto turning = [&](double lo, double hi) {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (pot.axis_value(0, mid) < E) lo = mid; else hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    double hi = 1.0;
    while (pot.axis_value(0, hi) < E) hi *= 2.0;
    double lo = -1.0;
    while (pot.axis_value(0, lo) < E) lo *= 2.0;
    const double xp = turning(0.0, hi);
    const double xm = -turning(0.0, -lo);
    const double mid = 0.5 * (xm + xp), half = 0.5 * (xp - xm);
    // x = mid + half sin(theta) removes the endpoint singularity.
    return 2.0 * gl_integrate(
                     [&](double th) {
                         const double x = mid + half * std::sin(th);
                         const double dE = std::max(E - pot.axis_value(0, x), 0.0);
                         if (dE == 0.0) return 0.0;
                         return half * std::cos(th) / std::sqrt(2.0 * dE);
                     },
                     -0.5 * M_PI, 0.5 * M_PI, 128);
}

GridSpec suggest_grid(const Potential& pot, double hbar, double E_need) {
    if (pot.dim() != 1) throw input_error("suggest_grid: d = 1 only");
    double L = 1.0;
    while (pot.axis_value(0, L) < 3.0 * E_need || pot.axis_value(0, -L) < 3.0 * E_need)
        L += 0.25;
    L += 0.5;  // tail margin
    const double kmax = std::sqrt(2.0 * E_need) / hbar;
    int n = 256;
    while (n < 1.5 * (2.0 * L * kmax) / M_PI && n < 8192) n *= 2;
    return GridSpec{L, n};
}

EigenBasis eigensolve_1d(const Potential& pot, double hbar, const GridSpec& grid) {
    if (pot.dim() != 1) throw input_error("eigensolve_1d: d = 1 only");
    if (grid.n <= 0 || grid.n > 8192 || (grid.n & (grid.n - 1)) != 0)
        throw input_error("eigensolve_1d: n must be a power of two <= 8192");
    if (!(grid.L > 0.0)) throw input_error("eigensolve_1d: L must be positive");

    const int n = grid.n;
    const double W = 2.0 * grid.L;
    const double scale = std::pow(2.0 * M_PI / W, 2);
    const double hphi = 2.0 * M_PI / n;

    // Periodic trigonometric second-derivative matrix (Toeplitz closed form).
    MatrixXd H(n, n);
    std::vector<double> row(n);
    row[0] = -M_PI * M_PI / (3.0 * hphi * hphi) - 1.0 / 6.0;
    for (int k = 1; k < n; ++k) {
        const double s = std::sin(0.5 * k * hphi);
        row[k] = -std::pow(-1.0, k) / (2.0 * s * s);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) H(i, j) = row[std::abs(i - j)];
    H *= -(0.5 * hbar * hbar) * scale;

    VectorXd x(n);
    for (int i = 0; i < n; ++i) {
        x[i] = -grid.L + i * (W / n);
        H(i, i) += pot.value(VectorXd::Constant(1, x[i]));
    }

    std::vector<double> w(n);
    int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, H.data(), n, w.data());
    if (info != 0) throw solver_error("eigensolve_1d: dsyevd failed");

    EigenBasis basis;
    basis.hbar = hbar;
    basis.grid = grid;
    basis.potential_desc = pot.describe();
    basis.x = x;
    const double vb = std::min(pot.axis_value(0, grid.L), pot.axis_value(0, -grid.L));
    basis.reliability_cutoff = vb / 3.0;

    int m = 0;
    while (m < n && w[m] <= basis.reliability_cutoff) ++m;
    if (m == 0) throw reliability_error("eigensolve_1d: no states below the cutoff");

    const double h = W / n;
    basis.evals = Eigen::Map<VectorXd>(w.data(), m);
    basis.evecs = H.leftCols(m) / std::sqrt(h);  // l2 -> L2 normalization
    // Fix the overall sign so exports are reproducible across LAPACK builds.
    for (int j = 0; j < m; ++j) {
        int imax;
        basis.evecs.col(j).cwiseAbs().maxCoeff(&imax);
        if (basis.evecs(imax, j) < 0.0) basis.evecs.col(j) *= -1.0;
    }

    // Boundary-tail reliability: retained states must have decayed.
    double tail = 0.0;
    for (int j = 0; j < m; ++j)
        tail = std::max(tail, std::max(std::abs(basis.evecs(0, j)),
                                       std::abs(basis.evecs(n - 1, j))));
    if (tail > 1e-8 * basis.evecs.cwiseAbs().maxCoeff())
        throw reliability_error("eigensolve_1d: wavefunction tail at the boundary; enlarge L");

    // Residuals ||H psi - E psi|| on the grid (rebuild H; it was overwritten).
    MatrixXd H2(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) H2(i, j) = row[std::abs(i - j)];
    H2 *= -(0.5 * hbar * hbar) * scale;
    for (int i = 0; i < n; ++i) H2(i, i) += pot.value(VectorXd::Constant(1, x[i]));
    const MatrixXd R = H2 * basis.evecs - basis.evecs * basis.evals.asDiagonal();
    basis.residuals = (R.colwise().norm() * std::sqrt(h)).transpose();
    return basis;
}

namespace {

// Iterative radix-2 FFT (n a power of two).
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * M_PI / double(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k], v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& z : a) z /= double(n);
}

// Band-limited upsampling by zero-padding the spectrum.
VectorXd fourier_upsample(const VectorXd& psi, int factor) {
    const size_t n = psi.size();
    const size_t nf = n * factor;
    std::vector<std::complex<double>> a(n);
    for (size_t i = 0; i < n; ++i) a[i] = psi[i];
    fft_inplace(a, false);
    std::vector<std::complex<double>> b(nf, 0.0);
    for (size_t k = 0; k < n / 2; ++k) b[k] = a[k];
    for (size_t k = n / 2 + 1; k < n; ++k) b[nf - n + k] = a[k];
    b[n / 2] = 0.5 * a[n / 2];  // split the Nyquist bin symmetrically
    b[nf - n / 2] = 0.5 * a[n / 2];
    fft_inplace(b, true);
    VectorXd out(nf);
    for (size_t i = 0; i < nf; ++i) out[i] = b[i].real() * factor;
    return out;
}

// Catmull-Rom cubic on a uniform grid starting at x0 with spacing h.
inline double cubic_eval(const VectorXd& f, double x0, double h, double x) {
    const double u = (x - x0) / h;
    const long i = static_cast<long>(std::floor(u));
    if (i < 1 || i + 2 >= f.size()) return 0.0;
    const double t = u - double(i);
    const double fm = f[i - 1], f0 = f[i], f1 = f[i + 1], f2 = f[i + 2];
    const double a0 = -0.5 * fm + 1.5 * f0 - 1.5 * f1 + 0.5 * f2;
    const double a1 = fm - 2.5 * f0 + 2.0 * f1 - 0.5 * f2;
    const double a2 = -0.5 * fm + 0.5 * f1;
    return ((a0 * t + a1) * t + a2) * t + f0;
}

double wigner_from_fine(const VectorXd& fine, double x0, double fine_h, double hbar,
                        double x, double xi, double L) {
    if (std::abs(x) > L - 4.0 * fine_h)
        throw domain_error("wigner transform: query outside the safe interior");
    // Support of the state on the fine grid.
    const double peak = fine.cwiseAbs().maxCoeff();
    const double thr = 1e-12 * peak;
    long lo = 0, hi = fine.size() - 1;
    while (lo < hi && std::abs(fine[lo]) < thr) ++lo;
    while (hi > lo && std::abs(fine[hi]) < thr) --hi;
    const double xlo = x0 + lo * fine_h, xhi = x0 + hi * fine_h;
    const double vmax = 2.0 * std::min(x - xlo, xhi - x);
    if (vmax <= 0.0) return 0.0;

    double hv = fine_h;
    const double osc = hbar / (4.0 * std::max(std::abs(xi), 0.25));
    hv = std::min(hv, osc);
    const long nv = static_cast<long>(std::ceil(vmax / hv));
    hv = vmax / double(nv);

    // Even part in v: psi(x) ^2 + 2 sum_{v > 0} psi(x+v/2) psi(x-v/2) cos(v xi / hbar)
    std::vector<double> terms(nv);
    const double c0 = cubic_eval(fine, x0, fine_h, x);
    for (long k = 1; k <= nv; ++k) {
        const double v = k * hv;
        const double w = (k == nv) ? 0.5 : 1.0;  // trapezoid end weight
        const double pa = cubic_eval(fine, x0, fine_h, x + 0.5 * v);
        const double pb = cubic_eval(fine, x0, fine_h, x - 0.5 * v);
        terms[k - 1] = 2.0 * w * pa * pb * std::cos(v * xi / hbar);
    }
    const double integral = hv * (c0 * c0 + pairwise_sum(terms));
    return integral / (2.0 * M_PI * hbar);
}

}  // namespace

StateWigner::StateWigner(const EigenBasis& basis, int upsample)
    : basis_(basis), upsample_(upsample), fine_h_(basis.grid_h() / upsample) {}

const VectorXd& StateWigner::fine_state(int j) const {
    auto it = fine_.find(j);
    if (it != fine_.end()) return it->second;
    return fine_.emplace(j, fourier_upsample(basis_.evecs.col(j), upsample_)).first->second;
}

double StateWigner::evaluate(int state, double x, double xi) const {
    if (state < 0 || state >= basis_.retained())
        throw input_error("StateWigner: state index out of range");
    return wigner_from_fine(fine_state(state), -basis_.grid.L, fine_h_, basis_.hbar, x, xi,
                            basis_.grid.L);
}

WignerField wigner_of_state(const VectorXd& psi, const GridSpec& grid, double hbar,
                            const QueryList& queries, int upsample) {
    const VectorXd fine = fourier_upsample(psi, upsample);
    const double fine_h = 2.0 * grid.L / grid.n / upsample;
    WignerField field;
    field.hbar = hbar;
    field.provenance = Provenance::SingleState;
    field.queries = queries;
    field.values.reserve(queries.size());
    for (const auto& [x, xi] : queries)
        field.values.push_back(wigner_from_fine(fine, -grid.L, fine_h, hbar, x, xi, grid.L));
    return field;
}

double oscillator_wigner_exact(int n, double hbar, double x, double xi) {
    if (!(hbar > 0.0)) throw input_error("oscillator_wigner_exact: hbar must be positive");
    const double z = 2.0 * (x * x + xi * xi) / hbar;
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return sign / (M_PI * hbar) * specfun::laguerre_scaled(n, z);
}

// --- window ----------------------------------------------------------------

namespace {
double bump_transition(double s) {  // 0 at s=0, 1 at s=1, C^inf
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double e1 = std::exp(-1.0 / s);
    const double e2 = std::exp(-1.0 / (1.0 - s));
    return e1 / (e1 + e2);
}
}  // namespace

double WindowFunction::fhat(double tau) const {
    const double at = std::abs(tau);
    if (at <= 0.5 * a) return 1.0;
    if (at >= a) return 0.0;
    return bump_transition((a - at) / (0.5 * a));
}

double WindowFunction::f(double lambda) const {
    // (1/pi) int_0^a fhat(tau) cos(lambda tau) dtau, smooth integrand.
    return gl_integrate([&](double tau) { return fhat(tau) * std::cos(lambda * tau); },
                        0.0, a, 384) /
           M_PI;
}

WindowFunction build_window(double a, const Potential* pot, double E, bool strict) {
    if (!(a > 0.0)) throw input_error("build_window: a must be positive");
    WindowFunction w;
    w.a = a;
    if (pot != nullptr && pot->dim() == 1) {
        const double tmin = orbit_period_1d(*pot, E);
        if (a >= tmin) {
            if (strict)
                throw input_error("build_window: a >= minimal period (strict mode)");
            w.validity_warning = "window support exceeds the minimal period estimate";
        }
    }
    w.f0 = w.f(0.0);
    // Decay scan for the truncation cut. The flat-top bump transform decays
    // like exp(-c sqrt(lambda)), so the 1e-10 cut sits surprisingly far out.
    const double thr = 1e-10 * std::abs(w.f0);
    double cut = 0.0;
    for (double lam = 0.0; lam <= 240.0; lam += 0.25) {
        const double val = std::abs(w.f(lam));
        w.lambda_grid.push_back(lam);
        w.f_samples.push_back(val);
        if (val > thr) cut = lam + 0.25;
    }
    w.lambda_cut = cut;
    return w;
}

// --- spectral sums ----------------------------------------------------------

WignerField smoothed_spectral_wigner(double E, double hbar, const Potential& pot,
                                     const WindowFunction& window, const QueryList& queries,
                                     const EigenBasis* basis, const StateWigner* sw) {
    if (!(hbar > 0.0)) throw input_error("smoothed_spectral_wigner: hbar must be positive");
    WignerField field;
    field.hbar = hbar;
    field.provenance = Provenance::SmoothedSum;
    field.queries = queries;

    const bool closed_form = (pot.kind() == Potential::Kind::Isotropic && pot.dim() == 1);
    // (state index, window weight) for every state inside the truncation cut.
    std::vector<std::pair<int, double>> active;
    if (closed_form) {
        const long jc = std::lround(E / hbar - 0.5);
        const long jr = static_cast<long>(std::ceil(window.lambda_cut)) + 2;
        for (long j = std::max<long>(0, jc - jr); j <= jc + jr; ++j) {
            const double lam = (E - hbar * (j + 0.5)) / hbar;
            if (std::abs(lam) <= window.lambda_cut)
                active.emplace_back(static_cast<int>(j), window.f(lam));
        }
    } else {
        if (basis == nullptr)
            throw input_error("smoothed_spectral_wigner: basis required for this potential");
        if (basis->evals[basis->retained() - 1] < E + window.lambda_cut * hbar)
            throw reliability_error(
                "smoothed_spectral_wigner: basis truncation intersects the window");
        for (int j = 0; j < basis->retained(); ++j) {
            const double lam = (E - basis->evals[j]) / hbar;
            if (std::abs(lam) <= window.lambda_cut) active.emplace_back(j, window.f(lam));
        }
    }

    std::unique_ptr<StateWigner> own;
    if (!closed_form && sw == nullptr) {
        own = std::make_unique<StateWigner>(*basis);
        sw = own.get();
    }

    field.values.resize(queries.size());
    for (size_t qi = 0; qi < queries.size(); ++qi) {
        const auto& [x, xi] = queries[qi];
        std::vector<double> terms(active.size());
        for (size_t k = 0; k < active.size(); ++k) {
            const auto& [j, wgt] = active[k];
            const double Wj = closed_form ? oscillator_wigner_exact(j, hbar, x, xi)
                                          : sw->evaluate(j, x, xi);
            terms[k] = wgt * Wj;
        }
        field.values[qi] = pairwise_sum(terms);
    }
    return field;
}

WignerField sharp_spectral_wigner(double E_lo, double E_hi, double hbar, const Potential& pot,
                                  const QueryList& queries, const EigenBasis* basis,
                                  const StateWigner* sw) {
    WignerField field;
    field.hbar = hbar;
    field.provenance = Provenance::SharpInterval;
    field.queries = queries;
    field.values.assign(queries.size(), 0.0);
    if (E_hi < E_lo) return field;

    const bool closed_form = (pot.kind() == Potential::Kind::Isotropic && pot.dim() == 1);
    std::unique_ptr<StateWigner> own;
    if (!closed_form) {
        if (basis == nullptr)
            throw input_error("sharp_spectral_wigner: basis required for this potential");
        if (basis->evals[basis->retained() - 1] < E_hi)
            throw reliability_error("sharp_spectral_wigner: interval beyond the basis");
        if (sw == nullptr) {
            own = std::make_unique<StateWigner>(*basis);
            sw = own.get();
        }
    }

    for (size_t qi = 0; qi < queries.size(); ++qi) {
        const auto& [x, xi] = queries[qi];
        std::vector<double> terms;
        if (closed_form) {
            for (long j = std::max<long>(0, std::lround(E_lo / hbar - 0.5) - 2);; ++j) {
                const double Ej = hbar * (j + 0.5);
                if (Ej > E_hi) break;
                if (Ej >= E_lo)
                    terms.push_back(oscillator_wigner_exact(static_cast<int>(j), hbar, x, xi));
            }
        } else {
            for (int j = 0; j < basis->retained(); ++j)
                if (basis->evals[j] >= E_lo && basis->evals[j] <= E_hi)
                    terms.push_back(sw->evaluate(j, x, xi));
        }
        field.values[qi] = pairwise_sum(terms);
    }
    return field;
}

double smoothed_spectral_wigner_2d_isotropic(double E, double hbar,
                                             const WindowFunction& window, double x1,
                                             double xi1, double x2, double xi2) {
    // E_N = hbar (N + 1) for N = n1 + n2; sum the degenerate level first.
    const long Nc = std::lround(E / hbar - 1.0);
    const long Nr = static_cast<long>(std::ceil(window.lambda_cut)) + 2;
    std::vector<double> terms;
    for (long N = std::max<long>(0, Nc - Nr); N <= Nc + Nr; ++N) {
        const double lam = (E - hbar * (N + 1.0)) / hbar;
        if (std::abs(lam) > window.lambda_cut) continue;
        double level = 0.0;
        for (long n1 = 0; n1 <= N; ++n1)
            level += oscillator_wigner_exact(static_cast<int>(n1), hbar, x1, xi1) *
                     oscillator_wigner_exact(static_cast<int>(N - n1), hbar, x2, xi2);
        terms.push_back(window.f(lam) * level);
    }
    return pairwise_sum(terms);
}

// --- export / import --------------------------------------------------------

void export_basis(const EigenBasis& basis, const std::string& json_path,
                  const std::string& csv_path) {
    nlohmann::ordered_json j;
    j["format"] = "semiwig-eigenbasis-v1";
    j["potential"] = basis.potential_desc;
    j["hbar"] = basis.hbar;
    j["grid"] = {{"L", basis.grid.L}, {"n", basis.grid.n}};
    j["reliability_cutoff"] = basis.reliability_cutoff;
    std::vector<std::string> ev, rs;
    for (int k = 0; k < basis.retained(); ++k) {
        ev.push_back(fmt17(basis.evals[k]));
        rs.push_back(fmt17(basis.residuals[k]));
    }
    j["eigenvalues"] = ev;
    j["residuals"] = rs;
    std::ofstream jf(json_path);
    if (!jf) throw input_error("export_basis: cannot open " + json_path);
    jf << j.dump(2) << "\n";

    std::ofstream cf(csv_path);
    if (!cf) throw input_error("export_basis: cannot open " + csv_path);
    for (int i = 0; i < basis.grid.n; ++i) {
        for (int k = 0; k < basis.retained(); ++k)
            cf << (k ? "," : "") << fmt17(basis.evecs(i, k));
        cf << "\n";
    }
}

EigenBasis import_basis(const std::string& json_path, const std::string& csv_path) {
    std::ifstream jf(json_path);
    if (!jf) throw input_error("import_basis: cannot open " + json_path);
    nlohmann::json j;
    jf >> j;
    if (j.value("format", "") != "semiwig-eigenbasis-v1")
        throw input_error("import_basis: unrecognized format");
    EigenBasis basis;
    basis.hbar = j.at("hbar").get<double>();
    basis.potential_desc = j.at("potential").get<std::string>();
    basis.grid.L = j.at("grid").at("L").get<double>();
    basis.grid.n = j.at("grid").at("n").get<int>();
    basis.reliability_cutoff = j.at("reliability_cutoff").get<double>();
    const auto ev = j.at("eigenvalues").get<std::vector<std::string>>();
    const auto rs = j.at("residuals").get<std::vector<std::string>>();
    const int m = static_cast<int>(ev.size());
    basis.evals.resize(m);
    basis.residuals.resize(m);
    for (int k = 0; k < m; ++k) {
        basis.evals[k] = std::stod(ev[k]);
        basis.residuals[k] = std::stod(rs[k]);
    }
    basis.x.resize(basis.grid.n);
    for (int i = 0; i < basis.grid.n; ++i)
        basis.x[i] = -basis.grid.L + i * (2.0 * basis.grid.L / basis.grid.n);

    std::ifstream cf(csv_path);
    if (!cf) throw input_error("import_basis: cannot open " + csv_path);
    basis.evecs.resize(basis.grid.n, m);
    std::string line;
    for (int i = 0; i < basis.grid.n; ++i) {
        if (!std::getline(cf, line)) throw input_error("import_basis: truncated CSV");
        size_t pos = 0;
        for (int k = 0; k < m; ++k) {
            size_t next = line.find(',', pos);
            basis.evecs(i, k) = std::stod(line.substr(pos, next - pos));
            pos = (next == std::string::npos) ? line.size() : next + 1;
        }
    }
    return basis;
}

}  // namespace semiwig::quantum
