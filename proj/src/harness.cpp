#include "semiwig/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "semiwig/serialize.hpp"

namespace semiwig::harness {

using classical::flow;
using classical::FlowResult;
using classical::hamiltonian;

Potential RunConfig::potential() const { return potential_from_json(potential_spec); }

RunConfig parse_config(const nlohmann::json& j) {
    RunConfig cfg;
    try {
        cfg.potential_spec = j.at("potential");
        (void)cfg.potential();  // validate early
        cfg.energy = j.value("energy", 1.0);
        if (!(cfg.energy > 0.0)) throw input_error("config: energy must be positive");
        cfg.hbar = j.value("hbar", std::vector<double>{0.01});
        if (cfg.hbar.empty()) throw input_error("config: hbar list is empty");
        for (size_t i = 0; i < cfg.hbar.size(); ++i) {
            if (!(cfg.hbar[i] > 0.0)) throw input_error("config: hbar must be positive");
            if (i > 0 && cfg.hbar[i] >= cfg.hbar[i - 1])
                throw input_error("config: hbar values must be descending");
        }
        if (j.contains("queries")) {
            const auto& q = j.at("queries");
            cfg.query_type = q.value("type", "u_grid");
            if (cfg.query_type == "u_grid") {
                cfg.u_values = q.at("u").get<std::vector<double>>();
            } else if (cfg.query_type == "s_grid") {
                cfg.s_values = q.at("s").get<std::vector<double>>();
            } else if (cfg.query_type == "explicit") {
                for (const auto& pt : q.at("points"))
                    cfg.explicit_points.emplace_back(
                        pt.at("x").get<std::vector<double>>(),
                        pt.at("xi").get<std::vector<double>>());
            } else {
                throw input_error("config: unknown query type '" + cfg.query_type + "'");
            }
            cfg.ray_axis = q.value("axis", 0);
        } else {
            cfg.u_values = {-4, -3, -2, -1, 0, 1, 2};
        }
        if (j.contains("window")) {
            cfg.window_a = j.at("window").value("a", 2.5);
            cfg.strict = j.at("window").value("strict", false);
        }
        cfg.strict = j.value("strict", cfg.strict);
        if (j.contains("integrator")) {
            const auto& spec = j.at("integrator");
            cfg.integrator.rel_tol = spec.value("rel_tol", cfg.integrator.rel_tol);
            cfg.integrator.abs_tol = spec.value("abs_tol", cfg.integrator.abs_tol);
            cfg.integrator.max_steps = spec.value("max_steps", cfg.integrator.max_steps);
            cfg.integrator.validate();
        }
        if (j.contains("grid")) {
            cfg.grid.L = j.at("grid").value("L", 0.0);
            cfg.grid.n = j.at("grid").value("n", 0);
        }
        cfg.times = j.value("times", cfg.times);
        if (j.contains("hk")) {
            const auto& h = j.at("hk");
            cfg.hk_quad.box_halfwidth_units =
                h.value("box_halfwidth_units", cfg.hk_quad.box_halfwidth_units);
            cfg.hk_quad.node_spacing_units =
                h.value("node_spacing_units", cfg.hk_quad.node_spacing_units);
        }
        if (j.contains("convention")) cfg.convention = convention_from_json(j.at("convention"));
        if (j.contains("ledger")) cfg.ledger_path = j.at("ledger").get<std::string>();
        cfg.seed = j.value("seed", 1ull);
        cfg.out_dir = j.value("out", std::string("out"));
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("config: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("config: parse error: ") + e.what());
    }
    return parse_config(j);
}

namespace {

// Smallest r >= 0 with V(r e_axis) = target along the configured ray.
double ray_radius(const Potential& pot, int axis, double target) {
    auto V = [&](double r) {
        VectorXd q = VectorXd::Zero(pot.dim());
        q[axis] = r;
        return pot.value(q);
    };
    if (V(0.0) > target)
        throw input_error("query ray: potential at the origin exceeds the target energy");
    double prev = 0.0;
    for (double r = 0.25; r <= 256.0; r += 0.25) {
        if (V(r) >= target) {
            double lo = prev, hi = r;
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                (V(mid) < target ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = r;
    }
    throw input_error("query ray: target energy not reached within the search range");
}

PhasePoint ray_point(const Potential& pot, int axis, double H_target) {
    PhasePoint pt;
    pt.q = VectorXd::Zero(pot.dim());
    pt.p = VectorXd::Zero(pot.dim());
    pt.q[axis] = ray_radius(pot, axis, H_target);
    return pt;
}

std::string sanitize(std::string s) {
    for (auto& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

void append_components(std::vector<std::string>& row, const VectorXd& v) {
    for (int k = 0; k < v.size(); ++k) row.push_back(fmt17(v[k]));
}

void component_columns(std::vector<std::string>& cols, const std::string& base, int d) {
    for (int k = 0; k < d; ++k) cols.push_back(base + std::to_string(k));
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

PhasePoint query_point_u(const RunConfig& cfg, double u, double hbar) {
    const Potential pot = cfg.potential();
    const double H = cfg.energy + u * std::pow(hbar / (2.0 * cfg.energy), 2.0 / 3.0);
    return ray_point(pot, cfg.ray_axis, H);
}

PhasePoint query_point_s(const RunConfig& cfg, double s) {
    const Potential pot = cfg.potential();
    return ray_point(pot, cfg.ray_axis, s * cfg.energy);
}

std::vector<PhasePoint> resolve_queries(const RunConfig& cfg, double hbar) {
    std::vector<PhasePoint> pts;
    if (cfg.query_type == "u_grid") {
        for (double u : cfg.u_values) pts.push_back(query_point_u(cfg, u, hbar));
    } else if (cfg.query_type == "s_grid") {
        for (double s : cfg.s_values) pts.push_back(query_point_s(cfg, s));
    } else {
        for (const auto& [x, xi] : cfg.explicit_points) {
            PhasePoint pt;
            pt.q = Eigen::Map<const VectorXd>(x.data(), x.size());
            pt.p = Eigen::Map<const VectorXd>(xi.data(), xi.size());
            pts.push_back(pt);
        }
    }
    return pts;
}

void CsvTable::write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw input_error("csv: cannot open " + path);
    for (size_t k = 0; k < columns.size(); ++k) f << (k ? "," : "") << columns[k];
    f << "\n";
    for (const auto& row : rows) {
        for (size_t k = 0; k < row.size(); ++k) f << (k ? "," : "") << row[k];
        f << "\n";
    }
}

CsvTable CsvTable::read(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("csv: cannot open " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            t.columns = cells;
            first = false;
        } else if (!cells.empty()) {
            t.rows.push_back(cells);
        }
    }
    return t;
}

int CsvTable::col(const std::string& name) const {
    for (size_t k = 0; k < columns.size(); ++k)
        if (columns[k] == name) return static_cast<int>(k);
    throw input_error("csv: missing column " + name);
}

void parallel_for_indexed(long n, const std::function<void(long)>& fn) {
    long nthreads = 1;
    if (const char* env = std::getenv("SEMIWIG_THREADS")) nthreads = std::atol(env);
    nthreads = std::clamp<long>(nthreads, 1, 64);
    if (nthreads == 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next(0);
    std::vector<std::thread> pool;
    for (long t = 0; t < std::min<long>(nthreads, n); ++t)
        pool.emplace_back([&] {
            for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

CsvTable cmd_flow(const RunConfig& cfg) {
    const Potential pot = cfg.potential();
    const int d = pot.dim();
    CsvTable t;
    t.columns = {"point", "t"};
    component_columns(t.columns, "q", d);
    component_columns(t.columns, "p", d);
    component_columns(t.columns, "qt", d);
    component_columns(t.columns, "pt", d);
    t.columns.insert(t.columns.end(),
                     {"action", "energy", "energy_drift", "symp_residual", "convention"});

    const auto pts = resolve_queries(cfg, cfg.hbar.front());
    struct Row {
        size_t pi;
        double time;
    };
    std::vector<Row> work;
    for (size_t pi = 0; pi < pts.size(); ++pi)
        for (double time : cfg.times) work.push_back({pi, time});

    std::vector<std::vector<std::string>> rows(work.size());
    parallel_for_indexed(static_cast<long>(work.size()), [&](long i) {
        const auto& w = work[i];
        const FlowResult fr = flow(pts[w.pi], pot, w.time, cfg.integrator);
        std::vector<std::string> row = {std::to_string(w.pi), fmt17(w.time)};
        append_components(row, pts[w.pi].q);
        append_components(row, pts[w.pi].p);
        append_components(row, fr.endpoint.q);
        append_components(row, fr.endpoint.p);
        row.push_back(fmt17(fr.action));
        row.push_back(fmt17(fr.energy));
        row.push_back(fmt17(std::abs(hamiltonian(fr.endpoint, pot) - fr.energy) /
                            std::max(1.0, std::abs(fr.energy))));
        row.push_back(fmt17(classical::symplectic_residual(fr).max_norm));
        row.push_back(cfg.convention.id);
        rows[i] = std::move(row);
    });
    t.rows = std::move(rows);
    return t;
}

CsvTable cmd_midpoint(const RunConfig& cfg) {
    const Potential pot = cfg.potential();
    const int d = pot.dim();
    CsvTable t;
    t.columns = {"point"};
    component_columns(t.columns, "x", d);
    component_columns(t.columns, "xi", d);
    t.columns.insert(t.columns.end(), {"s", "E", "t_plus"});
    component_columns(t.columns, "base_q", d);
    component_columns(t.columns, "base_p", d);
    t.columns.insert(t.columns.end(),
                     {"dt_dE", "area", "rho", "mu", "forward_residual", "status",
                      "convention"});

    const auto pts = resolve_queries(cfg, cfg.hbar.front());
    std::vector<std::vector<std::string>> rows(pts.size());
    parallel_for_indexed(static_cast<long>(pts.size()), [&](long i) {
        const auto& pt = pts[i];
        std::vector<std::string> row = {std::to_string(i)};
        append_components(row, pt.q);
        append_components(row, pt.p);
        const double s = hamiltonian(pt, pot) / cfg.energy;
        row.push_back(fmt17(s));
        row.push_back(fmt17(cfg.energy));
        try {
            const auto sol =
                midpoint::solve_midpoint(pt.q, pt.p, cfg.energy, pot, cfg.integrator);
            airy::PhaseProfile profile(pt.q, pt.p, cfg.energy, pot, cfg.integrator);
            const auto nf = airy::cfu_extract(profile, sol);
            row.push_back(fmt17(sol.t_plus));
            append_components(row, sol.base.q);
            append_components(row, sol.base.p);
            row.push_back(fmt17(sol.dt_dE));
            row.push_back(fmt17(midpoint::chord_area(sol)));
            row.push_back(fmt17(nf.rho));
            row.push_back(fmt17(nf.mu));
            row.push_back(fmt17(sol.forward_residual));
            row.push_back("ok");
        } catch (const std::exception& e) {
            for (int k = 0; k < 2 * d + 6; ++k) row.push_back("nan");
            row.push_back(sanitize(e.what()));
        }
        row.push_back(cfg.convention.id);
        rows[i] = std::move(row);
    });
    t.rows = std::move(rows);
    return t;
}

namespace {
airy::Convention effective_convention(const RunConfig& cfg) {
    if (cfg.ledger_path) return read_ledger(*cfg.ledger_path);
    return cfg.convention;
}
}  // namespace

CsvTable cmd_predict(const RunConfig& cfg) {
    const Potential pot = cfg.potential();
    const int d = pot.dim();
    const airy::Convention conv = effective_convention(cfg);
    CsvTable t;
    t.columns = {"hbar", "point"};
    component_columns(t.columns, "x", d);
    component_columns(t.columns, "xi", d);
    t.columns.insert(t.columns.end(), {"s", "u", "rho", "mu", "u00", "value",
                                       "extrapolated", "status", "convention"});

    struct Work {
        double hbar;
        size_t pi;
        PhasePoint pt;
    };
    std::vector<Work> work;
    for (double hb : cfg.hbar) {
        const auto pts = resolve_queries(cfg, hb);
        for (size_t pi = 0; pi < pts.size(); ++pi) work.push_back({hb, pi, pts[pi]});
    }
    std::vector<std::vector<std::string>> rows(work.size());
    parallel_for_indexed(static_cast<long>(work.size()), [&](long i) {
        const auto& w = work[i];
        std::vector<std::string> row = {fmt17(w.hbar), std::to_string(w.pi)};
        append_components(row, w.pt.q);
        append_components(row, w.pt.p);
        try {
            const auto pr = airy::predict_airy_layer(w.pt.q, w.pt.p, cfg.energy, w.hbar,
                                                     pot, cfg.integrator, conv);
            row.push_back(fmt17(pr.s));
            row.push_back(fmt17(pr.u));
            row.push_back(fmt17(pr.rho));
            row.push_back(fmt17(pr.mu));
            row.push_back(fmt17(pr.u00));
            row.push_back(fmt17(pr.value));
            row.push_back(pr.extrapolated ? "1" : "0");
            row.push_back("ok");
        } catch (const std::exception& e) {
            const double H = hamiltonian(w.pt, pot);
            row.push_back(fmt17(H / cfg.energy));
            row.push_back(fmt17((H - cfg.energy) /
                                std::pow(w.hbar / (2.0 * cfg.energy), 2.0 / 3.0)));
            for (int k = 0; k < 4; ++k) row.push_back("nan");
            row.push_back("0");
            row.push_back(sanitize(e.what()));
        }
        row.push_back(conv.id);
        rows[i] = std::move(row);
    });
    t.rows = std::move(rows);
    return t;
}

CsvTable cmd_exact(const RunConfig& cfg) {
    const Potential pot = cfg.potential();
    const int d = pot.dim();
    if (d != 1) throw input_error("exact: d = 1 only (separable products live in-library)");
    const airy::Convention conv = effective_convention(cfg);
    const bool closed_form = (pot.kind() == Potential::Kind::Isotropic);
    const quantum::WindowFunction window =
        quantum::build_window(cfg.window_a, &pot, cfg.energy, cfg.strict);

    CsvTable t;
    t.columns = {"hbar", "point", "x0", "xi0", "exact", "provenance", "convention"};
    std::filesystem::create_directories(cfg.out_dir);

    for (double hb : cfg.hbar) {
        const auto pts = resolve_queries(cfg, hb);
        quantum::QueryList queries;
        for (const auto& pt : pts) queries.emplace_back(pt.q[0], pt.p[0]);

        std::unique_ptr<quantum::EigenBasis> basis;
        std::string provenance = "laguerre-closed-form";
        if (!closed_form) {
            quantum::GridSpec grid = cfg.grid;
            if (grid.n == 0)
                grid = quantum::suggest_grid(pot, hb,
                                             cfg.energy + window.lambda_cut * hb);
            const std::string tag =
                std::to_string(fnv1a(pot.describe() + "|" + fmt17(hb) + "|" +
                                     fmt17(grid.L) + "|" + std::to_string(grid.n)));
            const std::string jp = cfg.out_dir + "/basis_" + tag + ".json";
            const std::string cp = cfg.out_dir + "/basis_" + tag + ".csv";
            if (std::filesystem::exists(jp) && std::filesystem::exists(cp)) {
                basis = std::make_unique<quantum::EigenBasis>(quantum::import_basis(jp, cp));
            } else {
                basis = std::make_unique<quantum::EigenBasis>(
                    quantum::eigensolve_1d(pot, hb, grid));
                quantum::export_basis(*basis, jp, cp);
            }
            provenance = "eigenbasis-" + tag;
        }
        const quantum::WignerField field = quantum::smoothed_spectral_wigner(
            cfg.energy, hb, pot, window, queries, basis.get());
        for (size_t pi = 0; pi < queries.size(); ++pi) {
            t.rows.push_back({fmt17(hb), std::to_string(pi), fmt17(queries[pi].first),
                              fmt17(queries[pi].second), fmt17(field.values[pi]),
                              provenance, conv.id});
        }
    }
    return t;
}

CsvTable cmd_hk(const RunConfig& cfg) {
    const Potential pot = cfg.potential();
    const int d = pot.dim();
    const airy::Convention conv = effective_convention(cfg);
    CsvTable t;
    t.columns = {"hbar", "t", "point"};
    component_columns(t.columns, "x", d);
    component_columns(t.columns, "xi", d);
    t.columns.insert(t.columns.end(),
                     {"quad_re", "quad_im", "quad_abs", "pred_re", "pred_im", "pred_abs",
                      "abs_err", "nodes", "quad_error_estimate", "flagged", "convention"});

    struct Work {
        double hbar, time;
        size_t pi;
        PhasePoint pt;
    };
    std::vector<Work> work;
    for (double hb : cfg.hbar) {
        const auto pts = resolve_queries(cfg, hb);
        for (double time : cfg.times)
            for (size_t pi = 0; pi < pts.size(); ++pi) work.push_back({hb, time, pi, pts[pi]});
    }
    std::vector<std::vector<std::string>> rows(work.size());
    parallel_for_indexed(static_cast<long>(work.size()), [&](long i) {
        const auto& w = work[i];
        const auto ev = hk::wigner_propagator(w.time, w.pt.q, w.pt.p, pot, w.hbar,
                                              cfg.hk_quad, cfg.integrator);
        const complexd pred = hk::stationary_phase_prediction(w.time, w.pt.q, w.pt.p, pot,
                                                              w.hbar, cfg.integrator);
        std::vector<std::string> row = {fmt17(w.hbar), fmt17(w.time), std::to_string(w.pi)};
        append_components(row, w.pt.q);
        append_components(row, w.pt.p);
        row.push_back(fmt17(ev.value.real()));
        row.push_back(fmt17(ev.value.imag()));
        row.push_back(fmt17(std::abs(ev.value)));
        row.push_back(fmt17(pred.real()));
        row.push_back(fmt17(pred.imag()));
        row.push_back(fmt17(std::abs(pred)));
        row.push_back(fmt17(std::abs(ev.value - pred)));
        row.push_back(std::to_string(ev.node_count));
        row.push_back(fmt17(ev.quad_error_estimate));
        row.push_back(ev.flagged ? "1" : "0");
        row.push_back(conv.id);
        rows[i] = std::move(row);
    });
    t.rows = std::move(rows);
    return t;
}

CompareResult cmd_compare(const RunConfig& cfg, const CsvTable& predicted,
                          const CsvTable& exact, bool calibrate) {
    CompareResult result;
    result.convention = effective_convention(cfg);

    const int pc_h = predicted.col("hbar"), pc_p = predicted.col("point");
    const int pc_v = predicted.col("value"), pc_s = predicted.col("s");
    const int pc_u = predicted.col("u"), pc_rho = predicted.col("rho");
    const int pc_mu = predicted.col("mu"), pc_u00 = predicted.col("u00");
    const int pc_status = predicted.col("status");
    const int ec_h = exact.col("hbar"), ec_p = exact.col("point");
    const int ec_v = exact.col("exact");
    const int ec_x = exact.col("x0"), ec_xi = exact.col("xi0");

    std::map<std::pair<std::string, std::string>, const std::vector<std::string>*> emap;
    for (const auto& row : exact.rows) emap[{row[ec_h], row[ec_p]}] = &row;
    if (emap.size() != exact.rows.size())
        throw input_error("compare: duplicate (hbar, point) keys in the exact table");

    struct JRow {
        double hbar, x, xi, s, u, rho, mu, u00, pred, exact;
        std::string point;
    };
    std::vector<JRow> joined;
    size_t matched = 0;
    for (const auto& row : predicted.rows) {
        if (row[pc_status] != "ok") continue;
        auto it = emap.find({row[pc_h], row[pc_p]});
        if (it == emap.end())
            throw input_error("compare: join mismatch (prediction row without exact row)");
        ++matched;
        const auto& er = *it->second;
        joined.push_back({std::stod(row[pc_h]), std::stod(er[ec_x]), std::stod(er[ec_xi]),
                          std::stod(row[pc_s]), std::stod(row[pc_u]), std::stod(row[pc_rho]),
                          std::stod(row[pc_mu]), std::stod(row[pc_u00]),
                          std::stod(row[pc_v]), std::stod(er[ec_v]), row[pc_p]});
    }
    size_t ok_rows = 0;
    for (const auto& row : predicted.rows)
        if (row[pc_status] == "ok") ++ok_rows;
    if (matched != ok_rows || exact.rows.size() < ok_rows)
        throw input_error("compare: join mismatch between prediction and exact tables");

    double kappa_factor = 1.0;
    if (calibrate) {
        if (cfg.potential().kind() != Potential::Kind::Isotropic)
            throw input_error(
                "compare: calibration is only permitted on the isotropic oscillator");
        // Least squares through the origin on the smallest hbar, restricted to
        // rows with a usable signal.
        const double hmin = cfg.hbar.back();
        double pmax = 0.0;
        for (const auto& r : joined)
            if (r.hbar == hmin) pmax = std::max(pmax, std::abs(r.pred));
        double num = 0.0, den = 0.0;
        for (const auto& r : joined) {
            if (r.hbar != hmin || std::abs(r.pred) < 0.05 * pmax) continue;
            num += r.exact * r.pred;
            den += r.pred * r.pred;
        }
        if (den == 0.0) throw input_error("compare: no usable rows for calibration");
        kappa_factor = num / den;
        result.convention.kappa *= kappa_factor;
        result.convention.calibrated = true;
    }

    result.joined.columns = {"hbar",     "point", "x",   "xi",        "s",
                             "u",        "rho",   "mu",  "u00",       "predicted",
                             "exact",    "abs_err", "rel_err", "convention"};
    std::map<double, std::vector<double>, std::greater<double>> abs_by_h, exact_by_h,
        rel_by_h;
    for (const auto& r : joined) {
        const double pred = r.pred * kappa_factor;
        const double abs_err = std::abs(pred - r.exact);
        result.joined.rows.push_back({fmt17(r.hbar), r.point, fmt17(r.x), fmt17(r.xi),
                                      fmt17(r.s), fmt17(r.u), fmt17(r.rho), fmt17(r.mu),
                                      fmt17(r.u00), fmt17(pred), fmt17(r.exact),
                                      fmt17(abs_err),
                                      fmt17(abs_err / std::max(1e-300, std::abs(r.exact))),
                                      result.convention.id});
        abs_by_h[r.hbar].push_back(abs_err);
        exact_by_h[r.hbar].push_back(std::abs(r.exact));
    }
    for (auto& [h, errs] : abs_by_h) {
        const auto& mags = exact_by_h[h];
        const double mmax = *std::max_element(mags.begin(), mags.end());
        for (size_t k = 0; k < errs.size(); ++k)
            if (mags[k] >= 0.25 * mmax) rel_by_h[h].push_back(errs[k] / mags[k]);
    }

    nlohmann::ordered_json per_h = nlohmann::ordered_json::array();
    std::vector<double> lh, le;
    for (const auto& [h, errs] : abs_by_h) {
        const double maxe = *std::max_element(errs.begin(), errs.end());
        const double scale =
            *std::max_element(exact_by_h[h].begin(), exact_by_h[h].end());
        double relmax = 0.0;
        for (double r : rel_by_h[h]) relmax = std::max(relmax, r);
        nlohmann::ordered_json e;
        e["hbar"] = h;
        e["max_abs_err"] = maxe;
        e["max_rel_err_oscillatory"] = relmax;
        e["peak_exact"] = scale;
        e["scaled_err"] = maxe / scale;
        per_h.push_back(e);
        lh.push_back(std::log(h));
        le.push_back(std::log(std::max(1e-300, maxe / scale)));
    }
    double slope = std::numeric_limits<double>::quiet_NaN();
    if (lh.size() >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t k = 0; k < lh.size(); ++k) {
            sx += lh[k];
            sy += le[k];
            sxx += lh[k] * lh[k];
            sxy += lh[k] * le[k];
        }
        const double n = static_cast<double>(lh.size());
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    result.report["convention"] = convention_to_json(result.convention);
    if (calibrate) result.report["calibration_factor"] = kappa_factor;
    result.report["rows"] = result.joined.rows.size();
    result.report["per_hbar"] = per_h;
    result.report["scaled_error_slope_vs_hbar"] = slope;
    return result;
}

void write_ledger(const airy::Convention& conv, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw input_error("ledger: cannot open " + path);
    nlohmann::ordered_json j = convention_to_json(conv);
    std::vector<std::string> precise = {fmt17(conv.kappa)};
    j["kappa_text"] = precise[0];  // exact decimal round-trip of the constant
    f << j.dump(2) << "\n";
}

airy::Convention read_ledger(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("ledger: cannot open " + path);
    nlohmann::json j;
    f >> j;
    airy::Convention c = convention_from_json(j);
    if (j.contains("kappa_text")) c.kappa = std::stod(j.at("kappa_text").get<std::string>());
    return c;
}

}  // namespace semiwig::harness
