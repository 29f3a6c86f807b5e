#pragma once

#include <filesystem>
#include <optional>

#include "json.hpp"
#include "semiwig/airy_layer.hpp"
#include "semiwig/hk.hpp"
#include "semiwig/quantum.hpp"

namespace semiwig::harness {

using classical::IntegratorSpec;
using classical::PhasePoint;
using classical::Potential;

// One run configuration, parsed from a single JSON document (see README for
// the schema). Invalid configs throw input_error, which the CLI maps to
// exit code 2.
struct RunConfig {
    nlohmann::json potential_spec;
    double energy = 1.0;
    std::vector<double> hbar;  // positive descending
    // Query generator: "u_grid" (ray through Sigma_E along grad H, tube
    // variable u), "s_grid" (same ray, parametrized by s), or explicit points.
    std::string query_type = "u_grid";
    std::vector<double> u_values;
    std::vector<double> s_values;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> explicit_points;
    int ray_axis = 0;
    double window_a = 2.5;
    bool strict = false;
    IntegratorSpec integrator;
    quantum::GridSpec grid;  // L = 0, n = 0: auto-suggest
    std::vector<double> times = {0.4, 0.8};
    hk::HKQuadrature hk_quad;
    airy::Convention convention;
    std::optional<std::string> ledger_path;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    Potential potential() const;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Point on the configured ray with H = E + u (hbar/2E)^{2/3}.
PhasePoint query_point_u(const RunConfig& cfg, double u, double hbar);
// Point with H = s E on the same ray.
PhasePoint query_point_s(const RunConfig& cfg, double s);
// The resolved query list for one hbar (u_grid depends on hbar).
std::vector<PhasePoint> resolve_queries(const RunConfig& cfg, double hbar);

// A CSV table with fixed column order; floats serialized at 17 significant
// digits so outputs are byte-deterministic and round-trip exactly.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    void write(const std::string& path) const;
    static CsvTable read(const std::string& path);
    int col(const std::string& name) const;
};

CsvTable cmd_flow(const RunConfig& cfg);
CsvTable cmd_midpoint(const RunConfig& cfg);
CsvTable cmd_predict(const RunConfig& cfg);
// Builds or imports the eigenbasis as needed; writes the basis artifact pair
// (JSON header + CSV matrix) under out_dir for non-closed-form potentials.
CsvTable cmd_exact(const RunConfig& cfg);
CsvTable cmd_hk(const RunConfig& cfg);

struct CompareResult {
    CsvTable joined;
    nlohmann::ordered_json report;
    airy::Convention convention;  // possibly recalibrated
};

// Joins predict and exact tables (exit code 4 on mismatched row sets = throws
// input_error with "join" in the message). With calibrate = true the global
// prefactor is least-squares fitted on this dataset, which the caller must
// have produced from the isotropic oscillator.
CompareResult cmd_compare(const RunConfig& cfg, const CsvTable& predicted,
                          const CsvTable& exact, bool calibrate);

void write_ledger(const airy::Convention& conv, const std::string& path);
airy::Convention read_ledger(const std::string& path);

// Runs fn(i) for i in [0, n) on SEMIWIG_THREADS threads (default 1); results
// must be written into index-addressed storage by the callee.
void parallel_for_indexed(long n, const std::function<void(long)>& fn);

}  // namespace semiwig::harness
