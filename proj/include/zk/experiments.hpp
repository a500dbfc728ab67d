#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "zk/dynamics.hpp"
#include "zk/virial.hpp"

namespace zk {

inline constexpr const char* kSchemaLine = "# zakharov4d schema v1";
const char* version_string();

// bad or inconsistent configuration; line/column are 1-based, 0 when unknown
struct ConfigError : std::runtime_error {
    std::string message, key, file;
    int line = 0, column = 0;
    ConfigError(const std::string& msg, std::string k = {}, int l = 0, int c = 0, std::string f = {});
};

// unreadable input or unwritable output
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class InitialKind { ground_state_scaled, gaussian, custom_file };
const char* to_string(InitialKind k);

struct ScenarioConfig {
    struct Grid {
        int n = 1024;
        double r_max = 100;
    } grid;
    struct Time {
        double dt = 0.01;
        double t_end = 40;
        bool adaptive = false;
        double dt_floor = 1e-4;
        double drift_tol = 2e-4;
        int check_every = 10;
        double ceiling_grad = 20;
    } time;
    EvolutionMode mode = EvolutionMode::full;
    double alpha = 1.0;
    Sponge sponge;
    struct Initial {
        InitialKind kind = InitialKind::ground_state_scaled;
        double lambda = 1, mu = 1;
        double amplitude = 1, width = 1, phase = 0;
        double n_amplitude = 0, n_width = 1;
        bool truncation = true;
        std::string file;  // custom_file: columns r, Re u, Im u, Re N, Im N
    } initial;
    PotentialFamily potential;
    struct Diag {
        int stride = 10;  // steps between logged rows
        double R_local = 10;
        double virial_R = 0;  // 0 disables the virial block
        double s_decay = 0.5;
        bool store_trajectory = false;
        double store_every = 0.1;
    } diagnostics;
    ScatterCriteria verdict;
    struct Sweep {
        std::string parameter;
        std::vector<double> values;
    } sweep;
    struct Probe {
        double delta = 0;
        int ensemble = 4;
        std::vector<double> horizons = {5, 10, 20, 30, 40, 50};
        double dt = 0.01;
        double sample_every = 0.1;
        bool sponge = true;
        double band_lo = 0.25, band_hi = 3.0;
        bool baseline = true;  // also run the zero potential for comparison
    } probe;
    struct Output {
        std::string dir = "out";
        std::vector<std::string> formats = {"csv", "json"};
    } output;
    std::uint64_t seed = 1;
    std::string base_dir;  // directory of the config file, for relative paths

    bool wants(const std::string& format) const;
};

// YAML (or JSON) text; unknown keys, wrong types and out of range values raise ConfigError
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
void validate(const ScenarioConfig& cfg);
nlohmann::ordered_json config_to_json(const ScenarioConfig& cfg);

GridPtr scenario_grid(const ScenarioConfig& cfg);
ZakharovState initial_state(const GridPtr& g, const ScenarioConfig& cfg);
IntegratorConfig integrator_config(const ScenarioConfig& cfg);
Diagnostics diagnostics_config(const ScenarioConfig& cfg);

struct SimulationResult {
    GridPtr grid;
    EnergyReport initial, final;
    RunLog log;
    VerdictReport verdict;
    std::optional<RateReport> virial;
};

SimulationResult simulate(const ScenarioConfig& cfg);

// fixed precision, locale independent; throws on non-finite input
std::string format_number(double v);
std::string run_csv(const RunLog& log);
std::string virial_csv(const RateReport& rep);
nlohmann::ordered_json run_summary(const ScenarioConfig& cfg, const SimulationResult& res);

struct SweepRow {
    double parameter = 0;
    bool ok = false;
    std::string error;
    double energy_ratio = 0;  // E_Z / E_S(W)
    double mass_ratio = 0;    // ||N_0||_2 / ||W^2||_2
    std::string side;
    std::string verdict;
    double local_ratio = 0, lp_ratio = 0, grad_ratio = 0;
    double max_grad_u = 0, max_N_L2 = 0, max_u_L4 = 0;
    double mass_drift = 0, energy_drift = 0;
    double t_last = 0;
    int steps = 0;
    double order = NAN;  // energy drift order against the previous row (dt sweeps)
};

std::vector<SweepRow> sweep(const ScenarioConfig& cfg);
std::string sweep_csv(const std::string& parameter, const std::vector<SweepRow>& rows);
nlohmann::ordered_json sweep_summary(const ScenarioConfig& cfg, const std::vector<SweepRow>& rows);

struct ProbeReport {
    ProbeResult potential, baseline;
    bool has_baseline = false;
};
ProbeReport probe(const ScenarioConfig& cfg);
std::string probe_csv(const ProbeReport& rep);

struct ConstantRow {
    std::string name;
    double value = 0, reference = 0, rel_error = 0;
};
struct ConstantsReport {
    std::vector<ConstantRow> rows;
    double laplace_residual = 0;  // max |Delta W + W^3| on r < r_max / 2
    double tolerance = 1e-5, loose_tolerance = 1e-2;
    bool pass = false;     // every constant within tolerance and the residual below 1e-6
    bool warning = false;  // within the loose tolerance only
};
ConstantsReport constants_report(const GridPtr& g);

struct CheckLine {
    std::string suite, name;
    double value = 0, limit = 0;
    bool pass = false;
    std::string detail;
};
const std::vector<std::string>& check_suites();
// pinned desk-scale parameters; throws ConfigError on an unknown suite
std::vector<CheckLine> run_check_suite(const std::string& suite, std::uint64_t seed);

}  // namespace zk
