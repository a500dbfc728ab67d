#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "zk/experiments.hpp"
#include "zk/kernels.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kUsage = 2, kRuntime = 3 };

struct Common {
    std::string config;
    std::string grid;
    std::optional<std::uint64_t> seed;
    bool json = false;
    std::string out;
    int threads = 0;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
    auto* opt = sub->add_option("--config", c.config, "scenario file (YAML)");
    if (config_required) opt->required();
    sub->add_option("--grid", c.grid, "override the grid as N,RMAX");
    sub->add_option("--seed", c.seed, "override the RNG seed");
    sub->add_flag("--json", c.json, "print the JSON report on stdout");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "OpenMP thread count")->check(CLI::PositiveNumber);
}

std::pair<int, double> parse_grid(const std::string& s) {
    const auto comma = s.find(',');
    try {
        if (comma == std::string::npos) throw std::invalid_argument("");
        std::size_t p1 = 0, p2 = 0;
        const int n = std::stoi(s.substr(0, comma), &p1);
        const double r = std::stod(s.substr(comma + 1), &p2);
        if (p1 != comma || p2 != s.size() - comma - 1) throw std::invalid_argument("");
        return {n, r};
    } catch (const std::exception&) {
        throw zk::ConfigError("expected N,RMAX such as 1024,100 (got '" + s + "')", "--grid");
    }
}

zk::ScenarioConfig resolve(const Common& c) {
    zk::ScenarioConfig cfg = c.config.empty() ? zk::ScenarioConfig{} : zk::load_config(c.config);
    if (!c.grid.empty()) std::tie(cfg.grid.n, cfg.grid.r_max) = parse_grid(c.grid);
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.output.dir = c.out;
    try {
        zk::validate(cfg);
    } catch (const zk::ConfigError& e) {
        throw zk::ConfigError("after command line overrides: " + e.message, e.key);
    }
    return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw zk::IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw zk::IoError("cannot open '" + tmp.string() + "' for writing");
        out << text;
        out.flush();
        if (!out) throw zk::IoError("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, path, ec);
    if (ec) throw zk::IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

void print_json(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_constants(const Common& c) {
    int n = 4096;
    double r_max = 400;
    if (!c.grid.empty()) std::tie(n, r_max) = parse_grid(c.grid);
    if (n < 16 || n > 8192 || !(r_max > 0)) throw zk::ConfigError("grid must have 16 <= N <= 8192 and RMAX > 0", "--grid");
    const auto g = zk::make_grid(n, r_max);
    const auto rep = zk::constants_report(g);
    ordered_json j;
    j["grid"] = {{"n", n}, {"r_max", r_max}, {"fingerprint", g->fingerprint()}};
    ordered_json rows = ordered_json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"name", r.name}, {"value", r.value}, {"reference", r.reference}, {"rel_error", r.rel_error}});
    j["constants"] = rows;
    j["laplace_residual"] = rep.laplace_residual;
    j["tolerance"] = rep.tolerance;
    j["status"] = rep.pass ? "pass" : rep.warning ? "warning" : "fail";
    j["version"] = zk::version_string();
    if (!c.out.empty()) write_file(fs::path(c.out) / "constants.json", j.dump(2) + "\n");
    if (c.json) {
        print_json(j);
    } else {
        std::printf("grid n=%d r_max=%g\n", n, r_max);
        std::printf("%-14s %22s %22s %12s\n", "constant", "quadrature", "closed form", "rel error");
        for (const auto& r : rep.rows)
            std::printf("%-14s %22.15g %22.15g %12.3e%s\n", r.name.c_str(), r.value, r.reference, r.rel_error,
                        r.rel_error < rep.tolerance ? "" : "  <-- exceeds tolerance");
        std::printf("max |Lap W + W^3| on r < r_max/2: %.3e\n", rep.laplace_residual);
    }
    if (rep.pass) return kPass;
    if (rep.warning) {
        std::fprintf(stderr, "warning: constants agree only to %.0e on this grid; refine the grid for %.0e\n", rep.loose_tolerance, rep.tolerance);
        return kPass;
    }
    for (const auto& r : rep.rows)
        if (r.rel_error >= rep.loose_tolerance) std::fprintf(stderr, "error: %s off by %.3e\n", r.name.c_str(), r.rel_error);
    return kCheckFailed;
}

int cmd_simulate(const Common& c) {
    const auto cfg = resolve(c);
    const auto res = zk::simulate(cfg);
    const fs::path dir(cfg.output.dir);
    const auto summary = zk::run_summary(cfg, res);
    if (cfg.wants("csv")) {
        write_file(dir / "run.csv", zk::run_csv(res.log));
        if (res.virial) write_file(dir / "virial.csv", zk::virial_csv(*res.virial));
    }
    if (cfg.wants("json")) write_file(dir / "summary.json", summary.dump(2) + "\n");
    if (c.json) {
        print_json(summary);
    } else {
        std::printf("verdict %s (%s)\n", zk::to_string(res.verdict.verdict), res.verdict.reason.c_str());
        std::printf("t_final %.6g  steps %d  rejected %d\n", res.log.final_state.t, res.log.steps, res.log.rejected);
        std::printf("mass drift %.3e  energy drift %.3e\n", res.log.mass_drift, res.log.energy_drift);
        for (const auto& e : res.log.events) std::printf("event t=%.6g %s %s\n", e.t, e.kind.c_str(), e.detail.c_str());
        if (res.virial) std::printf("virial mismatch R %.3e  inf %.3e\n", res.virial->mismatch_R, res.virial->mismatch_inf);
        std::printf("outputs in %s\n", dir.string().c_str());
    }
    return kPass;
}

int cmd_sweep(const Common& c) {
    const auto cfg = resolve(c);
    if (cfg.sweep.parameter.empty()) throw zk::ConfigError("sweep block with a parameter is required", "sweep.parameter");
    if (cfg.sweep.values.empty()) throw zk::ConfigError("no values to sweep", "sweep.values");
    const auto rows = zk::sweep(cfg);
    const fs::path dir(cfg.output.dir);
    const auto summary = zk::sweep_summary(cfg, rows);
    if (cfg.wants("csv")) write_file(dir / "sweep.csv", zk::sweep_csv(cfg.sweep.parameter, rows));
    if (cfg.wants("json")) write_file(dir / "sweep.json", summary.dump(2) + "\n");
    int failed = 0;
    if (c.json) print_json(summary);
    for (const auto& r : rows) {
        if (!r.ok) ++failed;
        if (c.json) continue;
        if (r.ok)
            std::printf("%s=%-8g E_Z/E_S=%-10.6g N0/thr=%-10.6g %-16s grad x%-8.3g\n", cfg.sweep.parameter.c_str(), r.parameter, r.energy_ratio,
                        r.mass_ratio, r.verdict.c_str(), r.grad_ratio);
        else
            std::printf("%s=%-8g error: %s\n", cfg.sweep.parameter.c_str(), r.parameter, r.error.c_str());
    }
    return failed ? kCheckFailed : kPass;
}

int cmd_probe(const Common& c) {
    const auto cfg = resolve(c);
    const auto rep = zk::probe(cfg);
    const fs::path dir(cfg.output.dir);
    if (cfg.wants("csv")) write_file(dir / "probe.csv", zk::probe_csv(rep));
    ordered_json j;
    j["horizons"] = rep.potential.horizons;
    j["ratio"] = rep.potential.ratio;
    j["x_ratio"] = rep.potential.x_ratio;
    if (rep.has_baseline) j["baseline_ratio"] = rep.baseline.ratio;
    j["config"] = zk::config_to_json(cfg);
    j["version"] = zk::version_string();
    j["seed"] = cfg.seed;
    if (cfg.wants("json")) write_file(dir / "probe.json", j.dump(2) + "\n");
    if (c.json) {
        print_json(j);
    } else {
        for (std::size_t h = 0; h < rep.potential.horizons.size(); ++h) {
            std::printf("T=%-6g ratio %.6g", rep.potential.horizons[h], rep.potential.ratio[h]);
            if (rep.has_baseline) std::printf("  baseline %.6g", rep.baseline.ratio[h]);
            std::printf("\n");
        }
    }
    return kPass;
}

int cmd_checks(const Common& c, const std::vector<std::string>& suites_in) {
    std::vector<std::string> suites = suites_in;
    if (suites.empty() || (suites.size() == 1 && suites[0] == "all")) suites = zk::check_suites();
    for (const auto& s : suites)
        if (std::find(zk::check_suites().begin(), zk::check_suites().end(), s) == zk::check_suites().end())
            throw zk::ConfigError("unknown suite '" + s + "'", "suite");
    const std::uint64_t seed = c.seed.value_or(1);
    bool all = true;
    ordered_json j = ordered_json::array();
    for (const auto& s : suites) {
        for (const auto& line : zk::run_check_suite(s, seed)) {
            all = all && line.pass;
            j.push_back({{"suite", line.suite}, {"check", line.name}, {"value", line.value}, {"limit", line.limit}, {"pass", line.pass}, {"detail", line.detail}});
            if (!c.json) {
                std::printf("%-4s %-12s %-26s value %-12.6g limit %-10.4g %s\n", line.pass ? "PASS" : "FAIL", line.suite.c_str(), line.name.c_str(),
                            line.value, line.limit, line.detail.c_str());
                std::fflush(stdout);
            }
        }
    }
    ordered_json report{{"pass", all}, {"seed", seed}, {"checks", j}, {"version", zk::version_string()}};
    if (!c.out.empty()) write_file(fs::path(c.out) / "checks.json", report.dump(2) + "\n");
    if (c.json) print_json(report);
    return all ? kPass : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zakharov4d: radial 4D Zakharov simulator and verification toolkit"};
    app.set_version_flag("--version", zk::version_string());
    app.require_subcommand(1);

    Common common;
    std::vector<std::string> suites;
    auto* constants = app.add_subcommand("constants", "ground state constants against closed forms");
    auto* simulate = app.add_subcommand("simulate", "run one scenario");
    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    auto* checks = app.add_subcommand("checks", "run verification suites");
    auto* probe = app.add_subcommand("probe", "Strichartz ratio probe");
    add_common(constants, common, false);
    add_common(simulate, common, true);
    add_common(sweep, common, true);
    add_common(checks, common, false);
    add_common(probe, common, false);
    checks->add_option("suite", suites, "weight, variational, normal_form, virial, strichartz, appendixA or all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    }

    try {
        if (common.threads > 0) zk::kernels::set_threads(common.threads);
        if (*constants) return cmd_constants(common);
        if (*simulate) return cmd_simulate(common);
        if (*sweep) return cmd_sweep(common);
        if (*checks) return cmd_checks(common, suites);
        if (*probe) return cmd_probe(common);
    } catch (const zk::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    } catch (const zk::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return kRuntime;
    }
    return kUsage;
}
