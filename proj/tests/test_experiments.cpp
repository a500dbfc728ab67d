#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "zk/experiments.hpp"

using namespace zk;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
grid: {n: 128, r_max: 30}
time: {dt: 0.01, t_end: 0.3}
initial:
  kind: gaussian
  amplitude: 0.8
  width: 1.5
  phase: 0.05
  n_amplitude: 0.4
diagnostics: {stride: 5, virial_R: 5, store_every: 0.02}
seed: 7
)";

std::vector<std::vector<std::string>> csv_cells(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

void check_all_finite(const std::string& csv) {
    const auto rows = csv_cells(csv);
    REQUIRE(rows.size() >= 2);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].size() == rows[0].size());
        for (const auto& c : rows[i]) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (end == c.c_str()) continue;  // text column
            CHECK(std::isfinite(v));
        }
    }
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("zk_test_" + std::to_string(::getpid()) + "_" + name);
    return p;
}

}  // namespace

TEST_CASE("empty config gives the documented defaults") {
    const auto c = parse_config("");
    CHECK(c.grid.n == 1024);
    CHECK(c.grid.r_max == 100);
    CHECK(c.seed == 1);
    CHECK(c.initial.kind == InitialKind::ground_state_scaled);
    CHECK(c.wants("csv"));
}

TEST_CASE("unknown keys are rejected with their line") {
    try {
        parse_config("grid:\n  n: 256\n  rmax: 40\n");
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(e.key == "grid.rmax");
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    try {
        parse_config("seed: 3\nbogus: 1\n");
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(e.key == "bogus");
        CHECK(e.line == 2);
    }
}

TEST_CASE("type and range errors carry key context") {
    auto key_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.key + "@" + std::to_string(e.line);
        }
        return std::string("none");
    };
    CHECK(key_of("time:\n  dt: fast\n") == "time.dt@2");
    CHECK(key_of("time:\n  dt: -1\n") == "time.dt@2");
    CHECK(key_of("grid: {n: 4}\n") == "grid.n@1");
    CHECK(key_of("initial: {kind: sech}\n") == "initial.kind@1");
    CHECK(key_of("mode: fast\n") == "mode@1");
    CHECK(key_of("time: 3\n") == "time@1");
    CHECK(key_of("diagnostics: {s_decay: 2}\n") == "diagnostics.s_decay@1");
    CHECK(key_of("probe: {delta: 0.5}\n") == "probe.delta@1");
    CHECK(key_of("probe:\n  horizons: [5, 3]\n") == "probe.horizons@2");
    CHECK(key_of("sweep: {parameter: colour, values: [1]}\n") == "sweep.parameter@1");
    CHECK(key_of("output: {formats: [csv, xml]}\n") == "output.formats@1");
    CHECK(key_of("time: {dt: .nan}\n") == "time.dt@1");
    CHECK(key_of("grid: [1\n") == "@2");
    CHECK(key_of("time: {dt: 0.01, dt_floor: 0.1}\n") == "time.dt_floor@1");
}

TEST_CASE("config echo re-parses to the same config") {
    auto c = parse_config(kSmall);
    c.sweep.parameter = "lambda";
    c.sweep.values = {0.7, 0.75, 1.0 / 3};
    c.time.dt_floor = 1e-4;
    c.seed = 18446744073709551557ull;
    c.initial.file = "data/x.txt";
    const auto j = config_to_json(c);
    const auto back = parse_config(j.dump());
    CHECK(config_to_json(back) == j);
    CHECK(back.seed == c.seed);
    CHECK(back.sweep.values[2] == 1.0 / 3);
    // the echo of the defaults is complete: every key appears
    CHECK(config_to_json(parse_config("")) == config_to_json(ScenarioConfig{}));
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1.5) == "1.5");
    CHECK(format_number(1e-300) == "1e-300");
    CHECK(std::stod(format_number(M_PI)) == doctest::Approx(M_PI).epsilon(1e-12));
    CHECK_THROWS(format_number(NAN));
    CHECK_THROWS(format_number(INFINITY));
}

TEST_CASE("simulate is deterministic and writes finite CSV") {
    const auto cfg = parse_config(kSmall);
    const auto a = simulate(cfg);
    const auto b = simulate(cfg);
    const std::string ca = run_csv(a.log), cb = run_csv(b.log);
    CHECK(ca == cb);
    CHECK(ca.rfind(kSchemaLine, 0) == 0);
    check_all_finite(ca);
    const auto head = csv_cells(ca)[0];
    CHECK(head == std::vector<std::string>{"t", "mass", "energy_Z", "grad_u_L2", "N_L2", "u_L4", "K_u", "local_mass", "u_L2ms", "dt_current",
                                           "sponge_active"});
    REQUIRE(a.virial);
    const std::string va = virial_csv(*a.virial);
    CHECK(va == virial_csv(*b.virial));
    check_all_finite(va);
    CHECK(csv_cells(va)[0] == std::vector<std::string>{"t", "V_R", "NS", "QN", "CC", "CC3p", "V_inf", "rate_inf", "fd_V_R", "fd_V_inf"});
    const auto s = run_summary(cfg, a);
    for (const char* k : {"verdict", "norms", "drifts", "events", "config", "version", "grid", "seed"}) CHECK(s.contains(k));
    CHECK(s["seed"] == 7);
    CHECK(s["grid"]["fingerprint"] == a.grid->fingerprint());
    CHECK(config_to_json(parse_config(s["config"].dump())) == s["config"]);
}

TEST_CASE("free mode keeps the energy fixed") {
    auto cfg = parse_config(kSmall);
    cfg.mode = EvolutionMode::free;
    cfg.diagnostics.virial_R = 0;
    const auto r = simulate(cfg);
    CHECK(r.log.energy_drift < 1e-12);
    CHECK(!r.virial);
}

TEST_CASE("blow-up ends rows and records an event") {
    auto cfg = parse_config("grid: {n: 256, r_max: 40}\ntime: {dt: 0.005, t_end: 20, ceiling_grad: 1.5}\ninitial: {lambda: 1.3}\n");
    const auto r = simulate(cfg);
    CHECK(r.verdict.verdict == Verdict::blowup_like);
    CHECK(r.log.final_state.t < 20);
    CHECK(!r.log.events.empty());
    check_all_finite(run_csv(r.log));
}

TEST_CASE("sweep keeps going past a failing row") {
    auto cfg = parse_config(kSmall);
    cfg.diagnostics.virial_R = 0;
    cfg.sweep.parameter = "width";
    cfg.sweep.values = {1.0, -1.0, 2.0};
    const auto rows = sweep(cfg);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].ok);
    CHECK(!rows[1].ok);
    CHECK(rows[1].error.find("initial.width") != std::string::npos);
    CHECK(rows[2].ok);
    const std::string csv = sweep_csv("width", rows);
    CHECK(csv == sweep_csv("width", sweep(cfg)));
    const auto cells = csv_cells(csv);
    CHECK(cells[2][1] == "error");
    CHECK(sweep_summary(cfg, rows)["failed"] == 1);
}

TEST_CASE("empty sweep is an error") {
    auto cfg = parse_config(kSmall);
    cfg.sweep.parameter = "lambda";
    CHECK_THROWS_AS(sweep(cfg), ConfigError);
    cfg.sweep.parameter.clear();
    cfg.sweep.values = {1};
    CHECK_THROWS_AS(sweep(cfg), ConfigError);
}

TEST_CASE("dt sweep reports second order") {
    auto cfg = parse_config(kSmall);
    cfg.diagnostics.virial_R = 0;
    cfg.sweep.parameter = "dt";
    cfg.sweep.values = {0.02, 0.01, 0.005};
    const auto rows = sweep(cfg);
    for (const auto& r : rows) {
        REQUIRE(r.ok);
        CHECK(r.order == doctest::Approx(2).epsilon(0.15));
    }
}

TEST_CASE("custom initial data from a file") {
    const fs::path dir = scratch("custom");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "profile.txt");
        f << "# r re_u im_u re_N im_N\n";
        for (int i = 0; i <= 300; ++i) {
            const double r = 0.1 * i;
            f << r << " " << std::exp(-r * r / 4) << " 0 " << 0.5 * std::exp(-r * r / 4) << " 0\n";
        }
    }
    {
        std::ofstream f(dir / "c.yaml");
        f << "grid: {n: 128, r_max: 30}\ninitial: {kind: custom_file, file: profile.txt}\n";
    }
    const auto cfg = load_config((dir / "c.yaml").string());
    const auto g = scenario_grid(cfg);
    const auto s = initial_state(g, cfg);
    double worst = 0;
    for (std::size_t k = 0; k < g->r.size(); ++k) worst = std::max(worst, std::abs(s.u[k] - std::exp(-g->r[k] * g->r[k] / 4)));
    CHECK(worst < 2e-3);
    {
        std::ofstream f(dir / "profile.txt");
        f << "0 1 0 0 0\n0.5 1 0 0\n";
    }
    try {
        initial_state(g, cfg);
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
    }
    fs::remove(dir / "profile.txt");
    CHECK_THROWS_AS(initial_state(g, cfg), IoError);
    fs::remove_all(dir);
    CHECK_THROWS_AS(load_config((dir / "c.yaml").string()), IoError);
}

TEST_CASE("coarse-grid constants land in the warning band") {
    const auto rep = constants_report(make_grid(256, 50));
    CHECK(!rep.pass);
    CHECK(rep.warning);
    for (const auto& r : rep.rows) CHECK(r.rel_error < 1e-2);
}

TEST_CASE("probe report against the free baseline") {
    auto cfg = parse_config("grid: {n: 128, r_max: 60}\npotential: {kind: free_wave, mass: 0.5}\nprobe: {ensemble: 2, horizons: [1, 2], dt: 0.02}\n");
    const auto rep = probe(cfg);
    REQUIRE(rep.has_baseline);
    REQUIRE(rep.potential.ratio.size() == 2);
    const std::string csv = probe_csv(rep);
    check_all_finite(csv);
    CHECK(csv == probe_csv(probe(cfg)));
}

TEST_CASE("weight check suite") {
    const auto lines = run_check_suite("weight", 1);
    REQUIRE(lines.size() == 3);
    for (const auto& l : lines) CHECK_MESSAGE(l.pass, l.name);
    CHECK_THROWS_AS(run_check_suite("nope", 1), ConfigError);
}

TEST_CASE("shipped example configs load") {
    int count = 0;
    for (const auto& e : fs::directory_iterator(fs::path(ZK_SOURCE_DIR) / "configs")) {
        if (e.path().extension() != ".yaml") continue;
        CHECK_NOTHROW(load_config(e.path().string()));
        ++count;
    }
    CHECK(count >= 5);
}
