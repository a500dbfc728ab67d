// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here, not configurable.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "zk/experiments.hpp"

using namespace zk;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

bool all_pass(const std::vector<CheckLine>& lines, std::string& detail) {
    bool ok = true;
    for (const auto& l : lines) {
        ok = ok && l.pass;
        if (!detail.empty()) detail += "; ";
        detail += l.name + "=" + fmt("%.4g", l.value) + (l.pass ? "" : " (limit " + fmt("%.4g", l.limit) + ")");
    }
    return ok;
}

Outcome constants() {
    const auto t0 = Clock::now();
    const auto rep = constants_report(make_grid(4096, 400));
    const double secs = seconds_since(t0);
    double worst = 0;
    for (const auto& r : rep.rows) worst = std::max(worst, r.rel_error);
    const bool ok = worst < 1e-5 && rep.laplace_residual < 1e-6 && secs < 30;
    return {ok, "max rel error " + fmt("%.2e", worst) + ", |Lap W + W^3| " + fmt("%.2e", rep.laplace_residual) + ", " + fmt("%.1f s", secs)};
}

Outcome transform_pair() {
    const auto g = make_grid(512, 40);
    const RadialField f = sample(g, [](double r) { return cplx(std::exp(-r * r / 2)); });
    const RadialField exact = sample_spectral(g, [](double p) { return cplx(4 * M_PI * M_PI * std::exp(-p * p / 2)); });
    const double pair = rel_l2_diff(transform(f), exact);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    RadialField s(g, Space::spectral);
    for (int k = 0; k < 3 * 512 / 4; ++k) s[k] = cplx(nd(rng), nd(rng)) * std::exp(-0.002 * k);
    const RadialField h = transform(s);
    const double round = rel_l2_diff(transform(transform(h)), h);
    const double phys = l2_norm_sq(h);
    const double planch = std::abs(phys - l2_norm_sq_spectral(transform(h))) / phys;
    return {pair < 1e-8 && round < 1e-10 && planch < 1e-8,
            "gaussian pair " + fmt("%.2e", pair) + ", round trip " + fmt("%.2e", round) + ", plancherel " + fmt("%.2e", planch)};
}

Outcome conservation() {
    const auto g = make_grid(256, 30);
    const RadialField u0 = sample(g, [](double r) { return std::exp(-r * r / 4.5) * std::polar(1.0, 0.1 * r * r); });
    const RadialField N0 = sample(g, [](double r) { return cplx(0.7 * std::exp(-r * r / 8)); });
    const double m0 = l2_norm_sq(u0);
    IntegratorConfig c;
    c.dt = 0.01;
    Stepper st(g, c);
    st.load({u0, N0, 0});
    double mass = 0;
    for (int i = 1; i <= 10000; ++i) {
        if (!st.advance(c.dt)) return {false, "non-finite state"};
        if (i % 100 == 0) mass = std::max(mass, std::abs(l2_norm_sq(st.state().u) / m0 - 1));
    }
    double drift[2];
    for (int k = 0; k < 2; ++k) {
        IntegratorConfig ck;
        ck.dt = 0.02 / (1 << k);
        Stepper sk(g, ck);
        sk.load({u0, N0, 0});
        const double e0 = sk.energy_Z();
        double worst = 0;
        for (int i = 0; i < (50 << k); ++i) {
            sk.advance(ck.dt);
            worst = std::max(worst, std::abs(sk.energy_Z() - e0));
        }
        drift[k] = worst;
    }
    const double ratio = drift[0] / drift[1];
    return {mass < 1e-10 && ratio >= 3 && ratio <= 5, "mass drift " + fmt("%.2e", mass) + " over 1e4 steps, E_Z drift ratio " + fmt("%.3f", ratio)};
}

Outcome stationarity() {
    const auto g = make_grid(2048, 200);
    const RadialField W = truncated_W(g);
    const RadialField W2 = W * W;
    IntegratorConfig c;
    c.dt = 1e-3;
    Stepper st(g, c);
    st.load({W, W2, 0});
    const double R = g->r_max / 4;
    const double m0 = ball_mass(W, R), n0 = ball_mass(W2, R);
    double worst = 0;
    for (int i = 1; i <= 1000; ++i) {
        st.advance(c.dt);
        if (i % 100) continue;
        const auto s = st.state();
        double sup = 0;
        for (std::size_t k = 0; k < W.size() && g->r[k] < R; ++k) sup = std::max(sup, std::abs(s.u[k] - W[k]));
        worst = std::max({worst, std::abs(ball_mass(s.u, R) / m0 - 1), std::abs(ball_mass(s.N, R) / n0 - 1), sup});
    }
    return {worst < 0.01, "max interior change " + fmt("%.2e", worst) + " on r < " + fmt("%g", R)};
}

Outcome suite(const char* name) {
    std::string detail;
    const bool ok = all_pass(run_check_suite(name, 1), detail);
    return {ok, detail};
}

Outcome dichotomy_sweep() {
    ScenarioConfig cfg;
    cfg.grid = {1024, 100};
    cfg.time.dt = 0.01;
    cfg.time.t_end = 40;
    cfg.time.adaptive = true;
    cfg.time.dt_floor = 1e-4;
    cfg.sponge.enabled = true;
    cfg.diagnostics.stride = 50;
    cfg.sweep.parameter = "lambda";
    for (int i = 0; i <= 12; ++i) cfg.sweep.values.push_back(0.7 + 0.05 * i);
    const auto t0 = Clock::now();
    const auto rows = sweep(cfg);
    const double secs = seconds_since(t0);
    bool flip = true;
    double loc09 = NAN, grad11 = NAN;
    bool blow11 = false;
    std::string verdicts;
    for (const auto& r : rows) {
        if (!r.ok) return {false, "row " + fmt("%g", r.parameter) + " failed: " + r.error};
        const double lam = r.parameter;
        verdicts += (r.verdict == "scattering_like" ? 'S' : r.verdict == "blowup_like" ? 'B' : '?');
        if (lam < 1 - 0.05 - 1e-9 && r.verdict != "scattering_like") flip = false;
        if (lam > 1 + 0.05 - 1e-9 && r.verdict != "blowup_like") flip = false;
        if (std::abs(lam - 0.9) < 1e-9) loc09 = r.local_ratio;
        if (std::abs(lam - 1.1) < 1e-9) {
            blow11 = r.verdict == "blowup_like";
            grad11 = r.grad_ratio;
        }
    }
    const bool ok = flip && loc09 <= 0.5 && blow11 && grad11 >= 5 && secs < 600;
    return {ok, "verdicts " + verdicts + " (lambda 0.7..1.3), lambda 0.9 local ratio " + fmt("%.3f", loc09) + ", lambda 1.1 grad growth " +
                    fmt("%.2f", grad11) + "x, " + fmt("%.0f s", secs)};
}

Outcome growth_and_probe() {
    std::string detail;
    bool ok = all_pass(run_check_suite("appendixA", 1), detail);
    std::string d2;
    ok = all_pass(run_check_suite("strichartz", 1), d2) && ok;
    return {ok, detail + "; " + d2};
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    struct Item {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const Item items[] = {
        {1, "ground state constants", constants},
        {2, "transform pair, round trip, Plancherel", transform_pair},
        {3, "mass and energy conservation", conservation},
        {4, "ground state stationarity", stationarity},
        {5, "virial identities and weights", [] { return suite("virial"); }},
        {6, "variational dichotomy and estK", [] { return suite("variational"); }},
        {7, "frequency weight", [] { return suite("weight"); }},
        {8, "normal form gain and round trip", [] { return suite("normal_form"); }},
        {9, "dichotomy sweep", dichotomy_sweep},
        {10, "growth exponent and below-threshold probe", growth_and_probe},
    };
    int failed = 0;
    for (const auto& it : items) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = it.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", it.id, it.name, o.detail.c_str(), seconds_since(t0));
    }
    std::printf("%d of 10 criteria passed\n", 10 - failed);
    return failed ? 1 : 0;
}
