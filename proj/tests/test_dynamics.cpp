#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "zk/dynamics.hpp"

using namespace zk;

namespace {

RadialField gauss(const GridPtr& g, double a, double w, double phase = 0) {
    return sample(g, [=](double r) { return a * std::exp(-r * r / (2 * w * w)) * std::polar(1.0, phase * r * r); });
}

ZakharovState gauss_state(const GridPtr& g, double a, double b) { return {gauss(g, a, 1.5, 0.1), gauss(g, b, 2.0), 0.0}; }

double max_rel_diff(const ZakharovState& a, const ZakharovState& b) {
    return std::max(rel_l2_diff(a.u, b.u), rel_l2_diff(a.N, b.N));
}

}  // namespace

TEST_CASE("config validation") {
    IntegratorConfig c;
    CHECK_NOTHROW(c.validate());
    c.dt = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.ceiling_grad = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.sponge.enabled = true;
    c.sponge.start = 1.2;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("free mode reproduces the exact linear flows") {
    auto g = make_grid(256, 30);
    const auto s0 = gauss_state(g, 0.8, 0.5);
    IntegratorConfig c;
    c.mode = EvolutionMode::free;
    c.dt = 0.01;
    c.alpha = 0.7;
    ZakharovState s = s0;
    for (int i = 0; i < 100; ++i) s = step(s, c);
    CHECK(s.t == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rel_l2_diff(s.u, schrodinger_flow(s0.u, 1.0)) < 1e-12);
    CHECK(rel_l2_diff(s.N, wave_flow(s0.N, 1.0, 0.7)) < 1e-12);
}

TEST_CASE("full step is time reversible") {
    auto g = make_grid(256, 30);
    const auto s0 = gauss_state(g, 1.0, 0.7);
    IntegratorConfig c;
    c.dt = 0.005;
    Stepper st(g, c);
    st.load(s0);
    for (int i = 0; i < 50; ++i) REQUIRE(st.advance(0.005));
    CHECK(max_rel_diff(st.state(), s0) > 1e-3);
    for (int i = 0; i < 50; ++i) REQUIRE(st.advance(-0.005));
    CHECK(max_rel_diff(st.state(), s0) < 1e-11);
    CHECK(std::abs(st.time()) < 1e-12);
}

TEST_CASE("mass is conserved and energy converges at second order") {
    auto g = make_grid(256, 30);
    const auto s0 = gauss_state(g, 1.0, 0.7);
    const double m0 = l2_norm_sq(s0.u);
    double drift[3];
    for (int k = 0; k < 3; ++k) {
        IntegratorConfig c;
        c.dt = 0.02 / (1 << k);
        Stepper st(g, c);
        st.load(s0);
        const double e0 = st.energy_Z();
        double worst = 0;
        const int n = 50 << k;
        for (int i = 0; i < n; ++i) {
            REQUIRE(st.advance(c.dt));
            worst = std::max(worst, std::abs(st.energy_Z() - e0));
        }
        drift[k] = worst;
        CHECK(std::abs(l2_norm_sq(st.state().u) / m0 - 1) < 1e-12);
    }
    CHECK(drift[0] / drift[1] == doctest::Approx(4).epsilon(0.25));
    CHECK(drift[1] / drift[2] == doctest::Approx(4).epsilon(0.25));
}

TEST_CASE("energy of the stepper agrees with the functionals") {
    auto g = make_grid(256, 30);
    const auto s0 = gauss_state(g, 1.0, 0.7);
    IntegratorConfig c;
    Stepper st(g, c);
    st.load(s0);
    const auto e = functionals(s0.u, s0.N);
    CHECK(st.energy_Z() == doctest::Approx(e.energy_Z).epsilon(1e-10));
    CHECK(st.grad_sq() == doctest::Approx(e.grad_sq).epsilon(1e-10));
}

TEST_CASE("ground state is stationary") {
    auto g = make_grid(512, 100);
    const auto W = truncated_W(g);
    ZakharovState s{W, W * W, 0};
    IntegratorConfig c;
    c.dt = 1e-3;
    Stepper st(g, c);
    st.load(s);
    for (int i = 0; i < 200; ++i) REQUIRE(st.advance(c.dt));
    const auto out = st.state();
    double worst = 0;
    for (std::size_t k = 0; k < W.size(); ++k)
        if (g->r[k] < 50) worst = std::max(worst, std::abs(out.u[k] - W[k]));
    CHECK(worst < 1e-3);
}

TEST_CASE("run log rows and events") {
    auto g = make_grid(256, 30);
    const auto s0 = gauss_state(g, 0.5, 0.2);
    IntegratorConfig c;
    c.dt = 0.01;
    c.monitor_every = 5;
    Diagnostics d;
    d.store_trajectory = true;
    d.store_every = 0.1;
    const auto log = run(s0, c, 1.0, d);
    CHECK(log.steps == 100);
    CHECK(log.rows.size() == 21);
    CHECK(log.rows.front().t == 0.0);
    CHECK(log.rows.back().t == doctest::Approx(1.0));
    CHECK(log.traj_u.size() == 11);
    CHECK(log.mass_drift < 1e-12);
    CHECK(!log.blowup);
    const auto m = measure(s0, d, c.dt, false);
    CHECK(m.mass == doctest::Approx(l2_norm_sq(s0.u)));
    CHECK(m.u_L2ms == doctest::Approx(lp_norm(s0.u, 8.0 / 3.0)));
    CHECK(m.local_mass == doctest::Approx(ball_mass(s0.u, 10)));
    CHECK(log.rows.front().energy_Z == doctest::Approx(functionals(s0.u, s0.N).energy_Z).epsilon(1e-10));
}

TEST_CASE("gradient ceiling trips on a focusing profile") {
    auto g = make_grid(256, 40);
    const auto W = truncated_W(g, 1.3);
    IntegratorConfig c;
    c.dt = 0.005;
    c.ceiling_grad = 1.5;
    const auto log = run({W, W * W, 0}, c, 20.0, {});
    CHECK(log.blowup);
    bool found = false;
    for (const auto& e : log.events) found = found || e.kind == "grad_ceiling";
    CHECK(found);
    CHECK(scattering_diagnostics(log).verdict == Verdict::blowup_like);
}

TEST_CASE("verdict rules on synthetic logs") {
    RunLog log;
    log.max_grad_ratio = 1.2;
    for (int i = 0; i <= 40; ++i) {
        LogRow r{};
        r.t = i;
        r.local_mass = std::exp(-0.2 * i);
        r.u_L2ms = 1.0 / (1 + 0.1 * i);
        log.rows.push_back(r);
    }
    CHECK(scattering_diagnostics(log).verdict == Verdict::scattering_like);
    auto flat = log;
    for (auto& r : flat.rows) r.local_mass = 1;
    const auto v = scattering_diagnostics(flat);
    CHECK(v.verdict == Verdict::inconclusive);
    CHECK(v.local_ratio == 1.0);
    auto grown = log;
    grown.max_grad_ratio = 6;
    CHECK(scattering_diagnostics(grown).verdict == Verdict::inconclusive);
    CHECK(std::string(to_string(Verdict::blowup_like)) == "blowup_like");
}

TEST_CASE("wave component with vanishing u is the free wave") {
    auto g = make_grid(128, 30);
    ZakharovState s0{RadialField(g), gauss(g, 0.5, 2.0), 0};
    IntegratorConfig c;
    c.dt = 0.05;
    Diagnostics d;
    d.store_trajectory = true;
    d.store_every = 0.5;
    const auto log = run(s0, c, 2.0, d);
    const auto dec = decompose_N(log.traj_u, log.traj_N, 0.125, 1.0, 8);
    CHECK(dec.NN_sup == 0.0);
    CHECK(dec.ND_sup < 1e-12 * dec.NF_sup);
    CHECK(dec.NF_spread < 1e-12);
}

TEST_CASE("random band limited data") {
    auto g = make_grid(256, 60);
    std::mt19937_64 a(5), b(5);
    const auto f = random_band_limited(g, 0.25, 3, a);
    const auto h = random_band_limited(g, 0.25, 3, b);
    CHECK(l2_norm_sq(f) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rel_l2_diff(f, h) == 0.0);
    const auto fh = to_spectral(f);
    double out = 0;
    for (std::size_t k = 0; k < fh.size(); ++k)
        if (g->rho[k] >= 6.0 || g->rho[k] <= 0.125) out += std::norm(fh[k]);
    CHECK(out < 1e-20);
}

TEST_CASE("log-log slope") {
    CHECK(loglog_slope({1, 2, 4, 8}, {3, 3 * std::sqrt(2.0), 6, 6 * std::sqrt(2.0)}) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK_THROWS(loglog_slope({1}, {1}));
}

TEST_CASE("strichartz probe with no potential") {
    auto g = make_grid(128, 60);
    ProbeConfig p;
    p.ensemble = 2;
    p.horizons = {1, 2};
    p.dt = 0.02;
    const auto r = strichartz_probe(g, {}, p);
    REQUIRE(r.ratio.size() == 2);
    CHECK(r.ratio[0] > 0);
    CHECK(r.ratio[1] >= r.ratio[0]);
    REQUIRE(r.member_ratio.size() == 2);
    const auto r2 = strichartz_probe(g, {}, p);
    CHECK(r2.ratio == r.ratio);
}

TEST_CASE("static potential growth probe on a coarse grid") {
    auto g = make_grid(256, 10);
    const auto a = appendix_a_probe(g, {4, 8}, 0.5, 8);
    CHECK(a.predicted == 0.5);
    REQUIRE(a.norms.size() == 2);
    CHECK(a.norms[1] > a.norms[0]);
    CHECK(std::abs(a.exponent - 0.5) < 0.15);
}
